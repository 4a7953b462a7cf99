use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{LinearMap, Vector};
use crate::oracles::prox::{self, ProxSolution};
use crate::oracles::reference::ReferenceFn;
use crate::oracles::simple::SimpleFn;
use crate::oracles::smooth::SmoothFn;
use crate::scalar::Scalar;

/// A regularity condition an instance claims, with its constants.
///
/// Each variant is checked by sampling in [`crate::problems::verify_constants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum Claim {
    /// `D_{f∘A}(y, x) <= L D_h(y, x)`.
    RelativeSmooth { l: f64 },
    /// `𝒟(x, (1-θ)x + θ s_-, s, θ) <= L θ^γ D_h(s, s_-)`.
    TriangleSmooth { l: f64, gamma: f64 },
    /// `𝒟(x, (1-θ)x + θ s_-, s, θ) <= 2 M θ^(1+ν) D_h(s, s_-)^((1+ν)/2) / (1+ν)`.
    HolderSmooth { m: f64, nu: f64 },
    /// `t <A* g, s - x> + D_h(s, x) >= -M t^2 / 2` for `g ∈ ∂f(Ax)`.
    RelativeContinuity { m: f64 },
    /// `D(x, s, θ) <= M θ^(1+ν) / (1+ν)` on `dom Ψ` (used with `h = 0`).
    Curvature { m: f64, nu: f64 },
}

impl Claim {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RelativeSmooth { .. } => "relative-smooth",
            Self::TriangleSmooth { .. } => "triangle-smooth",
            Self::HolderSmooth { .. } => "holder-smooth",
            Self::RelativeContinuity { .. } => "relative-continuity",
            Self::Curvature { .. } => "curvature",
        }
    }

    /// Multiplies the `L` constant of smoothness-type claims.
    pub fn scale_l(self, factor: f64) -> Self {
        match self {
            Self::RelativeSmooth { l } => Self::RelativeSmooth { l: l * factor },
            Self::TriangleSmooth { l, gamma } => Self::TriangleSmooth {
                l: l * factor,
                gamma,
            },
            other => other,
        }
    }

    /// Multiplies the `M` constant of continuity/curvature-type claims.
    pub fn scale_m(self, factor: f64) -> Self {
        match self {
            Self::HolderSmooth { m, nu } => Self::HolderSmooth { m: m * factor, nu },
            Self::RelativeContinuity { m } => Self::RelativeContinuity { m: m * factor },
            Self::Curvature { m, nu } => Self::Curvature { m: m * factor, nu },
            other => other,
        }
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::RelativeSmooth { l } => write!(f, "relative-smooth(L={l:e})"),
            Self::TriangleSmooth { l, gamma } => {
                write!(f, "triangle-smooth(L={l:e}, gamma={gamma})")
            }
            Self::HolderSmooth { m, nu } => write!(f, "holder-smooth(M={m:e}, nu={nu})"),
            Self::RelativeContinuity { m } => write!(f, "relative-continuity(M={m:e})"),
            Self::Curvature { m, nu } => write!(f, "curvature(M={m:e}, nu={nu})"),
        }
    }
}

/// Optimal value together with one minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownOptimum<S> {
    pub value: S,
    pub point: Vector<S>,
}

/// `min_x f(Ax) + Ψ(x)` together with the reference function used by the
/// proximal steps and the starting point `s_{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance<S> {
    pub name: String,
    pub a: LinearMap<S>,
    pub f: SmoothFn<S>,
    pub psi: SimpleFn<S>,
    pub h: ReferenceFn,
    pub claims: Vec<Claim>,
    pub known_optimum: Option<KnownOptimum<S>>,
    pub start: Vector<S>,
}

impl<S: Scalar> ProblemInstance<S> {
    pub fn dim(&self) -> usize {
        self.a.input_dim()
    }

    /// Checks dimensions and that the start lies in `dom Ψ ∩ dom h`.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.f.dim() != self.a.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.a.output_dim(),
                got: self.f.dim(),
            });
        }
        self.start.check_dim(n)?;
        self.start.check_finite()?;
        if let SimpleFn::Box { lower, upper } = &self.psi {
            lower.check_dim(n)?;
            upper.check_dim(n)?;
        }
        if !self.psi.contains(&self.start) {
            return Err(Error::Domain("Ψ at the starting point".into()));
        }
        if !self.h.in_gradient_domain(&self.start) {
            return Err(Error::Domain(format!(
                "reference function `{}` at the starting point",
                self.h
            )));
        }
        if let Some(opt) = &self.known_optimum {
            opt.point.check_dim(n)?;
        }
        Ok(())
    }

    /// `F(x) = f(Ax) + Ψ(x)`.
    pub fn objective(&self, x: &Vector<S>) -> Result<S> {
        let ax = self.a.apply(x)?;
        Ok(self.f.value(&ax) + self.psi.value(x))
    }

    pub fn prox(&self, c: &Vector<S>, t: S, s_prev: &Vector<S>) -> Result<ProxSolution<S>> {
        prox::prox_step(self.h, &self.psi, c, t, s_prev)
    }

    pub fn claim<T>(&self, pick: impl Fn(&Claim) -> Option<T>) -> Option<T> {
        self.claims.iter().find_map(pick)
    }

    pub fn relative_smooth(&self) -> Option<f64> {
        self.claim(|c| match c {
            Claim::RelativeSmooth { l } => Some(*l),
            _ => None,
        })
    }

    pub fn triangle_smooth(&self) -> Option<(f64, f64)> {
        self.claim(|c| match c {
            Claim::TriangleSmooth { l, gamma } => Some((*l, *gamma)),
            _ => None,
        })
    }

    pub fn holder_smooth(&self) -> Option<(f64, f64)> {
        self.claim(|c| match c {
            Claim::HolderSmooth { m, nu } => Some((*m, *nu)),
            _ => None,
        })
    }

    pub fn relative_continuity(&self) -> Option<f64> {
        self.claim(|c| match c {
            Claim::RelativeContinuity { m } => Some(*m),
            _ => None,
        })
    }

    pub fn curvature(&self) -> Option<(f64, f64)> {
        self.claim(|c| match c {
            Claim::Curvature { m, nu } => Some((*m, *nu)),
            _ => None,
        })
    }
}
