//! Loss functions `f : F -> R ∪ {+∞}` composed with the linear map.
//!
//! Besides value and subgradient, every loss carries a closed-form convex
//! conjugate and cancellation-free formulas for its Bregman distance and its
//! convexity gap along a segment. The latter two feed the step-size tests,
//! where the quantities of interest are tiny differences of function values.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::{r_minus_ln1p, CompensatedSum, Scalar};

/// Relative slack accepted on the boundary of a conjugate's domain.
pub const CONJUGATE_DOMAIN_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothFn<S> {
    /// `f(y) = ||y - target||^2 / 2 + offset`.
    LeastSquares { target: Vector<S>, offset: S },
    /// `f(y) = ||y - target||_1`.
    L1Residual { target: Vector<S> },
    /// `f(y) = ||y - target||_2^(1+nu) / (1+nu)`, gradient `nu`-Hölder.
    HolderResidual { target: Vector<S>, nu: S },
    /// `f(y) = sum_i y_i - counts_i ln y_i` on `y > 0`.
    PoissonLikelihood { counts: Vector<S> },
}

impl<S: Scalar> SmoothFn<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::LeastSquares { .. } => "least-squares",
            Self::L1Residual { .. } => "l1-residual",
            Self::HolderResidual { .. } => "holder-residual",
            Self::PoissonLikelihood { .. } => "poisson-likelihood",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::LeastSquares { target, .. }
            | Self::L1Residual { target }
            | Self::HolderResidual { target, .. } => target.dim(),
            Self::PoissonLikelihood { counts } => counts.dim(),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        !matches!(self, Self::L1Residual { .. })
    }

    fn domain_error(&self) -> Error {
        Error::Domain(format!("loss `{}`", self.name()))
    }

    pub fn in_domain(&self, y: &Vector<S>) -> bool {
        match self {
            Self::PoissonLikelihood { counts } => y
                .iter()
                .zip(counts.iter())
                .all(|(&v, &b)| v > S::zero() || (b == S::zero() && v == S::zero())),
            _ => y.is_finite(),
        }
    }

    /// `f(y)`, `+∞` outside the domain.
    pub fn value(&self, y: &Vector<S>) -> S {
        debug_assert_eq!(y.dim(), self.dim());
        if !self.in_domain(y) {
            return S::infinity();
        }
        match self {
            Self::LeastSquares { target, offset } => {
                y.sub(target).norm_sq() / S::lit(2.0) + *offset
            }
            Self::L1Residual { target } => y.sub(target).norm1(),
            Self::HolderResidual { target, nu } => {
                let p = S::one() + *nu;
                y.sub(target).norm2().powf(p) / p
            }
            Self::PoissonLikelihood { counts } => {
                let mut acc = CompensatedSum::new();
                for (&v, &b) in y.iter().zip(counts.iter()) {
                    acc.add(v);
                    if b != S::zero() {
                        acc.add(-b * v.ln());
                    }
                }
                acc.value()
            }
        }
    }

    /// An element of `∂f(y)`; the gradient wherever `f` is differentiable.
    pub fn subgradient(&self, y: &Vector<S>) -> Result<Vector<S>> {
        y.check_dim(self.dim())?;
        match self {
            Self::LeastSquares { target, .. } => Ok(y.sub(target)),
            Self::L1Residual { target } => Ok(y.zip_map(target, |a, b| {
                let r = a - b;
                if r > S::zero() {
                    S::one()
                } else if r < S::zero() {
                    -S::one()
                } else {
                    S::zero()
                }
            })),
            Self::HolderResidual { target, nu } => {
                let r = y.sub(target);
                let norm = r.norm2();
                if norm == S::zero() {
                    Ok(Vector::zeros(r.dim()))
                } else {
                    Ok(r.scale(norm.powf(*nu - S::one())))
                }
            }
            Self::PoissonLikelihood { counts } => {
                if !y.iter().all(|&v| v > S::zero()) {
                    return Err(self.domain_error());
                }
                Ok(y.zip_map(counts, |v, b| S::one() - b / v))
            }
        }
    }

    /// Convex conjugate `f*(u) = sup_y <u, y> - f(y)`, possibly `+∞`.
    pub fn conjugate(&self, u: &Vector<S>) -> S {
        debug_assert_eq!(u.dim(), self.dim());
        let rtol = S::lit(CONJUGATE_DOMAIN_RTOL);
        match self {
            Self::LeastSquares { target, offset } => {
                u.norm_sq() / S::lit(2.0) + u.dot(target) - *offset
            }
            Self::L1Residual { target } => {
                if u.norm_inf() <= S::one() + rtol {
                    u.dot(target)
                } else {
                    S::infinity()
                }
            }
            Self::HolderResidual { target, nu } => {
                if *nu == S::zero() {
                    if u.norm2() <= S::one() + rtol {
                        u.dot(target)
                    } else {
                        S::infinity()
                    }
                } else {
                    // conjugate exponent q = (1 + nu) / nu
                    let q = (S::one() + *nu) / *nu;
                    u.norm2().powf(q) / q + u.dot(target)
                }
            }
            Self::PoissonLikelihood { counts } => {
                let mut acc = CompensatedSum::new();
                for (&ui, &b) in u.iter().zip(counts.iter()) {
                    if b == S::zero() {
                        if ui > S::one() + rtol {
                            return S::infinity();
                        }
                    } else if ui >= S::one() {
                        return S::infinity();
                    } else {
                        acc.add(b * ((b / (S::one() - ui)).ln() - S::one()));
                    }
                }
                acc.value()
            }
        }
    }

    /// `f(a) - f(y) - <g, a - y>` for `g ∈ ∂f(y)`.
    pub fn bregman(&self, a: &Vector<S>, y: &Vector<S>, g: &Vector<S>) -> S {
        match self {
            // exact for the gradient g = y - target
            Self::LeastSquares { .. } => a.sub(y).norm_sq() / S::lit(2.0),
            Self::L1Residual { target } => {
                let mut acc = CompensatedSum::new();
                for i in 0..a.dim() {
                    let ra = a[i] - target[i];
                    let ry = y[i] - target[i];
                    acc.add(ra.abs() - ry.abs() - g[i] * (ra - ry));
                }
                acc.value()
            }
            Self::HolderResidual { .. } => {
                let fa = self.value(a);
                let fy = self.value(y);
                fa - fy - g.dot(&a.sub(y))
            }
            Self::PoissonLikelihood { counts } => {
                if !self.in_domain(a) {
                    return S::infinity();
                }
                let mut acc = CompensatedSum::new();
                for i in 0..a.dim() {
                    let b = counts[i];
                    if b != S::zero() {
                        acc.add(b * r_minus_ln1p((a[i] - y[i]) / y[i]));
                    }
                }
                acc.value()
            }
        }
    }

    /// `(1 - θ) f(a) + θ f(c) - f((1 - θ) a + θ c)`, which is nonnegative.
    pub fn convexity_gap(&self, a: &Vector<S>, c: &Vector<S>, theta: S) -> S {
        if theta == S::zero() || theta == S::one() {
            return S::zero();
        }
        let one_m = S::one() - theta;
        match self {
            Self::LeastSquares { .. } => theta * one_m * a.sub(c).norm_sq() / S::lit(2.0),
            Self::L1Residual { target } => {
                let mut acc = CompensatedSum::new();
                for i in 0..a.dim() {
                    let ra = a[i] - target[i];
                    let rc = c[i] - target[i];
                    if (ra >= S::zero()) != (rc >= S::zero()) {
                        let mix = ra + theta * (rc - ra);
                        acc.add(one_m * ra.abs() + theta * rc.abs() - mix.abs());
                    }
                }
                acc.value()
            }
            Self::HolderResidual { .. } => {
                let mix = a.lerp(c, theta);
                one_m * self.value(a) + theta * self.value(c) - self.value(&mix)
            }
            Self::PoissonLikelihood { counts } => {
                if !self.in_domain(a) || !self.in_domain(c) {
                    return S::infinity();
                }
                let mut acc = CompensatedSum::new();
                for i in 0..a.dim() {
                    let b = counts[i];
                    if b == S::zero() {
                        continue;
                    }
                    // b [ (1-θ) ln(m/a) + θ ln(m/c) ],  m = a + θ (c - a)
                    let d = c[i] - a[i];
                    let la = (theta * d / a[i]).ln_1p();
                    let lc = (-one_m * d / c[i]).ln_1p();
                    acc.add(b * (one_m * la + theta * lc));
                }
                acc.value()
            }
        }
    }
}
