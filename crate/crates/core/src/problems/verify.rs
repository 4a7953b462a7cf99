//! Sampling checks for the declared smoothness constants.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::engine::{script_d, simple_d};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::{Claim, ProblemInstance, ReferenceFn, SimpleFn, SmoothFn};
use crate::scalar::Scalar;

/// A claim passes when no sampled ratio exceeds `1 + VERIFY_RATIO_TOL`.
pub const VERIFY_RATIO_TOL: f64 = 1e-9;

/// Relative distance kept from the boundary when `h` blows up there.
const INTERIOR_MARGIN: f64 = 1e-3;

/// Denominators below this are skipped: the ratio is noise.
const MIN_DENOMINATOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub claim: Claim,
    pub samples: usize,
    pub skipped: usize,
    /// Largest `lhs / rhs` seen; `0` if every sample was skipped.
    pub max_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub instance: String,
    pub claims: Vec<ClaimReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }
}

struct Sampler<'a, S: Scalar> {
    inst: &'a ProblemInstance<S>,
    rng: SplitMix64,
}

impl<'a, S: Scalar> Sampler<'a, S> {
    fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.rng.gen::<f64>()
    }

    fn margin(&self) -> f64 {
        match self.inst.h {
            ReferenceFn::Entropy | ReferenceFn::Burg => INTERIOR_MARGIN,
            _ => 0.0,
        }
    }

    /// A random point of `dom Ψ ∩ dom h`; vertices are drawn with positive
    /// probability when `h ≡ 0` since curvature is worst there.
    fn point(&mut self) -> Vector<S> {
        let n = self.inst.dim();
        let vertex = self.inst.h.is_zero() && self.rng.gen_bool(0.25);
        let coords: Vec<f64> = match &self.inst.psi {
            SimpleFn::Simplex => {
                if vertex {
                    let mut e = vec![0.0; n];
                    e[self.rng.gen_range(0..n)] = 1.0;
                    e
                } else {
                    // Dirichlet(1) with a sharpening power to reach corners
                    let p = self.uniform(1.0, 4.0);
                    let w: Vec<f64> = (0..n)
                        .map(|_| (-self.uniform(1e-12, 1.0).ln()).powf(p))
                        .collect();
                    let total: f64 = w.iter().sum();
                    let delta = self.margin();
                    w.iter()
                        .map(|v| (1.0 - n as f64 * delta) * v / total + delta)
                        .collect()
                }
            }
            SimpleFn::Box { lower, upper } => {
                let delta = self.margin();
                (0..n)
                    .map(|i| {
                        let lo = lower.as_slice()[i].to_f64_lossy();
                        let hi = upper.as_slice()[i].to_f64_lossy();
                        let (lo, hi) = (lo.max(-1e3), hi.min(lo.max(-1e3) + 2e3));
                        let pad = delta * (hi - lo);
                        self.uniform(lo + pad, hi - pad)
                    })
                    .collect()
            }
            SimpleFn::L1Ball { radius } => {
                let r = radius.to_f64_lossy();
                if vertex {
                    let mut e = vec![0.0; n];
                    e[self.rng.gen_range(0..n)] = if self.rng.gen_bool(0.5) { r } else { -r };
                    e
                } else {
                    let w: Vec<f64> = (0..n).map(|_| self.uniform(-1.0, 1.0)).collect();
                    let l1: f64 = w
                        .iter()
                        .map(|v| v.abs())
                        .sum::<f64>()
                        .max(f64::MIN_POSITIVE);
                    let scale = r * self.uniform(0.0, 1.0);
                    w.iter().map(|v| scale * v / l1).collect()
                }
            }
            SimpleFn::Zero | SimpleFn::L1 { .. } => {
                let spread = 2.0 * self.inst.start.norm_inf().to_f64_lossy().max(1.0);
                (0..n).map(|_| self.uniform(-spread, spread)).collect()
            }
        };
        Vector::from_f64(&coords)
    }

    fn theta(&mut self) -> f64 {
        if self.rng.gen_bool(0.1) {
            1.0
        } else {
            // log-uniform to probe small steps
            10f64.powf(self.uniform(-4.0, 0.0))
        }
    }
}

#[derive(Default)]
struct Tally {
    samples: usize,
    skipped: usize,
    max_ratio: f64,
}

impl Tally {
    fn record(&mut self, lhs: f64, rhs: f64) {
        self.samples += 1;
        if !lhs.is_finite() || !rhs.is_finite() || rhs < MIN_DENOMINATOR {
            self.skipped += 1;
            return;
        }
        self.max_ratio = self.max_ratio.max(lhs / rhs);
    }

    fn finish(self, claim: Claim) -> ClaimReport {
        ClaimReport {
            claim,
            samples: self.samples,
            skipped: self.skipped,
            max_ratio: self.max_ratio,
            passed: self.max_ratio <= 1.0 + VERIFY_RATIO_TOL,
        }
    }
}

/// Samples `samples` tuples per declared claim and reports the worst ratio
/// of the claimed inequality's left side to its right side.
pub fn verify_constants<S: Scalar>(
    inst: &ProblemInstance<S>,
    samples: usize,
    seed: u64,
) -> Result<VerifyReport> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be positive".into()));
    }
    let mut claims = Vec::new();
    for (idx, claim) in inst.claims.iter().enumerate() {
        let mut sampler = Sampler {
            inst,
            rng: SplitMix64::seed_from_u64(seed.wrapping_add(idx as u64)),
        };
        let mut tally = Tally::default();
        for _ in 0..samples {
            let (lhs, rhs) = sample_claim(&mut sampler, claim)?;
            tally.record(lhs, rhs);
        }
        claims.push(tally.finish(*claim));
    }
    Ok(VerifyReport {
        instance: inst.name.clone(),
        claims,
    })
}

fn f64s<S: Scalar>(v: S) -> f64 {
    v.to_f64_lossy()
}

fn sample_claim<S: Scalar>(sp: &mut Sampler<'_, S>, claim: &Claim) -> Result<(f64, f64)> {
    let inst = sp.inst;
    match *claim {
        Claim::RelativeSmooth { l } => {
            let x = sp.point();
            let y = sp.point();
            let ax = inst.a.apply(&x)?;
            let g = inst.f.subgradient(&ax)?;
            let lhs = inst.f.bregman(&inst.a.apply(&y)?, &ax, &g);
            let dh = inst.h.bregman(&y, &x)?;
            Ok((f64s(lhs), l * f64s(dh)))
        }
        Claim::TriangleSmooth { l, gamma } => {
            let (x, s, s_prev, theta) = (sp.point(), sp.point(), sp.point(), sp.theta());
            let th = S::lit(theta);
            let y = x.lerp(&s_prev, th);
            let g = inst.f.subgradient(&inst.a.apply(&y)?)?;
            let lhs = script_d(inst, &x, &y, &g, &s, th)?;
            let dh = inst.h.bregman(&s, &s_prev)?;
            Ok((f64s(lhs), l * theta.powf(gamma) * f64s(dh)))
        }
        Claim::HolderSmooth { m, nu } => {
            let (x, s, s_prev, theta) = (sp.point(), sp.point(), sp.point(), sp.theta());
            let th = S::lit(theta);
            let y = x.lerp(&s_prev, th);
            let g = inst.f.subgradient(&inst.a.apply(&y)?)?;
            let lhs = script_d(inst, &x, &y, &g, &s, th)?;
            let dh = f64s(inst.h.bregman(&s, &s_prev)?);
            let rhs = 2.0 * m * theta.powf(1.0 + nu) * dh.powf((1.0 + nu) / 2.0) / (1.0 + nu);
            Ok((f64s(lhs), rhs))
        }
        Claim::RelativeContinuity { m } => {
            let mut x = sp.point();
            let mut g = inst.f.subgradient(&inst.a.apply(&x)?)?;
            // at a zero residual every sign vector in [-1, 1]^m is a subgradient
            if let (SmoothFn::L1Residual { .. }, Some(opt)) = (&inst.f, &inst.known_optimum) {
                if sp.rng.gen_bool(0.125) {
                    x = opt.point.clone();
                    let sigma: Vec<f64> = (0..g.dim())
                        .map(|_| if sp.rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                        .collect();
                    g = Vector::from_f64(&sigma);
                }
            }
            let c = inst.a.adjoint_apply(&g)?;
            let t = 10f64.powf(sp.uniform(-3.0, 2.0));
            let s = if sp.rng.gen_bool(0.5) {
                // the unconstrained minimizer for the squared-euclidean h
                x.axpy(-S::lit(t), &c)
            } else {
                sp.point()
            };
            let lin = f64s(c.dot(&s.sub(&x)));
            let dh = f64s(inst.h.bregman(&s, &x)?);
            let lhs = -(t * lin + dh);
            Ok((lhs.max(0.0), m * t * t / 2.0))
        }
        Claim::Curvature { m, nu } => {
            let (x, s, theta) = (sp.point(), sp.point(), sp.theta());
            let g = inst.f.subgradient(&inst.a.apply(&x)?)?;
            let lhs = simple_d(inst, &x, &g, &s, S::lit(theta))?;
            Ok((f64s(lhs), m * theta.powf(1.0 + nu) / (1.0 + nu)))
        }
    }
}
