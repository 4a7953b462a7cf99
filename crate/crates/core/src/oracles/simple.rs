//! The "simple" term `Ψ` of the composite objective.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::smooth::CONJUGATE_DOMAIN_RTOL;
use crate::scalar::{CompensatedSum, Scalar};

/// Feasibility slack used when evaluating indicator functions.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SimpleFn<S> {
    Zero,
    /// `lambda * ||x||_1`.
    L1 {
        lambda: S,
    },
    /// Indicator of `{x : lower <= x <= upper}`; bounds may be infinite.
    Box {
        lower: Vector<S>,
        upper: Vector<S>,
    },
    /// Indicator of the unit simplex `{x >= 0, sum x = 1}`.
    Simplex,
    /// Indicator of `{x : ||x||_1 <= radius}`.
    L1Ball {
        radius: S,
    },
}

impl<S: Scalar> SimpleFn<S> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::L1 { .. } => "l1",
            Self::Box { .. } => "box",
            Self::Simplex => "simplex",
            Self::L1Ball { .. } => "l1-ball",
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, Self::Box { .. } | Self::Simplex | Self::L1Ball { .. })
    }

    /// Whether the domain of `Ψ` is bounded.
    pub fn is_compact(&self) -> bool {
        match self {
            Self::Box { lower, upper } => lower.iter().chain(upper.iter()).all(|b| b.is_finite()),
            Self::Simplex | Self::L1Ball { .. } => true,
            Self::Zero | Self::L1 { .. } => false,
        }
    }

    /// Membership in `dom Ψ` up to [`FEASIBILITY_TOL`].
    pub fn contains(&self, x: &Vector<S>) -> bool {
        let tol = S::lit(FEASIBILITY_TOL);
        if !x.is_finite() {
            return false;
        }
        match self {
            Self::Zero | Self::L1 { .. } => true,
            Self::Box { lower, upper } => x.iter().enumerate().all(|(i, &v)| {
                let lo = lower[i];
                let hi = upper[i];
                (lo == S::neg_infinity() || v >= lo - tol * lo.abs().max(S::one()))
                    && (hi == S::infinity() || v <= hi + tol * hi.abs().max(S::one()))
            }),
            Self::Simplex => {
                x.iter().all(|&v| v >= -tol)
                    && (x.sum() - S::one()).abs() <= tol * S::from_count(x.dim().max(1))
            }
            Self::L1Ball { radius } => x.norm1() <= *radius * (S::one() + tol),
        }
    }

    /// `Ψ(x)`, `+∞` outside the domain.
    pub fn value(&self, x: &Vector<S>) -> S {
        match self {
            Self::Zero => S::zero(),
            Self::L1 { lambda } => *lambda * x.norm1(),
            _ => {
                if self.contains(x) {
                    S::zero()
                } else {
                    S::infinity()
                }
            }
        }
    }

    /// Convex conjugate `Ψ*(v) = sup_x <v, x> - Ψ(x)`, possibly `+∞`.
    pub fn conjugate(&self, v: &Vector<S>) -> S {
        let rtol = S::lit(CONJUGATE_DOMAIN_RTOL);
        match self {
            Self::Zero => {
                if v.iter().all(|&a| a == S::zero()) {
                    S::zero()
                } else {
                    S::infinity()
                }
            }
            Self::L1 { lambda } => {
                if v.norm_inf() <= *lambda * (S::one() + rtol) {
                    S::zero()
                } else {
                    S::infinity()
                }
            }
            Self::Box { lower, upper } => {
                let mut acc = CompensatedSum::new();
                for (i, &a) in v.iter().enumerate() {
                    let term = if a > S::zero() {
                        a * upper[i]
                    } else if a < S::zero() {
                        a * lower[i]
                    } else {
                        S::zero()
                    };
                    if term == S::infinity() {
                        return S::infinity();
                    }
                    acc.add(term);
                }
                acc.value()
            }
            Self::Simplex => v.iter().fold(S::neg_infinity(), |m, &a| m.max(a)),
            Self::L1Ball { radius } => *radius * v.norm_inf(),
        }
    }

    /// A minimizer of `<c, s> + Ψ(s)`; ties go to the lowest-index vertex.
    pub fn linmin(&self, c: &Vector<S>) -> Result<Vector<S>> {
        let n = c.dim();
        match self {
            Self::Zero => {
                if c.iter().all(|&a| a == S::zero()) {
                    Ok(Vector::zeros(n))
                } else {
                    Err(Error::NotAdmissible(
                        "linear objective unbounded below without a constraint".into(),
                    ))
                }
            }
            Self::L1 { lambda } => {
                if c.norm_inf() <= *lambda {
                    Ok(Vector::zeros(n))
                } else {
                    Err(Error::NotAdmissible(
                        "linear term dominates the l1 penalty".into(),
                    ))
                }
            }
            Self::Box { lower, upper } => {
                let mut s = Vector::zeros(n);
                for i in 0..n {
                    let target = if c[i] < S::zero() { upper[i] } else { lower[i] };
                    if !target.is_finite() && c[i] != S::zero() {
                        return Err(Error::NotAdmissible("unbounded box side".into()));
                    }
                    s[i] = if target.is_finite() {
                        target
                    } else if lower[i].is_finite() {
                        lower[i]
                    } else if upper[i].is_finite() {
                        upper[i]
                    } else {
                        S::zero()
                    };
                }
                Ok(s)
            }
            Self::Simplex => {
                let mut best = 0;
                for i in 1..n {
                    if c[i] < c[best] {
                        best = i;
                    }
                }
                Ok(Vector::basis(n, best, S::one()))
            }
            Self::L1Ball { radius } => {
                // vertices ordered +e_0, -e_0, +e_1, ...; value of ±r e_i is ±r c_i
                let mut best = (0, S::one());
                let mut best_val = S::infinity();
                for i in 0..n {
                    for sign in [S::one(), -S::one()] {
                        let val = sign * *radius * c[i];
                        if val < best_val {
                            best_val = val;
                            best = (i, sign);
                        }
                    }
                }
                Ok(Vector::basis(n, best.0, best.1 * *radius))
            }
        }
    }

    /// `(1 - θ) Ψ(x) + θ Ψ(s) - Ψ((1 - θ) x + θ s)` for `x, s` in the domain.
    pub fn convexity_gap(&self, x: &Vector<S>, s: &Vector<S>, theta: S) -> S {
        if theta == S::zero() || theta == S::one() {
            return S::zero();
        }
        match self {
            Self::L1 { lambda } => {
                let one_m = S::one() - theta;
                let mut acc = CompensatedSum::new();
                for i in 0..x.dim() {
                    let (a, b) = (x[i], s[i]);
                    if (a >= S::zero()) != (b >= S::zero()) {
                        let mix = a + theta * (b - a);
                        acc.add(one_m * a.abs() + theta * b.abs() - mix.abs());
                    }
                }
                *lambda * acc.value()
            }
            _ => {
                if self.contains(x) && self.contains(s) {
                    S::zero()
                } else {
                    S::infinity()
                }
            }
        }
    }
}
