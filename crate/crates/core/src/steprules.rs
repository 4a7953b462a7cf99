//! Step-size selection: schedules, the `t ↔ θ` correspondence, geometric
//! backtracking on the descent conditions and the conditional-gradient line
//! search.

use serde::{Deserialize, Serialize};

use crate::engine::{propose, simple_d_mapped, EngineState, Proposal, Step, YSelector};
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::oracles::ProblemInstance;
use crate::scalar::Scalar;

fn default_r() -> f64 {
    2.0
}
fn default_t_init() -> f64 {
    1.0
}
fn default_max_halvings() -> usize {
    60
}
fn default_max_growth() -> usize {
    30
}
fn default_t_max() -> f64 {
    1e15
}
fn default_ls_iters() -> usize {
    64
}
fn default_ls_tol() -> f64 {
    1e-10
}

/// Parameters of the geometric backtracking search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backtracking {
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_t_init")]
    pub t_init: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
    /// Growth steps allowed per iteration before a passing step is accepted
    /// without a failing neighbour.
    #[serde(default = "default_max_growth")]
    pub max_growth: usize,
    /// Upper limit on any candidate step.
    #[serde(default = "default_t_max")]
    pub t_max: f64,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            r: default_r(),
            t_init: default_t_init(),
            max_halvings: default_max_halvings(),
            max_growth: default_max_growth(),
            t_max: default_t_max(),
        }
    }
}

impl Backtracking {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 1.0) || !self.r.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "backtracking ratio r = {} must exceed 1",
                self.r
            )));
        }
        if !(self.t_init > 0.0) || !self.t_init.is_finite() {
            return Err(Error::InvalidStep(self.t_init));
        }
        if self.max_halvings == 0 {
            return Err(Error::InvalidParameter(
                "max_halvings must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// How `t_k` (equivalently `θ_k`) is chosen at every iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepRule {
    FixedT {
        t: f64,
    },
    /// `t_k = ts[k]`; the schedule must cover the whole run.
    FixedScheduleT {
        ts: Vec<f64>,
    },
    /// `θ_k = (1+ν)/(k+1+ν)`.
    ThetaScheduleCg {
        nu: f64,
    },
    BacktrackSmooth {
        #[serde(flatten)]
        params: Backtracking,
    },
    BacktrackUniversal {
        eps: f64,
        #[serde(flatten)]
        params: Backtracking,
    },
    /// Step from the declared smoothness constant: `t = 1/L` for the
    /// proximal gradient method, the boundary of `t θ^(γ-1) <= 1/L` for
    /// the fast method. Promises the descent condition with zero slack,
    /// so an understated constant shows up as a violation.
    InverseSmoothness,
    /// `θ_k = argmin_θ (1-θ) CGgap_k + D(x_k, s_k, θ)`.
    LineSearchCg {
        #[serde(default = "default_ls_iters")]
        max_iters: usize,
        #[serde(default = "default_ls_tol")]
        interval_tol: f64,
    },
}

impl StepRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::FixedT { t } => {
                if !(*t > 0.0) || !t.is_finite() {
                    return Err(Error::InvalidStep(*t));
                }
            }
            Self::FixedScheduleT { ts } => {
                if let Some(bad) = ts.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
                    return Err(Error::InvalidStep(*bad));
                }
            }
            Self::ThetaScheduleCg { nu } => {
                if !(*nu > 0.0 && *nu <= 1.0) {
                    return Err(Error::InvalidParameter(format!("nu = {nu} outside (0, 1]")));
                }
            }
            Self::BacktrackSmooth { params } => params.validate()?,
            Self::BacktrackUniversal { eps, params } => {
                if !(*eps > 0.0) || !eps.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "eps = {eps} must be positive"
                    )));
                }
                params.validate()?;
            }
            Self::InverseSmoothness => {}
            Self::LineSearchCg {
                max_iters,
                interval_tol,
            } => {
                if *max_iters == 0 || !(*interval_tol > 0.0) {
                    return Err(Error::InvalidParameter(
                        "line search needs iterations and a positive tolerance".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Ratio `r` of backtracking rules.
    pub fn ratio(&self) -> Option<f64> {
        match self {
            Self::BacktrackSmooth { params } | Self::BacktrackUniversal { params, .. } => {
                Some(params.r)
            }
            _ => None,
        }
    }

    pub fn is_backtracking(&self) -> bool {
        self.ratio().is_some()
    }
}

/// `θ_k = t_k / (T_{k-1} + t_k)`.
pub fn theta_from_history<S: Scalar>(t: S, t_prev_sum: S) -> S {
    t / (t_prev_sum + t)
}

/// Inverse of [`theta_from_history`]: `t_k = θ_k T / (1 - θ_k)`.
///
/// With `T = 0` only `θ = 1` is meaningful and the caller's `t_first` is
/// returned.
pub fn t_from_theta<S: Scalar>(theta: S, t_prev_sum: S, t_first: S) -> Result<S> {
    if t_prev_sum == S::zero() {
        return if theta == S::one() {
            Ok(t_first)
        } else {
            Err(Error::InvalidParameter(
                "the first weight must be θ = 1".into(),
            ))
        };
    }
    if !(theta > S::zero() && theta < S::one()) {
        return Err(Error::InvalidParameter(format!(
            "θ = {theta} must lie in (0, 1) once steps have been taken"
        )));
    }
    Ok(theta * t_prev_sum / (S::one() - theta))
}

/// `(1+ν)/(k+1+ν)`.
pub fn cg_theta<S: Scalar>(k: usize, nu: S) -> S {
    (S::one() + nu) / (S::from_count(k + 1) + nu)
}

/// `L (γ/(k+γ))^γ`.
pub fn lemma1_bound(k: usize, gamma: f64, l: f64) -> f64 {
    l * (gamma / (k as f64 + gamma)).powf(gamma)
}

/// Whether `a^α b^β <= ((α a + β b)/(α+β))^(α+β)` up to `1e-12` relative.
pub fn amgm_check(a: f64, b: f64, alpha: f64, beta: f64) -> bool {
    let lhs = a.powf(alpha) * b.powf(beta);
    let rhs = ((alpha * a + beta * b) / (alpha + beta)).powf(alpha + beta);
    lhs <= rhs * (1.0 + 1e-12)
}

/// Smallest step with `t θ(t)^(γ-1) >= 1/L`, `θ(t) = t/(T+t)`: the boundary
/// of the step-size condition in the fast-method lemma.
pub fn lemma1_boundary_step(gamma: f64, l: f64, t_prev_sum: f64) -> f64 {
    let target = 1.0 / l;
    if t_prev_sum == 0.0 {
        return target;
    }
    if gamma == 2.0 {
        return (target + (target * target + 4.0 * t_prev_sum * target).sqrt()) / 2.0;
    }
    let phi = |t: f64| t * (t / (t_prev_sum + t)).powf(gamma - 1.0);
    let mut hi = target.max(t_prev_sum);
    while phi(hi) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= hi * 1e-16 {
            break;
        }
    }
    hi
}

/// `(t_k, θ_k)` for `k < iterations` along the boundary sequence of
/// [`lemma1_boundary_step`].
pub fn lemma1_sequence(gamma: f64, l: f64, iterations: usize) -> Vec<(f64, f64)> {
    let mut total = 0.0;
    (0..iterations)
        .map(|_| {
            let t = lemma1_boundary_step(gamma, l, total);
            let theta = theta_from_history(t, total);
            total += t;
            (t, theta)
        })
        .collect()
}

/// Derivative-free minimization of a convex function on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket.
pub fn golden_section<S: Scalar>(
    mut lo: S,
    mut hi: S,
    max_iters: usize,
    tol: S,
    f: impl Fn(S) -> S,
) -> S {
    let inv_phi = S::lit((5f64.sqrt() - 1.0) / 2.0);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..max_iters {
        if hi - lo < tol {
            break;
        }
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    (lo + hi) / S::lit(2.0)
}

/// Line-search weight for a conditional-gradient step from `x` towards `s`,
/// with `g ∈ ∂f(Ax)` and the current `CGgap_k`.
#[allow(clippy::too_many_arguments)]
pub fn linesearch_cg<S: Scalar>(
    inst: &ProblemInstance<S>,
    x: &Vector<S>,
    ax: &Vector<S>,
    g: &Vector<S>,
    s: &Vector<S>,
    as_: &Vector<S>,
    cggap: S,
    max_iters: usize,
    interval_tol: S,
) -> S {
    golden_section(S::zero(), S::one(), max_iters, interval_tol, |theta| {
        let val = (S::one() - theta) * cggap + simple_d_mapped(inst, x, ax, g, s, as_, theta);
        if val.is_nan() {
            S::infinity()
        } else {
            val
        }
    })
}

/// Outcome of a backtracking search.
#[derive(Debug, Clone)]
pub struct Accepted<S> {
    pub proposal: Proposal<S>,
    /// The declared slack `ε_k` of the accepted step (`t ε` or zero).
    pub eps: S,
    /// Whether `r t` was evaluated and failed the condition.
    pub r_large_verified: bool,
    pub evaluations: usize,
}

/// `(t/θ) 𝒟 <= D_h(s, s_prev) + t ε`, with a relative rounding allowance.
pub fn descent_condition_holds<S: Scalar>(p: &Proposal<S>, t_prev_sum: S, eps: S) -> bool {
    let weight = t_prev_sum + p.step.t;
    let lhs = weight * p.script_d;
    let slack = S::lit(1e-12) * (p.bregman_h.abs() + lhs.abs());
    lhs <= p.bregman_h + p.step.t * eps + slack
}

/// Geometric backtracking on the descent condition, `eps = 0` for the smooth
/// variant.
///
/// The first candidate is `t_init` at `k = 0` and `r` times the previously
/// accepted step afterwards. Failing candidates are divided by `r`; passing
/// ones are multiplied by `r` until a candidate fails, so that the accepted
/// step passes while `r t` fails.
pub fn backtrack<S: Scalar>(
    state: &EngineState<S>,
    inst: &ProblemInstance<S>,
    ysel: YSelector,
    params: &Backtracking,
    eps: S,
) -> Result<Accepted<S>> {
    let r = S::lit(params.r);
    let t_max = S::lit(params.t_max);
    let tp = state.t_total();
    let mut evaluations = 0;
    let mut eval = |t: S| -> Result<Option<Proposal<S>>> {
        evaluations += 1;
        match propose(state, inst, ysel, Step::from_t(t, tp)) {
            Ok(p) => Ok(descent_condition_holds(&p, tp, eps).then_some(p)),
            // overshooting steps may leave the domain of f or underflow
            Err(Error::Domain(_)) | Err(Error::Underflow) | Err(Error::NonFinite) => Ok(None),
            Err(e) => Err(e),
        }
    };

    let mut t = match state.last_step {
        None => S::lit(params.t_init),
        Some(prev) => (prev.t * r).min(t_max),
    };
    if let Some(mut best) = eval(t)? {
        let mut verified = false;
        for _ in 0..params.max_growth {
            if best.sol.s == state.s_prev {
                break;
            }
            let cand = t * r;
            if cand > t_max {
                break;
            }
            match eval(cand)? {
                Some(p) => {
                    t = cand;
                    best = p;
                }
                None => {
                    verified = true;
                    break;
                }
            }
        }
        let eps_k = best.step.t * eps;
        return Ok(Accepted {
            proposal: best,
            eps: eps_k,
            r_large_verified: verified,
            evaluations,
        });
    }
    for _ in 0..params.max_halvings {
        t = t / r;
        if let Some(p) = eval(t)? {
            let eps_k = p.step.t * eps;
            return Ok(Accepted {
                proposal: p,
                eps: eps_k,
                r_large_verified: true,
                evaluations,
            });
        }
    }
    Err(Error::BacktrackFailed {
        k: state.k,
        t_min: t.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearMap;
    use crate::oracles::{ReferenceFn, SimpleFn, SmoothFn};

    fn half_square() -> ProblemInstance<f64> {
        ProblemInstance {
            name: "half-square".into(),
            a: LinearMap::Identity(1),
            f: SmoothFn::LeastSquares {
                target: Vector::from_f64(&[0.0]),
                offset: 0.0,
            },
            psi: SimpleFn::Zero,
            h: ReferenceFn::SquaredEuclidean,
            claims: vec![],
            known_optimum: None,
            start: Vector::from_f64(&[1.0]),
        }
    }

    fn first_step(t_init: f64) -> Accepted<f64> {
        let inst = half_square();
        let st = EngineState::init(&inst).unwrap();
        let params = Backtracking {
            t_init,
            ..Backtracking::default()
        };
        backtrack(&st, &inst, YSelector::ProxPoint, &params, 0.0).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_from_history(1.0, 0.0), 1.0);
        assert_eq!(theta_from_history(1.0, 1.0), 0.5);
        let (t1, t2) = (1.0f64, 1.0f64);
        let th1 = theta_from_history(t1, 1.0);
        let th2 = theta_from_history(t2, 2.0);
        assert!((th2 / t2 - (1.0 - th2) * th1 / t1).abs() < 1e-15);
        assert_eq!(t_from_theta(0.5, 1.0, 9.0).unwrap(), 1.0);
        assert!((t_from_theta(2.0f64 / 3.0, 1.0, 9.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(t_from_theta(1.0, 0.0, 9.0).unwrap(), 9.0);
        assert!(t_from_theta(1.0, 1.0, 9.0).is_err());
    }

    #[test]
    fn cg_theta_examples() {
        assert_eq!(cg_theta(0, 1.0), 1.0);
        assert_eq!(cg_theta(2, 1.0), 0.5);
        assert!((cg_theta(3, 0.5f64) - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_bound(0, 2.0, 1.0), 1.0);
        assert_eq!(lemma1_bound(2, 2.0, 1.0), 0.25);
        assert_eq!(lemma1_boundary_step(2.0, 1.0, 0.0), 1.0);
        // t^2 / (T + t) = 1/L at T = 1, L = 1
        let t = lemma1_boundary_step(2.0, 1.0, 1.0);
        assert!((t * t / (1.0 + t) - 1.0).abs() < 1e-14);
        let t = lemma1_boundary_step(1.5, 10.0, 3.0);
        assert!((t * (t / (3.0 + t)).sqrt() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn amgm_examples() {
        assert!(amgm_check(1.0, 1.0, 0.3, 2.0));
        assert!(amgm_check(1.0, 3.0, 1.0, 1.0));
        assert!(amgm_check(4.0, 1.0, 1.0, 1.0));
        assert!(amgm_check(1.0, 3.0, 1.0, 1.0));
    }

    #[test]
    fn backtracking_shrinks_to_inverse_smoothness() {
        let acc = first_step(4.0);
        assert_eq!(acc.proposal.step.t, 1.0);
        assert!(acc.r_large_verified);
    }

    #[test]
    fn backtracking_grows_to_inverse_smoothness() {
        let acc = first_step(0.25);
        assert_eq!(acc.proposal.step.t, 1.0);
        assert!(acc.r_large_verified);
    }

    #[test]
    fn generous_slack_accepts_first_candidate() {
        let inst = half_square();
        let st = EngineState::init(&inst).unwrap();
        let params = Backtracking {
            t_init: 4.0,
            max_growth: 0,
            ..Backtracking::default()
        };
        let acc = backtrack(&st, &inst, YSelector::ProxPoint, &params, 100.0).unwrap();
        assert_eq!(acc.proposal.step.t, 4.0);
        assert_eq!(acc.evaluations, 1);
    }

    #[test]
    fn exhausted_halvings_fail() {
        let mut inst = half_square();
        inst.f = SmoothFn::L1Residual {
            target: Vector::from_f64(&[0.0]),
        };
        inst.start = Vector::from_f64(&[1e-30]);
        let st = EngineState::init(&inst).unwrap();
        let params = Backtracking {
            max_halvings: 3,
            ..Backtracking::default()
        };
        let err = backtrack(&st, &inst, YSelector::ProxPoint, &params, 0.0).unwrap_err();
        assert!(matches!(err, Error::BacktrackFailed { k: 0, .. }));
    }

    #[test]
    fn golden_section_examples() {
        // (1-θ) 2 + 2 θ^2 is minimized at θ = 1/2
        // (function values only resolve the minimizer to about sqrt(eps))
        let phi = |t: f64| (1.0 - t) * 2.0 + 2.0 * t * t;
        let th = golden_section(0.0, 1.0, 64, 1e-10, phi);
        assert!((th - 0.5).abs() < 1e-7);
        assert!(phi(th) <= phi(0.5) + 1e-10);
        // flat objective: deterministic midpoint of the final bracket
        let a = golden_section(0.0, 1.0, 64, 1e-10, |_t: f64| 0.0);
        let b = golden_section(0.0, 1.0, 64, 1e-10, |_t: f64| 0.0);
        assert_eq!(a, b);
        assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn cg_line_search_example() {
        // f = x^2/2 on [-1, 1], x = 1, s = -1, CGgap = 2
        let mut inst = half_square();
        inst.psi = SimpleFn::Box {
            lower: Vector::from_f64(&[-1.0]),
            upper: Vector::from_f64(&[1.0]),
        };
        inst.h = ReferenceFn::Zero;
        let x = Vector::from_f64(&[1.0]);
        let s = Vector::from_f64(&[-1.0]);
        let th = linesearch_cg(&inst, &x, &x, &x, &s, &s, 2.0, 64, 1e-10);
        assert!((th - 0.5).abs() < 1e-7);
    }

    #[test]
    fn rule_validation() {
        assert!(StepRule::FixedT { t: 0.0 }.validate().is_err());
        assert!(StepRule::ThetaScheduleCg { nu: 1.5 }.validate().is_err());
        let bad = StepRule::BacktrackSmooth {
            params: Backtracking {
                r: 1.0,
                ..Backtracking::default()
            },
        };
        assert!(bad.validate().is_err());
        assert!(StepRule::BacktrackUniversal {
            eps: 0.0,
            params: Backtracking::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn rules_deserialize_with_defaults() {
        let rule: StepRule =
            serde_json::from_str(r#"{"kind": "backtrack-smooth", "r": 3}"#).unwrap();
        assert_eq!(
            rule,
            StepRule::BacktrackSmooth {
                params: Backtracking {
                    r: 3.0,
                    ..Backtracking::default()
                }
            }
        );
    }
}
