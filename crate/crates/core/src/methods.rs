//! The named algorithms as configurations of the engine and a step rule,
//! with each method's convergence bound evaluated alongside the trace.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{propose, EngineState, ReportMode, Step, YSelector};
use crate::error::{Error, Result};
use crate::oracles::{is_registered, KnownOptimum, ProblemInstance};
use crate::scalar::Scalar;
use crate::steprules::{self, Backtracking, StepRule};

/// Rule for the conditional-gradient weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CgSchedule {
    /// `θ_k = (1+ν)/(k+1+ν)`.
    #[default]
    Theta,
    LineSearch {
        #[serde(default = "default_ls_iters")]
        max_iters: usize,
        #[serde(default = "default_ls_tol")]
        interval_tol: f64,
    },
}

fn default_ls_iters() -> usize {
    64
}
fn default_ls_tol() -> f64 {
    1e-10
}
fn default_smooth_rule() -> StepRule {
    StepRule::BacktrackSmooth {
        params: Backtracking::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MethodConfig {
    /// Linear-minimization steps (`h = 0`) with `y_k = x_k`.
    ConditionalSubgradient {
        /// Exponent of the weight schedule; defaults to the instance's
        /// curvature exponent.
        #[serde(default)]
        nu: Option<f64>,
        #[serde(default)]
        schedule: CgSchedule,
    },
    /// Proximal steps at `y_k = s_{k-1}`.
    ProxGradient {
        #[serde(default = "default_smooth_rule")]
        rule: StepRule,
    },
    /// Proximal steps at `y_k = s_{k-1}` with `t = C/√K` over a fixed horizon.
    ProxSubgradient { c: f64 },
    /// Proximal steps at `y_k = (1-θ_k) x_k + θ_k s_{k-1}`.
    FastGradient {
        /// Must match the instance's triangle-scaling exponent when given.
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_smooth_rule")]
        rule: StepRule,
    },
    /// Fast steps with the `ε`-relaxed descent condition.
    UniversalGradient {
        eps: f64,
        #[serde(default)]
        backtracking: Backtracking,
    },
}

impl fmt::Display for MethodConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl MethodConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ConditionalSubgradient { .. } => "conditional-subgradient",
            Self::ProxGradient { .. } => "prox-gradient",
            Self::ProxSubgradient { .. } => "prox-subgradient",
            Self::FastGradient { .. } => "fast-gradient",
            Self::UniversalGradient { .. } => "universal-gradient",
        }
    }

    pub fn y_selector(&self) -> YSelector {
        match self {
            Self::ConditionalSubgradient { .. } => YSelector::CurrentAverage,
            Self::ProxGradient { .. } | Self::ProxSubgradient { .. } => YSelector::ProxPoint,
            Self::FastGradient { .. } | Self::UniversalGradient { .. } => YSelector::FastCombo,
        }
    }

    /// The subgradient method reports `z_k`, every other method `x_k`.
    pub fn report_mode(&self) -> ReportMode {
        match self {
            Self::ProxSubgradient { .. } => ReportMode::AverageZ,
            _ => ReportMode::AverageX,
        }
    }

    /// Checks that the method can run on `inst`.
    pub fn validate<S: Scalar>(&self, inst: &ProblemInstance<S>) -> Result<()> {
        let cg = matches!(self, Self::ConditionalSubgradient { .. });
        if cg != inst.h.is_zero() {
            return Err(Error::Incompatible(format!(
                "{} needs {} reference function, instance `{}` uses `{}`",
                self.name(),
                if cg { "the zero" } else { "a nonzero" },
                inst.name,
                inst.h
            )));
        }
        if !is_registered(inst.h, &inst.psi) {
            return Err(Error::UnsupportedPair {
                reference: inst.h.name().into(),
                simple: inst.psi.name().into(),
            });
        }
        match self {
            Self::ConditionalSubgradient { nu, .. } => {
                if !inst.psi.is_compact() {
                    return Err(Error::Incompatible(
                        "linear minimization needs a bounded domain for Ψ".into(),
                    ));
                }
                if let Some(nu) = nu {
                    StepRule::ThetaScheduleCg { nu: *nu }.validate()?;
                }
            }
            Self::ProxGradient { rule } | Self::FastGradient { rule, .. } => {
                if matches!(
                    rule,
                    StepRule::ThetaScheduleCg { .. } | StepRule::LineSearchCg { .. }
                ) {
                    return Err(Error::Incompatible(format!(
                        "{} cannot use a conditional-gradient step rule",
                        self.name()
                    )));
                }
                rule.validate()?;
                if matches!(rule, StepRule::InverseSmoothness) {
                    let declared = match self {
                        Self::FastGradient { .. } => inst.triangle_smooth().is_some(),
                        _ => inst.relative_smooth().is_some(),
                    };
                    if !declared {
                        return Err(Error::Incompatible(format!(
                            "{} with inverse-smoothness steps needs a declared constant on `{}`",
                            self.name(),
                            inst.name
                        )));
                    }
                }
            }
            Self::ProxSubgradient { c } => {
                if !(*c > 0.0) || !c.is_finite() {
                    return Err(Error::InvalidParameter(format!("C = {c} must be positive")));
                }
            }
            Self::UniversalGradient { eps, backtracking } => {
                StepRule::BacktrackUniversal {
                    eps: *eps,
                    params: *backtracking,
                }
                .validate()?;
            }
        }
        if let Self::FastGradient { gamma: Some(g), .. } = self {
            if let Some((_, claimed)) = inst.triangle_smooth() {
                if (claimed - g).abs() > 1e-12 {
                    return Err(Error::Incompatible(format!(
                        "gamma = {g} differs from the instance's declared exponent {claimed}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Step rule used for a run of `iterations` steps.
    pub fn step_rule<S: Scalar>(&self, inst: &ProblemInstance<S>, iterations: usize) -> StepRule {
        match self {
            Self::ConditionalSubgradient { schedule, .. } => match schedule {
                CgSchedule::Theta => StepRule::ThetaScheduleCg {
                    nu: self.cg_nu(inst),
                },
                CgSchedule::LineSearch {
                    max_iters,
                    interval_tol,
                } => StepRule::LineSearchCg {
                    max_iters: *max_iters,
                    interval_tol: *interval_tol,
                },
            },
            Self::ProxGradient { rule } | Self::FastGradient { rule, .. } => rule.clone(),
            Self::ProxSubgradient { c } => StepRule::FixedT {
                t: c / (iterations.max(1) as f64).sqrt(),
            },
            Self::UniversalGradient { eps, backtracking } => StepRule::BacktrackUniversal {
                eps: *eps,
                params: *backtracking,
            },
        }
    }

    fn cg_nu<S: Scalar>(&self, inst: &ProblemInstance<S>) -> f64 {
        match self {
            Self::ConditionalSubgradient { nu: Some(nu), .. } => *nu,
            _ => inst.curvature().map_or(1.0, |(_, nu)| nu),
        }
    }

    /// Exponent `p` of the guaranteed `O(k^p)` rate.
    pub fn theoretical_exponent<S: Scalar>(&self, inst: &ProblemInstance<S>) -> Option<f64> {
        match self {
            Self::ConditionalSubgradient { schedule, .. } => Some(-match schedule {
                CgSchedule::Theta => self.cg_nu(inst),
                CgSchedule::LineSearch { .. } => inst.curvature()?.1,
            }),
            Self::ProxGradient { .. } => Some(-1.0),
            Self::ProxSubgradient { .. } => Some(-0.5),
            Self::FastGradient { gamma, .. } => {
                Some(-gamma.or_else(|| inst.triangle_smooth().map(|p| p.1))?)
            }
            Self::UniversalGradient { .. } => {
                let (_, nu) = inst.holder_smooth()?;
                Some(-(1.0 + 3.0 * nu) / (1.0 + nu))
            }
        }
    }
}

/// Run-time quantities the proposition bounds depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Iterations performed.
    pub k: usize,
    /// `D_h(x*, x_0)`.
    pub d_ref: Option<f64>,
    /// `T_k`.
    pub t_total: f64,
    /// `Σ t_i^2`.
    pub t_sq_total: f64,
}

/// The convergence bound of `method` after `k` iterations, or `None` when
/// the instance does not declare the constants it needs or the step rule
/// is not the one the bound is stated for.
///
/// The conditional-gradient bound applies to the certified gap, all others
/// to the suboptimality of the reported point.
pub fn proposition_bound<S: Scalar>(
    method: &MethodConfig,
    inst: &ProblemInstance<S>,
    rule: &StepRule,
    aux: BoundInputs,
) -> Option<f64> {
    let k = aux.k as f64;
    if aux.k == 0 {
        return None;
    }
    match method {
        MethodConfig::ConditionalSubgradient { .. } => {
            let (m, claimed_nu) = inst.curvature()?;
            let nu = match rule {
                StepRule::ThetaScheduleCg { nu } if *nu <= claimed_nu + 1e-15 => *nu,
                StepRule::LineSearchCg { .. } => claimed_nu,
                _ => return None,
            };
            Some(m * ((1.0 + nu) / (k + 1.0 + nu)).powf(nu))
        }
        MethodConfig::ProxGradient { .. } => {
            let r = match rule {
                StepRule::BacktrackSmooth { params } => params.r,
                StepRule::InverseSmoothness => 1.0,
                _ => return None,
            };
            Some(r * inst.relative_smooth()? * aux.d_ref? / k)
        }
        MethodConfig::ProxSubgradient { .. } => {
            let m = inst.relative_continuity()?;
            Some((aux.d_ref? + m * aux.t_sq_total / 2.0) / aux.t_total)
        }
        MethodConfig::FastGradient { .. } => {
            let r = match rule {
                StepRule::BacktrackSmooth { params } => params.r,
                StepRule::InverseSmoothness => 1.0,
                _ => return None,
            };
            let (l, gamma) = inst.triangle_smooth()?;
            Some((gamma * r).powf(gamma) * l * aux.d_ref? / (k + gamma - 1.0).powf(gamma))
        }
        MethodConfig::UniversalGradient { eps, backtracking } => {
            let (m, nu) = inst.holder_smooth()?;
            let p = (1.0 + 3.0 * nu) / (1.0 + nu);
            let num = 2.0 * backtracking.r.powf(p) * m.powf(2.0 / (1.0 + nu)) * aux.d_ref?;
            let den = eps.powf((1.0 - nu) / (1.0 + nu)) * k.powf(p);
            Some(num / den + eps)
        }
    }
}

/// `M Σ t_i^2 / (2 T_k)`, the bound on the subgradient method's `δ_k`
/// under relative continuity.
pub fn subgradient_rhs_check(m: f64, t_sq_total: f64, t_total: f64) -> f64 {
    m * t_sq_total / 2.0 / t_total
}

/// Tolerances applied to the runtime checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative tolerance on both identity residuals.
    pub identity: f64,
    /// Slack allowed below zero for the duality gaps.
    pub weak_duality: f64,
    /// Relative slack on the inequality checks (certified bounds).
    pub bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-8,
            weak_duality: 1e-9,
            bound: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    /// Subgradient-form identity residual.
    Thm1Identity,
    /// Bregman-form identity residual.
    Thm2Identity,
    WeakDuality,
    /// Certified gap above `δ_k`.
    PerturbedGap,
    /// Certified gap above the conditional-gradient recursion.
    CgGap,
    /// Suboptimality or gap above the accumulated descent slack.
    DescentSlack,
    Proposition,
    SubgradientRhs,
    NonFinite,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Thm1Identity => "thm1-identity",
            Check::Thm2Identity => "thm2-identity",
            Check::WeakDuality => "weak-duality",
            Check::PerturbedGap => "perturbed-gap",
            Check::CgGap => "cg-gap",
            Check::DescentSlack => "descent-slack",
            Check::Proposition => "proposition",
            Check::SubgradientRhs => "subgradient-rhs",
            Check::NonFinite => "non-finite",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: usize,
    pub check: Check,
    pub value: f64,
    pub limit: f64,
}

/// One row per iteration `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub t: f64,
    pub theta: f64,
    pub primal: f64,
    pub dual_surrogate: f64,
    pub gap: f64,
    pub delta: f64,
    pub thm1_residual: f64,
    pub thm2_residual: f64,
    pub bound: Option<f64>,
    pub cggap: Option<f64>,
    /// `F(x_k) - -f*(u_k) - Ψ*(-A* u_k)`, possibly `+∞`.
    pub fenchel_gap: f64,
    /// `-D_h(report point, x_0) / T_k`.
    pub perturbation_floor: f64,
    /// Reported primal value minus the reference optimum.
    pub suboptimality: Option<f64>,
    /// `(D_h(x*, x_0) + Σ ε_i) / T_k` when every step declared its slack.
    pub descent_bound: Option<f64>,
    /// Whether backtracking saw `r t` fail.
    pub r_large: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub method: String,
    pub instance: String,
    pub rows: Vec<TraceRow>,
    pub violations: Vec<Violation>,
    pub reference_value: Option<f64>,
    pub theoretical_exponent: Option<f64>,
    /// The reported point after the last iteration.
    pub final_point: Vec<f64>,
}

impl Trace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub iterations: usize,
    pub tolerances: Tolerances,
}

impl RunOptions {
    pub fn new(iterations: usize) -> Self {
        Self {
            iterations,
            tolerances: Tolerances::default(),
        }
    }
}

/// Runs `method` on `inst`; `reference` enables the suboptimality bounds.
pub fn run<S: Scalar>(
    inst: &ProblemInstance<S>,
    method: &MethodConfig,
    opts: &RunOptions,
    reference: Option<&KnownOptimum<S>>,
) -> Result<Trace> {
    run_with_state(inst, method, opts, reference).map(|(trace, _)| trace)
}

/// As [`run`], also returning the final engine state.
pub fn run_with_state<S: Scalar>(
    inst: &ProblemInstance<S>,
    method: &MethodConfig,
    opts: &RunOptions,
    reference: Option<&KnownOptimum<S>>,
) -> Result<(Trace, EngineState<S>)> {
    method.validate(inst)?;
    let rule = method.step_rule(inst, opts.iterations);
    rule.validate()?;
    let ysel = method.y_selector();
    let mode = method.report_mode();
    let tol = opts.tolerances;
    let mut state = EngineState::init(inst)?;

    let d_ref = match reference {
        Some(_) if inst.h.is_zero() => Some(0.0),
        Some(r) => Some(inst.h.bregman(&r.point, &inst.start)?.to_f64_lossy()),
        None => None,
    };
    let ref_value = reference.map(|r| r.value.to_f64_lossy());
    let continuity = inst.relative_continuity();

    let mut rows = Vec::with_capacity(opts.iterations);
    let mut violations = Vec::new();

    for k in 0..opts.iterations {
        let tp = state.t_total();
        let (proposal, eps, r_large) = match &rule {
            StepRule::FixedT { t } => (
                propose(&state, inst, ysel, Step::from_t(S::lit(*t), tp))?,
                None,
                None,
            ),
            StepRule::FixedScheduleT { ts } => {
                let t = *ts.get(k).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "step schedule has {} entries, run needs {}",
                        ts.len(),
                        opts.iterations
                    ))
                })?;
                (
                    propose(&state, inst, ysel, Step::from_t(S::lit(t), tp))?,
                    None,
                    None,
                )
            }
            StepRule::ThetaScheduleCg { nu } => {
                let theta = steprules::cg_theta(k, S::lit(*nu));
                let t = steprules::t_from_theta(theta, tp, S::one())?;
                (propose(&state, inst, ysel, Step { t, theta })?, None, None)
            }
            StepRule::LineSearchCg {
                max_iters,
                interval_tol,
            } => {
                let theta = if k == 0 {
                    S::one()
                } else {
                    let probe = propose(
                        &state,
                        inst,
                        ysel,
                        Step {
                            t: S::one(),
                            theta: S::one(),
                        },
                    )?;
                    steprules::linesearch_cg(
                        inst,
                        &state.x,
                        state.ax(),
                        &probe.g,
                        &probe.sol.s,
                        &probe.as_,
                        state.cggap().unwrap_or(S::zero()),
                        *max_iters,
                        S::lit(*interval_tol),
                    )
                };
                let t = steprules::t_from_theta(theta, tp, S::one())?;
                (propose(&state, inst, ysel, Step { t, theta })?, None, None)
            }
            StepRule::InverseSmoothness => {
                let t = match method {
                    MethodConfig::FastGradient { .. } => {
                        let (l, gamma) = inst.triangle_smooth().ok_or_else(|| {
                            Error::Incompatible("no declared triangle constant".into())
                        })?;
                        steprules::lemma1_boundary_step(gamma, l, tp.to_f64_lossy())
                    }
                    _ => {
                        let l = inst.relative_smooth().ok_or_else(|| {
                            Error::Incompatible("no declared smoothness constant".into())
                        })?;
                        1.0 / l
                    }
                };
                (
                    propose(&state, inst, ysel, Step::from_t(S::lit(t), tp))?,
                    Some(S::zero()),
                    None,
                )
            }
            StepRule::BacktrackSmooth { params } => {
                let acc = steprules::backtrack(&state, inst, ysel, params, S::zero())?;
                (acc.proposal, Some(acc.eps), Some(acc.r_large_verified))
            }
            StepRule::BacktrackUniversal { eps, params } => {
                let acc = steprules::backtrack(&state, inst, ysel, params, S::lit(*eps))?;
                (acc.proposal, Some(acc.eps), Some(acc.r_large_verified))
            }
        };
        let step = proposal.step;
        state.commit(inst, proposal, eps)?;
        let cert = state.certificate(inst, mode)?;
        let f = |x: S| x.to_f64_lossy();
        let k1 = state.k;
        let t_total = f(state.t_total());

        let primal = f(cert.primal);
        let gap = f(cert.gap);
        let delta = f(cert.delta);
        let subopt = ref_value.map(|v| primal - v);
        let descent_bound = match (state.eps_total(), d_ref) {
            (Some(e), Some(d)) => Some((d + f(e)) / t_total),
            _ => None,
        };
        let bound = proposition_bound(
            method,
            inst,
            &rule,
            BoundInputs {
                k: k1,
                d_ref,
                t_total,
                t_sq_total: f(state.t_squared_total()),
            },
        );
        let row = TraceRow {
            k: k1,
            t: f(step.t),
            theta: f(step.theta),
            primal,
            dual_surrogate: f(cert.dual_surrogate),
            gap,
            delta,
            thm1_residual: f(cert.thm1_residual),
            thm2_residual: f(cert.thm2_residual),
            bound,
            cggap: cert.cggap.map(f),
            fenchel_gap: f(cert.fenchel_gap),
            perturbation_floor: f(cert.perturbation_floor),
            suboptimality: subopt,
            descent_bound,
            r_large,
        };

        let mut flag = |check: Check, value: f64, limit: f64| {
            violations.push(Violation {
                k: k1,
                check,
                value,
                limit,
            });
        };
        let rel = |x: f64| tol.bound * x.abs().max(1.0);
        let finite = [
            row.t,
            row.theta,
            primal,
            row.dual_surrogate,
            gap,
            delta,
            row.thm1_residual,
            row.thm2_residual,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            flag(Check::NonFinite, f64::NAN, 0.0);
        }
        if !(row.thm1_residual <= tol.identity) {
            flag(Check::Thm1Identity, row.thm1_residual, tol.identity);
        }
        if !(row.thm2_residual <= tol.identity) {
            flag(Check::Thm2Identity, row.thm2_residual, tol.identity);
        }
        if row.fenchel_gap < -tol.weak_duality {
            flag(Check::WeakDuality, row.fenchel_gap, -tol.weak_duality);
        }
        if gap < row.perturbation_floor - tol.weak_duality {
            flag(
                Check::WeakDuality,
                gap,
                row.perturbation_floor - tol.weak_duality,
            );
        }
        if gap > delta + rel(delta) {
            flag(Check::PerturbedGap, gap, delta + rel(delta));
        }
        if let Some(cg) = row.cggap {
            if gap > cg + rel(cg) {
                flag(Check::CgGap, gap, cg + rel(cg));
            }
        }
        if let Some(e) = state.eps_total() {
            let slack = f(e) / t_total;
            if delta > slack + rel(slack) {
                flag(Check::DescentSlack, delta, slack + rel(slack));
            }
            if let (Some(s), Some(b)) = (subopt, descent_bound) {
                if s > b + tol.bound {
                    flag(Check::DescentSlack, s, b + tol.bound);
                }
            }
        }
        if let Some(b) = bound {
            let value = match method {
                MethodConfig::ConditionalSubgradient { .. } => Some(gap),
                _ => subopt,
            };
            if let Some(v) = value {
                if v > b + tol.bound {
                    flag(Check::Proposition, v, b + tol.bound);
                }
            }
        }
        if let (MethodConfig::ProxSubgradient { .. }, Some(m)) = (method, continuity) {
            let rhs = subgradient_rhs_check(m, f(state.t_squared_total()), t_total);
            if delta > rhs + rel(rhs) {
                flag(Check::SubgradientRhs, delta, rhs + rel(rhs));
            }
        }
        rows.push(row);
    }

    let final_point = match mode {
        ReportMode::AverageX => state.x.to_f64(),
        ReportMode::AverageZ => state.z.to_f64(),
    };
    let trace = Trace {
        method: method.name().into(),
        instance: inst.name.clone(),
        rows,
        violations,
        reference_value: ref_value,
        theoretical_exponent: method.theoretical_exponent(inst),
        final_point,
    };
    Ok((trace, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{LinearMap, Vector};
    use crate::oracles::{Claim, ReferenceFn, SimpleFn, SmoothFn};

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
            claims: vec![Claim::RelativeSmooth { l: 1.0 }],
            known_optimum: Some(KnownOptimum {
                value: 0.0,
                point: Vector::from_f64(&[0.0]),
            }),
            start: Vector::from_f64(&[1.0]),
        }
    }

    #[test]
    fn exact_step_is_optimal_after_one_iteration() {
        let inst = half_square();
        let method = MethodConfig::ProxGradient {
            rule: StepRule::FixedT { t: 1.0 },
        };
        let trace = run(
            &inst,
            &method,
            &RunOptions::new(3),
            inst.known_optimum.as_ref(),
        )
        .unwrap();
        assert_eq!(trace.rows.len(), 3);
        assert_eq!(trace.rows[0].primal, 0.0);
        assert!(trace.violations.is_empty(), "{:?}", trace.violations);
    }

    #[test]
    fn bound_examples() {
        let mut inst = half_square();
        let aux = |k, d| BoundInputs {
            k,
            d_ref: Some(d),
            t_total: 100f64.sqrt(),
            t_sq_total: 1.0,
        };
        let pg = MethodConfig::ProxGradient {
            rule: default_smooth_rule(),
        };
        let rule = pg.step_rule(&inst, 10);
        assert!((proposition_bound(&pg, &inst, &rule, aux(10, 0.5)).unwrap() - 0.1).abs() < 1e-15);

        inst.claims = vec![Claim::Curvature { m: 2.0, nu: 1.0 }];
        let cg = MethodConfig::ConditionalSubgradient {
            nu: Some(1.0),
            schedule: CgSchedule::Theta,
        };
        let rule = cg.step_rule(&inst, 2);
        assert_eq!(proposition_bound(&cg, &inst, &rule, aux(2, 0.0)), Some(1.0));

        // t_i = 1/10 over K = 100: Σ t = 10 · ... = 10, Σ t^2 = 1
        inst.claims = vec![Claim::RelativeContinuity { m: 1.0 }];
        let sg = MethodConfig::ProxSubgradient { c: 1.0 };
        let rule = sg.step_rule(&inst, 100);
        let b = proposition_bound(
            &sg,
            &inst,
            &rule,
            BoundInputs {
                k: 100,
                d_ref: Some(1.0),
                t_total: 10.0,
                t_sq_total: 1.0,
            },
        )
        .unwrap();
        assert!((b - 0.15).abs() < 1e-15);
    }

    #[test]
    fn subgradient_rhs_examples() {
        assert_eq!(subgradient_rhs_check(1.0, 1.0, 1.0), 0.5);
        // constant t = C/√K over K steps gives C M / (2 √K)
        let (c, m, k) = (2.0f64, 3.0f64, 16.0f64);
        let t = c / k.sqrt();
        let v = subgradient_rhs_check(m, k * t * t, k * t);
        assert!((v - c * m / (2.0 * k.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn incompatible_configurations_are_rejected() {
        let mut inst = half_square();
        let cg = MethodConfig::ConditionalSubgradient {
            nu: None,
            schedule: CgSchedule::Theta,
        };
        assert!(matches!(cg.validate(&inst), Err(Error::Incompatible(_))));
        inst.h = ReferenceFn::Zero;
        let pg = MethodConfig::ProxGradient {
            rule: default_smooth_rule(),
        };
        assert!(matches!(pg.validate(&inst), Err(Error::Incompatible(_))));
    }

    #[test]
    fn configs_deserialize() {
        let m: MethodConfig = serde_json::from_str(
            r#"{"kind": "fast-gradient", "gamma": 2, "rule": {"kind": "backtrack-smooth", "r": 2}}"#,
        )
        .unwrap();
        assert_eq!(m.name(), "fast-gradient");
        let m: MethodConfig = serde_json::from_str(
            r#"{"kind": "conditional-subgradient", "schedule": {"kind": "line-search"}}"#,
        )
        .unwrap();
        assert_eq!(
            m,
            MethodConfig::ConditionalSubgradient {
                nu: None,
                schedule: CgSchedule::LineSearch {
                    max_iters: 64,
                    interval_tol: 1e-10
                }
            }
        );
        let m: MethodConfig = serde_json::from_str(r#"{"kind": "prox-gradient"}"#).unwrap();
        assert_eq!(m.step_rule(&half_square(), 5), default_smooth_rule());
    }

    #[test]
    fn understated_constant_is_caught() {
        let inst = crate::problems::make_named::<f64>("lasso", 0).unwrap();
        for method in [
            MethodConfig::ProxGradient {
                rule: StepRule::InverseSmoothness,
            },
            MethodConfig::FastGradient {
                gamma: None,
                rule: StepRule::InverseSmoothness,
            },
        ] {
            let clean = run(&inst, &method, &RunOptions::new(200), None).unwrap();
            assert!(
                clean.violations.is_empty(),
                "{}: {:?}",
                method.name(),
                clean.violations.first()
            );
            let mut bad = inst.clone();
            bad.claims = bad.claims.iter().map(|c| c.scale_l(0.1)).collect();
            // the oversized steps diverge; the descent check fires first
            let trace = run(&bad, &method, &RunOptions::new(20), None).unwrap();
            assert!(
                trace
                    .violations
                    .iter()
                    .any(|v| v.check == Check::DescentSlack),
                "{}",
                method.name()
            );
            assert!(
                matches!(
                    run(&bad, &method, &RunOptions::new(1000), None),
                    Err(Error::Domain(_)) | Err(Error::NonFinite)
                ) || !run(&bad, &method, &RunOptions::new(1000), None)
                    .unwrap()
                    .violations
                    .is_empty()
            );
        }
        let cg = crate::problems::make_named::<f64>("l1-regression", 0).unwrap();
        let method = MethodConfig::ProxGradient {
            rule: StepRule::InverseSmoothness,
        };
        assert!(matches!(method.validate(&cg), Err(Error::Incompatible(_))));
    }
}
