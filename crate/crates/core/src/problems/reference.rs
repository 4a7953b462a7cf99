//! Reference optima: planted when known, otherwise a long run bracketed by
//! a Fenchel dual bound.

use serde::{Deserialize, Serialize};

use crate::engine::fenchel_lower_bound;
use crate::error::Result;
use crate::methods::{run_with_state, CgSchedule, MethodConfig, RunOptions};
use crate::oracles::{KnownOptimum, ProblemInstance};
use crate::scalar::Scalar;
use crate::steprules::{Backtracking, StepRule};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptimum<S> {
    pub optimum: KnownOptimum<S>,
    pub bracket: Bracket,
}

/// `lower <= F* <= upper`; both equal the value for planted optima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// The fastest method whose constants `inst` declares.
pub fn reference_method<S: Scalar>(inst: &ProblemInstance<S>) -> MethodConfig {
    let smooth = StepRule::BacktrackSmooth {
        params: Backtracking::default(),
    };
    if inst.h.is_zero() {
        MethodConfig::ConditionalSubgradient {
            nu: None,
            schedule: CgSchedule::LineSearch {
                max_iters: 80,
                interval_tol: 1e-12,
            },
        }
    } else if inst.triangle_smooth().is_some() {
        MethodConfig::FastGradient {
            gamma: None,
            rule: smooth,
        }
    } else if inst.relative_smooth().is_some() {
        MethodConfig::ProxGradient { rule: smooth }
    } else if inst.holder_smooth().is_some() {
        MethodConfig::UniversalGradient {
            eps: 1e-8,
            backtracking: Backtracking::default(),
        }
    } else {
        MethodConfig::ProxSubgradient { c: 1.0 }
    }
}

/// Returns the planted optimum, or runs [`reference_method`] for `budget`
/// iterations and brackets the result from below with the better of two
/// dual candidates: the averaged `u_k` and `∇f(A x_k)`.
pub fn reference_optimum<S: Scalar>(
    inst: &ProblemInstance<S>,
    budget: usize,
) -> Result<ReferenceOptimum<S>> {
    if let Some(opt) = &inst.known_optimum {
        let v = opt.value.to_f64_lossy();
        return Ok(ReferenceOptimum {
            optimum: opt.clone(),
            bracket: Bracket {
                lower: v,
                upper: v,
                exact: true,
            },
        });
    }
    let method = reference_method(inst);
    let (trace, state) = run_with_state(inst, &method, &RunOptions::new(budget), None)?;
    let point = crate::linalg::Vector::from_f64(&trace.final_point);
    let value = inst.objective(&point)?;
    let mut lower = fenchel_lower_bound(inst, &state.u())?.to_f64_lossy();
    if let Ok(g) = inst.f.subgradient(&inst.a.apply(&point)?) {
        let alt = fenchel_lower_bound(inst, &g)?.to_f64_lossy();
        if alt.is_finite() {
            lower = lower.max(alt);
        }
    }
    Ok(ReferenceOptimum {
        optimum: KnownOptimum { value, point },
        bracket: Bracket {
            lower,
            upper: value.to_f64_lossy(),
            exact: false,
        },
    })
}
