use std::path::Path;

use anyhow::{bail, Context, Result};
use fom_core::{InstanceSpec, MethodConfig, Tolerances};
use serde::{Deserialize, Serialize};

/// Iterations for the reference run when the instance has no planted
/// optimum.
pub const DEFAULT_REFERENCE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub method: MethodConfig,
    pub iterations: usize,
    /// `0` disables the reference run; rates and bounds then need a
    /// planted optimum.
    #[serde(default)]
    pub reference_budget: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<ToleranceOverrides>,
    /// Multiplies the declared constants, e.g. to check that an
    /// understated `L` gets caught.
    #[serde(default)]
    pub constant_scale: Option<ConstantScale>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub identity: Option<f64>,
    pub weak_duality: Option<f64>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantScale {
    #[serde(default = "one")]
    pub l: f64,
    #[serde(default = "one")]
    pub m: f64,
}

fn one() -> f64 {
    1.0
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if cfg.iterations == 0 {
            bail!("iterations must be positive");
        }
        if let Some(s) = cfg.constant_scale {
            for v in [s.l, s.m] {
                if !(v > 0.0 && v.is_finite()) {
                    bail!("constant scale {v} must be positive");
                }
            }
        }
        Ok(cfg)
    }

    /// Config values over defaults, with `FOM_TOL` (if set) taking
    /// precedence for the identity tolerance.
    pub fn tolerances(&self, env: Option<f64>) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(o) = self.tolerance {
            tol.identity = o.identity.unwrap_or(tol.identity);
            tol.weak_duality = o.weak_duality.unwrap_or(tol.weak_duality);
            tol.bound = o.bound.unwrap_or(tol.bound);
        }
        if let Some(t) = env {
            tol.identity = t;
        }
        tol
    }

    pub fn reference_budget(&self) -> usize {
        self.reference_budget.unwrap_or(DEFAULT_REFERENCE_BUDGET)
    }
}

/// Reads `FOM_TOL`; a malformed value is a configuration error.
pub fn env_tolerance() -> Result<Option<f64>> {
    match std::env::var("FOM_TOL") {
        Ok(s) => {
            let v: f64 = s
                .trim()
                .parse()
                .with_context(|| format!("FOM_TOL={s:?} is not a number"))?;
            if !(v > 0.0 && v.is_finite()) {
                bail!("FOM_TOL must be positive, got {v}");
            }
            Ok(Some(v))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(e).context("reading FOM_TOL"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"instance": {"name": "lasso", "seed": 3},
                "method": {"kind": "prox-gradient"},
                "iterations": 100}"#,
        )
        .unwrap();
        assert_eq!(cfg.instance.seed, 3);
        assert_eq!(cfg.reference_budget(), DEFAULT_REFERENCE_BUDGET);
        assert_eq!(cfg.tolerances(Some(1e-6)).identity, 1e-6);
        assert_eq!(cfg.tolerances(None).identity, 1e-8);
    }

    #[test]
    fn rejects_unknown_fields() {
        let err = serde_json::from_str::<RunConfig>(
            r#"{"instance": {"name": "lasso"}, "method": {"kind": "prox-gradient"},
                "iterations": 1, "iteratons": 2}"#,
        );
        assert!(err.is_err());
    }
}
