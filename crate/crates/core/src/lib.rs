//! First-order convex optimization with perturbed Fenchel duality certificates.
//!
//! Every method here is one configuration of a single averaging scheme:
//! each step takes a Bregman proximal (or linear minimization) step from a
//! prox center `y_k`, and the weighted averages of the primal points and
//! subgradients yield a certified gap at every iteration. The
//! configurations are
//!
//! * conditional gradient with a `θ` schedule or line search,
//! * Bregman proximal gradient and proximal subgradient,
//! * fast and universal Bregman gradient methods with backtracking.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`, with `…32` variants for single precision.
//!
//! ```
//! use fom_core::{make_named, run, Backtracking, MethodConfig, RunOptions, StepRule};
//!
//! let inst = make_named::<f64>("poisson-burg", 0).unwrap();
//! let method = MethodConfig::ProxGradient {
//!     rule: StepRule::BacktrackSmooth { params: Backtracking::default() },
//! };
//! let opt = inst.known_optimum.clone();
//! let trace = run(&inst, &method, &RunOptions::new(50), opt.as_ref()).unwrap();
//! assert!(trace.violations.is_empty());
//! assert!(trace.last().unwrap().gap >= trace.last().unwrap().perturbation_floor - 1e-9);
//! ```

pub mod engine;
pub mod error;
pub mod linalg;
pub mod methods;
pub mod oracles;
pub mod problems;
pub mod rates;
pub mod scalar;
pub mod steprules;

pub use engine::{Certificate, EngineState, ReportMode, YSelector};
pub use error::{Error, Result};
pub use linalg::{LinearMap, Vector};
pub use methods::{
    run, run_with_state, CgSchedule, Check, MethodConfig, RunOptions, Tolerances, Trace, TraceRow,
    Violation,
};
pub use oracles::{Claim, KnownOptimum, ProblemInstance, ReferenceFn, SimpleFn, SmoothFn};
pub use problems::{
    compatible_methods, make_instance, make_named, reference_optimum, verify_constants,
    InstanceKind, InstanceSpec, VerifyReport,
};
pub use rates::{fit_rate, RateFit};
pub use scalar::Scalar;
pub use steprules::{Backtracking, StepRule};

pub type Vec64 = Vector<f64>;
pub type Map64 = LinearMap<f64>;
pub type Instance = ProblemInstance<f64>;
pub type State = EngineState<f64>;

pub type Vec32 = Vector<f32>;
pub type Map32 = LinearMap<f32>;
pub type Instance32 = ProblemInstance<f32>;
pub type State32 = EngineState<f32>;
