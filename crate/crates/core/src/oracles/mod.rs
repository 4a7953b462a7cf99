//! Oracles for the three functions of the composite model and the
//! closed-form proximal solvers that combine them.

pub mod instance;
pub mod prox;
pub mod reference;
pub mod simple;
pub mod smooth;

pub use instance::{Claim, KnownOptimum, ProblemInstance};
pub use prox::{
    fenchel_conjugate_at_subgradient, is_registered, optimality_residual, prox_step, ProxSolution,
};
pub use reference::ReferenceFn;
pub use simple::SimpleFn;
pub use smooth::SmoothFn;
