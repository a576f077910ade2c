//! Proximal (implicit) and unadjusted (explicit) Langevin sampling, with the
//! Gaussian closed forms and convergence-bound calculators used to check them.

pub mod diagnostics;
pub mod error;
mod exec;
pub mod io;
pub mod linalg;
pub mod prox;
pub mod rng;
pub mod samplers;
pub mod sde_lab;
pub mod targets;
pub mod theory;

pub use error::{Error, Result};
pub use prox::{prox_forward, prox_step, ProxConfig, ProxOutcome, ProxSolver};
pub use samplers::{run_ensemble, run_ensemble_with, Algorithm, ChainConfig, Execution, InitSpec, Trace};
pub use targets::{GaussianTarget, PerturbedQuadratic1D, Potential, Target, TargetSpec};
pub use theory::Divergence;
