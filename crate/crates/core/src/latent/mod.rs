//! Latent-class estimation of prevalence and rater accuracy without a gold
//! standard.
//!
//! Votes are modelled as conditionally independent given the unobserved
//! true class. Parameters are estimated by EM and reported in canonical
//! orientation (mean `se + sp` at least 1), which resolves label switching.

mod bootstrap;
mod em;
mod model;

pub use bootstrap::{em_bootstrap_ci, EmBootstrap, RaterIntervals, FAILURE_BUDGET};
pub use em::{
    em_fit, identifiable, EmFit, EmOptions, EmTrace, StopReason, DEFAULT_LOGLIK_TOL, DEFAULT_MAX_ITER,
    DEFAULT_PARAM_TOL, DEFAULT_RESTARTS,
};
pub use model::{log_likelihood, LatentClassModel, RaterAccuracy, Vote, VotePatternTable, EPSILON};
