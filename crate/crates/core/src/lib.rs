//! Moment estimation and inference for the covariate-assisted beta-model.
//!
//! Each edge weight `a_ij` of an undirected network is drawn independently
//! with mean `mu(beta_i + beta_j + z_ij' gamma)`, where `beta` captures degree
//! heterogeneity and `gamma` homophily through the edge covariates `z_ij`.
//! Estimates solve the moment equations
//!
//! ```text
//! d_i                 = sum_{j != i} mu(pi_ij)          (i = 1..n)
//! sum_{i<j} z_ij a_ij = sum_{i<j} z_ij mu(pi_ij)
//! ```
//!
//! with a two-stage Newton scheme ([`estimator::fit`]). The [`inference`]
//! module gives standard errors, confidence intervals, the homogeneity test
//! and the analytic bias correction; [`simulation`] runs Monte-Carlo coverage
//! studies and [`io`] handles files and reports.

pub mod error;
pub mod estimator;
pub mod families;
pub mod inference;
pub mod io;
pub mod linalg;
pub mod model;
pub mod simulation;

pub use error::{Error, Result};
pub use estimator::{alternating_fit, fit, solve_beta_given_gamma, BetaInit, FitOptions, FitResult};
pub use families::EdgeFamily;
pub use inference::{
    beta_diff_interval, beta_variances, gamma_inference, homogeneity_test, BetaVariances, InferenceOptions,
    InferenceResult, IntervalEstimate,
};
pub use model::{CovariateTensor, Network, Params};
pub use simulation::{generate_design, run_monte_carlo, sample_network, LSpec, MonteCarloReport, SimDesign};
