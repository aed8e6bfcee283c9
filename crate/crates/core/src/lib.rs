//! Bayesian variable selection for Gaussian linear regression with the
//! Jeffreys power-expected-posterior (J-PEP) prior.
//!
//! The exact J-PEP Bayes factor of a model against the intercept-only
//! reference is a one-dimensional integral, evaluated here by a fixed
//! composite Gauss–Legendre rule in log space. BIC and Zellner's g-prior
//! are provided as baselines, together with exhaustive model-space
//! enumeration, posterior summaries and a seeded simulation harness.
//!
//! - [`regression`]: design matrices, QR-based residual sums of squares.
//! - [`quadrature`]: composite Gauss–Legendre grids and `log_quad`.
//! - [`jpep`]: exact and asymptotic J-PEP Bayes factors, power marginal,
//!   conditional prior density.
//! - [`baseline`]: BIC and g-prior scores.
//! - [`space`]: enumeration, scoring and posterior probabilities.
//! - [`sim`]: data generation, replicated simulation, consistency scans.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod data;
pub mod error;
pub mod identities;
pub mod jpep;
pub mod model;
pub mod quadrature;
pub mod regression;
pub mod rng;
pub mod sim;
pub mod space;

pub use baseline::{bic_score, log_bf_gprior, LogScore, Method};
pub use data::Dataset;
pub use error::{Error, Result};
pub use jpep::{
    log_bf_jpep, log_bf_jpep_asymptotic, log_bf_jpep_asymptotic_anchored,
    log_conditional_jpep_density, log_integrand, log_power_marginal, BfInputs, PriorPoint,
};
pub use model::ModelSpec;
pub use quadrature::{log_quad, QuadratureGrid};
pub use regression::{build_design, fit_rss, rank_check, ModelFit, RankReport};
pub use rng::CounterRng;
pub use sim::{
    consistency_scan, generate_dataset, run_simulation, Generator, SimConfig, SimRecord,
};
pub use space::{
    enumerate_models, posterior_probs, score_all, ModelPrior, PosteriorSummary, ScoreParams,
    ScoredModels,
};
