//! Exact and approximate Bayesian posteriors, predictive evaluation and
//! reproducible experiments comparing test log-likelihood with posterior
//! approximation quality and point-prediction error.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approximations;
pub mod bayes_linear;
pub mod dataset;
pub mod distributions;
pub mod divergences;
pub mod error;
pub mod evaluation;
pub mod experiments;
pub mod gp;
pub mod mle_models;
pub mod numerics;

pub use approximations::{optimal_isotropic_vi, swag_fit, IsotropicApprox, ScaleGrid, SwagConfig};
pub use bayes_linear::{credible_interval, LinearGaussianModel};
pub use dataset::Dataset;
pub use distributions::{Laplace, MvGaussian, Normal, Predictive, Rng, Sampler, Uniform};
pub use divergences::{kl_gaussian, wasserstein2};
pub use error::{Error, Result};
pub use evaluation::{compare_elpd, rmse_with_ci, score, tll, ElpdComparison, MetricRecord, RmseResult, ScoringRule, TllResult};
pub use experiments::{run_experiment, DgpSpec, ExperimentConfig, ExperimentId, OutputFormat, ResultRow};
pub use gp::{GpModel, GpPredictor, Kernel};
pub use mle_models::{fit_gaussian_line, fit_laplace_line, GaussianLineFit, LaplaceLineFit};
pub use numerics::Matrix;
