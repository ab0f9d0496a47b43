//! Data generators and experiment runners producing result tables.

mod dgp;
mod output;
mod runner;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::approximations::{ScaleGrid, SwagConfig};
use crate::error::{Error, Result};

pub use dgp::DgpSpec;
pub use output::{emit_results, parse_results, render_results, OutputFormat, ResultRow, CSV_COLUMNS};
pub use runner::{run_experiment, test_seed, GP_LENGTHSCALE_FLOOR, GP_PERIODIC_NOISE};

/// Learning rates of the main SWAG sweep.
pub const SWAG_LRS: [f64; 5] = [1e-3, 1e-2, 1e-1, 1.0, 10.0];
/// Additional learning rates of the high-rate SWAG sweep.
pub const SWAG_HIGH_LRS: [f64; 3] = [12.0, 15.0, 20.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "fig1_hetero_vi")]
    Fig1HeteroVi,
    #[serde(rename = "fig3_swag")]
    Fig3Swag,
    #[serde(rename = "fig5_wellspec")]
    Fig5Wellspec,
    #[serde(rename = "fig6_gp")]
    Fig6Gp,
    #[serde(rename = "sec4_linear")]
    Sec4Linear,
    #[serde(rename = "appB2_swag_hi")]
    AppB2SwagHi,
    #[serde(rename = "appB2_vi_nonlinear")]
    AppB2ViNonlinear,
    #[serde(rename = "appB3_sd_kl")]
    AppB3SdKl,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Fig1HeteroVi,
        ExperimentId::Fig3Swag,
        ExperimentId::Fig5Wellspec,
        ExperimentId::Fig6Gp,
        ExperimentId::Sec4Linear,
        ExperimentId::AppB2SwagHi,
        ExperimentId::AppB2ViNonlinear,
        ExperimentId::AppB3SdKl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig1HeteroVi => "fig1_hetero_vi",
            ExperimentId::Fig3Swag => "fig3_swag",
            ExperimentId::Fig5Wellspec => "fig5_wellspec",
            ExperimentId::Fig6Gp => "fig6_gp",
            ExperimentId::Sec4Linear => "sec4_linear",
            ExperimentId::AppB2SwagHi => "appB2_swag_hi",
            ExperimentId::AppB2ViNonlinear => "appB2_vi_nonlinear",
            ExperimentId::AppB3SdKl => "appB3_sd_kl",
        }
    }

    pub fn default_n_train(self) -> usize {
        match self {
            ExperimentId::Fig1HeteroVi | ExperimentId::Fig6Gp => 100,
            ExperimentId::Fig3Swag | ExperimentId::AppB2SwagHi | ExperimentId::AppB2ViNonlinear => 500,
            ExperimentId::Fig5Wellspec | ExperimentId::AppB3SdKl => 10,
            ExperimentId::Sec4Linear => 100_000,
        }
    }

    pub fn default_n_test(self) -> usize {
        match self {
            ExperimentId::Sec4Linear => 395_000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}

/// Everything an experiment run depends on. Unset sizes and grids fall
/// back to the experiment's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub n_train: Option<usize>,
    #[serde(default)]
    pub n_test: Option<usize>,
    #[serde(default)]
    pub scales: Option<ScaleGrid>,
    #[serde(default)]
    pub lrs: Option<Vec<f64>>,
    /// SGD schedule template; `constant_lr` and `seed` are set per run.
    #[serde(default)]
    pub swag: SwagConfig,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId, seed: u64) -> Self {
        ExperimentConfig {
            experiment,
            seed,
            n_train: None,
            n_test: None,
            scales: None,
            lrs: None,
            swag: SwagConfig::default(),
        }
    }

    pub fn n_train(&self) -> usize {
        self.n_train.unwrap_or(self.experiment.default_n_train())
    }

    pub fn n_test(&self) -> usize {
        self.n_test.unwrap_or(self.experiment.default_n_test())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_train() == 0 || self.n_test() == 0 {
            return Err(Error::InvalidConfig("n_train and n_test must be >= 1".into()));
        }
        if let Some(lrs) = &self.lrs {
            if lrs.is_empty() || lrs.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
                return Err(Error::InvalidConfig("learning rates must be finite and > 0".into()));
            }
        }
        self.swag.validate()
    }
}
