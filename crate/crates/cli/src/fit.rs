//! Fit files consumed by `eval`: a serialized predictive model.

use std::fs;
use std::path::Path;

use bayes_eval::{
    Dataset, Error, GaussianLineFit, GpModel, GpPredictor, LaplaceLineFit, LinearGaussianModel, Matrix, MvGaussian,
    Predictive, Result,
};
use serde::{Deserialize, Serialize};

/// JSON fit file, tagged by `kind`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitFile {
    /// Conjugate linear model with a Gaussian over (slope, intercept).
    LinearGaussian {
        model: LinearGaussianModel,
        mean: Vec<f64>,
        cov: Matrix,
    },
    /// GP with its hyperparameters and training data.
    Gp { model: GpModel, train: Dataset },
    GaussianLine(GaussianLineFit),
    LaplaceLine(LaplaceLineFit),
}

impl FitFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn into_forecaster(self) -> Result<Forecaster> {
        Ok(match self {
            FitFile::LinearGaussian { model, mean, cov } => {
                let post = MvGaussian::new(mean, cov)?;
                Forecaster::Linear(model, post)
            }
            FitFile::Gp { model, train } => {
                let model = GpModel::new(model.kernel, model.noise_var, model.noise_fixed)?;
                Forecaster::Gp(Box::new(model.condition(&train)?))
            }
            FitFile::GaussianLine(f) => Forecaster::GaussianLine(f),
            FitFile::LaplaceLine(f) => Forecaster::LaplaceLine(f),
        })
    }
}

pub enum Forecaster {
    Linear(LinearGaussianModel, MvGaussian),
    Gp(Box<GpPredictor>),
    GaussianLine(GaussianLineFit),
    LaplaceLine(LaplaceLineFit),
}

impl Forecaster {
    pub fn log_density(&self, y: f64, x: f64) -> Result<f64> {
        Ok(match self {
            Forecaster::Linear(m, post) => m.posterior_predictive(post, x)?.log_pdf(y),
            Forecaster::Gp(p) => p.predict(x)?.log_pdf(y),
            Forecaster::GaussianLine(f) => f.predictive(x)?.log_pdf(y),
            Forecaster::LaplaceLine(f) => f.predictive(x)?.log_pdf(y),
        })
    }

    pub fn point(&self, x: f64) -> Result<f64> {
        use bayes_eval::mle_models::LineModel;
        Ok(match self {
            Forecaster::Linear(_, post) => post.mean()[0] * x + post.mean()[1],
            Forecaster::Gp(p) => p.predict_mean(x),
            Forecaster::GaussianLine(f) => f.predictive_mean(x),
            Forecaster::LaplaceLine(f) => f.predictive_mean(x),
        })
    }
}
