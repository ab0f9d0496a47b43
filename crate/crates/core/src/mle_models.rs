//! Maximum-likelihood fits of two conditional line models:
//! a Gaussian line through the origin and a Laplace line with a fixed
//! intercept.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distributions::{Laplace, Normal};
use crate::error::{Error, Result};

/// y | x ~ N(θx, σ²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianLineFit {
    pub theta: f64,
    pub sigma: f64,
}

/// y | x ~ Laplace(0.45 + θx, λ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceLineFit {
    pub theta: f64,
    pub lambda: f64,
}

impl LaplaceLineFit {
    pub const INTERCEPT: f64 = 0.45;
}

pub fn fit_gaussian_line(data: &Dataset) -> Result<GaussianLineFit> {
    let sxx: f64 = data.xs().iter().map(|x| x * x).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let sxy: f64 = data.iter().map(|(x, y)| x * y).sum();
    let theta = sxy / sxx;
    let rss: f64 = data.iter().map(|(x, y)| (y - theta * x).powi(2)).sum();
    Ok(GaussianLineFit {
        theta,
        sigma: (rss / data.len() as f64).sqrt(),
    })
}

/// Sum of absolute residuals of the fixed-intercept Laplace line.
pub fn lad_objective(data: &Dataset, theta: f64) -> f64 {
    data.iter()
        .map(|(x, y)| (y - LaplaceLineFit::INTERCEPT - theta * x).abs())
        .sum()
}

/// Exact least-absolute-deviations slope via a weighted median of the
/// breakpoints `(y − 0.45)/x` with weights `|x|`. A flat optimal segment
/// yields its midpoint.
pub fn fit_laplace_line(data: &Dataset) -> Result<LaplaceLineFit> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|(x, _)| *x != 0.0)
        .map(|(x, y)| ((y - LaplaceLineFit::INTERCEPT) / x, x.abs()))
        .collect();
    let theta = if pts.is_empty() {
        0.0
    } else {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = pts.iter().map(|p| p.1).sum();
        let half = 0.5 * total;
        let mut cum = 0.0;
        let mut theta = pts[pts.len() - 1].0;
        for (k, &(b, w)) in pts.iter().enumerate() {
            cum += w;
            if cum > half {
                theta = b;
                break;
            }
            if cum == half {
                theta = match pts.get(k + 1) {
                    Some(next) => 0.5 * (b + next.0),
                    None => b,
                };
                break;
            }
        }
        theta
    };
    Ok(LaplaceLineFit {
        theta,
        lambda: lad_objective(data, theta) / data.len() as f64,
    })
}

/// Plug-in predictive of a fitted line model.
pub trait LineModel {
    fn predictive_mean(&self, x_star: f64) -> f64;
}

impl LineModel for GaussianLineFit {
    fn predictive_mean(&self, x_star: f64) -> f64 {
        self.theta * x_star
    }
}

impl LineModel for LaplaceLineFit {
    fn predictive_mean(&self, x_star: f64) -> f64 {
        Self::INTERCEPT + self.theta * x_star
    }
}

impl GaussianLineFit {
    pub fn predictive(&self, x_star: f64) -> Result<Normal> {
        if !(self.sigma > 0.0) {
            return Err(Error::DegenerateScale(self.sigma));
        }
        Normal::new(self.predictive_mean(x_star), self.sigma * self.sigma)
    }
}

impl LaplaceLineFit {
    pub fn predictive(&self, x_star: f64) -> Result<Laplace> {
        if !(self.lambda > 0.0) {
            return Err(Error::DegenerateScale(self.lambda));
        }
        Laplace::new(self.predictive_mean(x_star), self.lambda)
    }
}
