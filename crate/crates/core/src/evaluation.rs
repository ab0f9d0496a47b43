//! Held-out evaluation: test log-likelihood with CLT intervals, the
//! interval-disjointness comparison rule, RMSE intervals and scoring rules.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distributions::Predictive;
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TllResult {
    pub tll: f64,
    /// Standard error of the mean; absent for a single test point.
    pub se: Option<f64>,
    pub n_test: usize,
    pub ci95: Option<(f64, f64)>,
}

impl TllResult {
    pub fn ci(&self) -> Result<(f64, f64)> {
        self.ci95.ok_or(Error::MissingCi)
    }
}

/// Mean and standard error (n−1 denominator, divided by √n) with a
/// deterministic reduction order.
fn mean_and_se(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

/// TLL from precomputed per-point log densities.
pub fn tll_from_log_densities(values: &[f64]) -> Result<TllResult> {
    if values.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLogDensity {
            index,
            value: values[index],
        });
    }
    let (tll, se) = mean_and_se(values);
    Ok(TllResult {
        tll,
        se,
        n_test: values.len(),
        ci95: se.map(|s| (tll - 2.0 * s, tll + 2.0 * s)),
    })
}

/// Test log-likelihood of `logpred(y, x)` over `test`. Points are
/// evaluated in parallel and reduced in input order.
pub fn tll<F>(logpred: F, test: &Dataset) -> Result<TllResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let values: Vec<f64> = test
        .xs()
        .par_iter()
        .zip(test.ys().par_iter())
        .map(|(&x, &y)| logpred(y, x))
        .collect();
    tll_from_log_densities(&values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElpdComparison {
    FirstGreater,
    SecondGreater,
    Inconclusive,
}

/// Declares a winner only when the two 95% intervals are disjoint.
pub fn compare_elpd(a: &TllResult, b: &TllResult) -> Result<ElpdComparison> {
    let (a_lo, a_hi) = a.ci()?;
    let (b_lo, b_hi) = b.ci()?;
    Ok(if a_lo > b_hi {
        ElpdComparison::FirstGreater
    } else if b_lo > a_hi {
        ElpdComparison::SecondGreater
    } else {
        ElpdComparison::Inconclusive
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseResult {
    pub rmse: f64,
    pub ci95: Option<(f64, f64)>,
    pub n: usize,
}

/// RMSE with interval `[√max(m−2s, 0), √(m+2s)]`, where `m` is the mean
/// squared error and `s` its standard error.
pub fn rmse_with_ci(point_preds: &[f64], test_ys: &[f64]) -> Result<RmseResult> {
    if point_preds.len() != test_ys.len() {
        return Err(Error::LengthMismatch {
            left: point_preds.len(),
            right: test_ys.len(),
        });
    }
    if point_preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let sq: Vec<f64> = point_preds.iter().zip(test_ys).map(|(p, y)| (p - y) * (p - y)).collect();
    let (m, s) = mean_and_se(&sq);
    Ok(RmseResult {
        rmse: m.sqrt(),
        ci95: s.map(|s| ((m - 2.0 * s).max(0.0).sqrt(), (m + 2.0 * s).sqrt())),
        n: sq.len(),
    })
}

/// Positively oriented scoring rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScoringRule {
    LogScore,
    SquaredError,
    DawidSebastiani,
}

pub fn score<P: Predictive + ?Sized>(rule: ScoringRule, forecast: &P, y: f64) -> Result<f64> {
    let m = forecast.mean();
    match rule {
        ScoringRule::LogScore => Ok(forecast.log_pdf(y)),
        ScoringRule::SquaredError => Ok(-(y - m) * (y - m)),
        ScoringRule::DawidSebastiani => {
            let v = forecast.variance();
            if !(v > 0.0) {
                return Err(Error::OutOfDomain(format!("Dawid-Sebastiani needs variance > 0, got {v}")));
            }
            Ok(-((y - m) * (y - m) / v + v.ln()))
        }
    }
}

/// Flat JSON record for a single metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub value: f64,
    pub se: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n: usize,
}

impl From<&TllResult> for MetricRecord {
    fn from(r: &TllResult) -> Self {
        MetricRecord {
            metric: "tll".into(),
            value: r.tll,
            se: r.se,
            ci_lo: r.ci95.map(|c| c.0),
            ci_hi: r.ci95.map(|c| c.1),
            n: r.n_test,
        }
    }
}

impl From<&RmseResult> for MetricRecord {
    fn from(r: &RmseResult) -> Self {
        MetricRecord {
            metric: "rmse".into(),
            value: r.rmse,
            se: None,
            ci_lo: r.ci95.map(|c| c.0),
            ci_hi: r.ci95.map(|c| c.1),
            n: r.n,
        }
    }
}
