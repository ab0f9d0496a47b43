//! Posterior approximations: isotropic mean-field Gaussians (optionally
//! rescaled) and SWAG.

use serde::{Deserialize, Serialize};

use crate::bayes_linear::{features, LinearGaussianModel};
use crate::dataset::Dataset;
use crate::distributions::{MvGaussian, Rng};
use crate::error::{Error, Result};
use crate::numerics::{cholesky, Matrix};

/// Jitter added to the SWAG moment-matched covariance.
pub const SWAG_JITTER: f64 = 1e-8;

/// N(mean, rho·I) sharing the exact posterior mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicApprox {
    pub mean: Vec<f64>,
    pub rho: f64,
}

impl IsotropicApprox {
    pub fn gaussian(&self) -> MvGaussian {
        let d = self.mean.len();
        MvGaussian::from_parts_unchecked(self.mean.clone(), Matrix::identity(d).scale(self.rho))
    }

    /// N(mean, scale·rho·I).
    pub fn rescale(&self, scale: f64) -> Result<MvGaussian> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::OutOfDomain(format!("scale must be > 0, got {scale}")));
        }
        let d = self.mean.len();
        Ok(MvGaussian::from_parts_unchecked(
            self.mean.clone(),
            Matrix::identity(d).scale(scale * self.rho),
        ))
    }
}

/// Reverse-KL-optimal isotropic approximation: rho = k / tr(Σ⁻¹).
pub fn optimal_isotropic_vi(posterior: &MvGaussian) -> Result<IsotropicApprox> {
    let prec = cholesky(posterior.cov())?.inverse();
    let rho = posterior.dim() as f64 / prec.trace();
    Ok(IsotropicApprox {
        mean: posterior.mean().to_vec(),
        rho,
    })
}

/// Variance multipliers applied to the optimal isotropic approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScaleGrid(Vec<f64>);

impl ScaleGrid {
    pub fn new(scales: Vec<f64>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::EmptyInput);
        }
        if let Some(s) = scales.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
            return Err(Error::OutOfDomain(format!("scale factors must be > 0, got {s}")));
        }
        Ok(ScaleGrid(scales))
    }

    /// Grid for the heteroscedastic and nonlinear mean-field panels.
    pub fn panels() -> Self {
        ScaleGrid(vec![1.0, 5.0, 10.0, 15.0, 30.0])
    }

    /// Contour panels of the well-specified example.
    pub fn well_specified_contours() -> Self {
        ScaleGrid(vec![4.0, 5.0, 7.0, 9.0])
    }

    /// Curve of the well-specified example.
    pub fn well_specified_curve() -> Self {
        ScaleGrid((1..=11).map(f64::from).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for ScaleGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        ScaleGrid::new(v)
    }
}

impl From<ScaleGrid> for Vec<f64> {
    fn from(g: ScaleGrid) -> Self {
        g.0
    }
}

/// SGD schedule for SWAG.
///
/// The learning rate moves linearly from `initial_lr` to `constant_lr`
/// over the first `anneal_epoch` epochs and stays constant afterwards.
/// One iterate is collected every `collect_every` epochs from
/// `anneal_epoch` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SwagConfig {
    pub total_epochs: usize,
    pub anneal_epoch: usize,
    pub initial_lr: f64,
    pub constant_lr: f64,
    pub batch_size: usize,
    pub collect_every: usize,
    pub seed: u64,
}

impl Default for SwagConfig {
    fn default() -> Self {
        SwagConfig {
            total_epochs: 1000,
            anneal_epoch: 750,
            initial_lr: 0.1,
            constant_lr: 0.1,
            batch_size: 32,
            collect_every: 1,
            seed: 0,
        }
    }
}

impl SwagConfig {
    pub fn with_lr(constant_lr: f64, seed: u64) -> Self {
        SwagConfig {
            constant_lr,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.anneal_epoch >= self.total_epochs {
            return Err(Error::InvalidConfig(format!(
                "anneal_epoch ({}) must be < total_epochs ({})",
                self.anneal_epoch, self.total_epochs
            )));
        }
        if !(self.initial_lr > 0.0) || !(self.constant_lr > 0.0) {
            return Err(Error::InvalidConfig("learning rates must be > 0".into()));
        }
        if self.batch_size == 0 || self.collect_every == 0 {
            return Err(Error::InvalidConfig("batch_size and collect_every must be >= 1".into()));
        }
        Ok(())
    }

    fn lr_at(&self, epoch: usize) -> f64 {
        if epoch >= self.anneal_epoch {
            self.constant_lr
        } else {
            let t = epoch as f64 / self.anneal_epoch as f64;
            self.initial_lr + (self.constant_lr - self.initial_lr) * t
        }
    }
}

/// Runs SGD on the negative log joint and returns the collected iterates.
///
/// Each minibatch step uses `(1/N)·[Σ_batch ∇ℓᵢ + (|B|/N)·∇(−log prior)]`,
/// so one epoch of steps adds up to one full-batch gradient step on the
/// per-example negative log joint.
pub fn swag_iterates(model: &LinearGaussianModel, data: &Dataset, cfg: &SwagConfig) -> Result<Vec<[f64; 2]>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = data.len();
    let nf = n as f64;
    let noise = model.noise_var();
    let prior_prec = cholesky(model.prior_cov())?.inverse();
    let prior_mean = model.prior_mean();

    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut theta = prior_mean;
    let mut collected = Vec::with_capacity((cfg.total_epochs - cfg.anneal_epoch) / cfg.collect_every + 1);

    for epoch in 0..cfg.total_epochs {
        let lr = cfg.lr_at(epoch);
        rng.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = [0.0; 2];
            for &i in batch {
                let phi = features(data.xs()[i]);
                let resid = theta[0] * phi[0] + theta[1] * phi[1] - data.ys()[i];
                grad[0] += resid * phi[0] / noise;
                grad[1] += resid * phi[1] / noise;
            }
            let share = batch.len() as f64 / nf;
            let d = [theta[0] - prior_mean[0], theta[1] - prior_mean[1]];
            for k in 0..2 {
                let prior_grad = prior_prec[(k, 0)] * d[0] + prior_prec[(k, 1)] * d[1];
                theta[k] -= lr * (grad[k] + share * prior_grad) / nf;
            }
            if !(theta[0].is_finite() && theta[1].is_finite()) {
                return Err(Error::DivergedOptimization { epoch });
            }
        }
        if epoch >= cfg.anneal_epoch && (epoch - cfg.anneal_epoch).is_multiple_of(cfg.collect_every) {
            collected.push(theta);
        }
    }
    Ok(collected)
}

/// Gaussian with the iterates' arithmetic mean and (n−1)-normalized
/// covariance, plus `SWAG_JITTER·I`.
pub fn moment_match(iterates: &[[f64; 2]]) -> Result<MvGaussian> {
    if iterates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = iterates.len() as f64;
    let mean = [
        iterates.iter().map(|t| t[0]).sum::<f64>() / n,
        iterates.iter().map(|t| t[1]).sum::<f64>() / n,
    ];
    let mut cov = Matrix::zeros(2, 2);
    if iterates.len() > 1 {
        for t in iterates {
            let d = [t[0] - mean[0], t[1] - mean[1]];
            for i in 0..2 {
                for j in 0..2 {
                    cov[(i, j)] += d[i] * d[j];
                }
            }
        }
        cov = cov.scale(1.0 / (n - 1.0));
    }
    for i in 0..2 {
        cov[(i, i)] += SWAG_JITTER;
    }
    if !cov.is_finite() {
        return Err(Error::DivergedOptimization { epoch: 0 });
    }
    Ok(MvGaussian::from_parts_unchecked(mean.to_vec(), cov))
}

/// SWAG: SGD iterates around the MAP, moment-matched to a Gaussian.
pub fn swag_fit(model: &LinearGaussianModel, data: &Dataset, cfg: &SwagConfig) -> Result<MvGaussian> {
    moment_match(&swag_iterates(model, data, cfg)?)
}
