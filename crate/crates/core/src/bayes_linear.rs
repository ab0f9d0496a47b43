//! Conjugate Bayesian linear regression with features φ(x) = [x, 1]ᵀ.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distributions::{MvGaussian, Normal};
use crate::error::{Error, Result};
use crate::numerics::{cholesky, normal_quantile, Matrix};

pub fn features(x: f64) -> [f64; 2] {
    [x, 1.0]
}

/// θ ~ N(prior_mean, prior_cov), y | θ, x ~ N(θᵀφ(x), noise_var).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearGaussianModel {
    prior_mean: [f64; 2],
    prior_cov: Matrix,
    noise_var: f64,
}

impl LinearGaussianModel {
    pub fn new(prior_mean: [f64; 2], prior_cov: Matrix, noise_var: f64) -> Result<Self> {
        if prior_cov.rows() != 2 || prior_cov.cols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: prior_cov.rows(),
            });
        }
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::OutOfDomain(format!("noise variance must be > 0, got {noise_var}")));
        }
        cholesky(&prior_cov).map_err(|_| Error::SingularPrior)?;
        Ok(Self {
            prior_mean,
            prior_cov,
            noise_var,
        })
    }

    /// Standard-normal prior on θ with the given noise variance.
    pub fn isotropic(noise_var: f64) -> Result<Self> {
        Self::new([0.0, 0.0], Matrix::identity(2), noise_var)
    }

    pub fn prior_mean(&self) -> [f64; 2] {
        self.prior_mean
    }

    pub fn prior_cov(&self) -> &Matrix {
        &self.prior_cov
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn prior(&self) -> MvGaussian {
        MvGaussian::from_parts_unchecked(self.prior_mean.to_vec(), self.prior_cov.clone())
    }

    /// Closed-form posterior: Σ = (S₀⁻¹ + ΦᵀΦ/σ²)⁻¹, μ = Σ(S₀⁻¹m₀ + Φᵀy/σ²).
    pub fn exact_posterior(&self, data: &Dataset) -> Result<MvGaussian> {
        let prior_prec = cholesky(&self.prior_cov)
            .map_err(|_| Error::SingularPrior)?
            .inverse();
        let mut prec = prior_prec.clone();
        let mut rhs = prior_prec.matvec(&self.prior_mean)?;
        for (x, y) in data.iter() {
            let phi = features(x);
            for i in 0..2 {
                rhs[i] += phi[i] * y / self.noise_var;
                for j in 0..2 {
                    prec[(i, j)] += phi[i] * phi[j] / self.noise_var;
                }
            }
        }
        let cov = cholesky(&prec)?.inverse();
        let mean = cov.matvec(&rhs)?;
        Ok(MvGaussian::from_parts_unchecked(mean, cov.symmetrize()))
    }

    /// Predictive N(φᵀμ, σ² + φᵀΣφ) for any Gaussian over θ.
    pub fn posterior_predictive(&self, post: &MvGaussian, x_star: f64) -> Result<Normal> {
        if post.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: post.dim(),
            });
        }
        let phi = features(x_star);
        let mean = post.mean()[0] * phi[0] + post.mean()[1] * phi[1];
        let spread = post.cov().quad_form(&phi)?;
        Normal::new(mean, self.noise_var + spread.max(0.0))
    }

    /// Posterior conditioned on `data` becomes the new prior.
    pub fn updated(&self, data: &Dataset) -> Result<Self> {
        let post = self.exact_posterior(data)?;
        Self::new([post.mean()[0], post.mean()[1]], post.cov().clone(), self.noise_var)
    }
}

/// Symmetric quantile interval for one coordinate of a Gaussian.
pub fn credible_interval(post: &MvGaussian, coord: usize, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::OutOfDomain(format!("credible level must lie in (0, 1), got {level}")));
    }
    let m = post.marginal(coord)?;
    let lo = normal_quantile(0.5 * (1.0 - level))?;
    let hi = normal_quantile(0.5 * (1.0 + level))?;
    Ok((m.mean + lo * m.sd, m.mean + hi * m.sd))
}
