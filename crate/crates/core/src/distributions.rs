//! Gaussian, Laplace and uniform families plus the deterministic RNG.
//!
//! Scalar Gaussians are parameterized by variance throughout.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{cholesky, dot, Matrix};

pub const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Seeded counter-based stream (ChaCha8). Distinct `stream` ids under the
/// same seed give independent sequences, so tasks can be split without
/// sharing state.
#[derive(Debug, Clone)]
pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Rng(inner)
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        use rand::seq::SliceRandom;
        xs.shuffle(&mut self.0);
    }
}

/// Anything that can be drawn from.
pub trait Sampler {
    type Item;

    fn draw(&self, rng: &mut Rng) -> Self::Item;

    fn sample(&self, n: usize, rng: &mut Rng) -> Vec<Self::Item> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// A univariate predictive distribution: density plus first two moments.
pub trait Predictive {
    fn log_pdf(&self, y: f64) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;
}

/// Univariate Gaussian N(mean, var).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normal {
    pub mean: f64,
    pub var: f64,
}

impl Normal {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
            return Err(Error::OutOfDomain(format!("normal needs finite mean and var > 0, got ({mean}, {var})")));
        }
        Ok(Normal { mean, var })
    }

    pub fn sd(&self) -> f64 {
        self.var.sqrt()
    }
}

impl Predictive for Normal {
    fn log_pdf(&self, y: f64) -> f64 {
        let r = y - self.mean;
        -0.5 * (LN_2PI + self.var.ln() + r * r / self.var)
    }

    fn mean(&self) -> f64 {
        self.mean
    }

    fn variance(&self) -> f64 {
        self.var
    }
}

impl Sampler for Normal {
    type Item = f64;

    fn draw(&self, rng: &mut Rng) -> f64 {
        self.mean + self.var.sqrt() * rng.standard_normal()
    }
}

/// Laplace(loc, scale) with density exp(-|x - loc| / scale) / (2 scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Laplace {
    pub loc: f64,
    pub scale: f64,
}

impl Laplace {
    pub fn new(loc: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() || !loc.is_finite() {
            return Err(Error::OutOfDomain(format!("laplace needs finite loc and scale > 0, got ({loc}, {scale})")));
        }
        Ok(Laplace { loc, scale })
    }
}

impl Predictive for Laplace {
    fn log_pdf(&self, y: f64) -> f64 {
        -(2.0 * self.scale).ln() - (y - self.loc).abs() / self.scale
    }

    fn mean(&self) -> f64 {
        self.loc
    }

    fn variance(&self) -> f64 {
        2.0 * self.scale * self.scale
    }
}

impl Sampler for Laplace {
    type Item = f64;

    fn draw(&self, rng: &mut Rng) -> f64 {
        // Inverse CDF; u in (-1/2, 1/2].
        let u = 0.5 - rng.uniform();
        let mag = -(1.0 - 2.0 * u.abs()).ln();
        self.loc + self.scale * u.signum() * mag
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::OutOfDomain(format!("uniform needs lo < hi, got ({lo}, {hi})")));
        }
        Ok(Uniform { lo, hi })
    }
}

impl Sampler for Uniform {
    type Item = f64;

    fn draw(&self, rng: &mut Rng) -> f64 {
        self.lo + (self.hi - self.lo) * rng.uniform()
    }
}

/// Mean and standard deviation of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginal {
    pub mean: f64,
    pub sd: f64,
}

/// Multivariate Gaussian N(mean, cov).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvGaussian {
    mean: Vec<f64>,
    cov: Matrix,
}

impl MvGaussian {
    /// Validates dimensions and that `cov` is symmetric positive definite.
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        Self::check_shape(&mean, &cov)?;
        if cov.relative_asymmetry() > 1e-12 {
            return Err(Error::NotSymmetric {
                asymmetry: cov.relative_asymmetry(),
            });
        }
        crate::numerics::Cholesky::factor_exact(&cov)?;
        Ok(MvGaussian { mean, cov })
    }

    /// A point mass at `mean` (zero covariance). Only moments and
    /// predictive pushes are meaningful; densities are undefined.
    pub fn point_mass(mean: Vec<f64>) -> Self {
        let d = mean.len();
        MvGaussian {
            mean,
            cov: Matrix::zeros(d, d),
        }
    }

    pub(crate) fn from_parts_unchecked(mean: Vec<f64>, cov: Matrix) -> Self {
        debug_assert_eq!(mean.len(), cov.rows());
        MvGaussian { mean, cov }
    }

    fn check_shape(mean: &[f64], cov: &Matrix) -> Result<()> {
        if mean.is_empty() {
            return Err(Error::OutOfDomain("gaussian dimension must be >= 1".into()));
        }
        if cov.rows() != mean.len() || cov.cols() != mean.len() {
            return Err(Error::DimensionMismatch {
                expected: mean.len(),
                found: cov.rows(),
            });
        }
        Ok(())
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let chol = cholesky(&self.cov)?;
        let r: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        let z = chol.forward(&r);
        Ok(-0.5 * (dot(&z, &z) + chol.log_det() + self.dim() as f64 * LN_2PI))
    }

    pub fn marginal(&self, coord: usize) -> Result<Marginal> {
        if coord >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: coord,
                dim: self.dim(),
            });
        }
        Ok(Marginal {
            mean: self.mean[coord],
            sd: self.cov[(coord, coord)].sqrt(),
        })
    }

    pub fn marginal_sds(&self) -> Vec<f64> {
        self.cov.diag().iter().map(|v| v.sqrt()).collect()
    }
}

impl Sampler for MvGaussian {
    type Item = Vec<f64>;

    fn draw(&self, rng: &mut Rng) -> Vec<f64> {
        let l = cholesky(&self.cov)
            .map(|c| c.into_factor())
            .unwrap_or_else(|_| Matrix::zeros(self.dim(), self.dim()));
        draw_with_factor(&self.mean, &l, rng)
    }

    fn sample(&self, n: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
        let l = cholesky(&self.cov)
            .map(|c| c.into_factor())
            .unwrap_or_else(|_| Matrix::zeros(self.dim(), self.dim()));
        (0..n).map(|_| draw_with_factor(&self.mean, &l, rng)).collect()
    }
}

fn draw_with_factor(mean: &[f64], l: &Matrix, rng: &mut Rng) -> Vec<f64> {
    let z: Vec<f64> = (0..mean.len()).map(|_| rng.standard_normal()).collect();
    mean.iter()
        .enumerate()
        .map(|(i, m)| m + dot(&l.row(i)[..=i], &z[..=i]))
        .collect()
}
