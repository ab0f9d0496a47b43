//! Shared fixtures for the benchmarks.

use bayes_eval::{DgpSpec, Dataset, Matrix, MvGaussian, Rng};

pub fn dataset(dgp: DgpSpec, n: usize) -> Dataset {
    dgp.generate(n, 42).expect("n >= 1")
}

/// A random 2-D Gaussian with an SPD covariance.
pub fn random_gaussian(rng: &mut Rng) -> MvGaussian {
    let a = 0.1 + rng.uniform() * 3.0;
    let b = 0.1 + rng.uniform() * 3.0;
    let c = (rng.uniform() * 1.8 - 0.9) * (a * b).sqrt();
    let cov = Matrix::from_rows(&[[a, c], [c, b]]).expect("2x2");
    MvGaussian::new(vec![rng.standard_normal(), rng.standard_normal()], cov).expect("SPD by construction")
}
