use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distributions::{Laplace, Rng, Sampler};
use crate::error::{Error, Result};

/// Synthetic data-generating processes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DgpSpec {
    /// x ~ N(0,1), y | x ~ N(x, 1 + ln(1 + eˣ)).
    Heteroscedastic,
    /// x ~ N(0,1), y | x ~ N(−2x − 1 + x², 0.5).
    NonlinearQuadratic,
    /// x ~ N(0,1), y | x ~ N(−2x − 1, 0.25²).
    WellSpecified,
    /// x ~ U(−5,5), y | x ~ N(sin 2x, 0.1).
    GpSine,
    /// x ~ U(0,25), y | x ~ Laplace(x, 1/√2).
    LaplaceLine,
}

impl DgpSpec {
    pub const ALL: [DgpSpec; 5] = [
        DgpSpec::Heteroscedastic,
        DgpSpec::NonlinearQuadratic,
        DgpSpec::WellSpecified,
        DgpSpec::GpSine,
        DgpSpec::LaplaceLine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DgpSpec::Heteroscedastic => "heteroscedastic",
            DgpSpec::NonlinearQuadratic => "nonlinear_quadratic",
            DgpSpec::WellSpecified => "well_specified",
            DgpSpec::GpSine => "gp_sine",
            DgpSpec::LaplaceLine => "laplace_line",
        }
    }

    fn draw_x(self, rng: &mut Rng) -> f64 {
        match self {
            DgpSpec::Heteroscedastic | DgpSpec::NonlinearQuadratic | DgpSpec::WellSpecified => rng.standard_normal(),
            DgpSpec::GpSine => -5.0 + 10.0 * rng.uniform(),
            DgpSpec::LaplaceLine => 25.0 * rng.uniform(),
        }
    }

    /// Conditional variance of y given x.
    pub fn noise_var(self, x: f64) -> f64 {
        match self {
            DgpSpec::Heteroscedastic => {
                // 1 + softplus(x), written to avoid overflow
                1.0 + if x > 30.0 { x } else { x.exp().ln_1p() }
            }
            DgpSpec::NonlinearQuadratic => 0.5,
            DgpSpec::WellSpecified => 0.0625,
            DgpSpec::GpSine => 0.1,
            DgpSpec::LaplaceLine => 1.0,
        }
    }

    /// Conditional mean of y given x.
    pub fn mean(self, x: f64) -> f64 {
        match self {
            DgpSpec::Heteroscedastic | DgpSpec::LaplaceLine => x,
            DgpSpec::NonlinearQuadratic => -2.0 * x - 1.0 + x * x,
            DgpSpec::WellSpecified => -2.0 * x - 1.0,
            DgpSpec::GpSine => (2.0 * x).sin(),
        }
    }

    /// Draws y at a fixed x.
    pub fn draw_y(self, x: f64, rng: &mut Rng) -> f64 {
        match self {
            DgpSpec::LaplaceLine => Laplace {
                loc: x,
                scale: std::f64::consts::FRAC_1_SQRT_2,
            }
            .draw(rng),
            _ => self.mean(x) + self.noise_var(x).sqrt() * rng.standard_normal(),
        }
    }

    /// `n` i.i.d. pairs; a pure function of `(self, n, seed)`.
    pub fn generate(self, n: usize, seed: u64) -> Result<Dataset> {
        if n == 0 {
            return Err(Error::InvalidConfig("dataset size must be >= 1".into()));
        }
        let mut rng = Rng::new(seed);
        let xs: Vec<f64> = (0..n).map(|_| self.draw_x(&mut rng)).collect();
        let ys = xs.iter().map(|&x| self.draw_y(x, &mut rng)).collect();
        Dataset::new(xs, ys, self.name(), seed)
    }
}

impl fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DgpSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DgpSpec::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::UnknownVariant(s.to_string()))
    }
}
