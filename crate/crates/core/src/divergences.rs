//! Closed-form discrepancies between Gaussians.

use crate::distributions::MvGaussian;
use crate::error::{Error, Result};
use crate::numerics::{cholesky, psd_sqrt};

fn check_dims(a: &MvGaussian, b: &MvGaussian) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// 2-Wasserstein distance
/// √(‖μa−μb‖² + tr(Σa + Σb − 2 (Σb^½ Σa Σb^½)^½)).
pub fn wasserstein2(a: &MvGaussian, b: &MvGaussian) -> Result<f64> {
    check_dims(a, b)?;
    if a == b {
        // trace-term roundoff (~1e-16) would otherwise survive the square root as ~1e-8
        return Ok(0.0);
    }
    let mean_sq: f64 = a
        .mean()
        .iter()
        .zip(b.mean())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let root_b = psd_sqrt(b.cov())?;
    let inner = root_b.matmul(a.cov())?.matmul(&root_b)?.symmetrize();
    let cross = psd_sqrt(&inner)?;
    let bures = a.cov().trace() + b.cov().trace() - 2.0 * cross.trace();
    Ok((mean_sq + bures.max(0.0)).sqrt())
}

/// KL(a ‖ b) = ½[tr(Σb⁻¹Σa) + Δμᵀ Σb⁻¹ Δμ − k + ln(det Σb / det Σa)].
pub fn kl_gaussian(a: &MvGaussian, b: &MvGaussian) -> Result<f64> {
    check_dims(a, b)?;
    let chol_b = cholesky(b.cov())?;
    let chol_a = cholesky(a.cov())?;
    let prec_b = chol_b.inverse();
    let trace_term = prec_b.matmul(a.cov())?.trace();
    let diff: Vec<f64> = b.mean().iter().zip(a.mean()).map(|(x, y)| x - y).collect();
    let z = chol_b.forward(&diff);
    let maha: f64 = z.iter().map(|v| v * v).sum();
    let k = a.dim() as f64;
    let kl = 0.5 * (trace_term + maha - k + chol_b.log_det() - chol_a.log_det());
    Ok(kl.max(0.0))
}
