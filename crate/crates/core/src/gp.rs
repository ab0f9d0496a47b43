//! Zero-mean Gaussian-process regression on scalar inputs.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::distributions::{Normal, LN_2PI};
use crate::error::{Error, Result};
use crate::numerics::{cholesky, dot, Cholesky, Matrix};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Relative diagonal jitter, scaled by the signal variance.
pub const GRAM_JITTER: f64 = 1e-8;

/// Box on every log-hyperparameter during fitting.
const LOG_BOUND: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    SquaredExponential { signal_var: f64, lengthscale: f64 },
    PeriodicMatern32 { signal_var: f64, lengthscale: f64, period: f64 },
}

impl Kernel {
    pub fn squared_exponential(signal_var: f64, lengthscale: f64) -> Result<Self> {
        Kernel::SquaredExponential { signal_var, lengthscale }.validated()
    }

    pub fn periodic_matern32(signal_var: f64, lengthscale: f64, period: f64) -> Result<Self> {
        Kernel::PeriodicMatern32 {
            signal_var,
            lengthscale,
            period,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        let ok = self.log_params().iter().all(|v| v.is_finite());
        if ok {
            Ok(self)
        } else {
            Err(Error::OutOfDomain(format!("kernel hyperparameters must be finite and > 0: {self:?}")))
        }
    }

    pub fn signal_var(&self) -> f64 {
        match *self {
            Kernel::SquaredExponential { signal_var, .. } | Kernel::PeriodicMatern32 { signal_var, .. } => signal_var,
        }
    }

    pub fn lengthscale(&self) -> f64 {
        match *self {
            Kernel::SquaredExponential { lengthscale, .. } | Kernel::PeriodicMatern32 { lengthscale, .. } => lengthscale,
        }
    }

    pub fn eval(&self, x: f64, x2: f64) -> f64 {
        match *self {
            Kernel::SquaredExponential { signal_var, lengthscale } => {
                let r = x - x2;
                signal_var * (-0.5 * r * r / (lengthscale * lengthscale)).exp()
            }
            Kernel::PeriodicMatern32 {
                signal_var,
                lengthscale,
                period,
            } => {
                let u = SQRT3 * (PI * (x - x2) / period).sin().abs() / lengthscale;
                signal_var * (1.0 + u) * (-u).exp()
            }
        }
    }

    /// Log-hyperparameters: `[ln σ_f², ln ℓ]`, plus `ln p` for the periodic kernel.
    pub fn log_params(&self) -> Vec<f64> {
        match *self {
            Kernel::SquaredExponential { signal_var, lengthscale } => vec![signal_var.ln(), lengthscale.ln()],
            Kernel::PeriodicMatern32 {
                signal_var,
                lengthscale,
                period,
            } => vec![signal_var.ln(), lengthscale.ln(), period.ln()],
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            Kernel::SquaredExponential { .. } => 2,
            Kernel::PeriodicMatern32 { .. } => 3,
        }
    }

    fn with_log_params(&self, p: &[f64]) -> Self {
        match self {
            Kernel::SquaredExponential { .. } => Kernel::SquaredExponential {
                signal_var: p[0].exp(),
                lengthscale: p[1].exp(),
            },
            Kernel::PeriodicMatern32 { .. } => Kernel::PeriodicMatern32 {
                signal_var: p[0].exp(),
                lengthscale: p[1].exp(),
                period: p[2].exp(),
            },
        }
    }

    /// Derivatives of `eval` with respect to each log-hyperparameter.
    fn grad_log_params(&self, x: f64, x2: f64, out: &mut [f64]) {
        match *self {
            Kernel::SquaredExponential { signal_var, lengthscale } => {
                let r2 = (x - x2) * (x - x2);
                let l2 = lengthscale * lengthscale;
                let k = signal_var * (-0.5 * r2 / l2).exp();
                out[0] = k;
                out[1] = k * r2 / l2;
            }
            Kernel::PeriodicMatern32 {
                signal_var,
                lengthscale,
                period,
            } => {
                let a = PI * (x - x2) / period;
                let s = a.sin();
                let u = SQRT3 * s.abs() / lengthscale;
                let e = (-u).exp();
                out[0] = signal_var * (1.0 + u) * e;
                out[1] = signal_var * u * u * e;
                let du = (SQRT3 / lengthscale) * s.signum() * a.cos() * (-a);
                out[2] = -signal_var * u * e * if s == 0.0 { 0.0 } else { du };
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub kernel: Kernel,
    pub noise_var: f64,
    #[serde(default)]
    pub noise_fixed: bool,
}

impl GpModel {
    pub fn new(kernel: Kernel, noise_var: f64, noise_fixed: bool) -> Result<Self> {
        let kernel = kernel.validated()?;
        if !(noise_var > 0.0) || !noise_var.is_finite() {
            return Err(Error::OutOfDomain(format!("noise variance must be > 0, got {noise_var}")));
        }
        Ok(GpModel {
            kernel,
            noise_var,
            noise_fixed,
        })
    }

    /// Free log-parameters: kernel parameters, then `ln σ²` unless fixed.
    pub fn free_params(&self) -> Vec<f64> {
        let mut p = self.kernel.log_params();
        if !self.noise_fixed {
            p.push(self.noise_var.ln());
        }
        p
    }

    pub fn with_free_params(&self, p: &[f64]) -> Self {
        let k = self.kernel.n_params();
        GpModel {
            kernel: self.kernel.with_log_params(&p[..k]),
            noise_var: if self.noise_fixed { self.noise_var } else { p[k].exp() },
            noise_fixed: self.noise_fixed,
        }
    }

    fn jitter(&self) -> f64 {
        GRAM_JITTER * self.kernel.signal_var()
    }

    /// Kernel Gram matrix without noise or jitter.
    pub fn gram(&self, xs: &[f64]) -> Matrix {
        let n = xs.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = self.kernel.eval(xs[i], xs[j]);
                k[(i, j)] = v;
                k[(j, i)] = v;
            }
        }
        k
    }

    fn factor(&self, xs: &[f64]) -> Result<Cholesky> {
        let mut a = self.gram(xs);
        let d = self.noise_var + self.jitter();
        for i in 0..xs.len() {
            a[(i, i)] += d;
        }
        cholesky(&a)
    }

    pub fn log_marginal_likelihood(&self, data: &Dataset) -> Result<f64> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let chol = self.factor(data.xs())?;
        let z = chol.forward(data.ys());
        Ok(-0.5 * dot(&z, &z) - 0.5 * chol.log_det() - 0.5 * data.len() as f64 * LN_2PI)
    }

    /// Log marginal likelihood and its gradient with respect to `free_params`.
    pub fn lml_and_gradient(&self, data: &Dataset) -> Result<(f64, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let xs = data.xs();
        let n = xs.len();
        let chol = self.factor(xs)?;
        let alpha = chol.solve(data.ys())?;
        let lml = -0.5 * dot(data.ys(), &alpha) - 0.5 * chol.log_det() - 0.5 * n as f64 * LN_2PI;

        // W = ααᵀ − A⁻¹; dL/dθ = ½ tr(W ∂A/∂θ).
        let ainv = chol.inverse();
        let nk = self.kernel.n_params();
        let mut grad = vec![0.0; self.free_params().len()];
        let mut dk = vec![0.0; nk];
        for i in 0..n {
            for j in 0..=i {
                let w = alpha[i] * alpha[j] - ainv[(i, j)];
                let mult = if i == j { 0.5 } else { 1.0 };
                self.kernel.grad_log_params(xs[i], xs[j], &mut dk);
                if i == j {
                    // jitter scales with σ_f²
                    dk[0] += self.jitter();
                }
                for (g, d) in grad.iter_mut().zip(&dk) {
                    *g += mult * w * d;
                }
            }
        }
        if !self.noise_fixed {
            let tr_w: f64 = (0..n).map(|i| alpha[i] * alpha[i] - ainv[(i, i)]).sum();
            grad[nk] = 0.5 * self.noise_var * tr_w;
        }
        Ok((lml, grad))
    }

    /// Multi-start fit with default options.
    pub fn fit(&self, data: &Dataset) -> Result<GpModel> {
        Ok(self.fit_with(data, &FitOptions::default())?.model)
    }

    pub fn fit_with(&self, data: &Dataset, opts: &FitOptions) -> Result<FitReport> {
        if data.is_empty() {
            return Err(Error::EmptyInput);
        }
        let starts = self.starts(opts);
        let runs: Vec<Option<StartRun>> = starts
            .par_iter()
            .map(|s| ascend(*s, data, opts).ok())
            .collect();
        let start_lmls: Vec<f64> = runs
            .iter()
            .map(|r| r.as_ref().map_or(f64::NAN, |r| r.trace[0]))
            .collect();
        let best = runs
            .into_iter()
            .flatten()
            .filter(|r| r.lml.is_finite())
            .fold(None::<StartRun>, |acc, r| match acc {
                Some(a) if a.lml >= r.lml => Some(a),
                _ => Some(r),
            })
            .ok_or_else(|| Error::OptimizationFailed("every start produced a non-finite objective".into()))?;
        Ok(FitReport {
            model: best.model,
            lml: best.lml,
            trace: best.trace,
            start_lmls,
        })
    }

    /// Eight starts picked at an even stride from the log-grid
    /// σ_f² ∈ {0.1, 1, 10} × ℓ ∈ {0.1, 1, 10} (× p ∈ {1, π, 10}).
    fn starts(&self, opts: &FitOptions) -> Vec<GpModel> {
        const VALS: [f64; 3] = [0.1, 1.0, 10.0];
        const PERIODS: [f64; 3] = [1.0, PI, 10.0];
        let mut grid = Vec::new();
        for &sv in &VALS {
            for &l in &VALS {
                let l = opts.lengthscale_min.map_or(l, |m| l.max(m));
                match self.kernel {
                    Kernel::SquaredExponential { .. } => grid.push(Kernel::SquaredExponential {
                        signal_var: sv,
                        lengthscale: l,
                    }),
                    Kernel::PeriodicMatern32 { .. } => {
                        for &p in &PERIODS {
                            grid.push(Kernel::PeriodicMatern32 {
                                signal_var: sv,
                                lengthscale: l,
                                period: p,
                            });
                        }
                    }
                }
            }
        }
        let count = opts.n_starts.min(grid.len()).max(1);
        (0..count)
            .map(|k| GpModel {
                kernel: grid[k * grid.len() / count],
                ..*self
            })
            .collect()
    }

    /// Conditions on `data` for prediction.
    pub fn condition(&self, data: &Dataset) -> Result<GpPredictor> {
        let xs = data.xs().to_vec();
        if xs.is_empty() {
            return Ok(GpPredictor {
                model: *self,
                xs,
                chol: None,
                alpha: Vec::new(),
            });
        }
        let chol = self.factor(&xs)?;
        let alpha = chol.solve(data.ys())?;
        Ok(GpPredictor {
            model: *self,
            xs,
            chol: Some(chol),
            alpha,
        })
    }

    pub fn predict(&self, data: &Dataset, x_star: f64) -> Result<Normal> {
        self.condition(data)?.predict(x_star)
    }
}

/// Optimizer settings for [`GpModel::fit_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Stop once an accepted step changes the objective by less than this.
    pub tol: f64,
    pub n_starts: usize,
    /// Optional lower bound on the lengthscale, enforced by projection.
    pub lengthscale_min: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 500,
            tol: 1e-6,
            n_starts: 8,
            lengthscale_min: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitReport {
    pub model: GpModel,
    pub lml: f64,
    /// Objective after each accepted iteration of the winning start,
    /// starting with its initial value.
    pub trace: Vec<f64>,
    /// Objective at each start's initialization (NaN if it failed).
    pub start_lmls: Vec<f64>,
}

struct StartRun {
    model: GpModel,
    lml: f64,
    trace: Vec<f64>,
}

fn project(p: &mut [f64], opts: &FitOptions) {
    for v in p.iter_mut() {
        *v = v.clamp(-LOG_BOUND, LOG_BOUND);
    }
    if let Some(m) = opts.lengthscale_min {
        p[1] = p[1].max(m.ln());
    }
}

/// Projected gradient ascent with Armijo backtracking.
fn ascend(start: GpModel, data: &Dataset, opts: &FitOptions) -> Result<StartRun> {
    let mut p = start.free_params();
    project(&mut p, opts);
    let mut model = start.with_free_params(&p);
    let (mut f, mut g) = model.lml_and_gradient(data)?;
    if !f.is_finite() {
        return Err(Error::OptimizationFailed("non-finite initial objective".into()));
    }
    let mut trace = vec![f];
    let mut step = 1.0;
    for _ in 0..opts.max_iter {
        let mut accepted = None;
        while step > 1e-12 {
            let mut cand: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a + step * b).collect();
            project(&mut cand, opts);
            let moved: f64 = cand.iter().zip(&p).zip(&g).map(|((c, a), b)| (c - a) * b).sum();
            let m = model.with_free_params(&cand);
            if moved > 0.0 {
                if let Ok(fc) = m.log_marginal_likelihood(data) {
                    if fc.is_finite() && fc >= f + 1e-4 * moved {
                        accepted = Some((cand, m, fc));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let Some((cand, m, fc)) = accepted else { break };
        let change = fc - f;
        p = cand;
        model = m;
        f = fc;
        trace.push(f);
        step *= 2.0;
        if change < opts.tol {
            break;
        }
        g = model.lml_and_gradient(data)?.1;
    }
    Ok(StartRun { model, lml: f, trace })
}

/// A GP conditioned on training data.
#[derive(Debug, Clone)]
pub struct GpPredictor {
    model: GpModel,
    xs: Vec<f64>,
    chol: Option<Cholesky>,
    alpha: Vec<f64>,
}

impl GpPredictor {
    pub fn model(&self) -> &GpModel {
        &self.model
    }

    /// Predictive of a new observation (noise included).
    pub fn predict(&self, x_star: f64) -> Result<Normal> {
        let prior = self.model.kernel.eval(x_star, x_star);
        let Some(chol) = &self.chol else {
            return Normal::new(0.0, prior + self.model.noise_var);
        };
        let ks: Vec<f64> = self.xs.iter().map(|&x| self.model.kernel.eval(x_star, x)).collect();
        let mean = dot(&ks, &self.alpha);
        let v = chol.forward(&ks);
        let var = (prior - dot(&v, &v)).max(0.0) + self.model.noise_var;
        Normal::new(mean, var)
    }

    pub fn predict_mean(&self, x_star: f64) -> f64 {
        let ks: Vec<f64> = self.xs.iter().map(|&x| self.model.kernel.eval(x_star, x)).collect();
        dot(&ks, &self.alpha)
    }
}
