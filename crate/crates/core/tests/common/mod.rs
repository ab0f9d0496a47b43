//! Reference computations written independently of the library's linear
//! algebra, shared by the integration and acceptance tests.

#![allow(dead_code)]

use bayes_eval::Rng;

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn inverse(&self) -> Sym2 {
        let d = self.det();
        Sym2 {
            a: self.c / d,
            b: -self.b / d,
            c: self.a / d,
        }
    }

    pub fn quad(&self, x: [f64; 2]) -> f64 {
        self.a * x[0] * x[0] + 2.0 * self.b * x[0] * x[1] + self.c * x[1] * x[1]
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.b, self.c]]
    }

    /// Lower Cholesky factor as `(l11, l21, l22)`.
    pub fn cholesky(&self) -> (f64, f64, f64) {
        let l11 = self.a.sqrt();
        let l21 = self.b / l11;
        (l11, l21, (self.c - l21 * l21).sqrt())
    }
}

/// Random SPD matrix: a rotation of eigenvalues drawn log-uniformly from
/// `[lo, hi]`.
pub fn random_spd(rng: &mut Rng, lo: f64, hi: f64) -> Sym2 {
    let eig = |rng: &mut Rng| (lo.ln() + (hi.ln() - lo.ln()) * rng.uniform()).exp();
    let (e1, e2) = (eig(rng), eig(rng));
    let t = std::f64::consts::PI * rng.uniform();
    let (s, c) = t.sin_cos();
    Sym2 {
        a: e1 * c * c + e2 * s * s,
        b: (e1 - e2) * c * s,
        c: e1 * s * s + e2 * c * c,
    }
}

/// Minimizer of `f` on `[lo, hi]` by golden-section search, where
/// `diff(u, v)` returns `f(u) - f(v)`. Passing a difference rather than
/// values lets callers cancel large common terms analytically.
pub fn golden_section_by_diff(diff: impl Fn(f64, f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    while hi - lo > tol {
        if diff(c, d) < 0.0 {
            hi = d;
            d = c;
            c = hi - g * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + g * (hi - lo);
        }
    }
    0.5 * (lo + hi)
}

/// `KL(N(m, u I) || N(m, S)) - KL(N(m, v I) || N(m, S))` given `t = tr(S^-1)`.
pub fn isotropic_kl_diff(u: f64, v: f64, t: f64) -> f64 {
    0.5 * (u - v) * t - ((u - v) / v).ln_1p()
}

/// Gaussian log density at `x` with mean `m` and covariance `s`.
pub fn log_normal2(x: [f64; 2], m: [f64; 2], s: &Sym2) -> f64 {
    let r = [x[0] - m[0], x[1] - m[1]];
    -(2.0 * std::f64::consts::PI).ln() - 0.5 * s.det().ln() - 0.5 * s.inverse().quad(r)
}

/// Monte Carlo estimate of `KL(N(ma, sa) || N(mb, sb))` and its standard
/// error.
pub fn mc_kl(ma: [f64; 2], sa: &Sym2, mb: [f64; 2], sb: &Sym2, draws: usize, rng: &mut Rng) -> (f64, f64) {
    let (l11, l21, l22) = sa.cholesky();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..draws {
        let (z1, z2) = (rng.standard_normal(), rng.standard_normal());
        let x = [ma[0] + l11 * z1, ma[1] + l21 * z1 + l22 * z2];
        let v = log_normal2(x, ma, sa) - log_normal2(x, mb, sb);
        sum += v;
        sum_sq += v * v;
    }
    let n = draws as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Posterior moments of `theta` in `y = theta_1 x + theta_2 + N(0, noise)`
/// under a `N(m0, s0)` prior, by brute-force integration on a `k x k` grid
/// over `[-half, half]^2`.
pub fn grid_posterior(
    pairs: &[(f64, f64)],
    m0: [f64; 2],
    s0: &Sym2,
    noise: f64,
    half: f64,
    k: usize,
) -> ([f64; 2], Sym2) {
    let h = 2.0 * half / (k - 1) as f64;
    let node = |i: usize| -half + h * i as f64;
    let mut logp = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let th = [node(i), node(j)];
            let lik: f64 = pairs
                .iter()
                .map(|&(x, y)| {
                    let r = y - th[0] * x - th[1];
                    -0.5 * r * r / noise
                })
                .sum();
            logp.push(log_normal2(th, m0, s0) + lik);
        }
    }
    let top = logp.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let mut mean = [0.0; 2];
    for i in 0..k {
        for j in 0..k {
            let p = w[i * k + j] / z;
            mean[0] += p * node(i);
            mean[1] += p * node(j);
        }
    }
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            let p = w[i * k + j] / z;
            let (d0, d1) = (node(i) - mean[0], node(j) - mean[1]);
            a += p * d0 * d0;
            b += p * d0 * d1;
            c += p * d1 * d1;
        }
    }
    (mean, Sym2 { a, b, c })
}
