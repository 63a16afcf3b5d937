//! Integration over the unit sphere and the `H^p`, `H_s^p` norms.
//!
//! Every representable function is a polynomial, hence continuous up to the
//! boundary, so the supremum over dilations `f_r` in the norm definition is
//! reached at `r = 1` and all norms below are boundary integrals against the
//! normalized surface measure `sigma`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, Result, ToolkitError};
use crate::params::SpaceParams;
use crate::poly::{MultiIndex, PolyFn};

pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_REL_TOL: f64 = 0.01;
pub const MIN_MC_SAMPLES: usize = 1000;
/// Samples per random stream; results do not depend on the thread count.
pub const CHUNK: usize = 4096;

/// `sigma`-moment of the monomial: `int z^alpha conj(z)^alpha dsigma`.
///
/// Equals `(n-1)! alpha! / (n-1+|alpha|)!`, evaluated as a product of ratios
/// so large degrees do not overflow.
pub fn monomial_weight(alpha: &MultiIndex) -> f64 {
    let n = alpha.len() as u32;
    let mut num: Vec<u32> = alpha
        .exps()
        .iter()
        .flat_map(|&a| 1..=a)
        .collect();
    num.sort_unstable();
    let d = alpha.degree();
    num.iter()
        .zip(n..n + d)
        .map(|(&k, den)| f64::from(k) / f64::from(den))
        .product()
}

/// `int z^alpha conj(z)^beta dsigma`, zero unless `alpha = beta`.
pub fn monomial_moment(alpha: &MultiIndex, beta: &MultiIndex, n: usize) -> f64 {
    assert!(alpha.len() == n && beta.len() == n, "multi-index length must be n");
    if alpha == beta {
        monomial_weight(alpha)
    } else {
        0.0
    }
}

/// Weight of `z^alpha` in the `H_s^2` inner product: `(1+|alpha|)^{2s} w_alpha`.
pub fn hs2_weight(alpha: &MultiIndex, s: f64) -> f64 {
    (1.0 + f64::from(alpha.degree())).powf(2.0 * s) * monomial_weight(alpha)
}

/// `<f, g>_{H_s^2} = sum (1+|alpha|)^{2s} w_alpha c_alpha(f) conj(c_alpha(g))`.
pub fn hs2_inner(f: &PolyFn, g: &PolyFn, params: &SpaceParams) -> Complex64 {
    let s = params.s();
    f.terms()
        .filter_map(|(alpha, cf)| {
            let cg = g.coeff(alpha);
            (cg != Complex64::default()).then(|| cf * cg.conj() * hs2_weight(alpha, s))
        })
        .sum()
}

pub fn hs2_norm(f: &PolyFn, params: &SpaceParams) -> f64 {
    hs2_inner(f, f, params).re.max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadMode {
    /// Exact moments when `p` is an even integer, Monte Carlo otherwise.
    #[default]
    Auto,
    ExactMoments,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub mode: QuadMode,
    pub samples: usize,
    pub seed: u64,
    /// Largest accepted relative standard error of a Monte Carlo norm.
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            mode: QuadMode::Auto,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl QuadratureSpec {
    pub fn exact() -> Self {
        Self {
            mode: QuadMode::ExactMoments,
            ..Self::default()
        }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self {
            mode: QuadMode::MonteCarlo,
            samples,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode != QuadMode::ExactMoments && self.samples < MIN_MC_SAMPLES {
            return Err(ToolkitError::invalid(format!(
                "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {}",
                self.samples
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(ToolkitError::invalid("rel_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormFlavor {
    /// `||(I+R)^s f||_{H^p}`.
    FractionalShift,
    /// `max_{0<=j<=s} ||R^j f||_{H^p}`, integer `s` only.
    MaxDerivative,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub stderr: f64,
    pub mode: QuadMode,
    pub per_j: Vec<f64>,
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Uniform point on the sphere `S^{2n-1}`: normalized vector of `2n` Gaussians.
pub fn sample_sphere<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let r = crate::params::norm_sqr(&v).sqrt();
        if r > 0.0 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Uniform point of the open ball of `C^n` (radius distributed as `U^{1/2n}`).
pub fn sample_ball<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    let dir = sample_sphere(rng, n);
    let u: f64 = rng.gen();
    let r = u.powf(1.0 / (2 * n) as f64) * (1.0 - 1e-12);
    dir.into_iter().map(|c| c * r).collect()
}

/// `count` seeded points of the ball.
pub fn ball_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sample_ball(&mut rng, n)).collect()
}

/// Seeded sphere sample, generated chunk by chunk with one stream per chunk.
pub fn sphere_points(n: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let chunks = count.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| sample_sphere(&mut rng, n)).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// Sample mean of `f` over `sigma` and its standard error.
pub fn mc_mean<F>(n: usize, count: usize, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(count - c * CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..len {
                let v = f(&sample_sphere(&mut rng, n));
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    mean_and_stderr(sum, sum_sq, count)
}

fn mean_and_stderr(sum: f64, sum_sq: f64, count: usize) -> (f64, f64) {
    let m = count as f64;
    let mean = sum / m;
    let var = if count > 1 {
        ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, (var / m).sqrt())
}

/// `(mean |v|^p)^{1/p}` over precomputed values, with a delta-method stderr.
pub fn lp_from_values(values: &[Complex64], p: f64) -> (f64, f64) {
    let (sum, sum_sq) = values.iter().fold((0.0, 0.0), |acc, v| {
        let x = v.norm().powf(p);
        (acc.0 + x, acc.1 + x * x)
    });
    let (mean, se) = mean_and_stderr(sum, sum_sq, values.len());
    if mean <= 0.0 {
        return (0.0, 0.0);
    }
    let value = mean.powf(1.0 / p);
    (value, value * se / (p * mean))
}

fn even_exponent(p: f64) -> Option<u32> {
    let k = p.round();
    ((p - k).abs() < 1e-12 && k >= 2.0 && (k as u32) % 2 == 0).then_some(k as u32)
}

/// `||f||_{H^p}` as a boundary integral.
pub fn hp_norm(f: &PolyFn, p: f64, quad: &QuadratureSpec) -> Result<NormReport> {
    quad.validate()?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(ToolkitError::invalid(format!("exponent p must lie in [1, inf), got {p}")));
    }
    let even = even_exponent(p);
    let exact = match quad.mode {
        QuadMode::Auto => even.is_some(),
        QuadMode::ExactMoments => {
            if even.is_none() {
                return Err(ToolkitError::invalid(format!(
                    "exact moments need an even integer exponent, got p = {p}"
                )));
            }
            true
        }
        QuadMode::MonteCarlo => false,
    };
    if exact {
        let half = even.unwrap_or(2) / 2;
        let g = if half == 1 {
            f.clone()
        } else {
            f.with_cap(f.degree() * half)?.pow(half)?
        };
        let l2_sq: f64 = g.terms().map(|(a, c)| c.norm_sqr() * monomial_weight(a)).sum();
        return Ok(NormReport {
            value: l2_sq.powf(1.0 / (2.0 * f64::from(half))),
            stderr: 0.0,
            mode: QuadMode::ExactMoments,
            per_j: Vec::new(),
        });
    }
    let (mean, se) = mc_mean(f.n(), quad.samples, quad.seed, |z| f.eval(z).norm().powf(p));
    if mean <= 0.0 {
        return Ok(NormReport {
            value: 0.0,
            stderr: 0.0,
            mode: QuadMode::MonteCarlo,
            per_j: Vec::new(),
        });
    }
    let rel = se / (p * mean);
    if rel > quad.rel_tol {
        return Err(ToolkitError::new(
            ErrorKind::QuadratureUnderResolved,
            format!(
                "relative standard error {rel:.3e} exceeds {:.3e} with {} samples",
                quad.rel_tol, quad.samples
            ),
        ));
    }
    let value = mean.powf(1.0 / p);
    Ok(NormReport {
        value,
        stderr: value * rel,
        mode: QuadMode::MonteCarlo,
        per_j: Vec::new(),
    })
}

/// `||f||_{H_s^p}` in one of the two equivalent flavors.
pub fn hsp_norm(
    f: &PolyFn,
    params: &SpaceParams,
    quad: &QuadratureSpec,
    flavor: NormFlavor,
) -> Result<NormReport> {
    match flavor {
        NormFlavor::FractionalShift => hp_norm(&f.bracket_shift(params.s()), params.p(), quad),
        NormFlavor::MaxDerivative => {
            let top = params.integer_s().ok_or_else(|| {
                ToolkitError::invalid(format!(
                    "the max-derivative norm needs an integer s, got {}",
                    params.s()
                ))
            })?;
            let mut best: Option<NormReport> = None;
            let mut per_j = Vec::new();
            for j in 0..=top {
                let r = hp_norm(&f.radial_derivative(j), params.p(), quad)?;
                per_j.push(r.value);
                if best.as_ref().map_or(true, |b| r.value > b.value) {
                    best = Some(r);
                }
            }
            let best = best.expect("at least j = 0 is evaluated");
            Ok(NormReport { per_j, ..best })
        }
    }
}

/// `||f g||_{H_s^r} / (||f||_{H_s^p} ||g||_{H_s^q})` with `1/r = 1/p + 1/q`.
///
/// The product is formed without truncation.
pub fn young_ratio(
    f: &PolyFn,
    g: &PolyFn,
    s: f64,
    p: f64,
    q: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let r = 1.0 / (1.0 / p + 1.0 / q);
    let cap = f.degree() + g.degree();
    let fg = f.with_cap(cap.max(f.cap()))?.mul(&g.with_cap(cap.max(g.cap()))?)?;
    let num = hp_norm(&fg.bracket_shift(s), r, quad)?.value;
    let den = hp_norm(&f.bracket_shift(s), p, quad)?.value * hp_norm(&g.bracket_shift(s), q, quad)?.value;
    if den == 0.0 {
        return Err(ToolkitError::invalid("Young ratio needs non-zero factors"));
    }
    Ok(num / den)
}
