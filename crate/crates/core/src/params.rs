//! Space parameters, points of the ball and finite point sequences.
//!
//! `SpaceParams` carries the triple `(n, s, p)` of a Hardy-Sobolev space
//! `H_s^p` of the unit ball of `C^n`. The kernel-norm exponents used all over
//! the crate come from [`SpaceParams::kernel_exp`]:
//! `kernel_exp(q) = s - n/q'`, with `q'` the conjugate exponent of `q`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, Result, ToolkitError};

/// Tolerance used to detect the excluded case `s = n/2`.
const LOG_CASE_TOL: f64 = 1e-12;

/// Conjugate exponent of `q`, as a value that may be infinite.
///
/// `q = 1` yields [`DualExponent::Infinite`]; callers that need a finite
/// conjugate must reject it through [`DualExponent::finite`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum DualExponent {
    Finite(f64),
    #[serde(serialize_with = "serialize_inf")]
    Infinite,
}

fn serialize_inf<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("inf")
}

impl DualExponent {
    pub fn of(q: f64) -> Self {
        if q == 1.0 {
            DualExponent::Infinite
        } else if q.is_infinite() {
            DualExponent::Finite(1.0)
        } else {
            DualExponent::Finite(q / (q - 1.0))
        }
    }

    /// Value with `f64::INFINITY` standing for the infinite marker.
    pub fn value(self) -> f64 {
        match self {
            DualExponent::Finite(v) => v,
            DualExponent::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Result<f64> {
        match self {
            DualExponent::Finite(v) => Ok(v),
            DualExponent::Infinite => Err(ToolkitError::invalid(
                "conjugate exponent is infinite (p = 1); this operation needs a finite p'",
            )),
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, DualExponent::Infinite)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    n: usize,
    s: f64,
    p: f64,
    #[serde(default)]
    override_sp_bound: bool,
}

/// The triple `(n, s, p)`; immutable once validated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SpaceParams {
    n: usize,
    s: f64,
    p: f64,
    override_sp_bound: bool,
}

impl TryFrom<RawParams> for SpaceParams {
    type Error = ToolkitError;

    fn try_from(raw: RawParams) -> Result<Self> {
        SpaceParams::with_override(raw.n, raw.s, raw.p, raw.override_sp_bound)
    }
}

impl SpaceParams {
    /// Validated parameters with the `s <= n/p` bound enforced.
    pub fn new(n: usize, s: f64, p: f64) -> Result<Self> {
        Self::with_override(n, s, p, false)
    }

    /// Same as [`SpaceParams::new`] but `override_sp_bound = true` lets
    /// `s > n/p` through; such parameters carry a warning.
    pub fn with_override(n: usize, s: f64, p: f64, override_sp_bound: bool) -> Result<Self> {
        if n == 0 {
            return Err(ToolkitError::invalid("dimension n must be at least 1"));
        }
        if !s.is_finite() || s < 0.0 {
            return Err(ToolkitError::invalid(format!(
                "smoothness s must be finite and non-negative, got {s}"
            )));
        }
        if !p.is_finite() || p < 1.0 {
            return Err(ToolkitError::invalid(format!(
                "exponent p must lie in [1, inf), got {p}"
            )));
        }
        if (s - n as f64 / 2.0).abs() < LOG_CASE_TOL {
            return Err(ToolkitError::new(
                ErrorKind::LogKernelCase,
                format!("s = n/2 = {s}: the reproducing kernel is logarithmic there"),
            ));
        }
        if s > n as f64 / p + LOG_CASE_TOL && !override_sp_bound {
            return Err(ToolkitError::invalid(format!(
                "s = {s} exceeds n/p = {}; set override_sp_bound to explore this range",
                n as f64 / p
            )));
        }
        Ok(Self {
            n,
            s,
            p,
            override_sp_bound,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn override_sp_bound(&self) -> bool {
        self.override_sp_bound
    }

    pub fn p_prime(&self) -> DualExponent {
        DualExponent::of(self.p)
    }

    /// `rho = n - 2s`, the exponent of the model kernel.
    pub fn rho(&self) -> f64 {
        self.n as f64 - 2.0 * self.s
    }

    /// `s - n/q'` for an arbitrary exponent `q >= 1` (`q = inf` allowed).
    pub fn kernel_exp(&self, q: f64) -> f64 {
        self.s - self.n as f64 / DualExponent::of(q).value()
    }

    /// Same space with a different smoothness, keeping `n`, `p` and the
    /// override flag.
    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::with_override(self.n, s, self.p, self.override_sp_bound)
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::with_override(self.n, self.s, p, self.override_sp_bound)
    }

    /// Whether `s` is a non-negative integer (needed by the max-derivative norm).
    pub fn integer_s(&self) -> Option<u32> {
        let r = self.s.round();
        ((self.s - r).abs() < 1e-12).then_some(r as u32)
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.s > self.n as f64 / self.p + LOG_CASE_TOL {
            out.push(format!(
                "s = {} exceeds n/p = {} (allowed by override_sp_bound)",
                self.s,
                self.n as f64 / self.p
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedExponents {
    pub p_prime: DualExponent,
    pub rho: f64,
    /// `s - n/p'`: exponent of `(1-|a|^2)` in `||k_a||_{H_s^p}`.
    pub kernel_norm_exp_p: f64,
    /// `s - n/p`: exponent of `(1-|a|^2)` in `||k_a||_{H_s^{p'}}`.
    pub kernel_norm_exp_p_prime: f64,
}

pub fn derive_exponents(params: &SpaceParams) -> DerivedExponents {
    let p_prime = params.p_prime();
    DerivedExponents {
        p_prime,
        rho: params.rho(),
        kernel_norm_exp_p: params.kernel_exp(params.p),
        kernel_norm_exp_p_prime: params.kernel_exp(p_prime.value()),
    }
}

/// Exponent `q` of the boundary Sobolev embedding, `1/q = 1/p - s/n`.
pub fn sobolev_embedding_q(params: &SpaceParams) -> Result<f64> {
    let n = params.n as f64;
    if params.s * params.p >= n {
        return Err(ToolkitError::invalid(format!(
            "s*p = {} >= n = {n}: the embedding exponent is not finite",
            params.s * params.p
        )));
    }
    Ok(1.0 / (1.0 / params.p - params.s / n))
}

/// Hermitian product `<z, w> = sum z_i conj(w_i)`.
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// A point of the open unit ball of `C^n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Point {
    coords: Vec<Complex64>,
}

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(ToolkitError::invalid("a point needs at least one coordinate"));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(ToolkitError::invalid("point has a non-finite coordinate"));
        }
        let r2 = norm_sqr(&coords);
        if r2 >= 1.0 {
            return Err(ToolkitError::outside_ball(format!(
                "|z| = {} is not < 1",
                r2.sqrt()
            )));
        }
        Ok(Self { coords })
    }

    /// Point from interleaved `(re, im)` pairs.
    pub fn from_re_im(flat: &[f64]) -> Result<Self> {
        if flat.len() % 2 != 0 {
            return Err(ToolkitError::invalid(
                "point coordinates must come as (re, im) pairs",
            ));
        }
        Self::new(
            flat.chunks(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    pub fn origin(n: usize) -> Self {
        Self {
            coords: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.coords)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `1 - |a|^2`.
    pub fn defect(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    pub fn to_re_im(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

impl AsRef<[Complex64]> for Point {
    fn as_ref(&self) -> &[Complex64] {
        &self.coords
    }
}

/// Finite sequence of distinct points of the ball, tied to a space.
#[derive(Debug, Clone, Serialize)]
pub struct PointSeq {
    params: SpaceParams,
    points: Vec<Point>,
    labels: Option<Vec<String>>,
}

impl PointSeq {
    pub fn new(params: SpaceParams, points: Vec<Point>) -> Result<Self> {
        for (i, a) in points.iter().enumerate() {
            if a.dim() != params.n() {
                return Err(ToolkitError::invalid(format!(
                    "point {i} has dimension {}, expected n = {}",
                    a.dim(),
                    params.n()
                )));
            }
            for (j, b) in points.iter().enumerate().take(i) {
                if a == b {
                    return Err(ToolkitError::invalid(format!(
                        "points {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(Self {
            params,
            points,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(ToolkitError::invalid("one label per point is required"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn params(&self) -> &SpaceParams {
        &self.params
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => format!("a{}", i + 1),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points viewed in another space of the same dimension.
    pub fn reparam(&self, params: SpaceParams) -> Result<Self> {
        if params.n() != self.params.n() {
            return Err(ToolkitError::invalid("dimension mismatch when re-parametrizing"));
        }
        Ok(Self {
            params,
            points: self.points.clone(),
            labels: self.labels.clone(),
        })
    }

    /// `k` radial points `1 - 2^{-k}` along the first axis, `k = 1..=count`.
    pub fn dyadic(params: SpaceParams, count: usize) -> Result<Self> {
        let pts = (1..=count)
            .map(|k| {
                let mut c = vec![Complex64::new(0.0, 0.0); params.n()];
                c[0] = Complex64::new(1.0 - 0.5f64.powi(k as i32), 0.0);
                Point::new(c)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(params, pts)
    }
}
