//! Constructive interpolation operators built on a Drury system: the bounded
//! extension operator, gluing of two interpolating sequences, weighted
//! interpolation, dual-boundedness diagnostics and Rademacher type experiments.
//!
//! Point evaluations of products are only meaningful without truncation, so
//! every product here is formed under a cap large enough to hold it.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::drury::DrurySystem;
use crate::error::{Result, ToolkitError};
use crate::kernels::{kernel, kernel_norm_proxy, KernelConvention};
use crate::multipliers::{min_norm_interpolant, two_point_witness};
use crate::norms::{hs2_inner, hsp_norm, lp_from_values, sphere_points, NormFlavor, QuadratureSpec};
use crate::params::{Point, PointSeq, SpaceParams};
use crate::poly::PolyFn;

/// Default degree of the model kernels used by the operators below.
pub const DEFAULT_KERNEL_CAP: u32 = 40;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `p`-norm of a complex vector.
pub fn lp_seq(v: &[Complex64], p: f64) -> f64 {
    v.iter().map(|x| x.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Product without truncation.
fn mul_exact(f: &PolyFn, g: &PolyFn) -> Result<PolyFn> {
    let cap = (f.degree() + g.degree()).max(f.cap()).max(g.cap());
    f.with_cap(cap)?.mul(&g.with_cap(cap)?)
}

fn pow_exact(f: &PolyFn, l: u32) -> Result<PolyFn> {
    let cap = (f.degree() * l).max(f.cap());
    f.with_cap(cap)?.pow(l)
}

fn sum_exact(fs: &[PolyFn], n: usize) -> PolyFn {
    let cap = fs.iter().map(PolyFn::cap).max().unwrap_or(0);
    fs.iter().fold(PolyFn::zero(n, cap), |acc, f| &acc + f)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionReport {
    pub f: PolyFn,
    pub targets: Vec<Complex64>,
    pub value_residuals: Vec<f64>,
    /// `||f||_{H_s^p} / ||lambda||_{l^p}` (0 when `lambda = 0`).
    pub norm_ratio: f64,
    pub norm_stderr: f64,
    pub l: u32,
}

/// Smallest integer `l > s`.
pub fn default_power(s: f64) -> u32 {
    s.floor() as u32 + 1
}

/// `f = sum_a lambda_a gamma_a^l e_a` with `e_a = k_a / ||k_a||_{H_s^p}` (model
/// kernel, proxy norm); `f(a) = lambda_a ||k_a||_{H_s^{p'}}`.
pub fn extend(
    sys: &DrurySystem,
    lambda: &[Complex64],
    l: u32,
    kernel_cap: u32,
    quad: &QuadratureSpec,
) -> Result<ExtensionReport> {
    let seq = sys.seq();
    let params = *seq.params();
    if lambda.len() != seq.len() {
        return Err(ToolkitError::invalid("one lambda per point is required"));
    }
    if f64::from(l) <= params.s() {
        return Err(ToolkitError::invalid(format!("power l = {l} must exceed s = {}", params.s())));
    }
    let mut terms = Vec::new();
    let mut targets = Vec::new();
    for ((a, g), lam) in seq.points().iter().zip(sys.gamma()).zip(lambda) {
        let k = kernel(a, &params, KernelConvention::Model, kernel_cap)?.poly;
        let e = k.scale_re(1.0 / kernel_norm_proxy(a, &params, params.p()));
        terms.push(mul_exact(&pow_exact(g, l)?, &e)?.scale(*lam));
        targets.push(lam * kernel_norm_proxy(a, &params, params.p_prime().value()));
    }
    let f = sum_exact(&terms, params.n());
    let value_residuals = seq
        .points()
        .iter()
        .zip(&targets)
        .map(|(a, t)| (f.eval(a.coords()) - t).norm())
        .collect();
    let lam_norm = lp_seq(lambda, params.p());
    let (norm_ratio, norm_stderr) = if lam_norm == 0.0 {
        (0.0, 0.0)
    } else {
        let r = hsp_norm(&f, &params, quad, NormFlavor::FractionalShift)?;
        (r.value / lam_norm, r.stderr / lam_norm)
    };
    Ok(ExtensionReport {
        f,
        targets,
        value_residuals,
        norm_ratio,
        norm_stderr,
        l,
    })
}

/// Witnesses `m_{a,b}` with `m(a) = 1`, `m(b) = 0` for `a` in `s1`, `b` in `s2`,
/// realized as minimal-norm exact-kernel interpolants.
pub fn separation_witnesses(
    s1: &PointSeq,
    s2: &PointSeq,
    cap: u32,
) -> Result<BTreeMap<(usize, usize), PolyFn>> {
    let params = s1.params();
    let mut out = BTreeMap::new();
    for (i, a) in s1.points().iter().enumerate() {
        for (j, b) in s2.points().iter().enumerate() {
            out.insert((i, j), two_point_witness(a, b, params, cap)?.f);
        }
    }
    Ok(out)
}

/// `m = sum_{b in S2} Gamma_b^l (1 - m_b)` with `m_b = sum_{a in S1} gamma_a^l m_{a,b}`;
/// `m` vanishes on `S1` and equals 1 on `S2`.
pub fn glue_union(
    sys1: &DrurySystem,
    sys2: &DrurySystem,
    witnesses: &BTreeMap<(usize, usize), PolyFn>,
    l: u32,
) -> Result<PolyFn> {
    let n = sys1.seq().params().n();
    let g1 = sys1.gamma().iter().map(|g| pow_exact(g, l)).collect::<Result<Vec<_>>>()?;
    let g2 = sys2.gamma().iter().map(|g| pow_exact(g, l)).collect::<Result<Vec<_>>>()?;
    let mut pieces = Vec::new();
    for (j, gb) in g2.iter().enumerate() {
        let mut parts = Vec::new();
        for (i, ga) in g1.iter().enumerate() {
            let w = witnesses.get(&(i, j)).ok_or_else(|| {
                ToolkitError::invalid(format!("missing witness for the pair ({i}, {j})"))
            })?;
            parts.push(mul_exact(ga, w)?);
        }
        let m_b = sum_exact(&parts, n);
        let one_minus = &PolyFn::constant(n, m_b.cap(), one()) - &m_b;
        pieces.push(mul_exact(gb, &one_minus)?);
    }
    Ok(sum_exact(&pieces, n))
}

/// `M = (1 - m) m1 + m m2`.
pub fn assemble_glued(m: &PolyFn, m1: &PolyFn, m2: &PolyFn) -> Result<PolyFn> {
    let one_minus = &PolyFn::constant(m.n(), m.cap(), one()) - m;
    let a = mul_exact(&one_minus, m1)?;
    let b = mul_exact(m, m2)?;
    Ok(sum_exact(&[a, b], m.n()))
}

#[derive(Debug, Clone, Serialize)]
pub struct GlueReport {
    pub m: PolyFn,
    pub glued: PolyFn,
    /// `max |m(a)|` over `S1` and `max |m(b) - 1|` over `S2`.
    pub m_residual: f64,
    /// `max |M(a) - lambda1_a|`, `|M(b) - lambda2_b|`.
    pub value_residual: f64,
    pub witness_residual: f64,
}

/// Full gluing pipeline: Drury systems, witnesses, `m`, interpolants `m1`, `m2`
/// of the two value vectors, and the glued `M`.
pub fn glue_sequences(
    s1: &PointSeq,
    s2: &PointSeq,
    lambda1: &[Complex64],
    lambda2: &[Complex64],
    l: u32,
    cap: u32,
) -> Result<GlueReport> {
    if lambda1.len() != s1.len() || lambda2.len() != s2.len() {
        return Err(ToolkitError::invalid("one value per point is required"));
    }
    let n = s1.params().n();
    let m1 = min_norm_interpolant(s1, lambda1, KernelConvention::Exact, cap)?.f;
    if s2.is_empty() {
        let m = PolyFn::zero(n, cap);
        let glued = assemble_glued(&m, &m1, &PolyFn::zero(n, cap))?;
        let value_residual = max_residual(&glued, s1.points(), lambda1);
        return Ok(GlueReport {
            m,
            glued,
            m_residual: 0.0,
            value_residual,
            witness_residual: 0.0,
        });
    }
    let m2 = min_norm_interpolant(s2, lambda2, KernelConvention::Exact, cap)?.f;
    let sys1 = DrurySystem::build(s1, cap)?;
    let sys2 = DrurySystem::build(s2, cap)?;
    let witnesses = separation_witnesses(s1, s2, cap)?;
    let mut witness_residual: f64 = 0.0;
    for ((i, j), w) in &witnesses {
        witness_residual = witness_residual
            .max((w.eval(s1.points()[*i].coords()) - 1.0).norm())
            .max(w.eval(s2.points()[*j].coords()).norm());
    }
    let m = glue_union(&sys1, &sys2, &witnesses, l)?;
    let zeros = vec![Complex64::default(); s1.len()];
    let ones = vec![one(); s2.len()];
    let m_residual = max_residual(&m, s1.points(), &zeros).max(max_residual(&m, s2.points(), &ones));
    let glued = assemble_glued(&m, &m1, &m2)?;
    let value_residual =
        max_residual(&glued, s1.points(), lambda1).max(max_residual(&glued, s2.points(), lambda2));
    Ok(GlueReport {
        m,
        glued,
        m_residual,
        value_residual,
        witness_residual,
    })
}

fn max_residual(f: &PolyFn, pts: &[Point], values: &[Complex64]) -> f64 {
    pts.iter()
        .zip(values)
        .map(|(a, v)| (f.eval(a.coords()) - v).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct DualBoundedReport {
    pub max_dual_norm: f64,
    pub per_point: Vec<f64>,
    /// `||k_a||_{H_s^{p'}}` proxies, the single-point reference values.
    pub proxies: Vec<f64>,
    pub value_residual: f64,
    #[serde(skip)]
    pub functions: Vec<PolyFn>,
}

/// Dual system `rho_a(b) = delta_{ab} ||k_a||_{H_s^{p'}}` by minimal-norm
/// interpolation, and `max_a ||rho_a||_{H_s^p}`.
pub fn dual_bounded_test(seq: &PointSeq, cap: u32, quad: &QuadratureSpec) -> Result<DualBoundedReport> {
    let params = *seq.params();
    let n_pts = seq.len();
    let proxies: Vec<f64> = seq
        .points()
        .iter()
        .map(|a| kernel_norm_proxy(a, &params, params.p_prime().value()))
        .collect();
    let mut functions = Vec::with_capacity(n_pts);
    let mut per_point = Vec::with_capacity(n_pts);
    let mut value_residual: f64 = 0.0;
    for (i, proxy) in proxies.iter().enumerate() {
        let values: Vec<Complex64> = (0..n_pts)
            .map(|j| if i == j { Complex64::new(*proxy, 0.0) } else { Complex64::default() })
            .collect();
        let f = if n_pts == 1 {
            PolyFn::constant(params.n(), cap, values[0])
        } else {
            min_norm_interpolant(seq, &values, KernelConvention::Exact, cap)?.f
        };
        value_residual = value_residual.max(max_residual(&f, seq.points(), &values));
        per_point.push(hsp_norm(&f, &params, quad, NormFlavor::FractionalShift)?.value);
        functions.push(f);
    }
    Ok(DualBoundedReport {
        max_dual_norm: per_point.iter().copied().fold(0.0, f64::max),
        per_point,
        proxies,
        value_residual,
        functions,
    })
}

/// Splitting `lambda_a = mu_a nu_a` with `mu = lambda/|lambda|^alpha`,
/// `nu = |lambda|^alpha`, `alpha = r/q`.
#[derive(Debug, Clone, Serialize)]
pub struct Splitting {
    pub mu_p_p: f64,
    pub nu_q_q: f64,
    pub lambda_r_r: f64,
    pub residual: f64,
    pub mu_norm_p: f64,
    pub nu_norm_q: f64,
}

pub fn split_sequence(lambda: &[Complex64], p: f64, q: f64, r: f64) -> Splitting {
    let alpha = r / q;
    let mu: Vec<Complex64> = lambda
        .iter()
        .map(|l| if l.norm() == 0.0 { *l } else { l / l.norm().powf(alpha) })
        .collect();
    let nu: Vec<f64> = lambda.iter().map(|l| l.norm().powf(alpha)).collect();
    let mu_p_p: f64 = mu.iter().map(|m| m.norm().powf(p)).sum();
    let nu_q_q: f64 = nu.iter().map(|v| v.powf(q)).sum();
    let lambda_r_r: f64 = lambda.iter().map(|l| l.norm().powf(r)).sum();
    let scale = lambda_r_r.max(1.0);
    Splitting {
        mu_p_p,
        nu_q_q,
        lambda_r_r,
        residual: ((mu_p_p - lambda_r_r).abs().max((nu_q_q - lambda_r_r).abs())) / scale,
        mu_norm_p: mu_p_p.powf(1.0 / p),
        nu_norm_q: nu_q_q.powf(1.0 / q),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedReport {
    pub h: PolyFn,
    pub r: f64,
    pub targets: Vec<Complex64>,
    pub value_residuals: Vec<f64>,
    /// `(1-|a|^2)^s ||k_a||_q / (||k_a||_{p'} ||k_a||_r)`, identically 1.
    pub gamma: Vec<f64>,
    pub gamma_residual: f64,
    pub splitting: Splitting,
    pub h_norm: f64,
    /// `||h||_{H_s^r} / (||nu||_q ||mu||_p)`.
    pub bound_ratio: f64,
}

/// `h = sum_a lambda_a rho_a (1-|a|^2)^s k_a / (||k_a||_{p'} ||k_a||_r)` with
/// `1/r = 1/p + 1/q`; `h(a) = lambda_a (1-|a|^2)^s ||k_a||_{r'}`.
pub fn weighted_interp(
    seq: &PointSeq,
    dual: &[PolyFn],
    lambda: &[Complex64],
    q: f64,
    kernel_cap: u32,
    quad: &QuadratureSpec,
) -> Result<WeightedReport> {
    let params = *seq.params();
    let p = params.p();
    if !(q >= 1.0) {
        return Err(ToolkitError::invalid(format!("exponent q must be at least 1, got {q}")));
    }
    let r = 1.0 / (1.0 / p + 1.0 / q);
    if r < 1.0 {
        return Err(ToolkitError::invalid(format!(
            "1/r = 1/p + 1/q gives r = {r} < 1"
        )));
    }
    if dual.len() != seq.len() || lambda.len() != seq.len() {
        return Err(ToolkitError::invalid("one dual function and one lambda per point are required"));
    }
    let p_prime = params.p_prime().value();
    let r_prime = crate::params::DualExponent::of(r).value();
    let mut terms = Vec::new();
    let mut targets = Vec::new();
    let mut gamma = Vec::new();
    for ((a, rho_a), lam) in seq.points().iter().zip(dual).zip(lambda) {
        let w = a.defect().powf(params.s());
        let kp = kernel_norm_proxy(a, &params, p_prime);
        let kr = kernel_norm_proxy(a, &params, r);
        let kq = kernel_norm_proxy(a, &params, q);
        let k = kernel(a, &params, KernelConvention::Model, kernel_cap)?.poly;
        terms.push(mul_exact(rho_a, &k)?.scale(lam * (w / (kp * kr))));
        targets.push(lam * w * kernel_norm_proxy(a, &params, r_prime));
        gamma.push(w * kq / (kp * kr));
    }
    let h = sum_exact(&terms, params.n());
    let value_residuals = seq
        .points()
        .iter()
        .zip(&targets)
        .map(|(a, t)| (h.eval(a.coords()) - t).norm())
        .collect();
    let gamma_residual = gamma.iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
    let splitting = split_sequence(lambda, p, q, r);
    let r_params = SpaceParams::with_override(params.n(), params.s(), r, true)?;
    let h_norm = hsp_norm(&h, &r_params, quad, NormFlavor::FractionalShift)?.value;
    let den = splitting.mu_norm_p * splitting.nu_norm_q;
    Ok(WeightedReport {
        h,
        r,
        targets,
        value_residuals,
        gamma,
        gamma_residual,
        splitting,
        h_norm,
        bound_ratio: if den > 0.0 { h_norm / den } else { 0.0 },
    })
}

/// Rademacher signs for one draw, a deterministic function of `(seed, draw)`
/// and the label position.
#[derive(Debug, Clone, Serialize)]
pub struct RademacherDraw {
    pub seed: u64,
    pub draw: u64,
    pub signs: Vec<i8>,
}

impl RademacherDraw {
    pub fn new(seed: u64, draw: u64, len: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw);
        let signs = (0..len).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        Self { seed, draw, signs }
    }

    /// Pattern number `k` of an exhaustive enumeration (bit `j` set means `+1`).
    pub fn enumerated(k: u64, len: usize) -> Self {
        let signs = (0..len).map(|j| if (k >> j) & 1 == 1 { 1 } else { -1 }).collect();
        Self { seed: 0, draw: k, signs }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectationMode {
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityCheck {
    /// `max ||E F||^p / E ||F||^p` over the checks; at most 1.
    pub norm_ratio: f64,
    /// Largest `|E F(z)|^p - E |F(z)|^p` over quadrature points.
    pub max_pointwise_excess: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TypeReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub mode: ExpectationMode,
    pub patterns: usize,
    pub convexity: ConvexityCheck,
}

/// Norms of linear combinations of a fixed family, computed consistently.
enum CombinationNorm {
    /// `p = 2`: exact, through the Gram matrix of `(I+R)^s f_j` in `H^2`.
    Gram(Vec<Vec<Complex64>>),
    /// Values of `(I+R)^s f_j` at shared sphere samples.
    Sampled(Vec<Vec<Complex64>>),
}

impl CombinationNorm {
    fn new(family: &[PolyFn], params: &SpaceParams, quad: &QuadratureSpec) -> Self {
        if params.p() == 2.0 {
            let gram = family
                .iter()
                .map(|f| family.iter().map(|g| hs2_inner(g, f, params)).collect())
                .collect();
            CombinationNorm::Gram(gram)
        } else {
            let shifted: Vec<PolyFn> = family.iter().map(|f| f.bracket_shift(params.s())).collect();
            let pts = sphere_points(params.n(), quad.samples, quad.seed);
            let values = shifted
                .iter()
                .map(|f| pts.iter().map(|z| f.eval(z)).collect())
                .collect();
            CombinationNorm::Sampled(values)
        }
    }

    /// `|| sum c_j f_j ||^p` (the p-th power).
    fn norm_pow(&self, c: &[f64], p: f64) -> f64 {
        match self {
            CombinationNorm::Gram(g) => {
                let mut acc = Complex64::default();
                for (i, ci) in c.iter().enumerate() {
                    for (j, cj) in c.iter().enumerate() {
                        acc += g[i][j] * (ci * cj);
                    }
                }
                acc.re.max(0.0)
            }
            CombinationNorm::Sampled(v) => {
                let comb = self.combine(v, c);
                lp_from_values(&comb, p).0.powf(p)
            }
        }
    }

    fn combine(&self, v: &[Vec<Complex64>], c: &[f64]) -> Vec<Complex64> {
        let len = v.first().map_or(0, Vec::len);
        (0..len)
            .map(|k| v.iter().zip(c).map(|(row, cj)| row[k] * cj).sum())
            .collect()
    }
}

pub const ENUMERATION_LIMIT: usize = 12;

/// Type experiment `(E ||sum eps_j f_j||^2)^{1/2}` against `(sum ||f_j||^p)^{1/p}`,
/// plus the convexity inequality `||E F||^p <= E ||F||^p` for
/// `F(eps) = sum ((1 + eps_j)/2) f_j`, checked in norm and pointwise.
pub fn rademacher_experiment(
    family: &[PolyFn],
    params: &SpaceParams,
    draws: usize,
    seed: u64,
    quad: &QuadratureSpec,
) -> Result<TypeReport> {
    let len = family.len();
    if len == 0 {
        return Err(ToolkitError::invalid("the family must not be empty"));
    }
    let p = params.p();
    let oracle = CombinationNorm::new(family, params, quad);
    let (patterns, mode): (Vec<RademacherDraw>, ExpectationMode) = if len <= ENUMERATION_LIMIT {
        (
            (0..1u64 << len).map(|k| RademacherDraw::enumerated(k, len)).collect(),
            ExpectationMode::Enumeration,
        )
    } else {
        if draws == 0 {
            return Err(ToolkitError::invalid("Monte Carlo over signs needs at least one draw"));
        }
        (
            (0..draws as u64).map(|d| RademacherDraw::new(seed, d, len)).collect(),
            ExpectationMode::MonteCarlo,
        )
    };
    let count = patterns.len() as f64;
    let mut e_sq = 0.0;
    let mut e_f_p = 0.0;
    let mut mean_coeffs = vec![0.0; len];
    for pat in &patterns {
        let c: Vec<f64> = pat.signs.iter().map(|&e| f64::from(e)).collect();
        e_sq += oracle.norm_pow(&c, p).powf(2.0 / p);
        let half: Vec<f64> = pat.signs.iter().map(|&e| (1.0 + f64::from(e)) / 2.0).collect();
        e_f_p += oracle.norm_pow(&half, p);
        for (m, h) in mean_coeffs.iter_mut().zip(&half) {
            *m += h / count;
        }
    }
    e_sq /= count;
    e_f_p /= count;
    let lhs = e_sq.sqrt();
    let rhs = (0..len)
        .map(|i| {
            let e: Vec<f64> = (0..len).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
            oracle.norm_pow(&e, p)
        })
        .sum::<f64>()
        .powf(1.0 / p);
    let norm_of_mean = oracle.norm_pow(&mean_coeffs, p);
    let norm_ratio = if e_f_p > 0.0 { norm_of_mean / e_f_p } else { 0.0 };

    // Pointwise convexity at shared points of the sphere.
    let check_pts = sphere_points(params.n(), 256, quad.seed ^ 0x5eed);
    let shifted: Vec<PolyFn> = family.iter().map(|f| f.bracket_shift(params.s())).collect();
    let vals: Vec<Vec<Complex64>> = shifted
        .iter()
        .map(|f| check_pts.iter().map(|z| f.eval(z)).collect())
        .collect();
    let mut max_excess = f64::NEG_INFINITY;
    for k in 0..check_pts.len() {
        let mut e_abs = 0.0;
        let mut e_val = Complex64::default();
        for pat in &patterns {
            let v: Complex64 = pat
                .signs
                .iter()
                .zip(&vals)
                .map(|(&e, row)| row[k] * ((1.0 + f64::from(e)) / 2.0))
                .sum();
            e_abs += v.norm().powf(p) / count;
            e_val += v / count;
        }
        let scale = e_abs.max(1e-300);
        max_excess = max_excess.max((e_val.norm().powf(p) - e_abs) / scale);
    }
    let holds = norm_ratio <= 1.0 + 1e-12 && max_excess <= 1e-12;
    Ok(TypeReport {
        lhs,
        rhs,
        ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        mode,
        patterns: patterns.len(),
        convexity: ConvexityCheck {
            norm_ratio,
            max_pointwise_excess: max_excess,
            holds,
        },
    })
}
