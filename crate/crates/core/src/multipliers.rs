//! Minimal-norm interpolation, Pick-matrix optimization and multiplier-norm
//! estimates.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{ErrorKind, Result, ToolkitError};
use crate::kernels::{kernel, model_kernel_value, KernelConvention};
use crate::linalg::{self, CMatrix, CVector};
use crate::norms::{hs2_weight, hsp_norm, NormFlavor, QuadratureSpec};
use crate::params::{Point, PointSeq, SpaceParams};
use crate::poly::{indices_up_to, MultiIndex, PolyFn};

/// Result of a minimal-norm kernel-span interpolation.
#[derive(Debug, Clone, Serialize)]
pub struct Interpolant {
    pub f: PolyFn,
    /// Coefficients `c` of `f = sum c_a k_a`.
    pub coefficients: Vec<Complex64>,
    /// `c^* G c = values^* G^{-1} values`.
    pub norm_sq: f64,
}

/// Matrix `G_ij = k_j(a_i)` of realized kernels evaluated at the points.
pub fn evaluation_matrix(kernels: &[PolyFn], points: &[Point]) -> CMatrix {
    CMatrix::from_fn(points.len(), kernels.len(), |i, j| kernels[j].eval(points[i].coords()))
}

/// `g = sum c_a k_a` with `g(a_i) = values_i`, using kernels realized at degree `cap`.
///
/// The linear system uses the realized (truncated) kernels so the
/// interpolation conditions hold to rounding error. For the exact convention
/// this matrix is the `H_s^2` Gram matrix and `g` has minimal `H_s^2` norm.
pub fn min_norm_interpolant(
    seq: &PointSeq,
    values: &[Complex64],
    convention: KernelConvention,
    cap: u32,
) -> Result<Interpolant> {
    if values.len() != seq.len() {
        return Err(ToolkitError::invalid(format!(
            "{} values for {} points",
            values.len(),
            seq.len()
        )));
    }
    let params = seq.params();
    let kernels = seq
        .points()
        .iter()
        .map(|a| kernel(a, params, convention, cap).map(|k| k.poly))
        .collect::<Result<Vec<_>>>()?;
    let g = evaluation_matrix(&kernels, seq.points());
    let v = linalg::to_vector(values);
    let c = if values.iter().all(|x| *x == Complex64::default()) {
        CVector::zeros(values.len())
    } else {
        linalg::solve(&g, &v)?
    };
    let mut f = PolyFn::zero(params.n(), cap);
    for (k, ck) in kernels.iter().zip(c.iter()) {
        f = f.axpy(*ck, k);
    }
    let norm_sq = (c.adjoint() * &g * &c)[(0, 0)].re.max(0.0);
    Ok(Interpolant {
        f,
        coefficients: c.iter().copied().collect(),
        norm_sq,
    })
}

pub const PICK_MAX_ITER: usize = 200;
pub const PICK_WIDTH: f64 = 1e-8;
pub const PSD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BisectionStep {
    pub t: f64,
    pub feasible: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PickResult {
    pub t_min: f64,
    /// Smallest eigenvalue of the Pick matrix at `t_min`.
    pub certificate: f64,
    pub bracket_width: f64,
    pub trace: Vec<BisectionStep>,
}

/// Pick matrix `P(t)_ij = (t^2 - lambda_i conj(lambda_j)) K(a_i, a_j)`.
pub fn pick_matrix(k: &CMatrix, values: &[Complex64], t: f64) -> CMatrix {
    CMatrix::from_fn(k.nrows(), k.ncols(), |i, j| {
        (Complex64::new(t * t, 0.0) - values[i] * values[j].conj()) * k[(i, j)]
    })
}

fn pick_step(k: &CMatrix, values: &[Complex64], t: f64) -> BisectionStep {
    let p = pick_matrix(k, values, t);
    // Scale of the entries before the cancellation in t^2 - lambda_i conj(lambda_j).
    let scale = (0..k.nrows())
        .flat_map(|i| (0..k.ncols()).map(move |j| (i, j)))
        .map(|(i, j)| (t * t + values[i].norm() * values[j].norm()) * k[(i, j)].norm())
        .fold(0.0, f64::max);
    let min_eigenvalue = linalg::hermitian_eigenvalues(&p).first().copied().unwrap_or(0.0);
    BisectionStep {
        t,
        feasible: min_eigenvalue >= -PSD_REL_TOL * scale,
        min_eigenvalue,
    }
}

/// Smallest multiplier norm `t` of an interpolant of `values`, by bisection
/// on positivity of the Pick matrix. Needs `p = 2` and `0 < rho <= 1`.
pub fn pick_min_norm(seq: &PointSeq, values: &[Complex64]) -> Result<PickResult> {
    let params = seq.params();
    if params.p() != 2.0 {
        return Err(ToolkitError::invalid("Pick optimization needs p = 2"));
    }
    let rho = params.rho();
    if !(rho > 0.0 && rho <= 1.0 + 1e-12) {
        return Err(ToolkitError::invalid(format!(
            "Pick optimization needs 0 < n - 2s <= 1, got {rho}"
        )));
    }
    if values.len() != seq.len() {
        return Err(ToolkitError::invalid("one value per point is required"));
    }
    let pts = seq.points();
    let k = CMatrix::from_fn(pts.len(), pts.len(), |i, j| {
        model_kernel_value(pts[i].coords(), pts[j].coords(), rho)
    });
    let vmax = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut trace = Vec::new();
    let mut lo = vmax;
    let first = pick_step(&k, values, lo);
    trace.push(first);
    if first.feasible {
        return Ok(PickResult {
            t_min: lo,
            certificate: first.min_eigenvalue,
            bracket_width: 0.0,
            trace,
        });
    }
    let cond = linalg::condition_number(&k);
    let mut hi = vmax * cond.sqrt() * pts.len() as f64;
    let mut hi_step = pick_step(&k, values, hi);
    trace.push(hi_step);
    while !hi_step.feasible {
        if trace.len() >= PICK_MAX_ITER {
            return Err(ToolkitError::new(
                ErrorKind::BisectionNoConverge,
                format!("no feasible upper bound found up to t = {hi}"),
            ));
        }
        lo = hi;
        hi *= 2.0;
        hi_step = pick_step(&k, values, hi);
        trace.push(hi_step);
    }
    while hi - lo > PICK_WIDTH {
        if trace.len() >= PICK_MAX_ITER {
            return Err(ToolkitError::new(
                ErrorKind::BisectionNoConverge,
                format!("bracket [{lo}, {hi}] after {PICK_MAX_ITER} iterations"),
            ));
        }
        let mid = 0.5 * (lo + hi);
        let step = pick_step(&k, values, mid);
        trace.push(step);
        if step.feasible {
            hi = mid;
            hi_step = step;
        } else {
            lo = mid;
        }
    }
    Ok(PickResult {
        t_min: hi,
        certificate: hi_step.min_eigenvalue,
        bracket_width: hi - lo,
        trace,
    })
}

/// Matrix of `f -> P_D(m f)` in the orthonormal monomial basis
/// `u_alpha = z^alpha / sqrt(W_alpha)` of polynomials of degree `<= cap`.
pub fn galerkin_matrix(m: &PolyFn, params: &SpaceParams, cap: u32) -> (Vec<MultiIndex>, CMatrix) {
    let basis = indices_up_to(params.n(), cap);
    let weights: Vec<f64> = basis.iter().map(|a| hs2_weight(a, params.s()).sqrt()).collect();
    let pos: std::collections::HashMap<&MultiIndex, usize> =
        basis.iter().enumerate().map(|(i, a)| (a, i)).collect();
    let mut mat = CMatrix::zeros(basis.len(), basis.len());
    for (col, alpha) in basis.iter().enumerate() {
        for (gamma, c) in m.terms() {
            let beta = alpha.add(gamma);
            if let Some(&row) = pos.get(&beta) {
                mat[(row, col)] = c * (weights[row] / weights[col]);
            }
        }
    }
    (basis, mat)
}

/// Norm of the compressed multiplication operator in `H_s^2`.
///
/// Compressions of `M_m` to growing polynomial spaces increase toward the
/// true multiplier norm, so this is the Galerkin approximation of `||m||`.
pub fn galerkin_norm(m: &PolyFn, params: &SpaceParams, cap: u32) -> f64 {
    linalg::spectral_norm(&galerkin_matrix(m, params, cap).1)
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub cap: u32,
    pub quad: QuadratureSpec,
    pub random_polys: usize,
    pub seed: u64,
    /// Kernel centers added to the sampling family.
    pub kernel_points: Vec<Point>,
}

impl EstimateOptions {
    pub fn new(cap: u32) -> Self {
        Self {
            cap,
            quad: QuadratureSpec::default(),
            random_polys: 8,
            seed: 42,
            kernel_points: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiplierEstimate {
    /// Norm of the degree-`cap` Galerkin compression in `H_s^2`.
    pub galerkin_upper: f64,
    /// Best ratio `||m f|| / ||f||` in `H_s^p` over the test family.
    pub sampling_lower: f64,
    pub degree_cap: u32,
    pub family_size: usize,
}

/// Galerkin estimate at `p = 2` and sampling lower bound in `H_s^p`.
///
/// The sampling family (monomials, seeded random polynomials and exact
/// kernels at the given points) has degree at most `cap - deg m`, so the
/// products are never truncated and at `p = 2` the sampling bound never
/// exceeds the Galerkin value.
pub fn multiplier_norm_estimate(
    m: &PolyFn,
    params: &SpaceParams,
    opts: &EstimateOptions,
) -> Result<MultiplierEstimate> {
    let cap = opts.cap;
    if m.degree() > cap {
        return Err(ToolkitError::overflow(format!(
            "multiplier degree {} exceeds the cap {cap}",
            m.degree()
        )));
    }
    let l2 = params.with_p(2.0).unwrap_or(*params);
    let galerkin_upper = galerkin_norm(m, &l2, cap);
    let fam_deg = cap - m.degree();
    let n = params.n();
    let mut family: Vec<PolyFn> = indices_up_to(n, fam_deg)
        .into_iter()
        .map(|a| PolyFn::monomial(fam_deg, a, Complex64::new(1.0, 0.0)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let idx = indices_up_to(n, fam_deg);
    for _ in 0..opts.random_polys {
        let terms: Vec<_> = idx
            .iter()
            .map(|a| {
                (
                    a.clone(),
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect();
        family.push(PolyFn::from_terms(n, fam_deg, terms)?);
    }
    for a in &opts.kernel_points {
        family.push(kernel(a, params, KernelConvention::Exact, fam_deg)?.poly);
    }
    let m_cap = m.with_cap(cap)?;
    let mut best: f64 = 0.0;
    for f in &family {
        let f = f.with_cap(cap)?;
        let den = hsp_norm(&f, params, &opts.quad, NormFlavor::FractionalShift)?.value;
        if den == 0.0 {
            continue;
        }
        let num = hsp_norm(&m_cap.mul(&f)?, params, &opts.quad, NormFlavor::FractionalShift)?.value;
        best = best.max(num / den);
    }
    Ok(MultiplierEstimate {
        galerkin_upper,
        sampling_lower: best,
        degree_cap: cap,
        family_size: family.len(),
    })
}

/// `||M_m^* k_a - conj(m(a)) k_a|| / ||k_a||` in the degree-`cap` Galerkin model,
/// with the exact kernel.
pub fn adjoint_eigen_residual(m: &PolyFn, a: &Point, params: &SpaceParams, cap: u32) -> f64 {
    let (basis, mat) = galerkin_matrix(m, params, cap);
    let x = CVector::from_iterator(
        basis.len(),
        basis
            .iter()
            .map(|alpha| alpha.monomial(a.coords()).conj() / hs2_weight(alpha, params.s()).sqrt()),
    );
    let ma = m.eval(a.coords()).conj();
    let y = mat.adjoint() * &x - &x * ma;
    y.norm() / x.norm()
}

/// Minimal-norm exact-kernel interpolant with values `(1, 0)` at `(a, b)`.
pub fn two_point_witness(a: &Point, b: &Point, params: &SpaceParams, cap: u32) -> Result<Interpolant> {
    let seq = PointSeq::new(*params, vec![a.clone(), b.clone()])?;
    min_norm_interpolant(
        &seq,
        &[Complex64::new(1.0, 0.0), Complex64::default()],
        KernelConvention::Exact,
        cap,
    )
}
