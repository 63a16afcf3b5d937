//! Reproducing kernels, Gram matrices and the geometry of point sequences.
//!
//! Two kernel conventions are available:
//!
//! * `Model`: `k_a(z) = (1 - <z, a>)^{-rho}` with `rho = n - 2s`, whose
//!   `H_s^2` norms agree with the exact ones up to dimensional constants.
//! * `Exact`: the kernel reproducing [`hs2_inner`](crate::norms::hs2_inner)
//!   exactly on polynomials of degree at most the cap.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ToolkitError};
use crate::linalg::{self, CMatrix};
use crate::params::{inner, Point, PointSeq, SpaceParams};
use crate::poly::{indices_up_to, PolyFn};
use crate::norms::hs2_weight;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelConvention {
    Model,
    Exact,
}

/// A kernel function together with its degree-`cap` realization.
#[derive(Debug, Clone, Serialize)]
pub struct KernelFn {
    pub center: Point,
    pub params: SpaceParams,
    pub convention: KernelConvention,
    pub poly: PolyFn,
}

/// Rising factorial `(x)_k`.
pub fn pochhammer(x: f64, k: u32) -> f64 {
    (0..k).map(|i| x + f64::from(i)).product()
}

/// Truncated kernel centered at `center`.
pub fn kernel(
    center: &Point,
    params: &SpaceParams,
    convention: KernelConvention,
    cap: u32,
) -> Result<KernelFn> {
    if center.dim() != params.n() {
        return Err(ToolkitError::invalid("kernel center has the wrong dimension"));
    }
    let rho = params.rho();
    let a = center.coords();
    let terms = indices_up_to(params.n(), cap).into_iter().map(|alpha| {
        let abar: Complex64 = alpha
            .exps()
            .iter()
            .zip(a)
            .map(|(&e, c)| c.conj().powu(e))
            .product();
        let c = match convention {
            KernelConvention::Model => abar * (pochhammer(rho, alpha.degree()) / alpha.factorial()),
            KernelConvention::Exact => abar / hs2_weight(&alpha, params.s()),
        };
        (alpha, c)
    });
    let poly = PolyFn::from_terms(params.n(), cap, terms)?;
    Ok(KernelFn {
        center: center.clone(),
        params: *params,
        convention,
        poly,
    })
}

/// Closed form `K(z, w) = k_w(z) = (1 - <z, w>)^{-rho}`.
pub fn model_kernel_value(z: &[Complex64], w: &[Complex64], rho: f64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - inner(z, w)).powf(-rho)
}

/// Canonical representative `(1-|a|^2)^{s - n/q'}` of `||k_a||_{H_s^q}`.
pub fn kernel_norm_proxy(center: &Point, params: &SpaceParams, q: f64) -> f64 {
    center.defect().powf(params.kernel_exp(q))
}

/// Gram matrix `G_ij = <k_{a_j}, k_{a_i}> = K(a_i, a_j)`.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub entries: CMatrix,
    pub convention: KernelConvention,
    pub params: SpaceParams,
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    pub fn condition_number(&self) -> f64 {
        linalg::condition_number(&self.entries)
    }

    /// Entries as `[[re, im], ...]` rows.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| {
                (0..self.dim())
                    .map(|j| [self.entries[(i, j)].re, self.entries[(i, j)].im])
                    .collect()
            })
            .collect()
    }
}

impl Serialize for GramMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("GramMatrix", 3)?;
        st.serialize_field("convention", &self.convention)?;
        st.serialize_field("entries", &self.to_rows())?;
        st.serialize_field("eigenvalues", &self.eigenvalues())?;
        st.end()
    }
}

/// Gram matrix of the sequence; fails with `SingularGram` above condition `1e12`.
pub fn gram(seq: &PointSeq, convention: KernelConvention, cap: u32) -> Result<GramMatrix> {
    let entries = gram_unchecked(seq, convention, cap)?;
    linalg::check_conditioning(&entries)?;
    Ok(GramMatrix {
        entries,
        convention,
        params: *seq.params(),
    })
}

fn gram_unchecked(seq: &PointSeq, convention: KernelConvention, cap: u32) -> Result<CMatrix> {
    let params = seq.params();
    let pts = seq.points();
    let n = pts.len();
    Ok(match convention {
        KernelConvention::Model => CMatrix::from_fn(n, n, |i, j| {
            model_kernel_value(pts[i].coords(), pts[j].coords(), params.rho())
        }),
        KernelConvention::Exact => {
            let ks = pts
                .iter()
                .map(|a| kernel(a, params, KernelConvention::Exact, cap).map(|k| k.poly))
                .collect::<Result<Vec<_>>>()?;
            CMatrix::from_fn(n, n, |i, j| crate::norms::hs2_inner(&ks[j], &ks[i], params))
        }
    })
}

/// The pseudo-ball `Q(zeta, h) = {z : |1 - <z, zeta>| < h}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PseudoBall {
    pub zeta: Vec<Complex64>,
    pub h: f64,
}

impl PseudoBall {
    pub fn new(zeta: Vec<Complex64>, h: f64) -> Result<Self> {
        let r = crate::params::norm_sqr(&zeta).sqrt();
        if (r - 1.0).abs() > 1e-12 {
            return Err(ToolkitError::invalid(format!("box center has norm {r}, expected 1")));
        }
        if !(h > 0.0 && h <= 2.0) {
            return Err(ToolkitError::invalid(format!("box radius {h} outside (0, 2]")));
        }
        Ok(Self { zeta, h })
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        (Complex64::new(1.0, 0.0) - inner(z, &self.zeta)).norm() < self.h
    }
}

/// One tested box.
#[derive(Debug, Clone, Serialize)]
pub struct BoxRow {
    pub center: Vec<Complex64>,
    pub h: f64,
    pub mass: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlesonReport {
    pub sup_ratio: f64,
    pub argmax_box: Option<PseudoBall>,
    pub boxes_tested: usize,
    pub exponent: f64,
    pub rows: Vec<BoxRow>,
    pub warnings: Vec<String>,
}

impl CarlesonReport {
    /// CSV with columns `center,h,mass,ratio`; the center is written as
    /// `re+imi` coordinates joined by `;`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center,h,mass,ratio\n");
        for r in &self.rows {
            let center: Vec<String> = r.center.iter().map(format_complex).collect();
            out.push_str(&format!("{},{},{},{}\n", center.join(";"), r.h, r.mass, r.ratio));
        }
        out
    }
}

pub fn format_complex(c: &Complex64) -> String {
    if c.im.is_sign_negative() {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

fn boundary_grid(n: usize) -> Vec<Vec<Complex64>> {
    if n == 1 {
        (0..16)
            .map(|k| vec![Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 16.0)])
            .collect()
    } else {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b0c5);
        (0..16 * n).map(|_| crate::norms::sample_sphere(&mut rng, n)).collect()
    }
}

/// Witness boxes: centered at `a/|a|` with `h = c (1-|a|^2)`, `c` in `{1,2,4,8}`,
/// plus a fixed boundary grid at `h` in `{1/2, 1/4, 1/8}`.
pub fn default_boxes(seq: &PointSeq) -> Vec<PseudoBall> {
    let n = seq.params().n();
    let mut boxes = Vec::new();
    for a in seq.points() {
        let r = a.norm();
        let zeta: Vec<Complex64> = if r > 0.0 {
            a.coords().iter().map(|c| c / r).collect()
        } else {
            let mut e = vec![Complex64::default(); n];
            e[0] = Complex64::new(1.0, 0.0);
            e
        };
        for c in [1.0, 2.0, 4.0, 8.0] {
            let h = (c * a.defect()).min(2.0);
            boxes.push(PseudoBall { zeta: zeta.clone(), h });
        }
    }
    for zeta in boundary_grid(n) {
        for h in [0.5, 0.25, 0.125] {
            boxes.push(PseudoBall { zeta: zeta.clone(), h });
        }
    }
    boxes
}

/// `sup nu_S(Q) / h^{n - sp}` over `boxes`, with `nu_S = sum (1-|a|^2)^{n-sp} delta_a`.
pub fn carleson_box_sup(seq: &PointSeq, params: &SpaceParams, boxes: &[PseudoBall]) -> CarlesonReport {
    let exponent = params.n() as f64 - params.s() * params.p();
    let mut warnings = Vec::new();
    if exponent <= 0.0 {
        warnings.push(format!("n - sp = {exponent} is not positive; ratios are degenerate"));
    }
    let masses: Vec<f64> = seq.points().iter().map(|a| a.defect().powf(exponent)).collect();
    let mut rows = Vec::with_capacity(boxes.len());
    let mut best: Option<(f64, &PseudoBall)> = None;
    for b in boxes {
        let mass: f64 = seq
            .points()
            .iter()
            .zip(&masses)
            .filter(|(a, _)| b.contains(a.coords()))
            .map(|(_, m)| m)
            .sum();
        let ratio = mass / b.h.powf(exponent);
        if best.map_or(true, |(r, _)| ratio > r) {
            best = Some((ratio, b));
        }
        rows.push(BoxRow {
            center: b.zeta.clone(),
            h: b.h,
            mass,
            ratio,
        });
    }
    CarlesonReport {
        sup_ratio: best.map_or(0.0, |(r, _)| r),
        argmax_box: best.map(|(_, b)| b.clone()),
        boxes_tested: boxes.len(),
        exponent,
        rows,
        warnings,
    }
}

/// `|phi_a(b)| = sqrt(1 - (1-|a|^2)(1-|b|^2)/|1-<a,b>|^2)`.
pub fn pseudo_hyperbolic(a: &[Complex64], b: &[Complex64]) -> f64 {
    let da = 1.0 - crate::params::norm_sqr(a);
    let db = 1.0 - crate::params::norm_sqr(b);
    let den = (Complex64::new(1.0, 0.0) - inner(a, b)).norm_sqr();
    (1.0 - da * db / den).max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationStats {
    pub min_pseudo_hyperbolic: f64,
    pub pair_matrix: Vec<Vec<f64>>,
}

pub fn separation_stats(seq: &PointSeq) -> Result<SeparationStats> {
    if seq.len() < 2 {
        return Err(ToolkitError::invalid("separation needs at least two points"));
    }
    let pts = seq.points();
    let pair_matrix: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| pts.iter().map(|b| pseudo_hyperbolic(a.coords(), b.coords())).collect())
        .collect();
    let mut min = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            min = min.min(pair_matrix[i][j]);
        }
    }
    Ok(SeparationStats {
        min_pseudo_hyperbolic: min,
        pair_matrix,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RieszBounds {
    pub lower: f64,
    pub upper: f64,
    /// `A^2 = max(upper, 1/lower)`.
    pub equivalence_sq: f64,
}

/// Extreme eigenvalues of the Gram matrix of normalized model kernels.
pub fn riesz_bounds(seq: &PointSeq) -> Result<RieszBounds> {
    let params = seq.params();
    if params.p() != 2.0 {
        return Err(ToolkitError::invalid("Riesz bounds are defined for p = 2"));
    }
    let g = normalized_model_gram(seq);
    linalg::check_conditioning(&g)?;
    let ev = linalg::hermitian_eigenvalues(&g);
    let lower = ev.first().copied().unwrap_or(1.0);
    let upper = ev.last().copied().unwrap_or(1.0);
    Ok(RieszBounds {
        lower,
        upper,
        equivalence_sq: upper.max(1.0 / lower),
    })
}

/// `<e_a, e_b>` for normalized model kernels, as a matrix over the sequence.
pub fn normalized_model_gram(seq: &PointSeq) -> CMatrix {
    let rho = seq.params().rho();
    let pts = seq.points();
    let diag: Vec<f64> = pts.iter().map(|a| a.defect().powf(-rho)).collect();
    CMatrix::from_fn(pts.len(), pts.len(), |i, j| {
        model_kernel_value(pts[i].coords(), pts[j].coords(), rho) / (diag[i] * diag[j]).sqrt()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::hs2_inner;
    use crate::poly::MultiIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> Point {
        Point::from_re_im(v).unwrap()
    }

    fn seq(params: SpaceParams, pts: &[&[f64]]) -> PointSeq {
        PointSeq::new(params, pts.iter().map(|v| pt(v)).collect()).unwrap()
    }

    #[test]
    fn model_kernel_examples() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let k = kernel(&Point::origin(1), &p, KernelConvention::Model, 6).unwrap();
        assert_eq!(k.poly, PolyFn::constant(1, 6, Complex64::new(1.0, 0.0)));
        let k = kernel(&pt(&[0.5, 0.0]), &p, KernelConvention::Model, 6).unwrap();
        assert!((k.poly.coeff(&MultiIndex::new(vec![3])).re - 0.125).abs() < 1e-15);
        let p = SpaceParams::new(2, 0.5, 2.0).unwrap();
        let k = kernel(&pt(&[0.5, 0.0, 0.0, 0.0]), &p, KernelConvention::Model, 6).unwrap();
        assert!((k.poly.coeff(&MultiIndex::new(vec![2, 0])).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn model_kernel_series_matches_closed_form() {
        let p = SpaceParams::new(2, 0.25, 2.0).unwrap();
        let a = pt(&[0.2, -0.1, 0.05, 0.3]);
        let z = [Complex64::new(0.1, 0.2), Complex64::new(-0.3, 0.1)];
        let k = kernel(&a, &p, KernelConvention::Model, 30).unwrap();
        let closed = model_kernel_value(&z, a.coords(), p.rho());
        assert!((k.poly.eval(&z) - closed).norm() < 1e-12);
    }

    #[test]
    fn exact_kernel_reproduces() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (n, s) in [(1, 0.0), (2, 0.5), (3, 1.0)] {
            let p = SpaceParams::with_override(n, s, 2.0, true).unwrap();
            for _ in 0..10 {
                let f = PolyFn::from_terms(
                    n,
                    8,
                    indices_up_to(n, 8)
                        .into_iter()
                        .map(|a| (a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
                )
                .unwrap();
                let a = Point::new(crate::norms::sample_ball(&mut rng, n)).unwrap();
                let k = kernel(&a, &p, KernelConvention::Exact, 8).unwrap();
                let lhs = hs2_inner(&f, &k.poly, &p);
                let rhs = f.eval(a.coords());
                assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
            }
        }
    }

    #[test]
    fn proxy_examples() {
        let p = SpaceParams::new(2, 0.0, 2.0).unwrap();
        assert_eq!(kernel_norm_proxy(&Point::origin(2), &p, 3.0), 1.0);
        let a = pt(&[0.75f64.sqrt(), 0.0, 0.0, 0.0]);
        assert!((kernel_norm_proxy(&a, &p, 2.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn gram_examples() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let g = gram(&seq(p, &[&[0.0, 0.0]]), KernelConvention::Model, 12).unwrap();
        assert_eq!(g.entries[(0, 0)], Complex64::new(1.0, 0.0));
        let g = gram(&seq(p, &[&[0.0, 0.0], &[0.5, 0.0]]), KernelConvention::Model, 12).unwrap();
        let want = [1.0, 1.0, 1.0, 4.0 / 3.0];
        for (k, w) in want.iter().enumerate() {
            assert!((g.entries[(k / 2, k % 2)].re - w).abs() < 1e-14);
        }
        assert!(g.eigenvalues()[0] > -1e-10);
    }

    #[test]
    fn carleson_examples() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let s = seq(p, &[&[0.6, 0.0]]);
        let b = PseudoBall::new(vec![Complex64::new(1.0, 0.0)], 1.0 - 0.36).unwrap();
        let r = carleson_box_sup(&s, &p, &[b]);
        assert!((r.sup_ratio - 1.0).abs() < 1e-14);
        let empty = PointSeq::new(p, vec![]).unwrap();
        assert_eq!(carleson_box_sup(&empty, &p, &default_boxes(&empty)).sup_ratio, 0.0);
    }

    #[test]
    fn dyadic_carleson_ratio_is_stable() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let mut prev = 0.0;
        for count in [6, 8, 10, 12] {
            let s = PointSeq::dyadic(p, count).unwrap();
            let r = carleson_box_sup(&s, &p, &default_boxes(&s));
            assert!((1.0..=4.0).contains(&r.sup_ratio), "{}", r.sup_ratio);
            assert!(r.sup_ratio >= prev - 1e-12);
            prev = r.sup_ratio;
        }
    }

    #[test]
    fn separation_examples() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let st = separation_stats(&seq(p, &[&[0.0, 0.0], &[0.5, 0.0]])).unwrap();
        assert!((st.min_pseudo_hyperbolic - 0.5).abs() < 1e-15);
        let a = [Complex64::new(0.5, 0.0), Complex64::default()];
        assert_eq!(pseudo_hyperbolic(&a, &a), 0.0);
        let b = [Complex64::default(), Complex64::new(0.5, 0.0)];
        assert!((pseudo_hyperbolic(&a, &b) - 7f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn riesz_examples() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let b = riesz_bounds(&seq(p, &[&[0.3, 0.1]])).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 1.0).abs() < 1e-14);
        let b = riesz_bounds(&seq(p, &[&[0.0, 0.0], &[0.5, 0.0]])).unwrap();
        let off = 3f64.sqrt() / 2.0;
        assert!((b.lower - (1.0 - off)).abs() < 1e-12);
        assert!((b.upper - (1.0 + off)).abs() < 1e-12);
    }

    #[test]
    fn riesz_lower_bound_grows_with_separation() {
        let p = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let mut prev = 0.0;
        for r in [0.3, 0.5, 0.7, 0.9, 0.97] {
            let b = riesz_bounds(&seq(p, &[&[0.0, 0.0], &[r, 0.0]])).unwrap();
            assert!(b.lower > prev);
            prev = b.lower;
        }
        assert!(prev > 0.75);
    }
}
