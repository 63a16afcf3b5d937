//! Automorphisms of the ball, the modulus-one cocycle `eta` and the unitary
//! action on normalized kernels.
//!
//! An automorphism is stored as an `(n+1) x (n+1)` matrix `[[A, B], [C, D]]`
//! acting by `z -> (A z + B) / (C z + D)`; composition is the matrix product,
//! which keeps the denominators multiplicative,
//! `j(psi o phi, a) = j(psi, phi(a)) j(phi, a)` with `j(phi, a) = C a + D`.
//! The cocycle is `eta(phi, a) = (j / |j|)^rho`, taken with the principal
//! argument of `j`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, ToolkitError};
use crate::kernels::model_kernel_value;
use crate::linalg::{self, CVector};
use crate::norms::sample_sphere;
use crate::params::{inner, norm_sqr, Point, PointSeq, SpaceParams};
use crate::poly::{indices_up_to, PolyFn};

#[derive(Debug, Clone)]
pub struct Automorphism {
    n: usize,
    m: DMatrix<Complex64>,
}

impl Automorphism {
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            m: DMatrix::identity(n + 1, n + 1),
        }
    }

    /// The involution `phi_mu` exchanging `mu` and `0`:
    /// `phi_mu(z) = (mu - P z - s Q z) / (1 - <z, mu>)` with `P` the projection
    /// onto `C mu`, `Q = I - P` and `s = sqrt(1 - |mu|^2)`.
    pub fn involution(mu: &Point) -> Self {
        let n = mu.dim();
        let m2 = mu.norm_sqr();
        let s = (1.0 - m2).sqrt();
        let u = mu.coords();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                let p = if m2 > 0.0 { u[i] * u[j].conj() / m2 } else { Complex64::default() };
                let id = if i == j { 1.0 } else { 0.0 };
                m[(i, j)] = -p - (Complex64::new(id, 0.0) - p) * s;
            }
            m[(i, n)] = u[i];
            m[(n, i)] = -u[i].conj();
        }
        m[(n, n)] = Complex64::new(1.0, 0.0);
        Self { n, m }
    }

    /// Unitary map `z -> U z`; fails unless `U^* U = I` to `1e-10`.
    pub fn unitary(u: &DMatrix<Complex64>) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n || (u.adjoint() * u - DMatrix::identity(n, n)).norm() > 1e-10 {
            return Err(ToolkitError::invalid("matrix is not unitary"));
        }
        let mut m = DMatrix::identity(n + 1, n + 1);
        m.view_mut((0, 0), (n, n)).copy_from(u);
        Ok(Self { n, m })
    }

    /// `self o other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        assert_eq!(self.n, other.n, "automorphisms of different balls");
        Automorphism {
            n: self.n,
            m: &self.m * &other.m,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `j(phi, z) = C z + D`.
    pub fn denominator(&self, z: &[Complex64]) -> Complex64 {
        let n = self.n;
        (0..n).map(|i| self.m[(n, i)] * z[i]).sum::<Complex64>() + self.m[(n, n)]
    }

    /// Image of a point of the closed ball (no check).
    pub fn map(&self, z: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let den = self.denominator(z);
        (0..n)
            .map(|i| {
                ((0..n).map(|j| self.m[(i, j)] * z[j]).sum::<Complex64>() + self.m[(i, n)]) / den
            })
            .collect()
    }

    pub fn apply(&self, z: &Point) -> Result<Point> {
        if z.dim() != self.n {
            return Err(ToolkitError::invalid("point has the wrong dimension"));
        }
        Point::new(self.map(z.coords()))
    }

    /// `eta(phi, a) = exp(i rho arg j(phi, a))`.
    pub fn eta(&self, a: &[Complex64], rho: f64) -> Complex64 {
        Complex64::from_polar(1.0, rho * self.denominator(a).arg())
    }
}

/// `phi_mu` bundled with the space it acts on.
#[derive(Debug, Clone)]
pub struct MoebiusMap {
    pub mu: Point,
    pub params: SpaceParams,
    auto: Automorphism,
}

impl MoebiusMap {
    pub fn new(mu: Point, params: SpaceParams) -> Result<Self> {
        if mu.dim() != params.n() {
            return Err(ToolkitError::invalid("mu has the wrong dimension"));
        }
        let auto = Automorphism::involution(&mu);
        Ok(Self { mu, params, auto })
    }

    pub fn rho(&self) -> f64 {
        self.params.rho()
    }

    pub fn automorphism(&self) -> &Automorphism {
        &self.auto
    }

    pub fn apply_phi(&self, z: &Point) -> Result<Point> {
        self.auto.apply(z)
    }

    /// `(1 - <a, mu>)^rho / |1 - <a, mu>|^rho`.
    pub fn eta(&self, a: &Point) -> Complex64 {
        self.auto.eta(a.coords(), self.rho())
    }
}

/// `<e_a, e_b>` for normalized model kernels `e_a = k_a / ||k_a||`.
pub fn normalized_kernel_product(a: &[Complex64], b: &[Complex64], rho: f64) -> Complex64 {
    let da = 1.0 - norm_sqr(a);
    let db = 1.0 - norm_sqr(b);
    model_kernel_value(b, a, rho) * (da * db).powf(rho / 2.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryCheck {
    pub max_residual: f64,
    pub pairs: usize,
}

/// `max |eta(a) conj(eta(b)) <e_{phi(a)}, e_{phi(b)}> - <e_a, e_b>|` over pairs.
pub fn unitary_gram_check(auto: &Automorphism, seq: &PointSeq) -> Result<UnitaryCheck> {
    let rho = seq.params().rho();
    let pts = seq.points();
    let images = pts.iter().map(|a| auto.apply(a)).collect::<Result<Vec<_>>>()?;
    let etas: Vec<Complex64> = pts.iter().map(|a| auto.eta(a.coords(), rho)).collect();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let lhs = etas[i]
                * etas[j].conj()
                * normalized_kernel_product(images[i].coords(), images[j].coords(), rho);
            let rhs = normalized_kernel_product(pts[i].coords(), pts[j].coords(), rho);
            worst = worst.max((lhs - rhs).norm());
            pairs += 1;
        }
    }
    Ok(UnitaryCheck {
        max_residual: worst,
        pairs,
    })
}

/// `|eta(psi o phi, a) - eta(psi, phi(a)) eta(phi, a)|`.
pub fn cocycle_residual(psi: &Automorphism, phi: &Automorphism, a: &Point, rho: f64) -> f64 {
    let comp = psi.compose(phi);
    let pa = phi.map(a.coords());
    (comp.eta(a.coords(), rho) - psi.eta(&pa, rho) * phi.eta(a.coords(), rho)).norm()
}

/// `|(1 - |phi_mu(a)|^2) - (1-|mu|^2)(1-|a|^2)/|1 - <a, mu>|^2|`.
pub fn rudin_residual(map: &MoebiusMap, a: &Point) -> Result<f64> {
    let img = map.apply_phi(a)?;
    let rhs = map.mu.defect() * a.defect()
        / (Complex64::new(1.0, 0.0) - inner(a.coords(), map.mu.coords())).norm_sqr();
    Ok((img.defect() - rhs).abs())
}

/// Least-squares re-expansion of `m o phi` in monomials of degree `<= cap`,
/// fitted on `4 x (basis size)` seeded boundary samples.
///
/// The composition is rational, so the result is an approximation whose
/// quality is reported through `fit_residual`.
pub fn compose_poly(m: &PolyFn, auto: &Automorphism, cap: u32, seed: u64) -> Result<(PolyFn, f64)> {
    let n = m.n();
    let basis = indices_up_to(n, cap);
    let rows = 4 * basis.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zs: Vec<Vec<Complex64>> = (0..rows).map(|_| sample_sphere(&mut rng, n)).collect();
    let a = linalg::CMatrix::from_fn(rows, basis.len(), |i, j| basis[j].monomial(&zs[i]));
    let b = CVector::from_iterator(rows, zs.iter().map(|z| m.eval(&auto.map(z))));
    let x = linalg::least_squares(&a, &b)?;
    let fit_residual = (&a * &x - &b).norm() / b.norm().max(1e-300);
    let f = PolyFn::from_terms(n, cap, basis.into_iter().zip(x.iter().copied()))?;
    Ok((f, fit_residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multipliers::galerkin_norm;
    use crate::norms::ball_points;
    use crate::poly::MultiIndex;

    fn pt(v: &[f64]) -> Point {
        Point::from_re_im(v).unwrap()
    }

    fn close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).norm() < tol)
    }

    #[test]
    fn exchange_and_involution() {
        let params = SpaceParams::new(2, 0.5, 2.0).unwrap();
        let mu = pt(&[0.3, -0.2, 0.1, 0.4]);
        let map = MoebiusMap::new(mu.clone(), params).unwrap();
        assert!(close(map.apply_phi(&mu).unwrap().coords(), &[Complex64::default(); 2], 1e-15));
        assert!(close(map.apply_phi(&Point::origin(2)).unwrap().coords(), mu.coords(), 1e-15));
        for z in ball_points(2, 50, 1) {
            let z = Point::new(z).unwrap();
            let back = map.apply_phi(&map.apply_phi(&z).unwrap()).unwrap();
            assert!(close(back.coords(), z.coords(), 1e-12));
            assert!(rudin_residual(&map, &z).unwrap() < 1e-12);
        }
    }

    #[test]
    fn disc_formula() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let mu = Complex64::new(0.3, 0.4);
        let map = MoebiusMap::new(Point::new(vec![mu]).unwrap(), params).unwrap();
        let z = Complex64::new(-0.2, 0.5);
        let want = (mu - z) / (1.0 - mu.conj() * z);
        let got = map.apply_phi(&Point::new(vec![z]).unwrap()).unwrap();
        assert!((got.coords()[0] - want).norm() < 1e-15);
    }

    #[test]
    fn eta_examples() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let zero = MoebiusMap::new(Point::origin(1), params).unwrap();
        assert_eq!(zero.eta(&pt(&[0.3, 0.2])), Complex64::new(1.0, 0.0));
        let half = MoebiusMap::new(pt(&[0.5, 0.0]), params).unwrap();
        assert!((half.eta(&Point::origin(1)) - 1.0).norm() < 1e-15);
        let e = half.eta(&pt(&[0.0, 0.5]));
        assert!((e - Complex64::from_polar(1.0, -(0.25f64).atan())).norm() < 1e-15);
        assert!((e.arg() + 0.2450).abs() < 1e-4);
    }

    #[test]
    fn unitary_examples() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let map = MoebiusMap::new(pt(&[0.5, 0.0]), params).unwrap();
        let one = PointSeq::new(params, vec![pt(&[0.2, 0.1])]).unwrap();
        assert!(unitary_gram_check(map.automorphism(), &one).unwrap().max_residual < 1e-15);
        let two = PointSeq::new(params, vec![Point::origin(1), pt(&[0.0, 0.5])]).unwrap();
        assert!(unitary_gram_check(map.automorphism(), &two).unwrap().max_residual < 1e-12);

        let params = SpaceParams::new(2, 0.5, 2.0).unwrap();
        let mu = Point::new(ball_points(2, 1, 3).remove(0)).unwrap();
        let map = MoebiusMap::new(mu, params).unwrap();
        let pts = ball_points(2, 5, 4).into_iter().map(|z| Point::new(z).unwrap()).collect();
        let seq = PointSeq::new(params, pts).unwrap();
        assert!(unitary_gram_check(map.automorphism(), &seq).unwrap().max_residual < 1e-10);
    }

    #[test]
    fn unitary_check_for_compositions_with_rotations() {
        let params = SpaceParams::new(2, 0.25, 2.0).unwrap();
        let theta = 0.7f64;
        let u = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(theta.cos(), 0.0),
                Complex64::new(0.0, theta.sin()),
                Complex64::new(0.0, theta.sin()),
                Complex64::new(theta.cos(), 0.0),
            ],
        );
        let rot = Automorphism::unitary(&u).unwrap();
        let phi = Automorphism::involution(&pt(&[0.1, 0.5, -0.3, 0.2]));
        let auto = rot.compose(&phi);
        let pts = ball_points(2, 6, 9).into_iter().map(|z| Point::new(z).unwrap()).collect();
        let seq = PointSeq::new(params, pts).unwrap();
        assert!(unitary_gram_check(&auto, &seq).unwrap().max_residual < 1e-10);
    }

    #[test]
    fn cocycle() {
        let rho = 1.0;
        let mus = ball_points(2, 20, 11);
        let pts = ball_points(2, 20, 12);
        for i in 0..10 {
            let phi = Automorphism::involution(&Point::new(mus[2 * i].clone()).unwrap());
            let psi = Automorphism::involution(&Point::new(mus[2 * i + 1].clone()).unwrap());
            let a = Point::new(pts[i].clone()).unwrap();
            assert!(cocycle_residual(&psi, &phi, &a, rho) < 1e-10);
            assert!(cocycle_residual(&psi, &phi, &a, 0.5) < 1e-10);
        }
    }

    #[test]
    fn multiplier_norm_invariance() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let m = PolyFn::from_terms(
            1,
            12,
            [
                (MultiIndex::new(vec![0]), Complex64::new(0.2, 0.0)),
                (MultiIndex::new(vec![1]), Complex64::new(0.5, 0.0)),
                (MultiIndex::new(vec![2]), Complex64::new(0.0, 0.3)),
            ],
        )
        .unwrap();
        let map = MoebiusMap::new(pt(&[0.3, 0.1]), params).unwrap();
        let (mc, fit) = compose_poly(&m, map.automorphism(), 12, 42).unwrap();
        let a = galerkin_norm(&m, &params, 12);
        let b = galerkin_norm(&mc, &params, 12);
        assert!((a / b).ln().abs() <= 0.2, "{a} vs {b}, fit {fit}");
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::kernels::pseudo_hyperbolic;
    use proptest::prelude::*;

    /// Points of the ball of radius at most `0.95` in `C^2`.
    fn arb_point() -> impl Strategy<Value = Point> {
        (prop::collection::vec(-1.0f64..1.0, 4), 0.0f64..0.95).prop_map(|(v, r)| {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-9);
            Point::from_re_im(&v.iter().map(|x| x * r / norm).collect::<Vec<_>>()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn involution_is_involutive(mu in arb_point(), z in arb_point()) {
            let phi = Automorphism::involution(&mu);
            let back = phi.map(&phi.map(z.coords()));
            for (x, y) in back.iter().zip(z.coords()) {
                prop_assert!((x - y).norm() < 1e-9);
            }
        }

        #[test]
        fn involution_preserves_pseudo_hyperbolic_distance(mu in arb_point(), a in arb_point(), b in arb_point()) {
            let phi = Automorphism::involution(&mu);
            let before = pseudo_hyperbolic(a.coords(), b.coords());
            let after = pseudo_hyperbolic(&phi.map(a.coords()), &phi.map(b.coords()));
            prop_assert!((before - after).abs() < 1e-9);
        }

        #[test]
        fn cocycle_holds_for_integer_exponents(mu in arb_point(), nu in arb_point(), a in arb_point(), rho in 1u32..=2) {
            let phi = Automorphism::involution(&mu);
            let psi = Automorphism::involution(&nu);
            prop_assert!(cocycle_residual(&psi, &phi, &a, f64::from(rho)) < 1e-9);
        }
    }
}
