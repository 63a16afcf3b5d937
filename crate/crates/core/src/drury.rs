//! Drury's construction on a finite sequence `a_1, ..., a_N`.
//!
//! With `theta = exp(2 pi i / N)`, functions `beta_j` interpolate the
//! characters `beta_j(a_k) = theta^{jk}`; their inverse discrete Fourier
//! transform `gamma_l = (1/N) sum_j theta^{-jl} beta_j` is a dual system,
//! `gamma_l(a_k) = delta_{lk}`. Indices run over `1..=N` and are stored at
//! position `index - 1`.
//!
//! All polynomial identities below are exact under truncation: the graded
//! truncation is a ring quotient, so products, powers and DFTs commute with it.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, ToolkitError};
use crate::kernels::KernelConvention;
use crate::multipliers::{galerkin_norm, min_norm_interpolant, pick_min_norm};
use crate::norms::ball_points;
use crate::params::PointSeq;
use crate::poly::PolyFn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRealization {
    /// All target values coincide, so the constant function is used.
    Constant,
    /// Minimal `H_s^2`-norm exact-kernel interpolant.
    MinNormKernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormPath {
    /// Pick-matrix optimum (certified, `p = 2`, `0 < rho <= 1`).
    Pick,
    /// Galerkin compression norm in `H_s^2` of the realized function.
    Galerkin,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaInfo {
    pub j: usize,
    pub realization: BetaRealization,
    pub norm_estimate: f64,
    pub value_residual: f64,
}

#[derive(Debug, Clone)]
pub struct DrurySystem {
    seq: PointSeq,
    cap: u32,
    theta: Complex64,
    beta: Vec<PolyFn>,
    beta_info: Vec<BetaInfo>,
    gamma: Vec<PolyFn>,
    q: BTreeMap<u32, Vec<PolyFn>>,
    c_estimate: f64,
    norm_path: NormPath,
}

/// `theta^{e}` for an integer exponent, reduced mod `N` before the cosine.
fn root(n: usize, e: i64) -> Complex64 {
    let k = e.rem_euclid(n as i64) as f64;
    Complex64::from_polar(1.0, TAU * k / n as f64)
}

/// `hat(f)(k) = (1/N) sum_j theta^{-jk} f(j)`, `k = 1..=N`.
pub fn dft(fs: &[PolyFn]) -> Vec<PolyFn> {
    let n = fs.len();
    (1..=n)
        .map(|k| {
            let mut acc = PolyFn::zero(fs[0].n(), fs[0].cap()).with_policy(fs[0].policy());
            for (idx, f) in fs.iter().enumerate() {
                let j = idx + 1;
                acc = acc.axpy(root(n, -((j * k) as i64)) / n as f64, f);
            }
            acc
        })
        .collect()
}

impl DrurySystem {
    /// Realize the `beta_j` and estimate `C(S) = max_j ||beta_j||`.
    pub fn build(seq: &PointSeq, cap: u32) -> Result<Self> {
        let n_pts = seq.len();
        if n_pts == 0 {
            return Err(ToolkitError::invalid("Drury's construction needs at least one point"));
        }
        let params = *seq.params();
        let pick = params.p() == 2.0 && params.rho() > 0.0 && params.rho() <= 1.0 + 1e-12;
        let norm_path = if pick { NormPath::Pick } else { NormPath::Galerkin };
        let mut beta = Vec::with_capacity(n_pts);
        let mut beta_info = Vec::with_capacity(n_pts);
        for j in 1..=n_pts {
            let values: Vec<Complex64> = (1..=n_pts).map(|k| root(n_pts, (j * k) as i64)).collect();
            let (f, realization) = if values.iter().all(|v| (v - values[0]).norm() < 1e-15) {
                (PolyFn::constant(params.n(), cap, values[0]), BetaRealization::Constant)
            } else {
                let g = min_norm_interpolant(seq, &values, KernelConvention::Exact, cap)?;
                (g.f, BetaRealization::MinNormKernel)
            };
            let norm_estimate = match (realization, norm_path) {
                (BetaRealization::Constant, _) => values[0].norm(),
                (_, NormPath::Pick) => pick_min_norm(seq, &values)?.t_min,
                (_, NormPath::Galerkin) => galerkin_norm(&f, &params.with_p(2.0).unwrap_or(params), cap),
            };
            let value_residual = seq
                .points()
                .iter()
                .zip(&values)
                .map(|(a, v)| (f.eval(a.coords()) - v).norm())
                .fold(0.0, f64::max);
            beta.push(f);
            beta_info.push(BetaInfo {
                j,
                realization,
                norm_estimate,
                value_residual,
            });
        }
        let c_estimate = beta_info.iter().map(|b| b.norm_estimate).fold(0.0, f64::max);
        let gamma = dft(&beta);
        let mut q = BTreeMap::new();
        q.insert(1, beta.clone());
        Ok(Self {
            seq: seq.clone(),
            cap,
            theta: root(n_pts, 1),
            beta,
            beta_info,
            gamma,
            q,
            c_estimate,
            norm_path,
        })
    }

    pub fn seq(&self) -> &PointSeq {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn theta(&self) -> Complex64 {
        self.theta
    }

    pub fn beta(&self) -> &[PolyFn] {
        &self.beta
    }

    pub fn beta_info(&self) -> &[BetaInfo] {
        &self.beta_info
    }

    pub fn gamma(&self) -> &[PolyFn] {
        &self.gamma
    }

    pub fn c_estimate(&self) -> f64 {
        self.c_estimate
    }

    pub fn norm_path(&self) -> NormPath {
        self.norm_path
    }

    /// `Q_l(k) = (1/N) sum_j beta(j) Q_{l-1}(k - j mod N)`, `Q_1 = beta`.
    pub fn convolution_power(&mut self, l: u32) -> Result<Vec<PolyFn>> {
        if l == 0 {
            return Err(ToolkitError::invalid("convolution powers start at l = 1"));
        }
        let n = self.len();
        let mut have = *self.q.keys().filter(|&&k| k <= l).max().expect("Q_1 is stored");
        while have < l {
            let prev = &self.q[&have];
            let next = (1..=n)
                .map(|k| {
                    let mut acc = PolyFn::zero(self.seq.params().n(), self.cap)
                        .with_policy(self.beta[0].policy());
                    for j in 1..=n {
                        let m = (k + n - j) % n;
                        let m = if m == 0 { n } else { m };
                        let term = self.beta[j - 1].mul(&prev[m - 1])?;
                        acc = acc.axpy(Complex64::new(1.0 / n as f64, 0.0), &term);
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            have += 1;
            self.q.insert(have, next);
        }
        Ok(self.q[&l].clone())
    }

    /// `max_{l,k} |gamma_l(a_k) - delta_{lk}|`.
    pub fn dual_residual(&self) -> f64 {
        let pts = self.seq.points();
        let mut worst: f64 = 0.0;
        for (l, g) in self.gamma.iter().enumerate() {
            for (k, a) in pts.iter().enumerate() {
                let want = if l == k { 1.0 } else { 0.0 };
                worst = worst.max((g.eval(a.coords()) - want).norm());
            }
        }
        worst
    }

    /// `max_{j,k} |beta_j(a_k) - theta^{jk}|`.
    pub fn beta_residual(&self) -> f64 {
        self.beta_info.iter().map(|b| b.value_residual).fold(0.0, f64::max)
    }

    /// Relative residual of `sum_l |gamma_l(z)|^2 = (1/N) sum_j |beta_j(z)|^2`.
    pub fn plancherel_residual(&self, z: &[Complex64]) -> f64 {
        let n = self.len() as f64;
        let lhs: f64 = self.gamma.iter().map(|g| g.eval(z).norm_sqr()).sum();
        let rhs: f64 = self.beta.iter().map(|b| b.eval(z).norm_sqr()).sum::<f64>() / n;
        (lhs - rhs).abs() / rhs.max(1.0)
    }

    /// Relative residual of
    /// `sum_l |R^j(gamma_l h)(z)|^2 = (1/N) sum_l |R^j(beta_l h)(z)|^2`.
    pub fn derivative_plancherel_residual(&self, h: &PolyFn, j: u32, z: &[Complex64]) -> Result<f64> {
        let n = self.len() as f64;
        let mut lhs = 0.0;
        for g in &self.gamma {
            lhs += g.mul(h)?.radial_derivative(j).eval(z).norm_sqr();
        }
        let mut rhs = 0.0;
        for b in &self.beta {
            rhs += b.mul(h)?.radial_derivative(j).eval(z).norm_sqr();
        }
        rhs /= n;
        Ok((lhs - rhs).abs() / rhs.max(1.0))
    }

    /// Relative residual of
    /// `sum_k |R^j(gamma_k^l h)(z)|^2 = (1/N) sum_k |R^j(Q_l(k) h)(z)|^2`.
    pub fn power_plancherel_residual(&mut self, h: &PolyFn, l: u32, j: u32, z: &[Complex64]) -> Result<f64> {
        let n = self.len() as f64;
        let q = self.convolution_power(l)?;
        let mut lhs = 0.0;
        for g in &self.gamma {
            lhs += g.pow(l)?.mul(h)?.radial_derivative(j).eval(z).norm_sqr();
        }
        let mut rhs = 0.0;
        for f in &q {
            rhs += f.mul(h)?.radial_derivative(j).eval(z).norm_sqr();
        }
        rhs /= n;
        Ok((lhs - rhs).abs() / rhs.max(1.0))
    }

    /// `max_k` coefficient distance between `hat(Q_l)(k)` and `gamma_k^l`.
    pub fn convolution_dft_residual(&mut self, l: u32) -> Result<f64> {
        let q = self.convolution_power(l)?;
        let hat = dft(&q);
        let mut worst: f64 = 0.0;
        for (h, g) in hat.iter().zip(&self.gamma) {
            worst = worst.max(h.max_coeff_diff(&g.pow(l)?));
        }
        Ok(worst)
    }

    /// Summary of the identity residuals at `samples` seeded points.
    pub fn summary(&mut self, samples: usize, seed: u64) -> Result<DrurySummary> {
        let zs = ball_points(self.seq.params().n(), samples, seed);
        let plancherel = zs
            .iter()
            .map(|z| self.plancherel_residual(z))
            .fold(0.0, f64::max);
        Ok(DrurySummary {
            n: self.len(),
            cap: self.cap,
            c_estimate: self.c_estimate,
            norm_path: self.norm_path,
            beta: self.beta_info.clone(),
            beta_residual: self.beta_residual(),
            dual_residual: self.dual_residual(),
            plancherel_residual: plancherel,
            truncated: self.gamma.iter().any(PolyFn::is_truncated),
        })
    }

    /// `sum_a |gamma_a(z)|^{2l}` maximized over seeded points of the ball and
    /// the sequence itself, against `C^{2l}`.
    pub fn ha0_bound_check(&self, l: u32, samples: usize, seed: u64) -> Ha0Report {
        let mut zs = ball_points(self.seq.params().n(), samples, seed);
        zs.extend(self.seq.points().iter().map(|a| a.coords().to_vec()));
        let mut max_sum: f64 = 0.0;
        for z in &zs {
            let s: f64 = self
                .gamma
                .iter()
                .map(|g| g.eval(z).norm_sqr().powi(l as i32))
                .sum();
            max_sum = max_sum.max(s);
        }
        let bound = self.c_estimate.powi(2 * l as i32);
        Ha0Report {
            l,
            max_sum,
            bound,
            margin: bound * POWER_SUM_SLACK - max_sum,
            pass: max_sum <= bound * POWER_SUM_SLACK,
            points_tested: zs.len(),
        }
    }

    /// `H_q = Q_l(q) h` and the pointwise check
    /// `|R^j(gamma_a^l h)(z)| <= (1/N) sum_q |R^j(H_q)(z)|` for every `a`.
    pub fn domination_split(&mut self, h: &PolyFn, l: u32, j: u32, samples: usize, seed: u64) -> Result<DominationReport> {
        let params = *self.seq.params();
        let mut warnings = Vec::new();
        if f64::from(j) > params.s() + 1e-12 {
            warnings.push(format!("derivative order j = {j} exceeds s = {}", params.s()));
        }
        let q = self.convolution_power(l)?;
        let hq = q.iter().map(|f| f.mul(h)).collect::<Result<Vec<_>>>()?;
        let rhs_fns: Vec<PolyFn> = hq.iter().map(|f| f.radial_derivative(j)).collect();
        let lhs_fns = self
            .gamma
            .iter()
            .map(|g| Ok(g.pow(l)?.mul(h)?.radial_derivative(j)))
            .collect::<Result<Vec<_>>>()?;
        let n = self.len() as f64;
        let mut max_violation = f64::NEG_INFINITY;
        for z in ball_points(params.n(), samples, seed) {
            let rhs: f64 = rhs_fns.iter().map(|f| f.eval(&z).norm()).sum::<f64>() / n;
            for f in &lhs_fns {
                max_violation = max_violation.max(f.eval(&z).norm() - rhs);
            }
        }
        Ok(DominationReport {
            h_q: hq,
            max_violation,
            warnings,
        })
    }
}

pub const POWER_SUM_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Serialize)]
pub struct DrurySummary {
    pub n: usize,
    pub cap: u32,
    pub c_estimate: f64,
    pub norm_path: NormPath,
    pub beta: Vec<BetaInfo>,
    pub beta_residual: f64,
    pub dual_residual: f64,
    pub plancherel_residual: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Ha0Report {
    pub l: u32,
    pub max_sum: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
    pub points_tested: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub h_q: Vec<PolyFn>,
    /// `max (lhs - rhs)`; non-positive when the domination holds.
    pub max_violation: f64,
    pub warnings: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Point, SpaceParams};
    use crate::poly::indices_up_to;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn desk3() -> PointSeq {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        PointSeq::new(
            params,
            [[0.0, 0.0], [0.4, 0.0], [0.0, 0.8]]
                .iter()
                .map(|v| Point::from_re_im(v).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn random_h(rng: &mut ChaCha8Rng, n: usize, cap: u32) -> PolyFn {
        PolyFn::from_terms(
            n,
            cap,
            indices_up_to(n, 2)
                .into_iter()
                .map(|a| (a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
        )
        .unwrap()
    }

    #[test]
    fn single_point_system() {
        let params = SpaceParams::new(2, 0.5, 2.0).unwrap();
        let seq = PointSeq::new(params, vec![Point::from_re_im(&[0.3, 0.0, 0.1, 0.2]).unwrap()]).unwrap();
        let mut sys = DrurySystem::build(&seq, 12).unwrap();
        assert_eq!(sys.c_estimate(), 1.0);
        assert_eq!(sys.beta()[0], PolyFn::constant(2, 12, Complex64::new(1.0, 0.0)));
        assert_eq!(sys.gamma()[0], sys.beta()[0]);
        let q3 = sys.convolution_power(3).unwrap();
        assert!(q3[0].max_coeff_diff(&sys.beta()[0].pow(3).unwrap()) < 1e-15);
        let r = sys.ha0_bound_check(2, 100, 1);
        assert!(r.pass && (r.max_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_point_character_table() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let seq = PointSeq::new(
            params,
            vec![Point::from_re_im(&[0.1, 0.0]).unwrap(), Point::from_re_im(&[-0.3, 0.2]).unwrap()],
        )
        .unwrap();
        let sys = DrurySystem::build(&seq, 12).unwrap();
        let a = seq.points();
        assert!((sys.beta()[0].eval(a[0].coords()) + 1.0).norm() < 1e-9);
        assert!((sys.beta()[0].eval(a[1].coords()) - 1.0).norm() < 1e-9);
        assert_eq!(sys.beta_info()[1].realization, BetaRealization::Constant);
        assert!((sys.gamma()[0].eval(a[0].coords()) - 1.0).norm() < 1e-9);
        assert!(sys.gamma()[0].eval(a[1].coords()).norm() < 1e-9);
    }

    #[test]
    fn desk_example_identities() {
        let mut sys = DrurySystem::build(&desk3(), 12).unwrap();
        assert!(sys.beta_residual() < 1e-9);
        assert!(sys.dual_residual() < 1e-8);
        let s = sys.summary(100, 3).unwrap();
        assert!(s.plancherel_residual < 1e-10);
        assert_eq!(s.norm_path, NormPath::Pick);
        for l in 1..=3 {
            assert!(sys.convolution_dft_residual(l).unwrap() < 1e-10);
        }
    }

    #[test]
    fn desk_example_ha0() {
        let sys = DrurySystem::build(&desk3(), 12).unwrap();
        for l in 1..=3 {
            let r = sys.ha0_bound_check(l, 1000, 7);
            assert!(r.pass, "l = {l}: {r:?}");
        }
    }

    #[test]
    fn derivative_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut sys = DrurySystem::build(&desk3(), 12).unwrap();
        let h = random_h(&mut rng, 1, 12);
        for z in ball_points(1, 20, 4) {
            for j in 0..=2 {
                assert!(sys.derivative_plancherel_residual(&h, j, &z).unwrap() < 1e-9);
                for l in 1..=3 {
                    assert!(sys.power_plancherel_residual(&h, l, j, &z).unwrap() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn two_point_square_dft_pointwise() {
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let seq = PointSeq::new(
            params,
            vec![Point::from_re_im(&[0.5, 0.1]).unwrap(), Point::from_re_im(&[-0.2, -0.6]).unwrap()],
        )
        .unwrap();
        let mut sys = DrurySystem::build(&seq, 12).unwrap();
        let q2 = sys.convolution_power(2).unwrap();
        for z in ball_points(1, 20, 8) {
            for k in 1..=2usize {
                let rhs: Complex64 = (1..=2usize)
                    .map(|j| root(2, -((j * k) as i64)) * q2[j - 1].eval(&z))
                    .sum::<Complex64>()
                    / 2.0;
                let lhs = sys.gamma()[k - 1].pow(2).unwrap().eval(&z);
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn domination_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let params = SpaceParams::new(1, 0.0, 2.0).unwrap();
        let seq = PointSeq::new(
            params,
            vec![Point::from_re_im(&[0.5, 0.1]).unwrap(), Point::from_re_im(&[-0.2, -0.6]).unwrap()],
        )
        .unwrap();
        let mut sys = DrurySystem::build(&seq, 12).unwrap();
        let h = random_h(&mut rng, 1, 12);
        let r = sys.domination_split(&h, 2, 1, 100, 5).unwrap();
        assert!(r.max_violation <= 1e-12);
        assert_eq!(r.warnings.len(), 1);
        let zero = PolyFn::zero(1, 12);
        let r = sys.domination_split(&zero, 2, 1, 10, 5).unwrap();
        assert!(r.h_q.iter().all(PolyFn::is_zero));
    }
}
