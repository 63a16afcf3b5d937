//! Truncated multivariate holomorphic power series.
//!
//! A [`PolyFn`] stores the coefficients of `z^alpha` for `|alpha| <= cap`.
//! Products drop every term above the cap and remember that they did, so
//! downstream checks can tell exact results from truncated ones. Since
//! truncation by total degree is a ring quotient, products of truncated
//! series are still associative and commutative.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ErrorKind, Result, ToolkitError};

pub const DEFAULT_PRUNE: f64 = 1e-15;

/// Multi-index `alpha = (alpha_1, ..., alpha_n)`.
///
/// Ordered by total degree first, then lexicographically with larger
/// leading exponents first, so `1 < z1 < z2 < z1^2 < z1 z2 < z2^2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        Self(exps)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The index of the coordinate function `z_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        Self(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when every component stays non-negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `alpha! = prod alpha_i!` as a float.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&a| (1..=a).map(f64::from).product::<f64>())
            .product()
    }

    /// `z^alpha`.
    pub fn monomial(&self, z: &[Complex64]) -> Complex64 {
        self.0
            .iter()
            .zip(z)
            .map(|(&e, c)| c.powu(e))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All multi-indices of length `n` and total degree exactly `d`, in order.
pub fn indices_of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=d).rev() {
            prefix.push(first);
            rec(n, d - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// All multi-indices of length `n` with total degree at most `cap`, in order.
pub fn indices_up_to(n: usize, cap: u32) -> Vec<MultiIndex> {
    (0..=cap).flat_map(|d| indices_of_degree(n, d)).collect()
}

/// How products behave when terms exceed the degree cap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// Fail with `DegreeOverflow` instead of dropping terms.
    pub strict: bool,
    /// Coefficients of smaller modulus are removed after arithmetic.
    pub prune_below: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            strict: false,
            prune_below: DEFAULT_PRUNE,
        }
    }
}

impl TruncationPolicy {
    pub fn strict() -> Self {
        Self {
            strict: true,
            ..Self::default()
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            strict: self.strict || other.strict,
            prune_below: self.prune_below.min(other.prune_below),
        }
    }
}

/// Truncated power series `sum_{|alpha| <= cap} c_alpha z^alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyFn {
    n: usize,
    cap: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
    truncated: bool,
    policy: TruncationPolicy,
}

impl PolyFn {
    pub fn zero(n: usize, cap: u32) -> Self {
        Self {
            n,
            cap,
            coeffs: BTreeMap::new(),
            truncated: false,
            policy: TruncationPolicy::default(),
        }
    }

    pub fn constant(n: usize, cap: u32, c: Complex64) -> Self {
        let mut f = Self::zero(n, cap);
        f.insert(MultiIndex::zero(n), c);
        f
    }

    /// `c z^alpha`; a monomial above the cap gives the zero series flagged as truncated.
    pub fn monomial(cap: u32, alpha: MultiIndex, c: Complex64) -> Self {
        let mut f = Self::zero(alpha.len(), cap);
        if alpha.degree() > cap {
            f.truncated = true;
        } else {
            f.insert(alpha, c);
        }
        f
    }

    /// The coordinate function `z_i` (zero-based `i`).
    pub fn coordinate(n: usize, cap: u32, i: usize) -> Self {
        Self::monomial(cap, MultiIndex::unit(n, i), Complex64::new(1.0, 0.0))
    }

    /// Series from explicit terms; terms above the cap are dropped and flagged.
    pub fn from_terms<I>(n: usize, cap: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut f = Self::zero(n, cap);
        for (alpha, c) in terms {
            if alpha.len() != n {
                return Err(ToolkitError::invalid(format!(
                    "multi-index {alpha} has length {}, expected {n}",
                    alpha.len()
                )));
            }
            if alpha.degree() > cap {
                f.truncated = true;
                continue;
            }
            *f.coeffs.entry(alpha).or_default() += c;
        }
        f.prune();
        Ok(f)
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Largest total degree with a non-zero coefficient (0 for the zero series).
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    fn insert(&mut self, alpha: MultiIndex, c: Complex64) {
        if c.norm() >= self.policy.prune_below {
            self.coeffs.insert(alpha, c);
        }
    }

    fn prune(&mut self) {
        let tol = self.policy.prune_below;
        self.coeffs.retain(|_, c| c.norm() >= tol);
    }

    fn check_compatible(&self, other: &PolyFn) {
        assert_eq!(
            self.n, other.n,
            "power series of different dimensions cannot be combined"
        );
    }

    /// Apply `f(alpha, c)` to every coefficient.
    pub fn map_coeffs<F>(&self, f: F) -> PolyFn
    where
        F: Fn(&MultiIndex, Complex64) -> Complex64,
    {
        let mut out = PolyFn {
            coeffs: BTreeMap::new(),
            ..self.clone()
        };
        for (alpha, c) in &self.coeffs {
            out.insert(alpha.clone(), f(alpha, *c));
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> PolyFn {
        self.map_coeffs(|_, x| x * c)
    }

    pub fn scale_re(&self, c: f64) -> PolyFn {
        self.map_coeffs(|_, x| x * c)
    }

    /// `self + c * other`; the cap of the result is the larger of the two.
    pub fn axpy(&self, c: Complex64, other: &PolyFn) -> PolyFn {
        self.check_compatible(other);
        let mut out = self.clone();
        out.cap = self.cap.max(other.cap);
        out.truncated |= other.truncated;
        out.policy = self.policy.merge(other.policy);
        for (alpha, x) in &other.coeffs {
            *out.coeffs.entry(alpha.clone()).or_default() += c * x;
        }
        out.prune();
        out
    }

    /// Same coefficients under a new cap; shrinking drops terms and sets the flag.
    pub fn with_cap(&self, cap: u32) -> Result<PolyFn> {
        let mut out = self.clone();
        out.cap = cap;
        let before = out.coeffs.len();
        out.coeffs.retain(|alpha, _| alpha.degree() <= cap);
        if out.coeffs.len() < before {
            if out.policy.strict {
                return Err(ToolkitError::overflow(format!(
                    "lowering the cap to {cap} drops terms"
                )));
            }
            out.truncated = true;
        }
        Ok(out)
    }

    /// Truncated product. The cap is the larger of the two caps.
    pub fn mul(&self, other: &PolyFn) -> Result<PolyFn> {
        self.check_compatible(other);
        let cap = self.cap.max(other.cap);
        let policy = self.policy.merge(other.policy);
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        let mut dropped = false;
        for (a, x) in &self.coeffs {
            let da = a.degree();
            for (b, y) in &other.coeffs {
                if da + b.degree() > cap {
                    dropped = true;
                    continue;
                }
                *acc.entry(a.add(b)).or_default() += x * y;
            }
        }
        if dropped && policy.strict {
            return Err(ToolkitError::new(
                ErrorKind::DegreeOverflow,
                format!("product exceeds degree cap {cap}"),
            ));
        }
        let mut out = PolyFn {
            n: self.n,
            cap,
            coeffs: acc,
            truncated: self.truncated || other.truncated || dropped,
            policy,
        };
        out.prune();
        Ok(out)
    }

    /// `self^k` by repeated squaring (`self^0 = 1`).
    pub fn pow(&self, k: u32) -> Result<PolyFn> {
        let mut result = PolyFn::constant(self.n, self.cap, Complex64::new(1.0, 0.0))
            .with_policy(self.policy);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// `R^j f` where `R = sum z_i d/dz_i`; exact since `R z^alpha = |alpha| z^alpha`.
    pub fn radial_derivative(&self, j: u32) -> PolyFn {
        self.map_coeffs(|alpha, c| c * f64::from(alpha.degree()).powi(j as i32))
    }

    /// `(I + R)^s f` for real `s`.
    pub fn bracket_shift(&self, s: f64) -> PolyFn {
        if s == 0.0 {
            return self.clone();
        }
        self.map_coeffs(|alpha, c| c * (1.0 + f64::from(alpha.degree())).powf(s))
    }

    /// Coefficientwise complex conjugate of the coefficients (not of the function).
    pub fn conj_coeffs(&self) -> PolyFn {
        self.map_coeffs(|_, c| c.conj())
    }

    /// Value at `z`; `z` may lie on or outside the sphere.
    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        assert_eq!(z.len(), self.n, "evaluation point has the wrong dimension");
        let deg = self.degree() as usize;
        let powers: Vec<Vec<Complex64>> = z
            .iter()
            .map(|&zi| {
                let mut v = Vec::with_capacity(deg + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=deg {
                    v.push(acc);
                    acc *= zi;
                }
                v
            })
            .collect();
        self.coeffs
            .iter()
            .map(|(alpha, c)| {
                alpha
                    .exps()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &e)| acc * powers[i][e as usize])
            })
            .sum()
    }

    /// `max_alpha |c_alpha(self) - c_alpha(other)|`.
    pub fn max_coeff_diff(&self, other: &PolyFn) -> f64 {
        let mut m: f64 = 0.0;
        for (alpha, c) in &self.coeffs {
            m = m.max((c - other.coeff(alpha)).norm());
        }
        for (alpha, c) in &other.coeffs {
            if !self.coeffs.contains_key(alpha) {
                m = m.max(c.norm());
            }
        }
        m
    }

    /// `max_alpha |c_alpha|`.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Add for &PolyFn {
    type Output = PolyFn;
    fn add(self, rhs: &PolyFn) -> PolyFn {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
    }
}

impl std::ops::Sub for &PolyFn {
    type Output = PolyFn;
    fn sub(self, rhs: &PolyFn) -> PolyFn {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
    }
}

impl std::ops::Neg for &PolyFn {
    type Output = PolyFn;
    fn neg(self) -> PolyFn {
        self.scale_re(-1.0)
    }
}

/// `R^j (f g)` expanded by the Leibniz rule `sum_k C(j,k) R^k f R^{j-k} g`.
pub fn leibniz_rj(f: &PolyFn, g: &PolyFn, j: u32) -> Result<PolyFn> {
    let mut out = PolyFn::zero(f.n(), f.cap().max(g.cap())).with_policy(f.policy);
    let mut binom = 1.0;
    for k in 0..=j {
        let term = f.radial_derivative(k).mul(&g.radial_derivative(j - k))?;
        out = out.axpy(Complex64::new(binom, 0.0), &term);
        binom = binom * f64::from(j - k) / f64::from(k + 1);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyJson {
    n: usize,
    cap: u32,
    terms: Vec<TermJson>,
}

impl Serialize for PolyFn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolyJson {
            n: self.n,
            cap: self.cap,
            terms: self
                .coeffs
                .iter()
                .map(|(alpha, c)| TermJson {
                    alpha: alpha.0.clone(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyFn {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        PolyFn::from_terms(
            raw.n,
            raw.cap,
            raw.terms
                .into_iter()
                .map(|t| (MultiIndex(t.alpha), Complex64::new(t.re, t.im))),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn graded_order() {
        let idx = indices_up_to(2, 2);
        let want: Vec<MultiIndex> = [[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|v| mi(v))
            .collect();
        assert_eq!(idx, want);
        let mut sorted = idx.clone();
        sorted.sort();
        assert_eq!(sorted, want);
        assert_eq!(indices_up_to(3, 4).len(), 35);
    }

    #[test]
    fn eval_examples() {
        let f = PolyFn::monomial(4, mi(&[1, 1]), c(1.0));
        assert!((f.eval(&[c(0.5), c(0.5)]) - c(0.25)).norm() < 1e-15);
        let one = PolyFn::constant(2, 4, c(1.0));
        assert_eq!(one.eval(&[c(0.3), Complex64::new(0.1, -0.7)]), c(1.0));
        let geo = PolyFn::from_terms(2, 3, (0..=3).map(|k| (mi(&[k, 0]), c(0.5f64.powi(k as i32)))))
            .unwrap();
        assert_eq!(geo.eval(&[c(0.0), c(0.0)]), c(1.0));
    }

    #[test]
    fn mul_examples() {
        let z1 = PolyFn::coordinate(2, 2, 0);
        let z2 = PolyFn::coordinate(2, 2, 1);
        let p = z1.mul(&z2).unwrap();
        assert!(!p.is_truncated());
        assert_eq!(p.coeff(&mi(&[1, 1])), c(1.0));

        let z1z2 = p.clone();
        let q = z1.mul(&z1z2).unwrap();
        assert!(q.is_zero());
        assert!(q.is_truncated());

        let one = PolyFn::constant(2, 2, c(1.0));
        let r = (&one + &z1).mul(&(&one - &z1)).unwrap();
        let want = PolyFn::from_terms(2, 2, [(mi(&[0, 0]), c(1.0)), (mi(&[2, 0]), c(-1.0))]).unwrap();
        assert_eq!(r.max_coeff_diff(&want), 0.0);
    }

    #[test]
    fn strict_mode_rejects_truncation() {
        let z1 = PolyFn::coordinate(1, 1, 0).with_policy(TruncationPolicy::strict());
        let err = z1.mul(&z1).unwrap_err();
        assert_eq!(err.kind, ErrorKind::DegreeOverflow);
    }

    #[test]
    fn radial_derivative_examples() {
        assert!(PolyFn::constant(2, 4, c(3.0)).radial_derivative(1).is_zero());
        let f = PolyFn::monomial(4, mi(&[2, 1]), c(1.0));
        assert_eq!(f.radial_derivative(1).coeff(&mi(&[2, 1])), c(3.0));
        assert_eq!(f.radial_derivative(2).coeff(&mi(&[2, 1])), c(9.0));
    }

    #[test]
    fn bracket_shift_examples() {
        let f = PolyFn::monomial(4, mi(&[1, 1]), c(1.0));
        assert_eq!(f.bracket_shift(0.0), f);
        assert!((f.bracket_shift(0.5).coeff(&mi(&[1, 1])).re - 3f64.sqrt()).abs() < 1e-15);
        let one = PolyFn::constant(2, 4, c(1.0));
        assert_eq!(one.bracket_shift(1.0), one);
    }

    #[test]
    fn leibniz_examples() {
        let z1 = PolyFn::coordinate(2, 4, 0);
        let z2 = PolyFn::coordinate(2, 4, 1);
        assert_eq!(leibniz_rj(&z1, &z2, 1).unwrap().coeff(&mi(&[1, 1])), c(2.0));
        assert_eq!(leibniz_rj(&z1, &z1, 2).unwrap().coeff(&mi(&[2, 0])), c(4.0));
        let g = PolyFn::from_terms(2, 4, [(mi(&[1, 2]), c(2.0)), (mi(&[0, 1]), c(-1.0))]).unwrap();
        let one = PolyFn::constant(2, 4, c(1.0));
        assert_eq!(leibniz_rj(&one, &g, 3).unwrap(), g.radial_derivative(3));
    }

    #[test]
    fn pow_matches_repeated_mul() {
        let f = PolyFn::from_terms(2, 9, [(mi(&[0, 0]), c(0.5)), (mi(&[1, 0]), Complex64::new(0.2, 0.3)), (mi(&[0, 1]), c(-0.4))]).unwrap();
        let p3 = f.pow(3).unwrap();
        let m3 = f.mul(&f).unwrap().mul(&f).unwrap();
        assert!(p3.max_coeff_diff(&m3) < 1e-15);
        assert_eq!(f.pow(0).unwrap(), PolyFn::constant(2, 9, c(1.0)));
    }

    #[test]
    fn json_round_trip() {
        let f = PolyFn::from_terms(2, 5, [(mi(&[2, 1]), Complex64::new(1.5, -2.0)), (mi(&[0, 0]), c(1.0))]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"n":2,"cap":5,"terms":[{"alpha":[0,0],"re":1.0,"im":0.0},{"alpha":[2,1],"re":1.5,"im":-2.0}]}"#
        );
        let g: PolyFn = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    fn arb_poly(n: usize, cap: u32, max_deg: u32) -> impl Strategy<Value = PolyFn> {
        let idx = indices_up_to(n, max_deg);
        let k = idx.len();
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k).prop_map(move |v| {
            PolyFn::from_terms(
                n,
                cap,
                idx.iter().cloned().zip(v.into_iter().map(|(re, im)| Complex64::new(re, im))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn radial_derivative_is_linear(f in arb_poly(2, 8, 8), g in arb_poly(2, 8, 8), a in -2.0f64..2.0, b in -2.0f64..2.0, j in 0u32..=6) {
            let lhs = f.scale_re(a).axpy(c(b), &g).radial_derivative(j);
            let rhs = f.radial_derivative(j).scale_re(a).axpy(c(b), &g.radial_derivative(j));
            let scale = 1.0f64.max(lhs.max_coeff());
            prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12 * scale);
        }

        #[test]
        fn integer_shift_is_binomial(f in arb_poly(2, 8, 8), k in 0u32..=4) {
            let mut sum = PolyFn::zero(2, 8);
            let mut binom = 1.0;
            for i in 0..=k {
                sum = sum.axpy(c(binom), &f.radial_derivative(i));
                binom = binom * f64::from(k - i) / f64::from(i + 1);
            }
            let shifted = f.bracket_shift(f64::from(k));
            prop_assert!(shifted.max_coeff_diff(&sum) <= 1e-12 * 1.0f64.max(sum.max_coeff()));
        }

        #[test]
        fn leibniz_matches_product_rule(f in arb_poly(2, 10, 5), g in arb_poly(2, 10, 5), j in 0u32..=4) {
            let lhs = leibniz_rj(&f, &g, j).unwrap();
            let rhs = f.mul(&g).unwrap().radial_derivative(j);
            prop_assert!(!rhs.is_truncated());
            prop_assert!(lhs.max_coeff_diff(&rhs) <= 1e-12 * 1.0f64.max(rhs.max_coeff()));
        }

        #[test]
        fn product_evaluates_pointwise(f in arb_poly(2, 10, 5), g in arb_poly(2, 10, 5), x in -0.7f64..0.7, y in -0.7f64..0.7) {
            let z = [Complex64::new(x, 0.1), Complex64::new(0.2, y)];
            let lhs = f.mul(&g).unwrap().eval(&z);
            let rhs = f.eval(&z) * g.eval(&z);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * 1.0f64.max(rhs.norm()));
        }
    }
}
