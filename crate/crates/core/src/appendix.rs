//! Exact coefficient tables for radial derivatives of products `gamma^l h`.
//!
//! Notation: `R` is the radial derivative, `h^{(j)} = R^j h`, `gamma' = R gamma`,
//! and `l^{(k)} = l (l-1) ... (l-k+1)` is the falling factorial.
//!
//! * Recurrence: `F_{0,0} = h`, `F_{0,j+1} = R F_{0,j}`,
//!   `F_{k,j+1} = gamma' F_{k-1,j} + R F_{k,j}`, `F_{j+1,j+1} = gamma' F_{j,j}`,
//!   and then `R^j(gamma^l h) = sum_k l^{(k)} gamma^{l-k} F_{k,j}`.
//! * Expansion: `F_{k,j} = sum_i alpha^{(k)}_i gamma^{k-i} R^j(gamma^i h)` with
//!   rational `alpha^{(k)}` independent of `j`.
//! * Exclusion: `R^j(gamma^l h) = sum_{q <= min(l,j)} A_q gamma^{l-q} R^j(gamma^q h)`.
//! * Inclusion: `R^j(gamma^l) h = sum_q A_{j,q} R^q(gamma^l R^{j-q} h)`.
//!
//! Tables are computed two independent ways (recurrence and a linear solve
//! over differential monomials) in exact rational arithmetic, and checked on
//! random polynomials in floating point.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, ToolkitError};
use crate::poly::{indices_up_to, PolyFn};

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Falling factorial `l^{(k)}`.
pub fn falling(l: u32, k: u32) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (BigInt::from(l) - BigInt::from(i)))
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial(n: u32, k: u32) -> BigInt {
    falling(n, k) / factorial(k)
}

/// Expansion coefficients `alpha^{(k)}_i`, `i = 0..=k`, for `k = 0..=k_max`.
///
/// `alpha^{(k+1)}_i = [delta_{i,k+1} - sum_{m=i}^{k} (k+1)^{(m)} alpha^{(m)}_i] / (k+1)!`.
pub fn expansion_coeffs(k_max: u32) -> Vec<Vec<BigRational>> {
    let mut out: Vec<Vec<BigRational>> = vec![vec![BigRational::one()]];
    for k in 0..k_max {
        let kp = k + 1;
        let fact = BigRational::from_integer(factorial(kp));
        let row = (0..=kp as usize)
            .map(|i| {
                let mut v = if i == kp as usize { BigRational::one() } else { BigRational::zero() };
                for m in i..=k as usize {
                    v -= BigRational::from_integer(falling(kp, m as u32)) * &out[m][i];
                }
                v / &fact
            })
            .collect();
        out.push(row);
    }
    out
}

/// Expansion rows `alpha^{(k)}` of `F_{k,j}` for `k <= min(k_max, j)`.
pub fn f_table(j: u32, k_max: u32) -> Vec<Vec<BigRational>> {
    expansion_coeffs(k_max.min(j))
}

/// Exclusion coefficients `(A_0, ..., A_m)`, `m = min(l, j)`.
///
/// For `l <= j` the identity is trivial and `A_q = delta_{ql}`.
pub fn exclusion_coeffs(j: u32, l: u32) -> Vec<BigRational> {
    let m = l.min(j);
    if l <= j {
        return (0..=m).map(|q| if q == l { BigRational::one() } else { BigRational::zero() }).collect();
    }
    let alpha = expansion_coeffs(m);
    (0..=m as usize)
        .map(|q| {
            (q..=m as usize).fold(BigRational::zero(), |acc, k| {
                acc + BigRational::from_integer(falling(l, k as u32)) * &alpha[k][q]
            })
        })
        .collect()
}

/// A differential monomial `gamma^{l - t} prod_i R^{parts_i} gamma * R^{k_h} h`
/// with `t = parts.len()` and `parts` sorted descending, all positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct DiffMonomial {
    parts: Vec<u32>,
    k_h: u32,
}

fn partitions(total: u32, max_part: u32, max_len: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    out.push(prefix.clone());
    if prefix.len() == max_len {
        return;
    }
    for part in (1..=max_part.min(total)).rev() {
        prefix.push(part);
        partitions(total - part, part, max_len, prefix, out);
        prefix.pop();
    }
}

/// Coefficient of `key` in `gamma^{l-q} R^j(gamma^q h)` (independent of `l`).
fn monomial_coeff(key: &DiffMonomial, q: u32, j: u32) -> BigRational {
    let t = key.parts.len() as u32;
    if t > q {
        return BigRational::zero();
    }
    let mut mult: BTreeMap<u32, u32> = BTreeMap::new();
    for p in &key.parts {
        *mult.entry(*p).or_default() += 1;
    }
    let choose = BigRational::new(
        falling(q, t),
        mult.values().fold(BigInt::one(), |acc, m| acc * factorial(*m)),
    );
    let den = key
        .parts
        .iter()
        .fold(factorial(key.k_h), |acc, p| acc * factorial(*p));
    choose * BigRational::new(factorial(j), den)
}

/// Exclusion coefficients by solving `sum_q A_q c_q(P) = c_l(P)` over all
/// differential monomials `P`, in exact arithmetic.
pub fn exclusion_by_linear_solve(j: u32, l: u32) -> Result<Vec<BigRational>> {
    let m = l.min(j);
    let mut keys = Vec::new();
    let mut parts = Vec::new();
    partitions(j, j, l as usize, &mut Vec::new(), &mut parts);
    for p in parts {
        let used: u32 = p.iter().sum();
        keys.push(DiffMonomial { parts: p, k_h: j - used });
    }
    let rows: Vec<(Vec<BigRational>, BigRational)> = keys
        .iter()
        .map(|key| {
            (
                (0..=m).map(|q| monomial_coeff(key, q, j)).collect(),
                monomial_coeff(key, l, j),
            )
        })
        .collect();
    solve_exact(rows, m as usize + 1)
}

/// Exact least-squares-free solve of a consistent overdetermined system.
fn solve_exact(mut rows: Vec<(Vec<BigRational>, BigRational)>, unknowns: usize) -> Result<Vec<BigRational>> {
    let mut pivot_rows = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i].0[col].is_zero()) else {
            return Err(ToolkitError::singular(format!("coefficient system is rank deficient at column {col}")));
        };
        rows.swap(r, p);
        let (pr, pb) = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row.0[col].is_zero() {
                let f = &row.0[col] / &pr[col];
                for c in 0..unknowns {
                    let sub = &f * &pr[c];
                    row.0[c] -= sub;
                }
                row.1 -= &f * &pb;
            }
        }
        pivot_rows.push(r);
        r += 1;
    }
    if rows[r..].iter().any(|row| !row.1.is_zero()) {
        return Err(ToolkitError::singular("coefficient system is inconsistent"));
    }
    Ok((0..unknowns).map(|c| &rows[pivot_rows[c]].1 / &rows[pivot_rows[c]].0[c]).collect())
}

/// Inclusion coefficients `(A_{j,0}, ..., A_{j,j})` by the elimination
/// `A_{j,j} = 1`, `A_{j,m} = -sum_{q=m}^{j-1} C(j,q) A_{q,m}`.
pub fn inclusion_table(j_max: u32) -> Vec<Vec<BigRational>> {
    let mut table: Vec<Vec<BigRational>> = Vec::new();
    for j in 0..=j_max {
        let row = (0..=j as usize)
            .map(|m| {
                if m == j as usize {
                    return BigRational::one();
                }
                let mut v = BigRational::zero();
                for q in m..j as usize {
                    v -= BigRational::from_integer(binomial(j, q as u32)) * &table[q][m];
                }
                v
            })
            .collect();
        table.push(row);
    }
    table
}

pub fn inclusion_coeffs(j: u32) -> Vec<BigRational> {
    inclusion_table(j).pop().expect("row j exists")
}

/// `(-1)^{j-q} C(j, q)`.
pub fn signed_binomial_row(j: u32) -> Vec<BigRational> {
    (0..=j)
        .map(|q| {
            let b = BigRational::from_integer(binomial(j, q));
            if (j - q) % 2 == 0 { b } else { -b }
        })
        .collect()
}

/// Checks that `l -> A_q(j, l)` is a polynomial of degree at most `j` on
/// `l = j..=j + extra`: a degree-`j` interpolant through the first `j + 1`
/// values reproduces the rest exactly.
pub fn exclusion_is_polynomial_in_l(j: u32, extra: u32) -> bool {
    let ls: Vec<u32> = (j..=j + extra).collect();
    let tables: Vec<Vec<BigRational>> = ls.iter().map(|&l| exclusion_coeffs(j, l)).collect();
    let nodes = &ls[..=j as usize];
    (0..=j as usize).all(|q| {
        ls.iter().zip(&tables).skip(j as usize + 1).all(|(&x, t)| {
            let mut val = BigRational::zero();
            for (a, &xa) in nodes.iter().enumerate() {
                let mut basis = BigRational::one();
                for &xb in nodes.iter().filter(|&&xb| xb != xa) {
                    basis *= int(i64::from(x) - i64::from(xb)) / int(i64::from(xa) - i64::from(xb));
                }
                val += basis * &tables[a][q];
            }
            val == t[q]
        })
    })
}

/// All tables for `j <= j_max`, `l <= l_max`.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    pub exclusion: BTreeMap<(u32, u32), Vec<BigRational>>,
    pub inclusion: BTreeMap<u32, Vec<BigRational>>,
    /// `alpha^{(k)}` rows of the expansion of `F_{k,j}`.
    pub recurrence: BTreeMap<u32, Vec<BigRational>>,
}

impl CoeffTable {
    pub fn build(j_max: u32, l_max: u32) -> Self {
        let mut exclusion = BTreeMap::new();
        for j in 0..=j_max {
            for l in 0..=l_max {
                exclusion.insert((j, l), exclusion_coeffs(j, l));
            }
        }
        let inclusion = inclusion_table(j_max).into_iter().enumerate().map(|(j, r)| (j as u32, r)).collect();
        let recurrence = expansion_coeffs(j_max).into_iter().enumerate().map(|(k, r)| (k as u32, r)).collect();
        Self {
            exclusion,
            inclusion,
            recurrence,
        }
    }

    /// Exclusion rows as CSV `j,l,q,numerator,denominator`.
    pub fn exclusion_csv(&self) -> String {
        let mut out = String::from("j,l,q,numerator,denominator\n");
        for ((j, l), row) in &self.exclusion {
            for (q, a) in row.iter().enumerate() {
                out.push_str(&format!("{j},{l},{q},{},{}\n", a.numer(), a.denom()));
            }
        }
        out
    }

    /// Inclusion rows as CSV with the same columns and an empty `l`.
    pub fn inclusion_csv(&self) -> String {
        let mut out = String::from("j,l,q,numerator,denominator\n");
        for (j, row) in &self.inclusion {
            for (q, a) in row.iter().enumerate() {
                out.push_str(&format!("{j},,{q},{},{}\n", a.numer(), a.denom()));
            }
        }
        out
    }

    /// Whether the recurrence and linear-solve paths agree on every exclusion cell.
    pub fn paths_agree(&self) -> Result<bool> {
        for ((j, l), row) in &self.exclusion {
            if exclusion_by_linear_solve(*j, *l)? != *row {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn sums_to_one(&self) -> bool {
        self.exclusion
            .values()
            .all(|row| row.iter().fold(BigRational::zero(), |a, b| a + b).is_one())
    }
}

/// Row as `[numerator, denominator]` strings.
pub fn rational_strings(row: &[BigRational]) -> Vec<[String; 2]> {
    row.iter().map(|a| [a.numer().to_string(), a.denom().to_string()]).collect()
}

/// Row as `(numerator, denominator)` machine integers, if they fit.
pub fn rational_i64(row: &[BigRational]) -> Option<Vec<(i64, i64)>> {
    row.iter()
        .map(|a| Some((a.numer().to_i64()?, a.denom().to_i64()?)))
        .collect()
}

fn to_c(a: &BigRational) -> Complex64 {
    Complex64::new(a.to_f64().unwrap_or(f64::NAN), 0.0)
}

/// `F_{k,j}` for `k <= j <= j_max` on concrete polynomials.
pub fn f_polys(gamma: &PolyFn, h: &PolyFn, j_max: u32) -> Result<BTreeMap<(u32, u32), PolyFn>> {
    let gp = gamma.radial_derivative(1);
    let mut f = BTreeMap::new();
    f.insert((0, 0), h.clone());
    for j in 0..j_max {
        f.insert((0, j + 1), f[&(0, j)].radial_derivative(1));
        for k in 1..=j {
            let v = &gp.mul(&f[&(k - 1, j)])? + &f[&(k, j)].radial_derivative(1);
            f.insert((k, j + 1), v);
        }
        f.insert((j + 1, j + 1), gp.mul(&f[&(j, j)])?);
    }
    Ok(f)
}

fn rel_residual(lhs: &PolyFn, rhs: &PolyFn) -> f64 {
    lhs.max_coeff_diff(rhs) / lhs.max_coeff().max(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub max_residual: f64,
    pub exclusion_residual: f64,
    pub inclusion_residual: f64,
    pub recurrence_residual: f64,
    pub expansion_residual: f64,
    pub trials: usize,
    pub cap: u32,
}

/// Degrees of the random `gamma` and `h` used by [`verify_identities`].
pub const GAMMA_DEGREE: u32 = 2;
pub const H_DEGREE: u32 = 2;

fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32, cap: u32) -> Result<PolyFn> {
    PolyFn::from_terms(
        n,
        cap,
        indices_up_to(n, deg)
            .into_iter()
            .map(|a| (a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))),
    )
}

/// Brute-force check of all identities on seeded random `gamma`, `h` in two
/// variables, with a cap that rules out truncation.
pub fn verify_identities(j_max: u32, l_max: u32, trials: usize, seed: u64) -> Result<IdentityReport> {
    let cap = GAMMA_DEGREE * l_max + H_DEGREE;
    let table = CoeffTable::build(j_max, l_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut exc, mut inc, mut rec, mut expn) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..trials {
        let gamma = random_poly(&mut rng, 2, GAMMA_DEGREE, cap)?;
        let h = random_poly(&mut rng, 2, H_DEGREE, cap)?;
        let gpow: Vec<PolyFn> = (0..=l_max).map(|l| gamma.pow(l)).collect::<Result<_>>()?;
        let gh: Vec<PolyFn> = gpow.iter().map(|g| g.mul(&h)).collect::<Result<_>>()?;
        if gh.iter().any(PolyFn::is_truncated) {
            return Err(ToolkitError::overflow("identity check would truncate"));
        }
        let fs = f_polys(&gamma, &h, j_max)?;
        for j in 0..=j_max {
            for l in 0..=l_max {
                let lhs = gh[l as usize].radial_derivative(j);
                let row = &table.exclusion[&(j, l)];
                let mut rhs = PolyFn::zero(2, cap);
                for (q, a) in row.iter().enumerate() {
                    let t = gpow[(l as usize) - q].mul(&gh[q].radial_derivative(j))?;
                    rhs = rhs.axpy(to_c(a), &t);
                }
                exc = exc.max(rel_residual(&lhs, &rhs));

                let mut rhs = PolyFn::zero(2, cap);
                for k in 0..=l.min(j) {
                    let t = gpow[(l - k) as usize].mul(&fs[&(k, j)])?;
                    rhs = rhs.axpy(Complex64::new(falling(l, k).to_f64().unwrap_or(f64::NAN), 0.0), &t);
                }
                rec = rec.max(rel_residual(&lhs, &rhs));

                let lhs = gpow[l as usize].radial_derivative(j).mul(&h)?;
                let mut rhs = PolyFn::zero(2, cap);
                for (q, a) in table.inclusion[&j].iter().enumerate() {
                    let t = gpow[l as usize].mul(&h.radial_derivative(j - q as u32))?.radial_derivative(q as u32);
                    rhs = rhs.axpy(to_c(a), &t);
                }
                inc = inc.max(rel_residual(&lhs, &rhs));
            }
            for k in 0..=j.min(l_max) {
                let mut rhs = PolyFn::zero(2, cap);
                for (i, a) in table.recurrence[&k].iter().enumerate() {
                    let t = gpow[k as usize - i].mul(&gh[i].radial_derivative(j))?;
                    rhs = rhs.axpy(to_c(a), &t);
                }
                expn = expn.max(rel_residual(&fs[&(k, j)], &rhs));
            }
        }
    }
    Ok(IdentityReport {
        max_residual: exc.max(inc).max(rec).max(expn),
        exclusion_residual: exc,
        inclusion_residual: inc,
        recurrence_residual: rec,
        expansion_residual: expn,
        trials,
        cap,
    })
}

/// `max |a - b|` over two rational rows, as a float (0 when equal).
pub fn row_distance(a: &[BigRational], b: &[BigRational]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs().to_f64().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}
