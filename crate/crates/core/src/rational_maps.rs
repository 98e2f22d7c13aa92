//! Rational developing maps for triples of integers, and the Catalan count of
//! rational maps with prescribed simple critical points.
//!
//! With local degrees `θ1, θ2, θ3` at `0, 1, ∞` and `d = (θ1+θ2+θ3−1)/2`, the
//! map is sought as `f = z^{θ1} P / Q` with `deg P = d − θ1`, `deg Q = d − θ3`
//! and `f(1) = 1`. Requiring `z^{θ1}P − Q` to vanish to order `θ2` at `1` is a
//! homogeneous linear system with a one-dimensional kernel, solved exactly.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::angles::{all_integer_condition, AngleTriple};
use crate::rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalMapError {
    #[error("triple is not made of integers")]
    NotInteger,
    #[error("no rational map has local degrees {0:?} at 0, 1, ∞")]
    NotAdmissible([i64; 3]),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("degree must be at least 1")]
    InvalidDegree,
}

/// `f = N/Q`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

/// A rational map with integer coefficients, as produced by [`construct`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerMap {
    pub numerator: Vec<BigInt>,
    pub denominator: Vec<BigInt>,
}

impl IntegerMap {
    pub fn to_complex(&self) -> RationalMap {
        let conv = |v: &[BigInt]| {
            v.iter()
                .map(|c| Complex64::new(c.to_f64().unwrap_or(f64::NAN), 0.0))
                .collect()
        };
        RationalMap {
            numerator: conv(&self.numerator),
            denominator: conv(&self.denominator),
        }
    }
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c)
}

fn trimmed_degree(coeffs: &[Complex64], tol: f64) -> Option<usize> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    coeffs.iter().rposition(|c| c.norm() > tol * scale)
}

/// Coefficients of `p(z + s)`.
fn taylor_shift(coeffs: &[Complex64], s: Complex64) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    let n = out.len();
    for i in 0..n {
        for j in (i..n.saturating_sub(1)).rev() {
            let next = out[j + 1];
            out[j] += s * next;
        }
    }
    out
}

fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); (a.len() + b.len()).saturating_sub(1)];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn derivative(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

impl RationalMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner(&self.numerator, z) / horner(&self.denominator, z)
    }

    pub fn degree(&self) -> usize {
        let n = trimmed_degree(&self.numerator, 1e-14).unwrap_or(0);
        let q = trimmed_degree(&self.denominator, 1e-14).unwrap_or(0);
        n.max(q)
    }

    /// Numerator `N'Q − NQ'` of the derivative.
    pub fn wronskian(&self) -> Vec<Complex64> {
        let a = mul(&derivative(&self.numerator), &self.denominator);
        let b = mul(&self.numerator, &derivative(&self.denominator));
        let len = a.len().max(b.len());
        (0..len)
            .map(|k| {
                a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default()
            })
            .collect()
    }
}

/// `d = (θ1 + θ2 + θ3 − 1)/2` for an admissible integer triple.
pub fn degree_for(t: &AngleTriple) -> Result<i64, RationalMapError> {
    let ints = integer_entries(t)?;
    if !all_integer_condition(ints) {
        return Err(RationalMapError::NotAdmissible(ints));
    }
    Ok((ints.iter().sum::<i64>() - 1) / 2)
}

fn integer_entries(t: &AngleTriple) -> Result<[i64; 3], RationalMapError> {
    let mut out = [0; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = rational::as_integer(&t.theta(i)).ok_or(RationalMapError::NotInteger)?;
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Kernel of an exact matrix when it is one-dimensional.
fn one_dim_kernel(mut m: Vec<Vec<BigRational>>, cols: usize) -> Result<Vec<BigRational>, RationalMapError> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..cols {
                    let delta = &factor * &m[row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    if free.len() != 1 {
        return Err(RationalMapError::SolveFailed(format!(
            "kernel has dimension {}",
            free.len()
        )));
    }
    let mut x = vec![BigRational::zero(); cols];
    x[free[0]] = BigRational::one();
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = -m[r][free[0]].clone();
    }
    Ok(x)
}

/// The rational map with local degrees `θ1, θ2, θ3` at `0, 1, ∞`, normalized
/// by `f(0) = 0`, `f(1) = 1`, `f(∞) = ∞`, with integer coefficients.
pub fn construct_integer(t: &AngleTriple) -> Result<IntegerMap, RationalMapError> {
    let d = degree_for(t)?;
    let [t1, t2, t3] = integer_entries(t)?;
    let (np, nq) = ((d - t1 + 1) as usize, (d - t3 + 1) as usize);
    let (t1, t2) = (t1 as usize, t2 as usize);
    // Row k: k-th Taylor coefficient at 1 of z^{θ1}P − Q.
    let rows: Vec<Vec<BigRational>> = (0..t2)
        .map(|k| {
            let mut row = Vec::with_capacity(np + nq);
            row.extend((0..np).map(|i| BigRational::from_integer(binomial(t1 + i, k))));
            row.extend((0..nq).map(|j| BigRational::from_integer(-binomial(j, k))));
            row
        })
        .collect();
    let x = one_dim_kernel(rows, np + nq)?;
    let lcm = x
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut ints: Vec<BigInt> = x.iter().map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, v| acc.gcd(v));
    if !g.is_zero() {
        for v in ints.iter_mut() {
            *v = &*v / &g;
        }
    }
    let (p, q) = ints.split_at(np);
    if q[0].is_zero() || p[0].is_zero() || p[np - 1].is_zero() || q[nq - 1].is_zero() {
        return Err(RationalMapError::SolveFailed("degenerate kernel vector".into()));
    }
    let mut numerator = vec![BigInt::zero(); t1];
    numerator.extend_from_slice(p);
    let mut denominator = q.to_vec();
    // Make f(1) = 1 with a positive denominator sum.
    let q1: BigInt = denominator.iter().sum();
    if q1.is_zero() {
        return Err(RationalMapError::SolveFailed("f(1) is infinite".into()));
    }
    if q1.is_negative() {
        numerator.iter_mut().for_each(|c| *c = -&*c);
        denominator.iter_mut().for_each(|c| *c = -&*c);
    }
    Ok(IntegerMap {
        numerator,
        denominator,
    })
}

pub fn construct(t: &AngleTriple) -> Result<RationalMap, RationalMapError> {
    Ok(construct_integer(t)?.to_complex())
}

/// Order of vanishing at `p` of a polynomial, relative to tolerance `tol`.
fn order_at(coeffs: &[Complex64], p: Complex64, tol: f64) -> usize {
    let shifted = taylor_shift(coeffs, p);
    let scale = shifted.iter().map(|c| c.norm()).fold(0.0, f64::max);
    shifted
        .iter()
        .position(|c| c.norm() > tol * scale)
        .unwrap_or(shifted.len())
}

/// Whether `f` has local degrees `θ1, θ2, θ3` at `0, 1, ∞` and no other
/// critical points, to tolerance `1e−8`.
pub fn verify(f: &RationalMap, t: &AngleTriple) -> bool {
    verify_with(f, t, 1e-8)
}

pub fn verify_with(f: &RationalMap, t: &AngleTriple, tol: f64) -> bool {
    let Ok(d) = degree_for(t) else {
        return false;
    };
    let Ok([t1, t2, t3]) = integer_entries(t) else {
        return false;
    };
    if f.degree() as i64 != d {
        return false;
    }
    // A common factor at 0 or 1 would hide itself in the Wronskian.
    for p in [Complex64::zero(), Complex64::one()] {
        let scale = 1.0 + f.numerator.iter().chain(&f.denominator).map(|c| c.norm()).fold(0.0, f64::max);
        if horner(&f.numerator, p).norm() <= tol * scale && horner(&f.denominator, p).norm() <= tol * scale {
            return false;
        }
    }
    let w = f.wronskian();
    let Some(deg_w) = trimmed_degree(&w, tol) else {
        return false;
    };
    let at0 = order_at(&w, Complex64::zero(), tol) as i64;
    let at1 = order_at(&w, Complex64::one(), tol) as i64;
    let at_inf = 2 * d - 2 - deg_w as i64;
    at0 == t1 - 1 && at1 == t2 - 1 && at_inf == t3 - 1 && deg_w as i64 == at0 + at1
}

fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    (a - c) * (b - d) / ((a - d) * (b - c))
}

/// Whether `g = M∘f` for a Möbius map `M`, judged by cross-ratios of values
/// at seeded random quadruples of points, to relative tolerance `tol`.
pub fn mobius_equivalent(f: &RationalMap, g: &RationalMap, seed: u64, tol: f64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    for _ in 0..4 {
        let zs = [point(), point(), point(), point()];
        let cf = cross_ratio(f.eval(zs[0]), f.eval(zs[1]), f.eval(zs[2]), f.eval(zs[3]));
        let cg = cross_ratio(g.eval(zs[0]), g.eval(zs[1]), g.eval(zs[2]), g.eval(zs[3]));
        if !cf.is_finite() || !cg.is_finite() || (cf - cg).norm() > tol * (1.0 + cf.norm()) {
            return false;
        }
    }
    true
}

/// `u_d = C(2d−2, d−1)/d`, the number of rational maps of degree `d` with
/// `2d − 2` prescribed generic critical points, up to Möbius equivalence.
pub fn catalan_count(d: u64) -> Result<BigUint, RationalMapError> {
    if d == 0 {
        return Err(RationalMapError::InvalidDegree);
    }
    let n = 2 * d - 2;
    let k = d - 1;
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    Ok(acc / BigUint::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri(a: i64, b: i64, c: i64) -> AngleTriple {
        AngleTriple::from_ratios([(a, 1), (b, 1), (c, 1)]).unwrap()
    }

    fn poly(c: &[f64]) -> Vec<Complex64> {
        c.iter().map(|&x| Complex64::new(x, 0.0)).collect()
    }

    #[test]
    fn degrees() {
        assert_eq!(degree_for(&tri(1, 1, 1)), Ok(1));
        assert_eq!(degree_for(&tri(1, 2, 2)), Ok(2));
        assert_eq!(degree_for(&tri(2, 3, 4)), Ok(4));
        assert_eq!(degree_for(&tri(2, 2, 2)), Err(RationalMapError::NotAdmissible([2, 2, 2])));
        let half = AngleTriple::from_ratios([(1, 2), (1, 1), (1, 1)]).unwrap();
        assert_eq!(degree_for(&half), Err(RationalMapError::NotInteger));
    }

    #[test]
    fn small_maps() {
        let id = construct_integer(&tri(1, 1, 1)).unwrap();
        assert_eq!(id.numerator, vec![BigInt::zero(), BigInt::one()]);
        assert_eq!(id.denominator, vec![BigInt::one()]);
        let sq = construct_integer(&tri(1, 2, 2)).unwrap();
        let b = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(sq.numerator, b(&[0, 2, -1]));
        assert_eq!(sq.denominator, b(&[1]));
    }

    #[test]
    fn verify_examples() {
        let id = RationalMap { numerator: poly(&[0.0, 1.0]), denominator: poly(&[1.0]) };
        assert!(verify(&id, &tri(1, 1, 1)));
        let sq = RationalMap { numerator: poly(&[1.0, -2.0, 1.0]), denominator: poly(&[1.0]) };
        assert!(verify(&sq, &tri(1, 2, 2)));
        assert!(!verify(&sq, &tri(2, 2, 1)));
        // Extra critical points: z³ − 3z has critical points ±1 and ∞.
        let cubic = RationalMap { numerator: poly(&[0.0, -3.0, 0.0, 1.0]), denominator: poly(&[1.0]) };
        assert!(!verify(&cubic, &tri(1, 2, 3)));
    }

    #[test]
    fn constructed_maps_verify() {
        for (a, b, c) in [(3, 1, 3), (2, 3, 4), (3, 3, 3), (1, 4, 4), (5, 3, 5)] {
            let t = tri(a, b, c);
            let f = construct(&t).unwrap();
            assert!(verify(&f, &t), "({a},{b},{c})");
            assert!((f.eval(Complex64::one()) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn mobius_classes() {
        let f = construct(&tri(1, 2, 2)).unwrap();
        let g = RationalMap { numerator: poly(&[1.0, -2.0, 1.0]), denominator: poly(&[1.0]) };
        assert!(mobius_equivalent(&f, &g, 1, 1e-9));
        let h = RationalMap { numerator: poly(&[0.0, 0.0, 1.0]), denominator: poly(&[1.0]) };
        assert!(!mobius_equivalent(&f, &h, 1, 1e-9));
    }

    #[test]
    fn catalan_numbers() {
        let expect = [1u32, 1, 2, 5, 14, 42, 132, 429];
        for (d, e) in (1..=8).zip(expect) {
            assert_eq!(catalan_count(d).unwrap(), BigUint::from(e));
        }
        assert_eq!(catalan_count(0), Err(RationalMapError::InvalidDegree));
    }
}
