//! The hypergeometric equation `z(1−z)w'' + (c − (a+b+1)z)w' − ab·w = 0`
//! attached to a cone triple, its Frobenius series, the logarithm-free test
//! at integer cones, and numerical evaluation of solution bases.

pub mod continuation;
pub mod series;

use nalgebra::Matrix2;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::angles::AngleTriple;
use crate::rational::{self, Rational};

pub use continuation::{continue_along_path, ContinuationOptions};

pub type Mat2 = Matrix2<Complex64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypergeomError {
    #[error("recurrence is resonant at index {0}: the local solution carries a logarithm")]
    ResonantIndex(usize),
    #[error("cone parameter at the chosen singularity is not an integer")]
    NotInteger,
    #[error("evaluation point is a singular point of the equation")]
    Singular,
    #[error("series did not converge within {order} terms")]
    NoConvergence { order: usize },
    #[error("path passes within {clearance:.3e} of a singular point")]
    PathTooClose { clearance: f64 },
    #[error("step size underflow near z = {at}")]
    StepUnderflow { at: Complex64 },
    #[error("path does not start at the point of the initial fundamental matrix")]
    PathMismatch,
}

/// A singular point of the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Singularity {
    Zero,
    One,
    Infinity,
}

impl Singularity {
    pub const ALL: [Singularity; 3] = [Singularity::Zero, Singularity::One, Singularity::Infinity];

    /// Index of the cone parameter living at this point.
    pub fn index(&self) -> usize {
        match self {
            Singularity::Zero => 0,
            Singularity::One => 1,
            Singularity::Infinity => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// Parameters `(a, b, c)` of the hypergeometric equation.
///
/// The branch fixed here puts the exponent differences `θ1` at `0`, `θ2` at
/// `1` and `θ3` at `∞`: `1 − c = θ1`, `c − a − b = θ2`, `a − b = θ3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HypergeomParams {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
}

impl HypergeomParams {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Self {
        Self { a, b, c }
    }

    pub fn to_f64(&self) -> (f64, f64, f64) {
        (
            rational::to_f64(&self.a),
            rational::to_f64(&self.b),
            rational::to_f64(&self.c),
        )
    }

    /// Exponent differences at `0`, `1`, `∞`.
    pub fn exponent_differences(&self) -> [Rational; 3] {
        [
            Rational::one() - self.c,
            self.c - self.a - self.b,
            self.a - self.b,
        ]
    }
}

pub fn params_from_triple(t: &AngleTriple) -> HypergeomParams {
    let [t1, t2, t3] = t.as_array();
    let one = Rational::one();
    let two = Rational::from_integer(2);
    HypergeomParams {
        a: (one - t1 - t2 + t3) / two,
        b: (one - t1 - t2 - t3) / two,
        c: one - t1,
    }
}

/// Parameters for another sign choice `(±θ1, ±θ2, ±θ3)`; the projective
/// monodromy does not depend on it.
pub fn params_with_signs(t: &AngleTriple, signs: [i8; 3]) -> HypergeomParams {
    let s = |i: usize| {
        let v = t.theta(i);
        if signs[i] < 0 {
            -v
        } else {
            v
        }
    };
    let (t1, t2, t3) = (s(0), s(1), s(2));
    let one = Rational::one();
    let two = Rational::from_integer(2);
    HypergeomParams {
        a: (one - t1 - t2 + t3) / two,
        b: (one - t1 - t2 - t3) / two,
        c: one - t1,
    }
}

/// The exponent-zero Frobenius solution at `z = 0`, truncated at `order`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    pub exponent: Rational,
    pub coefficients: Vec<f64>,
    pub order: usize,
}

/// Coefficients from `[k(k−1) + ck]·a_k = [(k−1)(k−2) + (a+b+1)(k−1) + ab]·a_{k−1}`.
///
/// Returns `ResonantIndex(k)` when the left factor vanishes at `k` while the
/// right-hand side does not.
pub fn series_coefficients_exact(
    p: &HypergeomParams,
    order: usize,
) -> Result<Vec<BigRational>, HypergeomError> {
    let big = |q: Rational| BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()));
    let (a, b, c) = (big(p.a), big(p.b), big(p.c));
    let one = BigRational::one();
    let mut out = vec![one.clone()];
    for k in 1..=order {
        let kk = BigRational::from_integer(BigInt::from(k as i64));
        let km1 = &kk - &one;
        let left = &kk * &km1 + &c * &kk;
        let right_factor =
            &km1 * (&km1 - &one) + (&a + &b + &one) * &km1 + &a * &b;
        let right = right_factor * &out[k - 1];
        if left.is_zero() {
            if right.is_zero() {
                out.push(BigRational::zero());
            } else {
                return Err(HypergeomError::ResonantIndex(k));
            }
        } else {
            out.push(right / left);
        }
    }
    Ok(out)
}

pub fn series_coefficients(
    p: &HypergeomParams,
    order: usize,
) -> Result<SeriesSolution, HypergeomError> {
    let s = series::frobenius_series(p.a, p.b, p.c, order)?;
    Ok(SeriesSolution {
        exponent: Rational::zero(),
        coefficients: s.coefficients().iter().map(|c| c.re).collect(),
        order,
    })
}

/// Whether the local solutions at an integer cone are free of logarithms.
///
/// The singularity is first moved to `0` (`z ↦ 1 − z` for `1`, `z ↦ 1/z` for
/// `∞`), then some `n ∈ [1, N]` must satisfy `(n−1)(a+b+n−1) + ab = 0`.
pub fn log_free_at_singularity(t: &AngleTriple, which: Singularity) -> Result<bool, HypergeomError> {
    let relabeled = match which {
        Singularity::Zero => *t,
        Singularity::One => t.permuted([1, 0, 2]),
        Singularity::Infinity => t.permuted([2, 1, 0]),
    };
    let n = rational::as_integer(&relabeled.theta(0)).ok_or(HypergeomError::NotInteger)?;
    let p = params_from_triple(&relabeled);
    let sum = p.a + p.b;
    let prod = p.a * p.b;
    Ok((1..=n).any(|k| {
        let k1 = Rational::from_integer(k - 1);
        (k1 * (sum + k1) + prod).is_zero()
    }))
}

/// Values and derivatives of two solutions at `z`: `[[w1, w2], [w1', w2']]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    pub z: Complex64,
    pub m: Mat2,
}

impl FundamentalMatrix {
    pub fn identity_at(z: Complex64) -> Self {
        Self {
            z,
            m: Mat2::identity(),
        }
    }

    pub fn wronskian(&self) -> Complex64 {
        self.m.determinant()
    }
}

/// Radius inside which [`evaluate_basis`] sums the series directly.
const DIRECT_RADIUS: f64 = 0.9;

/// The Frobenius basis at `0`: the exponent-zero series and `z^{1−c}` times
/// the companion series, principal branch.
///
/// Points with `|z| ≥ 0.9` are reached by continuation from `1/2` through
/// `1/2 ± 0.6i` (upper route for `Im z ≥ 0`).
pub fn evaluate_basis(p: &HypergeomParams, z: Complex64) -> Result<FundamentalMatrix, HypergeomError> {
    if z.norm() < 1e-300 || (z - 1.0).norm() < 1e-300 {
        return Err(HypergeomError::Singular);
    }
    if z.norm() < DIRECT_RADIUS {
        return frobenius_basis_at_zero(p, z);
    }
    let base = Complex64::new(0.5, 0.0);
    let start = frobenius_basis_at_zero(p, base)?;
    let detour = Complex64::new(0.5, if z.im >= 0.0 { 0.6 } else { -0.6 });
    continue_along_path(p, &[base, detour, z], &start, &ContinuationOptions::default())
}

fn frobenius_basis_at_zero(p: &HypergeomParams, z: Complex64) -> Result<FundamentalMatrix, HypergeomError> {
    let one = Rational::one();
    let first = series::frobenius_series(p.a, p.b, p.c, series::MAX_ORDER)?;
    let second = series::frobenius_series(
        p.a - p.c + one,
        p.b - p.c + one,
        Rational::from_integer(2) - p.c,
        series::MAX_ORDER,
    )?;
    let (v1, d1) = first.eval(z)?;
    let (s2, ds2) = second.eval(z)?;
    let rho = rational::to_f64(&(one - p.c));
    let zr = (z.ln() * rho).exp();
    let v2 = zr * s2;
    let d2 = zr * (ds2 + s2 * rho / z);
    Ok(FundamentalMatrix {
        z,
        m: Mat2::new(v1, v2, d1, d2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn tri(r: [(i64, i64); 3]) -> AngleTriple {
        AngleTriple::from_ratios(r).unwrap()
    }

    #[test]
    fn params_for_examples() {
        let p = params_from_triple(&tri([(1, 2), (1, 2), (1, 2)]));
        assert_eq!((p.a, p.b, p.c), (q(1, 4), q(-1, 4), q(1, 2)));
        let p = params_from_triple(&tri([(1, 1), (1, 1), (1, 1)]));
        assert_eq!((p.a, p.b, p.c), (q(0, 1), q(-1, 1), q(0, 1)));
    }

    #[test]
    fn params_reproduce_exponent_differences() {
        for t in [
            tri([(1, 3), (5, 7), (9, 4)]),
            tri([(2, 1), (1, 2), (7, 10)]),
            tri([(13, 5), (1, 9), (1, 1)]),
        ] {
            let p = params_from_triple(&t);
            assert_eq!(p.exponent_differences(), t.as_array());
        }
    }

    /// Independent route: solve the three linear relations by Cramer's rule.
    #[test]
    fn params_agree_with_linear_solve() {
        let t = tri([(3, 7), (11, 5), (2, 9)]);
        let [t1, t2, t3] = t.as_array();
        // Unknowns (a, b, c):  -c = t1 - 1;  -a - b + c = t2;  a - b = t3
        let m = [[0, 0, -1], [-1, -1, 1], [1, -1, 0]].map(|r| r.map(Rational::from_integer));
        let rhs = [t1 - Rational::one(), t2, t3];
        let det3 = |m: &[[Rational; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det3(&m);
        let solve = |col: usize| {
            let mut mm = m;
            for r in 0..3 {
                mm[r][col] = rhs[r];
            }
            det3(&mm) / d
        };
        let p = params_from_triple(&t);
        assert_eq!((p.a, p.b, p.c), (solve(0), solve(1), solve(2)));
    }

    #[test]
    fn series_first_coefficients() {
        let p = params_from_triple(&tri([(1, 2), (1, 2), (1, 2)]));
        let exact = series_coefficients_exact(&p, 5).unwrap();
        assert_eq!(exact[0], BigRational::one());
        let ab_over_c = p.a * p.b / p.c;
        assert_eq!(ab_over_c, q(-1, 8));
        assert_eq!(
            exact[1],
            BigRational::new(BigInt::from(-1), BigInt::from(8))
        );
        let float = series_coefficients(&p, 5).unwrap();
        assert!((float.coefficients[1] + 0.125).abs() < 1e-16);
        for (e, f) in exact.iter().zip(&float.coefficients) {
            assert!((e.to_f64().unwrap() - f).abs() < 1e-15);
        }
    }

    #[test]
    fn resonant_index_at_integer_cone() {
        // c = −1, generic a, b: logarithmic at k = 2.
        let p = HypergeomParams::new(q(1, 3), q(1, 7), q(-1, 1));
        assert_eq!(
            series_coefficients_exact(&p, 10).unwrap_err(),
            HypergeomError::ResonantIndex(2)
        );
        assert_eq!(series_coefficients(&p, 10).unwrap_err(), HypergeomError::ResonantIndex(2));
        // (n−1)(a+b+n−1)+ab = 0 at n = 2 with a = −1.
        let p = HypergeomParams::new(q(-1, 1), q(1, 7), q(-1, 1));
        assert!(series_coefficients_exact(&p, 10).is_ok());
        // ... and at n = 1 with b = 0.
        let p = HypergeomParams::new(q(2, 3), q(0, 1), q(-1, 1));
        assert!(series_coefficients_exact(&p, 10).is_ok());
    }

    #[test]
    fn log_free_examples() {
        assert!(log_free_at_singularity(&tri([(2, 1), (1, 2), (1, 2)]), Singularity::Zero).unwrap());
        assert!(!log_free_at_singularity(&tri([(2, 1), (1, 2), (7, 10)]), Singularity::Zero).unwrap());
        assert!(log_free_at_singularity(&tri([(3, 1), (3, 2), (1, 2)]), Singularity::Zero).unwrap());
        assert_eq!(
            log_free_at_singularity(&tri([(1, 2), (1, 2), (1, 2)]), Singularity::Zero),
            Err(HypergeomError::NotInteger)
        );
        // Relabeling to the other singular points.
        assert!(log_free_at_singularity(&tri([(1, 2), (2, 1), (1, 2)]), Singularity::One).unwrap());
        assert!(log_free_at_singularity(&tri([(3, 2), (1, 2), (3, 1)]), Singularity::Infinity).unwrap());
        assert!(!log_free_at_singularity(&tri([(7, 10), (1, 2), (2, 1)]), Singularity::Infinity).unwrap());
    }

    #[test]
    fn log_free_matches_exact_series_existence() {
        // The logarithm-free test is the existence of the exponent-zero series.
        for n in 1..=4 {
            for t2 in [q(1, 2), q(3, 2), q(1, 3), q(7, 3), q(5, 4)] {
                for t3 in [q(1, 2), q(5, 2), q(2, 3), q(1, 4), q(11, 4)] {
                    let t = AngleTriple::new(Rational::from_integer(n), t2, t3).unwrap();
                    let p = params_from_triple(&t);
                    let series_ok = series_coefficients_exact(&p, n as usize + 2).is_ok();
                    assert_eq!(log_free_at_singularity(&t, Singularity::Zero).unwrap(), series_ok, "{t}");
                }
            }
        }
    }

    #[test]
    fn basis_is_independent_and_normalized() {
        let p = params_from_triple(&tri([(1, 2), (1, 2), (1, 2)]));
        let f = evaluate_basis(&p, Complex64::new(0.5, 0.0)).unwrap();
        assert!(f.wronskian().norm() > 1e-3);
        let f = evaluate_basis(&p, Complex64::new(1e-8, 0.0)).unwrap();
        assert!((f.m[(0, 0)] - 1.0).norm() < 1e-8);
        assert_eq!(evaluate_basis(&p, Complex64::new(0.0, 0.0)), Err(HypergeomError::Singular));
        assert_eq!(evaluate_basis(&p, Complex64::new(1.0, 0.0)), Err(HypergeomError::Singular));
    }

    #[test]
    fn basis_far_from_origin_goes_through_continuation() {
        let p = params_from_triple(&tri([(1, 3), (2, 5), (3, 4)]));
        let z = Complex64::new(0.6, 0.7);
        let direct = frobenius_basis_at_zero(&p, z).unwrap();
        let routed = evaluate_basis(&p, z).unwrap();
        assert!((direct.m - routed.m).norm() < 1e-9);
    }
}
