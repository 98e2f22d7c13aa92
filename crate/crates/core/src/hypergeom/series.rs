//! Power series for local solutions: Frobenius series at the singular points
//! and Taylor series at regular points.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::{HypergeomError, HypergeomParams};
use crate::rational::{self, Rational};

/// Coefficients are generated up to this order; evaluation fails beyond it.
pub const MAX_ORDER: usize = 4000;

/// Relative size below which trailing terms are treated as converged.
const TAIL_EPS: f64 = 1e-17;

/// Power series `Σ ck xᵏ` with precomputed coefficients.
#[derive(Debug, Clone)]
pub struct PowerSeries {
    coeffs: Vec<Complex64>,
    /// Index past the last nonzero coefficient when the series terminates.
    terminates_at: Option<usize>,
}

impl PowerSeries {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Value and derivative at `x`.
    pub fn eval(&self, x: Complex64) -> Result<(Complex64, Complex64), HypergeomError> {
        let mut value = Complex64::zero();
        let mut deriv = Complex64::zero();
        let mut power = Complex64::one(); // x^k
        let mut power_prev = Complex64::zero(); // x^(k-1)
        let mut scale: f64 = 0.0;
        let mut quiet = 0;
        let end = self.terminates_at.unwrap_or(self.coeffs.len());
        for (k, c) in self.coeffs[..end].iter().enumerate() {
            let term = c * power;
            value += term;
            if k > 0 {
                deriv += c * power_prev * k as f64;
            }
            let mag = term.norm();
            scale = scale.max(mag).max(value.norm());
            if k > 0 && mag <= TAIL_EPS * scale {
                quiet += 1;
                if quiet >= 4 {
                    return Ok((value, deriv));
                }
            } else {
                quiet = 0;
            }
            power_prev = power;
            power *= x;
            if !power.is_finite() {
                break;
            }
        }
        if self.terminates_at.is_some() {
            Ok((value, deriv))
        } else {
            Err(HypergeomError::NoConvergence { order: end })
        }
    }
}

/// Coefficients of the hypergeometric-type series `Σ ck xᵏ` with
/// `k(k−1+γ) ck = (k−1+α)(k−1+β) c(k−1)`, `c0 = 1`.
///
/// When `k − 1 + γ` vanishes at `k = N` the series exists only if the
/// right-hand side vanishes as well, which happens exactly when one of the
/// numerator factors is zero for some `k ≤ N`; the series then terminates
/// before `N` and the free coefficient at `N` is set to zero.
pub fn frobenius_series(
    alpha: Rational,
    beta: Rational,
    gamma: Rational,
    order: usize,
) -> Result<PowerSeries, HypergeomError> {
    let one = Rational::one();
    let positive_int = |q: Rational| -> Option<usize> {
        (q.is_integer() && q.is_positive()).then(|| q.to_integer() as usize)
    };
    let resonance = positive_int(one - gamma);
    let zero_at = [positive_int(one - alpha), positive_int(one - beta)]
        .into_iter()
        .flatten()
        .min();
    if let Some(n) = resonance {
        if zero_at.map_or(true, |z| z > n) {
            return Err(HypergeomError::ResonantIndex(n));
        }
    }
    let (a, b, g) = (
        rational::to_f64(&alpha),
        rational::to_f64(&beta),
        rational::to_f64(&gamma),
    );
    let mut coeffs = Vec::with_capacity(order + 1);
    coeffs.push(Complex64::one());
    let mut prev = 1.0f64;
    for k in 1..=order {
        let next = if zero_at.is_some_and(|z| k >= z) {
            0.0
        } else {
            let kf = k as f64;
            prev * (kf - 1.0 + a) * (kf - 1.0 + b) / (kf * (kf - 1.0 + g))
        };
        coeffs.push(Complex64::new(next, 0.0));
        prev = next;
    }
    Ok(PowerSeries {
        coeffs,
        terminates_at: zero_at,
    })
}

/// Taylor coefficients at a regular point `p` of the two solutions with
/// initial data `(w, w') = (1, 0)` and `(0, 1)`.
pub fn regular_series(
    params: &HypergeomParams,
    p: Complex64,
    order: usize,
) -> Result<[PowerSeries; 2], HypergeomError> {
    if p.norm() < 1e-12 || (p - 1.0).norm() < 1e-12 {
        return Err(HypergeomError::Singular);
    }
    let (a, b, c) = params.to_f64();
    let lead = p * (1.0 - p);
    let shift = c - (a + b + 1.0) * p;
    let build = |u0: f64, u1: f64| {
        let mut u = Vec::with_capacity(order + 1);
        u.push(Complex64::new(u0, 0.0));
        u.push(Complex64::new(u1, 0.0));
        for n in 0..order.saturating_sub(1) {
            let nf = n as f64;
            let next = ((nf + a) * (nf + b) * u[n]
                - ((1.0 - 2.0 * p) * nf + shift) * (nf + 1.0) * u[n + 1])
                / (lead * (nf + 1.0) * (nf + 2.0));
            u.push(next);
        }
        PowerSeries {
            coeffs: u,
            terminates_at: None,
        }
    };
    Ok([build(1.0, 0.0), build(0.0, 1.0)])
}
