//! Local solution bases whose convergence disks cover the sphere.

use num_complex::Complex64;
use num_traits::One;

use crate::hypergeom::series::{frobenius_series, regular_series, PowerSeries, MAX_ORDER};
use crate::hypergeom::{HypergeomError, HypergeomParams};
use crate::rational::{self, Rational};

/// Taylor order used at regular centers.
const REGULAR_ORDER: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ChartKind {
    Zero,
    One,
    Infinity,
    Regular(Complex64),
}

/// Values and derivatives of two solutions in the local coordinate `t` of a
/// chart, together with `dt/dz`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LocalBasis {
    pub values: [Complex64; 2],
    pub derivs: [Complex64; 2],
    pub dt_dz: Complex64,
}

impl LocalBasis {
    /// Wronskian with respect to `t`.
    pub fn wronskian(&self) -> Complex64 {
        self.values[0] * self.derivs[1] - self.values[1] * self.derivs[0]
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Chart {
    pub kind: ChartKind,
    series: [PowerSeries; 2],
    exponents: [f64; 2],
    radius: f64,
}

fn power(t: Complex64, e: f64, branch: Option<Complex64>) -> Complex64 {
    if e == 0.0 {
        return Complex64::one();
    }
    let log = match branch {
        Some(r) => r.ln() + (t / r).ln(),
        None => t.ln(),
    };
    (log * e).exp()
}

impl Chart {
    /// `F(a,b;c;z)` and `z^{1−c} F(a−c+1, b−c+1; 2−c; z)`.
    pub fn zero(p: &HypergeomParams) -> Result<Self, HypergeomError> {
        let one = Rational::one();
        let two = Rational::from_integer(2);
        Ok(Self {
            kind: ChartKind::Zero,
            series: [
                frobenius_series(p.a, p.b, p.c, MAX_ORDER)?,
                frobenius_series(p.a - p.c + one, p.b - p.c + one, two - p.c, MAX_ORDER)?,
            ],
            exponents: [0.0, rational::to_f64(&(one - p.c))],
            radius: 1.0,
        })
    }

    /// In `x = 1 − z`: `F(a,b;a+b−c+1;x)` and `x^{c−a−b} F(c−a, c−b; c−a−b+1; x)`.
    pub fn one(p: &HypergeomParams) -> Result<Self, HypergeomError> {
        let one = Rational::one();
        Ok(Self {
            kind: ChartKind::One,
            series: [
                frobenius_series(p.a, p.b, p.a + p.b - p.c + one, MAX_ORDER)?,
                frobenius_series(p.c - p.a, p.c - p.b, p.c - p.a - p.b + one, MAX_ORDER)?,
            ],
            exponents: [0.0, rational::to_f64(&(p.c - p.a - p.b))],
            radius: 1.0,
        })
    }

    /// In `ζ = 1/z`: `ζ^a F(a, a−c+1; a−b+1; ζ)` and `ζ^b F(b, b−c+1; b−a+1; ζ)`.
    pub fn infinity(p: &HypergeomParams) -> Result<Self, HypergeomError> {
        let one = Rational::one();
        Ok(Self {
            kind: ChartKind::Infinity,
            series: [
                frobenius_series(p.a, p.a - p.c + one, p.a - p.b + one, MAX_ORDER)?,
                frobenius_series(p.b, p.b - p.c + one, p.b - p.a + one, MAX_ORDER)?,
            ],
            exponents: [rational::to_f64(&p.a), rational::to_f64(&p.b)],
            radius: 1.0,
        })
    }

    pub fn regular(p: &HypergeomParams, center: Complex64) -> Result<Self, HypergeomError> {
        Ok(Self {
            kind: ChartKind::Regular(center),
            series: regular_series(p, center, REGULAR_ORDER)?,
            exponents: [0.0, 0.0],
            radius: center.norm().min((center - 1.0).norm()),
        })
    }

    pub fn local_coordinate(&self, z: Complex64) -> Complex64 {
        match self.kind {
            ChartKind::Zero => z,
            ChartKind::One => 1.0 - z,
            ChartKind::Infinity => 1.0 / z,
            ChartKind::Regular(c) => z - c,
        }
    }

    /// `|t|` relative to the convergence radius; smaller is better.
    pub fn ratio(&self, z: Complex64) -> f64 {
        self.local_coordinate(z).norm() / self.radius
    }

    /// Evaluates at local coordinate `t`. Powers `t^e` use the principal
    /// branch, or the branch continuous at `branch` when given.
    pub fn eval(&self, t: Complex64, branch: Option<Complex64>) -> Result<LocalBasis, HypergeomError> {
        let mut values = [Complex64::default(); 2];
        let mut derivs = [Complex64::default(); 2];
        for i in 0..2 {
            let (s, ds) = self.series[i].eval(t)?;
            let e = self.exponents[i];
            if e == 0.0 {
                values[i] = s;
                derivs[i] = ds;
            } else {
                let pw = power(t, e, branch);
                values[i] = pw * s;
                derivs[i] = pw * (ds + s * e / t);
            }
        }
        let dt_dz = match self.kind {
            ChartKind::Zero | ChartKind::Regular(_) => Complex64::one(),
            ChartKind::One => -Complex64::one(),
            ChartKind::Infinity => -t * t,
        };
        Ok(LocalBasis { values, derivs, dt_dz })
    }
}
