//! The metric `λ|dz|` pulled back by the developing map `f = u2/u1`, where
//! `(u1, u2)` is a pair of solutions of the hypergeometric equation in a frame
//! that makes the monodromy unitary.
//!
//! Solutions are evaluated from local charts: Frobenius bases at `0`, `1`, `∞`
//! and Taylor bases at five regular points of the unit circle. Each chart is
//! tied to the reference basis (the identity at `z = 1/2`) by one numerical
//! continuation.

mod charts;
mod quadrature;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::angles::AngleTriple;
use crate::hypergeom::{
    continue_along_path, params_from_triple, ContinuationOptions, FundamentalMatrix,
    HypergeomError, HypergeomParams, Mat2, Singularity,
};
use crate::monodromy::{
    is_unitarizable, monodromy_rep, unitarizing_frame, MonodromyError, MonodromyOptions,
};
use crate::rational;
use charts::{Chart, ChartKind, LocalBasis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("the monodromy is not unitarizable, so no metric exists for this triple")]
    NotUnitarizable,
    #[error("the projective frame is singular")]
    SingularFrame,
    #[error("the point is a cone point")]
    AtCone,
    #[error("cone exponent fit is unstable (residual {residual:.3e})")]
    FitUnstable { residual: f64 },
    #[error("quadrature budget exceeded after {evaluations} evaluations")]
    QuadratureBudgetExceeded { evaluations: usize },
    #[error(transparent)]
    Monodromy(#[from] MonodromyError),
    #[error(transparent)]
    Hypergeom(#[from] HypergeomError),
}

/// Density of the metric at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub z: Complex64,
    pub lambda: f64,
}

/// Coefficient `R(z)` of the Schwarz equation `S(f) = R`.
pub fn schwarz_coefficient(t: &AngleTriple, z: Complex64) -> Complex64 {
    let [t1, t2, t3] = t.to_f64();
    let (s1, s2, s3) = (t1 * t1, t2 * t2, t3 * t3);
    (1.0 - s1) / (2.0 * z * z)
        + (1.0 - s1 - s2 + s3) / (2.0 * z * (1.0 - z))
        + (1.0 - s2) / (2.0 * (z - 1.0) * (z - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square deviation of the samples from the fitted line.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaReport {
    pub area: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
struct Placed {
    chart: Chart,
    /// Maps the chart basis to the framed pair `(u1, u2)`.
    to_frame: Mat2,
}

/// Evaluated `(u1, u2)` with their Wronskian in the chart coordinate.
struct Framed {
    u: [Complex64; 2],
    wronskian: Complex64,
    dt_dz: Complex64,
}

impl Framed {
    fn norm_sqr(&self) -> f64 {
        self.u[0].norm_sqr() + self.u[1].norm_sqr()
    }

    /// Density with respect to the chart coordinate.
    fn local_density(&self) -> f64 {
        2.0 * self.wronskian.norm() / self.norm_sqr()
    }
}

#[derive(Debug, Clone)]
pub struct DevelopingContext {
    triple: AngleTriple,
    params: HypergeomParams,
    basepoint: Complex64,
    frame: Mat2,
    charts: Vec<Placed>,
}

const RHO: f64 = 0.25;

impl DevelopingContext {
    /// Context in the unitary frame obtained from the invariant Hermitian form.
    pub fn new(t: &AngleTriple) -> Result<Self, MetricError> {
        let rep = monodromy_rep(t, &MonodromyOptions::default())?;
        let report = is_unitarizable(&rep)?;
        if !report.unitarizable {
            return Err(MetricError::NotUnitarizable);
        }
        let frame = unitarizing_frame(&report.form).ok_or(MetricError::SingularFrame)?;
        Self::with_frame(t, frame)
    }

    /// Context with an explicit frame `G`: `(u1, u2) = (w1, w2)·G`, where
    /// `(w1, w2)` is the basis equal to the identity at `z = 1/2`.
    pub fn with_frame(t: &AngleTriple, frame: Mat2) -> Result<Self, MetricError> {
        if frame.determinant().norm() < 1e-300 {
            return Err(MetricError::SingularFrame);
        }
        let params = params_from_triple(t);
        let basepoint = Complex64::new(0.5, 0.0);
        let start = FundamentalMatrix::identity_at(basepoint);
        let opts = ContinuationOptions::default();
        let c = Complex64::new;
        let mut layout: Vec<(Chart, Vec<Complex64>)> = vec![
            (Chart::zero(&params)?, vec![basepoint, c(0.25, 0.0)]),
            (Chart::one(&params)?, vec![basepoint, c(0.75, 0.0)]),
            (Chart::infinity(&params)?, vec![basepoint, c(0.0, 2.0)]),
        ];
        for k in 1..=5 {
            let center = Complex64::from_polar(1.0, k as f64 * PI / 3.0);
            let detour = c(0.5, if center.im >= 0.0 { 0.6 } else { -0.6 });
            layout.push((Chart::regular(&params, center)?, vec![basepoint, detour, center]));
        }
        let mut charts = Vec::with_capacity(layout.len());
        for (chart, path) in layout {
            let q = *path.last().expect("paths are non-empty");
            let reference = continue_along_path(&params, &path, &start, &opts)?.m;
            let local = chart.eval(chart.local_coordinate(q), None)?;
            let local_z = Mat2::new(
                local.values[0],
                local.values[1],
                local.derivs[0] * local.dt_dz,
                local.derivs[1] * local.dt_dz,
            );
            let inverse = local_z.try_inverse().ok_or(MetricError::SingularFrame)?;
            charts.push(Placed {
                chart,
                to_frame: inverse * reference * frame,
            });
        }
        Ok(Self {
            triple: *t,
            params,
            basepoint,
            frame,
            charts,
        })
    }

    pub fn triple(&self) -> &AngleTriple {
        &self.triple
    }

    pub fn params(&self) -> &HypergeomParams {
        &self.params
    }

    pub fn frame(&self) -> &Mat2 {
        &self.frame
    }

    pub fn basepoint(&self) -> Complex64 {
        self.basepoint
    }

    fn locate(&self, z: Complex64) -> &Placed {
        self.charts
            .iter()
            .min_by(|a, b| a.chart.ratio(z).total_cmp(&b.chart.ratio(z)))
            .expect("charts are non-empty")
    }

    fn framed_local(&self, placed: &Placed, t: Complex64, branch: Option<Complex64>) -> Result<Framed, MetricError> {
        let basis: LocalBasis = placed.chart.eval(t, branch)?;
        let m = &placed.to_frame;
        let v = basis.values;
        Ok(Framed {
            u: [
                v[0] * m[(0, 0)] + v[1] * m[(1, 0)],
                v[0] * m[(0, 1)] + v[1] * m[(1, 1)],
            ],
            wronskian: basis.wronskian() * m.determinant(),
            dt_dz: basis.dt_dz,
        })
    }

    fn framed(&self, z: Complex64) -> Result<(&Placed, Framed), MetricError> {
        if z.norm() == 0.0 || (z - 1.0).norm() == 0.0 {
            return Err(MetricError::AtCone);
        }
        let placed = self.locate(z);
        let t = placed.chart.local_coordinate(z);
        Ok((placed, self.framed_local(placed, t, None)?))
    }

    /// `f(z)` and `f'(z)`.
    pub fn developing_map(&self, z: Complex64) -> Result<(Complex64, Complex64), MetricError> {
        let (_, fr) = self.framed(z)?;
        let f = fr.u[1] / fr.u[0];
        let df = fr.wronskian / (fr.u[0] * fr.u[0]) * fr.dt_dz;
        Ok((f, df))
    }

    /// `λ(z) = 2|f'|/(1 + |f|²)`.
    pub fn density(&self, z: Complex64) -> Result<MetricSample, MetricError> {
        let (_, fr) = self.framed(z)?;
        Ok(MetricSample {
            z,
            lambda: fr.local_density() * fr.dt_dz.norm(),
        })
    }

    /// Density in the coordinate `ζ = 1/z` near infinity.
    pub fn density_at_infinity(&self, zeta: Complex64) -> Result<f64, MetricError> {
        if zeta.norm() == 0.0 {
            return Err(MetricError::AtCone);
        }
        let z = 1.0 / zeta;
        let (placed, fr) = self.framed(z)?;
        Ok(if placed.chart.kind == ChartKind::Infinity {
            fr.local_density()
        } else {
            fr.local_density() * fr.dt_dz.norm() * z.norm_sqr()
        })
    }

    /// Density near cone `j` at polar offset `(r, φ)` in the natural local
    /// coordinate (`z`, `z − 1` or `1/z`).
    pub fn density_near(&self, cone: Singularity, r: f64, phi: f64) -> Result<f64, MetricError> {
        let w = Complex64::from_polar(r, phi);
        match cone {
            Singularity::Zero => Ok(self.density(w)?.lambda),
            Singularity::One => Ok(self.density(1.0 + w)?.lambda),
            Singularity::Infinity => self.density_at_infinity(w),
        }
    }

    /// Schwarzian derivative of `f` at `z` from Cauchy-integral derivatives on
    /// a small circle, evaluated inside a single chart.
    pub fn schwarzian(&self, z: Complex64) -> Result<Complex64, MetricError> {
        const NODES: usize = 64;
        let (placed, centre) = self.framed(z)?;
        let h = 0.05 * z.norm().min((z - 1.0).norm());
        let (a, b) = (centre.u[0], centre.u[1]);
        let branch = Some(placed.chart.local_coordinate(z));
        // g is a unitary Möbius image of f with g(z) = 0 and no pole nearby.
        let mut d = [Complex64::default(); 4];
        for k in 0..NODES {
            let phi = TAU * k as f64 / NODES as f64;
            let w = z + Complex64::from_polar(h, phi);
            let fr = self.framed_local(placed, placed.chart.local_coordinate(w), branch)?;
            let g = (a * fr.u[1] - b * fr.u[0]) / (a.conj() * fr.u[0] + b.conj() * fr.u[1]);
            for (order, slot) in d.iter_mut().enumerate() {
                *slot += g * Complex64::from_polar(1.0, -(order as f64) * phi);
            }
        }
        let deriv = |k: usize, fact: f64| d[k] * fact / (NODES as f64 * h.powi(k as i32));
        let (g1, g2, g3) = (deriv(1, 1.0), deriv(2, 2.0), deriv(3, 6.0));
        Ok(g3 / g1 - 1.5 * (g2 / g1) * (g2 / g1))
    }

    /// `|S(f)(z) − R(z)|`.
    pub fn schwarzian_residual(&self, z: Complex64) -> Result<f64, MetricError> {
        Ok((self.schwarzian(z)? - schwarz_coefficient(&self.triple, z)).norm())
    }

    /// Least-squares slope of `log λ` against `log r` for `r ∈ [1e−4, 1e−2]`
    /// on eight rays into the cone, in the natural local coordinate.
    pub fn cone_exponent(&self, cone: Singularity) -> Result<ConeFit, MetricError> {
        const RADII: usize = 25;
        const RAYS: usize = 8;
        let mut xs = Vec::with_capacity(RADII * RAYS);
        let mut ys = Vec::with_capacity(RADII * RAYS);
        for i in 0..RADII {
            let log_r = (1e-4f64).ln() + (100f64).ln() * i as f64 / (RADII - 1) as f64;
            for k in 0..RAYS {
                let phi = 0.3 + TAU * k as f64 / RAYS as f64;
                xs.push(log_r);
                ys.push(self.density_near(cone, log_r.exp(), phi)?.ln());
            }
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        // Scatter between rays at one radius is part of the residual; only its
        // radial average enters the slope.
        let mut sq = 0.0;
        for i in 0..RADII {
            let row = &ys[i * RAYS..(i + 1) * RAYS];
            let mean = row.iter().sum::<f64>() / RAYS as f64;
            let fit = intercept + slope * xs[i * RAYS];
            sq += (mean - fit) * (mean - fit);
        }
        let residual = (sq / RADII as f64).sqrt();
        if !residual.is_finite() || residual > 5e-2 {
            return Err(MetricError::FitUnstable { residual });
        }
        Ok(ConeFit {
            slope,
            intercept,
            residual,
        })
    }

    /// Area `∫ λ² dA` of the sphere with this metric.
    ///
    /// Disks of radius `1/4` around `0`, `1` and (in `ζ = 1/z`) `∞` are done in
    /// polar coordinates with `r = ρ s^{1/θ}`, which removes the power
    /// singularity; the rest of the annulus `1/4 ≤ |z| ≤ 4` in polar
    /// coordinates about `0`.
    pub fn total_area(&self, tol: f64) -> Result<AreaReport, MetricError> {
        let thetas = self.triple.to_f64();
        let inner_tol = (tol * 1e-2).max(1e-13);
        let mut evaluations = 0usize;
        let mut error = 0.0;
        let mut area = 0.0;

        let mut add = |est: quadrature::Estimate, ok: bool, evaluations: &mut usize| {
            *evaluations += est.evaluations;
            if !ok {
                return Err(MetricError::QuadratureBudgetExceeded {
                    evaluations: *evaluations,
                });
            }
            area += est.value;
            error += est.error;
            Ok(())
        };

        // Circle average of λ² at radius r about a cone.
        let ring = |cone: Singularity, r: f64, evals: &mut usize| -> Result<f64, MetricError> {
            let (est, ok) = quadrature::periodic(
                |phi| Ok::<_, MetricError>(self.density_near(cone, r, phi)?.powi(2)),
                32,
                1 << 14,
                inner_tol,
            )?;
            *evals += est.evaluations;
            if !ok {
                return Err(MetricError::QuadratureBudgetExceeded { evaluations: *evals });
            }
            Ok(est.value)
        };

        for cone in Singularity::ALL {
            let theta = thetas[cone.index()];
            let mut evals = 0;
            let (est, ok) = quadrature::integrate(
                |s: f64| {
                    let r = RHO * s.powf(1.0 / theta);
                    if r == 0.0 {
                        return Ok::<_, MetricError>(0.0);
                    }
                    Ok(r * r / (theta * s) * ring(cone, r, &mut evals)?)
                },
                0.0,
                1.0,
                tol * 0.1,
                0.0,
                2000,
            )?;
            evaluations += evals;
            add(est, ok, &mut evaluations)?;
        }

        // Annulus 1/4 ≤ |z| ≤ 4 without the disk |z − 1| < 1/4.
        let cut = |r: f64| ((r * r + 1.0 - RHO * RHO) / (2.0 * r)).clamp(-1.0, 1.0).acos();
        let breaks = [RHO, 1.0 - RHO, 1.0, 1.0 + RHO, 1.0 / RHO];
        for w in breaks.windows(2) {
            let mut evals = 0;
            let punctured = w[0] >= 1.0 - RHO && w[1] <= 1.0 + RHO;
            let (est, ok) = quadrature::integrate(
                |r: f64| {
                    let sq = |phi: f64| Ok::<_, MetricError>(self.density(Complex64::from_polar(r, phi))?.lambda.powi(2));
                    let inner = if punctured {
                        let p0 = cut(r);
                        let (est, ok) = quadrature::integrate(sq, p0, TAU - p0, inner_tol, 0.0, 400)?;
                        evals += est.evaluations;
                        if !ok {
                            return Err(MetricError::QuadratureBudgetExceeded { evaluations: evals });
                        }
                        est.value
                    } else {
                        let (est, ok) = quadrature::periodic(sq, 64, 1 << 14, inner_tol)?;
                        evals += est.evaluations;
                        if !ok {
                            return Err(MetricError::QuadratureBudgetExceeded { evaluations: evals });
                        }
                        est.value
                    };
                    Ok(r * inner)
                },
                w[0],
                w[1],
                tol * 0.1,
                0.0,
                2000,
            )?;
            evaluations += evals;
            add(est, ok, &mut evaluations)?;
        }
        Ok(AreaReport {
            area,
            error_estimate: error,
            evaluations,
        })
    }
}

/// Gauss–Bonnet value `2π(θ1 + θ2 + θ3 − 1)`.
pub fn expected_area(t: &AngleTriple) -> f64 {
    TAU * (rational::to_f64(&t.sum()) - 1.0)
}
