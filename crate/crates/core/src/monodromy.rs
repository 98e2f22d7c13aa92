//! Monodromy of the hypergeometric equation and the unitarizability test.
//!
//! A fundamental matrix normalized to the identity at the basepoint is
//! continued around positively oriented loops about `0` and `1`, and around a
//! large clockwise loop (a positive loop about `∞`). The metric exists exactly
//! when the projectivized group is conjugate into `PSU(2)`, which is decided
//! here by looking for a positive-definite invariant Hermitian form.

use std::f64::consts::PI;

use nalgebra::{SMatrix, Vector4};
use num_complex::Complex64;
use thiserror::Error;

use crate::angles::AngleTriple;
use crate::hypergeom::{
    continue_along_path, params_from_triple, ContinuationOptions, FundamentalMatrix,
    HypergeomError, HypergeomParams, Mat2, Singularity,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonodromyError {
    #[error("loop radius {radius} is not admissible for basepoint {basepoint}")]
    BadRadius { radius: f64, basepoint: Complex64 },
    #[error("loops around infinity are built with `infinity_loop_path`")]
    InfinityLoop,
    #[error("unitarizability is indeterminate (residual {residual:.3e}, eigenvalue ratio {eigen_ratio:.3e})")]
    Indeterminate { residual: f64, eigen_ratio: f64 },
    #[error(transparent)]
    Continuation(#[from] HypergeomError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyOptions {
    pub basepoint: Complex64,
    pub radius: f64,
    pub samples: usize,
    pub continuation: ContinuationOptions,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self {
            basepoint: Complex64::new(0.5, 0.0),
            radius: 0.25,
            samples: 64,
            // Generators grow to norm ~10² for large angles; the loop relation
            // is checked in absolute terms.
            continuation: ContinuationOptions { tol: 1e-14, ..ContinuationOptions::default() },
        }
    }
}

/// Closed polyline from `basepoint` around `singularity` (`0` or `1`) once,
/// counterclockwise: radial approach, `samples` chords of the circle of the
/// given radius, radial return.
pub fn loop_path(
    singularity: Singularity,
    basepoint: Complex64,
    radius: f64,
    samples: usize,
) -> Result<Vec<Complex64>, MonodromyError> {
    let (center, other) = match singularity {
        Singularity::Zero => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        Singularity::One => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        Singularity::Infinity => return Err(MonodromyError::InfinityLoop),
    };
    let bad = || MonodromyError::BadRadius { radius, basepoint };
    let to_base = basepoint - center;
    if !(radius > 0.0) || radius >= to_base.norm() || radius >= 0.5 || samples < 3 {
        return Err(bad());
    }
    let phase = to_base.arg();
    let mut path = Vec::with_capacity(samples + 3);
    path.push(basepoint);
    for k in 0..=samples {
        let angle = phase + 2.0 * PI * k as f64 / samples as f64;
        path.push(center + Complex64::from_polar(radius, angle));
    }
    path.push(basepoint);
    let clearance = path
        .windows(2)
        .map(|w| crate::hypergeom::continuation::segment_distance(w[0], w[1], other))
        .fold(f64::INFINITY, f64::min);
    if clearance < radius / 2.0 {
        return Err(bad());
    }
    Ok(path)
}

/// Closed polyline from `basepoint` that encircles both `0` and `1` once
/// clockwise, i.e. a positive loop about `∞`. It leaves upward, so that it is
/// homotopic to the inverse of the `0`-loop followed by the `1`-loop.
pub fn infinity_loop_path(basepoint: Complex64, samples: usize) -> Vec<Complex64> {
    let radius = basepoint.norm().max((basepoint - 1.0).norm()) + 0.5;
    let start_angle = PI / 2.0;
    let mut path = Vec::with_capacity(samples + 3);
    path.push(basepoint);
    for k in 0..=samples {
        let angle = start_angle - 2.0 * PI * k as f64 / samples as f64;
        path.push(basepoint + Complex64::from_polar(radius, angle));
    }
    path.push(basepoint);
    path
}

/// Winding number of a closed polyline around `point`.
pub fn winding_number(path: &[Complex64], point: Complex64) -> i64 {
    let total: f64 = path
        .windows(2)
        .map(|w| ((w[1] - point) / (w[0] - point)).arg())
        .sum();
    (total / (2.0 * PI)).round() as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyRep {
    pub m0: Mat2,
    pub m1: Mat2,
    pub minf: Mat2,
    pub basepoint: Complex64,
    pub tol: f64,
}

impl MonodromyRep {
    pub fn generator(&self, s: Singularity) -> &Mat2 {
        match s {
            Singularity::Zero => &self.m0,
            Singularity::One => &self.m1,
            Singularity::Infinity => &self.minf,
        }
    }

    /// Frobenius norm of `M∞·M1·M0 − I`.
    pub fn loop_relation_defect(&self) -> f64 {
        (self.minf * self.m1 * self.m0 - Mat2::identity()).norm()
    }
}

pub fn monodromy_rep(t: &AngleTriple, opts: &MonodromyOptions) -> Result<MonodromyRep, MonodromyError> {
    monodromy_rep_for_params(&params_from_triple(t), opts)
}

pub fn monodromy_rep_for_params(
    params: &HypergeomParams,
    opts: &MonodromyOptions,
) -> Result<MonodromyRep, MonodromyError> {
    let start = FundamentalMatrix::identity_at(opts.basepoint);
    let around = |path: Vec<Complex64>| -> Result<Mat2, MonodromyError> {
        Ok(continue_along_path(params, &path, &start, &opts.continuation)?.m)
    };
    let m0 = around(loop_path(Singularity::Zero, opts.basepoint, opts.radius, opts.samples)?)?;
    let m1 = around(loop_path(Singularity::One, opts.basepoint, opts.radius, opts.samples)?)?;
    let minf = around(infinity_loop_path(opts.basepoint, 2 * opts.samples))?;
    Ok(MonodromyRep {
        m0,
        m1,
        minf,
        basepoint: opts.basepoint,
        tol: opts.continuation.tol,
    })
}

/// `M / sqrt(det M)`; the overall sign is not meaningful.
pub fn unit_det(m: &Mat2) -> Mat2 {
    m / m.determinant().sqrt()
}

/// Trace after unit-determinant normalization, up to sign.
pub fn normalized_trace(m: &Mat2) -> Complex64 {
    unit_det(m).trace()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorClass {
    Identity,
    /// Rotation angle of the induced Möbius map, in `(0, π]` up to orientation.
    Elliptic { rotation: f64 },
    Parabolic,
    Loxodromic,
}

pub fn classify_generator(m: &Mat2, tol: f64) -> GeneratorClass {
    let n = unit_det(m);
    let tr = n.trace();
    let scale = 1.0 + n.norm_squared();
    if (tr * tr - 4.0).norm() <= tol * scale {
        let sign = if tr.re >= 0.0 { 1.0 } else { -1.0 };
        let diff = (n - Mat2::identity() * Complex64::new(sign, 0.0)).norm();
        return if diff <= tol * scale.sqrt() {
            GeneratorClass::Identity
        } else {
            GeneratorClass::Parabolic
        };
    }
    if tr.im.abs() <= tol * scale.sqrt() && tr.re.abs() < 2.0 {
        GeneratorClass::Elliptic {
            rotation: 2.0 * (tr.re.abs() / 2.0).acos(),
        }
    } else {
        GeneratorClass::Loxodromic
    }
}

/// Thresholds of the unitarizability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityThresholds {
    /// Relative singular value below which a direction counts as invariant.
    pub residual: f64,
    /// Relative singular values above this are certainly not invariant.
    pub residual_reject: f64,
    /// `λmin/λmax` at or above this means positive definite.
    pub definite: f64,
    /// `λmin/λmax` at or below this means not positive definite.
    pub indefinite: f64,
}

impl Default for UnitarityThresholds {
    fn default() -> Self {
        Self {
            residual: 1e-8,
            residual_reject: 1e-5,
            definite: 1e-6,
            indefinite: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitarityReport {
    pub unitarizable: bool,
    /// Best invariant Hermitian form found (the witness when unitarizable).
    pub form: Mat2,
    /// Relative residual of `form` in the invariance equations.
    pub residual: f64,
    /// `λmin/λmax` of `form`.
    pub eigen_ratio: f64,
    /// Dimension of the space of invariant forms.
    pub nullity: usize,
}

/// Hermitian form from coordinates `(h11, h22, √2·Re h12, √2·Im h12)`, which
/// are orthonormal for the Frobenius inner product.
fn form_from_coords(x: &Vector4<f64>) -> Mat2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h12 = Complex64::new(x[2] * s, x[3] * s);
    Mat2::new(
        Complex64::new(x[0], 0.0),
        h12,
        h12.conj(),
        Complex64::new(x[1], 0.0),
    )
}

fn coords_from_form(h: &Mat2) -> Vector4<f64> {
    let r = std::f64::consts::SQRT_2;
    Vector4::new(h[(0, 0)].re, h[(1, 1)].re, h[(0, 1)].re * r, h[(0, 1)].im * r)
}

/// Eigenvalues of a 2×2 Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(h: &Mat2) -> (f64, f64) {
    let a = h[(0, 0)].re;
    let d = h[(1, 1)].re;
    let mid = (a + d) / 2.0;
    let rad = (((a - d) / 2.0).powi(2) + h[(0, 1)].norm_sqr()).sqrt();
    (mid - rad, mid + rad)
}

fn eigen_ratio(h: &Mat2) -> f64 {
    let (lo, hi) = hermitian_eigenvalues(h);
    let (lo, hi) = if hi.abs() >= lo.abs() { (lo, hi) } else { (-hi, -lo) };
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

/// Decides whether `M0` and `M1` preserve a common positive-definite
/// Hermitian form `M†HM = H` (after unit-determinant normalization).
pub fn is_unitarizable(rep: &MonodromyRep) -> Result<UnitarityReport, MonodromyError> {
    is_unitarizable_with(rep, &UnitarityThresholds::default())
}

pub fn is_unitarizable_with(
    rep: &MonodromyRep,
    th: &UnitarityThresholds,
) -> Result<UnitarityReport, MonodromyError> {
    // A unitary matrix with trace ±2 is ±I, so a clearly parabolic
    // generator rules unitarity out whatever the invariance system says.
    let parabolic = [&rep.m0, &rep.m1, &rep.minf].into_iter().any(is_clearly_parabolic);
    let gens = [unit_det(&rep.m0), unit_det(&rep.m1)];
    let scale: f64 = gens.iter().map(|g| g.norm_squared()).sum();
    let mut system = SMatrix::<f64, 8, 4>::zeros();
    for col in 0..4 {
        let mut e = Vector4::zeros();
        e[col] = 1.0;
        let h = form_from_coords(&e);
        for (j, g) in gens.iter().enumerate() {
            let r = g.adjoint() * h * g - h;
            let rc = coords_from_form(&r);
            for i in 0..4 {
                system[(4 * j + i, col)] = rc[i];
            }
        }
    }
    let svd = system.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let rel: Vec<f64> = order.iter().map(|&i| svd.singular_values[i] / scale).collect();
    let null: Vec<Vector4<f64>> = order
        .iter()
        .zip(&rel)
        .filter(|(_, &r)| r <= th.residual)
        .map(|(&i, _)| v_t.row(i).transpose())
        .collect();
    let ambiguous = rel.iter().any(|&r| r > th.residual && r < th.residual_reject);

    if null.is_empty() {
        let best = v_t.row(order[0]).transpose();
        let form = form_from_coords(&best);
        if ambiguous && !parabolic {
            return Err(MonodromyError::Indeterminate {
                residual: rel[0],
                eigen_ratio: eigen_ratio(&form),
            });
        }
        return Ok(UnitarityReport {
            unitarizable: false,
            eigen_ratio: eigen_ratio(&form),
            form,
            residual: rel[0],
            nullity: 0,
        });
    }

    // Candidates: the projection of the identity onto the invariant space,
    // then the basis vectors themselves.
    let identity = Vector4::new(1.0, 1.0, 0.0, 0.0);
    let projection: Vector4<f64> = null.iter().map(|v| v * v.dot(&identity)).sum();
    let mut candidates = vec![projection];
    candidates.extend(null.iter().copied());
    if null.len() == 2 {
        // A pencil of forms: scan it for the most definite member.
        candidates.extend((0..720).map(|k| {
            let (s, c) = (PI * k as f64 / 720.0).sin_cos();
            null[0] * c + null[1] * s
        }));
    }
    let best = candidates
        .into_iter()
        .filter(|v| v.norm() > 0.0)
        .map(|v| {
            let form = form_from_coords(&(v / v.norm()));
            (eigen_ratio(&form), form)
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("null space is non-empty");
    let (ratio, form) = best;
    let (lo, hi) = hermitian_eigenvalues(&form);
    let form = if hi.abs() >= lo.abs() { form } else { -form };
    let residual = (0..null.len()).map(|i| rel[i]).fold(0.0, f64::max);

    if parabolic {
        Ok(UnitarityReport {
            unitarizable: false,
            form,
            residual,
            eigen_ratio: ratio,
            nullity: null.len(),
        })
    } else if ratio >= th.definite && !ambiguous {
        Ok(UnitarityReport {
            unitarizable: true,
            form,
            residual,
            eigen_ratio: ratio,
            nullity: null.len(),
        })
    } else if ratio <= th.indefinite && !ambiguous {
        Ok(UnitarityReport {
            unitarizable: false,
            form,
            residual,
            eigen_ratio: ratio,
            nullity: null.len(),
        })
    } else {
        Err(MonodromyError::Indeterminate {
            residual,
            eigen_ratio: ratio,
        })
    }
}

/// `|tr| = 2` to `1e−7` while staying at relative distance `1e−4` from `±I`.
fn is_clearly_parabolic(m: &Mat2) -> bool {
    let u = unit_det(m);
    let id = Mat2::identity();
    let off = (u - id).norm().min((u + id).norm()) / u.norm();
    let tr = u.trace();
    (tr.norm() - 2.0).abs() <= 1e-7 && tr.im.abs() <= 1e-7 && off >= 1e-4
}

/// A matrix `G` with `G⁻¹ M G` unitary for every `M` preserving the positive
/// definite form `h`: `G = (L†)⁻¹` where `h = L L†`.
pub fn unitarizing_frame(h: &Mat2) -> Option<Mat2> {
    let chol = nalgebra::Cholesky::new(*h)?;
    chol.l().adjoint().try_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn loop_paths_wind_once() {
        let b = c(0.5, 0.0);
        let p0 = loop_path(Singularity::Zero, b, 0.25, 64).unwrap();
        assert_eq!(p0.len(), 64 + 3);
        assert_eq!(p0.first(), p0.last());
        assert_eq!(winding_number(&p0, c(0.0, 0.0)), 1);
        assert_eq!(winding_number(&p0, c(1.0, 0.0)), 0);
        let p1 = loop_path(Singularity::One, b, 0.25, 64).unwrap();
        assert_eq!(winding_number(&p1, c(0.0, 0.0)), 0);
        assert_eq!(winding_number(&p1, c(1.0, 0.0)), 1);
        let pinf = infinity_loop_path(b, 64);
        assert_eq!(winding_number(&pinf, c(0.0, 0.0)), -1);
        assert_eq!(winding_number(&pinf, c(1.0, 0.0)), -1);
    }

    #[test]
    fn loop_clearance_is_at_least_half_radius() {
        let p0 = loop_path(Singularity::Zero, c(0.5, 0.0), 0.25, 8).unwrap();
        let clearance = p0
            .windows(2)
            .map(|w| crate::hypergeom::continuation::segment_distance(w[0], w[1], c(0.0, 0.0)))
            .fold(f64::INFINITY, f64::min);
        assert!(clearance >= 0.125);
    }

    #[test]
    fn bad_radius() {
        let b = c(0.5, 0.0);
        assert!(matches!(
            loop_path(Singularity::Zero, b, 0.5, 64),
            Err(MonodromyError::BadRadius { .. })
        ));
        assert!(loop_path(Singularity::One, b, 0.0, 64).is_err());
        assert!(loop_path(Singularity::One, b, 0.1, 2).is_err());
    }

    #[test]
    fn classify_examples() {
        let tol = 1e-8;
        assert_eq!(classify_generator(&Mat2::identity(), tol), GeneratorClass::Identity);
        let jordan = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert_eq!(classify_generator(&jordan, tol), GeneratorClass::Parabolic);
        let rot = Mat2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        match classify_generator(&rot, tol) {
            GeneratorClass::Elliptic { rotation } => assert!((rotation - PI).abs() < 1e-12),
            other => panic!("expected elliptic, got {other:?}"),
        }
        let hyp = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert_eq!(classify_generator(&hyp, tol), GeneratorClass::Loxodromic);
        // Scalar multiples are projectively trivial.
        let scalar = Mat2::identity() * c(0.0, 3.0);
        assert_eq!(classify_generator(&scalar, tol), GeneratorClass::Identity);
    }

    fn rep(m0: Mat2, m1: Mat2) -> MonodromyRep {
        MonodromyRep {
            minf: (m1 * m0).try_inverse().unwrap(),
            m0,
            m1,
            basepoint: c(0.5, 0.0),
            tol: 1e-12,
        }
    }

    #[test]
    fn unitarity_of_synthetic_groups() {
        // Two rotations conjugated by a non-unitary matrix.
        let rot = |a: f64, n: [f64; 3]| {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let [x, y, z] = n.map(|v| v / len);
            let (s, co) = (a / 2.0).sin_cos();
            Mat2::new(c(co, s * z), c(s * y, s * x), c(-s * y, s * x), c(co, -s * z))
        };
        let p = Mat2::new(c(2.0, 0.3), c(0.5, 0.0), c(-0.1, 0.2), c(0.7, 0.0));
        let pi = p.try_inverse().unwrap();
        let m0 = p * rot(1.1, [0.0, 0.0, 1.0]) * pi;
        let m1 = p * rot(0.7, [0.3, 0.8, 0.2]) * pi;
        let report = is_unitarizable(&rep(m0, m1)).unwrap();
        assert!(report.unitarizable);
        assert_eq!(report.nullity, 1);
        let g = unitarizing_frame(&report.form).unwrap();
        for m in [m0, m1] {
            let u = g.try_inverse().unwrap() * m * g;
            assert!((u.adjoint() * u - Mat2::identity()).norm() < 1e-10);
        }

        // A parabolic generator admits no definite form.
        let jordan = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let ell = Mat2::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        assert!(!is_unitarizable(&rep(jordan, ell)).unwrap().unitarizable);

        // A hyperbolic element admits no definite form.
        let hyp = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(!is_unitarizable(&rep(hyp, ell)).unwrap().unitarizable);

        // Cyclic elliptic group: a two-dimensional family of forms.
        let report = is_unitarizable(&rep(Mat2::identity(), m1)).unwrap();
        assert!(report.unitarizable);
        assert_eq!(report.nullity, 2);

        // Trivial group.
        let report = is_unitarizable(&rep(Mat2::identity(), Mat2::identity())).unwrap();
        assert!(report.unitarizable);
        assert_eq!(report.nullity, 4);
    }

    fn triple(t: [(i64, i64); 3]) -> AngleTriple {
        AngleTriple::from_ratios(t).unwrap()
    }

    #[test]
    fn monodromy_of_sample_triples() {
        let opts = MonodromyOptions::default();
        let octant = monodromy_rep(&triple([(1, 2), (1, 2), (1, 2)]), &opts).unwrap();
        assert!(octant.loop_relation_defect() < 1e-8);
        for s in Singularity::ALL {
            assert!(normalized_trace(octant.generator(s)).norm() < 1e-8);
        }
        assert!(is_unitarizable(&octant).unwrap().unitarizable);

        let round = monodromy_rep(&triple([(1, 1), (1, 1), (1, 1)]), &opts).unwrap();
        for s in Singularity::ALL {
            assert_eq!(classify_generator(round.generator(s), 1e-8), GeneratorClass::Identity);
        }

        let thin = monodromy_rep(&triple([(3, 10), (3, 10), (3, 10)]), &opts).unwrap();
        assert!(!is_unitarizable(&thin).unwrap().unitarizable);

        let cone = monodromy_rep(&triple([(2, 1), (1, 2), (1, 2)]), &opts).unwrap();
        assert_eq!(classify_generator(&cone.m0, 1e-8), GeneratorClass::Identity);
        assert!(is_unitarizable(&cone).unwrap().unitarizable);

        let log = monodromy_rep(&triple([(2, 1), (1, 2), (7, 10)]), &opts).unwrap();
        assert_eq!(classify_generator(&log.m0, 1e-8), GeneratorClass::Parabolic);
        assert!(!is_unitarizable(&log).unwrap().unitarizable);
    }

    #[test]
    fn traces_do_not_depend_on_branch_or_loops() {
        let t = triple([(7, 5), (2, 3), (5, 4)]);
        let base = monodromy_rep(&t, &MonodromyOptions::default()).unwrap();
        let other = MonodromyOptions {
            basepoint: c(0.4, 0.1),
            radius: 0.2,
            samples: 48,
            ..MonodromyOptions::default()
        };
        let traces = |r: &MonodromyRep| {
            [r.m0, r.m1, r.m1 * r.m0].map(|m| normalized_trace(&m).norm())
        };
        let expect = traces(&base);
        let moved = monodromy_rep(&t, &other).unwrap();
        let flipped = monodromy_rep_for_params(
            &crate::hypergeom::params_with_signs(&t, [-1, 1, -1]),
            &MonodromyOptions::default(),
        )
        .unwrap();
        for r in [moved, flipped] {
            for (x, y) in traces(&r).iter().zip(&expect) {
                assert!((x - y).abs() < 1e-7, "{x} vs {y}");
            }
        }
    }
}
