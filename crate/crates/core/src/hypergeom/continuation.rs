//! Numerical analytic continuation of a fundamental matrix along polylines.
//!
//! The hypergeometric equation is integrated as the first-order system
//! `Y' = A(z) Y` for `Y = [[w1, w2], [w1', w2']]` with an embedded
//! Dormand–Prince 5(4) pair, segment by segment.

use num_complex::Complex64;

use super::{FundamentalMatrix, HypergeomError, HypergeomParams, Mat2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    /// Mixed absolute/relative local error tolerance per step.
    pub tol: f64,
    /// Minimal allowed distance from a path segment to `0` or `1`.
    pub min_clearance: f64,
    /// Steps are clamped to this fraction of the distance to the nearest singularity.
    pub clamp_fraction: f64,
    pub max_steps: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            min_clearance: 1e-3,
            clamp_fraction: 0.25,
            max_steps: 1_000_000,
        }
    }
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a) * d.conj()).re / len2;
    let t = t.clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

fn singular_distance(z: Complex64) -> f64 {
    z.norm().min((z - 1.0).norm())
}

/// Continues `start` along `path`, whose first point must be `start.z`.
pub fn continue_along_path(
    params: &HypergeomParams,
    path: &[Complex64],
    start: &FundamentalMatrix,
    opts: &ContinuationOptions,
) -> Result<FundamentalMatrix, HypergeomError> {
    let Some(&first) = path.first() else {
        return Ok(start.clone());
    };
    if (first - start.z).norm() > 1e-14 * (1.0 + first.norm()) {
        return Err(HypergeomError::PathMismatch);
    }
    for w in path.windows(2) {
        let clearance = segment_distance(w[0], w[1], Complex64::new(0.0, 0.0))
            .min(segment_distance(w[0], w[1], Complex64::new(1.0, 0.0)));
        if clearance < opts.min_clearance {
            return Err(HypergeomError::PathTooClose { clearance });
        }
    }
    let system = System::new(params);
    let mut y = start.m;
    let mut budget = opts.max_steps;
    for w in path.windows(2) {
        y = system.integrate_segment(w[0], w[1], y, opts, &mut budget)?;
    }
    Ok(FundamentalMatrix {
        z: *path.last().unwrap(),
        m: y,
    })
}

struct System {
    a: f64,
    b: f64,
    c: f64,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

impl System {
    fn new(params: &HypergeomParams) -> Self {
        let (a, b, c) = params.to_f64();
        Self { a, b, c }
    }

    /// `A(z)` of the first-order system.
    fn matrix(&self, z: Complex64) -> Mat2 {
        let denom = z * (1.0 - z);
        let q = self.a * self.b / denom;
        let p = -(self.c - (self.a + self.b + 1.0) * z) / denom;
        Mat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            q,
            p,
        )
    }

    fn integrate_segment(
        &self,
        from: Complex64,
        to: Complex64,
        mut y: Mat2,
        opts: &ContinuationOptions,
        budget: &mut usize,
    ) -> Result<Mat2, HypergeomError> {
        let length = (to - from).norm();
        if length == 0.0 {
            return Ok(y);
        }
        let dir = (to - from) / length;
        let clamp = |t: f64| opts.clamp_fraction * singular_distance(from + dir * t);
        let mut t = 0.0;
        let mut h = clamp(0.0).min(length).min(0.05);
        while t < length {
            if *budget == 0 {
                return Err(HypergeomError::StepUnderflow { at: from + dir * t });
            }
            *budget -= 1;
            h = h.min(clamp(t));
            let last = h >= length - t;
            if last {
                h = length - t;
            } else if h < 1e-14 * length.max(1.0) {
                return Err(HypergeomError::StepUnderflow { at: from + dir * t });
            }
            let mut k = [Mat2::zeros(); 7];
            for s in 0..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    if A[s][j] != 0.0 {
                        ys += kj * Complex64::new(A[s][j] * h, 0.0);
                    }
                }
                k[s] = self.matrix(from + dir * (t + C[s] * h)) * dir * ys;
            }
            let mut y5 = y;
            let mut err = Mat2::zeros();
            for s in 0..7 {
                y5 += k[s] * Complex64::new(B5[s] * h, 0.0);
                err += k[s] * Complex64::new((B5[s] - B4[s]) * h, 0.0);
            }
            let mut ratio: f64 = 0.0;
            for i in 0..4 {
                let scale = opts.tol * (1.0 + y[i].norm().max(y5[i].norm()));
                ratio = ratio.max(err[i].norm() / scale);
            }
            if ratio <= 1.0 {
                t = if last { length } else { t + h };
                y = y5;
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        }
        Ok(y)
    }
}
