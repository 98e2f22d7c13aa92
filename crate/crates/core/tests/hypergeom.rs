use conicsphere::hypergeom::{
    continue_along_path, evaluate_basis, params_from_triple, series_coefficients,
    ContinuationOptions, FundamentalMatrix, HypergeomError, HypergeomParams, Mat2,
};
use conicsphere::{AngleTriple, Rational};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn tri(r: [(i64, i64); 3]) -> AngleTriple {
    AngleTriple::from_ratios(r).unwrap()
}

/// Right-hand side of the companion system, written out independently.
fn rhs(p: (f64, f64, f64), z: Complex64, y: &[Complex64; 4]) -> [Complex64; 4] {
    let (a, b, cc) = p;
    let d = z * (1.0 - z);
    let q = a * b / d;
    let r = -(cc - (a + b + 1.0) * z) / d;
    // y = [w1, w2, w1', w2']
    [y[2], y[3], q * y[0] + r * y[2], q * y[1] + r * y[3]]
}

fn rk4_step(p: (f64, f64, f64), z: Complex64, h: Complex64, y: &[Complex64; 4]) -> [Complex64; 4] {
    let add = |y: &[Complex64; 4], k: &[Complex64; 4], s: Complex64| {
        [y[0] + k[0] * s, y[1] + k[1] * s, y[2] + k[2] * s, y[3] + k[3] * s]
    };
    let k1 = rhs(p, z, y);
    let k2 = rhs(p, z + h / 2.0, &add(y, &k1, h / 2.0));
    let k3 = rhs(p, z + h / 2.0, &add(y, &k2, h / 2.0));
    let k4 = rhs(p, z + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Classical RK4 with step doubling along the real segment `[from, to]`.
fn rk4_adaptive(p: (f64, f64, f64), from: f64, to: f64, mut y: [Complex64; 4]) -> [Complex64; 4] {
    let mut x = from;
    let mut h: f64 = 1e-4;
    while x < to {
        h = h.min(to - x);
        let zx = c(x, 0.0);
        let full = rk4_step(p, zx, c(h, 0.0), &y);
        let half = rk4_step(p, zx, c(h / 2.0, 0.0), &y);
        let two = rk4_step(p, zx + h / 2.0, c(h / 2.0, 0.0), &half);
        let err = (0..4).map(|i| (two[i] - full[i]).norm()).fold(0.0, f64::max);
        let scale = 1.0 + (0..4).map(|i| two[i].norm()).fold(0.0, f64::max);
        if err <= 1e-14 * scale {
            x += h;
            y = two;
            h *= 1.5;
        } else {
            h *= 0.5;
        }
    }
    y
}

#[test]
fn basis_matches_independent_integrator() {
    for t in [
        tri([(1, 2), (1, 2), (1, 2)]),
        tri([(1, 3), (2, 5), (3, 4)]),
        tri([(7, 5), (2, 3), (5, 4)]),
        tri([(3, 10), (13, 10), (11, 5)]),
    ] {
        let p = params_from_triple(&t);
        let start = evaluate_basis(&p, c(0.01, 0.0)).unwrap().m;
        let y0 = [start[(0, 0)], start[(0, 1)], start[(1, 0)], start[(1, 1)]];
        let y = rk4_adaptive(p.to_f64(), 0.01, 0.5, y0);
        let target = evaluate_basis(&p, c(0.5, 0.0)).unwrap().m;
        let got = Mat2::new(y[0], y[1], y[2], y[3]);
        let err = (got - target).norm() / target.norm();
        assert!(err < 1e-10, "{t}: {err:e}");
    }
}

#[test]
fn constant_path_is_identity() {
    let p = params_from_triple(&tri([(1, 3), (2, 5), (3, 4)]));
    let f0 = evaluate_basis(&p, c(0.5, 0.2)).unwrap();
    let opts = ContinuationOptions::default();
    let same = continue_along_path(&p, &[f0.z, f0.z], &f0, &opts).unwrap();
    assert_eq!(same.m, f0.m);
}

#[test]
fn reversal_and_contractible_loop_return_to_start() {
    let p = params_from_triple(&tri([(7, 5), (2, 3), (5, 4)]));
    let opts = ContinuationOptions::default();
    let f0 = evaluate_basis(&p, c(0.5, 0.0)).unwrap();
    let path = [c(0.5, 0.0), c(0.5, 0.8), c(-0.7, 0.4), c(-1.5, -0.9), c(2.0, -1.0)];
    let there = continue_along_path(&p, &path, &f0, &opts).unwrap();
    let mut back_path = path;
    back_path.reverse();
    let back = continue_along_path(&p, &back_path, &there, &opts).unwrap();
    assert!((back.m - f0.m).norm() < 1e-10 * f0.m.norm());

    // A loop around neither 0 nor 1.
    let center = c(0.5, 1.0);
    let mut loop_path = vec![c(0.5, 0.0)];
    for k in 0..=40 {
        let ang = -std::f64::consts::FRAC_PI_2 + 2.0 * std::f64::consts::PI * k as f64 / 40.0;
        loop_path.push(center + Complex64::from_polar(0.8, ang));
    }
    loop_path.push(c(0.5, 0.0));
    let around = continue_along_path(&p, &loop_path, &f0, &opts).unwrap();
    assert!((around.m - f0.m).norm() < 1e-10 * f0.m.norm());
}

#[test]
fn path_near_singularity_is_rejected() {
    let p = params_from_triple(&tri([(1, 2), (1, 2), (1, 2)]));
    let f0 = FundamentalMatrix::identity_at(c(0.5, 0.0));
    let err = continue_along_path(&p, &[c(0.5, 0.0), c(-0.5, 1e-4)], &f0, &ContinuationOptions::default());
    assert!(matches!(err, Err(HypergeomError::PathTooClose { .. })));
    let err = continue_along_path(&p, &[c(0.4, 0.0), c(0.6, 0.0)], &f0, &ContinuationOptions::default());
    assert_eq!(err, Err(HypergeomError::PathMismatch));
}

/// `W(z) = C·z^{−c}(1−z)^{c−a−b−1}` along paths in the upper half plane.
#[test]
fn wronskian_follows_abel() {
    for t in [tri([(1, 3), (2, 5), (3, 4)]), tri([(5, 2), (3, 2), (2, 7)])] {
        let p = params_from_triple(&t);
        let (a, b, cc) = p.to_f64();
        let abel = |z: Complex64| (-cc * z.ln()).exp() * ((cc - a - b - 1.0) * (1.0 - z).ln()).exp();
        let opts = ContinuationOptions::default();
        let f0 = evaluate_basis(&p, c(0.5, 0.0)).unwrap();
        let k = f0.wronskian() / abel(f0.z);
        let mut f = f0;
        for z in [c(0.5, 0.5), c(1.5, 0.3), c(3.0, 2.0), c(-2.0, 1.0), c(-0.5, 0.01)] {
            f = continue_along_path(&p, &[f.z, z], &f, &opts).unwrap();
            let ratio = f.wronskian() / abel(z);
            assert!((ratio - k).norm() < 1e-9 * k.norm(), "{t} at {z}");
        }
    }
}

fn params_strategy() -> impl Strategy<Value = HypergeomParams> {
    let q = || (-40i64..40, 1i64..12).prop_map(|(n, d)| Rational::new(n, d));
    (q(), q(), q()).prop_filter("c must not be a non-positive integer", |(_, _, c)| {
        !(c.is_integer() && *c <= Rational::from_integer(0))
    })
    .prop_map(|(a, b, c)| HypergeomParams::new(a, b, c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// The truncated series solves the equation up to a term of order `z^K`.
    #[test]
    fn truncated_series_residual(p in params_strategy(), phase in 0.0f64..6.283) {
        const K: usize = 50;
        let s = series_coefficients(&p, K).unwrap();
        let (a, b, cc) = p.to_f64();
        let z = Complex64::from_polar(0.1, phase);
        let mut w = c(0.0, 0.0);
        let mut dw = c(0.0, 0.0);
        let mut ddw = c(0.0, 0.0);
        for (k, &ak) in s.coefficients.iter().enumerate() {
            let kf = k as f64;
            w += ak * z.powu(k as u32);
            if k >= 1 {
                dw += ak * kf * z.powu(k as u32 - 1);
            }
            if k >= 2 {
                ddw += ak * kf * (kf - 1.0) * z.powu(k as u32 - 2);
            }
        }
        let residual = (z * (1.0 - z) * ddw + (cc - (a + b + 1.0) * z) * dw - a * b * w).norm();
        // The only uncancelled term is −(K+a)(K+b)·a_K·z^{K+1}.
        let top = s.coefficients[K].abs() * ((K as f64 + a) * (K as f64 + b)).abs() * 0.1f64.powi(K as i32 + 1);
        let scale = s.coefficients.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert!(residual <= 2.0 * top + 1e-13 * scale * (1.0 + (a * b).abs() + cc.abs()),
            "residual {residual:e}, top term {top:e}");
    }
}
