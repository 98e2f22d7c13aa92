//! Adaptive Gauss–Kronrod (7/15) and periodic trapezoid rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<E>(f: &mut impl FnMut(f64) -> Result<f64, E>, a: f64, b: f64) -> Result<Piece, E> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx)? + f(center + dx)?;
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    Ok(Piece {
        a,
        b,
        value: k * half,
        error: ((k - g) * half).abs(),
    })
}

/// Globally adaptive integration of `f` over `[a, b]`. The second element
/// of the result is `false` when the interval budget ran out first.
pub(crate) fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Result<(Estimate, bool), E> {
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    heap.push(first);
    let mut evaluations = 15;
    let done = |value: f64, error: f64| error <= abs_tol.max(rel_tol * value.abs());
    while !done(value, error) {
        if heap.len() >= max_pieces {
            return Ok((Estimate { value, error, evaluations }, false));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            return Ok((Estimate { value, error, evaluations }, false));
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum in interval order so the result does not depend on heap history.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    Ok((Estimate { value, error, evaluations }, true))
}

/// Trapezoid rule for a `2π`-periodic integrand, doubling the number of
/// nodes until two successive values agree to `rel_tol`.
pub(crate) fn periodic<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    start_nodes: usize,
    max_nodes: usize,
    rel_tol: f64,
) -> Result<(Estimate, bool), E> {
    let tau = std::f64::consts::TAU;
    let mut n = start_nodes.max(4);
    let mut sum = 0.0;
    for k in 0..n {
        sum += f(tau * k as f64 / n as f64)?;
    }
    let mut value = sum * tau / n as f64;
    let mut evaluations = n;
    loop {
        if 2 * n > max_nodes {
            return Ok((
                Estimate { value, error: f64::INFINITY, evaluations },
                false,
            ));
        }
        let mut extra = 0.0;
        for k in 0..n {
            extra += f(tau * (2 * k + 1) as f64 / (2 * n) as f64)?;
        }
        evaluations += n;
        sum += extra;
        n *= 2;
        let next = sum * tau / n as f64;
        let error = (next - value).abs();
        value = next;
        if error <= rel_tol * value.abs() {
            return Ok((Estimate { value, error, evaluations }, true));
        }
    }
}
