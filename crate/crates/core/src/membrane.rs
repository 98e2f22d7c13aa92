//! Circular-arc triangles: the one-sheet Schwarz triangle of a canonical
//! triple, its normalization to geodesic sides, spherical excess and SVG.
//!
//! Points live in the stereographic plane; `z ↦ −1/z̄` is the antipodal map,
//! so great circles are the lines through `0` and the circles with
//! `r² = 1 + |c|²`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::angles::{decide, AngleTriple, CanonicalTriple, ExistenceVerdict, Rule};
use crate::rational::{self, Rational};

type C = Complex64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MembraneError {
    #[error("angle sum {0}π is not greater than π")]
    NotGeodesizable(String),
    #[error("angles {0} do not bound a one-sheet circular triangle")]
    NotOneSheet(String),
    #[error("triple {0} has no integer entry with an admissible membrane")]
    NotIntegerCase(String),
    #[error("degenerate circle configuration")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Circle {
    Round { center: C, radius: f64 },
    Line { point: C, direction: C },
}

/// Normalized Hermitian form `[[A, B], [B̄, D]]` of a circle: the circle is
/// `A|z|² + Bz̄ + B̄z + D = 0` with `|B|² − AD = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Form {
    a: f64,
    d: f64,
    b: C,
}

impl Form {
    fn components(&self) -> [f64; 4] {
        [self.a, self.d, self.b.re, self.b.im]
    }
}

impl Circle {
    /// The circle (or line) through three distinct points.
    pub fn through(p: C, q: C, r: C) -> Self {
        let u = q - p;
        let v = r - p;
        let cross = u.re * v.im - u.im * v.re;
        let scale = u.norm() * v.norm();
        if cross.abs() <= 1e-14 * scale {
            return Circle::Line { point: p, direction: u / u.norm() };
        }
        let (un, vn) = (u.norm_sqr(), v.norm_sqr());
        let center = p + C::new(v.im * un - u.im * vn, u.re * vn - v.re * un) / (2.0 * cross);
        Circle::Round { center, radius: (p - center).norm() }
    }

    fn form(&self) -> Form {
        match *self {
            Circle::Round { center, radius } => Form {
                a: 1.0 / radius,
                b: -center / radius,
                d: (center.norm_sqr() - radius * radius) / radius,
            },
            Circle::Line { point, direction } => {
                let n = C::i() * direction / direction.norm();
                Form { a: 0.0, b: n, d: -2.0 * (n.conj() * point).re }
            }
        }
    }

    /// `|A + D|` of the normalized form; zero exactly for great circles.
    pub fn antipodal_defect(&self) -> f64 {
        let f = self.form();
        (f.a + f.d).abs()
    }

    /// Distance from `z` to the circle, measured in the plane.
    pub fn distance(&self, z: C) -> f64 {
        match *self {
            Circle::Round { center, radius } => ((z - center).norm() - radius).abs(),
            Circle::Line { point, direction } => {
                let u = direction / direction.norm();
                ((z - point) * u.conj()).im.abs()
            }
        }
    }
}

/// A Möbius map `z ↦ (az + b)/(cz + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius {
    pub a: C,
    pub b: C,
    pub c: C,
    pub d: C,
}

impl Mobius {
    pub fn apply(&self, z: C) -> C {
        (self.a * z + self.b) / (self.c * z + self.d)
    }
}

/// An arc from `start` through `mid` to `end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub start: C,
    pub mid: C,
    pub end: C,
}

impl Arc {
    pub fn circle(&self) -> Circle {
        Circle::through(self.start, self.mid, self.end)
    }

    /// Unit tangent at `start`, pointing along the arc.
    pub fn start_tangent(&self) -> C {
        tangent(self.start, self.mid, self.end)
    }

    /// Unit tangent at `end`, pointing back along the arc.
    pub fn end_tangent(&self) -> C {
        tangent(self.end, self.mid, self.start)
    }

    fn map(&self, m: &Mobius) -> Self {
        Self { start: m.apply(self.start), mid: m.apply(self.mid), end: m.apply(self.end) }
    }

    /// `n + 1` points from `start` to `end` along the arc.
    pub fn sample(&self, n: usize) -> Vec<C> {
        match self.circle() {
            Circle::Line { .. } => (0..=n)
                .map(|k| self.start + (self.end - self.start) * (k as f64 / n as f64))
                .collect(),
            Circle::Round { center, radius } => {
                let (a0, sweep) = self.sweep(center);
                (0..=n)
                    .map(|k| center + C::from_polar(radius, a0 + sweep * k as f64 / n as f64))
                    .collect()
            }
        }
    }

    /// Start angle and signed sweep about `center`, passing through `mid`.
    fn sweep(&self, center: C) -> (f64, f64) {
        let a0 = (self.start - center).arg();
        let turn = |z: C| ((z - center).arg() - a0).rem_euclid(2.0 * PI);
        let (m, e) = (turn(self.mid), turn(self.end));
        if m < e {
            (a0, e)
        } else {
            (a0, e - 2.0 * PI)
        }
    }
}

/// Direction at `v` of the circle through `v, m, e`, heading towards `m`.
fn tangent(v: C, m: C, e: C) -> C {
    // Inverting at v turns the circle into a line; follow it in from ∞.
    let t = (m - v) * (e - v) / (e - m);
    t / t.norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircularArcTriangle {
    pub vertices: [C; 3],
    /// `arcs[k]` joins `vertices[k]` to `vertices[(k + 1) % 3]`.
    pub arcs: [Arc; 3],
    /// Interior angles in units of `π`.
    pub angles: [Rational; 3],
}

impl CircularArcTriangle {
    /// Interior angles recomputed from arc tangents, in units of `π`.
    pub fn measured_angles(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let outgoing = self.arcs[k].start_tangent();
            let incoming = self.arcs[(k + 2) % 3].end_tangent();
            *slot = (outgoing / incoming).arg().abs() / PI;
        }
        out
    }

    pub fn map(&self, m: &Mobius) -> Self {
        Self {
            vertices: self.vertices.map(|v| m.apply(v)),
            arcs: self.arcs.map(|a| a.map(m)),
            angles: self.angles,
        }
    }

    /// Closed boundary polyline with `per_arc` segments on each side.
    pub fn boundary(&self, per_arc: usize) -> Vec<C> {
        let mut pts = Vec::with_capacity(3 * per_arc + 1);
        for arc in &self.arcs {
            let s = arc.sample(per_arc);
            pts.extend_from_slice(&s[..per_arc]);
        }
        pts.push(pts[0]);
        pts
    }

    /// Winding number of the boundary about `p`.
    pub fn winding_number(&self, p: C) -> i64 {
        let pts = self.boundary(256);
        let total: f64 = pts.windows(2).map(|w| ((w[1] - p) / (w[0] - p)).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    /// Whether the boundary is a simple closed curve.
    pub fn is_jordan(&self) -> bool {
        let pts = self.boundary(128);
        let n = pts.len() - 1;
        for i in 0..n {
            for j in i + 2..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                if segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1]) {
                    return false;
                }
            }
        }
        true
    }

    pub fn side_circles(&self) -> [Circle; 3] {
        self.arcs.map(|a| a.circle())
    }

    /// Area of the geodesic triangle on the unit sphere spanned by the
    /// vertices (Van Oosterom–Strackee).
    pub fn spherical_excess(&self) -> f64 {
        let [a, b, c] = self.vertices.map(to_sphere);
        let triple = dot(a, cross(b, c));
        let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
        2.0 * triple.abs().atan2(denom)
    }
}

fn segments_cross(p1: C, p2: C, q1: C, q2: C) -> bool {
    let orient = |a: C, b: C, c: C| {
        let u = b - a;
        let v = c - a;
        u.re * v.im - u.im * v.re
    };
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn to_sphere(z: C) -> [f64; 3] {
    let s = 1.0 + z.norm_sqr();
    [2.0 * z.re / s, 2.0 * z.im / s, (1.0 - z.norm_sqr()) / s]
}

fn from_sphere(p: [f64; 3]) -> C {
    C::new(p[0], p[1]) / (1.0 + p[2])
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Point halfway along the arc of the circle through `p, q, avoid` that
/// joins `p` to `q` without passing `avoid`.
fn arc_midpoint(p: C, q: C, avoid: C) -> C {
    match Circle::through(p, q, avoid) {
        Circle::Line { .. } => 0.5 * (p + q),
        Circle::Round { center, radius } => {
            let a0 = (p - center).arg();
            let turn = |z: C| ((z - center).arg() - a0).rem_euclid(2.0 * PI);
            let (e, x) = (turn(q), turn(avoid));
            let half = if x > e { e / 2.0 } else { (e - 2.0 * PI) / 2.0 };
            center + C::from_polar(radius, a0 + half)
        }
    }
}

/// The one-sheet circular triangle with interior angles `πθj`, normalized
/// with vertices `0`, `1` and a third in the upper half-plane.
pub fn schwarz_triangle(c: &CanonicalTriple) -> CircularArcTriangle {
    circular_triangle(c.as_array()).expect("canonical triples bound one-sheet triangles")
}

/// As [`schwarz_triangle`] for any angles in `(0, 1)` bounding a one-sheet
/// triangle.
pub fn circular_triangle(angles: [Rational; 3]) -> Result<CircularArcTriangle, MembraneError> {
    let th = angles.map(|t| rational::to_f64(&t));
    let sum = angles[0] + angles[1] + angles[2];
    let one = Rational::from_integer(1);
    let describe = || format!("({}, {}, {})", angles[0], angles[1], angles[2]);
    if th.iter().any(|&t| t <= 0.0 || t >= 1.0) {
        return Err(MembraneError::NotOneSheet(describe()));
    }
    if sum > one && (0..3).any(|k| sum - angles[k] - angles[k] >= one) {
        return Err(MembraneError::NotOneSheet(describe()));
    }
    let [a, b, c] = th.map(|t| t * PI);
    // Model triangle with the first vertex at 0 and the second on the positive axis.
    let cos_side = |x: f64, y: f64, opposite: f64| (opposite.cos() + x.cos() * y.cos()) / (x.sin() * y.sin());
    let (v1, v2, mid12) = if sum > one {
        let (s01, s02) = (cos_side(a, b, c).acos(), cos_side(a, c, b).acos());
        let v1 = C::new((s01 / 2.0).tan(), 0.0);
        let v2 = C::from_polar((s02 / 2.0).tan(), a);
        let (p, q) = (to_sphere(v1), to_sphere(v2));
        let m = [p[0] + q[0], p[1] + q[1], p[2] + q[2]];
        let norm = dot(m, m).sqrt();
        (v1, v2, from_sphere(m.map(|x| x / norm)))
    } else if sum == one {
        let v2 = C::from_polar(b.sin() / c.sin(), a);
        (C::new(1.0, 0.0), v2, 0.5 * (1.0 + v2))
    } else {
        let (s01, s02) = (cos_side(a, b, c).acosh(), cos_side(a, c, b).acosh());
        let v1 = C::new((s01 / 2.0).tanh(), 0.0);
        let v2 = C::from_polar((s02 / 2.0).tanh(), a);
        // The geodesic through v1 is orthogonal to the unit circle, so it
        // also passes through 1/v̄1, which lies outside the side.
        (v1, v2, arc_midpoint(v1, v2, 1.0 / v1.conj()))
    };
    let s = v1.re;
    let vertices = [C::new(0.0, 0.0), C::new(1.0, 0.0), v2 / s];
    let arcs = [
        Arc { start: vertices[0], mid: C::new(0.5, 0.0), end: vertices[1] },
        Arc { start: vertices[1], mid: mid12 / s, end: vertices[2] },
        Arc { start: vertices[2], mid: 0.5 * vertices[2], end: vertices[0] },
    ];
    Ok(CircularArcTriangle { vertices, arcs, angles })
}

/// A Möbius image of `t` whose sides lie on great circles.
pub fn geodesize(t: &CircularArcTriangle) -> Result<CircularArcTriangle, MembraneError> {
    let sum = t.angles[0] + t.angles[1] + t.angles[2];
    if sum <= Rational::from_integer(1) {
        return Err(MembraneError::NotGeodesizable(rational::format_rational(&sum)));
    }
    // The imaginary circle P (a positive definite form) orthogonal to all
    // three sides is carried to |z|² + 1 by a Möbius map.
    let rows: Vec<[f64; 4]> = t
        .side_circles()
        .iter()
        .map(|c| {
            let f = c.form();
            [-f.d / 2.0, -f.a / 2.0, f.b.re, f.b.im]
        })
        .collect();
    let m = nalgebra::Matrix4::from_fn(|i, j| if i < 3 { rows[i][j] } else { 0.0 });
    let svd = m.svd(false, true);
    let v_t = svd.v_t.ok_or(MembraneError::Degenerate)?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or(MembraneError::Degenerate)?;
    let mut sorted: Vec<f64> = svd.singular_values.iter().copied().collect();
    sorted.sort_by(f64::total_cmp);
    if sorted[1] <= 1e-12 * sorted[3] {
        return Err(MembraneError::Degenerate);
    }
    let mut p = [v_t[(k, 0)], v_t[(k, 1)], v_t[(k, 2)], v_t[(k, 3)]];
    if p[0] < 0.0 {
        p = p.map(|x| -x);
    }
    let p = Form { a: p[0], d: p[1], b: C::new(p[2], p[3]) };
    let det = p.a * p.d - p.b.norm_sqr();
    if p.a <= 0.0 || det <= 0.0 {
        return Err(MembraneError::NotGeodesizable(rational::format_rational(&sum)));
    }
    // P = U*U with U upper triangular; U is the required map.
    let u11 = p.a.sqrt();
    let u12 = p.b / u11;
    let u22 = (p.d - u12.norm_sqr()).sqrt();
    let mobius = Mobius { a: C::new(u11, 0.0), b: u12, c: C::new(0.0, 0.0), d: C::new(u22, 0.0) };
    debug_assert!(p.components().iter().all(|x| x.is_finite()));
    Ok(t.map(&mobius))
}

/// Same predicate as [`decide`].
pub fn membrane_exists(angles: &AngleTriple) -> ExistenceVerdict {
    decide(angles)
}

/// Sides of a membrane with an integer angle lie on at most two circles,
/// which a Möbius map sends to great circles crossing at `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerDiagram {
    pub triple: AngleTriple,
    pub circles: Vec<Circle>,
    /// Angle between the circles at their crossings, in units of `π`.
    pub crossing_angle: Rational,
}

pub fn integer_diagram(t: &AngleTriple) -> Result<IntegerDiagram, MembraneError> {
    let verdict = decide(t);
    if !verdict.exists || verdict.rule == Rule::CanonicalSum {
        return Err(MembraneError::NotIntegerCase(t.to_string()));
    }
    let fractional = t
        .as_array()
        .iter()
        .map(|q| q - Rational::from_integer(rational::floor(q)))
        .find(|q| !rational::is_zero(q))
        .unwrap_or_else(|| Rational::from_integer(0));
    let real_axis = Circle::Line { point: C::new(0.0, 0.0), direction: C::new(1.0, 0.0) };
    let mut circles = vec![real_axis];
    if !rational::is_zero(&fractional) {
        // Through ±1, meeting the real axis at angle πφ: centre i·cot(πφ).
        let phi = rational::to_f64(&fractional) * PI;
        circles.push(if (phi - PI / 2.0).abs() < 1e-15 {
            Circle::Round { center: C::new(0.0, 0.0), radius: 1.0 }
        } else {
            let c = 1.0 / phi.tan();
            Circle::Round { center: C::new(0.0, c), radius: (1.0 + c * c).sqrt() }
        });
    }
    Ok(IntegerDiagram { triple: *t, circles, crossing_angle: fractional })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvgOptions {
    /// Width and height of the image in pixels.
    pub size: u32,
    /// Margin around the figure, as a fraction of its extent.
    pub margin: f64,
    pub stroke: String,
    /// Draw the unit circle (the equator) for reference.
    pub equator: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self { size: 480, margin: 0.15, stroke: "#1f4e79".into(), equator: true }
    }
}

/// Rounds to 9 significant digits and prints the shortest form.
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

struct Frame {
    min: C,
    scale: f64,
    size: f64,
}

impl Frame {
    fn fit(points: &[C], opts: &SvgOptions) -> Self {
        let (mut lo, mut hi) = (C::new(f64::MAX, f64::MAX), C::new(f64::MIN, f64::MIN));
        for p in points {
            lo = C::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = C::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let extent = (hi.re - lo.re).max(hi.im - lo.im).max(1e-9);
        let pad = extent * opts.margin;
        let size = opts.size as f64;
        Self { min: lo - C::new(pad, pad), scale: size / (extent + 2.0 * pad), size }
    }

    fn xy(&self, z: C) -> (String, String) {
        let x = (z.re - self.min.re) * self.scale;
        let y = self.size - (z.im - self.min.im) * self.scale;
        (num(x), num(y))
    }
}

fn svg_header(out: &mut String, size: u32) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
}

fn equator_points() -> Vec<C> {
    (0..=64).map(|k| C::from_polar(1.0, 2.0 * PI * k as f64 / 64.0)).collect()
}

fn polyline(out: &mut String, frame: &Frame, pts: &[C], attrs: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = frame.xy(p);
            format!("{x},{y}")
        })
        .collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" {attrs}/>"#, coords.join(" "));
}

/// Standalone SVG of the triangle in the stereographic plane.
pub fn to_svg(t: &CircularArcTriangle, opts: &SvgOptions) -> String {
    let boundary = t.boundary(64);
    let mut extent = boundary.clone();
    if opts.equator {
        extent.extend(equator_points());
    }
    let frame = Frame::fit(&extent, opts);
    let mut out = String::new();
    svg_header(&mut out, opts.size);
    if opts.equator {
        polyline(&mut out, &frame, &equator_points(), r##"stroke="#999999" stroke-dasharray="4 3""##);
    }
    let mut d = String::new();
    let (x0, y0) = frame.xy(t.vertices[0]);
    let _ = write!(d, "M {x0} {y0}");
    for arc in &t.arcs {
        let (x, y) = frame.xy(arc.end);
        match arc.circle() {
            Circle::Line { .. } => {
                let _ = write!(d, " L {x} {y}");
            }
            Circle::Round { center, radius } => {
                let (_, sweep) = arc.sweep(center);
                let large = u8::from(sweep.abs() > PI);
                // The y axis flips, so counterclockwise becomes sweep flag 0.
                let flag = u8::from(sweep < 0.0);
                let r = num(radius * frame.scale);
                let _ = write!(d, " A {r} {r} 0 {large} {flag} {x} {y}");
            }
        }
    }
    let _ = writeln!(
        out,
        r##"<path d="{d} Z" fill="#dbe8f5" fill-opacity="0.6" stroke="{}" stroke-width="2"/>"##,
        opts.stroke
    );
    let centroid = (t.vertices[0] + t.vertices[1] + t.vertices[2]) / 3.0;
    for (k, v) in t.vertices.iter().enumerate() {
        let (x, y) = frame.xy(*v);
        let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, opts.stroke);
        // Labels sit just outside the vertex, away from the centroid.
        let away = *v - centroid;
        let away = if away.norm() > 0.0 { away / away.norm() } else { C::new(0.0, -1.0) };
        let (lx, ly) = frame.xy(*v + away * (14.0 / frame.scale));
        let _ = writeln!(
            out,
            r#"<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="13" text-anchor="middle">v{}: {}π</text>"#,
            k + 1,
            rational::format_rational(&t.angles[k])
        );
    }
    out.push_str("</svg>\n");
    out
}

/// SVG of the great circles carrying the sides in the integer case.
pub fn integer_diagram_svg(diagram: &IntegerDiagram, opts: &SvgOptions) -> String {
    let view = 2.5;
    let corners = [C::new(-view, -view), C::new(view, view)];
    let frame = Frame::fit(&corners, opts);
    let mut out = String::new();
    svg_header(&mut out, opts.size);
    if opts.equator {
        polyline(&mut out, &frame, &equator_points(), r##"stroke="#999999" stroke-dasharray="4 3""##);
    }
    for circle in &diagram.circles {
        match *circle {
            Circle::Line { point, direction } => {
                let u = direction / direction.norm();
                let pts = [point - u * (2.0 * view), point + u * (2.0 * view)];
                polyline(&mut out, &frame, &pts, &format!(r#"stroke="{}" stroke-width="2""#, opts.stroke));
            }
            Circle::Round { center, radius } => {
                let (cx, cy) = frame.xy(center);
                let _ = writeln!(
                    out,
                    r#"<circle cx="{cx}" cy="{cy}" r="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
                    num(radius * frame.scale),
                    opts.stroke
                );
            }
        }
    }
    for z in [C::new(1.0, 0.0), C::new(-1.0, 0.0)] {
        let (x, y) = frame.xy(z);
        let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#, opts.stroke);
    }
    let (lx, ly) = frame.xy(C::new(0.0, -view * 0.9));
    let _ = writeln!(
        out,
        r#"<text x="{lx}" y="{ly}" font-family="sans-serif" font-size="13" text-anchor="middle">{} · crossing angle {}π</text>"#,
        diagram.triple,
        rational::format_rational(&diagram.crossing_angle)
    );
    out.push_str("</svg>\n");
    out
}
