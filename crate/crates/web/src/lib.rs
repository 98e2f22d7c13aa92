//! Browser bindings: existence verdicts, membrane drawings and a density
//! heat map of the metric on a grid of the stereographic plane.

use num_complex::Complex64;
use serde_json::json;
use wasm_bindgen::prelude::*;

use conicsphere::angles::Witness;
use conicsphere::membrane::{circular_triangle, geodesize, integer_diagram, integer_diagram_svg, to_svg, SvgOptions};
use conicsphere::metric::DevelopingContext;
use conicsphere::rational::format_rational;
use conicsphere::{decide, AngleTriple};

fn parse(t1: &str, t2: &str, t3: &str) -> Result<AngleTriple, String> {
    AngleTriple::parse([t1, t2, t3]).map_err(|e| e.to_string())
}

pub fn decide_report(t1: &str, t2: &str, t3: &str) -> Result<String, String> {
    let t = parse(t1, t2, t3)?;
    let v = decide(&t);
    let witness = match &v.witness {
        Witness::Canonical(c) => {
            json!({ "canonical": c.as_array().iter().map(format_rational).collect::<Vec<_>>() })
        }
        Witness::IntegerCone { position, n, found } => {
            json!({ "position": position, "n": n, "m": found.map(|(m, _)| m) })
        }
        Witness::TwoIntegers { positions } => json!({ "positions": positions }),
        Witness::Degree(d) => json!({ "degree": d }),
    };
    let doc = json!({
        "input": t.as_array().iter().map(format_rational).collect::<Vec<_>>(),
        "rule": v.rule.wire_name(),
        "exists": v.exists,
        "unique": v.unique,
        "witness": witness,
    });
    Ok(doc.to_string())
}

pub fn membrane_document(t1: &str, t2: &str, t3: &str) -> Result<String, String> {
    let t = parse(t1, t2, t3)?;
    let opts = SvgOptions::default();
    match decide(&t).witness {
        Witness::Canonical(c) => {
            let circular = circular_triangle(c.as_array()).map_err(|e| e.to_string())?;
            Ok(match geodesize(&circular) {
                Ok(g) => to_svg(&g, &opts),
                Err(_) => to_svg(&circular, &opts),
            })
        }
        _ => integer_diagram(&t)
            .map(|d| integer_diagram_svg(&d, &opts))
            .map_err(|e| e.to_string()),
    }
}

/// `log10 λ` on an `n × n` grid over `[−extent, extent]²`, row by row from
/// the top; `NaN` where the density cannot be evaluated.
pub fn density_values(t1: &str, t2: &str, t3: &str, n: usize, extent: f64) -> Result<Vec<f64>, String> {
    let t = parse(t1, t2, t3)?;
    let ctx = DevelopingContext::new(&t).map_err(|e| e.to_string())?;
    let n = n.clamp(2, 256);
    let step = 2.0 * extent / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let z = Complex64::new(-extent + step * col as f64, extent - step * row as f64);
            out.push(ctx.density(z).map(|s| s.lambda.log10()).unwrap_or(f64::NAN));
        }
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn decide_json(t1: &str, t2: &str, t3: &str) -> Result<String, JsError> {
    decide_report(t1, t2, t3).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn membrane_svg(t1: &str, t2: &str, t3: &str) -> Result<String, JsError> {
    membrane_document(t1, t2, t3).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn density_grid(t1: &str, t2: &str, t3: &str, n: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    density_values(t1, t2, t3, n, extent).map_err(|e| JsError::new(&e))
}
