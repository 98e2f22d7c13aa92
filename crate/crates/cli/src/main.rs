use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use conicsphere::angles::{canonical_move, canonicalize, Witness};
use conicsphere::hypergeom::{Mat2, Singularity};
use conicsphere::membrane::{
    circular_triangle, geodesize, integer_diagram, integer_diagram_svg, membrane_exists, to_svg,
    CircularArcTriangle, SvgOptions,
};
use conicsphere::metric::{expected_area, DevelopingContext};
use conicsphere::monodromy::{is_unitarizable, monodromy_rep, normalized_trace, MonodromyOptions};
use conicsphere::rational::{format_rational, parse_rational, to_f64};
use conicsphere::rational_maps::{
    catalan_count, construct_integer, degree_for, mobius_equivalent, verify_with, RationalMap,
};
use conicsphere::{decide, AngleTriple, ExistenceVerdict};

#[derive(Parser, Debug)]
#[command(name = "conicsphere", version, about = "Spherical metrics with three conic singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Tolerance override; each subcommand has its own default.
    #[arg(long, global = true, env = "CONICSPHERE_TOL")]
    tol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the document here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Svg,
    Text,
}

#[derive(Args, Debug)]
struct Triple {
    /// Cone parameters θ1 θ2 θ3 at 0, 1, ∞, as "p/q" or terminating decimals.
    #[arg(num_args = 3, value_names = ["THETA1", "THETA2", "THETA3"])]
    thetas: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact existence verdict.
    Decide(Triple),
    /// Canonical representative and the move reaching it.
    Canonicalize(Triple),
    /// Monodromy generators and the unitarity test (default tol 1e-8 on the loop relation).
    Monodromy(Triple),
    /// Total area of the metric by quadrature (default relative tol 1e-6).
    Area(Triple),
    /// Fitted cone exponents against θ − 1 (default tol 1e-2).
    ConeCheck(Triple),
    /// Rational developing map of an integer triple (default verify tol 1e-8).
    Rational {
        #[command(flatten)]
        triple: Triple,
        /// Compare with another map up to Möbius equivalence, given as
        /// ascending coefficients "n0,n1,...;d0,d1,...".
        #[arg(long)]
        compare: Option<String>,
    },
    /// Number of rational maps of degree d with generic prescribed critical points.
    Catalan { d: u64 },
    /// One-sheet circular triangle, geodesized when possible, or the
    /// great-circle diagram of an integer triple. Defaults to SVG output.
    Membrane(Triple),
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn numeric(e: impl std::fmt::Display) -> CliError {
    CliError::Numeric(e.to_string())
}

#[derive(Serialize)]
struct Envelope {
    command: &'static str,
    input: Vec<String>,
    rule: Option<&'static str>,
    exists: Option<bool>,
    unique: Option<bool>,
    witness: Option<Value>,
    diagnostics: Value,
}

impl Envelope {
    fn new(command: &'static str, input: Vec<String>, diagnostics: Value) -> Self {
        Self { command, input, rule: None, exists: None, unique: None, witness: None, diagnostics }
    }

    fn with_verdict(mut self, v: &ExistenceVerdict) -> Self {
        self.rule = Some(v.rule.wire_name());
        self.exists = Some(v.exists);
        self.unique = Some(v.unique);
        self.witness = Some(witness_json(&v.witness));
        self
    }
}

enum Document {
    Report(Envelope),
    Svg(String, Envelope),
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Canonical(c) => json!({
            "kind": "canonical",
            "canonical": c.as_array().iter().map(format_rational).collect::<Vec<_>>(),
        }),
        Witness::IntegerCone { position, n, found } => json!({
            "kind": "integer_cone",
            "position": position,
            "n": n,
            "m": found.map(|(m, _)| m),
            "branch": found.map(|(_, b)| b.as_str()),
        }),
        Witness::TwoIntegers { positions } => json!({ "kind": "two_integers", "positions": positions }),
        Witness::Degree(d) => json!({ "kind": "degree", "degree": d }),
    }
}

fn parse_triple(t: &Triple) -> Result<(AngleTriple, Vec<String>), CliError> {
    let mut qs = Vec::with_capacity(3);
    for s in &t.thetas {
        qs.push(parse_rational(s).map_err(usage)?);
    }
    let triple = AngleTriple::new(qs[0], qs[1], qs[2]).map_err(usage)?;
    Ok((triple, qs.iter().map(format_rational).collect()))
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn matrix(m: &Mat2) -> Value {
    json!([[complex(m[(0, 0)]), complex(m[(0, 1)])], [complex(m[(1, 0)]), complex(m[(1, 1)])]])
}

fn cone_name(s: Singularity) -> &'static str {
    match s {
        Singularity::Zero => "0",
        Singularity::One => "1",
        Singularity::Infinity => "infinity",
    }
}

fn parse_map(spec: &str) -> Result<RationalMap, CliError> {
    let (num, den) = spec
        .split_once(';')
        .ok_or_else(|| usage("--compare expects \"n0,n1,...;d0,d1,...\""))?;
    let coeffs = |s: &str| -> Result<Vec<Complex64>, CliError> {
        s.split(',')
            .map(|c| {
                parse_rational(c)
                    .map(|q| Complex64::new(to_f64(&q), 0.0))
                    .map_err(usage)
            })
            .collect()
    };
    Ok(RationalMap { numerator: coeffs(num)?, denominator: coeffs(den)? })
}

fn triangle_json(t: &CircularArcTriangle) -> Value {
    json!({
        "vertices": t.vertices.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
        "angles": t.angles.iter().map(format_rational).collect::<Vec<_>>(),
        "measured_angles": t.measured_angles(),
        "antipodal_defects": t.side_circles().iter().map(|c| c.antipodal_defect()).collect::<Vec<_>>(),
    })
}

fn run(cli: &Cli) -> Result<Document, CliError> {
    let doc = match &cli.command {
        Command::Decide(t) => {
            let (triple, input) = parse_triple(t)?;
            Document::Report(Envelope::new("decide", input, json!({})).with_verdict(&decide(&triple)))
        }
        Command::Canonicalize(t) => {
            let (triple, input) = parse_triple(t)?;
            let c = canonicalize(&triple).map_err(usage)?;
            let mv = canonical_move(&triple).map_err(usage)?;
            let diagnostics = json!({
                "canonical": c.as_array().iter().map(format_rational).collect::<Vec<_>>(),
                "move": { "signs": mv.signs, "shifts": mv.shifts },
                "sum": format_rational(&c.sum()),
            });
            Document::Report(Envelope::new("canonicalize", input, diagnostics).with_verdict(&decide(&triple)))
        }
        Command::Monodromy(t) => {
            let (triple, input) = parse_triple(t)?;
            let tol = cli.tol.unwrap_or(1e-8);
            let rep = monodromy_rep(&triple, &MonodromyOptions::default()).map_err(numeric)?;
            let report = is_unitarizable(&rep).map_err(numeric)?;
            let defect = rep.loop_relation_defect();
            let gens: Vec<Value> = Singularity::ALL
                .iter()
                .map(|&s| {
                    let m = rep.generator(s);
                    json!({
                        "at": cone_name(s),
                        "matrix": matrix(m),
                        "normalized_trace": complex(normalized_trace(m)),
                    })
                })
                .collect();
            let diagnostics = json!({
                "basepoint": complex(rep.basepoint),
                "generators": gens,
                "loop_relation_defect": defect,
                "loop_relation_ok": defect <= tol,
                "unitarizable": report.unitarizable,
                "invariant_form": matrix(&report.form),
                "form_residual": report.residual,
                "eigen_ratio": report.eigen_ratio,
                "nullity": report.nullity,
                "tolerance": tol,
            });
            Document::Report(Envelope::new("monodromy", input, diagnostics).with_verdict(&decide(&triple)))
        }
        Command::Area(t) => {
            let (triple, input) = parse_triple(t)?;
            let tol = cli.tol.unwrap_or(1e-6);
            let ctx = DevelopingContext::new(&triple).map_err(numeric)?;
            let area = ctx.total_area(tol).map_err(numeric)?;
            let expected = expected_area(&triple);
            let diagnostics = json!({
                "area": area.area,
                "expected": expected,
                "relative_error": (area.area - expected).abs() / expected,
                "error_estimate": area.error_estimate,
                "evaluations": area.evaluations,
                "tolerance": tol,
            });
            Document::Report(Envelope::new("area", input, diagnostics).with_verdict(&decide(&triple)))
        }
        Command::ConeCheck(t) => {
            let (triple, input) = parse_triple(t)?;
            let tol = cli.tol.unwrap_or(1e-2);
            let ctx = DevelopingContext::new(&triple).map_err(numeric)?;
            let thetas = triple.to_f64();
            let mut cones = Vec::new();
            let mut all_pass = true;
            for (k, &s) in Singularity::ALL.iter().enumerate() {
                let fit = ctx.cone_exponent(s).map_err(numeric)?;
                let expected = thetas[k] - 1.0;
                let pass = (fit.slope - expected).abs() <= tol;
                all_pass &= pass;
                cones.push(json!({
                    "at": cone_name(s),
                    "slope": fit.slope,
                    "expected": expected,
                    "residual": fit.residual,
                    "pass": pass,
                }));
            }
            let diagnostics = json!({ "cones": cones, "pass": all_pass, "tolerance": tol });
            Document::Report(Envelope::new("cone-check", input, diagnostics).with_verdict(&decide(&triple)))
        }
        Command::Rational { triple: t, compare } => {
            let (triple, input) = parse_triple(t)?;
            let tol = cli.tol.unwrap_or(1e-8);
            let verdict = decide(&triple);
            let d = degree_for(&triple).map_err(usage)?;
            let map = construct_integer(&triple).map_err(numeric)?;
            let f = map.to_complex();
            let mut diagnostics = json!({
                "degree": d,
                "numerator": map.numerator.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "denominator": map.denominator.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "verified": verify_with(&f, &triple, tol),
                "tolerance": tol,
            });
            if let Some(spec) = compare {
                let g = parse_map(spec)?;
                diagnostics["mobius_equivalent"] = json!(mobius_equivalent(&f, &g, cli.seed, 1e-6));
                diagnostics["seed"] = json!(cli.seed);
            }
            Document::Report(Envelope::new("rational", input, diagnostics).with_verdict(&verdict))
        }
        Command::Catalan { d } => {
            let count = catalan_count(*d).map_err(usage)?;
            Document::Report(Envelope::new(
                "catalan",
                vec![d.to_string()],
                json!({ "d": d, "count": count.to_string() }),
            ))
        }
        Command::Membrane(t) => {
            let (triple, input) = parse_triple(t)?;
            let verdict = membrane_exists(&triple);
            let opts = SvgOptions::default();
            let (svg, diagnostics) = match &verdict.witness {
                Witness::Canonical(c) => {
                    let circular = circular_triangle(c.as_array()).map_err(numeric)?;
                    match geodesize(&circular) {
                        Ok(g) => {
                            let mut d = triangle_json(&g);
                            d["geodesic"] = json!(true);
                            d["spherical_excess"] = json!(g.spherical_excess());
                            (to_svg(&g, &opts), d)
                        }
                        Err(_) => {
                            let mut d = triangle_json(&circular);
                            d["geodesic"] = json!(false);
                            (to_svg(&circular, &opts), d)
                        }
                    }
                }
                _ => {
                    let diagram = integer_diagram(&triple).map_err(usage)?;
                    let d = json!({
                        "circles": diagram.circles.len(),
                        "crossing_angle": format_rational(&diagram.crossing_angle),
                    });
                    (integer_diagram_svg(&diagram, &opts), d)
                }
            };
            Document::Svg(svg, Envelope::new("membrane", input, diagnostics).with_verdict(&verdict))
        }
    };
    Ok(doc)
}

fn text(env: &Envelope) -> String {
    if env.command == "catalan" {
        return format!("{}\n", env.diagnostics["count"].as_str().unwrap_or_default());
    }
    let mut out = format!("{} {}\n", env.command, env.input.join(" "));
    if let (Some(rule), Some(exists)) = (env.rule, env.exists) {
        out.push_str(&format!("exists: {exists} ({rule})\n"));
    }
    if let Some(Value::Object(map)) = &env.witness {
        let w: Vec<String> = map.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!("witness: {}\n", w.join(" ")));
    }
    if let Value::Object(map) = &env.diagnostics {
        for (k, v) in map {
            let v = match v {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{k}: {v}\n"));
        }
    }
    out
}

fn render(cli: &Cli, doc: Document) -> Result<String, CliError> {
    let default = match doc {
        Document::Svg(..) => Format::Svg,
        Document::Report(_) => Format::Json,
    };
    let json_of = |e: &Envelope| serde_json::to_string_pretty(e).map(|s| s + "\n").map_err(numeric);
    match (cli.format.unwrap_or(default), doc) {
        (Format::Svg, Document::Svg(svg, _)) => Ok(svg),
        (Format::Svg, Document::Report(_)) => Err(usage("--format svg is only available for membrane")),
        (Format::Json, Document::Report(e) | Document::Svg(_, e)) => json_of(&e),
        (Format::Text, Document::Report(e) | Document::Svg(_, e)) => Ok(text(&e)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|doc| render(&cli, doc)).and_then(|body| match &cli.out {
        Some(path) => std::fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = match &e {
                CliError::Usage(m) => format!("error: {m}"),
                CliError::Numeric(m) => format!("numeric failure: {m}"),
            };
            eprintln!("{msg}");
            ExitCode::from(e.exit_code())
        }
    }
}
