use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use cuspangle::alternating::{link_triangulation, LinkDiagram, LinkError};
use cuspangle::angles::{
    angles_from_shapes, find_angle_structure, maximal_semi_structure, parse_shapes, AngleAssignment, AngleKind,
    ShapeOptions,
};
use cuspangle::exact::{format_rational, parse_rational, Rational};
use cuspangle::homology::h1_gate;
use cuspangle::normal::{strict_exists_dual, vertical_outcome, NormalVector, VerticalOutcome};
use cuspangle::ppp::{build_pipeline, spanning_tree, spanning_tree_cones, PolyhedralDecomposition, PppCellulation};
use cuspangle::Triangulation;

#[derive(Parser)]
#[command(name = "cuspangle", version, about = "Angle structures, vertical classes and polyhedral triangulations")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a triangulation or polyhedral decomposition file.
    Validate { path: PathBuf },
    /// Search for an angle structure and run the dual test.
    Angles {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "strict")]
        kind: Kind,
        /// Shape parameters `[[re, im], ...]` to read angles from.
        #[arg(long)]
        shapes: Option<PathBuf>,
    },
    /// Find a normal class carried by the vertical quads of a semi-angle structure.
    Vertical {
        path: PathBuf,
        /// Semi-angle structure as a JSON list of rationals, one per quad type.
        #[arg(long, conflicts_with = "shapes")]
        semi: Option<PathBuf>,
        /// Take the vertical quads from shape parameters instead.
        #[arg(long)]
        shapes: Option<PathBuf>,
        /// Only use vertical quads in these tetrahedra.
        #[arg(long, value_delimiter = ',')]
        tets: Option<Vec<usize>>,
    },
    /// Triangulate a polyhedral decomposition by coning and layered pillows.
    Pipeline {
        path: PathBuf,
        /// `auto`, or one vertex index or name per polyhedron, comma separated.
        #[arg(long, default_value = "auto")]
        cones: String,
        /// Write the triangulation and tetrahedron provenance here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Triangulate the complement of a reduced alternating link from a PD code.
    Link {
        path: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Summarize many input files, each in its own job.
    Batch {
        paths: Vec<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Strict,
    Semi,
    Generalized,
}

impl From<Kind> for AngleKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Strict => AngleKind::Strict,
            Kind::Semi => AngleKind::Semi,
            Kind::Generalized => AngleKind::Generalized,
        }
    }
}

/// Exit codes: 1 invalid input, 2 I/O, 3 negative result.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 1, error: e.into() }
}

fn io(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        error: anyhow!("{}: {e}", path.display()),
    }
}

/// A command's structured result, its text rendering and whether the
/// mathematical answer was negative.
struct Outcome {
    result: Value,
    text: Vec<String>,
    negative: bool,
}

#[derive(Serialize)]
struct Report {
    command: Vec<String>,
    input_sha256: String,
    result: Value,
    elapsed_ms: f64,
}

fn read(path: &Path) -> Result<(String, String), Failure> {
    let bytes = std::fs::read(path).map_err(|e| io(path, e))?;
    let hash = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(invalid)?;
    Ok((text, hash))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| io(path, e))
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

fn load_triangulation(text: &str) -> Result<Triangulation, Failure> {
    Triangulation::from_json(text).map_err(invalid)
}

fn triangulation_summary(t: &Triangulation) -> Value {
    json!({
        "tetrahedra": t.num_tetrahedra(),
        "edge_degrees": t.edge_degrees(),
        "cusps": t.num_cusps(),
    })
}

fn cmd_validate(text: &str) -> Result<Outcome, Failure> {
    let value: Value = serde_json::from_str(text).map_err(invalid)?;
    if value.get("polyhedra").is_some() {
        let d = PolyhedralDecomposition::from_json(text).map_err(invalid)?;
        let mut valences: Vec<usize> = d.edge_classes().iter().map(Vec::len).collect();
        valences.sort_unstable();
        let faces: Vec<usize> = d.polyhedra.iter().map(|p| p.faces.len()).collect();
        return Ok(Outcome {
            text: vec![
                "kind: decomposition".into(),
                format!("polyhedra: {}", d.polyhedra.len()),
                format!("faces: {faces:?}"),
                format!("edge valences: {valences:?}"),
            ],
            result: json!({
                "kind": "decomposition",
                "polyhedra": d.polyhedra.len(),
                "faces": faces,
                "edge_valences": valences,
            }),
            negative: false,
        });
    }
    let t = load_triangulation(text)?;
    let mut result = triangulation_summary(&t);
    result["kind"] = json!("triangulation");
    Ok(Outcome {
        text: vec![
            "kind: triangulation".into(),
            format!("tetrahedra: {}", t.num_tetrahedra()),
            format!("edge degrees: {:?}", t.edge_degrees()),
            format!("cusps: {}", t.num_cusps()),
        ],
        result,
        negative: false,
    })
}

fn dual_summary(t: &Triangulation) -> Result<(Value, String), Failure> {
    let dual = strict_exists_dual(t).map_err(invalid)?;
    let value = json!({
        "exists": dual.exists,
        "max_chi_star": dual.max_chi_star.as_ref().map(format_rational),
        "certificate": dual.witness.as_ref().filter(|_| !dual.exists).map(|x| rationals(x.coords())),
    });
    let line = match (&dual.max_chi_star, dual.exists) {
        (None, _) => "dual: no normal vector with non-negative quads, strict structure exists".to_string(),
        (Some(m), true) => format!("dual: max chi* = {} < 0, strict structure exists", format_rational(m)),
        (Some(m), false) => format!(
            "dual: max chi* = {} >= 0, certificate {}",
            format_rational(m),
            dual.witness.as_ref().expect("witness")
        ),
    };
    Ok((value, line))
}

fn cmd_angles(text: &str, kind: AngleKind, shapes: Option<&str>) -> Result<Outcome, Failure> {
    let t = load_triangulation(text)?;
    let found = find_angle_structure(&t, kind);
    let (dual, dual_line) = dual_summary(&t)?;
    let mut lines = vec![match &found {
        Some(a) => format!("{kind:?} structure: {}", rationals(a.values()).join(" ")).to_lowercase(),
        None => format!("{kind:?} structure: none").to_lowercase(),
    }];
    lines.push(dual_line);
    let mut result = json!({
        "kind": kind,
        "found": found.is_some(),
        "witness": found.as_ref().map(|a| rationals(a.values())),
        "strict_dual": dual,
    });
    if let Some(text) = shapes {
        let z = parse_shapes(text).map_err(invalid)?;
        let s = angles_from_shapes(&t, &z, &ShapeOptions::default()).map_err(invalid)?;
        let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let exact = s.exact();
        lines.push(format!("shapes: flat tetrahedra {:?}", s.flat));
        lines.push(format!("shapes: max arg residual {:.3e}", max_abs(&s.arg_residuals)));
        lines.push(format!("shapes: max log residual {:.3e}", max_abs(&s.log_residuals)));
        if let Some(a) = &exact {
            lines.push(format!("shapes: angles {}", rationals(a.values()).join(" ")));
        }
        result["shapes"] = json!({
            "flat": s.flat,
            "arg_residuals": s.arg_residuals,
            "log_residuals": s.log_residuals,
            "angles": exact.as_ref().map(|a| rationals(a.values())),
            "satisfies_equations": exact.as_ref().map(|a| a.satisfies(&t)),
        });
    }
    Ok(Outcome {
        result,
        text: lines,
        negative: found.is_none(),
    })
}

fn parse_witness(text: &str, t: &Triangulation) -> Result<AngleAssignment, Failure> {
    let raw: Vec<Value> = serde_json::from_str(text).map_err(invalid)?;
    let values = raw
        .iter()
        .map(|v| match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| invalid(anyhow!("witness entries must be rationals")))?;
    if values.len() != 3 * t.num_tetrahedra() {
        return Err(invalid(anyhow!(
            "expected {} angles, got {}",
            3 * t.num_tetrahedra(),
            values.len()
        )));
    }
    let a = AngleAssignment::new(values);
    if !a.satisfies(t) || a.kind() == AngleKind::Generalized {
        return Err(invalid(anyhow!("witness is not a semi-angle structure")));
    }
    Ok(a)
}

fn vector_summary(t: &Triangulation, x: &NormalVector) -> Value {
    let _ = t;
    json!({
        "coordinates": rationals(x.coords()),
        "triangles": format_rational(&x.num_triangles()),
        "quads": format_rational(&x.num_quads()),
        "support": x.support_quads().iter().map(|q| [q.tet, q.axis]).collect::<Vec<_>>(),
    })
}

fn cmd_vertical(
    text: &str,
    semi: Option<&str>,
    shapes: Option<&str>,
    tets: Option<&[usize]>,
) -> Result<Outcome, Failure> {
    let t = load_triangulation(text)?;
    let (mut vertical, source) = if let Some(shapes) = shapes {
        let z = parse_shapes(shapes).map_err(invalid)?;
        let s = angles_from_shapes(&t, &z, &ShapeOptions::default()).map_err(invalid)?;
        (s.vertical_quads(), "shapes".to_string())
    } else {
        let alpha = match semi {
            Some(w) => parse_witness(w, &t)?,
            None => match maximal_semi_structure(&t) {
                Some(a) => a,
                None => {
                    return Ok(Outcome {
                        result: json!({ "semi": null }),
                        text: vec!["semi structure: none".into()],
                        negative: true,
                    })
                }
            },
        };
        let source = rationals(alpha.values()).join(" ");
        (alpha.vertical_quads(), source)
    };
    if let Some(tets) = tets {
        vertical = vertical.restricted_to(tets);
    }
    let quads: Vec<[usize; 2]> = vertical.quads.iter().map(|q| [q.tet, q.axis]).collect();
    let listed: Vec<String> = quads.iter().map(|[t, a]| format!("{t}.{a}")).collect();
    let mut lines = vec![
        format!("semi structure: {source}"),
        format!(
            "vertical quads: {}",
            if listed.is_empty() { "none".to_string() } else { listed.join(" ") }
        ),
    ];
    let outcome = vertical_outcome(&t, &vertical).map_err(invalid)?;
    let (status, class) = match &outcome {
        VerticalOutcome::Closed(x) => {
            lines.push(format!("closed class: {x}"));
            lines.push(format!(
                "triangles: {}, quads: {}",
                format_rational(&x.num_triangles()),
                format_rational(&x.num_quads())
            ));
            ("closed", vector_summary(&t, x))
        }
        VerticalOutcome::SpunOnly(q) => {
            lines.push(format!("spun only: quads {}", rationals(q).join(" ")));
            ("spun_only", json!({ "quads": rationals(q) }))
        }
        VerticalOutcome::None => {
            lines.push("no vertical class".into());
            ("none", Value::Null)
        }
    };
    Ok(Outcome {
        result: json!({
            "semi": source,
            "vertical_quads": quads,
            "status": status,
            "class": class,
        }),
        text: lines,
        negative: matches!(outcome, VerticalOutcome::None),
    })
}

fn cellulation_file(c: &PppCellulation) -> String {
    let mut value: Value = serde_json::from_str(&c.triangulation.to_json()).expect("valid json");
    value["provenance"] = serde_json::to_value(&c.provenance).expect("serializable");
    serde_json::to_string_pretty(&value).expect("serializable") + "\n"
}

fn verdicts(t: &Triangulation, lines: &mut Vec<String>) -> Result<Value, Failure> {
    let gate = h1_gate(t);
    let (dual, dual_line) = dual_summary(t)?;
    let strict = find_angle_structure(t, AngleKind::Strict).is_some();
    lines.push(format!(
        "h1 gate: {} (rank H1 {}, image rank {})",
        if gate.zero_map { "zero map" } else { "non-zero map" },
        gate.h1_rank,
        gate.image_rank
    ));
    lines.push(format!("strict: {strict}"));
    lines.push(dual_line);
    Ok(json!({ "h1_gate": gate, "strict": strict, "strict_dual": dual }))
}

fn cmd_pipeline(text: &str, cones: &str, output: Option<&Path>) -> Result<Outcome, Failure> {
    let d = PolyhedralDecomposition::from_json(text).map_err(invalid)?;
    let auto = cones.trim() == "auto";
    let cone_list = if auto {
        spanning_tree_cones(&d).map_err(invalid)?
    } else {
        let specs: Vec<String> = cones.split(',').map(str::to_string).collect();
        d.resolve_cones(&specs).map_err(invalid)?
    };
    let c = build_pipeline(&d, &cone_list).map_err(invalid)?;
    let tree: Vec<usize> = spanning_tree(&d).map_err(invalid)?.iter().map(|e| e.0).collect();
    let pillows: Vec<Value> = c
        .pillows
        .iter()
        .map(|p| {
            json!({
                "gluing": p.gluing,
                "n": p.n,
                "tetrahedra": p.tetrahedra,
                "tree_face": tree.contains(&p.gluing),
            })
        })
        .collect();
    let tree_pillows = c.pillows.iter().filter(|p| tree.contains(&p.gluing)).count();
    let t = &c.triangulation;
    let mut lines = vec![
        format!("cones: {cone_list:?}"),
        format!(
            "tetrahedra: {} ({} in pyramids)",
            t.num_tetrahedra(),
            c.num_pyramid_tetrahedra()
        ),
        format!("pillows: {}", c.pillows.len()),
    ];
    for p in &c.pillows {
        lines.push(format!(
            "  gluing {}: {}-gon, {} tetrahedra{}",
            p.gluing,
            p.n,
            p.tetrahedra.len(),
            if tree.contains(&p.gluing) { ", tree face" } else { "" }
        ));
    }
    lines.push(format!("pillows on tree faces: {tree_pillows}"));
    let verdict = verdicts(t, &mut lines)?;
    if let Some(path) = output {
        write(path, &cellulation_file(&c))?;
        lines.push(format!("wrote {}", path.display()));
    }
    Ok(Outcome {
        result: json!({
            "cones": cone_list,
            "triangulation": triangulation_summary(t),
            "pyramid_tetrahedra": c.num_pyramid_tetrahedra(),
            "pillows": pillows,
            "tree_gluings": tree,
            "pillows_on_tree_faces": tree_pillows,
            "verdicts": verdict,
        }),
        text: lines,
        negative: false,
    })
}

fn cmd_link(text: &str, output: Option<&Path>) -> Result<Outcome, Failure> {
    let d = LinkDiagram::from_json(text).map_err(invalid)?;
    match link_triangulation(&d) {
        Err(LinkError::HypothesisFailed(reason)) => {
            let g = cuspangle::alternating::flatten(&d).map_err(invalid)?;
            let h = cuspangle::alternating::check_hypotheses(&g);
            Ok(Outcome {
                result: json!({ "hypotheses": h, "failure": reason }),
                text: hypothesis_lines(&h).into_iter().chain([format!("failed: {reason}")]).collect(),
                negative: true,
            })
        }
        Err(e) => Err(invalid(e)),
        Ok(lt) => {
            let t = &lt.cellulation.triangulation;
            let mut lines = hypothesis_lines(&lt.hypotheses);
            lines.push(format!("cones: {:?}", lt.cellulation.cones));
            lines.push(format!(
                "tetrahedra: {}, pillows: {}, cusps: {}",
                t.num_tetrahedra(),
                lt.cellulation.pillows.len(),
                t.num_cusps()
            ));
            let verdict = verdicts(t, &mut lines)?;
            if let Some(path) = output {
                write(path, &cellulation_file(&lt.cellulation))?;
                lines.push(format!("wrote {}", path.display()));
            }
            Ok(Outcome {
                result: json!({
                    "hypotheses": lt.hypotheses,
                    "components": d.num_components(),
                    "cones": lt.cellulation.cones,
                    "triangulation": triangulation_summary(t),
                    "pillows": lt.cellulation.pillows.len(),
                    "verdicts": verdict,
                }),
                text: lines,
                negative: false,
            })
        }
    }
}

fn hypothesis_lines(h: &cuspangle::alternating::Hypotheses) -> Vec<String> {
    vec![
        format!("no bigons: {}", h.no_bigons),
        format!("four-point curves bound one crossing: {}", h.four_curve_ok),
        format!(
            "distant pair: {}",
            h.distant_pair.map_or("none".into(), |(v, w)| format!("{v}, {w}"))
        ),
    ]
}

/// Picks the right command for a file by its top-level shape.
fn summarize(path: &Path) -> Value {
    let run = || -> Result<(Value, String, bool), Failure> {
        let (text, hash) = read(path)?;
        let value: Value = serde_json::from_str(&text).map_err(invalid)?;
        let outcome = if value.is_array() {
            cmd_link(&text, None)?
        } else if value.get("polyhedra").is_some() {
            cmd_pipeline(&text, "auto", None)?
        } else {
            cmd_angles(&text, AngleKind::Strict, None)?
        };
        Ok((outcome.result, hash, outcome.negative))
    };
    match run() {
        Ok((result, hash, negative)) => json!({
            "path": path.display().to_string(),
            "input_sha256": hash,
            "exit": if negative { 3 } else { 0 },
            "result": result,
        }),
        Err(f) => json!({
            "path": path.display().to_string(),
            "exit": f.code,
            "error": f.error.to_string(),
        }),
    }
}

fn cmd_batch(paths: &[PathBuf], jobs: usize) -> Outcome {
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Value> = vec![Value::Null; paths.len()];
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(paths.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = paths.get(i) else { break };
                let v = summarize(path);
                results.lock().expect("no poisoned jobs")[i] = v;
            });
        }
    });
    let lines = slots
        .iter()
        .map(|v| {
            format!(
                "{}: exit {}{}",
                v["path"].as_str().unwrap_or("?"),
                v["exit"],
                v.get("error").map_or(String::new(), |e| format!(" ({})", e.as_str().unwrap_or("")))
            )
        })
        .collect();
    let worst = slots.iter().filter_map(|v| v["exit"].as_u64()).filter(|&c| c != 3).max().unwrap_or(0);
    Outcome {
        negative: false,
        text: lines,
        result: json!({ "files": slots, "worst_exit": worst }),
    }
}

fn run(cli: &Cli) -> Result<(Outcome, String), Failure> {
    let (input, outcome) = match &cli.command {
        Command::Validate { path } => {
            let (text, hash) = read(path)?;
            (hash, cmd_validate(&text)?)
        }
        Command::Angles { path, kind, shapes } => {
            let (text, hash) = read(path)?;
            let shapes = shapes.as_deref().map(read).transpose()?;
            (hash, cmd_angles(&text, (*kind).into(), shapes.as_ref().map(|s| s.0.as_str()))?)
        }
        Command::Vertical {
            path,
            semi,
            shapes,
            tets,
        } => {
            let (text, hash) = read(path)?;
            let semi = semi.as_deref().map(read).transpose()?;
            let shapes = shapes.as_deref().map(read).transpose()?;
            let outcome = cmd_vertical(
                &text,
                semi.as_ref().map(|s| s.0.as_str()),
                shapes.as_ref().map(|s| s.0.as_str()),
                tets.as_deref(),
            )?;
            (hash, outcome)
        }
        Command::Pipeline { path, cones, output } => {
            let (text, hash) = read(path)?;
            (hash, cmd_pipeline(&text, cones, output.as_deref())?)
        }
        Command::Link { path, output } => {
            let (text, hash) = read(path)?;
            (hash, cmd_link(&text, output.as_deref())?)
        }
        Command::Batch { paths, jobs } => {
            let mut h = Sha256::new();
            for p in paths {
                h.update(p.display().to_string().as_bytes());
                h.update([0]);
            }
            (hex::encode(h.finalize()), cmd_batch(paths, *jobs))
        }
    };
    Ok((outcome, input))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    match run(&cli) {
        Ok((outcome, hash)) => {
            let code = match (&cli.command, outcome.negative) {
                (_, true) => 3,
                (Command::Batch { .. }, _) => outcome.result["worst_exit"].as_u64().unwrap_or(0) as u8,
                _ => 0,
            };
            let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
            // A closed pipe downstream is not an error worth reporting.
            let mut out = std::io::stdout().lock();
            if cli.json {
                let report = Report {
                    command: std::env::args().skip(1).collect(),
                    input_sha256: hash,
                    result: outcome.result,
                    elapsed_ms,
                };
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"));
            } else {
                for line in &outcome.text {
                    let _ = writeln!(out, "{line}");
                }
                let _ = writeln!(out, "input sha256: {hash}");
                let _ = writeln!(out, "time: {elapsed_ms:.1} ms");
            }
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
