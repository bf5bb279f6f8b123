//! `folia`: validate foliation models, run the identity battery, print
//! curvature reports, vanishing verdicts and heat decay curves.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use folia_core::connections::{Eps, Geometry};
use folia_core::curvature;
use folia_core::frames::FrameSpec;
use folia_core::models::ModelRegistry;
use folia_core::scalar::{render, Rational};
use folia_core::spectral;
use folia_core::verify::{self, CheckRegistry, VerifyConfig, SCHEMA_VERSION};

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;

#[derive(Parser)]
#[command(name = "folia", version, about = "Bochner-type checks for totally geodesic Riemannian foliations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in models and checks.
    List,
    /// Run the adapted-frame validity checks.
    Validate(Source),
    /// Run the identity battery.
    Verify(VerifyArgs),
    /// Curvature tables and eigenvalues at one epsilon.
    Report(ReportArgs),
    /// Per-degree de Rham vanishing verdicts.
    Verdict(Source),
    /// Heat semigroup norms on invariant forms, as CSV.
    Heat(HeatArgs),
}

#[derive(Args, Clone)]
struct Source {
    /// Built-in model name.
    #[arg(long, conflicts_with = "file")]
    model: Option<String>,
    /// Model file in the FrameSpec JSON schema.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Write the full JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated epsilons; `inf` is the adiabatic limit.
    #[arg(long, default_value = "1,inf", value_delimiter = ',')]
    eps: Vec<String>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Jet order of random inputs (each check enforces its own minimum).
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Exact rational arithmetic; residuals must be identically zero.
    #[arg(long)]
    exact: bool,
    /// Debug: let frame derivatives commute (d^2 = 0 should then fail).
    #[arg(long)]
    no_commutator_constraints: bool,
    /// Comma-separated check names; all checks when omitted.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "1")]
    eps: String,
}

#[derive(Args)]
struct HeatArgs {
    #[command(flatten)]
    source: Source,
    /// Form degree.
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// A positive rational, or `auto` to pick the smallest power of two with
    /// a positive closed 1-form bound.
    #[arg(long, default_value = "auto")]
    eps: String,
    /// Time grid `start:end:step`.
    #[arg(long, default_value = "0:10:0.5")]
    t: String,
}

/// Input problems, reported with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn load(source: &Source) -> Result<FrameSpec, InputError> {
    match (&source.model, &source.file) {
        (Some(name), None) => Ok(ModelRegistry::builtin().build(name)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            FrameSpec::from_json_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
        }
        _ => Err(InputError("exactly one of --model or --file is required".to_string())),
    }
}

fn write_json(path: &Option<PathBuf>, text: &str) -> Result<(), InputError> {
    if let Some(p) = path {
        std::fs::write(p, format!("{text}\n")).map_err(|e| InputError(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn parse_eps(text: &str) -> Result<Eps<Rational>, InputError> {
    Eps::parse(text).map_err(|e| InputError(format!("--eps: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::List => cmd_list(),
        Command::Validate(s) => cmd_validate(&s),
        Command::Verify(a) => cmd_verify(&a),
        Command::Report(a) => cmd_report(&a),
        Command::Verdict(s) => cmd_verdict(&s),
        Command::Heat(a) => cmd_heat(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn cmd_list() -> Result<bool, InputError> {
    println!("models:");
    for (name, desc) in ModelRegistry::builtin().describe() {
        println!("  {name:<26} {desc}");
    }
    println!("checks:");
    for (name, desc) in CheckRegistry::builtin().describe() {
        println!("  {name:<26} {desc}");
    }
    Ok(true)
}

fn cmd_validate(source: &Source) -> Result<bool, InputError> {
    let spec = load(source)?;
    let report = spec.validate();
    for c in &report.checks {
        let status = match (c.passed, c.required) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "INFO",
        };
        println!("{status:<5} {:<32} {}", c.name, c.detail);
    }
    let passed = report.passed();
    println!("{}: {}", spec.name, if passed { "PASS" } else { "FAIL" });
    let checks: Vec<Value> = report
        .checks
        .iter()
        .map(|c| json!({"name": c.name, "passed": c.passed, "required": c.required, "detail": c.detail}))
        .collect();
    let doc = json!({"schema": SCHEMA_VERSION, "command": "validate", "model": spec.name, "passed": passed, "checks": checks});
    write_json(&source.json, &pretty(&doc))?;
    Ok(passed)
}

fn cmd_verify(a: &VerifyArgs) -> Result<bool, InputError> {
    let spec = load(&a.source)?;
    let eps = a.eps.iter().map(|e| parse_eps(e)).collect::<Result<Vec<_>, _>>()?;
    let config = VerifyConfig {
        eps,
        trials: a.trials,
        seed: a.seed,
        order: a.order,
        tolerance: a.tolerance,
        exact: a.exact,
        constraints: !a.no_commutator_constraints,
    };
    let report = match verify::verify(&spec, config, &a.checks, verify::threads_from_env()) {
        Err(e @ verify::VerifyError::UnknownCheck { .. }) => return Err(e.into()),
        r => r.map_err(|e| InputError(format!("verification aborted: {e}")))?,
    };
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{status:<5} {:<22} cases {:>6}  failures {:>5}  max residual {:.3e} {}", c.name, c.cases, c.failures, c.max_residual, c.detail);
    }
    println!("{}: {} ({:.2}s)", spec.name, if report.passed { "PASS" } else { "FAIL" }, report.wall_time_s);
    write_json(&a.source.json, &report.to_json())?;
    Ok(report.passed)
}

fn table_json(t: &[Vec<Rational>]) -> Value {
    Value::Array(t.iter().map(|r| Value::Array(r.iter().map(|v| Value::String(render(v))).collect())).collect())
}

fn print_table(title: &str, t: &[Vec<Rational>]) {
    println!("{title}:");
    for row in t {
        let cells: Vec<String> = row.iter().map(|v| format!("{:>10}", render(v))).collect();
        println!("  {}", cells.join(" "));
    }
}

fn cmd_report(a: &ReportArgs) -> Result<bool, InputError> {
    let start = Instant::now();
    let spec = load(&a.source)?;
    let eps = parse_eps(&a.eps)?;
    let geo: Geometry<Rational> = Geometry::new(&spec);
    let q = curvature::q_tensor(&geo)?;
    let rh = curvature::horizontal_curvature_operator(&geo)?;
    let vpt = curvature::vertical_parallel_torsion(&geo)?;
    let fibers = curvature::fiber_bounds(&geo)?;
    let yang_mills = geo.is_yang_mills()?;
    let valid = spec.validate().passed();
    println!("model {} (n = {}, m = {}), eps = {}", spec.name, spec.n, spec.m, a.eps);
    println!("valid {valid}  homogeneous {}  compact claim {}  yang-mills {yang_mills}", spec.homogeneous, spec.compact);
    print_table("Q", &q.matrix);
    println!("  min eigenvalue (symmetric part) {:.6}, horizontal block {:.6}", q.min_eigenvalue, q.min_horizontal_eigenvalue);
    print_table("R_H on pairs", &rh.matrix);
    println!("  min eigenvalue {:.6}", rh.min_eigenvalue);
    println!("nabla_Z T = 0: {}", vpt.parallel);
    let mut doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "report",
        "model": spec.name,
        "parameters": {"eps": a.eps},
        "valid": valid,
        "homogeneous": spec.homogeneous,
        "compact_claim": spec.compact,
        "yang_mills": yang_mills,
        "q": {"matrix": table_json(&q.matrix), "min_eigenvalue": q.min_eigenvalue, "symmetric": q.symmetric},
        "horizontal_curvature_operator": {"matrix": table_json(&rh.matrix), "min_eigenvalue": rh.min_eigenvalue},
        "vertical_parallel_torsion": vpt.parallel,
        "fiber_bounds": fibers.iter().map(|f| json!({"bigrade": [f.bigrade.0, f.bigrade.1], "c1": f.c1})).collect::<Vec<_>>(),
    });
    println!("c1 on bigraded fibers:");
    for f in &fibers {
        println!("  ({}, {}) {:.6}", f.bigrade.0, f.bigrade.1, f.c1);
    }
    if let Some(e) = eps.value() {
        let ricci = curvature::ricci_canonical_variation(&geo, &eps)?;
        print_table("Ricci of g_eps", &ricci);
        let c = spectral::closed_one_form_constant(&geo, e)?;
        println!("closed 1-form bound c_eps {c:.6}");
        doc["ricci_g_eps"] = table_json(&ricci);
        doc["closed_one_form_bound"] = json!(c);
    }
    eprintln!("({:.2}s)", start.elapsed().as_secs_f64());
    write_json(&a.source.json, &pretty(&doc))?;
    Ok(true)
}

fn cmd_verdict(source: &Source) -> Result<bool, InputError> {
    let spec = load(source)?;
    let v = spectral::cohomology_verdict(&spec)?;
    println!("model {} (n = {}, m = {}), compact claim {}, valid {}", v.model, v.n, v.m, v.compact, v.valid);
    println!("min eig Q {:.6}  min eig R_H {:.3e}  nabla_Z T = 0 {}  yang-mills {}", v.q_min_eigenvalue, v.rh_min_eigenvalue, v.vertical_parallel_torsion, v.yang_mills);
    for d in &v.degrees {
        println!("H^{} {:<14} {}", d.degree, d.status.label(), d.certificate);
    }
    for n in &v.notes {
        println!("note: {n}");
    }
    let doc = json!({
        "schema": SCHEMA_VERSION,
        "command": "verdict",
        "model": v.model,
        "compact_claim": v.compact,
        "valid": v.valid,
        "q_min_eigenvalue": v.q_min_eigenvalue,
        "rh_min_eigenvalue": v.rh_min_eigenvalue,
        "vertical_parallel_torsion": v.vertical_parallel_torsion,
        "yang_mills": v.yang_mills,
        "k_contact_consistent": v.k_contact_consistent,
        "degrees": v.degrees.iter().map(|d| json!({"degree": d.degree, "status": d.status.label(), "certificate": d.certificate})).collect::<Vec<_>>(),
        "notes": v.notes,
    });
    write_json(&source.json, &pretty(&doc))?;
    Ok(true)
}

fn time_grid(text: &str) -> Result<Vec<f64>, InputError> {
    let parts: Vec<f64> = text.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| InputError(format!("--t: {e}")))?;
    let [a, b, step] = parts[..] else {
        return Err(InputError("--t expects start:end:step".to_string()));
    };
    if !(step > 0.0) || a < 0.0 || b < a {
        return Err(InputError("--t needs 0 <= start <= end and step > 0".to_string()));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| a + step * i as f64).collect())
}

fn cmd_heat(a: &HeatArgs) -> Result<bool, InputError> {
    let spec = load(&a.source)?;
    if !spec.homogeneous {
        return Err(InputError(format!("model '{}' does not have constant structure functions", spec.name)));
    }
    let geo: Geometry<Rational> = Geometry::new(&spec);
    let eps = if a.eps == "auto" {
        match spectral::auto_epsilon(&geo)? {
            Some((e, _)) => e,
            None => return Err(InputError(format!("no epsilon up to 2^{} gives a positive bound", spectral::AUTO_EPS_CAP))),
        }
    } else {
        parse_eps(&a.eps)?.value().cloned().ok_or_else(|| InputError("heat needs a finite epsilon".to_string()))?
    };
    let grid = time_grid(&a.t)?;
    let op = spectral::invariant_matrix(&spec, &Eps::Finite(eps.clone()), a.k)?;
    let c = if a.k == 1 { Some(spectral::closed_one_form_constant(&geo, &eps)?) } else { None };
    let start: Vec<f64> = vec![1.0; op.dim()];
    let n0 = op.norm(&start);
    println!("# model {} k {} eps {} garding {:.6}", spec.name, a.k, render(&eps), spectral::garding_constant(&op));
    println!("t,norm,bound");
    let mut rows = Vec::new();
    for &t in &grid {
        let at = spectral::heat_apply(&op, t, &start)?;
        let norm = op.norm(&at) / n0;
        let bound = c.map(|c| (-c * t).exp());
        println!("{t},{norm:.12e},{}", bound.map(|b| format!("{b:.12e}")).unwrap_or_default());
        rows.push(json!({"t": t, "norm": norm, "bound": bound}));
    }
    let doc = json!({"schema": SCHEMA_VERSION, "command": "heat", "model": spec.name, "k": a.k, "eps": render(&eps), "c_eps": c, "curve": rows});
    write_json(&a.source.json, &pretty(&doc))?;
    Ok(true)
}
