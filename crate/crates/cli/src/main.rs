//! `bures-kit`: fidelity between mixed states by every implemented route,
//! the classical inequality bounds, parallel transport along operator
//! curves, pure-state geometric phases, and seeded verification sweeps.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error.

mod format;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use bures_core::channels::QFunctional;
use bures_core::fidelity::{
    bound_power_mean, bound_trace_norm, fidelity, fidelity_via_geometric_mean, BoundReport,
};
use bures_core::purification::fidelity_via_purification;
use bures_core::transport::{
    pure_state_transport, transport, Amplitude, DensityCurve, TransportOptions, TransportScheme,
};
use bures_core::variational::{inf_sum, OptimizerOptions};
use bures_core::verify::{self, Suite, SweepConfig};
use bures_core::{CoreError, Tolerances};

use format::{matrix_entries, MatrixFile, MatrixKind, ParseError};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Run parameters: tolerances, seed and sweep sizes. Loadable from TOML,
/// overridable by flags; every report embeds the values that were used.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
struct RunConfig {
    seed: u64,
    samples: usize,
    dims: Vec<usize>,
    grid_resolution: usize,
    tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 200,
            dims: vec![2, 3, 4],
            grid_resolution: 100,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Parser)]
#[command(name = "bures-kit", version, about = "Mixed-state fidelity, Bures transport and verification sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration (tolerances, seed, sweep sizes).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,

    /// RNG seed; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    /// Closed form Tr (ρ₁^{1/2} ρ₂ ρ₁^{1/2})^{1/2}.
    Closed,
    /// Geometric-mean route Tr (ρ₂ # ρ₁^{[-1]}) ρ₁.
    Gmean,
    /// Variational infimum ½ inf (Tr ρ₁A + Tr ρ₂A⁻¹).
    Variational,
    /// Overlap maximization over purifications.
    Purification,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Midpoint,
    Forward,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FunctionalArg {
    /// The transition probability itself.
    TransitionProbability,
    /// Tr ρ₁^s ρ₂^{1-s} at s = 1/2.
    PowerTrace,
    /// Quarter of the trace-norm bound right-hand side.
    TraceNormBound,
    /// Product of traces — the negative control; must fail.
    ProductTraces,
}

impl From<FunctionalArg> for QFunctional {
    fn from(f: FunctionalArg) -> Self {
        match f {
            FunctionalArg::TransitionProbability => QFunctional::TransitionProbability,
            FunctionalArg::PowerTrace => QFunctional::PowerTrace(0.5),
            FunctionalArg::TraceNormBound => QFunctional::TraceNormBound,
            FunctionalArg::ProductTraces => QFunctional::ProductOfTraces,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity and transition probability between two density files.
    Fidelity {
        file1: PathBuf,
        file2: PathBuf,
        #[arg(long, value_enum, default_value = "closed")]
        method: MethodArg,
        /// Compute every route and report cross-method deltas.
        #[arg(long)]
        all: bool,
    },
    /// Power-mean and trace-norm bounds for two positive-operator files.
    Bounds { file1: PathBuf, file2: PathBuf },
    /// Parallel transport along a density curve: Bures length, residuals,
    /// holonomy and phase for closed curves.
    Transport {
        curve: PathBuf,
        /// Fail unless the curve is closed (holonomy is only defined
        /// there).
        #[arg(long)]
        holonomy: bool,
        /// Write the lifted amplitude curve to a JSON file.
        #[arg(long, value_name = "OUT")]
        emit_lift: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "midpoint")]
        scheme: SchemeArg,
    },
    /// Geometric (Berry) phase of a curve of pure-state vectors.
    Phase { curve: PathBuf },
    /// Seeded verification sweeps.
    Verify {
        /// monotonicity, concavity, bounds, functor, transport or all.
        suite: String,
        #[arg(long)]
        samples: Option<usize>,
        /// Dimensions to sweep (repeatable).
        #[arg(long = "dim")]
        dims: Vec<usize>,
        /// Restrict the functor suite to a single candidate functional.
        #[arg(long, value_enum)]
        functional: Option<FunctionalArg>,
    },
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

// one-line config echo so text reports are self-describing
fn config_line(cfg: &RunConfig) -> String {
    format!(
        "  config: seed={} psd_tol={:e} opt_tol={:e} inequality_tol={:e} closure_tol={:e}\n",
        cfg.seed,
        cfg.tolerances.psd_tol,
        cfg.tolerances.opt_tol,
        cfg.tolerances.inequality_tol,
        cfg.tolerances.closure_tol
    )
}

fn read_file(path: &Path) -> Result<String, CliError> {
    Ok(std::fs::read_to_string(path)?)
}

fn load_matrix(path: &Path) -> Result<MatrixFile, CliError> {
    let text = read_file(path)?;
    format::parse_matrix_file(&text)
        .map_err(|source| CliError::Parse { path: path.display().to_string(), source })
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = match &cli.config {
        Some(path) => {
            let text = read_file(path)?;
            toml::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let t = &cfg.tolerances;
    for (name, value) in [
        ("hermiticity_tol", t.hermiticity_tol),
        ("psd_tol", t.psd_tol),
        ("trace_tol", t.trace_tol),
        ("rank_tol_factor", t.rank_tol_factor),
        ("residual_tol", t.residual_tol),
        ("opt_tol", t.opt_tol),
        ("closure_tol", t.closure_tol),
        ("curve_step_tol", t.curve_step_tol),
        ("inequality_tol", t.inequality_tol),
    ] {
        if !(value.is_finite() && value > 0.0) {
            return Err(CliError::Input(format!("tolerance {name} must be positive, got {value}")));
        }
    }
    Ok(cfg)
}

fn input_summary(path: &Path, file: &MatrixFile) -> Value {
    json!({
        "path": path.display().to_string(),
        "dim": file.dim,
        "kind": file.kind.as_str(),
    })
}

struct Report {
    text: String,
    json: Value,
    failed: bool,
}

fn emit(report: &Report, as_json: bool) {
    if as_json {
        println!("{}", serde_json::to_string_pretty(&report.json).expect("serializable report"));
    } else {
        print!("{}", report.text);
    }
}

fn envelope(command: &str, inputs: Value, config: &RunConfig, results: Value, violations: Value) -> Value {
    json!({
        "schema_version": "1",
        "command": command,
        "inputs": inputs,
        "config": config,
        "results": results,
        "violations": violations,
    })
}

fn require_kind(file: &MatrixFile, path: &Path, allowed: &[MatrixKind]) -> Result<(), CliError> {
    if allowed.contains(&file.kind) {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{}: kind={} not usable here (expected one of {})",
            path.display(),
            file.kind.as_str(),
            allowed.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
        )))
    }
}

fn cmd_fidelity(
    cfg: &RunConfig,
    file1: &Path,
    file2: &Path,
    method: MethodArg,
    all: bool,
) -> Result<Report, CliError> {
    let m1 = load_matrix(file1)?;
    let m2 = load_matrix(file2)?;
    require_kind(&m1, file1, &[MatrixKind::Density])?;
    require_kind(&m2, file2, &[MatrixKind::Density])?;
    let r1 = m1.to_density()?;
    let r2 = m2.to_density()?;
    let tol = &cfg.tolerances;
    let opts = OptimizerOptions { tol: tol.opt_tol, ..Default::default() };

    let compute = |m: MethodArg| -> Result<(&'static str, f64), CliError> {
        let (name, f) = match m {
            MethodArg::Closed => ("closed_form", fidelity(&r1, &r2)?.fidelity),
            MethodArg::Gmean => {
                ("geometric_mean", fidelity_via_geometric_mean(&r1, &r2, tol)?.fidelity)
            }
            MethodArg::Variational => ("variational", inf_sum(&r1, &r2, &opts)?.value),
            MethodArg::Purification => {
                ("purification", fidelity_via_purification(&r1, &r2, &opts)?.fidelity)
            }
        };
        Ok((name, f))
    };

    let methods: Vec<MethodArg> = if all {
        vec![MethodArg::Closed, MethodArg::Gmean, MethodArg::Variational, MethodArg::Purification]
    } else {
        vec![method]
    };

    let mut results = serde_json::Map::new();
    let mut text = String::from("fidelity\n");
    text.push_str(&config_line(cfg));
    let mut values = Vec::new();
    for m in methods {
        let (name, f) = compute(m)?;
        values.push(f);
        results.insert(name.into(), json!({ "fidelity": f, "transition_probability": f * f }));
        text.push_str(&format!(
            "  {name}: fidelity = {}  transition_probability = {}\n",
            fmt_f(f),
            fmt_f(f * f)
        ));
    }
    if all {
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let delta = max - min;
        results.insert("max_cross_method_delta".into(), json!(delta));
        text.push_str(&format!("  max cross-method delta = {}\n", fmt_f(delta)));
    }

    let inputs = json!([input_summary(file1, &m1), input_summary(file2, &m2)]);
    Ok(Report {
        json: envelope("fidelity", inputs, cfg, Value::Object(results), json!([])),
        text,
        failed: false,
    })
}

fn bound_row(name: &str, s: Option<f64>, rep: &BoundReport) -> (String, Value) {
    let label = match s {
        Some(s) => format!("{name}(s={s:.1})"),
        None => name.to_string(),
    };
    let text = format!(
        "  {label}: lhs = {}  rhs = {}  slack = {}  {}\n",
        fmt_f(rep.lhs),
        fmt_f(rep.rhs),
        fmt_f(rep.slack),
        if rep.holds { "ok" } else { "VIOLATED" }
    );
    let value = json!({
        "bound": label,
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "slack": rep.slack,
        "holds": rep.holds,
    });
    (text, value)
}

fn cmd_bounds(cfg: &RunConfig, file1: &Path, file2: &Path) -> Result<Report, CliError> {
    let m1 = load_matrix(file1)?;
    let m2 = load_matrix(file2)?;
    require_kind(&m1, file1, &[MatrixKind::Density, MatrixKind::Positive])?;
    require_kind(&m2, file2, &[MatrixKind::Density, MatrixKind::Positive])?;
    let w1 = m1.to_positive()?;
    let w2 = m2.to_positive()?;
    let tol = &cfg.tolerances;

    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut text = String::from("bounds\n");
    text.push_str(&config_line(cfg));
    for k in 1..10 {
        let s = k as f64 / 10.0;
        let rep = bound_power_mean(&w1, &w2, s, tol)?;
        let (line, value) = bound_row("power_mean", Some(s), &rep);
        text.push_str(&line);
        if !rep.holds {
            violations.push(value.clone());
        }
        rows.push(value);
    }
    let rep = bound_trace_norm(&w1, &w2, tol)?;
    let (line, value) = bound_row("trace_norm", None, &rep);
    text.push_str(&line);
    if !rep.holds {
        violations.push(value.clone());
    }
    rows.push(value);

    let failed = !violations.is_empty();
    text.push_str(&format!("  result: {}\n", if failed { "FAIL" } else { "pass" }));
    let inputs = json!([input_summary(file1, &m1), input_summary(file2, &m2)]);
    Ok(Report {
        json: envelope("bounds", inputs, cfg, json!({ "bounds": rows }), json!(violations)),
        text,
        failed,
    })
}

fn cmd_transport(
    cfg: &RunConfig,
    curve_path: &Path,
    holonomy: bool,
    emit_lift: Option<&Path>,
    scheme: SchemeArg,
) -> Result<Report, CliError> {
    let text_in = read_file(curve_path)?;
    let parsed = format::parse_curve_file(&text_in)
        .map_err(|source| CliError::Parse { path: curve_path.display().to_string(), source })?;
    if parsed.blocks[0].kind != MatrixKind::Density {
        return Err(CliError::Input(format!(
            "{}: transport curves must hold kind=density blocks",
            curve_path.display()
        )));
    }
    let tol = &cfg.tolerances;
    let mut states = Vec::with_capacity(parsed.blocks.len());
    for b in &parsed.blocks {
        states.push(b.to_density()?);
    }
    let curve = DensityCurve::with_tolerances(parsed.grid.clone(), states, tol)?;
    if holonomy && !curve.is_closed(tol) {
        return Err(CoreError::NotClosed(curve.closure_defect()).into());
    }

    let w0 = Amplitude::from_sqrt(&curve.states()[0].clone());
    let opts = TransportOptions {
        scheme: match scheme {
            SchemeArg::Midpoint => TransportScheme::Midpoint,
            SchemeArg::Forward => TransportScheme::Forward,
        },
    };
    let res = transport(&curve, &w0, &opts, tol)?;

    let max_residual = res.lyapunov_residuals.iter().cloned().fold(0.0, f64::max);
    let mut text = String::from("transport\n");
    text.push_str(&config_line(cfg));
    text.push_str(&format!("  steps = {}\n", curve.len() - 1));
    text.push_str(&format!("  bures_length = {}\n", fmt_f(res.bures_length)));
    text.push_str(&format!("  max_lyapunov_residual = {}\n", fmt_f(max_residual)));
    text.push_str(&format!(
        "  total_parallelity_defect = {}\n",
        fmt_f(res.total_parallelity_defect())
    ));
    text.push_str(&format!("  max_amplitude_defect = {}\n", fmt_f(res.max_amplitude_defect())));
    text.push_str(&format!("  singular_steps = {}\n", res.singular_steps.len()));
    text.push_str(&format!("  closed = {}\n", curve.is_closed(tol)));
    if let Some(phase) = res.phase {
        text.push_str(&format!("  phase = {}\n", fmt_f(phase)));
    }
    if let Some(defect) = res.holonomy_unitarity_defect {
        text.push_str(&format!("  holonomy_unitarity_defect = {}\n", fmt_f(defect)));
    }

    let holonomy_json = res
        .holonomy
        .as_ref()
        .map(|v| matrix_entries(v.matrix()).iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>());
    let results = json!({
        "steps": curve.len() - 1,
        "bures_length": res.bures_length,
        "max_lyapunov_residual": max_residual,
        "total_parallelity_defect": res.total_parallelity_defect(),
        "max_amplitude_defect": res.max_amplitude_defect(),
        "parallelity_defects": res.parallelity_defects,
        "singular_steps": res.singular_steps,
        "closed": curve.is_closed(tol),
        "phase": res.phase,
        "holonomy_unitarity_defect": res.holonomy_unitarity_defect,
        "holonomy": holonomy_json,
    });

    if let Some(out) = emit_lift {
        let amplitudes: Vec<Vec<Vec<f64>>> = res
            .amplitudes
            .iter()
            .map(|a| matrix_entries(a.matrix()).iter().map(|z| vec![z.re, z.im]).collect())
            .collect();
        let lift = json!({
            "schema_version": "1",
            "dim": curve.dim(),
            "grid": curve.grid(),
            "amplitudes": amplitudes,
        });
        std::fs::write(out, serde_json::to_string_pretty(&lift).expect("serializable lift"))?;
        text.push_str(&format!("  lift written to {}\n", out.display()));
    }

    let inputs = json!([{
        "path": curve_path.display().to_string(),
        "dim": curve.dim(),
        "kind": "density",
        "points": curve.len(),
    }]);
    Ok(Report { json: envelope("transport", inputs, cfg, results, json!([])), text, failed: false })
}

fn cmd_phase(cfg: &RunConfig, curve_path: &Path) -> Result<Report, CliError> {
    let text_in = read_file(curve_path)?;
    let parsed = format::parse_curve_file(&text_in)
        .map_err(|source| CliError::Parse { path: curve_path.display().to_string(), source })?;
    if parsed.blocks[0].kind != MatrixKind::Vector || parsed.blocks[0].dim_right != 1 {
        return Err(CliError::Input(format!(
            "{}: phase curves must hold kind=vector blocks with dim_right=1",
            curve_path.display()
        )));
    }
    let vectors: Vec<_> = parsed.blocks.iter().map(MatrixFile::to_vector).collect();
    let res = pure_state_transport(&vectors)?;
    let closure = (&vectors[vectors.len() - 1] - &vectors[0]).norm();

    let mut text = String::from("phase\n");
    text.push_str(&config_line(cfg));
    text.push_str(&format!("  points = {}\n", vectors.len()));
    text.push_str(&format!("  closure_defect = {}\n", fmt_f(closure)));
    text.push_str(&format!("  berry_phase = {}\n", fmt_f(res.phase)));
    let results = json!({
        "points": vectors.len(),
        "closure_defect": closure,
        "berry_phase": res.phase,
    });
    let inputs = json!([{
        "path": curve_path.display().to_string(),
        "dim": parsed.blocks[0].dim,
        "kind": "vector",
        "points": vectors.len(),
    }]);
    Ok(Report { json: envelope("phase", inputs, cfg, results, json!([])), text, failed: false })
}

fn cmd_verify(
    cfg: &RunConfig,
    suite: &str,
    samples: Option<usize>,
    dims: &[usize],
    functional: Option<FunctionalArg>,
) -> Result<Report, CliError> {
    let suite: Suite = suite.parse()?;
    let sweep = SweepConfig {
        seed: cfg.seed,
        samples: samples.unwrap_or(cfg.samples),
        dims: if dims.is_empty() { cfg.dims.clone() } else { dims.to_vec() },
        grid_resolution: cfg.grid_resolution,
        tolerances: cfg.tolerances.clone(),
        functional: functional.map(Into::into),
    };
    let reports = verify::run(suite, &sweep)?;

    let mut text = String::from("verify\n");
    text.push_str(&config_line(cfg));
    let mut failed = false;
    let mut violations = Vec::new();
    for rep in &reports {
        text.push_str(&format!(
            "  {}: checks = {}  violations = {}  worst_slack = {}  {}\n",
            rep.suite,
            rep.checks_run,
            rep.violations.len(),
            fmt_f(rep.worst_slack),
            if rep.passed { "pass" } else { "FAIL" }
        ));
        for v in rep.violations.iter().take(5) {
            text.push_str(&format!(
                "    {} dim={} sample={} slack={}\n",
                v.check,
                v.dim,
                v.sample,
                fmt_f(v.slack)
            ));
        }
        if !rep.passed {
            failed = true;
            violations
                .extend(rep.violations.iter().map(|v| serde_json::to_value(v).unwrap()));
        }
    }
    text.push_str(&format!("  result: {}\n", if failed { "FAIL" } else { "pass" }));

    let results = serde_json::to_value(&reports).expect("serializable suite reports");
    let inputs = json!({ "suite": suite.to_string(), "sweep": sweep });
    Ok(Report { json: envelope("verify", inputs, cfg, results, json!(violations)), text, failed })
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Fidelity { file1, file2, method, all } => {
            cmd_fidelity(&cfg, file1, file2, *method, *all)
        }
        Command::Bounds { file1, file2 } => cmd_bounds(&cfg, file1, file2),
        Command::Transport { curve, holonomy, emit_lift, scheme } => {
            cmd_transport(&cfg, curve, *holonomy, emit_lift.as_deref(), *scheme)
        }
        Command::Phase { curve } => cmd_phase(&cfg, curve),
        Command::Verify { suite, samples, dims, functional } => {
            cmd_verify(&cfg, suite, *samples, dims, *functional)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            emit(&report, cli.json);
            if report.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
