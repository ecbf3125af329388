//! `menos`: susceptibility reports, saturation checks and the two experiment sweeps.

mod output;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use menos_core::experiments::{interferometer_row, superres_hg_row};
use menos_core::fisher::{chi_bruteforce, chi_menos, outcome_stats};
use menos_core::json::{chi_q_to_json, model_from_json, povm_from_json, real_to_json, report_to_json, saturation_to_json};
use menos_core::saturation::{check_saturation, minimize_chi_q_superres_with_tol, SAT_TOL};
use menos_core::{Error, ModelAtPoint, Povm};
use rayon::prelude::*;
use serde_json::{json, Value};

use output::{fmt_num, Table};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNDEFINED: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

#[derive(Parser)]
#[command(name = "menos", version, about = "Fisher information and measurement-noise susceptibility")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Worst-case noise susceptibility of a POVM on a model.
    Chi(ChiArgs),
    /// Quantum Cramér-Rao bound saturation check; exits 1 if not saturated.
    Check(CheckArgs),
    /// Mach-Zehnder phase sweep: CFI at unit and finite visibility, and χ.
    Interferometer(InterferometerArgs),
    /// Two-source separation sweep with Hermite-Gauss mode sorting.
    SuperresHg(HgArgs),
    /// Least susceptible QCRB-saturating measurement across separations.
    SuperresChiq(ChiqArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Io {
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ModelInput {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    povm: PathBuf,
}

#[derive(Args)]
struct ChiArgs {
    #[command(flatten)]
    input: ModelInput,
    /// Report file (MenosReport JSON).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full report instead of the bare value.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Random noise POVMs for the brute-force cross-check (0 disables it).
    #[arg(long, default_value_t = 0)]
    oracle_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: ModelInput,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative tolerance for the residuals and the CFI gap.
    #[arg(long, default_value_t = SAT_TOL)]
    tol: f64,
}

#[derive(Args)]
struct InterferometerArgs {
    #[arg(long, default_value_t = 0.0)]
    phi_min: f64,
    #[arg(long, default_value_t = PI)]
    phi_max: f64,
    #[arg(long, default_value_t = 181)]
    steps: usize,
    #[arg(long, default_value_t = 0.98)]
    visibility: f64,
    #[command(flatten)]
    io: Io,
}

#[derive(Args)]
struct ThetaRange {
    #[arg(long, default_value_t = 0.05)]
    theta_min: f64,
    #[arg(long, default_value_t = 3.0)]
    theta_max: f64,
    #[arg(long, default_value_t = 60)]
    steps: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
}

#[derive(Args)]
struct HgArgs {
    #[command(flatten)]
    range: ThetaRange,
    /// Number of outcomes K: modes 1..K−1 plus the remainder.
    #[arg(long, default_value_t = 3)]
    modes: usize,
    #[command(flatten)]
    io: Io,
}

#[derive(Args)]
struct ChiqArgs {
    #[command(flatten)]
    range: ThetaRange,
    #[arg(long, default_value_t = 64)]
    grid_n: usize,
    #[arg(long, default_value_t = 4)]
    refine_iters: usize,
    #[command(flatten)]
    io: Io,
}

/// A failed run: exit status plus diagnostic.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::UndefinedSusceptibility(_) => EXIT_UNDEFINED,
            _ => EXIT_INPUT,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Chi(a) => cmd_chi(a),
        Command::Check(a) => cmd_check(a),
        Command::Interferometer(a) => cmd_interferometer(a),
        Command::SuperresHg(a) => cmd_superres_hg(a),
        Command::SuperresChiq(a) => cmd_superres_chiq(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("menos: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load(input: &ModelInput) -> Result<(ModelAtPoint, Povm), Failure> {
    let model = model_from_json(&read(&input.model)?)
        .map_err(|e| Failure::input(format!("{}: {e}", input.model.display())))?;
    let povm = povm_from_json(&read(&input.povm)?)
        .map_err(|e| Failure::input(format!("{}: {e}", input.povm.display())))?;
    if model.dim() != povm.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: povm.dim() }.into());
    }
    Ok((model, povm))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// `MENOS_TOL_OVERRIDE` scales every saturation tolerance.
fn tolerance_scale() -> Result<f64, Failure> {
    match std::env::var("MENOS_TOL_OVERRIDE") {
        Err(_) => Ok(1.0),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
            _ => Err(Failure::input(format!("MENOS_TOL_OVERRIDE={s:?} is not a positive number"))),
        },
    }
}

/// `min + i (max − min)/(steps − 1)`, both ends included.
fn sweep(min: f64, max: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 {
        return Err(Failure::input("--steps must be >= 1"));
    }
    if !(min.is_finite() && max.is_finite()) || min > max {
        return Err(Failure::input(format!("invalid range [{min}, {max}]")));
    }
    if steps == 1 {
        return Ok(vec![min]);
    }
    Ok((0..steps)
        .map(|i| if i + 1 == steps { max } else { min + i as f64 * (max - min) / (steps - 1) as f64 })
        .collect())
}

fn cmd_chi(a: ChiArgs) -> Outcome {
    let (model, povm) = load(&a.input)?;
    let stats = outcome_stats(&model, &povm)?;
    let report = chi_menos(&model, &stats)?;
    let mut doc = report_to_json(&report);
    if a.oracle_trials > 0 {
        let oracle = chi_bruteforce(&model, &stats, &povm, a.oracle_trials, a.seed)?;
        doc["oracle_chi"] = real_to_json(oracle);
    }
    if let Some(p) = &a.out {
        emit(Some(p), &pretty(&doc))?;
    }
    match a.format {
        Format::Csv => println!("{}", fmt_num(report.chi)),
        Format::Json => print!("{}", pretty(&doc)),
    }
    Ok(0)
}

fn cmd_check(a: CheckArgs) -> Outcome {
    if !(a.tol > 0.0) {
        return Err(Failure::input("--tol must be > 0"));
    }
    let (model, povm) = load(&a.input)?;
    let report = check_saturation(&model, &povm, a.tol * tolerance_scale()?)?;
    let text = pretty(&saturation_to_json(&report));
    if let Some(p) = &a.out {
        emit(Some(p), &text)?;
    }
    print!("{text}");
    Ok(if report.saturates { 0 } else { EXIT_CHECK_FAILED })
}

fn cmd_interferometer(a: InterferometerArgs) -> Outcome {
    if !(0.0..=1.0).contains(&a.visibility) {
        return Err(Failure::input(format!("--visibility {} outside [0, 1]", a.visibility)));
    }
    let grid = sweep(a.phi_min, a.phi_max, a.steps)?;
    let rows = grid
        .par_iter()
        .map(|&phi| interferometer_row(phi, a.visibility))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["phi", "cfi_v1", "cfi_v", "chi"]);
    for r in rows {
        table.push(vec![r.phi, r.cfi_v1, r.cfi_v, r.chi]);
    }
    emit(a.io.out.as_deref(), &table.render(a.io.format == Format::Json))?;
    Ok(0)
}

fn check_theta_range(r: &ThetaRange) -> Result<Vec<f64>, Failure> {
    if !(r.theta_min > 0.0) {
        return Err(Failure::input("--theta-min must be > 0"));
    }
    if !(r.sigma > 0.0) || !r.sigma.is_finite() {
        return Err(Failure::input("--sigma must be > 0"));
    }
    sweep(r.theta_min, r.theta_max, r.steps)
}

fn cmd_superres_hg(a: HgArgs) -> Outcome {
    let grid = check_theta_range(&a.range)?;
    if a.modes < 2 {
        return Err(Failure::input("--modes must be >= 2"));
    }
    let rows = grid
        .par_iter()
        .map(|&t| superres_hg_row(t, a.range.sigma, a.modes))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["theta", "cfi", "chi", "qfi"]);
    for r in rows {
        table.push(vec![r.theta, r.cfi, r.chi, r.qfi]);
    }
    emit(a.io.out.as_deref(), &table.render(a.io.format == Format::Json))?;
    Ok(0)
}

fn cmd_superres_chiq(a: ChiqArgs) -> Outcome {
    let grid = check_theta_range(&a.range)?;
    if a.grid_n < 16 {
        return Err(Failure::input("--grid-n must be >= 16"));
    }
    let tol = SAT_TOL * tolerance_scale()?;
    let results: Vec<_> = grid
        .iter()
        .map(|&t| (t, minimize_chi_q_superres_with_tol(t, a.range.sigma, a.grid_n, a.refine_iters, tol)))
        .collect();

    let mut failed = 0;
    let mut table = Table::new(&["theta", "chi_q", "phi_s", "phi_a", "cfi"]);
    let mut docs = Vec::new();
    for (t, r) in results {
        match r {
            Ok(r) => {
                docs.push(chi_q_to_json(&r));
                table.push(vec![t, r.chi_q, r.phi_s, r.phi_a, r.cfi]);
            }
            Err(Error::NoFeasiblePoint) => {
                failed += 1;
                eprintln!("menos: theta = {}: no feasible grid point", fmt_num(t));
                docs.push(json!({ "theta": t, "sigma": a.range.sigma, "error": "no feasible point" }));
                table.push(vec![t, f64::NAN, f64::NAN, f64::NAN, f64::NAN]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let text = match a.io.format {
        Format::Csv => table.render(false),
        Format::Json => pretty(&Value::Array(docs)),
    };
    emit(a.io.out.as_deref(), &text)?;
    Ok(if failed > 0 { EXIT_PARTIAL } else { 0 })
}
