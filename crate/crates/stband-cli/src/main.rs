//! `stband`: curvature, Dirichlet solves, integral identities and band-width
//! verdicts on warped-product metrics, one JSON report per run.
//!
//! Exit codes: 0 verdict holds or is saturated, 1 usage error, malformed input or
//! numerical failure, 2 hypothesis rejected, 3 inequality falsified.

mod commands;
mod inputs;
mod plot;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Outcome, Verdict};

#[derive(Parser, Debug)]
#[command(name = "stband", version, about = "Spacetime harmonic functions on warped-product bands")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Metric: inline JSON `{"family", "params", "dimension"}`, a JSON file or a preset name
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Potential: inline JSON `{"kind", "params"}`, a JSON file or a preset name
    #[arg(long, global = true)]
    pub potential: Option<String>,
    /// Grid cells (or samples for curvature scans)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Tolerance for saturation verdicts
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Write the JSON report here
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write profile data as CSV
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Write a polyline chart of the profile data
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Print the JSON report to stdout
    #[arg(long, global = true)]
    pub json: bool,
    /// Suppress the summary line
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List metric presets, potentials and the band-problem catalog
    Catalog,
    /// Sample curvature along the profile
    Curvature(commands::CurvatureArgs),
    /// Solve the Dirichlet problem on a band
    Solve(commands::SolveArgs),
    /// Evaluate an integral identity on a solved band
    Identity(commands::IdentityArgs),
    /// Band width against a comparison bound
    Width(commands::WidthArgs),
    /// Distance sum on a punctured closed manifold against π
    BonnetMyers(commands::BonnetMyersArgs),
    /// Average level-set area against the waist bound
    Waist(commands::WaistArgs),
    /// Decompose a closed manifold along level sets
    Dice(commands::DiceArgs),
    /// Curvature and distance audit of the 2-Ricci family
    Counterexample(commands::CounterexampleArgs),
    /// Green's function identity on an asymptotically flat metric
    Af(commands::AfArgs),
    /// Scalar-curvature scan and quantitative identity on a warped 3-sphere
    Llarull(commands::LlarullArgs),
    /// Boundary-gradient barrier near a pole
    Barrier(commands::BarrierArgs),
    /// Interior gradient estimate on a solved band
    Gradest(commands::GradestArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Lemma23,
    Lemma33,
    Lemma71,
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Catalog => "catalog",
        Command::Curvature(_) => "curvature",
        Command::Solve(_) => "solve",
        Command::Identity(_) => "identity",
        Command::Width(_) => "width",
        Command::BonnetMyers(_) => "bonnet-myers",
        Command::Waist(_) => "waist",
        Command::Dice(_) => "dice",
        Command::Counterexample(_) => "counterexample",
        Command::Af(_) => "af",
        Command::Llarull(_) => "llarull",
        Command::Barrier(_) => "barrier",
        Command::Gradest(_) => "gradest",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    ExitCode::from(run(cli) as u8)
}

fn run(cli: Cli) -> i32 {
    let common = &cli.common;
    if !(common.tol > 0.0) || common.grid == Some(0) {
        eprintln!("error: --tol and --grid must be positive");
        return 1;
    }
    let start = Instant::now();
    let cmd = name(&cli.command);
    let result = match &cli.command {
        Command::Catalog => commands::catalog(common),
        Command::Curvature(a) => commands::curvature(a, common),
        Command::Solve(a) => commands::solve(a, common),
        Command::Identity(a) => commands::identity(a, common),
        Command::Width(a) => commands::width(a, common),
        Command::BonnetMyers(a) => commands::bonnet_myers(a, common),
        Command::Waist(a) => commands::waist(a, common),
        Command::Dice(a) => commands::dice(a, common),
        Command::Counterexample(a) => commands::counterexample(a, common),
        Command::Af(a) => commands::af(a, common),
        Command::Llarull(a) => commands::llarull(a, common),
        Command::Barrier(a) => commands::barrier(a, common),
        Command::Gradest(a) => commands::gradest(a, common),
    };
    let (config, outcome) = match result {
        Ok(x) => x,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(stband::Error::Hypothesis(msg)) => {
            Outcome::new(Verdict::HypothesisRejected, serde_json::json!({ "reason": msg }))
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let rep = report::build(cmd, config, &outcome, runtime_ms);
    let text = report::to_json(&rep);
    if let Err(e) = emit(common, &outcome, &text, cmd) {
        eprintln!("error: {e}");
        return 1;
    }
    if common.json {
        print!("{text}");
    } else if !common.quiet {
        let slack = outcome.slack.map(|s| format!(", slack {}", report::float(s))).unwrap_or_default();
        println!("{cmd}: {}{slack}", outcome.verdict.as_str());
    }
    if outcome.verdict == Verdict::HypothesisRejected && !common.quiet {
        eprintln!("hypothesis rejected: {}", rep["numbers"]["reason"].as_str().unwrap_or(""));
    }
    outcome.verdict.exit_code()
}

fn emit(common: &Common, outcome: &Outcome, json: &str, cmd: &str) -> Result<(), String> {
    let write = |p: &PathBuf, s: &str| std::fs::write(p, s).map_err(|e| format!("cannot write {}: {e}", p.display()));
    if let Some(p) = &common.out {
        write(p, json)?;
    }
    if common.csv.is_some() || common.svg.is_some() {
        let Some(t) = &outcome.table else {
            if outcome.verdict == Verdict::HypothesisRejected {
                return Ok(());
            }
            return Err(format!("{cmd} produces no profile data for --csv/--svg"));
        };
        if let Some(p) = &common.csv {
            write(p, &t.to_csv())?;
        }
        if let Some(p) = &common.svg {
            write(p, &plot::svg(t, 1, cmd))?;
        }
    }
    Ok(())
}
