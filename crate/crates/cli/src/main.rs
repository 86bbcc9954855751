//! `covbeta fit` and `covbeta simulate`.
//!
//! Failures print one JSON line `{"error": code, "message": text}` to stderr
//! and exit with 1 (input/I-O), 2 (estimation) or 3 (simulation failure
//! budget exceeded).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use covbeta::io::{self, CovariateMap, FitRequest};
use covbeta::{run_monte_carlo, EdgeFamily, Error, FitOptions, Result, SimDesign};

#[derive(Parser)]
#[command(name = "covbeta", version, about = "Covariate-assisted beta-model: fitting and coverage simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a network and report estimates, standard errors and intervals as JSON.
    Fit(FitArgs),
    /// Run a Monte-Carlo coverage study from a JSON design.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct FitArgs {
    /// Edge list (`i  j  weight`, tab-separated, 1-based labels).
    #[arg(long)]
    edges: PathBuf,
    /// Edge (`i  j  z1..`) or nodal (`i  x1:map..`) covariate file.
    #[arg(long)]
    covariates: PathBuf,
    #[arg(long, value_parser = parse_family)]
    family: EdgeFamily,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Include the bias-corrected covariate estimates and intervals.
    #[arg(long)]
    bias_correct: bool,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Node pairs to test for equal degree parameters, e.g. `1,2;5,9`.
    #[arg(long)]
    pairs: Option<String>,
    /// Maps for nodal covariate columns, e.g. `product,absdiff`; overrides the header.
    #[arg(long)]
    maps: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

fn parse_family(s: &str) -> std::result::Result<EdgeFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let bad = || Error::Config(format!("invalid pair '{t}', expected i,j"));
            let (a, b) = t.split_once(',').ok_or_else(bad)?;
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            Ok((a, b))
        })
        .collect()
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let maps = args
        .maps
        .as_deref()
        .map(|m| m.split(',').map(str::parse).collect::<Result<Vec<CovariateMap>>>())
        .transpose()?;
    let data = io::load_dataset_with_maps(&args.edges, &args.covariates, maps.as_deref())?;
    let req = FitRequest {
        level: args.level,
        bias_correct: args.bias_correct,
        pairs: args.pairs.as_deref().map(parse_pairs).transpose()?.unwrap_or_default(),
        ..FitRequest::new(args.family)
    };
    let (_, report) = io::fit_report(&data, &req)?;
    io::emit(&io::to_json_string(&report)?, args.out.as_deref())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let text = fs::read_to_string(&args.config).map_err(|e| Error::Io(format!("{}: {e}", args.config.display())))?;
    let design: SimDesign =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", args.config.display())))?;
    let start = Instant::now();
    let report = run_monte_carlo(&design, &FitOptions::default())?;
    io::write_simulation_outputs(&report, start.elapsed().as_secs_f64(), &args.out_dir)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or_default().trim_start_matches("error: ");
            return fail(&Error::Config(first.to_string()));
        }
    };
    let outcome = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn fail(e: &Error) -> ExitCode {
    let line = serde_json::json!({ "error": e.code(), "message": e.to_string() });
    eprintln!("{line}");
    ExitCode::from(e.exit_code() as u8)
}
