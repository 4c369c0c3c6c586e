use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sos_cli::commands::{cmd_bench, cmd_compute, cmd_sweep, cmd_verify, random_params, MethodChoice, VerifyOptions};
use sos_cli::config::{parse_complex, parse_config, parse_tolerance};
use sos_cli::{CliError, CliResult};
use sos_core::numeric::{Guard, C64};
use sos_core::partition::DEFAULT_BRUTE_CAP;
use sos_core::verify::SuiteName;
use sos_core::Model;

/// Partition function of the dynamical SOS model with reflecting end.
///
/// The genericity guard on sinh denominators defaults to 1e-6 and can be
/// overridden with the SOS_GUARD_TOL environment variable.
#[derive(Parser)]
#[command(name = "sos", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate Z for one parameter set and print it as JSON.
    Compute(ComputeArgs),
    /// Run a seeded verification suite and print the JSON report.
    Verify(VerifyArgs),
    /// Time determinant and brute-force evaluation for n = 1..=max_n (CSV).
    Bench(BenchArgs),
    /// Evaluate Z along a segment in one spectral parameter (CSV).
    Sweep(SweepArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    /// JSON parameter file; complex numbers are [re, im] pairs.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Draw N sites at random instead of reading a file.
    #[arg(long, value_name = "N")]
    random: Option<usize>,
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    source: Source,
    /// Seed for --random.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = MethodChoice::Det)]
    method: MethodChoice,
    /// Largest N allowed for brute-force contraction (hard maximum 12).
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
    cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// weights, algebra, partition or all.
    #[arg(long, default_value = "all")]
    suite: SuiteName,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Parameter sets per check and chain size.
    #[arg(long, default_value_t = 25)]
    samples: usize,
    /// Chain sizes 1..=max_n are exercised.
    #[arg(long, default_value_t = 3)]
    max_n: usize,
    /// Override a tolerance, e.g. --tol theorem=1e-8. Repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
    cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    max_n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
    cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Which lambda to vary, counted from 1.
    #[arg(long)]
    vary: usize,
    #[arg(long, value_name = "RE,IM", value_parser = parse_complex, allow_hyphen_values = true)]
    from: C64,
    #[arg(long, value_name = "RE,IM", value_parser = parse_complex, allow_hyphen_values = true)]
    to: C64,
    #[arg(long)]
    points: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn emit(output: Option<&Path>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn pretty(doc: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("plain data serializes");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<bool> {
    let guard = Guard::from_env();
    let model = Model::with_guard(guard);
    match cli.command {
        Command::Compute(a) => {
            let p = match (a.source.config, a.source.random) {
                (Some(path), _) => parse_config(&path, guard)?,
                (None, Some(n)) => random_params(n, a.seed, guard.tol())?,
                (None, None) => unreachable!("clap enforces one source"),
            };
            let doc = cmd_compute(&model, &p, a.method, a.cap)?;
            emit(a.output.as_deref(), &pretty(&doc))?;
            Ok(true)
        }
        Command::Verify(a) => {
            let opts = VerifyOptions {
                suite: a.suite,
                seed: a.seed,
                samples: a.samples,
                max_n: a.max_n,
                tolerances: a.tolerances,
                guard_tol: guard.tol(),
                cap: a.cap,
            };
            let start = Instant::now();
            let report = cmd_verify(&opts)?;
            let mut json = report.to_json();
            json.push('\n');
            emit(a.output.as_deref(), &json)?;
            let s = report.summary();
            eprintln!(
                "{}: {} passed, {} failed, {} skipped in {:.2} s",
                report.suite.as_str(),
                s.passed,
                s.failed,
                s.skipped,
                start.elapsed().as_secs_f64()
            );
            Ok(report.all_passed())
        }
        Command::Bench(a) => {
            let csv = cmd_bench(&model, a.max_n, a.seed, a.cap)?;
            emit(a.output.as_deref(), &csv)?;
            Ok(true)
        }
        Command::Sweep(a) => {
            let p = parse_config(&a.config, guard)?;
            let out = cmd_sweep(&model, &p, a.vary, a.from, a.to, a.points)?;
            emit(a.output.as_deref(), &out.csv)?;
            if out.skipped > 0 {
                eprintln!("{} of {} grid points skipped", out.skipped, out.rows);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) | CliError::Parse { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
