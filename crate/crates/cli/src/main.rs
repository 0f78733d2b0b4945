mod commands;
mod render;

use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use advrisk::scenario::{Mode, Scenario};
use advrisk::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "advrisk", version, about = "Adversarial risk, optimal transport and Nash certificates on finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Every risk formulation of the scenario's region (and loss problem).
    Risk(ScenarioArgs),
    /// Optimal adversarial risk with witness region and transport certificate.
    OptimalRisk(ScenarioArgs),
    /// Sup-inf and inf-sup values with both players' best responses.
    Game(ScenarioArgs),
    /// Approximate pure Nash equilibrium certificate.
    Nash(ScenarioArgs),
    /// Randomized cross-checks.
    Verify(VerifyArgs),
    /// Compare the two dual forms on the scenario's p0 (as mu) and p1 (as nu).
    Probe(ScenarioArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file; standard input when absent.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Overrides the scenario's mode.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Float-mode tolerance on total masses.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Check name, or `all`.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Instances per check.
    #[arg(long, default_value_t = 200)]
    count: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

const EXIT_CERTIFICATE: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

fn load(args: &ScenarioArgs) -> Result<Scenario, String> {
    let text = match &args.input {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?,
        None => {
            let mut buf = String::new();
            io::stdin().read_to_string(&mut buf).map_err(|e| format!("cannot read standard input: {e}"))?;
            buf
        }
    };
    let mut scenario = Scenario::from_json(&text).map_err(|e| e.to_string())?;
    if let Some(mode) = args.mode {
        scenario.mode = match mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        };
    }
    if let Some(tol) = args.tolerance {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(format!("--tolerance must be a nonnegative number, got {tol}"));
        }
        scenario.tolerance = Some(tol);
    }
    Ok(scenario)
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Certificate(_) => EXIT_CERTIFICATE,
        _ => EXIT_VALIDATION,
    }
}

fn emit(text: &str) -> ExitCode {
    let mut out = io::stdout().lock();
    if writeln!(out, "{text}").is_err() {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&ScenarioArgs, fn(&Scenario) -> advrisk::Result<serde_json::Value>) = match &cli.command {
        Command::Verify(v) => {
            return match commands::verify(&v.suite, v.seed, v.count, v.jobs) {
                Ok((value, ok)) => {
                    let code = emit(&render::verify(&value, v.format));
                    if ok {
                        code
                    } else {
                        ExitCode::from(EXIT_CHECK_FAILED)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_for(&e))
                }
            };
        }
        Command::Risk(a) => (a, commands::risk),
        Command::OptimalRisk(a) => (a, commands::optimal_risk),
        Command::Game(a) => (a, commands::game),
        Command::Nash(a) => (a, commands::nash),
        Command::Probe(a) => (a, commands::probe),
    };
    let scenario = match load(args) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match run(&scenario) {
        Ok(value) => emit(&render::document(&value, args.format)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
