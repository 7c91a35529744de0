use std::path::PathBuf;
use std::process::ExitCode;

use brw_fpt::runner::{self, ExperimentKind, Overrides};
use brw_fpt::Error;
use clap::{Args, Parser, Subcommand};

/// First-passage times of branching random walks.
#[derive(Parser)]
#[command(name = "fpt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    config: PathBuf,
    /// Master seed, replacing the one in the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory; also settable through FPT_OUTPUT_DIR.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a first-passage sweep.
    Run(Common),
    /// Print constants and predictions without simulating.
    Theory(Common),
    /// Count particles behind the frontier of a 1-d walk.
    Frontier(Common),
    /// Fit x/c1 + B log x + C to sweep CSVs.
    Fit {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

fn report(err: &Error) -> ExitCode {
    let record = serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
    });
    eprintln!("{record}");
    ExitCode::FAILURE
}

fn run(common: Common, kind: ExperimentKind) -> Result<ExitCode, Error> {
    let mut plan = runner::parse_config(&common.config)?;
    if kind == ExperimentKind::TheoryOnly {
        plan.kind = kind;
    } else if plan.kind != kind {
        return Err(Error::ConfigError(format!(
            "{} describes a {:?} experiment",
            common.config.display(),
            plan.kind
        )));
    }
    Overrides {
        seed: common.seed,
        workers: common.workers,
        out_dir: common.out,
    }
    .apply(&mut plan);
    let result = runner::run_experiment(&plan)?;
    for file in &result.files {
        println!("{}", file.display());
    }
    if kind == ExperimentKind::TheoryOnly {
        if let Some(t) = &result.theory {
            println!("{}", serde_json::to_string_pretty(t)?);
        }
    }
    if result.succeeded() {
        return Ok(ExitCode::SUCCESS);
    }
    for e in &result.errors {
        eprintln!("{}", serde_json::to_string(e)?);
    }
    Ok(ExitCode::FAILURE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(c) => run(c, ExperimentKind::FptSweep),
        Command::Theory(c) => run(c, ExperimentKind::TheoryOnly),
        Command::Frontier(c) => run(c, ExperimentKind::FrontierCount),
        Command::Fit { csv } => runner::fit_csv_files(&csv).and_then(|fit| {
            println!("{}", serde_json::to_string_pretty(&fit)?);
            Ok(ExitCode::SUCCESS)
        }),
    };
    outcome.unwrap_or_else(|e| report(&e))
}
