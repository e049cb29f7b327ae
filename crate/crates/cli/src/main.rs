use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nccw_cli::dsl;
use nccw_cli::emit;
use nccw_cli::runner::{run, RunConfig};
use nccw_core::check::Status;

#[derive(Parser)]
#[command(name = "nccw", version, about = "Check runner for noncommutative CW complex scripts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a .nccw script and report every check.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Script file to execute.
    script: PathBuf,
    /// Grid resolution; repeat the flag to check at several. Defaults to 2 and 4.
    #[arg(long = "resolution")]
    resolution: Vec<u32>,
    /// Master seed; per-check streams are derived from it and the check id.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the DOT rendering of chains and complexes here.
    #[arg(long)]
    dot: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(args) => run_cmd(args),
    }
}

fn run_cmd(args: RunArgs) -> ExitCode {
    let src = match fs::read_to_string(&args.script) {
        Ok(src) => src,
        Err(err) => {
            eprintln!("{}: {err}", args.script.display());
            return ExitCode::from(2);
        }
    };
    let script = match dsl::parse(&src) {
        Ok(script) => script,
        Err(err) => {
            eprintln!("{}: {err}", args.script.display());
            return ExitCode::from(2);
        }
    };

    let mut cfg = RunConfig::default();
    if !args.resolution.is_empty() {
        cfg.resolutions = args.resolution.clone();
    }
    cfg.seed = args.seed;
    cfg.tol = args.tol;

    let outcome = run(&script, &cfg);

    let mut counts = (0usize, 0usize, 0usize);
    for report in &outcome.reports {
        let tag = match report.status {
            Status::Pass => {
                counts.0 += 1;
                "pass"
            }
            Status::Fail => {
                counts.1 += 1;
                "FAIL"
            }
            Status::Skip => {
                counts.2 += 1;
                "skip"
            }
        };
        println!(
            "{tag}  {}  [{}]  residual {:.3e}",
            report.id, report.kind, report.max_residual
        );
    }
    println!(
        "{} checks: {} passed, {} failed, {} skipped",
        outcome.reports.len(),
        counts.0,
        counts.1,
        counts.2
    );

    let json_text = emit::render_json(&outcome.reports);
    if let Some(path) = &args.json {
        if let Err(err) = fs::write(path, &json_text) {
            eprintln!("{}: {err}", path.display());
            return ExitCode::from(2);
        }
    } else if outcome.emit_json {
        print!("{json_text}");
    }

    let dot_text = emit::render_dot(&outcome);
    if let Some(path) = &args.dot {
        if let Err(err) = fs::write(path, &dot_text) {
            eprintln!("{}: {err}", path.display());
            return ExitCode::from(2);
        }
    } else if outcome.emit_dot {
        print!("{dot_text}");
    }

    if outcome.any_failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
