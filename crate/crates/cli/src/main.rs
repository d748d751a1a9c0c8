use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nfpls_cli::checks;
use nfpls_cli::config::parse_models;
use nfpls_cli::{run_experiment, Experiment, RunError, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Run(Experiment),
    All,
    Validate,
    Selftest,
}

fn parse_target(s: &str) -> Result<Target, String> {
    match s {
        "all" => Ok(Target::All),
        "validate" => Ok(Target::Validate),
        "selftest" => Ok(Target::Selftest),
        _ => Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .map(Target::Run)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                format!(
                    "expected one of {}, all, validate, selftest",
                    names.join(", ")
                )
            }),
    }
}

/// Secrecy-analysis sweep runner.
#[derive(Debug, Parser)]
#[command(name = "nfpls", version)]
struct Args {
    /// Experiment name, or `all`, `validate`, `selftest`.
    #[arg(value_parser = parse_target)]
    target: Target,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: `output_dir` from the config, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated subset of upw,usw,nusw.
    #[arg(long)]
    models: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    let mut cfg = match &args.config {
        Some(path) => match SweepConfig::from_path(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => SweepConfig::default(),
    };
    if let Some(t) = args.threads {
        cfg.threads = Some(t);
    }
    if let Some(m) = &args.models {
        match parse_models(m) {
            Ok(m) => cfg.models = m,
            Err(e) => {
                eprintln!("error: --models: {e}");
                return ExitCode::from(2);
            }
        }
    }

    let experiments = match args.target {
        Target::Validate => {
            print!("{}", cfg.echo());
            return ExitCode::SUCCESS;
        }
        Target::Selftest => {
            let outcomes = checks::selftest();
            for o in &outcomes {
                println!("{}", o.line());
            }
            return if outcomes.iter().all(|o| o.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            };
        }
        Target::All => Experiment::ALL.to_vec(),
        Target::Run(e) => vec![e],
    };

    let out = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    for exp in experiments {
        match run_experiment(&cfg, exp, &out) {
            Ok(paths) => {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            Err(RunError::Config(msg)) => {
                eprintln!("error: {msg}");
                return ExitCode::from(2);
            }
            Err(e) => {
                eprintln!("error: {exp}: {e}");
                return ExitCode::FAILURE;
            }
        }
    }
    ExitCode::SUCCESS
}
