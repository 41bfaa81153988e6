use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lpheat::config::ExperimentConfig;
use lpheat::experiments::{run_and_write, EXPERIMENTS};
use lpheat::Error;

/// Experiment runner: semigroup kernels, fractional square functions, and
/// Banach-geometry probes with CSV/JSON reports.
#[derive(Parser, Debug)]
#[command(name = "lpheat", version, about)]
struct Cli {
    /// Named experiment to run (see --list)
    #[arg(long)]
    experiment: Option<String>,

    /// TOML configuration file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory for CSV and JSON reports
    #[arg(long)]
    out: Option<PathBuf>,

    /// RNG seed recorded in every report
    #[arg(long)]
    seed: Option<u64>,

    /// List the available experiments and exit
    #[arg(long)]
    list: bool,
}

fn error_object(err: &Error) -> serde_json::Value {
    let kind = match err {
        Error::Config { .. } => "config",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::NonConvergent(_) => "non_convergent",
        Error::PrecisionLoss(_) => "precision_loss",
        Error::Io(_) => "io",
    };
    if let Error::Config { key, message } = err {
        serde_json::json!({"error": {"kind": kind, "key": key, "message": message}})
    } else {
        serde_json::json!({"error": {"kind": kind, "message": format!("{err}")}})
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = cli.experiment {
        cfg.experiment = name;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.display().to_string();
    }
    if cfg.experiment.is_empty() {
        return Err(Error::config(
            "experiment",
            "no experiment selected; pass --experiment or set it in the config",
        ));
    }
    let out_dir = PathBuf::from(&cfg.out_dir);
    let (res, json_path) = run_and_write(&cfg, &out_dir)?;
    eprintln!(
        "{}: {} ({})",
        cfg.experiment,
        if res.pass { "pass" } else { "FAIL" },
        json_path.display()
    );
    Ok(res.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.list {
        for name in EXPERIMENTS {
            println!("{name}");
        }
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("{}", error_object(&err));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
