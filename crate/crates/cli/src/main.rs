use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use overshoot_core::config::{load_config, ExperimentConfig, ExperimentKind, OutputFormat};
use overshoot_core::experiment::run_experiment;

/// Overshoot experiments for Lévy processes.
///
/// Exit status: 0 on success, 1 on invalid input, 2 when the results
/// contradict the classification.
#[derive(Parser, Debug)]
#[command(name = "overshoot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a triplet and print predicted passage positions.
    Classify(Common),
    /// Estimate the passage-position law at each level.
    Qx(Common),
    /// Check the convolution identity between two levels.
    Identity(Common),
    /// Compare triviality verdicts across levels.
    Consistency(Common),
    /// Run the built-in process catalog.
    Zoo(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config. Optional for `zoo`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the replicate count.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn build_config(kind: ExperimentKind, args: &Common) -> Result<ExperimentConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None if kind == ExperimentKind::Zoo => ExperimentConfig::new(kind),
        None => return Err(format!("{} requires --config", kind.as_str())),
    };
    if cfg.experiment != kind {
        return Err(format!(
            "config is for `{}` but the `{}` subcommand was used",
            cfg.experiment.as_str(),
            kind.as_str()
        ));
    }
    if let Some(seed) = args.seed {
        cfg.sim.seed = seed;
    }
    if let Some(w) = args.workers {
        cfg.sim.workers = Some(w);
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(f) = args.format {
        cfg.format = f.into();
    }
    if let Some(out) = &args.out {
        cfg.output = Some(out.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Classify(a) => (ExperimentKind::Classify, a),
        Command::Qx(a) => (ExperimentKind::Qx, a),
        Command::Identity(a) => (ExperimentKind::Identity, a),
        Command::Consistency(a) => (ExperimentKind::Consistency, a),
        Command::Zoo(a) => (ExperimentKind::Zoo, a),
    };
    let cfg = match build_config(kind, args) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let bundle = match run_experiment(&cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("overshoot-out"));
    if let Err(e) = bundle.write_to(&out) {
        eprintln!("error: writing {}: {e}", out.display());
        return ExitCode::from(1);
    }
    print!("{}", bundle.summary);
    println!("report: {}", out.display());
    ExitCode::from(bundle.exit_code() as u8)
}
