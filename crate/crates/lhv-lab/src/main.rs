use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use lhv_lab::cli::{
    cmd_chsh, cmd_franson, cmd_noncoplanar, cmd_rates, cmd_sweep, cmd_verify, emit,
    resolve_config, Overrides, RunConfig,
};
use lhv_lab::{Error, Result};

/// Monte Carlo laboratory for local-hidden-variable models of entanglement
/// experiments with imperfect or delayed detection.
#[derive(Debug, Parser)]
#[command(name = "lhvlab", version, about)]
struct Cli {
    /// JSON configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Model: linear | erased-circle | sphere | circle-3d | quantum.
    #[arg(long, global = true)]
    model: Option<String>,

    /// Trials per settings point.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Comma-separated relative angles (radians) for sweeps.
    #[arg(long, global = true)]
    grid: Option<String>,

    /// Coincident-null injection probability for the erasure models.
    #[arg(long = "null-injection", global = true)]
    null_injection: Option<f64>,

    /// Square-schedule dwell time, in units of delta-t.
    #[arg(long, global = true)]
    period: Option<f64>,

    /// Long-minus-short arm delay.
    #[arg(long = "delta-t", global = true)]
    delta_t: Option<f64>,

    /// Output format: csv | json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlation curve over a grid of relative angles.
    Sweep,
    /// Click-pattern rates and detection efficiencies.
    Rates,
    /// CHSH value, observed efficiency, and loophole verdict.
    Chsh,
    /// Circle vs sphere model on non-coplanar settings.
    Noncoplanar,
    /// Two-slot delayed-detection scenario.
    Franson {
        /// Use a square-wave phase schedule instead of a static phase scan.
        #[arg(long)]
        switching: bool,
        /// Dump raw records to this CSV file.
        #[arg(long)]
        dump_records: Option<PathBuf>,
    },
    /// Run the acceptance suite (exit code 2 on any failure).
    Verify {
        /// Machine-readable JSON report instead of the pass/fail table.
        #[arg(long)]
        json: bool,
        /// Scale the erasure keep weight (sanity hook: any value other than
        /// 1.0 must make the suite fail).
        #[arg(long, hide = true, default_value_t = 1.0)]
        corrupt_erasure: f64,
    },
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad grid entry '{s}': {e}")))
        })
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut ov = Overrides {
        model: cli.model,
        trials: cli.trials,
        seed: cli.seed,
        grid: None,
        null_injection: cli.null_injection,
        period: cli.period,
        delta_t: cli.delta_t,
        format: cli.format,
        out: cli.out.map(|p| p.display().to_string()),
        dump_records: None,
    };
    if let Some(text) = &cli.grid {
        ov.grid = Some(parse_grid(text)?);
    }
    if let Command::Franson { dump_records: Some(p), .. } = &cli.command {
        ov.dump_records = Some(p.display().to_string());
    }
    let cfg: RunConfig = resolve_config(cli.config.as_deref(), &ov)?;
    let (output, code) = match cli.command {
        Command::Sweep => (cmd_sweep(&cfg)?, ExitCode::SUCCESS),
        Command::Rates => (cmd_rates(&cfg)?, ExitCode::SUCCESS),
        Command::Chsh => (cmd_chsh(&cfg)?, ExitCode::SUCCESS),
        Command::Noncoplanar => (cmd_noncoplanar(&cfg)?, ExitCode::SUCCESS),
        Command::Franson { switching, .. } => (cmd_franson(&cfg, switching)?, ExitCode::SUCCESS),
        Command::Verify { json, corrupt_erasure } => {
            let (report, all_passed) = cmd_verify(&cfg, json, corrupt_erasure)?;
            (
                report,
                if all_passed { ExitCode::SUCCESS } else { ExitCode::from(2) },
            )
        }
    };
    emit(cfg.out.as_deref(), &output)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
