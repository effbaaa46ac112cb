use std::path::PathBuf;

use anyhow::{ensure, Result};
use clap::{Parser, Subcommand};
use faprec_sim::config::{ExperimentConfig, ExperimentKind};
use faprec_sim::{emit_results, run, Format};

#[derive(Parser, Debug)]
#[command(
    name = "faprec",
    version,
    about = "Finite-alphabet precoding experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (TOML); built-in defaults are used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the number of Monte-Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Parent directory for the results directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// IUI per iteration for the ADMM family and IDE/IDE2 on one instance.
    Convergence,
    /// BER and IUI versus SNR.
    BerSweep,
    /// Same sweep as `ber-sweep`, labelled for IUI studies.
    IuiSweep,
    /// BER versus channel-estimate error at a fixed SNR.
    CsiError,
    /// IDE and IDE2 against exhaustive search on a small system.
    OracleGap,
    /// BER versus SNR for several transmit alphabets.
    PskSweep,
    /// Closed-form multiplication counts.
    ComplexityTable,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Convergence => ExperimentKind::Convergence,
            Command::BerSweep => ExperimentKind::BerSweep,
            Command::IuiSweep => ExperimentKind::IuiSweep,
            Command::CsiError => ExperimentKind::CsiError,
            Command::OracleGap => ExperimentKind::OracleGap,
            Command::PskSweep => ExperimentKind::PskSweep,
            Command::ComplexityTable => ExperimentKind::ComplexityTable,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let kind = cli.command.kind();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::defaults(kind),
    };
    ensure!(
        cfg.experiment == kind,
        "config describes a `{}` experiment but `{}` was requested",
        cfg.experiment,
        kind
    );
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    ensure!(workers >= 1, "--workers must be >= 1");
    let result = run(&cfg, workers)?;
    let dir = emit_results(&result, &cli.out, cli.format)?;
    for gap in &result.gaps {
        match gap.gap_db {
            Some(g) => eprintln!(
                "{} vs {} at BER {}: {g:.2} dB",
                gap.solver, gap.reference, gap.target_ber
            ),
            None => eprintln!(
                "{} vs {} at BER {}: no crossing on the grid",
                gap.solver, gap.reference, gap.target_ber
            ),
        }
    }
    println!("{}", dir.display());
    Ok(())
}
