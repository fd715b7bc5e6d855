use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand};

use droneloc::harness::{emit_csv, monte_carlo, write_csv, ExperimentConfig, RmseTable, Sweep};

#[derive(Parser)]
#[command(name = "droneloc", version, about = "Distributed RSS emitter localization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run(Common),
    /// RMSE versus communication rounds.
    SweepRounds {
        #[command(flatten)]
        common: Common,
        /// Largest round cap.
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// RMSE versus number of UAVs.
    SweepUavs {
        #[command(flatten)]
        common: Common,
        /// Comma-separated UAV counts.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6, 8])]
        uavs: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment config; defaults apply for missing fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV output path; stdout when neither this nor the config sets one.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        Ok(cfg)
    }
}

fn print_summary(table: &RmseTable) {
    eprintln!("{:>8} {:>6} {:>10} {:>10} {:>12} {:>14} {:>8}", "sweep", "method", "rmse_m", "crlb_m", "bits", "flops", "failed");
    for r in &table.rows {
        eprintln!(
            "{:>8} {:>6} {:>10.1} {:>10.1} {:>12.0} {:>14.0} {:>8}",
            r.sweep, r.method, r.rmse_m, r.crlb_root_m, r.bits, r.flops, r.failures
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = match cli.command {
        Command::Run(common) => common.load()?,
        Command::SweepRounds { common, k_max } => {
            let mut cfg = common.load()?;
            cfg.sweep = Sweep::Rounds { k_max };
            cfg
        }
        Command::SweepUavs { common, uavs } => {
            let mut cfg = common.load()?;
            cfg.sweep = Sweep::UavCount { values: uavs };
            cfg
        }
    };
    let table = monte_carlo(&cfg)?;
    print_summary(&table);
    match &cfg.output {
        Some(path) => emit_csv(&table, path)?,
        None => write_csv(&table, std::io::stdout().lock())
            .map_err(|e| anyhow!("writing CSV to stdout: {e}"))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
