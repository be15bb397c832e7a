//! The `harq` command: outage tables, power allocation, Monte Carlo
//! validation and parameter sweeps, written as CSV or JSON.

pub mod commands;
pub mod config;
pub mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use config::{parse_list, FileConfig, Format, Method, SchemeChoice, Settings, SweepAxis};
use table::Table;

#[derive(Debug, Parser)]
#[command(name = "harq", version, about = "HARQ outage analysis and power allocation over correlated Nakagami-m fading")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact and high-SNR outage for each round over a power grid.
    Outage {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-round linear powers, comma separated (one value is broadcast).
        #[arg(long)]
        powers: Option<String>,
        /// Equal-power grid in dB, `start:stop:step` or a list.
        #[arg(long, allow_hyphen_values = true)]
        power_db: Option<String>,
    },
    /// Minimum average power subject to an outage target.
    Allocate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Analytic outage against a Monte Carlo estimate.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// Per-round linear powers, comma separated (one value is broadcast).
        #[arg(long)]
        powers: Option<String>,
    },
    /// Optimal average power over a grid of epsilon, rho or m.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        over: Option<SweepAxis>,
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML file with [channel], [harq], [solver], [output] and [sweep] sections.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeChoice>,
    /// Maximum number of transmission rounds L.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Target rate R in bit/s/Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Nakagami fading parameter.
    #[arg(long)]
    pub m: Option<u32>,
    /// Round duration δ.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Mean channel gain per round, comma separated (one value is broadcast).
    #[arg(long)]
    pub omega: Option<String>,
    /// Outage target.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Allocation methods, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub method: Option<Vec<Method>>,
    /// Tail-mass tolerance of the truncated Type I series.
    #[arg(long)]
    pub truncation_tolerance: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; defaults to $HARQ_OUT_DIR/<command>.<format>, else stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl CommonArgs {
    fn apply(self, s: &mut Settings) -> Result<()> {
        if let Some(path) = &self.config {
            s.apply_file(FileConfig::load(path)?);
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    s.$field = v;
                }
            )*};
        }
        take!(scheme, rounds, rate, rho, m, delta, epsilon, truncation_tolerance, trials, seed, format);
        if let Some(o) = self.omega {
            s.omega = parse_list(&o).context("--omega")?;
        }
        if let Some(m) = self.method {
            s.methods = Some(m);
        }
        if let Some(o) = self.out {
            s.out = Some(o);
        }
        Ok(())
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// `validate` found at least one disagreement.
    ValidationFailed,
}

/// Resolves settings for `command` from defaults, config file and flags.
pub fn settings(command: Command) -> Result<(&'static str, Settings)> {
    let mut s = Settings::default();
    let name = match command {
        Command::Outage { common, powers, power_db } => {
            common.apply(&mut s)?;
            if let Some(p) = powers {
                s.powers = Some(parse_list(&p).context("--powers")?);
            }
            if let Some(g) = power_db {
                s.power_db = Some(g);
            }
            "outage"
        }
        Command::Allocate { common } => {
            common.apply(&mut s)?;
            "allocate"
        }
        Command::Validate { common, powers } => {
            common.apply(&mut s)?;
            if let Some(p) = powers {
                s.powers = Some(parse_list(&p).context("--powers")?);
            }
            "validate"
        }
        Command::Sweep { common, over, values } => {
            common.apply(&mut s)?;
            if let Some(o) = over {
                s.over = Some(o);
            }
            if let Some(v) = values {
                s.values = Some(v);
            }
            "sweep"
        }
    };
    s.validate()?;
    Ok((name, s))
}

pub fn run(cli: Cli) -> Result<Status> {
    let (name, s) = settings(cli.command)?;
    let (table, status) = match name {
        "outage" => (commands::outage(&s)?, Status::Ok),
        "allocate" => (commands::allocate(&s)?, Status::Ok),
        "validate" => {
            let (t, pass) = commands::validate(&s)?;
            (t, if pass { Status::Ok } else { Status::ValidationFailed })
        }
        _ => (commands::sweep(&s)?, Status::Ok),
    };
    emit(&table, &s, name)?;
    Ok(status)
}

fn emit(table: &Table, s: &Settings, command: &str) -> Result<()> {
    // Check before touching the destination so a bad table leaves no file.
    table.check_finite()?;
    match s.output_path(command) {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_table(table, s.format, BufWriter::new(file))?;
            info!("wrote {} rows to {}", table.rows.len(), path.display());
        }
        None => write_table(table, s.format, io::stdout().lock())?,
    }
    Ok(())
}

fn write_table<W: Write>(table: &Table, format: Format, out: W) -> Result<()> {
    match format {
        Format::Csv => table.write_csv(out),
        Format::Json => table.write_json(out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Settings {
        let cli = Cli::try_parse_from(std::iter::once("harq").chain(args.iter().copied())).unwrap();
        settings(cli.command).unwrap().1
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[channel]\nm = 3\nrho = 0.2\n[solver]\nepsilon = 1e-4\n").unwrap();
        let s = parse(&["allocate", "--config", path.to_str().unwrap(), "--rho", "0.7", "--method", "fpa,ppa-exact"]);
        assert_eq!(s.m, 3);
        assert_eq!(s.rho, 0.7);
        assert_eq!(s.epsilon, 1e-4);
        assert_eq!(s.methods, Some(vec![Method::Fpa, Method::PpaExact]));
    }

    #[test]
    fn defaults() {
        let s = parse(&["sweep"]);
        assert_eq!((s.m, s.rounds, s.rate, s.rho, s.delta, s.epsilon), (2, 2, 2.0, 0.5, 1.0, 1e-6));
        assert_eq!(s.omega, vec![1.0]);
    }

    #[test]
    fn rejects_bad_values() {
        let cli = Cli::try_parse_from(["harq", "allocate", "--epsilon", "2"]).unwrap();
        assert!(settings(cli.command).is_err());
        assert!(Cli::try_parse_from(["harq", "allocate", "--scheme", "harq3"]).is_err());
    }
}
