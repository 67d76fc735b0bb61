//! Command-line front end for the switching-network simulator.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use switchnet::config::parse_config;
use switchnet::experiment::{deposit_distances, parse_deposits_csv, run, sweep, sweep_csv};
use switchnet::geometry::{Domain, Lattice};
use switchnet::metrics::RadialHistogram;
use switchnet::render::render;
use switchnet::verify::verify;

#[derive(Parser)]
#[command(name = "switchnet", version, about = "Particles steered through a switching lattice inside a disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write its artifacts.
    Run {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run the cross product of one varied key and a list of seeds.
    Sweep {
        config: PathBuf,
        /// `key=v1,v2,...`
        #[arg(long)]
        vary: String,
        /// Comma-separated seeds; may be empty.
        #[arg(long, default_value = "")]
        seeds: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Re-render a deposits CSV as a plain PGM.
    Render {
        deposits: PathBuf,
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Radial distribution of a deposits CSV, printed as CSV.
    Stats {
        deposits: PathBuf,
        #[arg(long, default_value_t = 50)]
        bins: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
    },
    /// Run the built-in oracle checks.
    Verify,
}

fn read_config(path: &PathBuf) -> Result<switchnet::config::SimConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = read_config(&config)?;
            let artifacts = run(&cfg, &out)?;
            println!("{}", artifacts.summary);
        }
        Command::Sweep { config, vary, seeds, out } => {
            let cfg = read_config(&config)?;
            let Some((key, values)) = vary.split_once('=') else {
                bail!("--vary expects key=v1,v2,...");
            };
            let values: Vec<String> =
                values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
            let seeds = seeds
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<u64>().with_context(|| format!("bad seed `{s}`")))
                .collect::<Result<Vec<_>>>()?;
            let rows = sweep(&cfg, key.trim(), &values, &seeds)?;
            fs::create_dir_all(&out)?;
            let path = out.join("sweep.csv");
            fs::write(&path, sweep_csv(&rows))?;
            println!("{} rows -> {}", rows.len(), path.display());
        }
        Command::Render { deposits, config, out } => {
            let cfg = read_config(&config)?;
            let lattice = Lattice::new(cfg.scale, Domain::new(cfg.radius)?)?;
            let text = fs::read_to_string(&deposits).with_context(|| format!("reading {}", deposits.display()))?;
            let deps = parse_deposits_csv(&text, &lattice)?;
            fs::write(&out, render(&deps, &lattice, cfg.size, cfg.image_width).to_plain())?;
        }
        Command::Stats { deposits, bins, radius } => {
            let text = fs::read_to_string(&deposits).with_context(|| format!("reading {}", deposits.display()))?;
            let hist = RadialHistogram::from_distances(deposit_distances(&text)?, bins, Domain::new(radius)?)?;
            print!("{}", hist.to_csv());
        }
        Command::Verify => {
            let report = verify();
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
