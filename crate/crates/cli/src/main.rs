use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use log::info;

use spr_core::harness::{output, run_experiment};
use spr_core::{Detector, PrecoderKind, ScenarioConfig, Scheme};

/// Monte-Carlo multi-cell massive-MIMO pilot-reuse simulator.
///
/// Flags override values read from --config; anything unset falls back to
/// the built-in defaults.
#[derive(Parser, Debug)]
#[command(name = "sprsim", version, about)]
struct Args {
    /// TOML file with scenario parameters
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    detector: Option<Detector>,
    #[arg(long)]
    precoder: Option<PrecoderKind>,
    /// Antennas per base station
    #[arg(long)]
    antennas: Option<usize>,
    /// Grouping parameter
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV files and metadata
    #[arg(long, default_value = "sprsim-out")]
    out: PathBuf,
}

fn resolve(args: &Args) -> Result<ScenarioConfig> {
    let mut config = match &args.config {
        Some(path) => ScenarioConfig::from_file(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = args.scheme {
        config.scheme = s;
    }
    if let Some(d) = args.detector {
        config.detector = d;
    }
    if let Some(p) = args.precoder {
        config.precoder = p;
    }
    if let Some(m) = args.antennas {
        config.antennas_per_bs = m;
    }
    if let Some(l) = args.lambda {
        config.grouping_param = l;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    config.validate()?;
    Ok(config)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    let config = resolve(&args)?;
    info!(
        "{} trials: scheme={} detector={} precoder={} M={} lambda={}",
        config.trials,
        config.scheme,
        config.detector,
        config.precoder,
        config.antennas_per_bs,
        config.grouping_param
    );
    let exp = run_experiment(&config)?;
    let files = output::emit_all(&args.out, &config, &exp.records, &exp.report)?;
    let r = &exp.report;
    println!("records            {}", r.records);
    println!("UL cell throughput {:.4} bits/s/Hz", r.ul_cell_throughput);
    println!("DL cell throughput {:.4} bits/s/Hz", r.dl_cell_throughput);
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4e}"));
    println!("MSE center / edge  {} / {}", fmt(r.mse_center), fmt(r.mse_edge));
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
