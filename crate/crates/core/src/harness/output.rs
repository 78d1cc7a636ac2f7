//! CSV and metadata emission.
//!
//! An output directory holds `records.csv` (one row per measured user per
//! trial), `cdf.csv`, `summary.csv` and a `metadata.toml` sidecar with the
//! resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::{AggregateReport, Metric, MetricsRecord};
use crate::config::ScenarioConfig;
use crate::error::Result;

pub const RECORD_COLUMNS: [&str; 14] = [
    "trial", "cell", "user", "class", "scheme", "detector", "precoder", "overhead", "ul_sinr",
    "ul_rate", "dl_sinr", "dl_rate", "mse", "pc_limit",
];

/// Writes records with a header row, even when there are none.
pub fn write_records(path: impl AsRef<Path>, records: &[MetricsRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<MetricsRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let records = r.deserialize().collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(records)
}

/// `metric,class,value,fraction`, values strictly increasing within a group.
pub fn write_cdf(path: impl AsRef<Path>, report: &AggregateReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["metric", "class", "value", "fraction"])?;
    for table in &report.cdfs {
        for p in &table.points {
            w.write_record([
                table.metric.as_str(),
                table.class.as_str(),
                &p.value.to_string(),
                &p.fraction.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `key,value` table of scalar aggregates; absent values are left empty.
pub fn write_summary(path: impl AsRef<Path>, report: &AggregateReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    let mut rows: Vec<(String, String)> = vec![
        ("trials".into(), report.trials.to_string()),
        ("records".into(), report.records.to_string()),
        ("cells_per_trial".into(), report.cells_per_trial.to_string()),
        ("edge_users".into(), report.edge_users.to_string()),
        ("mean_overhead".into(), report.mean_overhead.to_string()),
        ("ul_cell_throughput".into(), report.ul_cell_throughput.to_string()),
        ("dl_cell_throughput".into(), report.dl_cell_throughput.to_string()),
        ("mse_center".into(), opt(report.mse_center)),
        ("mse_edge".into(), opt(report.mse_edge)),
    ];
    for table in &report.cdfs {
        if table.metric == Metric::Mse {
            continue;
        }
        rows.push((
            format!("median_{}_{}", table.metric.as_str(), table.class.as_str()),
            opt(report.median(table.metric, table.class)),
        ));
    }
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Metadata<'a> {
    software: &'static str,
    version: &'static str,
    measured_cells: Vec<usize>,
    interference_cells: usize,
    noise_variance_mw: f64,
    config: &'a ScenarioConfig,
}

pub fn write_metadata(path: impl AsRef<Path>, config: &ScenarioConfig) -> Result<()> {
    let meta = Metadata {
        software: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        measured_cells: config.measured(),
        interference_cells: config.total_cells,
        noise_variance_mw: config.noise_variance(),
        config,
    };
    fs::write(path, toml::to_string(&meta)?)?;
    Ok(())
}

/// Writes every output file into `dir`, creating it if needed.
pub fn emit_all(
    dir: impl AsRef<Path>,
    config: &ScenarioConfig,
    records: &[MetricsRecord],
    report: &AggregateReport,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = [
        dir.join("records.csv"),
        dir.join("cdf.csv"),
        dir.join("summary.csv"),
        dir.join("metadata.toml"),
    ];
    write_records(&paths[0], records)?;
    write_cdf(&paths[1], report)?;
    write_summary(&paths[2], report)?;
    write_metadata(&paths[3], config)?;
    Ok(paths.to_vec())
}
