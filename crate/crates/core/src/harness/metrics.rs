//! Per-user records and their aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::{Detector, PrecoderKind, Scheme};
use crate::grouping::UserClass;

/// One measured user in one trial. With several inner fading draws the rates
/// and MSE are means over draws and the SINRs are `2^E[log2(1+SINR)] - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub trial: u64,
    pub cell: usize,
    pub user: usize,
    pub class: UserClass,
    pub scheme: Scheme,
    pub detector: Detector,
    pub precoder: PrecoderKind,
    pub overhead: f64,
    pub ul_sinr: f64,
    pub ul_rate: f64,
    pub dl_sinr: f64,
    pub dl_rate: f64,
    pub mse: f64,
    /// Large-M uplink SINR limit from pilot sharing (infinite if unshared).
    pub pc_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    UlSinr,
    UlRate,
    DlSinr,
    DlRate,
    Mse,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::UlSinr,
        Metric::UlRate,
        Metric::DlSinr,
        Metric::DlRate,
        Metric::Mse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::UlSinr => "ul_sinr",
            Metric::UlRate => "ul_rate",
            Metric::DlSinr => "dl_sinr",
            Metric::DlRate => "dl_rate",
            Metric::Mse => "mse",
        }
    }

    pub fn of(self, r: &MetricsRecord) -> f64 {
        match self {
            Metric::UlSinr => r.ul_sinr,
            Metric::UlRate => r.ul_rate,
            Metric::DlSinr => r.dl_sinr,
            Metric::DlRate => r.dl_rate,
            Metric::Mse => r.mse,
        }
    }
}

/// Which users a statistic covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassFilter {
    All,
    Center,
    Edge,
}

impl ClassFilter {
    pub const ALL: [ClassFilter; 3] = [ClassFilter::All, ClassFilter::Center, ClassFilter::Edge];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassFilter::All => "all",
            ClassFilter::Center => "center",
            ClassFilter::Edge => "edge",
        }
    }

    pub fn accepts(self, class: UserClass) -> bool {
        match self {
            ClassFilter::All => true,
            ClassFilter::Center => class == UserClass::Center,
            ClassFilter::Edge => class == UserClass::Edge,
        }
    }
}

pub fn values(records: &[MetricsRecord], metric: Metric, filter: ClassFilter) -> Vec<f64> {
    records
        .iter()
        .filter(|r| filter.accepts(r.class))
        .map(|r| metric.of(r))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub value: f64,
    /// Fraction of samples `<= value`.
    pub fraction: f64,
}

/// Empirical CDF with one point per distinct value.
pub fn empirical_cdf(samples: &[f64]) -> Vec<CdfPoint> {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (idx, &v) in sorted.iter().enumerate() {
        let fraction = (idx + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.value == v => last.fraction = fraction,
            _ => out.push(CdfPoint { value: v, fraction }),
        }
    }
    out
}

/// Linear-interpolation quantile, `q` in [0, 1].
pub fn quantile(samples: &[f64], q: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64))
}

pub fn median(samples: &[f64]) -> Option<f64> {
    quantile(samples, 0.5)
}

pub fn mean(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        None
    } else {
        Some(samples.iter().sum::<f64>() / samples.len() as f64)
    }
}

/// Sum of a rate over all records divided by `trials x cells_per_trial`.
pub fn cell_throughput(records: &[MetricsRecord], metric: Metric, cells_per_trial: usize) -> f64 {
    let trials = distinct_trials(records);
    if trials == 0 || cells_per_trial == 0 {
        return 0.0;
    }
    let total: f64 = records.iter().map(|r| metric.of(r)).sum();
    total / (trials * cells_per_trial) as f64
}

fn distinct_trials(records: &[MetricsRecord]) -> usize {
    let mut t: Vec<u64> = records.iter().map(|r| r.trial).collect();
    t.sort_unstable();
    t.dedup();
    t.len()
}

/// Per-trial mean MSE of a class, averaged over the trials that have users
/// of that class.
pub fn class_mse(records: &[MetricsRecord], filter: ClassFilter) -> Option<f64> {
    let mut per_trial: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| filter.accepts(r.class)) {
        let e = per_trial.entry(r.trial).or_default();
        e.0 += r.mse;
        e.1 += 1;
    }
    let means: Vec<f64> = per_trial.values().map(|&(s, n)| s / n as f64).collect();
    mean(&means)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable {
    pub metric: Metric,
    pub class: ClassFilter,
    pub points: Vec<CdfPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateReport {
    pub trials: usize,
    pub records: usize,
    pub cells_per_trial: usize,
    pub ul_cell_throughput: f64,
    pub dl_cell_throughput: f64,
    pub mse_center: Option<f64>,
    pub mse_edge: Option<f64>,
    pub edge_users: usize,
    pub mean_overhead: f64,
    pub cdfs: Vec<CdfTable>,
}

impl AggregateReport {
    pub fn from_records(records: &[MetricsRecord], cells_per_trial: usize) -> Self {
        let cdfs = Metric::ALL
            .iter()
            .flat_map(|&metric| {
                ClassFilter::ALL.iter().map(move |&class| (metric, class))
            })
            .map(|(metric, class)| CdfTable {
                metric,
                class,
                points: empirical_cdf(&values(records, metric, class)),
            })
            .collect();
        AggregateReport {
            trials: distinct_trials(records),
            records: records.len(),
            cells_per_trial,
            ul_cell_throughput: cell_throughput(records, Metric::UlRate, cells_per_trial),
            dl_cell_throughput: cell_throughput(records, Metric::DlRate, cells_per_trial),
            mse_center: class_mse(records, ClassFilter::Center),
            mse_edge: class_mse(records, ClassFilter::Edge),
            edge_users: records.iter().filter(|r| r.class == UserClass::Edge).count(),
            mean_overhead: mean(&records.iter().map(|r| r.overhead).collect::<Vec<_>>()).unwrap_or(0.0),
            cdfs,
        }
    }

    pub fn cdf(&self, metric: Metric, class: ClassFilter) -> &[CdfPoint] {
        self.cdfs
            .iter()
            .find(|t| t.metric == metric && t.class == class)
            .map(|t| t.points.as_slice())
            .unwrap_or(&[])
    }

    /// Smallest value whose CDF reaches one half.
    pub fn median(&self, metric: Metric, class: ClassFilter) -> Option<f64> {
        self.cdf(metric, class)
            .iter()
            .find(|p| p.fraction >= 0.5)
            .map(|p| p.value)
    }
}
