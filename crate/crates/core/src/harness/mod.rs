//! Monte-Carlo orchestration: seeded trials, variant sweeps over shared
//! channel realizations, and aggregation.
//!
//! Each trial owns a ChaCha8 stream selected by its index. Inside the stream,
//! lane 0 draws the user drop and large-scale fading, lane `1 + 2d` the
//! small-scale fading of inner draw `d`, and lane `2 + 2d` its pilot noise.
//! Runs that differ only in scheme, detector or precoder therefore see the
//! same users and channels, and trials can execute in any order.

pub mod metrics;
pub mod output;

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{large_scale, small_scale};
use crate::config::{Detector, PrecoderKind, ScenarioConfig};
use crate::downlink::dl_sinr_cell;
use crate::error::Result;
use crate::estimation::{estimate_all, normalized_error, receive_pilots};
use crate::grouping::group_users;
use crate::linalg::CMatrix;
use crate::pilots::assign;
use crate::precoding::{build_precoder, mf_mbd, zf_mbd, NullSpaceProjector};
use crate::topology::{cluster_size, drop_users};
use crate::uplink::{detector_rows, pilot_contamination_limit, rate_with_overhead, ul_sinr_cell};

pub use metrics::{AggregateReport, MetricsRecord};

/// Receiver/transmitter pair evaluated on a shared realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub detector: Detector,
    pub precoder: PrecoderKind,
}

impl Variant {
    pub fn new(detector: Detector, precoder: PrecoderKind) -> Self {
        Variant { detector, precoder }
    }

    pub fn from_config(config: &ScenarioConfig) -> Self {
        Variant::new(config.detector, config.precoder)
    }
}

const LANE_WORDS: u32 = 48;

/// Random stream for `(seed, trial, lane)`.
pub fn trial_rng(seed: u64, trial: u64, lane: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.set_word_pos(u128::from(lane) << LANE_WORDS);
    rng
}

#[derive(Debug, Clone, Default)]
struct UserAccumulator {
    ul_rate: f64,
    ul_log: f64,
    dl_rate: f64,
    dl_log: f64,
}

impl UserAccumulator {
    fn add(&mut self, ul_sinr: f64, dl_sinr: f64, overhead: f64) {
        self.ul_rate += rate_with_overhead(ul_sinr, overhead);
        self.ul_log += (1.0 + ul_sinr).log2();
        self.dl_rate += rate_with_overhead(dl_sinr, overhead);
        self.dl_log += (1.0 + dl_sinr).log2();
    }
}

/// Records of one trial for the configured variant.
pub fn run_trial(config: &ScenarioConfig, trial: u64) -> Result<Vec<MetricsRecord>> {
    let mut out = run_trial_variants(config, trial, &[Variant::from_config(config)])?;
    Ok(out.pop().unwrap_or_default())
}

/// Records of one trial for every variant, all evaluated on the same users,
/// fading and pilot noise. Returned in variant order.
pub fn run_trial_variants(
    config: &ScenarioConfig,
    trial: u64,
    variants: &[Variant],
) -> Result<Vec<Vec<MetricsRecord>>> {
    trial_inner(config, trial, variants).map_err(|e| e.in_trial(trial))
}

fn trial_inner(
    config: &ScenarioConfig,
    trial: u64,
    variants: &[Variant],
) -> Result<Vec<Vec<MetricsRecord>>> {
    let mut lane0 = trial_rng(config.seed, trial, 0);
    let network = drop_users(config, &mut lane0)?;
    let fading = large_scale(&network, config, &mut lane0);
    let grouping = group_users(&fading, config.grouping_param);
    let plan = assign(
        config.scheme,
        &grouping,
        cluster_size(config.total_cells),
        config.overhead,
    )?;
    let overhead = plan.overhead_factor;
    let measured = config.measured();
    let sigma2 = config.noise_variance();
    let m = config.antennas_per_bs;
    let cells = network.num_cells();
    let need_intercell = variants.iter().any(|v| v.precoder.uses_null_space());

    let mut acc: Vec<Vec<Vec<UserAccumulator>>> = variants
        .iter()
        .map(|_| measured.iter().map(|&i| vec![UserAccumulator::default(); network.users_in(i)]).collect())
        .collect();
    let mut mse: Vec<Vec<f64>> = measured.iter().map(|&i| vec![0.0; network.users_in(i)]).collect();

    let draws = config.inner_fading_draws as u64;
    for d in 0..draws {
        let channels = small_scale(&fading, m, &mut trial_rng(config.seed, trial, 1 + 2 * d));
        let received = receive_pilots(
            &channels,
            &plan,
            config.pilot_power,
            sigma2,
            &mut trial_rng(config.seed, trial, 2 + 2 * d),
        );
        let est = estimate_all(&received, &plan, config.pilot_power, need_intercell);
        for (slot, &i) in measured.iter().enumerate() {
            for (k, e) in normalized_error(&est.own[i], channels.link(i, i)).into_iter().enumerate() {
                mse[slot][k] += e;
            }
        }
        let projectors: Vec<NullSpaceProjector> = if need_intercell {
            (0..cells)
                .map(|j| NullSpaceProjector::from_intercell(&est.intercell[j], m))
                .collect()
        } else {
            Vec::new()
        };

        for (v, variant) in variants.iter().enumerate() {
            let precoders = (0..cells)
                .map(|j| {
                    let p = match variant.precoder {
                        PrecoderKind::MfMbd => mf_mbd(&est.own[j], &projectors[j], j),
                        PrecoderKind::ZfMbd => zf_mbd(&est.own[j], &projectors[j], j),
                        kind => build_precoder(kind, &est.own[j], &est.intercell[j], j),
                    }?;
                    Ok(p.w)
                })
                .collect::<Result<Vec<CMatrix>>>()?;
            for (slot, &i) in measured.iter().enumerate() {
                let det = detector_rows(&est.own[i], variant.detector, i)?;
                let ul = ul_sinr_cell(&det, &channels, i, config.ul_power, sigma2);
                let dl = dl_sinr_cell(&channels, &precoders, i, config.dl_power, sigma2);
                for (k, user) in acc[v][slot].iter_mut().enumerate() {
                    user.add(ul[k], dl[k], overhead);
                }
            }
        }
    }

    let n = draws as f64;
    let records = variants
        .iter()
        .zip(acc)
        .map(|(variant, per_cell)| {
            let mut out = Vec::new();
            for ((slot, &i), users) in measured.iter().enumerate().zip(per_cell) {
                for (k, a) in users.into_iter().enumerate() {
                    out.push(MetricsRecord {
                        trial,
                        cell: i,
                        user: k,
                        class: grouping.class_of(i, k),
                        scheme: config.scheme,
                        detector: variant.detector,
                        precoder: variant.precoder,
                        overhead,
                        ul_sinr: (a.ul_log / n).exp2() - 1.0,
                        ul_rate: a.ul_rate / n,
                        dl_sinr: (a.dl_log / n).exp2() - 1.0,
                        dl_rate: a.dl_rate / n,
                        mse: mse[slot][k] / n,
                        pc_limit: pilot_contamination_limit(&fading, &plan, i, k),
                    });
                }
            }
            out
        })
        .collect();
    Ok(records)
}

/// Runs the trials in `trials` in parallel; records come back ordered by
/// trial, then cell, then user, separately for each variant.
pub fn run_trials(
    config: &ScenarioConfig,
    trials: Range<u64>,
    variants: &[Variant],
) -> Result<Vec<Vec<MetricsRecord>>> {
    let per_trial = trials
        .into_par_iter()
        .map(|t| run_trial_variants(config, t, variants))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![Vec::new(); variants.len()];
    for trial in per_trial {
        for (dst, src) in out.iter_mut().zip(trial) {
            dst.extend(src);
        }
    }
    Ok(out)
}

/// Pooled records and their aggregate report.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<MetricsRecord>,
    pub report: AggregateReport,
}

pub fn run_experiment(config: &ScenarioConfig) -> Result<Experiment> {
    config.validate()?;
    let variant = Variant::from_config(config);
    let records = run_trials(config, 0..config.trials as u64, &[variant])?
        .pop()
        .unwrap_or_default();
    let report = AggregateReport::from_records(&records, config.measured().len());
    Ok(Experiment { records, report })
}
