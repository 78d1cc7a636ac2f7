//! Uplink linear detection, SINR and achievable rate.

use log::warn;

use crate::channel::{ChannelSet, LargeScaleFading};
use crate::config::Detector;
use crate::error::{Result, SimError};
use crate::linalg::{hpd_inverse, CMatrix};
use crate::pilots::PilotPlan;

/// Detection matrix (K x M) applied to the received uplink vector.
///
/// MF uses `H^^H`; ZF the left pseudo-inverse `(H^^H H^)^-1 H^^H`.
pub fn detector_rows(estimate: &CMatrix, detector: Detector, cell: usize) -> Result<CMatrix> {
    match detector {
        Detector::Mf => Ok(estimate.adjoint()),
        Detector::Zf => {
            let gram = estimate.adjoint() * estimate;
            let inv = hpd_inverse(&gram).ok_or(SimError::Singular {
                cell,
                what: "ZF detector Gram matrix",
            })?;
            Ok(inv * estimate.adjoint())
        }
    }
}

/// SINR of user `(cell, user)` detected with row `w` (1 x M). Every user of
/// every cell interferes.
pub fn ul_sinr(
    w: &CMatrix,
    channels: &ChannelSet,
    cell: usize,
    user: usize,
    ul_power: f64,
    noise_variance: f64,
) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for j in 0..channels.num_cells() {
        let gains = w * channels.link(cell, j);
        for (k, g) in gains.iter().enumerate() {
            if j == cell && k == user {
                signal = g.norm_sqr();
            } else {
                interference += g.norm_sqr();
            }
        }
    }
    let noise = noise_variance * w.norm_squared();
    ul_power * signal / (ul_power * interference + noise)
}

/// SINR of every user of `cell` given its detection matrix.
pub fn ul_sinr_cell(
    detector: &CMatrix,
    channels: &ChannelSet,
    cell: usize,
    ul_power: f64,
    noise_variance: f64,
) -> Vec<f64> {
    let k_i = detector.nrows();
    let mut signal = vec![0.0; k_i];
    let mut total = vec![0.0; k_i];
    for j in 0..channels.num_cells() {
        let gains = detector * channels.link(cell, j);
        for k in 0..k_i {
            total[k] += gains.row(k).iter().map(|g| g.norm_sqr()).sum::<f64>();
            if j == cell {
                signal[k] = gains[(k, k)].norm_sqr();
            }
        }
    }
    (0..k_i)
        .map(|k| {
            let noise = noise_variance * detector.row(k).norm_squared();
            ul_power * signal[k] / (ul_power * (total[k] - signal[k]) + noise)
        })
        .collect()
}

/// `prefactor * log2(1 + sinr)`.
pub fn achievable_rate(sinr: f64, prefactor: f64) -> f64 {
    prefactor * (1.0 + sinr).log2()
}

/// Rate after pilot overhead; an overhead of one or more yields zero.
pub fn ul_rate(sinr: f64, plan: &PilotPlan) -> f64 {
    rate_with_overhead(sinr, plan.overhead_factor)
}

pub(crate) fn rate_with_overhead(sinr: f64, overhead: f64) -> f64 {
    if overhead >= 1.0 {
        warn!("pilot overhead {overhead:.3} leaves no data symbols; rate set to 0");
        return 0.0;
    }
    achievable_rate(sinr, 1.0 - overhead)
}

/// Large-M uplink SINR limit of a user: its squared serving gain over the
/// squared gains, to the same base station, of every other-cell user that
/// shares its pilot row. Infinite when no such user exists.
pub fn pilot_contamination_limit(
    fading: &LargeScaleFading,
    plan: &PilotPlan,
    cell: usize,
    user: usize,
) -> f64 {
    let row = plan.rows(cell)[user];
    let own = fading.beta(cell, cell, user).powi(2);
    let mut contamination = 0.0;
    for j in (0..fading.num_cells()).filter(|&j| j != cell) {
        for (k, &r) in plan.rows(j).iter().enumerate() {
            if r == row {
                contamination += fading.beta(cell, j, k).powi(2);
            }
        }
    }
    own / contamination
}
