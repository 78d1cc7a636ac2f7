//! Downlink SINR and achievable rate under per-cell precoders.
//!
//! User k of cell i receives `sum_j sqrt(rho_d) h_{j,i,k}^T W_j x_j + n`, so
//! every precoding column of every base station interferes.

use crate::channel::{ChannelSet, LargeScaleFading};
use crate::linalg::CMatrix;
use crate::pilots::PilotPlan;
use crate::uplink::rate_with_overhead;

/// SINR of user `(cell, user)` given the precoders of all base stations.
pub fn dl_sinr(
    channels: &ChannelSet,
    precoders: &[CMatrix],
    cell: usize,
    user: usize,
    dl_power: f64,
    noise_variance: f64,
) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, w) in precoders.iter().enumerate() {
        let h = channels.link(j, cell).column(user);
        let gains = h.transpose() * w;
        for (k, g) in gains.iter().enumerate() {
            if j == cell && k == user {
                signal = g.norm_sqr();
            } else {
                interference += g.norm_sqr();
            }
        }
    }
    dl_power * signal / (dl_power * interference + noise_variance)
}

/// SINR of every user of `cell`.
pub fn dl_sinr_cell(
    channels: &ChannelSet,
    precoders: &[CMatrix],
    cell: usize,
    dl_power: f64,
    noise_variance: f64,
) -> Vec<f64> {
    let k_i = channels.users_in(cell);
    let mut signal = vec![0.0; k_i];
    let mut total = vec![0.0; k_i];
    for (j, w) in precoders.iter().enumerate() {
        // K_i x K_j gains from base station j's streams to the users of cell
        let gains = channels.link(j, cell).transpose() * w;
        for k in 0..k_i {
            total[k] += gains.row(k).iter().map(|g| g.norm_sqr()).sum::<f64>();
            if j == cell {
                signal[k] = gains[(k, k)].norm_sqr();
            }
        }
    }
    (0..k_i)
        .map(|k| dl_power * signal[k] / (dl_power * (total[k] - signal[k]) + noise_variance))
        .collect()
}

pub fn dl_rate(sinr: f64, plan: &PilotPlan) -> f64 {
    rate_with_overhead(sinr, plan.overhead_factor)
}

/// Large-M downlink SINR limit: squared serving gain over the squared gains
/// from every other base station whose users share the pilot row.
pub fn dl_contamination_limit(
    fading: &LargeScaleFading,
    plan: &PilotPlan,
    cell: usize,
    user: usize,
) -> f64 {
    let row = plan.rows(cell)[user];
    let own = fading.beta(cell, cell, user).powi(2);
    let contamination: f64 = (0..fading.num_cells())
        .filter(|&j| j != cell && plan.rows(j).contains(&row))
        .map(|j| fading.beta(j, cell, user).powi(2))
        .sum();
    own / contamination
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::small_scale;
    use crate::estimation::{estimate_all, receive_pilots};
    use crate::grouping::{CellGroups, UserGrouping};
    use crate::pilots::assign_spr;
    use crate::precoding::{mf_precoder, zf_precoder, NullSpaceProjector, mf_mbd, zf_mbd};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_cell_zf_is_interference_free() {
        let fading = LargeScaleFading::from_gains(vec![vec![vec![1.0, 0.5, 2.0]]]);
        let ch = small_scale(&fading, 16, &mut ChaCha8Rng::seed_from_u64(1));
        let p = zf_precoder(ch.link(0, 0), 0).unwrap();
        let sinr = dl_sinr_cell(&ch, &[p.w.clone()], 0, 3.0, 0.2);
        let expected = 3.0 / (p.gamma * 0.2);
        for s in sinr {
            assert!((s / expected - 1.0).abs() < 1e-8, "{s} vs {expected}");
        }
    }

    #[test]
    fn batched_matches_single_user() {
        let fading = LargeScaleFading::from_gains(vec![
            vec![vec![1.0, 0.5], vec![0.2, 0.1, 0.3]],
            vec![vec![0.3, 0.2], vec![1.0, 1.2, 0.7]],
        ]);
        let ch = small_scale(&fading, 10, &mut ChaCha8Rng::seed_from_u64(2));
        let w: Vec<CMatrix> = (0..2).map(|i| mf_precoder(ch.link(i, i), i).unwrap().w).collect();
        for cell in 0..2 {
            let batch = dl_sinr_cell(&ch, &w, cell, 2.0, 0.1);
            for (k, b) in batch.iter().enumerate() {
                let single = dl_sinr(&ch, &w, cell, k, 2.0, 0.1);
                assert!((b / single - 1.0).abs() < 1e-10);
            }
        }
    }

    /// Cell 0 precodes with and without MBD; compare the power it leaks
    /// into the edge users of cell 1 under noise-free estimates.
    #[test]
    fn mbd_removes_leakage_to_neighbor_edge_users() {
        let fading = LargeScaleFading::from_gains(vec![
            vec![vec![1.0, 0.6, 0.3], vec![0.2, 0.4, 0.5]],
            vec![vec![0.1, 0.2, 0.4], vec![1.0, 0.8, 0.3]],
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ch = small_scale(&fading, 16, &mut rng);
        let grouping = UserGrouping {
            cells: vec![
                CellGroups::from_sets(vec![0, 1], vec![2]),
                CellGroups::from_sets(vec![0], vec![1, 2]),
            ],
        };
        let plan = assign_spr(&grouping, 2, 0.1).unwrap();
        let y = receive_pilots(&ch, &plan, 1.0, 0.0, &mut rng);
        let est = estimate_all(&y, &plan, 1.0, true);
        let proj = NullSpaceProjector::from_intercell(&est.intercell[0], 16);
        assert_eq!(proj.rank(), 2);
        let leak = |w: &CMatrix, user: usize| -> f64 {
            (ch.link(0, 1).column(user).transpose() * w).norm_squared()
        };
        let plain = [mf_precoder(&est.own[0], 0).unwrap(), zf_precoder(&est.own[0], 0).unwrap()];
        let mbd = [mf_mbd(&est.own[0], &proj, 0).unwrap(), zf_mbd(&est.own[0], &proj, 0).unwrap()];
        for (p, b) in plain.iter().zip(&mbd) {
            for &e in &[1, 2] {
                assert!(leak(&b.w, e) <= 1e-6 * leak(&p.w, e), "user {e}");
            }
        }
    }
}
