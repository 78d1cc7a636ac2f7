//! Pilot reception and correlation channel estimation.
//!
//! Base station `i` receives `Y_i = sqrt(rho_p) sum_j H_ij Phi_j + N_i` and
//! estimates any set of pilot rows by correlating: `Y_i Phi_rows^H / sqrt(rho_p)`.

use rand::Rng;

use crate::channel::ChannelSet;
use crate::linalg::{complex_gaussian, select_columns, select_rows, CMatrix};
use crate::pilots::PilotPlan;
use crate::topology::{reuse_class, REUSE_FACTOR};

/// Thermal noise powers for both links, in mW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub ul_variance: f64,
    pub dl_variance: f64,
}

impl NoiseModel {
    pub fn symmetric(variance: f64) -> Self {
        NoiseModel {
            ul_variance: variance,
            dl_variance: variance,
        }
    }
}

/// Received pilot matrices `Y_i` (M x tau), one per base station.
///
/// Noise is skipped entirely when `noise_variance` is zero, so noise-free
/// runs consume no randomness.
pub fn receive_pilots<R: Rng + ?Sized>(
    channels: &ChannelSet,
    plan: &PilotPlan,
    pilot_power: f64,
    noise_variance: f64,
    rng: &mut R,
) -> Vec<CMatrix> {
    let m = channels.antennas();
    let tau = plan.tau();
    let amp = pilot_power.sqrt();
    (0..channels.num_cells())
        .map(|bs| {
            // column r of g sums the channels of every user sent on row r
            let mut g = CMatrix::zeros(m, tau);
            for cell in 0..channels.num_cells() {
                let h = channels.link(bs, cell);
                for (k, &row) in plan.rows(cell).iter().enumerate() {
                    let mut col = g.column_mut(row);
                    col += h.column(k);
                }
            }
            let mut y = (g * &plan.phi).scale(amp);
            if noise_variance > 0.0 {
                y += complex_gaussian(rng, m, tau, noise_variance);
            }
            y
        })
        .collect()
}

/// `Y Phi_rows^H / sqrt(rho_p)`: one estimated column per requested row.
pub fn correlate(y: &CMatrix, phi: &CMatrix, rows: &[usize], pilot_power: f64) -> CMatrix {
    let seq = select_rows(phi, rows);
    (y * seq.adjoint()).unscale(pilot_power.sqrt())
}

/// Own-cell estimate `H^_ii`, one column per user, for any scheme.
pub fn estimate_own(y: &CMatrix, plan: &PilotPlan, cell: usize, pilot_power: f64) -> CMatrix {
    correlate(y, &plan.phi, plan.rows(cell), pilot_power)
}

/// Conventional estimate; identical to [`estimate_own`] under a reuse-1 plan.
pub fn estimate_conventional(y: &CMatrix, plan: &PilotPlan, cell: usize, pilot_power: f64) -> CMatrix {
    estimate_own(y, plan, cell, pilot_power)
}

/// Center and edge estimates of a cell under soft reuse, columns in the
/// order of the plan's center and edge index sets.
pub fn estimate_spr(
    y: &CMatrix,
    plan: &PilotPlan,
    cell: usize,
    pilot_power: f64,
) -> (CMatrix, CMatrix) {
    let own = estimate_own(y, plan, cell, pilot_power);
    let g = &plan.groups[cell];
    (select_columns(&own, &g.center), select_columns(&own, &g.edge))
}

/// Inter-cell matrix `A^_i`: the transposed estimates over every edge block
/// except the cell's own, stacked in reuse-class order.
pub fn estimate_intercell(y: &CMatrix, plan: &PilotPlan, cell: usize, pilot_power: f64) -> CMatrix {
    let own = reuse_class(cell);
    let rows: Vec<usize> = plan
        .edge_blocks
        .iter()
        .take(REUSE_FACTOR)
        .enumerate()
        .filter(|&(b, _)| b != own)
        .flat_map(|(_, block)| block.clone())
        .collect();
    correlate(y, &plan.phi, &rows, pilot_power).transpose()
}

/// Estimates for every base station of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateSet {
    /// `own[i]`: `H^_ii`, M x K_i.
    pub own: Vec<CMatrix>,
    /// `intercell[i]`: `A^_i`, rows x M. Empty when not requested or when
    /// the plan has no edge blocks.
    pub intercell: Vec<CMatrix>,
}

pub fn estimate_all(
    received: &[CMatrix],
    plan: &PilotPlan,
    pilot_power: f64,
    with_intercell: bool,
) -> EstimateSet {
    let own = received
        .iter()
        .enumerate()
        .map(|(i, y)| estimate_own(y, plan, i, pilot_power))
        .collect();
    let intercell = received
        .iter()
        .enumerate()
        .map(|(i, y)| {
            if with_intercell {
                estimate_intercell(y, plan, i, pilot_power)
            } else {
                CMatrix::zeros(0, y.nrows())
            }
        })
        .collect();
    EstimateSet { own, intercell }
}

/// `||h^ - h||^2 / ||h||^2` for each column.
pub fn normalized_error(estimate: &CMatrix, truth: &CMatrix) -> Vec<f64> {
    (0..truth.ncols())
        .map(|k| {
            let diff = (estimate.column(k) - truth.column(k)).norm_squared();
            diff / truth.column(k).norm_squared()
        })
        .collect()
}

/// Mean normalized error over the given users; `None` for an empty set.
pub fn channel_mse(estimate: &CMatrix, truth: &CMatrix, users: &[usize]) -> Option<f64> {
    if users.is_empty() {
        return None;
    }
    let errs = normalized_error(
        &select_columns(estimate, users),
        &select_columns(truth, users),
    );
    Some(errs.iter().sum::<f64>() / errs.len() as f64)
}
