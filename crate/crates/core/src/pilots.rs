//! Orthonormal pilot matrices and per-user row assignment.
//!
//! Every plan uses the minimal pilot length: the conventional scheme reuses
//! `max K_i` rows in every cell; soft pilot reuse shares `K_c` center rows
//! across all cells and appends seven edge blocks, cell `i` using block
//! `i % 7`; the orthogonal scheme is the soft layout with every user treated
//! as an edge user.

use std::ops::Range;

use crate::config::Scheme;
use crate::error::{Result, SimError};
use crate::grouping::{pilot_budgets, CellGroups, PilotBudgets, UserGrouping};
use crate::linalg::{select_rows, CMatrix, C64};
use crate::topology::{reuse_class, REUSE_FACTOR};

/// First `n` rows of the unitary `tau x tau` DFT matrix.
pub fn build_pilot_matrix(n: usize, tau: usize) -> Result<CMatrix> {
    if tau < n {
        return Err(SimError::config(format!(
            "pilot length {tau} cannot hold {n} orthogonal sequences"
        )));
    }
    let scale = 1.0 / (tau as f64).sqrt();
    Ok(CMatrix::from_fn(n, tau, |r, t| {
        let phase = -2.0 * std::f64::consts::PI * ((r * t) % tau) as f64 / tau as f64;
        C64::from_polar(scale, phase)
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PilotPlan {
    pub scheme: Scheme,
    /// `tau x tau` orthonormal pilot matrix, one sequence per row.
    pub phi: CMatrix,
    /// `rows[cell][user]`: pilot row used by that user.
    pub rows: Vec<Vec<usize>>,
    /// Center/edge sets that drove the allocation. Conventional plans treat
    /// every user as center, orthogonal plans every user as edge.
    pub groups: Vec<CellGroups>,
    /// Rows `0..center_rows` are shared by center users of all cells.
    pub center_rows: usize,
    /// Edge block per reuse class (empty for the conventional scheme).
    pub edge_blocks: Vec<Range<usize>>,
    /// Budgets over the cooperating cluster.
    pub budgets: PilotBudgets,
    /// Fraction of the coherence block spent on pilots.
    pub overhead_factor: f64,
}

impl PilotPlan {
    pub fn tau(&self) -> usize {
        self.phi.nrows()
    }

    pub fn num_cells(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self, cell: usize) -> &[usize] {
        &self.rows[cell]
    }

    /// Edge block owned by `cell`, if the plan has edge blocks.
    pub fn edge_block(&self, cell: usize) -> Option<Range<usize>> {
        self.edge_blocks.get(reuse_class(cell)).cloned()
    }

    /// Sequences transmitted by the users of `cell` (`K_cell x tau`).
    pub fn sequences(&self, cell: usize) -> CMatrix {
        select_rows(&self.phi, &self.rows[cell])
    }

    /// `1 - overhead`, floored at zero.
    pub fn rate_prefactor(&self) -> f64 {
        (1.0 - self.overhead_factor).max(0.0)
    }
}

fn cluster_budgets(groups: &[CellGroups], cluster: usize) -> PilotBudgets {
    pilot_budgets(&groups[..cluster.min(groups.len())])
}

/// Reuse-1: user `k` of every cell transmits row `k`.
pub fn assign_conventional(grouping: &UserGrouping, cluster: usize, mu: f64) -> Result<PilotPlan> {
    let tau = grouping.cells.iter().map(CellGroups::num_users).max().unwrap_or(0);
    let rows = grouping
        .cells
        .iter()
        .map(|g| (0..g.num_users()).collect())
        .collect();
    let groups = grouping
        .cells
        .iter()
        .map(|g| CellGroups::from_sets((0..g.num_users()).collect(), Vec::new()))
        .collect();
    Ok(PilotPlan {
        scheme: Scheme::Conventional,
        phi: build_pilot_matrix(tau, tau)?,
        rows,
        groups,
        center_rows: tau,
        edge_blocks: Vec::new(),
        budgets: cluster_budgets(&grouping.cells, cluster),
        overhead_factor: mu,
    })
}

/// Soft pilot reuse with center rows and edge blocks sized to fit every cell.
///
/// `K_c` is the largest center group of any cell and block `b` is as large as
/// the largest edge group among cells of reuse class `b`.
pub fn assign_spr(grouping: &UserGrouping, cluster: usize, mu: f64) -> Result<PilotPlan> {
    let (center_rows, blocks) = minimal_sizes(&grouping.cells);
    let budgets = cluster_budgets(&grouping.cells, cluster);
    let mut plan = assign_spr_with_blocks(&grouping.cells, center_rows, &blocks, mu)?;
    plan.overhead_factor = soft_overhead(mu, budgets.soft, budgets.conventional);
    plan.budgets = budgets;
    Ok(plan)
}

/// Every user of the cluster gets a distinct row; cells outside the cluster
/// reuse the row block of their reuse class.
pub fn assign_orthogonal(grouping: &UserGrouping, cluster: usize, mu: f64) -> Result<PilotPlan> {
    let all_edge: Vec<CellGroups> = grouping
        .cells
        .iter()
        .map(|g| CellGroups::from_sets(Vec::new(), (0..g.num_users()).collect()))
        .collect();
    let (_, blocks) = minimal_sizes(&all_edge);
    let budgets = cluster_budgets(&grouping.cells, cluster);
    let mut plan = assign_spr_with_blocks(&all_edge, 0, &blocks, mu)?;
    plan.scheme = Scheme::Orthogonal;
    plan.overhead_factor = soft_overhead(mu, budgets.orthogonal, budgets.conventional);
    plan.budgets = budgets;
    Ok(plan)
}

pub fn assign(scheme: Scheme, grouping: &UserGrouping, cluster: usize, mu: f64) -> Result<PilotPlan> {
    match scheme {
        Scheme::Conventional => assign_conventional(grouping, cluster, mu),
        Scheme::Spr => assign_spr(grouping, cluster, mu),
        Scheme::Orthogonal => assign_orthogonal(grouping, cluster, mu),
    }
}

fn soft_overhead(mu: f64, used: usize, conventional: usize) -> f64 {
    if conventional == 0 {
        mu
    } else {
        mu * (used as f64 / conventional as f64)
    }
}

fn minimal_sizes(groups: &[CellGroups]) -> (usize, [usize; REUSE_FACTOR]) {
    let center = groups.iter().map(CellGroups::num_center).max().unwrap_or(0);
    let mut blocks = [0; REUSE_FACTOR];
    for (cell, g) in groups.iter().enumerate() {
        let b = &mut blocks[reuse_class(cell)];
        *b = (*b).max(g.num_edge());
    }
    (center, blocks)
}

/// Soft-reuse layout with explicit sizes. The returned plan carries
/// overhead `mu` and budgets over all given cells; callers adjust both.
pub fn assign_spr_with_blocks(
    groups: &[CellGroups],
    center_rows: usize,
    block_sizes: &[usize; REUSE_FACTOR],
    mu: f64,
) -> Result<PilotPlan> {
    let mut edge_blocks = Vec::with_capacity(REUSE_FACTOR);
    let mut start = center_rows;
    for &size in block_sizes {
        edge_blocks.push(start..start + size);
        start += size;
    }
    let tau = start;

    let mut rows = Vec::with_capacity(groups.len());
    for (cell, g) in groups.iter().enumerate() {
        if g.num_center() > center_rows {
            return Err(SimError::config(format!(
                "cell {cell} has {} center users but only {center_rows} center pilots",
                g.num_center()
            )));
        }
        let block = &edge_blocks[reuse_class(cell)];
        if g.num_edge() > block.len() {
            return Err(SimError::config(format!(
                "cell {cell} has {} edge users but its edge block holds {}",
                g.num_edge(),
                block.len()
            )));
        }
        let mut r = vec![0; g.num_users()];
        for (slot, &k) in g.center.iter().enumerate() {
            r[k] = slot;
        }
        for (slot, &k) in g.edge.iter().enumerate() {
            r[k] = block.start + slot;
        }
        rows.push(r);
    }

    let budgets = pilot_budgets(groups);
    Ok(PilotPlan {
        scheme: Scheme::Spr,
        phi: build_pilot_matrix(tau, tau)?,
        rows,
        groups: groups.to_vec(),
        center_rows,
        edge_blocks,
        budgets,
        overhead_factor: mu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius;
    use crate::topology::{are_adjacent, build_layout};

    fn orthonormality_error(phi: &CMatrix) -> f64 {
        frobenius(&(phi * phi.adjoint() - CMatrix::identity(phi.nrows(), phi.nrows())))
    }

    #[test]
    fn dft_rows_are_orthonormal() {
        for (n, tau) in [(4, 4), (8, 8), (3, 7), (60, 60)] {
            let phi = build_pilot_matrix(n, tau).unwrap();
            assert!(orthonormality_error(&phi) < 1e-12, "n={n} tau={tau}");
        }
        let one = build_pilot_matrix(1, 1).unwrap();
        assert_eq!(one[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn short_pilot_rejected() {
        assert!(matches!(build_pilot_matrix(5, 4), Err(SimError::Config(_))));
    }

    fn grouping(counts: &[(usize, usize)]) -> UserGrouping {
        UserGrouping {
            cells: counts
                .iter()
                .map(|&(c, e)| CellGroups::from_sets((0..c).collect(), (c..c + e).collect()))
                .collect(),
        }
    }

    #[test]
    fn three_cell_soft_layout() {
        let g = grouping(&[(3, 1), (4, 1), (5, 1)]);
        let plan = assign_spr(&g, 3, 0.1).unwrap();
        assert_eq!(plan.tau(), 8);
        assert_eq!(plan.center_rows, 5);
        assert_eq!(plan.rows(0), &[0, 1, 2, 5]);
        assert_eq!(plan.rows(1), &[0, 1, 2, 3, 6]);
        assert_eq!(plan.rows(2), &[0, 1, 2, 3, 4, 7]);
        assert!((plan.overhead_factor - 0.1 * 8.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn conventional_reuses_rows() {
        let g = grouping(&[(3, 1), (4, 1), (5, 1)]);
        let plan = assign_conventional(&g, 3, 0.1).unwrap();
        assert_eq!(plan.tau(), 6);
        assert_eq!(plan.rows(0), &[0, 1, 2, 3]);
        assert_eq!(plan.rows(2), &[0, 1, 2, 3, 4, 5]);
        assert_eq!(plan.overhead_factor, 0.1);
    }

    #[test]
    fn orthogonal_rows_unique() {
        let g = grouping(&[(3, 1), (4, 1), (5, 1)]);
        let plan = assign_orthogonal(&g, 3, 0.1).unwrap();
        assert_eq!(plan.tau(), 15);
        let mut all: Vec<usize> = plan.rows.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..15).collect::<Vec<_>>());
        assert!((plan.overhead_factor - 0.1 * 15.0 / 6.0).abs() < 1e-15);

        let single = grouping(&[(2, 3)]);
        let o = assign_orthogonal(&single, 1, 0.1).unwrap();
        let c = assign_conventional(&single, 1, 0.1).unwrap();
        assert_eq!(o.rows, c.rows);
        assert_eq!(o.overhead_factor, c.overhead_factor);
    }

    #[test]
    fn all_center_matches_conventional() {
        let g = grouping(&[(4, 0), (5, 0), (6, 0)]);
        let spr = assign_spr(&g, 3, 0.1).unwrap();
        let conv = assign_conventional(&g, 3, 0.1).unwrap();
        assert_eq!(spr.rows, conv.rows);
        assert_eq!(spr.tau(), conv.tau());
        assert_eq!(spr.overhead_factor, conv.overhead_factor);
    }

    #[test]
    fn undersized_block_rejected() {
        let g = grouping(&[(3, 2)]);
        let err = assign_spr_with_blocks(&g.cells, 3, &[1, 0, 0, 0, 0, 0, 0], 0.1);
        assert!(matches!(err, Err(SimError::Config(_))));
    }

    #[test]
    fn nineteen_cell_edge_rows_never_collide_with_neighbors() {
        let counts: Vec<(usize, usize)> = (0..19).map(|i| (4 + i % 3, 2 + i % 4)).collect();
        let g = grouping(&counts);
        let plan = assign_spr(&g, 7, 0.1).unwrap();
        let layout = build_layout(19, 500.0).unwrap();
        for i in 0..19 {
            for j in 0..19 {
                if !are_adjacent(&layout, i, j, 500.0) {
                    continue;
                }
                for &e in &plan.groups[i].edge {
                    let row = plan.rows[i][e];
                    assert!(!plan.rows[j].contains(&row), "cells {i},{j} row {row}");
                }
            }
        }
        assert_eq!(plan.edge_block(1), plan.edge_block(8));
        // rows distinct inside each cell
        for r in &plan.rows {
            let mut s = r.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), r.len());
        }
        assert!(orthonormality_error(&plan.phi) < 1e-12);
        let b = plan.budgets;
        assert!(plan.overhead_factor >= 0.1);
        assert!(plan.overhead_factor <= 0.1 * b.orthogonal as f64 / b.conventional as f64);
    }
}
