//! Center/edge user classification and pilot budgets.
//!
//! A user is a center user when its squared serving gain exceeds the cell
//! threshold `(lambda / K) * sum(beta^2)`; equality counts as edge. Larger
//! `lambda` therefore moves users from the center group to the edge group.

use serde::{Deserialize, Serialize};

use crate::channel::LargeScaleFading;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UserClass {
    Center,
    Edge,
}

impl UserClass {
    pub fn as_str(self) -> &'static str {
        match self {
            UserClass::Center => "center",
            UserClass::Edge => "edge",
        }
    }
}

/// Grouping of one cell. Index lists are ascending user indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGroups {
    pub threshold: f64,
    pub center: Vec<usize>,
    pub edge: Vec<usize>,
}

impl CellGroups {
    /// Grouping from explicit index sets (threshold unknown, recorded as NaN).
    pub fn from_sets(center: Vec<usize>, edge: Vec<usize>) -> Self {
        CellGroups {
            threshold: f64::NAN,
            center,
            edge,
        }
    }

    pub fn num_users(&self) -> usize {
        self.center.len() + self.edge.len()
    }

    pub fn num_center(&self) -> usize {
        self.center.len()
    }

    pub fn num_edge(&self) -> usize {
        self.edge.len()
    }

    pub fn class_of(&self, user: usize) -> UserClass {
        if self.edge.binary_search(&user).is_ok() {
            UserClass::Edge
        } else {
            UserClass::Center
        }
    }
}

/// `rho_i = (lambda / K_i) * sum_k beta_{i,i,k}^2`.
pub fn compute_threshold(beta_serving: &[f64], lambda: f64) -> f64 {
    if beta_serving.is_empty() {
        return 0.0;
    }
    let energy: f64 = beta_serving.iter().map(|b| b * b).sum();
    lambda * energy / beta_serving.len() as f64
}

pub fn classify(beta_serving: &[f64], threshold: f64) -> CellGroups {
    let (center, edge) = (0..beta_serving.len()).partition(|&k| {
        let b = beta_serving[k];
        b * b > threshold
    });
    CellGroups {
        threshold,
        center,
        edge,
    }
}

/// Per-cell groupings for a whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct UserGrouping {
    pub cells: Vec<CellGroups>,
}

impl UserGrouping {
    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, cell: usize) -> &CellGroups {
        &self.cells[cell]
    }

    pub fn class_of(&self, cell: usize, user: usize) -> UserClass {
        self.cells[cell].class_of(user)
    }

    pub fn total_edge(&self) -> usize {
        self.cells.iter().map(CellGroups::num_edge).sum()
    }
}

pub fn group_users(fading: &LargeScaleFading, lambda: f64) -> UserGrouping {
    let cells = (0..fading.num_cells())
        .map(|i| {
            let serving = fading.serving(i);
            classify(serving, compute_threshold(serving, lambda))
        })
        .collect();
    UserGrouping { cells }
}

/// Orthogonal-sequence requirements of the three schemes over a set of
/// cooperating cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotBudgets {
    /// `K_CS = max_i K_i`.
    pub conventional: usize,
    /// `K_SPR = K_c + K_e`.
    pub soft: usize,
    /// `K_OS = sum_i K_i`.
    pub orthogonal: usize,
    /// `K_c = max_i K_{i,c}`.
    pub center: usize,
    /// `K_e = sum_i K_{i,e}`.
    pub edge: usize,
}

pub fn pilot_budgets(cells: &[CellGroups]) -> PilotBudgets {
    let conventional = cells.iter().map(CellGroups::num_users).max().unwrap_or(0);
    let center = cells.iter().map(CellGroups::num_center).max().unwrap_or(0);
    let edge = cells.iter().map(CellGroups::num_edge).sum();
    let orthogonal = cells.iter().map(CellGroups::num_users).sum();
    PilotBudgets {
        conventional,
        soft: center + edge,
        orthogonal,
        center,
        edge,
    }
}
