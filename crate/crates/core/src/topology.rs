//! Hexagonal cell layout and random user drops.
//!
//! Cells are flat-topped hexagons of circumradius `R`; neighboring base
//! stations sit `sqrt(3) R` apart along the directions 30° + k·60°. Cell 0 is
//! at the origin, cells 1..=6 form the first ring counter-clockwise from 30°,
//! and cells 7..=18 form the second ring counter-clockwise from 300°. With
//! this numbering `cell % 7` is a valid reuse-7 coloring: no two adjacent
//! cells share a class.

use rand::Rng;

use crate::config::ScenarioConfig;
use crate::error::{Result, SimError};

/// Number of edge-pilot reuse classes.
pub const REUSE_FACTOR: usize = 7;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Size of the central cooperating cluster (the cells measured by default).
pub fn cluster_size(total_cells: usize) -> usize {
    total_cells.min(REUSE_FACTOR)
}

/// Edge-pilot reuse class of a cell.
pub fn reuse_class(cell: usize) -> usize {
    cell % REUSE_FACTOR
}

/// Base-station positions for a 1-, 7- or 19-cell layout.
pub fn build_layout(total_cells: usize, radius: f64) -> Result<Vec<Point>> {
    if !matches!(total_cells, 1 | 7 | 19) {
        return Err(SimError::config(format!(
            "unsupported total_cells {total_cells}: layouts have 1, 7 or 19 cells"
        )));
    }
    let spacing = SQRT3 * radius;
    let dirs: Vec<Point> = (0..6)
        .map(|k| {
            let a = (30.0 + 60.0 * k as f64).to_radians();
            Point::new(spacing * a.cos(), spacing * a.sin())
        })
        .collect();

    let mut cells = vec![Point::ORIGIN];
    cells.extend(dirs.iter().copied());

    // Second ring, counter-clockwise: corner 2·d_k followed by mid-edge d_k + d_{k+1}.
    let mut ring2 = Vec::with_capacity(12);
    for k in 0..6 {
        let d = dirs[k];
        let n = dirs[(k + 1) % 6];
        ring2.push(Point::new(2.0 * d.x, 2.0 * d.y));
        ring2.push(Point::new(d.x + n.x, d.y + n.y));
    }
    // start at the mid-edge cell at 300° so that index % 7 colors properly
    ring2.rotate_left(9);
    cells.extend(ring2);

    cells.truncate(total_cells);
    Ok(cells)
}

/// Point-in-hexagon test for a flat-topped hexagon of circumradius `radius`.
pub fn in_hexagon(center: Point, radius: f64, p: Point) -> bool {
    let dx = (p.x - center.x).abs();
    let dy = (p.y - center.y).abs();
    let tol = 1e-9 * radius;
    dy <= SQRT3 / 2.0 * radius + tol && SQRT3 * dx + dy <= SQRT3 * radius + tol
}

/// True when two base stations are lattice neighbors.
pub fn are_adjacent(layout: &[Point], i: usize, j: usize, radius: f64) -> bool {
    i != j && (layout[i].distance(layout[j]) - SQRT3 * radius).abs() < 1e-6 * radius
}

pub fn neighbors(layout: &[Point], cell: usize, radius: f64) -> Vec<usize> {
    (0..layout.len())
        .filter(|&j| are_adjacent(layout, cell, j, radius))
        .collect()
}

/// One random user drop over the layout.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub bs_positions: Vec<Point>,
    /// `users[j][k]`: position of user k served by cell j.
    pub users: Vec<Vec<Point>>,
    /// `distances[i][j][k]`: distance from user (j, k) to base station i.
    pub distances: Vec<Vec<Vec<f64>>>,
}

impl NetworkRealization {
    /// Builds a realization from explicit positions, computing every distance.
    pub fn from_positions(bs_positions: Vec<Point>, users: Vec<Vec<Point>>) -> Self {
        let distances = bs_positions
            .iter()
            .map(|&bs| {
                users
                    .iter()
                    .map(|cell| cell.iter().map(|&u| bs.distance(u)).collect())
                    .collect()
            })
            .collect();
        NetworkRealization {
            bs_positions,
            users,
            distances,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn users_in(&self, cell: usize) -> usize {
        self.users[cell].len()
    }

    pub fn user_counts(&self) -> Vec<usize> {
        self.users.iter().map(Vec::len).collect()
    }

    pub fn distance(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.distances[bs][cell][user]
    }
}

/// Draws a uniform point in the hexagon around `center`, at least
/// `min_distance` from it.
pub fn sample_in_cell<R: Rng + ?Sized>(
    rng: &mut R,
    center: Point,
    radius: f64,
    min_distance: f64,
) -> Point {
    let half_height = SQRT3 / 2.0 * radius;
    loop {
        let p = Point::new(
            center.x + rng.random_range(-radius..=radius),
            center.y + rng.random_range(-half_height..=half_height),
        );
        if in_hexagon(center, radius, p) && p.distance(center) >= min_distance {
            return p;
        }
    }
}

/// Drops `K_i ~ U{K_min..=K_max}` users uniformly in every cell.
pub fn drop_users<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<NetworkRealization> {
    let layout = build_layout(config.total_cells, config.cell_radius)?;
    let users = layout
        .iter()
        .map(|&center| {
            let count = rng.random_range(config.users_min()..=config.users_max());
            (0..count)
                .map(|_| {
                    sample_in_cell(rng, center, config.cell_radius, config.min_user_distance)
                })
                .collect()
        })
        .collect();
    Ok(NetworkRealization::from_positions(layout, users))
}
