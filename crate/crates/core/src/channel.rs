//! Large-scale fading and small-scale Rayleigh channels.
//!
//! `beta[i][j][k]` is the large-scale gain from user k of cell j to base
//! station i, `z / (r / R)^alpha` with `10 log10 z ~ N(0, sigma_shadow^2)`.
//! The gain is relative to a user at the cell radius; no absolute pathloss
//! intercept is applied, so absolute SNRs are optimistic while every
//! comparison between schemes is unaffected.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::ScenarioConfig;
use crate::linalg::{complex_gaussian, CMatrix, C64};
use crate::topology::NetworkRealization;

/// `z / (r / R)^alpha`.
pub fn pathloss_gain(distance: f64, radius: f64, exponent: f64, shadow: f64) -> f64 {
    shadow / (distance / radius).powf(exponent)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleFading {
    beta: Vec<Vec<Vec<f64>>>,
    shadow: Vec<Vec<Vec<f64>>>,
}

impl LargeScaleFading {
    /// Wraps an explicit gain tensor (shadow factors set to 1).
    pub fn from_gains(beta: Vec<Vec<Vec<f64>>>) -> Self {
        let shadow = beta
            .iter()
            .map(|bs| bs.iter().map(|cell| vec![1.0; cell.len()]).collect())
            .collect();
        LargeScaleFading { beta, shadow }
    }

    pub fn num_cells(&self) -> usize {
        self.beta.len()
    }

    pub fn users_in(&self, cell: usize) -> usize {
        self.beta[cell][cell].len()
    }

    pub fn beta(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.beta[bs][cell][user]
    }

    /// Gains from every user of `cell` to base station `bs`.
    pub fn link(&self, bs: usize, cell: usize) -> &[f64] {
        &self.beta[bs][cell]
    }

    /// Serving-cell gains `beta[i][i][..]`.
    pub fn serving(&self, cell: usize) -> &[f64] {
        &self.beta[cell][cell]
    }

    pub fn shadow(&self, bs: usize, cell: usize, user: usize) -> f64 {
        self.shadow[bs][cell][user]
    }
}

/// Draws independent log-normal shadowing for every (bs, cell, user) link.
pub fn large_scale<R: Rng + ?Sized>(
    network: &NetworkRealization,
    config: &ScenarioConfig,
    rng: &mut R,
) -> LargeScaleFading {
    let shadow_db = Normal::new(0.0, config.shadow_std).expect("shadow_std validated");
    let mut beta = Vec::with_capacity(network.num_cells());
    let mut shadow = Vec::with_capacity(network.num_cells());
    for per_bs in &network.distances {
        let mut b_bs = Vec::with_capacity(per_bs.len());
        let mut z_bs = Vec::with_capacity(per_bs.len());
        for per_cell in per_bs {
            let z: Vec<f64> = per_cell
                .iter()
                .map(|_| 10f64.powf(shadow_db.sample(rng) / 10.0))
                .collect();
            let b = per_cell
                .iter()
                .zip(&z)
                .map(|(&r, &z)| {
                    pathloss_gain(r, config.cell_radius, config.pathloss_exponent, z)
                })
                .collect();
            b_bs.push(b);
            z_bs.push(z);
        }
        beta.push(b_bs);
        shadow.push(z_bs);
    }
    LargeScaleFading { beta, shadow }
}

/// `H[i][j]` (M x K_j): channels from the users of cell j to base station i.
///
/// The same matrices serve the uplink and, transposed, the downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    h: Vec<Vec<CMatrix>>,
    antennas: usize,
}

impl ChannelSet {
    pub fn from_matrices(h: Vec<Vec<CMatrix>>) -> Self {
        let antennas = h
            .first()
            .and_then(|row| row.first())
            .map(|m| m.nrows())
            .unwrap_or(0);
        ChannelSet { h, antennas }
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn num_cells(&self) -> usize {
        self.h.len()
    }

    pub fn users_in(&self, cell: usize) -> usize {
        self.h[cell][cell].ncols()
    }

    pub fn link(&self, bs: usize, cell: usize) -> &CMatrix {
        &self.h[bs][cell]
    }

    /// Channel vector h_{bs,cell,user}.
    pub fn column(&self, bs: usize, cell: usize, user: usize) -> CMatrix {
        self.h[bs][cell].columns(user, 1).into_owned()
    }
}

/// Draws `g ~ CN(0, I_M)` per link and scales columns by `sqrt(beta)`.
pub fn small_scale<R: Rng + ?Sized>(
    fading: &LargeScaleFading,
    antennas: usize,
    rng: &mut R,
) -> ChannelSet {
    let h = (0..fading.num_cells())
        .map(|bs| {
            (0..fading.num_cells())
                .map(|cell| {
                    let gains = fading.link(bs, cell);
                    let mut g = complex_gaussian(rng, antennas, gains.len(), 1.0);
                    for (k, &b) in gains.iter().enumerate() {
                        g.column_mut(k).scale_mut(b.sqrt());
                    }
                    g
                })
                .collect()
        })
        .collect();
    ChannelSet { h, antennas }
}

/// `x^H y / M` for two column vectors.
pub fn normalized_inner(x: &CMatrix, y: &CMatrix) -> C64 {
    x.dotc(y) / x.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_sq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gain_normalization_points() {
        assert_eq!(pathloss_gain(500.0, 500.0, 3.0, 1.0), 1.0);
        assert!((pathloss_gain(250.0, 500.0, 3.0, 1.0) - 8.0).abs() < 1e-12);
        assert!(pathloss_gain(100.0, 500.0, 3.0, 1.0) > pathloss_gain(200.0, 500.0, 3.0, 1.0));
    }

    #[test]
    fn shadowing_std_is_eight_db() {
        let net = NetworkRealization::from_positions(
            vec![crate::topology::Point::ORIGIN],
            vec![vec![crate::topology::Point::new(500.0, 0.0); 100_000]],
        );
        let config = ScenarioConfig::default();
        let fading = large_scale(&net, &config, &mut ChaCha8Rng::seed_from_u64(1));
        let db: Vec<f64> = (0..100_000)
            .map(|k| 10.0 * fading.shadow(0, 0, k).log10())
            .collect();
        let mean = db.iter().sum::<f64>() / db.len() as f64;
        let var = db.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (db.len() - 1) as f64;
        assert!((var.sqrt() / 8.0 - 1.0).abs() < 0.02, "{}", var.sqrt());
        // r = R, so beta equals the shadow factor
        assert!((fading.beta(0, 0, 3) - fading.shadow(0, 0, 3)).abs() < 1e-12);
    }

    fn single_link(beta: f64) -> LargeScaleFading {
        LargeScaleFading::from_gains(vec![vec![vec![beta]]])
    }

    #[test]
    fn unit_variance_small_scale() {
        let set = small_scale(&single_link(1.0), 10_000, &mut ChaCha8Rng::seed_from_u64(2));
        let p = frobenius_sq(set.link(0, 0)) / 10_000.0;
        assert!((0.97..=1.03).contains(&p), "{p}");
    }

    #[test]
    fn beta_scales_power() {
        let set = small_scale(&single_link(4.0), 10_000, &mut ChaCha8Rng::seed_from_u64(3));
        let p = frobenius_sq(set.link(0, 0)) / 10_000.0;
        assert!((p / 4.0 - 1.0).abs() < 0.03, "{p}");
    }

    #[test]
    fn independent_links_nearly_orthogonal() {
        let fading = LargeScaleFading::from_gains(vec![vec![vec![1.0, 1.0]]]);
        let set = small_scale(&fading, 10_000, &mut ChaCha8Rng::seed_from_u64(4));
        let inner = normalized_inner(&set.column(0, 0, 0), &set.column(0, 0, 1));
        assert!(inner.norm() < 0.05, "{inner}");
    }

    #[test]
    fn asymptotic_orthogonality_tightens_with_m() {
        // Average absolute deviation over repeated draws, for M in {1e2, 1e3, 1e4}.
        let c = 2.0;
        let fading = LargeScaleFading::from_gains(vec![vec![vec![c, c]]]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for m in [100, 1000, 10_000] {
            let (mut self_dev, mut cross) = (0.0, 0.0);
            let reps = 40;
            for _ in 0..reps {
                let set = small_scale(&fading, m, &mut rng);
                let x = set.column(0, 0, 0);
                let y = set.column(0, 0, 1);
                self_dev += (normalized_inner(&x, &x).re - c).abs();
                cross += normalized_inner(&x, &y).norm();
            }
            let cur = (self_dev / reps as f64, cross / reps as f64);
            assert!(cur.0 < prev.0 && cur.1 < prev.1, "M={m}: {cur:?} vs {prev:?}");
            prev = cur;
        }
        assert!(prev.0 < 0.05 && prev.1 < 0.05, "{prev:?}");
    }

    #[test]
    fn full_network_shapes() {
        let config = ScenarioConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let net = crate::topology::drop_users(&config, &mut rng).unwrap();
        let fading = large_scale(&net, &config, &mut rng);
        let set = small_scale(&fading, 16, &mut rng);
        for i in 0..19 {
            for j in 0..19 {
                assert_eq!(set.link(i, j).shape(), (16, net.users_in(j)));
                assert!(fading.link(i, j).iter().all(|&b| b > 0.0));
            }
        }
    }
}
