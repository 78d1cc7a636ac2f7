//! Scenario configuration.
//!
//! Every field can be set from a flat TOML file whose keys match the field
//! names below; unknown keys are rejected. Defaults reproduce the baseline
//! 19-cell deployment (M = 128, 8..=10 users per cell, 500 m cells).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::topology;

/// Pilot allocation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Full reuse-1 of one orthogonal pilot group in every cell.
    Conventional,
    /// Soft pilot reuse: a shared center group plus reuse-7 edge blocks.
    Spr,
    /// Every user of the cooperating cluster gets its own sequence.
    Orthogonal,
}

/// Uplink linear detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    Mf,
    Zf,
}

/// Downlink precoder family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrecoderKind {
    Mf,
    Zf,
    MfMbd,
    ZfMbd,
}

impl PrecoderKind {
    pub fn uses_null_space(self) -> bool {
        matches!(self, PrecoderKind::MfMbd | PrecoderKind::ZfMbd)
    }
}

macro_rules! string_enum {
    ($ty:ty, $($variant:path => $name:literal),+ $(,)?) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = SimError;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(SimError::config(format!(
                        "unknown {} '{}' (expected one of: {})",
                        stringify!($ty), other, [$($name),+].join(", ")
                    ))),
                }
            }
        }
    };
}

string_enum!(Scheme,
    Scheme::Conventional => "conventional",
    Scheme::Spr => "spr",
    Scheme::Orthogonal => "orthogonal",
);
string_enum!(Detector, Detector::Mf => "mf", Detector::Zf => "zf");
string_enum!(PrecoderKind,
    PrecoderKind::Mf => "mf",
    PrecoderKind::Zf => "zf",
    PrecoderKind::MfMbd => "mf-mbd",
    PrecoderKind::ZfMbd => "zf-mbd",
);

/// All parameters of one Monte-Carlo experiment.
///
/// Powers are in mW, distances in meters, the shadowing deviation in dB and
/// the thermal noise density in dBm/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub total_cells: usize,
    /// Cells whose users are recorded; `None` selects the central cluster.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_cells: Option<Vec<usize>>,
    pub antennas_per_bs: usize,
    pub users_per_cell_range: [usize; 2],
    pub cell_radius: f64,
    pub pathloss_exponent: f64,
    pub shadow_std: f64,
    pub ul_power: f64,
    pub pilot_power: f64,
    pub dl_power: f64,
    pub noise_density: f64,
    pub bandwidth: f64,
    pub overhead: f64,
    pub grouping_param: f64,
    pub min_user_distance: f64,
    pub seed: u64,
    pub trials: usize,
    /// Small-scale fading redraws per user drop (1 = fresh drop per draw).
    pub inner_fading_draws: usize,
    pub scheme: Scheme,
    pub detector: Detector,
    pub precoder: PrecoderKind,
}

/// Converts a power level in dBm to mW.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            total_cells: 19,
            measured_cells: None,
            antennas_per_bs: 128,
            users_per_cell_range: [8, 10],
            cell_radius: 500.0,
            pathloss_exponent: 3.0,
            shadow_std: 8.0,
            ul_power: dbm_to_mw(10.0),
            pilot_power: dbm_to_mw(10.0),
            dl_power: dbm_to_mw(12.0),
            noise_density: -174.0,
            bandwidth: 10e6,
            overhead: 0.1,
            grouping_param: 0.1,
            min_user_distance: 30.0,
            seed: 0,
            trials: 100,
            inner_fading_draws: 1,
            scheme: Scheme::Spr,
            detector: Detector::Mf,
            precoder: PrecoderKind::Mf,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text)?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn users_min(&self) -> usize {
        self.users_per_cell_range[0]
    }

    pub fn users_max(&self) -> usize {
        self.users_per_cell_range[1]
    }

    /// Noise power over the system bandwidth, in mW. Used for both links.
    pub fn noise_variance(&self) -> f64 {
        dbm_to_mw(self.noise_density + 10.0 * self.bandwidth.log10())
    }

    /// Cells whose users are recorded, resolved against the layout size.
    pub fn measured(&self) -> Vec<usize> {
        match &self.measured_cells {
            Some(cells) => cells.clone(),
            None => (0..topology::cluster_size(self.total_cells)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(SimError::config(msg));
        if self.total_cells == 0 {
            return fail("total_cells must be at least 1".into());
        }
        let [kmin, kmax] = self.users_per_cell_range;
        if kmin == 0 || kmin > kmax {
            return fail(format!("users_per_cell_range [{kmin}, {kmax}] must satisfy 0 < min <= max"));
        }
        if self.antennas_per_bs < kmax {
            return fail(format!(
                "antennas_per_bs ({}) must be at least the maximum users per cell ({kmax})",
                self.antennas_per_bs
            ));
        }
        if !(self.min_user_distance > 0.0 && self.cell_radius > self.min_user_distance) {
            return fail(format!(
                "need cell_radius ({}) > min_user_distance ({}) > 0",
                self.cell_radius, self.min_user_distance
            ));
        }
        if !(self.pathloss_exponent > 0.0) {
            return fail("pathloss_exponent must be positive".into());
        }
        if !(self.shadow_std >= 0.0) {
            return fail("shadow_std must be non-negative".into());
        }
        if !(self.overhead > 0.0 && self.overhead < 1.0) {
            return fail(format!("overhead {} must lie in (0, 1)", self.overhead));
        }
        if !(self.grouping_param >= 0.0) || !self.grouping_param.is_finite() {
            return fail("grouping_param must be finite and non-negative".into());
        }
        for (name, p) in [
            ("ul_power", self.ul_power),
            ("pilot_power", self.pilot_power),
            ("dl_power", self.dl_power),
            ("bandwidth", self.bandwidth),
        ] {
            if !(p > 0.0) || !p.is_finite() {
                return fail(format!("{name} must be positive"));
            }
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.inner_fading_draws == 0 {
            return fail("inner_fading_draws must be at least 1".into());
        }
        let measured = self.measured();
        if measured.is_empty() {
            return fail("measured_cells must not be empty".into());
        }
        if let Some(bad) = measured.iter().find(|&&c| c >= self.total_cells) {
            return fail(format!("measured cell {bad} outside 0..{}", self.total_cells));
        }
        if self.precoder.uses_null_space() && self.scheme == Scheme::Conventional {
            return fail(format!(
                "precoder {} needs inter-cell edge estimates, which the conventional scheme cannot provide",
                self.precoder
            ));
        }
        Ok(())
    }
}
