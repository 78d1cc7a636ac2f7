//! Multi-cell massive-MIMO link-level simulator comparing conventional pilot
//! reuse, soft pilot reuse and fully orthogonal pilots, with MF/ZF detection
//! and MF/ZF precoding plus their multi-cell block-diagonalized variants.

pub mod channel;
pub mod config;
pub mod downlink;
pub mod error;
pub mod estimation;
pub mod grouping;
pub mod harness;
pub mod linalg;
pub mod pilots;
pub mod precoding;
pub mod topology;
pub mod uplink;

pub use config::{Detector, PrecoderKind, Scheme, ScenarioConfig};
pub use error::{Result, SimError};
