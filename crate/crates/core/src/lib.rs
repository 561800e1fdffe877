//! Doorway states coupled to regular and chaotic backgrounds.
//!
//! The crate samples random background spectra and interaction vectors,
//! builds the bordered doorway Hamiltonian, and compares Monte Carlo
//! distributions of the doorway overlap with their closed forms.
//!
//! ```
//! use doorway_rmt::analytic::{AnalyticDistribution, Family};
//!
//! let gue = AnalyticDistribution::new(Family::Gue, 0.5, None).unwrap();
//! assert!((gue.pdf(0.0).unwrap() - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod doorway;
pub mod ensembles;
mod error;
pub mod experiment;
pub mod linalg;
pub mod oracles;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};

/// Crate version, recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
