//! Extended frequency-divider mappings for power systems with synchronous
//! generators (SGs) and grid-following converters (GFLs).
//!
//! The crate maps SG rotor frequencies, GFL equivalent frequencies and GFL
//! current-amplitude rates onto every node-voltage frequency and every
//! branch-current frequency of a network, and checks those mappings against
//! a quasi-static phasor simulator.
//!
//! Module map:
//!
//! - [`netmodel`]: case data, partitioned bus admittance matrix, power flow.
//! - [`fdcore`]: equivalent connection, load folding, voltage superposition,
//!   node frequency coefficients and the traditional baseline.
//! - [`branchfd`]: branch current superposition and branch coefficients.
//! - [`dynsim`]: RK4 phasor simulation with second-order SGs and PLL-driven GFLs.
//! - [`validate`]: windowed frequency extraction, error index, method
//!   comparison and coefficient factor reports.
//! - [`cli`]: run configuration and the commands behind the `freqdiv` binary.

pub mod branchfd;
pub mod cases;
pub mod cli;
pub mod dynsim;
mod error;
pub mod export;
pub mod fdcore;
pub mod linalg;
pub mod netmodel;
pub mod validate;

pub use error::{Error, Result};
pub use netmodel::{NetworkCase, OperatingPoint, Phasor};
