//! Node-frequency side of the extended frequency divider.
//!
//! Pipeline: [`build_equivalent_connection`] moves the GFL currents to the
//! source side of the network equation, [`fold_loads`] removes the node
//! currents, [`voltage_superposition`] yields U^N = D^G·E^G + D^F·I^F and
//! [`node_freq_coeffs`] turns that into the real frequency coefficients
//! consumed by [`apply_fd`].

mod coeffs;
mod equivalent;
mod superposition;
mod traditional;

pub(crate) use coeffs::apply_matrices;
pub use coeffs::{apply_fd, node_freq_coeffs, node_freq_coeffs_fixed, source_coeffs, FreqCoeffs, SourceCoeffs};
pub use equivalent::{build_equivalent_connection, fold_admittances, fold_loads, load_admittances, EquivalentConnection};
pub use superposition::{voltage_superposition, VoltageSuperposition};
pub use traditional::{traditional_fd, traditional_fd_matrix};

pub use crate::netmodel::OperatingPoint;

use crate::netmodel::{build_partitioned_ybus, NetworkCase};
use crate::Result;

/// Case → superposition at an operating point in one call
/// (Y-bus, equivalent connection, loads folded at `op`).
pub fn superposition_at(case: &NetworkCase, op: &OperatingPoint) -> Result<VoltageSuperposition> {
    let ybus = build_partitioned_ybus(case)?;
    let eq = build_equivalent_connection(&ybus)?;
    let folded = fold_loads(&eq, case, op)?;
    voltage_superposition(&folded)
}
