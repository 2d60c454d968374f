//! Case data model, case-file ingestion, partitioned bus admittance matrix
//! and steady-state initialization.
//!
//! Node sets follow the G/F/N partition: one virtual EMF node per SG (G),
//! the terminal bus of every GFL (F), and every other physical bus (N),
//! including SG terminal buses.

mod case;
mod phasor;
mod powerflow;
mod ybus;

pub use case::{load_case, Branch, Bus, BusId, GflPlant, Load, NetworkCase, SyncGen, CASE_SCHEMA};
pub use phasor::{angle_diff, unwrap_angles, wrap_angle, Phasor};
pub use powerflow::{
    init_operating_point, init_operating_point_with, solve_power_flow, OperatingPoint,
    PowerFlowOptions, PowerFlowSolution,
};
pub use ybus::{
    build_partitioned_ybus, bus_admittance, load_to_admittance, stamp_branch, stamp_series,
    BusLocation, Partition, PartitionedYbus,
};
