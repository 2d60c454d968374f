//! Quasi-static phasor simulator.
//!
//! SGs are second-order machines behind x′; GFLs are PLL-synchronized
//! current sources with first-order current lags. The network is solved
//! algebraically at every RK4 stage through the node-voltage
//! superposition of the current load configuration.

mod config;
mod model;
mod simulate;
mod trajectory;

pub use config::{Disturbance, DisturbanceKind, SimConfig};
pub use model::{network_solve, NetworkSolution, SimState};
pub use simulate::{initial_state, simulate};
pub use trajectory::{
    central_difference, equivalent_frequency_from_series, gfl_equivalent_frequency, Segment, Trajectory,
};
