//! Cases shipped with the crate (the JSON files under `cases/`).

use crate::netmodel::NetworkCase;

pub const WECC9_GFL_JSON: &str = include_str!("../../../cases/wecc9_gfl.json");
pub const TWO_BUS_JSON: &str = include_str!("../../../cases/two_bus.json");

/// Modified WECC 9-bus system: the third machine is replaced by a GFL wind
/// plant at bus 10, tied to bus 9 through bus 11.
pub fn wecc9_gfl() -> NetworkCase {
    NetworkCase::from_json(WECC9_GFL_JSON).expect("shipped case is valid")
}

/// One SG feeding one load over a single line.
pub fn two_bus() -> NetworkCase {
    NetworkCase::from_json(TWO_BUS_JSON).expect("shipped case is valid")
}
