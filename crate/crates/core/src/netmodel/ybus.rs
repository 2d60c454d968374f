use std::collections::HashMap;

use num_complex::Complex64;

use super::case::{Branch, BusId, NetworkCase};
use crate::linalg::{inverse, CMatrix};
use crate::{Error, Result};

/// Where a physical bus lives in the G/F/N partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusLocation {
    F(usize),
    N(usize),
}

/// Ordering of the three node sets.
///
/// G follows `case.sgs`, F follows `case.gfls`, N follows `case.buses`
/// with the GFL terminal buses skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Terminal bus of each SG (G order).
    pub sg_buses: Vec<BusId>,
    pub f_buses: Vec<BusId>,
    pub n_buses: Vec<BusId>,
    locations: HashMap<BusId, BusLocation>,
}

impl Partition {
    pub fn from_case(case: &NetworkCase) -> Self {
        let sg_buses: Vec<BusId> = case.sgs.iter().map(|g| g.bus).collect();
        let f_buses: Vec<BusId> = case.gfls.iter().map(|f| f.bus).collect();
        let mut locations = HashMap::new();
        for (k, &b) in f_buses.iter().enumerate() {
            locations.insert(b, BusLocation::F(k));
        }
        let mut n_buses = Vec::new();
        for b in &case.buses {
            if !locations.contains_key(&b.id) {
                locations.insert(b.id, BusLocation::N(n_buses.len()));
                n_buses.push(b.id);
            }
        }
        Self {
            sg_buses,
            f_buses,
            n_buses,
            locations,
        }
    }

    pub fn ng(&self) -> usize {
        self.sg_buses.len()
    }

    pub fn nf(&self) -> usize {
        self.f_buses.len()
    }

    pub fn nn(&self) -> usize {
        self.n_buses.len()
    }

    pub fn location(&self, bus: BusId) -> Option<BusLocation> {
        self.locations.get(&bus).copied()
    }

    /// Index of a physical bus in the full [G, F, N] node ordering.
    pub fn full_index(&self, bus: BusId) -> Option<usize> {
        self.location(bus).map(|loc| match loc {
            BusLocation::F(k) => self.ng() + k,
            BusLocation::N(k) => self.ng() + self.nf() + k,
        })
    }

    /// N index of an SG terminal bus. SG buses are never in F.
    pub fn sg_terminal(&self, g: usize) -> usize {
        match self.location(self.sg_buses[g]) {
            Some(BusLocation::N(k)) => k,
            _ => unreachable!("validated case keeps SG terminals in N"),
        }
    }
}

/// The nine blocks of I = Y·[E^G, U^F, U^N] over the G/F/N partition.
#[derive(Debug, Clone)]
pub struct PartitionedYbus {
    pub y_gg: CMatrix,
    pub y_gf: CMatrix,
    pub y_gn: CMatrix,
    pub y_fg: CMatrix,
    pub y_ff: CMatrix,
    pub y_fn: CMatrix,
    pub y_ng: CMatrix,
    pub y_nf: CMatrix,
    pub y_nn: CMatrix,
    pub partition: Partition,
}

impl PartitionedYbus {
    /// Reassembles the full matrix in [G, F, N] order.
    pub fn full(&self) -> CMatrix {
        let (ng, nf, nn) = (self.partition.ng(), self.partition.nf(), self.partition.nn());
        let n = ng + nf + nn;
        let mut m = CMatrix::zeros(n, n);
        let offs = [0, ng, ng + nf];
        let blocks = [
            [&self.y_gg, &self.y_gf, &self.y_gn],
            [&self.y_fg, &self.y_ff, &self.y_fn],
            [&self.y_ng, &self.y_nf, &self.y_nn],
        ];
        for (r, row) in blocks.iter().enumerate() {
            for (c, block) in row.iter().enumerate() {
                m.view_mut((offs[r], offs[c]), block.shape()).copy_from(*block);
            }
        }
        m
    }
}

/// Adds a series element of admittance `y` between nodes `i` and `j`.
pub fn stamp_series(y_bus: &mut CMatrix, i: usize, j: usize, y: Complex64) {
    y_bus[(i, i)] += y;
    y_bus[(j, j)] += y;
    y_bus[(i, j)] -= y;
    y_bus[(j, i)] -= y;
}

/// Adds the π-model of `br` between nodes `i` (from) and `j` (to).
pub fn stamp_branch(y_bus: &mut CMatrix, i: usize, j: usize, br: &Branch) {
    stamp_series(y_bus, i, j, br.series_admittance);
    y_bus[(i, i)] += br.shunt_from;
    y_bus[(j, j)] += br.shunt_to;
}

/// Bus admittance matrix over the physical buses, in `case.buses` order.
/// SG internal reactances and loads are not included.
pub fn bus_admittance(case: &NetworkCase) -> CMatrix {
    let n = case.buses.len();
    let mut y = CMatrix::zeros(n, n);
    for br in &case.branches {
        let i = case.bus_position(br.from_bus).expect("validated case");
        let j = case.bus_position(br.to_bus).expect("validated case");
        stamp_branch(&mut y, i, j, br);
    }
    y
}

/// Builds the partitioned Y-bus, adding one virtual EMF node per SG tied to
/// its terminal through 1/(j·x′). Loads are left out.
pub fn build_partitioned_ybus(case: &NetworkCase) -> Result<PartitionedYbus> {
    case.validate()?;
    let partition = Partition::from_case(case);
    let (ng, nf, nn) = (partition.ng(), partition.nf(), partition.nn());
    let n = ng + nf + nn;
    let mut full = CMatrix::zeros(n, n);

    for (g, sg) in case.sgs.iter().enumerate() {
        let t = partition.full_index(sg.bus).expect("validated case");
        stamp_series(&mut full, g, t, Complex64::new(0.0, -1.0 / sg.internal_reactance));
    }
    for br in &case.branches {
        let i = partition.full_index(br.from_bus).expect("validated case");
        let j = partition.full_index(br.to_bus).expect("validated case");
        stamp_branch(&mut full, i, j, br);
    }

    let block = |r0: usize, nr: usize, c0: usize, nc: usize| full.view((r0, c0), (nr, nc)).into_owned();
    let (g0, f0, n0) = (0, ng, ng + nf);
    let ybus = PartitionedYbus {
        y_gg: block(g0, ng, g0, ng),
        y_gf: block(g0, ng, f0, nf),
        y_gn: block(g0, ng, n0, nn),
        y_fg: block(f0, nf, g0, ng),
        y_ff: block(f0, nf, f0, nf),
        y_fn: block(f0, nf, n0, nn),
        y_ng: block(n0, nn, g0, ng),
        y_nf: block(n0, nn, f0, nf),
        y_nn: block(n0, nn, n0, nn),
        partition,
    };

    if nf > 0 && inverse(&ybus.y_ff, "Y^FF").is_err() {
        let isolated: Vec<String> = (0..nf)
            .filter(|&k| (0..n).all(|c| full[(ng + k, c)].norm() == 0.0))
            .map(|k| ybus.partition.f_buses[k].to_string())
            .collect();
        let named = if isolated.is_empty() {
            ybus.partition.f_buses.iter().map(|b| b.to_string()).collect()
        } else {
            isolated
        };
        return Err(Error::Singular(format!(
            "Y^FF is singular; isolated GFL bus {}",
            named.join(", ")
        )));
    }
    Ok(ybus)
}

/// Constant admittance drawing `p + jq` at voltage magnitude `u_mag`.
pub fn load_to_admittance(p: f64, q: f64, u_mag: f64) -> Result<Complex64> {
    if !(u_mag > 0.0) {
        return Err(Error::Domain(format!("load voltage magnitude must be positive, got {u_mag}")));
    }
    Ok(Complex64::new(p, -q) / (u_mag * u_mag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::case::{Bus, SyncGen};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sg(bus: BusId, x: f64) -> SyncGen {
        SyncGen {
            bus,
            internal_reactance: x,
            inertia_m: 10.0,
            damping: 2.0,
            p_mech: 0.0,
            v_set: 1.0,
            slack: false,
        }
    }

    fn two_bus(y: Complex64) -> NetworkCase {
        NetworkCase {
            name: String::new(),
            base_mva: 100.0,
            nominal_hz: 60.0,
            buses: vec![Bus { id: 1, name: None }, Bus { id: 2, name: None }],
            branches: vec![Branch {
                from_bus: 1,
                to_bus: 2,
                series_admittance: y,
                shunt_from: c(0.0, 0.0),
                shunt_to: c(0.0, 0.0),
            }],
            sgs: vec![sg(1, 0.1)],
            gfls: vec![],
            loads: vec![],
        }
    }

    #[test]
    fn single_line_stamp() {
        let case = two_bus(c(1.0, -10.0));
        let y = bus_admittance(&case);
        let expect = CMatrix::from_row_slice(2, 2, &[c(1.0, -10.0), c(-1.0, 10.0), c(-1.0, 10.0), c(1.0, -10.0)]);
        assert_eq!(y, expect);
    }

    #[test]
    fn internal_reactance_stamp() {
        let case = two_bus(c(1.0, -10.0));
        let yb = build_partitioned_ybus(&case).unwrap();
        // x' = 0.1 adds -j10 on both diagonals and +j10 off-diagonal.
        assert!((yb.y_gg[(0, 0)] - c(0.0, -10.0)).norm() < 1e-12);
        assert!((yb.y_gn[(0, 0)] - c(0.0, 10.0)).norm() < 1e-12);
        assert!((yb.y_ng[(0, 0)] - c(0.0, 10.0)).norm() < 1e-12);
        assert!((yb.y_nn[(0, 0)] - c(1.0, -20.0)).norm() < 1e-12);
        assert_eq!((yb.partition.ng(), yb.partition.nf(), yb.partition.nn()), (1, 0, 2));
    }

    #[test]
    fn isolated_gfl_bus_is_reported() {
        let mut case = two_bus(c(1.0, -10.0));
        case.buses.push(Bus { id: 7, name: None });
        case.gfls.push(crate::netmodel::GflPlant {
            bus: 7,
            p_ref: 0.1,
            q_ref: 0.0,
            pll_kp: 0.2,
            pll_ki: 10.0,
            current_lag_tau: 0.02,
            i_max: 1.0,
        });
        match build_partitioned_ybus(&case) {
            Err(Error::Singular(msg)) => assert!(msg.contains('7'), "{msg}"),
            other => panic!("expected singular Y^FF, got {other:?}"),
        }
    }

    #[test]
    fn load_admittance_cases() {
        assert_eq!(load_to_admittance(1.0, 0.5, 1.0).unwrap(), c(1.0, -0.5));
        assert_eq!(load_to_admittance(0.0, 0.0, 1.0).unwrap(), c(0.0, 0.0));
        let y = load_to_admittance(0.9, 0.3, 0.95).unwrap();
        assert!((y - c(0.9, -0.3) / 0.9025).norm() < 1e-15);
        assert!(matches!(load_to_admittance(1.0, 0.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(load_to_admittance(1.0, 0.0, -1.0), Err(Error::Domain(_))));
    }
}
