use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::case::NetworkCase;
use super::phasor::Phasor;
use super::ybus::{bus_admittance, BusLocation, Partition};
use crate::linalg::{solve, CMatrix, RMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFlowOptions {
    /// Largest accepted P/Q mismatch, per unit.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerFlowOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerFlowSolution {
    /// Complex bus voltages in `case.buses` order.
    pub voltages: Vec<Complex64>,
    /// Net complex power injected into the network at each bus.
    pub injections: Vec<Complex64>,
    pub iterations: usize,
    pub max_mismatch: f64,
}

/// Phasors and frequency quantities at one instant.
///
/// Produced by [`init_operating_point`] for the steady state and by the
/// simulator for every recorded sample. Frequency deviations are per unit
/// of ω⁰; `di_f_dt` is per unit per second.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub u_n: Vec<Phasor>,
    pub u_f: Vec<Phasor>,
    pub e_g: Vec<Phasor>,
    pub i_f: Vec<Phasor>,
    pub domega_g: Vec<f64>,
    pub domega_f: Vec<f64>,
    pub di_f_dt: Vec<f64>,
}

impl OperatingPoint {
    pub fn e_g_complex(&self) -> Vec<Complex64> {
        self.e_g.iter().map(|p| p.to_complex()).collect()
    }

    pub fn i_f_complex(&self) -> Vec<Complex64> {
        self.i_f.iter().map(|p| p.to_complex()).collect()
    }

    /// Voltage of any physical bus.
    pub fn bus_voltage(&self, partition: &Partition, bus: u32) -> Option<Phasor> {
        match partition.location(bus)? {
            BusLocation::F(k) => self.u_f.get(k).copied(),
            BusLocation::N(k) => self.u_n.get(k).copied(),
        }
    }
}

/// Newton–Raphson power flow in polar coordinates from a flat start.
///
/// The slack SG bus fixes |V| and angle 0, other SG buses are PV at
/// `p_mech`/`v_set`, GFL buses inject `p_ref + j q_ref`, loads draw `p + jq`.
pub fn solve_power_flow(case: &NetworkCase, opts: &PowerFlowOptions) -> Result<PowerFlowSolution> {
    case.validate()?;
    let n = case.buses.len();
    let y = bus_admittance(case);
    let pos = |id| case.bus_position(id).expect("validated case");

    let slack_gen = case.slack_index();
    let slack = pos(case.sgs[slack_gen].bus);
    let mut is_pv = vec![false; n];
    let mut vm = vec![1.0; n];
    let mut sched = vec![Complex64::new(0.0, 0.0); n];
    for (k, g) in case.sgs.iter().enumerate() {
        let b = pos(g.bus);
        vm[b] = g.v_set;
        if k != slack_gen {
            is_pv[b] = true;
            sched[b].re += g.p_mech;
        }
    }
    for f in &case.gfls {
        sched[pos(f.bus)] += Complex64::new(f.p_ref, f.q_ref);
    }
    for l in &case.loads {
        sched[pos(l.bus)] -= Complex64::new(l.p, l.q);
    }
    let pvpq: Vec<usize> = (0..n).filter(|&b| b != slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&b| b != slack && !is_pv[b]).collect();
    let mut va = vec![0.0; n];

    let mut iterations = 0;
    let mut polished = false;
    loop {
        let v: Vec<Complex64> = (0..n).map(|b| Complex64::from_polar(vm[b], va[b])).collect();
        let current: Vec<Complex64> = (0..n).map(|i| (0..n).map(|j| y[(i, j)] * v[j]).sum()).collect();
        let s: Vec<Complex64> = (0..n).map(|i| v[i] * current[i].conj()).collect();

        let mut f = Vec::with_capacity(pvpq.len() + pq.len());
        let mut worst = (0.0f64, case.buses[slack].id);
        for &b in &pvpq {
            let m = s[b].re - sched[b].re;
            f.push(m);
            if !(m.abs() <= worst.0) {
                worst = (m.abs(), case.buses[b].id);
            }
        }
        for &b in &pq {
            let m = s[b].im - sched[b].im;
            f.push(m);
            if !(m.abs() <= worst.0) {
                worst = (m.abs(), case.buses[b].id);
            }
        }
        // One extra Newton step after convergence pushes the mismatch to
        // rounding level at negligible cost.
        let converged = worst.0 < opts.tolerance;
        if converged && (polished || worst.0 < 1e-13) {
            log::debug!("power flow converged in {iterations} iterations, mismatch {:.2e}", worst.0);
            return Ok(PowerFlowSolution {
                voltages: v,
                injections: s,
                iterations,
                max_mismatch: worst.0,
            });
        }
        let fail = || Error::NonConvergence {
            iterations,
            mismatch: worst.0,
            bus: worst.1,
        };
        if converged {
            polished = true;
        } else if iterations >= opts.max_iterations || !worst.0.is_finite() {
            return Err(fail());
        }

        // dS/dVa = j·diag(V)·conj(diag(I) − Y·diag(V)),
        // dS/dVm = diag(V)·conj(Y·diag(V/|V|)) + conj(diag(I))·diag(V/|V|)
        let vn: Vec<Complex64> = v.iter().map(|z| z / z.norm()).collect();
        let mut ds_dva = CMatrix::zeros(n, n);
        let mut ds_dvm = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut a = -y[(i, j)] * v[j];
                let mut m = v[i] * (y[(i, j)] * vn[j]).conj();
                if i == j {
                    a += current[i];
                    m += current[i].conj() * vn[i];
                }
                ds_dva[(i, j)] = Complex64::i() * v[i] * a.conj();
                ds_dvm[(i, j)] = m;
            }
        }
        let dim = pvpq.len() + pq.len();
        let mut jac = RMatrix::zeros(dim, dim);
        for (r, &i) in pvpq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[(r, c)] = ds_dva[(i, j)].re;
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[(r, pvpq.len() + c)] = ds_dvm[(i, j)].re;
            }
        }
        for (r, &i) in pq.iter().enumerate() {
            for (c, &j) in pvpq.iter().enumerate() {
                jac[(pvpq.len() + r, c)] = ds_dva[(i, j)].im;
            }
            for (c, &j) in pq.iter().enumerate() {
                jac[(pvpq.len() + r, pvpq.len() + c)] = ds_dvm[(i, j)].im;
            }
        }
        let rhs = RMatrix::from_column_slice(dim, 1, &f);
        let dx = solve(&jac, &rhs, "power-flow Jacobian").map_err(|_| fail())?;
        for (r, &b) in pvpq.iter().enumerate() {
            va[b] -= dx[r];
        }
        for (r, &b) in pq.iter().enumerate() {
            vm[b] -= dx[pvpq.len() + r];
        }
        iterations += 1;
    }
}

/// Steady state with default power-flow options.
pub fn init_operating_point(case: &NetworkCase) -> Result<OperatingPoint> {
    init_operating_point_with(case, &PowerFlowOptions::default())
}

/// Solves the power flow and back-computes E^G∠δ^G behind x′ and the GFL
/// current phasors from the terminal conditions. All frequency deviations
/// are zero.
pub fn init_operating_point_with(case: &NetworkCase, opts: &PowerFlowOptions) -> Result<OperatingPoint> {
    let pf = solve_power_flow(case, opts)?;
    let partition = Partition::from_case(case);
    let pos = |id| case.bus_position(id).expect("validated case");

    let mut load_s = vec![Complex64::new(0.0, 0.0); case.buses.len()];
    for l in &case.loads {
        load_s[pos(l.bus)] += Complex64::new(l.p, l.q);
    }

    let e_g = case
        .sgs
        .iter()
        .map(|g| {
            let b = pos(g.bus);
            let v = pf.voltages[b];
            let s_gen = pf.injections[b] + load_s[b];
            let i_t = (s_gen / v).conj();
            Phasor::from_complex(v + Complex64::new(0.0, g.internal_reactance) * i_t)
        })
        .collect();
    let i_f = case
        .gfls
        .iter()
        .map(|f| {
            let v = pf.voltages[pos(f.bus)];
            Phasor::from_complex((Complex64::new(f.p_ref, f.q_ref) / v).conj())
        })
        .collect();
    let u_n = partition
        .n_buses
        .iter()
        .map(|&b| Phasor::from_complex(pf.voltages[pos(b)]))
        .collect();
    let u_f = partition
        .f_buses
        .iter()
        .map(|&b| Phasor::from_complex(pf.voltages[pos(b)]))
        .collect();
    Ok(OperatingPoint {
        u_n,
        u_f,
        e_g,
        i_f,
        domega_g: vec![0.0; case.sgs.len()],
        domega_f: vec![0.0; case.gfls.len()],
        di_f_dt: vec![0.0; case.gfls.len()],
    })
}
