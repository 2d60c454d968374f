use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimConfig;
use crate::fdcore::VoltageSuperposition;
use crate::netmodel::{BusLocation, NetworkCase, OperatingPoint, Phasor};
use crate::{Error, Result};

/// Lower bound on v_d used when converting power references to currents.
const VD_FLOOR: f64 = 0.1;

/// Dynamic states. SG angles are absolute rotor angles in rad (δ), speeds
/// are per-unit deviations; each GFL carries its PLL angle and integrator
/// and the lagged dq currents in the PLL frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub delta: Vec<f64>,
    pub domega: Vec<f64>,
    pub pll_theta: Vec<f64>,
    pub pll_int: Vec<f64>,
    pub i_d: Vec<f64>,
    pub i_q: Vec<f64>,
}

impl SimState {
    /// Flat state vector: [δ, Δω] per SG, then [θ, x, i_d, i_q] per GFL.
    pub fn pack(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.delta.len() + 4 * self.pll_theta.len());
        for g in 0..self.delta.len() {
            x.extend([self.delta[g], self.domega[g]]);
        }
        for f in 0..self.pll_theta.len() {
            x.extend([self.pll_theta[f], self.pll_int[f], self.i_d[f], self.i_q[f]]);
        }
        x
    }

    pub(crate) fn unpack(x: &[f64], ng: usize, nf: usize) -> Self {
        let sg = |k: usize| (0..ng).map(|g| x[2 * g + k]).collect();
        let gf = |k: usize| (0..nf).map(|f| x[2 * ng + 4 * f + k]).collect();
        SimState {
            delta: sg(0),
            domega: sg(1),
            pll_theta: gf(0),
            pll_int: gf(1),
            i_d: gf(2),
            i_q: gf(3),
        }
    }
}

/// Node and GFL-terminal voltages for given sources.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution {
    pub u_n: Vec<Phasor>,
    pub u_f: Vec<Phasor>,
}

/// U^N = D^G·E^G + D^F·I^F (and the GFL terminal rows).
pub fn network_solve(vs: &VoltageSuperposition, e_g: &[Phasor], i_f: &[Phasor]) -> Result<NetworkSolution> {
    if e_g.len() != vs.d_g.ncols() || i_f.len() != vs.d_f.ncols() {
        return Err(Error::Dimension(format!(
            "superposition has {} SG and {} GFL sources, got {} and {}",
            vs.d_g.ncols(),
            vs.d_f.ncols(),
            e_g.len(),
            i_f.len()
        )));
    }
    let e: Vec<Complex64> = e_g.iter().map(|p| p.to_complex()).collect();
    let i: Vec<Complex64> = i_f.iter().map(|p| p.to_complex()).collect();
    let (u_n, u_f) = vs.voltages(&e, &i);
    Ok(NetworkSolution {
        u_n: u_n.into_iter().map(Phasor::from_complex).collect(),
        u_f: u_f.into_iter().map(Phasor::from_complex).collect(),
    })
}

/// Algebraic quantities of one state evaluation.
#[derive(Debug, Clone)]
pub(crate) struct Algebraic {
    pub i_f: Vec<Complex64>,
    pub u_n: Vec<Complex64>,
    pub u_f: Vec<Complex64>,
    pub p_e: Vec<f64>,
    /// v_q/|v| per GFL.
    pub lock_error: Vec<f64>,
    /// kp·v_q + integrator, pu.
    pub pll_freq: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct Model {
    pub omega0: f64,
    pub e_mag: Vec<f64>,
    pub x_prime: Vec<f64>,
    pub inertia: Vec<f64>,
    pub damping: Vec<f64>,
    pub p_mech: Vec<f64>,
    /// N index of each SG's terminal bus.
    pub sg_terminal: Vec<usize>,
    pub kp: Vec<f64>,
    pub ki: Vec<f64>,
    pub tau: Vec<f64>,
    pub i_max: Vec<f64>,
    pub p_ref: Vec<f64>,
    pub q_ref: Vec<f64>,
    pub vs: VoltageSuperposition,
}

impl Model {
    pub fn new(case: &NetworkCase, cfg: &SimConfig, op: &OperatingPoint, vs: VoltageSuperposition) -> Result<Self> {
        let sg_terminal = case
            .sgs
            .iter()
            .map(|g| match vs.partition.location(g.bus) {
                Some(BusLocation::N(k)) => Ok(k),
                _ => Err(Error::Validation(format!("SG terminal bus {} is not an N bus", g.bus))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Model {
            omega0: case.nominal_omega(),
            e_mag: op.e_g.iter().map(|e| e.magnitude).collect(),
            x_prime: case.sgs.iter().map(|g| g.internal_reactance).collect(),
            inertia: case.sgs.iter().map(|g| g.inertia_m).collect(),
            damping: case.sgs.iter().map(|g| cfg.damping.unwrap_or(g.damping)).collect(),
            p_mech: vec![0.0; case.sgs.len()],
            sg_terminal,
            kp: case.gfls.iter().map(|f| f.pll_kp).collect(),
            ki: case.gfls.iter().map(|f| f.pll_ki).collect(),
            tau: case.gfls.iter().map(|f| f.current_lag_tau).collect(),
            i_max: case.gfls.iter().map(|f| f.i_max).collect(),
            p_ref: case.gfls.iter().map(|f| f.p_ref).collect(),
            q_ref: case.gfls.iter().map(|f| f.q_ref).collect(),
            vs,
        })
    }

    pub fn ng(&self) -> usize {
        self.e_mag.len()
    }

    pub fn nf(&self) -> usize {
        self.p_ref.len()
    }

    pub fn algebraic(&self, x: &[f64]) -> Algebraic {
        let (ng, nf) = (self.ng(), self.nf());
        let e_g: Vec<Complex64> = (0..ng).map(|g| Complex64::from_polar(self.e_mag[g], x[2 * g])).collect();
        let i_f: Vec<Complex64> = (0..nf)
            .map(|f| {
                let o = 2 * ng + 4 * f;
                Complex64::new(x[o + 2], x[o + 3]) * Complex64::from_polar(1.0, x[o])
            })
            .collect();
        let (u_n, u_f) = self.vs.voltages(&e_g, &i_f);
        let p_e = (0..ng)
            .map(|g| {
                let i_g = (e_g[g] - u_n[self.sg_terminal[g]]) / Complex64::new(0.0, self.x_prime[g]);
                (e_g[g] * i_g.conj()).re
            })
            .collect();
        let mut lock_error = Vec::with_capacity(nf);
        let mut pll_freq = Vec::with_capacity(nf);
        for f in 0..nf {
            let o = 2 * ng + 4 * f;
            let v = u_f[f] * Complex64::from_polar(1.0, -x[o]);
            lock_error.push(if v.norm() > 0.0 { v.im / v.norm() } else { 1.0 });
            pll_freq.push(self.kp[f] * v.im + x[o + 1]);
        }
        Algebraic {
            i_f,
            u_n,
            u_f,
            p_e,
            lock_error,
            pll_freq,
        }
    }

    /// Current references (d, q) in the PLL frame, limited to i_max with
    /// d-axis priority.
    pub fn current_refs(&self, f: usize, v_d: f64) -> (f64, f64) {
        let vd = v_d.max(VD_FLOOR);
        let imax = self.i_max[f];
        let id = (self.p_ref[f] / vd).clamp(-imax, imax);
        let qmax = (imax * imax - id * id).max(0.0).sqrt();
        let iq = (-self.q_ref[f] / vd).clamp(-qmax, qmax);
        (id, iq)
    }

    pub fn derivatives(&self, x: &[f64], dx: &mut [f64]) -> Algebraic {
        let alg = self.algebraic(x);
        let ng = self.ng();
        for g in 0..ng {
            let dw = x[2 * g + 1];
            dx[2 * g] = self.omega0 * dw;
            dx[2 * g + 1] = (self.p_mech[g] - alg.p_e[g] - self.damping[g] * dw) / self.inertia[g];
        }
        for f in 0..self.nf() {
            let o = 2 * ng + 4 * f;
            let v = alg.u_f[f] * Complex64::from_polar(1.0, -x[o]);
            let (id_ref, iq_ref) = self.current_refs(f, v.re);
            dx[o] = self.omega0 * alg.pll_freq[f];
            dx[o + 1] = self.ki[f] * v.im;
            dx[o + 2] = (id_ref - x[o + 2]) / self.tau[f];
            dx[o + 3] = (iq_ref - x[o + 3]) / self.tau[f];
        }
        alg
    }

    pub fn rk4_step(&self, x: &mut [f64], dt: f64, scratch: &mut Rk4Scratch) {
        let n = x.len();
        let Rk4Scratch { k1, k2, k3, k4, tmp } = scratch;
        self.derivatives(x, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k1[i];
        }
        self.derivatives(tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * dt * k2[i];
        }
        self.derivatives(tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + dt * k3[i];
        }
        self.derivatives(tmp, k4);
        for i in 0..n {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

pub(crate) struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    pub fn new(n: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}
