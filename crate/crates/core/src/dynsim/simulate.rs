use log::{debug, info};
use num_complex::Complex64;

use super::model::{Algebraic, Model, Rk4Scratch};
use super::trajectory::{Segment, Trajectory};
use super::{Disturbance, DisturbanceKind, SimConfig, SimState};
use crate::fdcore::{
    build_equivalent_connection, fold_admittances, load_admittances, voltage_superposition, EquivalentConnection,
};
use crate::netmodel::{build_partitioned_ybus, init_operating_point, unwrap_angles, BusLocation, NetworkCase};
use crate::{Error, Result};

/// Initial-state refinement stops below this derivative norm.
const EQUILIBRIUM_TOL: f64 = 1e-8;

fn check_disturbances(case: &NetworkCase, events: &[Disturbance], cfg: &SimConfig) -> Result<()> {
    for d in events {
        if !(d.time >= 0.0 && d.time <= cfg.horizon) {
            return Err(Error::Config(format!(
                "disturbance at t = {} s lies outside [0, {}]",
                d.time, cfg.horizon
            )));
        }
        if !(d.dp.is_finite() && d.dq.is_finite()) {
            return Err(Error::Config(format!("disturbance `{d}` has a non-finite magnitude")));
        }
        let known = case.bus_position(d.bus).is_some();
        let is_gfl = case.gfls.iter().any(|f| f.bus == d.bus);
        match d.kind {
            DisturbanceKind::LoadStep if !known || is_gfl => {
                return Err(Error::Config(format!("load step at bus {}: not an N bus of the case", d.bus)))
            }
            DisturbanceKind::GflPowerStep if !is_gfl => {
                return Err(Error::Config(format!("GFL power step at bus {}: no GFL there", d.bus)))
            }
            _ => {}
        }
    }
    Ok(())
}

/// Settles PLL angles, current states and mechanical powers on the
/// network solution until every derivative vanishes.
fn equilibrate(model: &mut Model, x: &mut [f64]) -> Result<()> {
    let (ng, nf) = (model.ng(), model.nf());
    let mut dx = vec![0.0; x.len()];
    let mut resid = f64::INFINITY;
    for it in 0..50 {
        let alg = model.algebraic(x);
        model.p_mech.copy_from_slice(&alg.p_e);
        for f in 0..nf {
            let o = 2 * ng + 4 * f;
            x[o] = alg.u_f[f].arg();
            x[o + 1] = 0.0;
            let (id, iq) = model.current_refs(f, alg.u_f[f].norm());
            x[o + 2] = id;
            x[o + 3] = iq;
        }
        model.derivatives(x, &mut dx);
        resid = dx.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        debug!("equilibrium iteration {it}: max |dx/dt| = {resid:.3e}");
        if resid < 1e-14 {
            break;
        }
    }
    if resid < EQUILIBRIUM_TOL {
        Ok(())
    } else {
        Err(Error::NonConvergence {
            iterations: 50,
            mismatch: resid,
            bus: 0,
        })
    }
}

struct Recorder {
    traj: Trajectory,
    raw_u_n: Vec<Vec<f64>>,
    raw_u_f: Vec<Vec<f64>>,
    raw_i_f: Vec<Vec<f64>>,
}

impl Recorder {
    fn push(&mut self, t: f64, x: &[f64], alg: &Algebraic, ng: usize) {
        let tr = &mut self.traj;
        tr.times.push(t);
        let s = SimState::unpack(x, ng, alg.i_f.len());
        for g in 0..ng {
            tr.delta[g].push(s.delta[g]);
            tr.domega[g].push(s.domega[g]);
        }
        for f in 0..alg.i_f.len() {
            tr.pll_theta[f].push(s.pll_theta[f]);
            tr.pll_int[f].push(s.pll_int[f]);
            tr.pll_freq[f].push(alg.pll_freq[f]);
            tr.i_d[f].push(s.i_d[f]);
            tr.i_q[f].push(s.i_q[f]);
            tr.i_f_mag[f].push(alg.i_f[f].norm());
            self.raw_i_f[f].push(alg.i_f[f].arg());
            tr.u_f_mag[f].push(alg.u_f[f].norm());
            self.raw_u_f[f].push(alg.u_f[f].arg());
        }
        for (i, u) in alg.u_n.iter().enumerate() {
            tr.u_n_mag[i].push(u.norm());
            self.raw_u_n[i].push(u.arg());
        }
    }

    fn finish(mut self) -> Result<Trajectory> {
        let tr = &mut self.traj;
        tr.u_n_ang = self.raw_u_n.iter().map(|a| unwrap_angles(a)).collect();
        tr.u_f_ang = self.raw_u_f.iter().map(|a| unwrap_angles(a)).collect();
        tr.i_f_ang = self.raw_i_f.iter().map(|a| unwrap_angles(a)).collect();
        for f in 0..tr.i_f_ang.len() {
            let (w, d) = super::equivalent_frequency_from_series(&tr.i_f_ang[f], &tr.i_f_mag[f], tr.dt, tr.nominal_omega)?;
            tr.domega_f.push(w);
            tr.di_f_dt.push(d);
        }
        Ok(self.traj)
    }
}

fn check_health(model: &Model, case: &NetworkCase, cfg: &SimConfig, t: f64, x: &[f64], alg: &Algebraic) -> Result<()> {
    let ng = model.ng();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence {
            time: t,
            detail: "non-finite state".into(),
        });
    }
    for g in 0..ng {
        let dw = x[2 * g + 1];
        if dw.abs() > cfg.divergence_limit {
            return Err(Error::Divergence {
                time: t,
                detail: format!("SG at bus {} speed deviation {dw:.4} pu", case.sgs[g].bus),
            });
        }
    }
    for f in 0..model.nf() {
        let ratio = alg.lock_error[f].abs();
        if ratio > cfg.lock_ratio {
            return Err(Error::LossOfLock {
                bus: case.gfls[f].bus,
                time: t,
                ratio,
            });
        }
        if alg.pll_freq[f].abs() > cfg.divergence_limit {
            return Err(Error::Divergence {
                time: t,
                detail: format!("PLL at bus {} frequency {:.4} pu", case.gfls[f].bus, alg.pll_freq[f]),
            });
        }
    }
    Ok(())
}

struct Prepared {
    model: Model,
    x: Vec<f64>,
    eq: EquivalentConnection,
    base_loads: Vec<(usize, Complex64)>,
}

/// Power flow, network matrices and the equilibrated initial state.
fn prepare(case: &NetworkCase, cfg: &SimConfig) -> Result<Prepared> {
    let op0 = init_operating_point(case)?;
    let eq = build_equivalent_connection(&build_partitioned_ybus(case)?)?;
    let base_loads = load_admittances(case, &op0)?;
    let vs = voltage_superposition(&fold_admittances(&eq, &base_loads)?)?;
    let mut model = Model::new(case, cfg, &op0, vs)?;
    let (ng, nf) = (model.ng(), model.nf());
    let mut x = SimState {
        delta: op0.e_g.iter().map(|e| e.angle).collect(),
        domega: vec![0.0; ng],
        pll_theta: op0.u_f.iter().map(|u| u.angle).collect(),
        pll_int: vec![0.0; nf],
        i_d: vec![0.0; nf],
        i_q: vec![0.0; nf],
    }
    .pack();
    equilibrate(&mut model, &mut x)?;
    Ok(Prepared {
        model,
        x,
        eq,
        base_loads,
    })
}

/// Fixed-step RK4 simulation from the power-flow equilibrium.
///
/// Events take effect at the first grid point at or after their time.
pub fn simulate(case: &NetworkCase, disturbances: &[Disturbance], cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    check_disturbances(case, disturbances, cfg)?;
    let Prepared {
        mut model,
        mut x,
        eq,
        base_loads,
    } = prepare(case, cfg)?;
    let partition = eq.partition.clone();
    let vs = model.vs.clone();
    let (ng, nf, nn) = (model.ng(), model.nf(), partition.nn());

    let mut events: Vec<Disturbance> = disturbances.to_vec();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    let steps = cfg.steps();
    let event_index = |d: &Disturbance| ((d.time / cfg.dt) - 1e-9).ceil().max(0.0) as usize;

    let series = |n: usize| vec![Vec::with_capacity(steps + 1); n];
    let mut rec = Recorder {
        traj: Trajectory {
            nominal_omega: model.omega0,
            dt: cfg.dt,
            times: Vec::with_capacity(steps + 1),
            partition: partition.clone(),
            e_mag: model.e_mag.clone(),
            delta: series(ng),
            domega: series(ng),
            pll_theta: series(nf),
            pll_int: series(nf),
            pll_freq: series(nf),
            i_d: series(nf),
            i_q: series(nf),
            u_n_mag: series(nn),
            u_n_ang: Vec::new(),
            u_f_mag: series(nf),
            u_f_ang: Vec::new(),
            i_f_mag: series(nf),
            i_f_ang: Vec::new(),
            domega_f: Vec::new(),
            di_f_dt: Vec::new(),
            segments: vec![Segment {
                start: 0,
                vs,
                extra_shunts: Vec::new(),
            }],
            events: Vec::new(),
        },
        raw_u_n: series(nn),
        raw_u_f: series(nf),
        raw_i_f: series(nf),
    };

    let mut extra: Vec<(usize, Complex64)> = Vec::new();
    let mut next_event = 0;
    let mut scratch = Rk4Scratch::new(x.len());
    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let mut network_changed = false;
        while next_event < events.len() && event_index(&events[next_event]) <= k {
            let d = &events[next_event];
            match d.kind {
                DisturbanceKind::LoadStep => {
                    let Some(BusLocation::N(i)) = partition.location(d.bus) else {
                        unreachable!("checked up front")
                    };
                    let u = model.algebraic(&x).u_n[i].norm();
                    let y = crate::netmodel::load_to_admittance(d.dp, d.dq, u)?;
                    extra.push((i, y));
                    network_changed = true;
                }
                DisturbanceKind::GflPowerStep => {
                    let f = case.gfls.iter().position(|g| g.bus == d.bus).expect("checked up front");
                    let p = model.p_ref[f] + d.dp;
                    if !(0.0..=model.i_max[f]).contains(&p) {
                        return Err(Error::Config(format!(
                            "GFL at bus {} would get p_ref = {p}, outside [0, {}]",
                            d.bus, model.i_max[f]
                        )));
                    }
                    model.p_ref[f] = p;
                }
            }
            info!("t = {t:.4} s: applied {d}");
            rec.traj.events.push((k, d.clone()));
            next_event += 1;
        }
        if network_changed {
            let mut all = base_loads.clone();
            all.extend_from_slice(&extra);
            let vs = voltage_superposition(&fold_admittances(&eq, &all)?)?;
            model.vs = vs.clone();
            let seg = Segment {
                start: k,
                vs,
                extra_shunts: extra.clone(),
            };
            match rec.traj.segments.last_mut() {
                Some(last) if last.start == k => *last = seg,
                _ => rec.traj.segments.push(seg),
            }
        }
        let alg = model.algebraic(&x);
        check_health(&model, case, cfg, t, &x, &alg)?;
        rec.push(t, &x, &alg, ng);
        if k < steps {
            model.rk4_step(&mut x, cfg.dt, &mut scratch);
        }
    }
    rec.finish()
}

/// Initial state and its derivative after equilibration (for checks).
pub fn initial_state(case: &NetworkCase, cfg: &SimConfig) -> Result<(SimState, Vec<f64>)> {
    let prep = prepare(case, cfg)?;
    let mut dx = vec![0.0; prep.x.len()];
    prep.model.derivatives(&prep.x, &mut dx);
    Ok((SimState::unpack(&prep.x, prep.model.ng(), prep.model.nf()), dx))
}
