#![allow(dead_code)]

use freqdiv::netmodel::{Branch, Bus, GflPlant, Load, NetworkCase, SyncGen};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected random grid with `n` buses: a random spanning tree plus a few
/// chords, inductive lines (x ≫ r), light loads, 1–3 SGs and 0–2 GFLs on
/// distinct buses. Power flow converges for these draws.
pub fn random_case(seed: u64, n: usize) -> NetworkCase {
    let mut r = rng(seed);
    let ids: Vec<u32> = (1..=n as u32).collect();
    let mut order = ids.clone();
    order.shuffle(&mut r);

    let line = |r: &mut ChaCha8Rng, a: u32, b: u32| {
        let x = r.random_range(0.03..0.12);
        let rr = x * r.random_range(0.02..0.15);
        let bsh = r.random_range(0.0..0.1);
        Branch::from_impedance(a, b, rr, x, bsh)
    };
    let mut branches = Vec::new();
    for k in 1..n {
        let parent = order[r.random_range(0..k)];
        branches.push(line(&mut r, parent, order[k]));
    }
    for _ in 0..(n / 4) {
        let a = ids[r.random_range(0..n)];
        let b = ids[r.random_range(0..n)];
        if a != b {
            branches.push(line(&mut r, a, b));
        }
    }

    let n_sg = r.random_range(1..=3.min(n - 2));
    let n_gfl = r.random_range(0..=2.min(n - n_sg - 1));
    let sg_buses = &order[..n_sg];
    let gfl_buses = &order[n_sg..n_sg + n_gfl];
    let rest = &order[n_sg + n_gfl..];

    let mut loads = Vec::new();
    for &bus in rest {
        if r.random_bool(0.5) {
            loads.push(Load {
                bus,
                p: r.random_range(0.02..0.15),
                q: r.random_range(0.0..0.05),
            });
        }
    }
    let total: f64 = loads.iter().map(|l| l.p).sum();

    let gfls: Vec<GflPlant> = gfl_buses
        .iter()
        .map(|&bus| GflPlant {
            bus,
            p_ref: r.random_range(0.05..0.2),
            q_ref: 0.0,
            pll_kp: 0.12,
            pll_ki: 2.6,
            current_lag_tau: 0.05,
            i_max: 1.6,
        })
        .collect();
    let sgs: Vec<SyncGen> = sg_buses
        .iter()
        .enumerate()
        .map(|(k, &bus)| SyncGen {
            bus,
            internal_reactance: r.random_range(0.06..0.2),
            inertia_m: r.random_range(8.0..40.0),
            damping: 2.0,
            p_mech: if k == 0 { 0.0 } else { total / (n_sg as f64 + 1.0) },
            v_set: r.random_range(1.0..1.04),
            slack: k == 0,
        })
        .collect();

    NetworkCase {
        name: format!("random{seed}"),
        base_mva: 100.0,
        nominal_hz: 60.0,
        buses: ids.iter().map(|&id| Bus { id, name: None }).collect(),
        branches,
        sgs,
        gfls,
        loads,
    }
}

/// Size drawn from 5..=30 by the seed.
pub fn random_case_any(seed: u64) -> NetworkCase {
    let n = rng(seed ^ 0x9e37_79b9).random_range(5..=30);
    random_case(seed, n)
}

pub fn random_phasors(r: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    (0..n)
        .map(|_| C::from_polar(r.random_range(0.5..1.5), r.random_range(-3.0..3.0)))
        .collect()
}

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn gauss_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        let piv = a[k][k];
        assert!(piv.norm() > 1e-14, "singular oracle system");
        for i in k + 1..n {
            let f = a[i][k] / piv;
            if f.norm() == 0.0 {
                continue;
            }
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= f * v;
            }
            let v = b[k];
            b[i] -= f * v;
        }
    }
    let mut x = vec![C::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

pub fn rel_err(a: &[C], b: &[C]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}

/// Independent assembly of the full admittance matrix over physical buses
/// (case order) followed by one EMF node per SG.
pub fn oracle_full_ybus(case: &NetworkCase) -> Vec<Vec<C>> {
    let nb = case.buses.len();
    let n = nb + case.sgs.len();
    let mut y = vec![vec![C::new(0.0, 0.0); n]; n];
    let pos = |id: u32| case.buses.iter().position(|b| b.id == id).unwrap();
    for br in &case.branches {
        let (i, j) = (pos(br.from_bus), pos(br.to_bus));
        y[i][i] += br.series_admittance + br.shunt_from;
        y[j][j] += br.series_admittance + br.shunt_to;
        y[i][j] -= br.series_admittance;
        y[j][i] -= br.series_admittance;
    }
    for (g, sg) in case.sgs.iter().enumerate() {
        let (i, e) = (pos(sg.bus), nb + g);
        let ys = C::new(0.0, -1.0 / sg.internal_reactance);
        y[i][i] += ys;
        y[e][e] += ys;
        y[i][e] -= ys;
        y[e][i] -= ys;
    }
    y
}
