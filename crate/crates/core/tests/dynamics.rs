mod common;

use common::{gauss_solve, oracle_full_ybus, random_case_any, random_phasors, rel_err, rng, C};
use freqdiv::cases::{two_bus, wecc9_gfl};
use freqdiv::dynsim::{initial_state, network_solve, simulate, Disturbance, SimConfig};
use freqdiv::fdcore::superposition_at;
use freqdiv::netmodel::{init_operating_point, unwrap_angles, NetworkCase, Partition};
use freqdiv::validate::extract_frequency;
use freqdiv::Phasor;
use proptest::prelude::*;

fn short(horizon: f64) -> SimConfig {
    SimConfig {
        horizon,
        ..SimConfig::default()
    }
}

fn phasors(z: &[C]) -> Vec<Phasor> {
    z.iter().map(|&c| Phasor::from_complex(c)).collect()
}

/// Full-network solve with loads as admittances at `op`; returns N-bus and
/// F-bus voltages in partition order.
fn direct_voltages(case: &NetworkCase, e: &[C], i_f: &[C]) -> (Vec<C>, Vec<C>) {
    let op = init_operating_point(case).unwrap();
    let p = Partition::from_case(case);
    let nb = case.buses.len();
    let y = oracle_full_ybus(case);
    let mut a: Vec<Vec<C>> = (0..nb).map(|k| y[k][..nb].to_vec()).collect();
    for l in &case.loads {
        let k = case.bus_position(l.bus).unwrap();
        let u = op.bus_voltage(&p, l.bus).unwrap().magnitude;
        a[k][k] += C::new(l.p, -l.q) / (u * u);
    }
    let rhs: Vec<C> = (0..nb)
        .map(|k| {
            let mut r: C = (0..e.len()).map(|g| -y[k][nb + g] * e[g]).sum();
            if let Some(f) = case.gfls.iter().position(|f| f.bus == case.buses[k].id) {
                r += i_f[f];
            }
            r
        })
        .collect();
    let u = gauss_solve(a, rhs);
    let at = |b: &u32| u[case.bus_position(*b).unwrap()];
    (p.n_buses.iter().map(at).collect(), p.f_buses.iter().map(at).collect())
}

#[test]
fn network_solve_matches_direct_solve() {
    let mut cases = vec![wecc9_gfl()];
    cases.extend((0..10).map(random_case_any));
    for (s, case) in cases.iter().enumerate() {
        let op = init_operating_point(case).unwrap();
        let vs = superposition_at(case, &op).unwrap();
        let mut r = rng(s as u64);
        let e = random_phasors(&mut r, case.sgs.len());
        let i = random_phasors(&mut r, case.gfls.len());
        let sol = network_solve(&vs, &phasors(&e), &phasors(&i)).unwrap();
        let (dn, df) = direct_voltages(case, &e, &i);
        let got: Vec<C> = sol.u_n.iter().map(|p| p.to_complex()).collect();
        assert!(rel_err(&got, &dn) < 1e-10, "{}", case.name);
        let got_f: Vec<C> = sol.u_f.iter().map(|p| p.to_complex()).collect();
        assert!(rel_err(&got_f, &df) < 1e-10, "{}", case.name);
    }
}

#[test]
fn zero_gfl_current_leaves_sg_terms() {
    let case = wecc9_gfl();
    let op = init_operating_point(&case).unwrap();
    let vs = superposition_at(&case, &op).unwrap();
    let sol = network_solve(&vs, &op.e_g, &[Phasor::zero()]).unwrap();
    for i in 0..sol.u_n.len() {
        let expect: C = (0..op.e_g.len()).map(|g| vs.d_g[(i, g)] * op.e_g[g].to_complex()).sum();
        assert!((sol.u_n[i].to_complex() - expect).norm() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotating_sources_rotates_voltages(seed in 0u64..1000, phi in -3.1f64..3.1) {
        let case = wecc9_gfl();
        let op = init_operating_point(&case).unwrap();
        let vs = superposition_at(&case, &op).unwrap();
        let mut r = rng(seed);
        let e = random_phasors(&mut r, 2);
        let i = random_phasors(&mut r, 1);
        let rot = C::from_polar(1.0, phi);
        let a = network_solve(&vs, &phasors(&e), &phasors(&i)).unwrap();
        let er: Vec<C> = e.iter().map(|z| z * rot).collect();
        let ir: Vec<C> = i.iter().map(|z| z * rot).collect();
        let b = network_solve(&vs, &phasors(&er), &phasors(&ir)).unwrap();
        for (x, y) in a.u_n.iter().zip(&b.u_n) {
            prop_assert!((x.to_complex() * rot - y.to_complex()).norm() < 1e-12);
        }
    }
}

#[test]
fn initial_state_is_an_equilibrium() {
    for case in [wecc9_gfl(), two_bus(), random_case_any(4), random_case_any(6)] {
        let (_, dx) = initial_state(&case, &SimConfig::default()).unwrap();
        let worst = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst < 1e-8, "{}: {worst:e}", case.name);
    }
}

#[test]
fn undisturbed_run_stays_at_equilibrium() {
    let case = wecc9_gfl();
    let traj = simulate(&case, &[], &SimConfig::default()).unwrap();
    let dev = |s: &[Vec<f64>]| s.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(dev(&traj.domega) < 1e-9);
    assert!(dev(&traj.pll_freq) < 1e-9);
    for series in traj.u_n_ang.iter().chain(&traj.u_n_mag) {
        let first = series[0];
        assert!(series.iter().all(|v| (v - first).abs() < 1e-9));
    }
}

#[test]
fn simulation_is_bit_identical_across_runs() {
    let case = wecc9_gfl();
    let d = [Disturbance::load_step(9, 0.1, 0.0, 0.5)];
    let a = simulate(&case, &d, &short(2.0)).unwrap();
    let b = simulate(&case, &d, &short(2.0)).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    a.write_csv(&case, &mut ca).unwrap();
    b.write_csv(&case, &mut cb).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.domega, b.domega);
    assert_eq!(a.u_n_ang, b.u_n_ang);
}

#[test]
fn load_step_drives_nodes_to_a_common_frequency() {
    let case = wecc9_gfl();
    let traj = simulate(&case, &[Disturbance::load_step(9, 0.1, 0.0, 1.0)], &SimConfig::default()).unwrap();
    let last: Vec<f64> = traj
        .u_n_ang
        .iter()
        .map(|a| *extract_frequency(a, traj.dt, 0.5, case.nominal_hz).unwrap().values.last().unwrap())
        .collect();
    let mean = last.iter().sum::<f64>() / last.len() as f64;
    let spread = last.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    assert!(mean < 0.0, "extra load decelerates the system");
    assert!(spread < 0.05 * mean.abs(), "spread {spread:e} vs mean {mean:e}");
}

#[test]
fn gfl_power_step_settles_to_new_current() {
    let case = wecc9_gfl();
    let cfg = short(4.0);
    let traj = simulate(&case, &[Disturbance::gfl_power_step(10, 0.380 - 0.479, 0.5)], &cfg).unwrap();
    let k = traj.len() - 1;
    let expect = 0.380 / traj.u_f_mag[0][k];
    assert!((traj.i_f_mag[0][k] - expect).abs() < 0.01 * expect);
}

#[test]
fn stored_angles_are_unwrapped() {
    let case = wecc9_gfl();
    let traj = simulate(&case, &[Disturbance::load_step(9, 0.1, 0.0, 0.2)], &short(10.0)).unwrap();
    for a in traj.u_n_ang.iter().chain(&traj.i_f_ang) {
        assert_eq!(&unwrap_angles(a), a);
        assert!(a.windows(2).all(|w| (w[1] - w[0]).abs() < 1.0));
    }
}

#[test]
fn trajectory_csv_has_documented_header() {
    let case = two_bus();
    let traj = simulate(&case, &[], &short(0.01)).unwrap();
    let mut buf = Vec::new();
    traj.write_csv(&case, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let head = text.lines().next().unwrap();
    assert_eq!(head, "time,sg01_delta,sg01_domega,u01_mag,u01_ang,u02_mag,u02_ang");
    assert_eq!(text.lines().count(), traj.len() + 1);
}
