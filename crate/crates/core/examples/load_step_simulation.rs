//! A 0.1 pu load step at bus 9, simulated for 10 s. Prints a few samples of
//! the SG speeds and the GFL PLL frequency, then writes the trajectory.

use freqdiv::cases::wecc9_gfl;
use freqdiv::dynsim::{simulate, Disturbance, SimConfig};

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let cfg = SimConfig::default();
    let traj = simulate(&case, &[Disturbance::load_step(9, 0.1, 0.0, 1.0)], &cfg)?;
    let hz = case.nominal_hz * 1e3;
    println!("   t [s]   dw_sg [mHz]             pll [mHz]");
    for t in [0.5, 1.0, 1.5, 2.0, 4.0, 8.0] {
        let k = (t / cfg.dt).round() as usize;
        let sg: Vec<String> = traj.domega.iter().map(|s| format!("{:9.3}", s[k] * hz)).collect();
        println!("{t:8.2}   {}   {:9.3}", sg.join(" "), traj.pll_freq[0][k] * hz);
    }
    let path = std::env::temp_dir().join("wecc9_load_step.csv");
    traj.save_csv(&case, &path)?;
    println!("{} samples written to {}", traj.len(), path.display());
    Ok(())
}
