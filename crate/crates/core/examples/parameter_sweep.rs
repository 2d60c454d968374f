//! A reduced scenario sweep (two inertia scalings, two load buses) with a
//! box-statistics summary per method.

use freqdiv::cases::wecc9_gfl;
use freqdiv::dynsim::SimConfig;
use freqdiv::validate::{run_sweep, BoxStats, CompareConfig, SweepGrid, TraceLabel};

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let grid = SweepGrid {
        inertia_scale: vec![0.7, 1.4],
        pll_gain_scale: vec![1.0],
        load_buses: vec![5, 9],
        ..SweepGrid::default()
    };
    let sim = SimConfig {
        horizon: 6.0,
        ..SimConfig::default()
    };
    let res = run_sweep(&case, &grid, &sim, &CompareConfig::default())?;
    for m in [TraceLabel::TrdFd, TraceLabel::Prop, TraceLabel::Prop0] {
        if let Some(b) = BoxStats::of(&res.node_errors(m)) {
            println!(
                "{m:<7} min {:.2e}  q1 {:.2e}  med {:.2e}  q3 {:.2e}  max {:.2e} mHz",
                b.min, b.q1, b.median, b.q3, b.max
            );
        }
    }
    let path = std::env::temp_dir().join("wecc9_sweep.csv");
    res.save_csv(&path)?;
    println!("{} runs written to {}", res.runs.len(), path.display());
    Ok(())
}
