//! Simulated node and branch frequencies against trd-FD and the extended
//! mapping, summarised as error indices.

use freqdiv::cases::wecc9_gfl;
use freqdiv::dynsim::{Disturbance, SimConfig};
use freqdiv::validate::{compare_methods, CompareConfig, TraceLabel};

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let (_, cmp) = compare_methods(
        &case,
        &[Disturbance::load_step(9, 0.1, 0.0, 1.0)],
        &SimConfig::default(),
        &CompareConfig::default(),
    )?;
    print!("{}", cmp.report.to_table());
    let r = &cmp.report;
    println!(
        "node medians: trd-fd {:.3e}, prop {:.3e}, prop0 {:.3e} mHz",
        r.node_median(TraceLabel::TrdFd).unwrap_or(f64::NAN),
        r.node_median(TraceLabel::Prop).unwrap_or(f64::NAN),
        r.node_median(TraceLabel::Prop0).unwrap_or(f64::NAN)
    );
    println!("largest branch envelope exceedance: {:.3e} pu", cmp.branch_envelope_exceedance().into_iter().fold(0.0, f64::max));
    Ok(())
}
