//! Node frequency coefficients of the extended mapping next to the
//! traditional reactance-based divider.

use freqdiv::cases::wecc9_gfl;
use freqdiv::fdcore::{node_freq_coeffs, superposition_at, traditional_fd_matrix};
use freqdiv::netmodel::init_operating_point;

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let op = init_operating_point(&case)?;
    let vs = superposition_at(&case, &op)?;
    let c = node_freq_coeffs(&vs, &op, case.nominal_omega())?;
    let trd = traditional_fd_matrix(&case)?;

    println!("bus   A_ng (per SG)        A_nf_ph   A_nf_am [s]   trd-FD (per SG)      row sum");
    for (i, bus) in vs.partition.n_buses.iter().enumerate() {
        let ang: Vec<String> = c.a_ng.row(i).iter().map(|v| format!("{v:7.4}")).collect();
        let dtr: Vec<String> = trd.row(i).iter().map(|v| format!("{v:7.4}")).collect();
        println!(
            "{bus:>3}   {}   {:8.4}   {:10.2e}   {}   {:.6}",
            ang.join(" "),
            c.a_nf_ph[(i, 0)],
            c.a_nf_am[(i, 0)],
            dtr.join(" "),
            c.a_ng.row(i).sum() + c.a_nf_ph.row(i).sum()
        );
    }
    Ok(())
}
