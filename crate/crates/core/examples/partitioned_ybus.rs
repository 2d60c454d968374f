//! Builds the G/F/N-partitioned admittance matrix of the shipped WECC-9
//! case and writes the full matrix magnitudes to a CSV.

use freqdiv::cases::wecc9_gfl;
use freqdiv::export::write_matrix_csv;
use freqdiv::netmodel::build_partitioned_ybus;

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let y = build_partitioned_ybus(&case)?;
    let p = &y.partition;
    println!("G (SG EMF nodes): {}", p.ng());
    println!("F (GFL buses):    {:?}", p.f_buses);
    println!("N (other buses):  {:?}", p.n_buses);

    let full = y.full();
    let labels: Vec<String> = (0..p.ng())
        .map(|g| format!("E{}", case.sgs[g].bus))
        .chain(p.f_buses.iter().chain(&p.n_buses).map(|b| b.to_string()))
        .collect();
    let mags = full.map(|c| c.norm());
    let path = std::env::temp_dir().join("wecc9_ybus_abs.csv");
    write_matrix_csv(&path, "node", &labels, &labels, &mags)?;
    println!("|Y| written to {}", path.display());
    Ok(())
}
