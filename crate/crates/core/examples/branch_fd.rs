//! Branch-current frequency coefficients at both terminals.

use freqdiv::branchfd::{branch_coeffs_at, Terminal};
use freqdiv::cases::wecc9_gfl;
use freqdiv::fdcore::superposition_at;
use freqdiv::netmodel::init_operating_point;

fn main() -> freqdiv::Result<()> {
    let case = wecc9_gfl();
    let op = init_operating_point(&case)?;
    let vs = superposition_at(&case, &op)?;
    for t in Terminal::BOTH {
        let c = branch_coeffs_at(&vs, &case, &op, t)?;
        println!("terminal {t}");
        for k in 0..case.branches.len() {
            if !c.is_reliable(k) {
                println!("  {:<6} (current below floor)", case.branch_label(k));
                continue;
            }
            let sg: Vec<String> = c.a_bg.row(k).iter().map(|v| format!("{v:8.4}")).collect();
            println!(
                "  {:<6} SG [{}]  GFL ph {:8.4}  am {:9.2e}  sum {:.6}",
                case.branch_label(k),
                sg.join(" "),
                c.a_bf_ph[(k, 0)],
                c.a_bf_am[(k, 0)],
                c.a_bg.row(k).sum() + c.a_bf_ph.row(k).sum()
            );
        }
    }
    Ok(())
}
