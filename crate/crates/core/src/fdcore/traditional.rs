use num_complex::Complex64;

use crate::linalg::{solve, RMatrix};
use crate::netmodel::{build_partitioned_ybus, NetworkCase};
use crate::Result;

use super::build_equivalent_connection;

/// Baseline divider matrix D (N^N × N^G) of Δω^N = D·Δω^G.
///
/// Built from reactances only: every branch keeps just the susceptance of
/// its series admittance (no shunts, no conductance), loads are dropped and
/// GFL buses stay as passive nodes with zero injection. Then
/// D = |−B_nn⁻¹·B_ng|, whose rows sum to one. Source amplitude ratios and
/// angles are implicitly 1 and 0, which is what separates this baseline
/// from the extended coefficients.
pub fn traditional_fd_matrix(case: &NetworkCase) -> Result<RMatrix> {
    let mut reactive = case.clone();
    reactive.loads.clear();
    for br in &mut reactive.branches {
        br.series_admittance = Complex64::new(0.0, br.series_admittance.im);
        br.shunt_from = Complex64::new(0.0, 0.0);
        br.shunt_to = Complex64::new(0.0, 0.0);
    }
    let ybus = build_partitioned_ybus(&reactive)?;
    let eq = build_equivalent_connection(&ybus)?;
    let d = solve(&eq.y_nn, &eq.y_ng, "B^NN")?;
    Ok(d.map(|z| z.norm()))
}

/// Δω^N = D·Δω^G.
pub fn traditional_fd(d: &RMatrix, domega_g: &[f64]) -> Result<Vec<f64>> {
    if d.ncols() != domega_g.len() {
        return Err(crate::Error::Dimension(format!(
            "traditional matrix has {} SG columns, got {} deviations",
            d.ncols(),
            domega_g.len()
        )));
    }
    Ok(crate::linalg::real_mat_vec(d, domega_g))
}
