use num_complex::Complex64;

use crate::linalg::{inverse, mat_vec, CMatrix};
use crate::netmodel::{load_to_admittance, BusLocation, NetworkCase, OperatingPoint, Partition, PartitionedYbus};
use crate::{Error, Result};

/// Network equation with the GFL currents moved to the input side:
///
/// ```text
/// [I^G]   [Y_gg T_gf Y_gn] [E^G]
/// [U^F] = [T_fg Z_ff T_fn] [I^F]
/// [I^N]   [Y_ng T_nf Y_nn] [U^N]
/// ```
#[derive(Debug, Clone)]
pub struct EquivalentConnection {
    pub y_gg: CMatrix,
    pub t_gf: CMatrix,
    pub y_gn: CMatrix,
    pub t_fg: CMatrix,
    pub z_ff: CMatrix,
    pub t_fn: CMatrix,
    pub y_ng: CMatrix,
    pub t_nf: CMatrix,
    pub y_nn: CMatrix,
    pub partition: Partition,
}

impl EquivalentConnection {
    /// Evaluates (E^G, I^F, U^N) ↦ (I^G, U^F, I^N).
    pub fn apply(
        &self,
        e_g: &[Complex64],
        i_f: &[Complex64],
        u_n: &[Complex64],
    ) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let row = |a: &CMatrix, b: &CMatrix, c: &CMatrix| -> Vec<Complex64> {
            let x = mat_vec(a, e_g);
            let y = mat_vec(b, i_f);
            let z = mat_vec(c, u_n);
            x.iter().zip(&y).zip(&z).map(|((p, q), r)| p + q + r).collect()
        };
        (
            row(&self.y_gg, &self.t_gf, &self.y_gn),
            row(&self.t_fg, &self.z_ff, &self.t_fn),
            row(&self.y_ng, &self.t_nf, &self.y_nn),
        )
    }
}

/// Solves the F rows of the partitioned equation for U^F and substitutes
/// into the G and N rows.
pub fn build_equivalent_connection(ybus: &PartitionedYbus) -> Result<EquivalentConnection> {
    let z_ff = inverse(&ybus.y_ff, "Y^FF")?;
    let zf_fg = &z_ff * &ybus.y_fg;
    let zf_fn = &z_ff * &ybus.y_fn;
    Ok(EquivalentConnection {
        y_gg: &ybus.y_gg - &ybus.y_gf * &zf_fg,
        t_gf: &ybus.y_gf * &z_ff,
        y_gn: &ybus.y_gn - &ybus.y_gf * &zf_fn,
        t_fg: -zf_fg,
        t_fn: -zf_fn.clone(),
        y_ng: &ybus.y_ng - &ybus.y_nf * (&z_ff * &ybus.y_fg),
        t_nf: &ybus.y_nf * &z_ff,
        y_nn: &ybus.y_nn - &ybus.y_nf * &zf_fn,
        z_ff,
        partition: ybus.partition.clone(),
    })
}

/// Load admittances at the operating-point voltages, keyed by N index.
pub fn load_admittances(case: &NetworkCase, op: &OperatingPoint) -> Result<Vec<(usize, Complex64)>> {
    let partition = Partition::from_case(case);
    case.loads
        .iter()
        .map(|l| match partition.location(l.bus) {
            Some(BusLocation::N(k)) => {
                let u = op
                    .u_n
                    .get(k)
                    .ok_or_else(|| Error::Dimension(format!("operating point lacks voltage of bus {}", l.bus)))?;
                Ok((k, load_to_admittance(l.p, l.q, u.magnitude)?))
            }
            Some(BusLocation::F(_)) => Err(Error::Validation(format!(
                "load at bus {} is on a GFL terminal; loads must sit on N buses",
                l.bus
            ))),
            None => Err(Error::Validation(format!("load references undefined bus {}", l.bus))),
        })
        .collect()
}

/// Adds shunt admittances to the NN diagonal.
///
/// I^N in the network equation is the current injected into the network,
/// so a load drawing `Y_L U` injects `−Y_L U` and the folded row reads
/// `0 = Y_ng E + T_nf I + (Y_nn + Λ(Y_L)) U`.
pub fn fold_admittances(eq: &EquivalentConnection, shunts: &[(usize, Complex64)]) -> Result<EquivalentConnection> {
    let mut out = eq.clone();
    for &(k, y) in shunts {
        if k >= out.y_nn.nrows() {
            return Err(Error::Dimension(format!("N index {k} out of range")));
        }
        out.y_nn[(k, k)] += y;
    }
    Ok(out)
}

/// Folds every case load, as a constant admittance at `op`, into Y_nn.
pub fn fold_loads(eq: &EquivalentConnection, case: &NetworkCase, op: &OperatingPoint) -> Result<EquivalentConnection> {
    let shunts = load_admittances(case, op)?;
    fold_admittances(eq, &shunts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{build_partitioned_ybus, init_operating_point};

    #[test]
    fn no_gfl_leaves_blocks_unchanged() {
        let case = crate::cases::two_bus();
        let y = build_partitioned_ybus(&case).unwrap();
        let eq = build_equivalent_connection(&y).unwrap();
        assert_eq!(eq.y_gg, y.y_gg);
        assert_eq!(eq.y_ng, y.y_ng);
        assert_eq!(eq.y_nn, y.y_nn);
        assert_eq!(eq.z_ff.nrows(), 0);
    }

    #[test]
    fn scalar_ff_block() {
        let case = crate::cases::wecc9_gfl();
        let y = build_partitioned_ybus(&case).unwrap();
        let eq = build_equivalent_connection(&y).unwrap();
        let yff = y.y_ff[(0, 0)];
        assert!((eq.z_ff[(0, 0)] - 1.0 / yff).norm() < 1e-14);
        for k in 0..eq.t_nf.nrows() {
            assert!((eq.t_nf[(k, 0)] - y.y_nf[(k, 0)] / yff).norm() < 1e-14);
        }
    }

    #[test]
    fn folded_loads_zero_node_currents() {
        let case = crate::cases::wecc9_gfl();
        let op = init_operating_point(&case).unwrap();
        let eq = build_equivalent_connection(&build_partitioned_ybus(&case).unwrap()).unwrap();
        let folded = fold_loads(&eq, &case, &op).unwrap();
        let u: Vec<Complex64> = op.u_n.iter().map(|p| p.to_complex()).collect();
        let (_, u_f, i_n) = folded.apply(&op.e_g_complex(), &op.i_f_complex(), &u);
        assert!(i_n.iter().all(|z| z.norm() < 1e-8), "{i_n:?}");
        assert!((u_f[0] - op.u_f[0].to_complex()).norm() < 1e-8);
    }
}
