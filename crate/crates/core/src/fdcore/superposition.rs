use std::collections::VecDeque;

use num_complex::Complex64;

use super::EquivalentConnection;
use crate::linalg::{mat_vec_add, solve, CMatrix};
use crate::netmodel::{BusId, BusLocation, Partition};
use crate::{Error, Result};

/// Source-to-voltage maps: U^N = D^G·E^G + D^F·I^F, and the same for the
/// GFL terminal buses (`f_g`, `f_f`).
#[derive(Debug, Clone)]
pub struct VoltageSuperposition {
    /// Ḋ^G, N^N × N^G.
    pub d_g: CMatrix,
    /// Ḋ^F, N^N × N^F.
    pub d_f: CMatrix,
    /// GFL-terminal rows for the SG sources, N^F × N^G.
    pub f_g: CMatrix,
    /// GFL-terminal rows for the GFL sources, N^F × N^F.
    pub f_f: CMatrix,
    pub partition: Partition,
}

impl VoltageSuperposition {
    /// Node and GFL-terminal voltages produced by the given sources.
    pub fn voltages(&self, e_g: &[Complex64], i_f: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut u_n = vec![Complex64::new(0.0, 0.0); self.d_g.nrows()];
        mat_vec_add(&self.d_g, e_g, &mut u_n);
        mat_vec_add(&self.d_f, i_f, &mut u_n);
        let mut u_f = vec![Complex64::new(0.0, 0.0); self.f_g.nrows()];
        mat_vec_add(&self.f_g, e_g, &mut u_f);
        mat_vec_add(&self.f_f, i_f, &mut u_f);
        (u_n, u_f)
    }

    /// Superposition rows (SG part, GFL part) of any physical bus.
    pub fn bus_rows(&self, bus: BusId) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
        let (mg, mf, r) = match self.partition.location(bus)? {
            BusLocation::N(k) => (&self.d_g, &self.d_f, k),
            BusLocation::F(k) => (&self.f_g, &self.f_f, k),
        };
        Some((mg.row(r).iter().copied().collect(), mf.row(r).iter().copied().collect()))
    }
}

/// D^G = −Y′_nn⁻¹·Y_ng and D^F = −Y′_nn⁻¹·T_nf on a load-folded connection.
pub fn voltage_superposition(eq_folded: &EquivalentConnection) -> Result<VoltageSuperposition> {
    let (ng, nf) = (eq_folded.partition.ng(), eq_folded.partition.nf());
    let nn = eq_folded.y_nn.nrows();
    let mut rhs = CMatrix::zeros(nn, ng + nf);
    rhs.view_mut((0, 0), (nn, ng)).copy_from(&eq_folded.y_ng);
    rhs.view_mut((0, ng), (nn, nf)).copy_from(&eq_folded.t_nf);
    let sol = match solve(&eq_folded.y_nn, &rhs, "Y'^NN") {
        Ok(s) => -s,
        Err(Error::Singular(_)) => return Err(islanded_error(eq_folded)),
        Err(e) => return Err(e),
    };
    let d_g = sol.columns(0, ng).into_owned();
    let d_f = sol.columns(ng, nf).into_owned();
    let f_g = &eq_folded.t_fg + &eq_folded.t_fn * &d_g;
    let f_f = &eq_folded.z_ff + &eq_folded.t_fn * &d_f;
    Ok(VoltageSuperposition {
        d_g,
        d_f,
        f_g,
        f_f,
        partition: eq_folded.partition.clone(),
    })
}

/// Names an N subnetwork that has no coupling to any source.
fn islanded_error(eq: &EquivalentConnection) -> Error {
    let nn = eq.y_nn.nrows();
    let mut seen = vec![false; nn];
    for start in 0..nn {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = queue.pop_front() {
            comp.push(i);
            for j in 0..nn {
                if !seen[j] && j != i && eq.y_nn[(i, j)].norm() > 0.0 {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let sourced = comp.iter().any(|&i| {
            eq.y_ng.row(i).iter().chain(eq.t_nf.row(i).iter()).any(|y| y.norm() > 0.0)
        });
        if !sourced {
            let ids: Vec<String> = comp.iter().map(|&i| eq.partition.n_buses[i].to_string()).collect();
            return Error::Singular(format!(
                "Y'^NN is singular; buses {} form an islanded subnetwork without sources",
                ids.join(", ")
            ));
        }
    }
    Error::Singular("Y'^NN is singular".into())
}
