//! Branch-current superposition and branch frequency coefficients.
//!
//! A π-model branch i–j carries, seen from its start terminal,
//! I = (y + y_i)·U_i − y·U_j, and from its end terminal
//! I = y·U_i − (y + y_j)·U_j. Substituting the voltage superposition of
//! both terminal buses gives per-source current coefficients, which feed
//! the same frequency formulas as node voltages.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fdcore::{apply_matrices, source_coeffs, VoltageSuperposition};
use crate::linalg::{mat_vec_add, CMatrix, RMatrix};
use crate::netmodel::{Branch, NetworkCase, OperatingPoint, Phasor};
use crate::{Error, Result};

/// Branch currents below this magnitude (pu) make division by
/// |I^B| meaningless; such rows are flagged and zeroed.
pub const CURRENT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    Start,
    End,
}

impl Terminal {
    pub const BOTH: [Terminal; 2] = [Terminal::Start, Terminal::End];
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Start => "start",
            Terminal::End => "end",
        })
    }
}

impl std::str::FromStr for Terminal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "start" => Ok(Terminal::Start),
            "end" => Ok(Terminal::End),
            _ => Err(Error::Parse(format!("terminal must be `start` or `end`, got `{s}`"))),
        }
    }
}

/// The two terminal weights (on U_i, on U_j) of a branch current.
fn terminal_weights(branch: &Branch, terminal: Terminal) -> (Complex64, Complex64) {
    let y = branch.series_admittance;
    match terminal {
        Terminal::Start => (y + branch.shunt_from, -y),
        Terminal::End => (y, -(y + branch.shunt_to)),
    }
}

pub fn branch_current_complex(branch: &Branch, u_from: Complex64, u_to: Complex64, terminal: Terminal) -> Complex64 {
    let (wi, wj) = terminal_weights(branch, terminal);
    wi * u_from + wj * u_to
}

pub fn branch_current_from_voltages(branch: &Branch, u_from: Phasor, u_to: Phasor, terminal: Terminal) -> Phasor {
    Phasor::from_complex(branch_current_complex(branch, u_from.to_complex(), u_to.to_complex(), terminal))
}

/// Current coefficients of every branch at one terminal.
#[derive(Debug, Clone)]
pub struct TerminalSuperposition {
    /// Ḋ^{B,G}, N^B × N^G.
    pub d_g: CMatrix,
    /// Ḋ^{B,F}, N^B × N^F.
    pub d_f: CMatrix,
}

impl TerminalSuperposition {
    pub fn currents(&self, e_g: &[Complex64], i_f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.d_g.nrows()];
        mat_vec_add(&self.d_g, e_g, &mut out);
        mat_vec_add(&self.d_f, i_f, &mut out);
        out
    }
}

/// Branch current superposition for both terminals, rows in case order.
#[derive(Debug, Clone)]
pub struct BranchSuperposition {
    pub start: TerminalSuperposition,
    pub end: TerminalSuperposition,
}

impl BranchSuperposition {
    pub fn terminal(&self, t: Terminal) -> &TerminalSuperposition {
        match t {
            Terminal::Start => &self.start,
            Terminal::End => &self.end,
        }
    }

    pub fn n_branches(&self) -> usize {
        self.start.d_g.nrows()
    }

    /// Branch current phasors at `op` for one terminal.
    pub fn currents_at(&self, op: &OperatingPoint, t: Terminal) -> Vec<Phasor> {
        self.terminal(t)
            .currents(&op.e_g_complex(), &op.i_f_complex())
            .into_iter()
            .map(Phasor::from_complex)
            .collect()
    }
}

pub fn branch_superposition(vs: &VoltageSuperposition, case: &NetworkCase) -> Result<BranchSuperposition> {
    let (nb, ng, nf) = (case.branches.len(), vs.d_g.ncols(), vs.d_f.ncols());
    let mut start = TerminalSuperposition {
        d_g: CMatrix::zeros(nb, ng),
        d_f: CMatrix::zeros(nb, nf),
    };
    let mut end = start.clone();
    let rows = |bus| {
        vs.bus_rows(bus).ok_or_else(|| {
            Error::Validation(format!("branch terminal bus {bus} has no voltage superposition row"))
        })
    };
    for (k, br) in case.branches.iter().enumerate() {
        let (gi, fi) = rows(br.from_bus)?;
        let (gj, fj) = rows(br.to_bus)?;
        for (t, out) in [(Terminal::Start, &mut start), (Terminal::End, &mut end)] {
            let (wi, wj) = terminal_weights(br, t);
            for g in 0..ng {
                out.d_g[(k, g)] = wi * gi[g] + wj * gj[g];
            }
            for f in 0..nf {
                out.d_f[(k, f)] = wi * fi[f] + wj * fj[f];
            }
        }
    }
    Ok(BranchSuperposition { start, end })
}

/// Branch frequency coefficients for one terminal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchFreqCoeffs {
    pub terminal: Terminal,
    pub a_bg: RMatrix,
    pub a_bf_ph: RMatrix,
    /// Seconds, as for node amplitude coefficients.
    pub a_bf_am: RMatrix,
    /// Rows whose current is below [`CURRENT_FLOOR`]; their entries are zero.
    pub unreliable: Vec<bool>,
}

impl BranchFreqCoeffs {
    pub fn is_reliable(&self, k: usize) -> bool {
        !self.unreliable[k]
    }
}

/// `currents` are the branch current phasors at `op` for this terminal
/// (see [`BranchSuperposition::currents_at`]).
pub fn branch_freq_coeffs(
    bs: &BranchSuperposition,
    op: &OperatingPoint,
    currents: &[Phasor],
    terminal: Terminal,
    nominal_omega: f64,
) -> Result<BranchFreqCoeffs> {
    let ts = bs.terminal(terminal);
    let (nb, ng, nf) = (ts.d_g.nrows(), ts.d_g.ncols(), ts.d_f.ncols());
    if currents.len() != nb || op.e_g.len() != ng || op.i_f.len() != nf {
        return Err(Error::Dimension(format!(
            "branch superposition is {nb} x ({ng}, {nf}); got {} currents, {} SG, {} GFL",
            currents.len(),
            op.e_g.len(),
            op.i_f.len()
        )));
    }
    let mut out = BranchFreqCoeffs {
        terminal,
        a_bg: RMatrix::zeros(nb, ng),
        a_bf_ph: RMatrix::zeros(nb, nf),
        a_bf_am: RMatrix::zeros(nb, nf),
        unreliable: vec![false; nb],
    };
    for k in 0..nb {
        if !(currents[k].magnitude >= CURRENT_FLOOR) {
            out.unreliable[k] = true;
            continue;
        }
        let dg: Vec<Complex64> = ts.d_g.row(k).iter().copied().collect();
        let df: Vec<Complex64> = ts.d_f.row(k).iter().copied().collect();
        let c = source_coeffs(currents[k], &dg, &df, &op.e_g, &op.i_f, nominal_omega);
        for g in 0..ng {
            out.a_bg[(k, g)] = c.sg[g];
        }
        for f in 0..nf {
            out.a_bf_ph[(k, f)] = c.gfl_phase[f];
            out.a_bf_am[(k, f)] = c.gfl_amplitude[f];
        }
    }
    Ok(out)
}

/// Convenience: superposition, currents and coefficients at `op`.
pub fn branch_coeffs_at(
    vs: &VoltageSuperposition,
    case: &NetworkCase,
    op: &OperatingPoint,
    terminal: Terminal,
) -> Result<BranchFreqCoeffs> {
    let bs = branch_superposition(vs, case)?;
    let currents = bs.currents_at(op, terminal);
    branch_freq_coeffs(&bs, op, &currents, terminal, case.nominal_omega())
}

/// Δω^B per branch; unreliable rows yield zero.
pub fn apply_branch_fd(coeffs: &BranchFreqCoeffs, domega_g: &[f64], domega_f: &[f64], di_f_dt: &[f64]) -> Result<Vec<f64>> {
    apply_matrices(&coeffs.a_bg, &coeffs.a_bf_ph, &coeffs.a_bf_am, domega_g, domega_f, di_f_dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdcore::superposition_at;
    use crate::netmodel::init_operating_point;

    fn line(y: Complex64, sf: Complex64, st: Complex64) -> Branch {
        Branch {
            from_bus: 1,
            to_bus: 2,
            series_admittance: y,
            shunt_from: sf,
            shunt_to: st,
        }
    }

    #[test]
    fn equal_voltages_no_current() {
        let br = line(Complex64::new(1.0, -10.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let u = Phasor::new(1.02, 0.3);
        assert!(branch_current_from_voltages(&br, u, u, Terminal::Start).magnitude < 1e-15);
    }

    #[test]
    fn hand_computed_current() {
        let y = Complex64::new(0.0, -10.0);
        let br = line(y, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let uj = Complex64::from_polar(1.0, -0.1);
        let got = branch_current_complex(&br, Complex64::new(1.0, 0.0), uj, Terminal::Start);
        assert!((got - y * (1.0 - uj)).norm() < 1e-14);
    }

    #[test]
    fn terminals_differ_by_shunt_currents() {
        let br = line(Complex64::new(0.5, -8.0), Complex64::new(0.0, 0.07), Complex64::new(0.0, 0.05));
        let (ui, uj) = (Complex64::from_polar(1.03, 0.1), Complex64::from_polar(0.98, -0.05));
        let s = branch_current_complex(&br, ui, uj, Terminal::Start);
        let e = branch_current_complex(&br, ui, uj, Terminal::End);
        assert!((s - e - (br.shunt_from * ui + br.shunt_to * uj)).norm() < 1e-14);
    }

    #[test]
    fn two_bus_branch_follows_its_source() {
        let case = crate::cases::two_bus();
        let op = init_operating_point(&case).unwrap();
        let vs = superposition_at(&case, &op).unwrap();
        for t in Terminal::BOTH {
            let c = branch_coeffs_at(&vs, &case, &op, t).unwrap();
            assert!((c.a_bg[(0, 0)] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn wecc9_branch_rows_sum_to_one() {
        let case = crate::cases::wecc9_gfl();
        let op = init_operating_point(&case).unwrap();
        let vs = superposition_at(&case, &op).unwrap();
        for t in Terminal::BOTH {
            let c = branch_coeffs_at(&vs, &case, &op, t).unwrap();
            for k in 0..c.a_bg.nrows() {
                if c.is_reliable(k) {
                    let s = c.a_bg.row(k).sum() + c.a_bf_ph.row(k).sum();
                    assert!((s - 1.0).abs() < 1e-8, "{t} row {k}: {s}");
                }
            }
        }
    }

    #[test]
    fn terminal_parses() {
        assert_eq!("end".parse::<Terminal>().unwrap(), Terminal::End);
        assert!("middle".parse::<Terminal>().is_err());
    }
}
