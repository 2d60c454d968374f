use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::VoltageSuperposition;
use crate::linalg::{real_mat_vec, RMatrix};
use crate::netmodel::{angle_diff, OperatingPoint, Phasor};
use crate::{Error, Result};

/// Node frequency coefficients:
/// Δω^N = A_ng·Δω^G + A_nf_ph·Δω^F + A_nf_am·dI^F/dt.
///
/// `a_nf_am` is in seconds: it multiplies a current rate in pu/s and
/// yields a per-unit frequency deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreqCoeffs {
    pub a_ng: RMatrix,
    pub a_nf_ph: RMatrix,
    pub a_nf_am: RMatrix,
}

/// Coefficients of one observed phasor against every source.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceCoeffs {
    pub sg: Vec<f64>,
    pub gfl_phase: Vec<f64>,
    pub gfl_amplitude: Vec<f64>,
}

/// Frequency coefficients of a phasor X = Σ Ḋ_g·E_g + Σ Ḋ_f·I_f.
///
/// Differentiating X, rotating by −θ_X and keeping the imaginary part
/// gives, per source with amplitude S and angle φ,
/// `(S/X)·D·cos(φ − θ_X + ζ)` for its angle rate and
/// `D·sin(φ − θ_X + ζ)/(ω⁰·X)` for its amplitude rate.
pub fn source_coeffs(
    target: Phasor,
    d_g: &[Complex64],
    d_f: &[Complex64],
    e_g: &[Phasor],
    i_f: &[Phasor],
    nominal_omega: f64,
) -> SourceCoeffs {
    let x = target.magnitude;
    let angle = |src: Phasor, d: Complex64| angle_diff(src.angle, target.angle) + d.arg();
    let sg = d_g
        .iter()
        .zip(e_g)
        .map(|(d, e)| e.magnitude / x * d.norm() * angle(*e, *d).cos())
        .collect();
    let gfl_phase = d_f
        .iter()
        .zip(i_f)
        .map(|(d, i)| i.magnitude / x * d.norm() * angle(*i, *d).cos())
        .collect();
    let gfl_amplitude = d_f
        .iter()
        .zip(i_f)
        .map(|(d, i)| d.norm() * angle(*i, *d).sin() / (nominal_omega * x))
        .collect();
    SourceCoeffs {
        sg,
        gfl_phase,
        gfl_amplitude,
    }
}

fn check_dims(vs: &VoltageSuperposition, op: &OperatingPoint) -> Result<()> {
    let (nn, ng, nf) = (vs.d_g.nrows(), vs.d_g.ncols(), vs.d_f.ncols());
    if op.u_n.len() != nn || op.e_g.len() != ng || op.i_f.len() != nf {
        return Err(Error::Dimension(format!(
            "superposition is {nn} nodes x ({ng} SG, {nf} GFL) but operating point has {} nodes, {} SG, {} GFL",
            op.u_n.len(),
            op.e_g.len(),
            op.i_f.len()
        )));
    }
    Ok(())
}

/// Instantaneous node frequency coefficients at `op`.
pub fn node_freq_coeffs(vs: &VoltageSuperposition, op: &OperatingPoint, nominal_omega: f64) -> Result<FreqCoeffs> {
    check_dims(vs, op)?;
    let (nn, ng, nf) = (vs.d_g.nrows(), vs.d_g.ncols(), vs.d_f.ncols());
    let mut out = FreqCoeffs {
        a_ng: RMatrix::zeros(nn, ng),
        a_nf_ph: RMatrix::zeros(nn, nf),
        a_nf_am: RMatrix::zeros(nn, nf),
    };
    for i in 0..nn {
        let u = op.u_n[i];
        if !(u.magnitude > 0.0) {
            return Err(Error::Domain(format!(
                "zero voltage at bus {}",
                vs.partition.n_buses[i]
            )));
        }
        let dg: Vec<Complex64> = vs.d_g.row(i).iter().copied().collect();
        let df: Vec<Complex64> = vs.d_f.row(i).iter().copied().collect();
        let c = source_coeffs(u, &dg, &df, &op.e_g, &op.i_f, nominal_omega);
        for g in 0..ng {
            out.a_ng[(i, g)] = c.sg[g];
        }
        for f in 0..nf {
            out.a_nf_ph[(i, f)] = c.gfl_phase[f];
            out.a_nf_am[(i, f)] = c.gfl_amplitude[f];
        }
    }
    Ok(out)
}

/// Same formulas frozen at a reference point `op0`; the result is meant to
/// be reused across a time window while the power flow drifts.
pub fn node_freq_coeffs_fixed(vs: &VoltageSuperposition, op0: &OperatingPoint, nominal_omega: f64) -> Result<FreqCoeffs> {
    node_freq_coeffs(vs, op0, nominal_omega)
}

/// Evaluates Δω^N from the source frequency quantities.
pub fn apply_fd(coeffs: &FreqCoeffs, domega_g: &[f64], domega_f: &[f64], di_f_dt: &[f64]) -> Result<Vec<f64>> {
    apply_matrices(&coeffs.a_ng, &coeffs.a_nf_ph, &coeffs.a_nf_am, domega_g, domega_f, di_f_dt)
}

pub(crate) fn apply_matrices(
    a_g: &RMatrix,
    a_ph: &RMatrix,
    a_am: &RMatrix,
    domega_g: &[f64],
    domega_f: &[f64],
    di_f_dt: &[f64],
) -> Result<Vec<f64>> {
    if a_g.ncols() != domega_g.len() || a_ph.ncols() != domega_f.len() || a_am.ncols() != di_f_dt.len() {
        return Err(Error::Dimension(format!(
            "coefficients expect ({}, {}, {}) sources, got ({}, {}, {})",
            a_g.ncols(),
            a_ph.ncols(),
            a_am.ncols(),
            domega_g.len(),
            domega_f.len(),
            di_f_dt.len()
        )));
    }
    let g = real_mat_vec(a_g, domega_g);
    let p = real_mat_vec(a_ph, domega_f);
    let a = real_mat_vec(a_am, di_f_dt);
    Ok(g.iter().zip(&p).zip(&a).map(|((x, y), z)| x + y + z).collect())
}
