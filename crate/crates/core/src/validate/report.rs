use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::branchfd::{branch_superposition, Terminal, CURRENT_FLOOR};
use crate::export::{csv_writer, fmt_num, write_text};
use crate::fdcore::superposition_at;
use crate::linalg::RMatrix;
use crate::netmodel::{angle_diff, init_operating_point, NetworkCase, OperatingPoint, Phasor};
use crate::{Error, Result};

/// Factor decomposition A = Ψ_D ∘ Ψ_Am ∘ Ψ_Ph (elementwise). Columns are
/// ordered SGs, then GFL phase sources, then GFL amplitude sources:
///
/// | column        | Ψ_D  | Ψ_Am        | Ψ_Ph                |
/// |---------------|------|-------------|---------------------|
/// | SG g          | D^G  | E_g / X     | cos(δ_g − θ_X + ζ)  |
/// | GFL f, phase  | D^F  | I_f / X     | cos(θ_f − θ_X + ζ)  |
/// | GFL f, ampl.  | D^F  | 1 / (ω⁰·X)  | sin(θ_f − θ_X + ζ)  |
///
/// where X is the observed node voltage or branch current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorSet {
    pub psi_d: RMatrix,
    pub psi_am: RMatrix,
    pub psi_ph: RMatrix,
    pub a: RMatrix,
}

impl FactorSet {
    fn zeros(rows: usize, cols: usize) -> Self {
        let z = RMatrix::zeros(rows, cols);
        FactorSet {
            psi_d: z.clone(),
            psi_am: z.clone(),
            psi_ph: z.clone(),
            a: z,
        }
    }

    /// max |A − Ψ_D·Ψ_Am·Ψ_Ph| over all entries.
    pub fn product_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for k in 0..self.a.len() {
            r = r.max((self.a[k] - self.psi_d[k] * self.psi_am[k] * self.psi_ph[k]).abs());
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub label: String,
    pub gfl_p_ref: Vec<f64>,
    pub nodes: FactorSet,
    pub branches: FactorSet,
    /// Branch rows whose current is below the floor (all-zero factors).
    pub branch_unreliable: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientReport {
    pub case: String,
    pub terminal: Terminal,
    pub columns: Vec<String>,
    pub node_rows: Vec<String>,
    pub branch_rows: Vec<String>,
    pub points: Vec<PointReport>,
}

fn columns(case: &NetworkCase) -> Vec<String> {
    let mut c: Vec<String> = case.sgs.iter().map(|g| format!("omega_sg{}", case.bus_label(g.bus))).collect();
    c.extend(case.gfls.iter().map(|f| format!("omega_gfl{}", case.bus_label(f.bus))));
    c.extend(case.gfls.iter().map(|f| format!("didt_gfl{}", case.bus_label(f.bus))));
    c
}

/// Fills row `r` of `out` for an observed phasor `x` with rows `dg`, `df`.
fn fill_row(
    out: &mut FactorSet,
    r: usize,
    x: Phasor,
    dg: &[Complex64],
    df: &[Complex64],
    op: &OperatingPoint,
    nominal_omega: f64,
) {
    let (ng, nf) = (dg.len(), df.len());
    let mut put = |c: usize, d: f64, am: f64, ph: f64| {
        out.psi_d[(r, c)] = d;
        out.psi_am[(r, c)] = am;
        out.psi_ph[(r, c)] = ph;
        out.a[(r, c)] = d * am * ph;
    };
    for g in 0..ng {
        let e = op.e_g[g];
        let ang = angle_diff(e.angle, x.angle) + dg[g].arg();
        put(g, dg[g].norm(), e.magnitude / x.magnitude, ang.cos());
    }
    for f in 0..nf {
        let i = op.i_f[f];
        let ang = angle_diff(i.angle, x.angle) + df[f].arg();
        put(ng + f, df[f].norm(), i.magnitude / x.magnitude, ang.cos());
        put(ng + nf + f, df[f].norm(), 1.0 / (nominal_omega * x.magnitude), ang.sin());
    }
}

fn point_report(case: &NetworkCase, op: &OperatingPoint, label: &str, terminal: Terminal) -> Result<PointReport> {
    let vs = superposition_at(case, op)?;
    let (nn, ng, nf) = (vs.d_g.nrows(), vs.d_g.ncols(), vs.d_f.ncols());
    let w0 = case.nominal_omega();
    let cols = ng + 2 * nf;
    let mut nodes = FactorSet::zeros(nn, cols);
    for i in 0..nn {
        let dg: Vec<Complex64> = vs.d_g.row(i).iter().copied().collect();
        let df: Vec<Complex64> = vs.d_f.row(i).iter().copied().collect();
        fill_row(&mut nodes, i, op.u_n[i], &dg, &df, op, w0);
    }
    let bs = branch_superposition(&vs, case)?;
    let ts = bs.terminal(terminal);
    let currents = bs.currents_at(op, terminal);
    let nb = currents.len();
    let mut branches = FactorSet::zeros(nb, cols);
    let mut unreliable = vec![false; nb];
    for b in 0..nb {
        if !(currents[b].magnitude >= CURRENT_FLOOR) {
            unreliable[b] = true;
            continue;
        }
        let dg: Vec<Complex64> = ts.d_g.row(b).iter().copied().collect();
        let df: Vec<Complex64> = ts.d_f.row(b).iter().copied().collect();
        fill_row(&mut branches, b, currents[b], &dg, &df, op, w0);
    }
    Ok(PointReport {
        label: label.to_string(),
        gfl_p_ref: Vec::new(),
        nodes,
        branches,
        branch_unreliable: unreliable,
    })
}

/// Factor matrices for nodes and branches at two operating points of the
/// same network (for instance two GFL outputs).
pub fn coefficient_report(
    case: &NetworkCase,
    op: &OperatingPoint,
    op_alt: &OperatingPoint,
    terminal: Terminal,
) -> Result<CoefficientReport> {
    let points = vec![
        point_report(case, op, "base", terminal)?,
        point_report(case, op_alt, "alt", terminal)?,
    ];
    Ok(CoefficientReport {
        case: case.name.clone(),
        terminal,
        columns: columns(case),
        node_rows: case_rows(case),
        branch_rows: (0..case.branches.len()).map(|k| case.branch_label(k)).collect(),
        points,
    })
}

fn case_rows(case: &NetworkCase) -> Vec<String> {
    let gfl: Vec<u32> = case.gfls.iter().map(|f| f.bus).collect();
    case.buses
        .iter()
        .filter(|b| !gfl.contains(&b.id))
        .map(|b| case.bus_label(b.id))
        .collect()
}

/// Copy of `case` with the given GFL active power references.
pub fn with_gfl_output(case: &NetworkCase, p_ref: &[f64]) -> Result<NetworkCase> {
    if p_ref.len() != case.gfls.len() {
        return Err(Error::Config(format!(
            "{} GFL outputs given for {} GFLs",
            p_ref.len(),
            case.gfls.len()
        )));
    }
    let mut c = case.clone();
    for (g, p) in c.gfls.iter_mut().zip(p_ref) {
        g.p_ref = *p;
    }
    c.validate()?;
    Ok(c)
}

/// Report at the case's own GFL output and at `alt_p_ref`, each point
/// from its own power flow.
pub fn coefficient_report_for_outputs(case: &NetworkCase, alt_p_ref: &[f64], terminal: Terminal) -> Result<CoefficientReport> {
    let alt = with_gfl_output(case, alt_p_ref)?;
    let op = init_operating_point(case)?;
    let op_alt = init_operating_point(&alt)?;
    let mut r = coefficient_report(case, &op, &op_alt, terminal)?;
    r.points[0].gfl_p_ref = case.gfls.iter().map(|g| g.p_ref).collect();
    r.points[1].gfl_p_ref = alt_p_ref.to_vec();
    Ok(r)
}

impl CoefficientReport {
    pub fn max_product_residual(&self) -> f64 {
        self.points
            .iter()
            .flat_map(|p| [p.nodes.product_residual(), p.branches.product_residual()])
            .fold(0.0, f64::max)
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        write_text(path, &serde_json::to_string_pretty(self)?)
    }

    /// Long format: point, kind, row, column, psi_d, psi_am, psi_ph, a.
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["point", "kind", "row", "column", "psi_d", "psi_am", "psi_ph", "a"])?;
        for p in &self.points {
            for (kind, set, rows) in [("node", &p.nodes, &self.node_rows), ("branch", &p.branches, &self.branch_rows)] {
                for (r, row) in rows.iter().enumerate() {
                    for (c, col) in self.columns.iter().enumerate() {
                        w.write_record([
                            p.label.as_str(),
                            kind,
                            row,
                            col,
                            &fmt_num(set.psi_d[(r, c)]),
                            &fmt_num(set.psi_am[(r, c)]),
                            &fmt_num(set.psi_ph[(r, c)]),
                            &fmt_num(set.a[(r, c)]),
                        ])?;
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<coefficient csv>", e))?;
        Ok(())
    }

    /// Heat map of the node A matrices, one panel per point. Cells are
    /// shaded on a diverging scale: white at 0, red for positive and blue
    /// for negative values, saturating at the largest |entry| of each
    /// column across both points. Every cell is labelled with its value;
    /// the labels, not the colours, carry the data.
    pub fn to_svg(&self) -> String {
        let (cw, ch, left, top) = (90.0, 26.0, 60.0, 40.0);
        let nr = self.node_rows.len();
        let nc = self.columns.len();
        let panel_w = left + cw * nc as f64 + 30.0;
        let width = panel_w * self.points.len() as f64;
        let height = top + ch * nr as f64 + 20.0;
        let scale: Vec<f64> = (0..nc)
            .map(|c| {
                self.points
                    .iter()
                    .flat_map(|p| p.nodes.a.column(c).iter().map(|v| v.abs()).collect::<Vec<_>>())
                    .fold(0.0, f64::max)
            })
            .collect();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="monospace" font-size="11">"#
        );
        for (pi, p) in self.points.iter().enumerate() {
            let x0 = pi as f64 * panel_w;
            let _ = writeln!(s, r#"<text x="{}" y="16">{} ({})</text>"#, x0 + left, p.label, self.case);
            for (c, col) in self.columns.iter().enumerate() {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}">{}</text>"#,
                    x0 + left + cw * c as f64 + 4.0,
                    top - 6.0,
                    col
                );
            }
            for (r, row) in self.node_rows.iter().enumerate() {
                let y = top + ch * r as f64;
                let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x0 + 8.0, y + 17.0, row);
                for c in 0..nc {
                    let v = p.nodes.a[(r, c)];
                    let t = if scale[c] > 0.0 { (v / scale[c]).clamp(-1.0, 1.0) } else { 0.0 };
                    let fade = (255.0 * (1.0 - t.abs())).round() as u8;
                    let fill = if t >= 0.0 {
                        format!("rgb(255,{fade},{fade})")
                    } else {
                        format!("rgb({fade},{fade},255)")
                    };
                    let x = x0 + left + cw * c as f64;
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x}" y="{y}" width="{cw}" height="{ch}" fill="{fill}" stroke="gray"/><text x="{}" y="{}">{:.4}</text>"#,
                        x + 6.0,
                        y + 17.0,
                        v
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_identity_and_node_match() {
        let case = crate::cases::wecc9_gfl();
        let r = coefficient_report_for_outputs(&case, &[0.380], Terminal::Start).unwrap();
        assert!(r.max_product_residual() < 1e-12);
        let op = init_operating_point(&case).unwrap();
        let vs = superposition_at(&case, &op).unwrap();
        let c = crate::fdcore::node_freq_coeffs(&vs, &op, case.nominal_omega()).unwrap();
        let a = &r.points[0].nodes.a;
        for i in 0..a.nrows() {
            assert!((a[(i, 0)] - c.a_ng[(i, 0)]).abs() < 1e-14);
            assert!((a[(i, 2)] - c.a_nf_ph[(i, 0)]).abs() < 1e-14);
            assert!((a[(i, 3)] - c.a_nf_am[(i, 0)]).abs() < 1e-14);
        }
        assert!(r.to_svg().starts_with("<svg"));
    }

    #[test]
    fn output_count_checked() {
        assert!(with_gfl_output(&crate::cases::wecc9_gfl(), &[0.3, 0.2]).is_err());
    }
}
