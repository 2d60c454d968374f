use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frequency::{error_index_over, first_index, window_lag, windowed_rate, FrequencyTrace, TraceLabel, DEFAULT_WINDOW};
use crate::branchfd::{apply_branch_fd, branch_freq_coeffs, branch_superposition, BranchSuperposition, Terminal};
use crate::dynsim::{simulate, Disturbance, SimConfig, Trajectory};
use crate::export::{csv_writer, fmt_num};
use crate::fdcore::{apply_fd, node_freq_coeffs, traditional_fd, traditional_fd_matrix};
use crate::netmodel::{BusId, NetworkCase, Phasor};
use crate::{Error, Result};

/// Comparison settings. The error window opens one differencing window
/// after the disturbance (skipping the algebraic angle jump) and spans
/// `error_span` seconds, clipped to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub window: f64,
    pub error_span: f64,
    pub terminal: Terminal,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            window: DEFAULT_WINDOW,
            error_span: 5.0,
            terminal: Terminal::Start,
        }
    }
}

impl CompareConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.window > 0.0 && self.error_span > 0.0) {
            return Err(Error::Config(format!(
                "window ({}) and error_span ({}) must be positive",
                self.window, self.error_span
            )));
        }
        Ok(())
    }
}

/// Error indices (mHz) of one node or branch. `None` marks a method that
/// does not apply (trd-FD on branches) or an unreliable branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityError {
    pub entity: String,
    pub trd_fd: Option<f64>,
    pub prop: Option<f64>,
    pub prop0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub case: String,
    pub window: f64,
    pub span_start: f64,
    pub span_end: f64,
    pub nodes: Vec<EntityError>,
    pub branches: Vec<EntityError>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

impl ErrorReport {
    fn column(rows: &[EntityError], method: TraceLabel) -> Vec<f64> {
        rows.iter()
            .filter_map(|e| match method {
                TraceLabel::TrdFd => e.trd_fd,
                TraceLabel::Prop => e.prop,
                TraceLabel::Prop0 => e.prop0,
                TraceLabel::Sim => None,
            })
            .collect()
    }

    pub fn node_median(&self, method: TraceLabel) -> Option<f64> {
        median(&mut Self::column(&self.nodes, method))
    }

    pub fn branch_median(&self, method: TraceLabel) -> Option<f64> {
        median(&mut Self::column(&self.branches, method))
    }

    /// Long-format CSV: kind, entity, method, error_mhz. imp-FD rows are
    /// present with an empty value (method out of scope).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["kind", "entity", "method", "error_mhz"])?;
        for (kind, rows) in [("node", &self.nodes), ("branch", &self.branches)] {
            for e in rows {
                for (m, v) in [("trd-fd", e.trd_fd), ("imp-fd", None), ("prop", e.prop), ("prop0", e.prop0)] {
                    w.write_record([kind, &e.entity, m, &v.map(fmt_num).unwrap_or_default()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<error report>", e))?;
        Ok(())
    }

    /// Fixed-width table with per-entity rows and a median line per block.
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.3e}")).unwrap_or_else(|| "-".into());
        let mut s = String::new();
        let _ = writeln!(
            s,
            "case {}; window {:.5} s; error window [{:.4}, {:.4}] s; values in mHz",
            self.case, self.window, self.span_start, self.span_end
        );
        let _ = writeln!(s, "{:<10} {:>10} {:>10} {:>10} {:>10}", "entity", "trd-fd", "imp-fd", "prop", "prop0");
        let line = |s: &mut String, name: &str, v: [Option<f64>; 3]| {
            let _ = writeln!(s, "{:<10} {:>10} {:>10} {:>10} {:>10}", name, cell(v[0]), "n/a", cell(v[1]), cell(v[2]));
        };
        for e in &self.nodes {
            line(&mut s, &e.entity, [e.trd_fd, e.prop, e.prop0]);
        }
        let med = [TraceLabel::TrdFd, TraceLabel::Prop, TraceLabel::Prop0].map(|m| self.node_median(m));
        line(&mut s, "median", med);
        for e in &self.branches {
            line(&mut s, &e.entity, [e.trd_fd, e.prop, e.prop0]);
        }
        let med = [TraceLabel::TrdFd, TraceLabel::Prop, TraceLabel::Prop0].map(|m| self.branch_median(m));
        line(&mut s, "median", med);
        s
    }
}

#[derive(Debug, Clone)]
pub struct NodeTraces {
    pub bus: BusId,
    pub label: String,
    pub sim: FrequencyTrace,
    pub trd_fd: FrequencyTrace,
    pub prop: FrequencyTrace,
    pub prop0: FrequencyTrace,
}

#[derive(Debug, Clone)]
pub struct BranchTraces {
    pub branch: usize,
    pub label: String,
    /// Current above the floor at every evaluated instant.
    pub reliable: bool,
    pub sim: FrequencyTrace,
    pub prop: FrequencyTrace,
    pub prop0: FrequencyTrace,
}

/// Windowed source quantities: SG and GFL frequencies (pu) and GFL
/// current-amplitude rates (pu/s), on the common grid.
#[derive(Debug, Clone)]
pub struct SourceTraces {
    pub sg: Vec<FrequencyTrace>,
    pub gfl: Vec<FrequencyTrace>,
    pub gfl_didt: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: ErrorReport,
    pub nodes: Vec<NodeTraces>,
    pub branches: Vec<BranchTraces>,
    pub sources: SourceTraces,
    /// Sample index of the first event (0 without events).
    pub onset_index: usize,
}

impl Comparison {
    /// Largest amount (pu) by which each branch's simulated frequency leaves
    /// the [min, max] envelope of all source frequencies inside the error
    /// window; zero when it stays inside.
    pub fn branch_envelope_exceedance(&self) -> Vec<f64> {
        let times = &self.nodes.first().map(|n| n.sim.times.clone()).unwrap_or_default();
        let (a, b) = (self.report.span_start - 1e-9, self.report.span_end + 1e-9);
        self.branches
            .iter()
            .map(|br| {
                let mut worst: f64 = 0.0;
                for (k, t) in times.iter().enumerate() {
                    if *t < a || *t > b {
                        continue;
                    }
                    let src = self.sources.sg.iter().chain(&self.sources.gfl).map(|s| s.values[k]);
                    let (lo, hi) = src.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
                    let v = br.sim.values[k];
                    worst = worst.max(v - hi).max(lo - v);
                }
                worst
            })
            .collect()
    }
}

fn trace(label: TraceLabel, times: &[f64], values: Vec<f64>, hz: f64) -> FrequencyTrace {
    FrequencyTrace {
        label,
        times: times.to_vec(),
        values,
        nominal_hz: hz,
    }
}

/// Simulates the scenario and compares the three methods on it.
pub fn compare_methods(
    case: &NetworkCase,
    disturbances: &[Disturbance],
    sim: &SimConfig,
    cfg: &CompareConfig,
) -> Result<(Trajectory, Comparison)> {
    let traj = simulate(case, disturbances, sim)?;
    let cmp = compare_trajectory(case, &traj, cfg)?;
    Ok((traj, cmp))
}

/// Reference frequencies are windowed differences of the simulated angles.
/// Every prediction feeds the same windowed source quantities through
///
/// - trd-FD: the reactance-only divider matrix;
/// - prop: coefficients re-evaluated at the centre of each window;
/// - prop0: coefficients frozen at the (post-event) onset sample.
pub fn compare_trajectory(case: &NetworkCase, traj: &Trajectory, cfg: &CompareConfig) -> Result<Comparison> {
    cfg.validate()?;
    let (dt, w, hz, w0) = (traj.dt, cfg.window, case.nominal_hz, traj.nominal_omega);
    let lag = window_lag(dt, w)?;
    let k0 = first_index(lag);
    let n = traj.len();
    if n <= k0 + 1 {
        return Err(Error::TooShort(format!("trajectory of {n} samples is shorter than the window")));
    }
    let times: Vec<f64> = traj.times[k0..].to_vec();
    let freq = |x: &[f64]| -> Result<Vec<f64>> { Ok(windowed_rate(x, dt, w)?.into_iter().map(|r| r / w0).collect()) };

    let sg: Vec<Vec<f64>> = traj.delta.iter().map(|d| freq(d)).collect::<Result<_>>()?;
    let gfl: Vec<Vec<f64>> = traj.i_f_ang.iter().map(|a| freq(a)).collect::<Result<_>>()?;
    let didt: Vec<Vec<f64>> = traj.i_f_mag.iter().map(|m| windowed_rate(m, dt, w)).collect::<Result<_>>()?;
    let m = times.len();
    let inputs = |j: usize| -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            sg.iter().map(|s| s[j]).collect(),
            gfl.iter().map(|s| s[j]).collect(),
            didt.iter().map(|s| s[j]).collect(),
        )
    };

    let onset = traj.events.first().map(|(k, _)| *k).unwrap_or(0);
    let t_on = traj.times[onset];
    let span_start = (t_on + w).max(times[0]);
    let span_end = (t_on + w + cfg.error_span).min(*traj.times.last().unwrap());
    if span_end <= span_start {
        return Err(Error::TooShort(format!(
            "error window [{span_start}, {span_end}] is empty; extend the horizon"
        )));
    }
    let mid = |k: usize| ((k as f64 - 0.5 * lag).round().max(0.0) as usize).min(n - 1);

    // Nodes.
    let nn = traj.partition.nn();
    let d_trd = traditional_fd_matrix(case)?;
    let fixed = node_freq_coeffs(&traj.segment_at(onset).vs, &traj.operating_point(onset), w0)?;
    let (mut p_trd, mut p_prop, mut p_prop0) = (vec![vec![0.0; m]; nn], vec![vec![0.0; m]; nn], vec![vec![0.0; m]; nn]);
    for j in 0..m {
        let k = k0 + j;
        let km = mid(k);
        let (g, f, a) = inputs(j);
        let tracking = node_freq_coeffs(&traj.segment_at(km).vs, &traj.operating_point(km), w0)?;
        let pt = traditional_fd(&d_trd, &g)?;
        let pp = apply_fd(&tracking, &g, &f, &a)?;
        let p0 = apply_fd(&fixed, &g, &f, &a)?;
        for i in 0..nn {
            p_trd[i][j] = pt[i];
            p_prop[i][j] = pp[i];
            p_prop0[i][j] = p0[i];
        }
    }
    let mut nodes = Vec::with_capacity(nn);
    let mut node_err = Vec::with_capacity(nn);
    for i in 0..nn {
        let bus = traj.partition.n_buses[i];
        let sim = trace(TraceLabel::Sim, &times, freq(&traj.u_n_ang[i])?, hz);
        let t = NodeTraces {
            bus,
            label: case.bus_label(bus),
            trd_fd: trace(TraceLabel::TrdFd, &times, std::mem::take(&mut p_trd[i]), hz),
            prop: trace(TraceLabel::Prop, &times, std::mem::take(&mut p_prop[i]), hz),
            prop0: trace(TraceLabel::Prop0, &times, std::mem::take(&mut p_prop0[i]), hz),
            sim,
        };
        let e = |p: &FrequencyTrace| error_index_over(p, &t.sim, span_start, span_end);
        node_err.push(EntityError {
            entity: t.label.clone(),
            trd_fd: Some(e(&t.trd_fd)?),
            prop: Some(e(&t.prop)?),
            prop0: Some(e(&t.prop0)?),
        });
        nodes.push(t);
    }

    // Branches.
    let nb = case.branches.len();
    let currents = traj.branch_currents(case, cfg.terminal)?;
    let mut seg_bs: Vec<BranchSuperposition> = Vec::with_capacity(traj.segments.len());
    for s in &traj.segments {
        seg_bs.push(branch_superposition(&s.vs, case)?);
    }
    let seg_index = |k: usize| traj.segments.partition_point(|s| s.start <= k).saturating_sub(1);
    let branch_coeffs = |k: usize| {
        let cur: Vec<Phasor> = currents.iter().map(|(mag, ang)| Phasor::new(mag[k], ang[k])).collect();
        branch_freq_coeffs(&seg_bs[seg_index(k)], &traj.operating_point(k), &cur, cfg.terminal, w0)
    };
    let fixed_b = branch_coeffs(onset)?;
    let mut reliable: Vec<bool> = fixed_b.unreliable.iter().map(|u| !u).collect();
    let (mut b_prop, mut b_prop0) = (vec![vec![0.0; m]; nb], vec![vec![0.0; m]; nb]);
    for j in 0..m {
        let km = mid(k0 + j);
        let (g, f, a) = inputs(j);
        let tracking = branch_coeffs(km)?;
        let pp = apply_branch_fd(&tracking, &g, &f, &a)?;
        let p0 = apply_branch_fd(&fixed_b, &g, &f, &a)?;
        for b in 0..nb {
            if tracking.unreliable[b] && times[j] >= span_start - 1e-9 && times[j] <= span_end + 1e-9 {
                reliable[b] = false;
            }
            b_prop[b][j] = pp[b];
            b_prop0[b][j] = p0[b];
        }
    }
    let mut branches = Vec::with_capacity(nb);
    let mut branch_err = Vec::with_capacity(nb);
    for b in 0..nb {
        let t = BranchTraces {
            branch: b,
            label: case.branch_label(b),
            reliable: reliable[b],
            sim: trace(TraceLabel::Sim, &times, freq(&currents[b].1)?, hz),
            prop: trace(TraceLabel::Prop, &times, std::mem::take(&mut b_prop[b]), hz),
            prop0: trace(TraceLabel::Prop0, &times, std::mem::take(&mut b_prop0[b]), hz),
        };
        let e = |p: &FrequencyTrace| error_index_over(p, &t.sim, span_start, span_end);
        branch_err.push(EntityError {
            entity: t.label.clone(),
            trd_fd: None,
            prop: if t.reliable { Some(e(&t.prop)?) } else { None },
            prop0: if t.reliable { Some(e(&t.prop0)?) } else { None },
        });
        branches.push(t);
    }

    let sources = SourceTraces {
        sg: sg.into_iter().map(|v| trace(TraceLabel::Sim, &times, v, hz)).collect(),
        gfl: gfl.into_iter().map(|v| trace(TraceLabel::Sim, &times, v, hz)).collect(),
        gfl_didt: didt,
    };
    Ok(Comparison {
        report: ErrorReport {
            case: case.name.clone(),
            window: w,
            span_start,
            span_end,
            nodes: node_err,
            branches: branch_err,
        },
        nodes,
        branches,
        sources,
        onset_index: onset,
    })
}

/// Node and branch frequency traces (mHz) of a comparison as one wide CSV.
/// Frozen-coefficient columns are written only with `include_fixed`.
pub fn write_traces_csv(cmp: &Comparison, path: impl AsRef<Path>, include_fixed: bool) -> Result<()> {
    let (node_labels, branch_labels): (&[&str], &[&str]) = if include_fixed {
        (&["sim", "trd-fd", "prop", "prop0"], &["sim", "prop", "prop0"])
    } else {
        (&["sim", "trd-fd", "prop"], &["sim", "prop"])
    };
    let mut w = csv_writer(path)?;
    let mut head = vec!["time".to_string()];
    for n in &cmp.nodes {
        for l in node_labels {
            head.push(format!("node{}_{l}", n.label));
        }
    }
    for b in &cmp.branches {
        for l in branch_labels {
            head.push(format!("branch{}_{l}", b.label));
        }
    }
    w.write_record(&head)?;
    let Some(first) = cmp.nodes.first() else {
        return Ok(());
    };
    let scale = first.sim.nominal_hz * 1e3;
    for (k, t) in first.sim.times.iter().enumerate() {
        let mut row = vec![fmt_num(*t)];
        for n in &cmp.nodes {
            for tr in [&n.sim, &n.trd_fd, &n.prop, &n.prop0].into_iter().take(node_labels.len()) {
                row.push(fmt_num(tr.values[k] * scale));
            }
        }
        for b in &cmp.branches {
            for tr in [&b.sim, &b.prop, &b.prop0].into_iter().take(branch_labels.len()) {
                row.push(fmt_num(tr.values[k] * scale));
            }
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<traces>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
