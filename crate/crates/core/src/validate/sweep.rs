use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compare::{compare_trajectory, median, CompareConfig, ErrorReport};
use super::frequency::TraceLabel;
use crate::dynsim::{simulate, Disturbance, SimConfig};
use crate::export::{csv_writer, fmt_num};
use crate::netmodel::{BusId, NetworkCase};
use crate::{Error, Result};

/// Scenario grid: the Cartesian product of SG inertia scalings, PLL gain
/// scalings and load-step buses. The default is a choice made here, not a
/// reproduction of any published condition set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub inertia_scale: Vec<f64>,
    pub pll_gain_scale: Vec<f64>,
    pub load_buses: Vec<BusId>,
    /// Load step size, pu.
    pub step: f64,
    /// Event time, s.
    pub time: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            inertia_scale: vec![0.7, 1.0, 1.4],
            pll_gain_scale: vec![0.5, 1.0, 2.0],
            load_buses: vec![5, 6, 8, 9],
            step: 0.1,
            time: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub inertia_scale: f64,
    pub pll_gain_scale: f64,
    pub load_bus: BusId,
}

impl SweepGrid {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let g: SweepGrid = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.inertia_scale.is_empty() || self.pll_gain_scale.is_empty() || self.load_buses.is_empty() {
            return Err(Error::Config("sweep grid has an empty axis".into()));
        }
        if self.inertia_scale.iter().chain(&self.pll_gain_scale).any(|s| !(*s > 0.0)) {
            return Err(Error::Config("sweep scalings must be positive".into()));
        }
        Ok(())
    }

    pub fn runs(&self) -> Vec<SweepRun> {
        let mut out = Vec::new();
        for &m in &self.inertia_scale {
            for &k in &self.pll_gain_scale {
                for &b in &self.load_buses {
                    out.push(SweepRun {
                        inertia_scale: m,
                        pll_gain_scale: k,
                        load_bus: b,
                    });
                }
            }
        }
        out
    }
}

fn scaled_case(case: &NetworkCase, run: &SweepRun) -> NetworkCase {
    let mut c = case.clone();
    for g in &mut c.sgs {
        g.inertia_m *= run.inertia_scale;
    }
    for f in &mut c.gfls {
        f.pll_kp *= run.pll_gain_scale;
        f.pll_ki *= run.pll_gain_scale;
    }
    c
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub runs: Vec<(SweepRun, ErrorReport)>,
}

/// Five-number summary used for box plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl BoxStats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < v.len() {
                v[i] + frac * (v[i + 1] - v[i])
            } else {
                v[i]
            }
        };
        Some(BoxStats {
            min: v[0],
            q1: q(0.25),
            median: median(&mut v.clone()).unwrap_or(v[0]),
            q3: q(0.75),
            max: v[v.len() - 1],
        })
    }
}

/// Runs every grid point in parallel; results keep grid order.
pub fn run_sweep(case: &NetworkCase, grid: &SweepGrid, sim: &SimConfig, cfg: &CompareConfig) -> Result<SweepResult> {
    grid.validate()?;
    let runs = grid.runs();
    info!("sweep: {} scenarios", runs.len());
    let results: Vec<Result<(SweepRun, ErrorReport)>> = runs
        .into_par_iter()
        .map(|run| {
            let c = scaled_case(case, &run);
            let traj = simulate(&c, &[Disturbance::load_step(run.load_bus, grid.step, 0.0, grid.time)], sim)?;
            let cmp = compare_trajectory(&c, &traj, cfg)?;
            Ok((run, cmp.report))
        })
        .collect();
    Ok(SweepResult {
        runs: results.into_iter().collect::<Result<_>>()?,
    })
}

impl SweepResult {
    /// All node-level indices of one method across the sweep.
    pub fn node_errors(&self, method: TraceLabel) -> Vec<f64> {
        self.runs
            .iter()
            .flat_map(|(_, r)| {
                r.nodes.iter().filter_map(move |e| match method {
                    TraceLabel::TrdFd => e.trd_fd,
                    TraceLabel::Prop => e.prop,
                    TraceLabel::Prop0 => e.prop0,
                    TraceLabel::Sim => None,
                })
            })
            .collect()
    }

    pub fn branch_errors(&self, method: TraceLabel) -> Vec<f64> {
        self.runs
            .iter()
            .flat_map(|(_, r)| {
                r.branches.iter().filter_map(move |e| match method {
                    TraceLabel::Prop => e.prop,
                    TraceLabel::Prop0 => e.prop0,
                    _ => None,
                })
            })
            .collect()
    }

    /// One row per run, entity and method (box-plot input).
    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["run", "inertia_scale", "pll_gain_scale", "load_bus", "kind", "entity", "method", "error_mhz"])?;
        for (i, (run, rep)) in self.runs.iter().enumerate() {
            let head = [
                i.to_string(),
                fmt_num(run.inertia_scale),
                fmt_num(run.pll_gain_scale),
                run.load_bus.to_string(),
            ];
            for (kind, rows) in [("node", &rep.nodes), ("branch", &rep.branches)] {
                for e in rows {
                    for (m, v) in [("trd-fd", e.trd_fd), ("prop", e.prop), ("prop0", e.prop0)] {
                        if let Some(v) = v {
                            let mut rec = head.to_vec();
                            rec.extend([kind.to_string(), e.entity.clone(), m.to_string(), fmt_num(v)]);
                            w.write_record(&rec)?;
                        }
                    }
                }
            }
        }
        w.flush().map_err(|e| Error::io("<sweep csv>", e))?;
        Ok(())
    }

    /// Five-number summaries per kind and method.
    pub fn save_box_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record(["kind", "method", "count", "min", "q1", "median", "q3", "max"])?;
        let groups = [
            ("node", TraceLabel::TrdFd, self.node_errors(TraceLabel::TrdFd)),
            ("node", TraceLabel::Prop, self.node_errors(TraceLabel::Prop)),
            ("node", TraceLabel::Prop0, self.node_errors(TraceLabel::Prop0)),
            ("branch", TraceLabel::Prop, self.branch_errors(TraceLabel::Prop)),
            ("branch", TraceLabel::Prop0, self.branch_errors(TraceLabel::Prop0)),
        ];
        for (kind, m, vals) in groups {
            if let Some(b) = BoxStats::of(&vals) {
                w.write_record([
                    kind.to_string(),
                    m.to_string(),
                    vals.len().to_string(),
                    fmt_num(b.min),
                    fmt_num(b.q1),
                    fmt_num(b.median),
                    fmt_num(b.q3),
                    fmt_num(b.max),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io("<box csv>", e))?;
        Ok(())
    }
}
