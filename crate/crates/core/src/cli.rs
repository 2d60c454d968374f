//! Commands behind the `freqdiv` binary.
//!
//! Settings come from an optional JSON config file (`--config`), then
//! command-line flags override individual fields. [`RunConfig::validate`]
//! runs before any computation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::{Deserialize, Serialize};

use crate::branchfd::{branch_coeffs_at, Terminal};
use crate::dynsim::{simulate, Disturbance, SimConfig};
use crate::export::{csv_writer, fmt_num, write_text};
use crate::fdcore::{node_freq_coeffs, superposition_at};
use crate::netmodel::{init_operating_point, load_case, NetworkCase};
use crate::validate::{
    coefficient_report_for_outputs, compare_trajectory, run_sweep, write_traces_csv, CompareConfig, SweepGrid,
    DEFAULT_WINDOW,
};
use crate::{Error, Result};

/// Largest step the CLI accepts, s.
pub const MAX_CLI_DT: f64 = 1e-3;

/// Which outputs a command writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportToggles {
    pub node_fd: bool,
    pub branch_fd: bool,
    pub compare: bool,
    pub coeff_report: bool,
}

impl Default for ReportToggles {
    fn default() -> Self {
        ReportToggles {
            node_fd: true,
            branch_fd: true,
            compare: true,
            coeff_report: false,
        }
    }
}

/// Full run description. Defaults: dt 0.5 ms, horizon 10 s, window 1/60 s,
/// error span 5 s, start terminal, output directory `out`, alternative GFL
/// output 0.380 pu for the coefficient report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<PathBuf>,
    pub out: PathBuf,
    pub dt: f64,
    pub horizon: f64,
    pub window: f64,
    pub error_span: f64,
    pub damping: Option<f64>,
    pub disturbances: Vec<Disturbance>,
    pub terminal: Terminal,
    /// Also evaluate frozen-coefficient predictions.
    pub fixed_coeffs: bool,
    pub toggles: ReportToggles,
    /// Sweep grid file (JSON) for `validate`.
    pub sweep: Option<PathBuf>,
    /// GFL outputs (one per GFL) for the second report point.
    pub alt_p_ref: Option<Vec<f64>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        RunConfig {
            case: None,
            out: PathBuf::from("out"),
            dt: sim.dt,
            horizon: sim.horizon,
            window: DEFAULT_WINDOW,
            error_span: 5.0,
            damping: None,
            disturbances: Vec::new(),
            terminal: Terminal::Start,
            fixed_coeffs: false,
            toggles: ReportToggles::default(),
            sweep: None,
            alt_p_ref: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.case.is_none() {
            return bad("no case given (use --case or `case` in the config file)".into());
        }
        if !(self.dt > 0.0 && self.dt <= MAX_CLI_DT) {
            return bad(format!("dt must lie in (0, {MAX_CLI_DT}] s, got {}", self.dt));
        }
        if !(self.horizon > self.dt && self.horizon.is_finite()) {
            return bad(format!("horizon must exceed dt, got {}", self.horizon));
        }
        if !(self.window >= 2.0 * self.dt) {
            return bad(format!("window {} s must be at least 2·dt = {} s", self.window, 2.0 * self.dt));
        }
        if !(self.error_span > 0.0) {
            return bad(format!("error_span must be positive, got {}", self.error_span));
        }
        for d in &self.disturbances {
            if !(d.time >= 0.0 && d.time < self.horizon) {
                return bad(format!("disturbance `{d}` lies outside the horizon"));
            }
        }
        Ok(())
    }

    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            dt: self.dt,
            horizon: self.horizon,
            damping: self.damping,
            ..SimConfig::default()
        }
    }

    pub fn compare_config(&self) -> CompareConfig {
        CompareConfig {
            window: self.window,
            error_span: self.error_span,
            terminal: self.terminal,
        }
    }

    fn load_case(&self) -> Result<NetworkCase> {
        load_case(self.case.as_ref().expect("validated"))
    }

    fn out_file(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(self.out.join(name))
    }
}

#[derive(Debug, Parser)]
#[command(name = "freqdiv", version, about = "Frequency-divider mappings for grids with SGs and GFL converters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Node and branch frequency coefficients at the initial operating point.
    Fd(RunArgs),
    /// Run a scenario; write the trajectory and frequency traces.
    Simulate(RunArgs),
    /// Compare trd-FD and the extended FD against the simulation.
    Validate(RunArgs),
    /// Coefficient factor report at two GFL outputs.
    Report(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Case file (JSON, schema 1).
    #[arg(long)]
    pub case: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Integration step, s (at most 1 ms).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Simulated time, s.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Frequency differencing window, s.
    #[arg(long)]
    pub window: Option<f64>,
    /// Event `bus:kind:mag:time`, kind = load-step | gfl-power-step,
    /// mag = dp or dp/dq. Repeatable.
    #[arg(long = "disturbance")]
    pub disturbances: Vec<Disturbance>,
    /// Also evaluate frozen-coefficient predictions.
    #[arg(long)]
    pub fixed_coeffs: bool,
    /// Sweep grid file for `validate`.
    #[arg(long)]
    pub sweep: Option<PathBuf>,
    /// GFL output(s) for the second report point, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alt_p_ref: Option<Vec<f64>>,
    /// Branch terminal for branch outputs: start | end.
    #[arg(long)]
    pub terminal: Option<Terminal>,
    /// Include the coefficient report in `validate`.
    #[arg(long)]
    pub coeff_report: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.case {
            c.case = Some(v.clone());
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.dt {
            c.dt = v;
        }
        if let Some(v) = self.horizon {
            c.horizon = v;
        }
        if let Some(v) = self.window {
            c.window = v;
        }
        if !self.disturbances.is_empty() {
            c.disturbances = self.disturbances.clone();
        }
        if let Some(v) = &self.sweep {
            c.sweep = Some(v.clone());
        }
        if let Some(v) = &self.alt_p_ref {
            c.alt_p_ref = Some(v.clone());
        }
        if let Some(t) = self.terminal {
            c.terminal = t;
        }
        c.fixed_coeffs |= self.fixed_coeffs;
        c.toggles.coeff_report |= self.coeff_report;
        c.validate()?;
        Ok(c)
    }
}

/// Process exit status for an error: 2 for bad input, 3 for numerical
/// failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Parse(_) | Error::Validation(_) | Error::Config(_) => 2,
        Error::Singular(_)
        | Error::NonConvergence { .. }
        | Error::Domain(_)
        | Error::Divergence { .. }
        | Error::LossOfLock { .. } => 3,
        _ => 1,
    }
}

fn source_columns(case: &NetworkCase) -> Vec<String> {
    let mut c: Vec<String> = case.sgs.iter().map(|g| format!("omega_sg{}", case.bus_label(g.bus))).collect();
    c.extend(case.gfls.iter().map(|f| format!("omega_gfl{}", case.bus_label(f.bus))));
    c.extend(case.gfls.iter().map(|f| format!("didt_gfl{}", case.bus_label(f.bus))));
    c
}

/// Writes `node_coeffs.csv` and `branch_coeffs.csv` (both terminals).
pub fn cmd_fd(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let case = cfg.load_case()?;
    let op = init_operating_point(&case)?;
    let vs = superposition_at(&case, &op)?;
    let w0 = case.nominal_omega();
    let cols = source_columns(&case);
    let mut written = Vec::new();
    if cfg.toggles.node_fd {
        let c = node_freq_coeffs(&vs, &op, w0)?;
        let path = cfg.out_file("node_coeffs.csv")?;
        let mut w = csv_writer(&path)?;
        let mut head = vec!["node".to_string()];
        head.extend(cols.iter().cloned());
        head.push("row_sum".into());
        w.write_record(&head)?;
        for (i, bus) in vs.partition.n_buses.iter().enumerate() {
            let mut row = vec![case.bus_label(*bus)];
            row.extend(c.a_ng.row(i).iter().chain(c.a_nf_ph.row(i).iter()).chain(c.a_nf_am.row(i).iter()).map(|v| fmt_num(*v)));
            row.push(fmt_num(c.a_ng.row(i).sum() + c.a_nf_ph.row(i).sum()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    if cfg.toggles.branch_fd {
        let path = cfg.out_file("branch_coeffs.csv")?;
        let mut w = csv_writer(&path)?;
        let mut head = vec!["branch".to_string(), "terminal".into(), "reliable".into()];
        head.extend(cols.iter().cloned());
        head.push("row_sum".into());
        w.write_record(&head)?;
        for t in Terminal::BOTH {
            let c = branch_coeffs_at(&vs, &case, &op, t)?;
            for k in 0..case.branches.len() {
                let mut row = vec![case.branch_label(k), t.to_string(), c.is_reliable(k).to_string()];
                row.extend(c.a_bg.row(k).iter().chain(c.a_bf_ph.row(k).iter()).chain(c.a_bf_am.row(k).iter()).map(|v| fmt_num(*v)));
                row.push(fmt_num(c.a_bg.row(k).sum() + c.a_bf_ph.row(k).sum()));
                w.write_record(&row)?;
            }
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `trajectory.csv` and `frequencies.csv`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let case = cfg.load_case()?;
    let traj = simulate(&case, &cfg.disturbances, &cfg.sim_config())?;
    let tpath = cfg.out_file("trajectory.csv")?;
    traj.save_csv(&case, &tpath)?;
    let mut cmp = compare_trajectory(&case, &traj, &cfg.compare_config())?;
    if !cfg.fixed_coeffs {
        drop_fixed(&mut cmp);
    }
    let fpath = cfg.out_file("frequencies.csv")?;
    write_traces_csv(&cmp, &fpath, cfg.fixed_coeffs)?;
    Ok(vec![tpath, fpath])
}

fn drop_fixed(cmp: &mut crate::validate::Comparison) {
    for e in cmp.report.nodes.iter_mut().chain(cmp.report.branches.iter_mut()) {
        e.prop0 = None;
    }
}

/// Writes `errors.csv`, `errors.txt`, `frequencies.csv`, optionally the
/// coefficient report and, with a sweep grid, `sweep.csv` and
/// `sweep_box.csv`.
pub fn cmd_validate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let case = cfg.load_case()?;
    let mut written = Vec::new();
    if cfg.toggles.compare {
        let traj = simulate(&case, &cfg.disturbances, &cfg.sim_config())?;
        let mut cmp = compare_trajectory(&case, &traj, &cfg.compare_config())?;
        if !cfg.fixed_coeffs {
            drop_fixed(&mut cmp);
        }
        let p = cfg.out_file("errors.csv")?;
        cmp.report.write_csv(&p)?;
        written.push(p);
        let table = cmp.report.to_table();
        info!("\n{table}");
        let p = cfg.out_file("errors.txt")?;
        write_text(&p, &table)?;
        written.push(p);
        let p = cfg.out_file("frequencies.csv")?;
        write_traces_csv(&cmp, &p, cfg.fixed_coeffs)?;
        written.push(p);
    }
    if cfg.toggles.coeff_report {
        written.extend(cmd_report(cfg)?);
    }
    if let Some(grid_path) = &cfg.sweep {
        let grid = SweepGrid::load(grid_path)?;
        let res = run_sweep(&case, &grid, &cfg.sim_config(), &cfg.compare_config())?;
        let p = cfg.out_file("sweep.csv")?;
        res.save_csv(&p)?;
        written.push(p);
        let p = cfg.out_file("sweep_box.csv")?;
        res.save_box_csv(&p)?;
        written.push(p);
    }
    Ok(written)
}

/// Writes `coeff_report.json`, `coeff_report.csv` and `coeff_report.svg`.
pub fn cmd_report(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let case = cfg.load_case()?;
    let alt = match &cfg.alt_p_ref {
        Some(v) => v.clone(),
        None => vec![0.380; case.gfls.len()],
    };
    let r = coefficient_report_for_outputs(&case, &alt, cfg.terminal)?;
    let j = cfg.out_file("coeff_report.json")?;
    r.save_json(&j)?;
    let c = cfg.out_file("coeff_report.csv")?;
    r.save_csv(&c)?;
    let s = cfg.out_file("coeff_report.svg")?;
    write_text(&s, &r.to_svg())?;
    Ok(vec![j, c, s])
}

/// Parses arguments and runs the chosen command.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    match &cli.command {
        Command::Fd(a) => cmd_fd(&a.resolve()?),
        Command::Simulate(a) => cmd_simulate(&a.resolve()?),
        Command::Validate(a) => cmd_validate(&a.resolve()?),
        Command::Report(a) => cmd_report(&a.resolve()?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_defaults() {
        let a = RunArgs {
            case: Some("c.json".into()),
            dt: Some(2.5e-4),
            disturbances: vec!["9:load-step:0.1:1".parse().unwrap()],
            ..RunArgs::default()
        };
        let c = a.resolve().unwrap();
        assert_eq!(c.dt, 2.5e-4);
        assert_eq!(c.horizon, 10.0);
        assert_eq!(c.disturbances.len(), 1);
    }

    #[test]
    fn dt_above_limit_rejected() {
        let a = RunArgs {
            case: Some("c.json".into()),
            dt: Some(5e-3),
            ..RunArgs::default()
        };
        let e = a.resolve().unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn window_must_cover_two_steps() {
        let c = RunConfig {
            case: Some("c.json".into()),
            dt: 1e-3,
            window: 1.5e-3,
            ..RunConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn missing_case_file_maps_to_two() {
        let c = RunConfig {
            case: Some("/nonexistent/case.json".into()),
            ..RunConfig::default()
        };
        assert_eq!(exit_code(&cmd_fd(&c).unwrap_err()), 2);
    }
}
