use std::collections::{HashMap, HashSet};
use std::f64::consts::TAU;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type BusId = u32;

/// Case-file schema version this crate reads and writes.
pub const CASE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// π-model branch between two physical buses.
///
/// In a case file a branch is given either by admittances
/// (`series_admittance`, `shunt_from`, `shunt_to`, each `[re, im]`) or by
/// series impedance `r`, `x` and total charging susceptance `b` split evenly
/// between the two ends. It is always written back in admittance form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BranchRecord")]
pub struct Branch {
    #[serde(rename = "from")]
    pub from_bus: BusId,
    #[serde(rename = "to")]
    pub to_bus: BusId,
    pub series_admittance: Complex64,
    pub shunt_from: Complex64,
    pub shunt_to: Complex64,
}

impl Branch {
    pub fn from_impedance(from_bus: BusId, to_bus: BusId, r: f64, x: f64, b_total: f64) -> Self {
        let half = Complex64::new(0.0, 0.5 * b_total);
        Self {
            from_bus,
            to_bus,
            series_admittance: Complex64::new(1.0, 0.0) / Complex64::new(r, x),
            shunt_from: half,
            shunt_to: half,
        }
    }
}

#[derive(Deserialize)]
struct BranchRecord {
    from: BusId,
    to: BusId,
    series_admittance: Option<Complex64>,
    shunt_from: Option<Complex64>,
    shunt_to: Option<Complex64>,
    r: Option<f64>,
    x: Option<f64>,
    b: Option<f64>,
}

impl TryFrom<BranchRecord> for Branch {
    type Error = String;

    fn try_from(rec: BranchRecord) -> std::result::Result<Self, String> {
        let zero = Complex64::new(0.0, 0.0);
        match (rec.series_admittance, rec.r, rec.x) {
            (Some(y), None, None) => {
                if rec.b.is_some() {
                    return Err(format!(
                        "branch {}-{}: `b` only applies to impedance form",
                        rec.from, rec.to
                    ));
                }
                Ok(Branch {
                    from_bus: rec.from,
                    to_bus: rec.to,
                    series_admittance: y,
                    shunt_from: rec.shunt_from.unwrap_or(zero),
                    shunt_to: rec.shunt_to.unwrap_or(zero),
                })
            }
            (None, r, Some(x)) => {
                let mut br = Branch::from_impedance(rec.from, rec.to, r.unwrap_or(0.0), x, rec.b.unwrap_or(0.0));
                br.shunt_from += rec.shunt_from.unwrap_or(zero);
                br.shunt_to += rec.shunt_to.unwrap_or(zero);
                Ok(br)
            }
            _ => Err(format!(
                "branch {}-{}: give either `series_admittance` or `x` (with optional `r`, `b`)",
                rec.from, rec.to
            )),
        }
    }
}

fn default_damping() -> f64 {
    2.0
}

/// Classical (second-order) synchronous generator.
///
/// `p_mech` is the scheduled output for PV machines; for the slack machine
/// it is replaced by the solved power-flow value. The internal EMF
/// magnitude and initial rotor angle are derived by
/// [`init_operating_point`](super::init_operating_point).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncGen {
    pub bus: BusId,
    /// x′ between the internal EMF node and the terminal bus.
    pub internal_reactance: f64,
    /// M = 2H, seconds.
    pub inertia_m: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub p_mech: f64,
    /// Terminal voltage magnitude set-point.
    pub v_set: f64,
    #[serde(default)]
    pub slack: bool,
}

fn default_i_max() -> f64 {
    1.0
}

/// Grid-following plant: PLL synchronization plus lagged current control.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GflPlant {
    pub bus: BusId,
    pub p_ref: f64,
    #[serde(default)]
    pub q_ref: f64,
    pub pll_kp: f64,
    pub pll_ki: f64,
    /// First-order current-loop time constant, seconds.
    pub current_lag_tau: f64,
    #[serde(default = "default_i_max")]
    pub i_max: f64,
}

/// Constant-power load at the power-flow stage, folded as a constant
/// admittance afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: BusId,
    pub p: f64,
    pub q: f64,
}

fn default_base_mva() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkCase {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default = "default_base_mva")]
    pub base_mva: f64,
    pub nominal_hz: f64,
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub branches: Vec<Branch>,
    pub sgs: Vec<SyncGen>,
    #[serde(default)]
    pub gfls: Vec<GflPlant>,
    #[serde(default)]
    pub loads: Vec<Load>,
}

#[derive(Serialize, Deserialize)]
struct CaseFile {
    schema: u32,
    #[serde(flatten)]
    case: NetworkCase,
}

/// Reads, parses and validates a case file.
pub fn load_case(path: impl AsRef<Path>) -> Result<NetworkCase> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    NetworkCase::from_json(&text)
}

impl NetworkCase {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        match raw.get("schema") {
            None => return Err(Error::Parse("missing mandatory `schema` field".into())),
            Some(v) if v.as_u64() != Some(CASE_SCHEMA as u64) => {
                return Err(Error::Parse(format!("unsupported schema {v}, expected {CASE_SCHEMA}")))
            }
            _ => {}
        }
        let file: CaseFile = serde_json::from_value(raw).map_err(|e| Error::Parse(e.to_string()))?;
        file.case.validate()?;
        Ok(file.case)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = CaseFile {
            schema: CASE_SCHEMA,
            case: self.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// ω⁰ in rad/s.
    pub fn nominal_omega(&self) -> f64 {
        TAU * self.nominal_hz
    }

    /// Index of the slack machine: the one flagged `slack`, else the first.
    pub fn slack_index(&self) -> usize {
        self.sgs.iter().position(|g| g.slack).unwrap_or(0)
    }

    pub fn bus_position(&self, id: BusId) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn bus_label(&self, id: BusId) -> String {
        self.buses
            .iter()
            .find(|b| b.id == id)
            .and_then(|b| b.name.clone())
            .unwrap_or_else(|| format!("{id:02}"))
    }

    pub fn branch_label(&self, k: usize) -> String {
        let br = &self.branches[k];
        format!("{}-{}", self.bus_label(br.from_bus), self.bus_label(br.to_bus))
    }

    /// Copy with every GFL plant removed; their buses become passive N buses.
    pub fn without_gfls(&self) -> Self {
        let mut c = self.clone();
        c.gfls.clear();
        c
    }

    pub fn validate(&self) -> Result<()> {
        let v = |msg: String| Err(Error::Validation(msg));
        if !(self.nominal_hz > 0.0 && self.nominal_hz.is_finite()) {
            return v(format!("nominal_hz must be positive, got {}", self.nominal_hz));
        }
        if !(self.base_mva > 0.0) {
            return v(format!("base_mva must be positive, got {}", self.base_mva));
        }
        let mut ids = HashSet::new();
        for b in &self.buses {
            if !ids.insert(b.id) {
                return v(format!("duplicate bus id {}", b.id));
            }
        }
        let check = |what: &str, id: BusId| -> Result<()> {
            if ids.contains(&id) {
                Ok(())
            } else {
                Err(Error::Validation(format!("{what} references undefined bus {id}")))
            }
        };
        if self.sgs.is_empty() {
            return v("case needs at least one synchronous generator".into());
        }
        for (k, br) in self.branches.iter().enumerate() {
            check(&format!("branch {k}"), br.from_bus)?;
            check(&format!("branch {k}"), br.to_bus)?;
            if br.from_bus == br.to_bus {
                return v(format!("branch {k} connects bus {} to itself", br.from_bus));
            }
            let finite = [br.series_admittance, br.shunt_from, br.shunt_to]
                .iter()
                .all(|z| z.re.is_finite() && z.im.is_finite());
            if !finite {
                return v(format!("branch {}-{} has non-finite admittance", br.from_bus, br.to_bus));
            }
            if br.series_admittance.norm() == 0.0 {
                return v(format!("branch {}-{} has zero series admittance", br.from_bus, br.to_bus));
            }
        }
        let mut sg_buses = HashMap::new();
        let mut slack_count = 0;
        for g in &self.sgs {
            check("synchronous generator", g.bus)?;
            if sg_buses.insert(g.bus, ()).is_some() {
                return v(format!("more than one synchronous generator at bus {}", g.bus));
            }
            if !(g.internal_reactance > 0.0) {
                return v(format!(
                    "synchronous generator at bus {} has nonpositive reactance {}",
                    g.bus, g.internal_reactance
                ));
            }
            if !(g.inertia_m > 0.0) {
                return v(format!("synchronous generator at bus {} has nonpositive inertia", g.bus));
            }
            if !(g.damping >= 0.0) {
                return v(format!("synchronous generator at bus {} has negative damping", g.bus));
            }
            if !(g.v_set > 0.0) {
                return v(format!("synchronous generator at bus {} has nonpositive v_set", g.bus));
            }
            slack_count += usize::from(g.slack);
        }
        if slack_count > 1 {
            return v("more than one synchronous generator flagged as slack".into());
        }
        let mut gfl_buses = HashSet::new();
        for f in &self.gfls {
            check("GFL plant", f.bus)?;
            if sg_buses.contains_key(&f.bus) {
                return v(format!("bus {} hosts both a synchronous generator and a GFL", f.bus));
            }
            if !gfl_buses.insert(f.bus) {
                return v(format!("more than one GFL plant at bus {}", f.bus));
            }
            if !(f.pll_ki > 0.0) || !(f.pll_kp >= 0.0) {
                return v(format!("GFL at bus {} needs pll_ki > 0 and pll_kp >= 0", f.bus));
            }
            if !(f.current_lag_tau > 0.0) {
                return v(format!("GFL at bus {} needs current_lag_tau > 0", f.bus));
            }
            if !(f.p_ref >= 0.0 && f.p_ref <= f.i_max) {
                return v(format!(
                    "GFL at bus {} needs 0 <= p_ref <= i_max (p_ref = {}, i_max = {})",
                    f.bus, f.p_ref, f.i_max
                ));
            }
        }
        for l in &self.loads {
            check("load", l.bus)?;
            if gfl_buses.contains(&l.bus) {
                return v(format!("load at bus {} sits on a GFL terminal bus", l.bus));
            }
            if !(l.p.is_finite() && l.q.is_finite()) {
                return v(format!("load at bus {} has non-finite power", l.bus));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus_json() -> String {
        r#"{
            "schema": 1,
            "nominal_hz": 60,
            "buses": [{"id": 1}, {"id": 2}],
            "branches": [{"from": 1, "to": 2, "r": 0.01, "x": 0.1}],
            "sgs": [{"bus": 1, "internal_reactance": 0.2, "inertia_m": 10, "v_set": 1.0}],
            "loads": [{"bus": 2, "p": 0.5, "q": 0.1}]
        }"#
        .to_string()
    }

    #[test]
    fn parses_impedance_branch_form() {
        let case = NetworkCase::from_json(&two_bus_json()).unwrap();
        let y = case.branches[0].series_admittance;
        let expect = Complex64::new(1.0, 0.0) / Complex64::new(0.01, 0.1);
        assert!((y - expect).norm() < 1e-15);
        assert_eq!(case.sgs[0].damping, 2.0);
        assert_eq!(case.base_mva, 100.0);
    }

    #[test]
    fn missing_schema_is_parse_error() {
        let text = two_bus_json().replace("\"schema\": 1,", "");
        assert!(matches!(NetworkCase::from_json(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn dangling_bus_is_named() {
        let text = two_bus_json().replace("\"bus\": 2, \"p\"", "\"bus\": 99, \"p\"");
        match NetworkCase::from_json(&text) {
            Err(Error::Validation(msg)) => assert!(msg.contains("99"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn nonpositive_reactance_is_named() {
        let text = two_bus_json().replace("\"internal_reactance\": 0.2", "\"internal_reactance\": -0.2");
        match NetworkCase::from_json(&text) {
            Err(Error::Validation(msg)) => assert!(msg.contains("bus 1") && msg.contains("reactance"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn load_on_gfl_bus_rejected() {
        let text = two_bus_json().replace(
            "\"loads\"",
            "\"gfls\": [{\"bus\": 2, \"p_ref\": 0.1, \"pll_kp\": 0.2, \"pll_ki\": 10, \"current_lag_tau\": 0.02}], \"loads\"",
        );
        assert!(matches!(NetworkCase::from_json(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn json_round_trip_is_bitwise() {
        let case = NetworkCase::from_json(&two_bus_json()).unwrap();
        let again = NetworkCase::from_json(&case.to_json().unwrap()).unwrap();
        assert_eq!(case, again);
        let a = case.branches[0].series_admittance;
        let b = again.branches[0].series_admittance;
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}
