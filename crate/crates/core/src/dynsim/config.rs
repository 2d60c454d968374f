use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::netmodel::BusId;
use crate::{Error, Result};

/// Integration settings. Defaults: dt = 0.5 ms, horizon = 10 s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Fixed RK4 step, s.
    pub dt: f64,
    /// End time, s.
    pub horizon: f64,
    /// Overrides every SG's damping when set.
    pub damping: Option<f64>,
    /// Abort once any |Δω| (SG speed or PLL frequency) exceeds this, pu.
    pub divergence_limit: f64,
    /// Loss of lock once |v_q|/|v| at a GFL terminal exceeds this.
    pub lock_ratio: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 5e-4,
            horizon: 10.0,
            damping: None,
            divergence_limit: 0.1,
            lock_ratio: 0.5,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return bad(format!("horizon {} shorter than one step of {}", self.horizon, self.dt));
        }
        if let Some(d) = self.damping {
            if !(d >= 0.0) {
                return bad(format!("damping must be non-negative, got {d}"));
            }
        }
        if !(self.divergence_limit > 0.0) || !(self.lock_ratio > 0.0 && self.lock_ratio <= 1.0) {
            return bad("divergence_limit must be > 0 and lock_ratio in (0, 1]".into());
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisturbanceKind {
    /// Constant-impedance load increase at an N bus.
    LoadStep,
    /// Change of a GFL's active power reference.
    GflPowerStep,
}

impl fmt::Display for DisturbanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DisturbanceKind::LoadStep => "load-step",
            DisturbanceKind::GflPowerStep => "gfl-power-step",
        })
    }
}

impl FromStr for DisturbanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "load-step" | "load" => Ok(DisturbanceKind::LoadStep),
            "gfl-power-step" | "gfl" => Ok(DisturbanceKind::GflPowerStep),
            _ => Err(Error::Config(format!(
                "unknown disturbance kind `{s}` (expected load-step or gfl-power-step)"
            ))),
        }
    }
}

/// A step event. For a load step `dp`/`dq` are the added consumption at
/// the pre-event voltage; for a GFL step `dp` is added to `p_ref`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbance {
    pub kind: DisturbanceKind,
    pub bus: BusId,
    pub dp: f64,
    #[serde(default)]
    pub dq: f64,
    pub time: f64,
}

impl Disturbance {
    pub fn load_step(bus: BusId, dp: f64, dq: f64, time: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::LoadStep,
            bus,
            dp,
            dq,
            time,
        }
    }

    pub fn gfl_power_step(bus: BusId, dp: f64, time: f64) -> Self {
        Disturbance {
            kind: DisturbanceKind::GflPowerStep,
            bus,
            dp,
            dq: 0.0,
            time,
        }
    }
}

/// `bus:kind:mag:time`, with `mag` either `dp` or `dp/dq`.
impl FromStr for Disturbance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [bus, kind, mag, time] = parts.as_slice() else {
            return Err(Error::Config(format!("disturbance `{s}` is not bus:kind:mag:time")));
        };
        let num = |t: &str, what: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("disturbance `{s}`: bad {what} `{t}`")))
        };
        let bus = bus
            .trim()
            .parse::<BusId>()
            .map_err(|_| Error::Config(format!("disturbance `{s}`: bad bus `{bus}`")))?;
        let (dp, dq) = match mag.split_once('/') {
            Some((p, q)) => (num(p, "magnitude")?, num(q, "magnitude")?),
            None => (num(mag, "magnitude")?, 0.0),
        };
        Ok(Disturbance {
            kind: kind.trim().parse()?,
            bus,
            dp,
            dq,
            time: num(time, "time")?,
        })
    }
}

impl fmt::Display for Disturbance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.bus, self.kind, self.dp)?;
        if self.dq != 0.0 {
            write!(f, "/{}", self.dq)?;
        }
        write!(f, ":{}", self.time)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flag_form() {
        let d: Disturbance = "9:load-step:0.1:1.0".parse().unwrap();
        assert_eq!(d, Disturbance::load_step(9, 0.1, 0.0, 1.0));
        let d: Disturbance = "5:load:0.2/0.05:0.5".parse().unwrap();
        assert_eq!((d.dp, d.dq), (0.2, 0.05));
        let g: Disturbance = "10:gfl-power-step:-0.099:1".parse().unwrap();
        assert_eq!(g.kind, DisturbanceKind::GflPowerStep);
        assert_eq!(g.to_string().parse::<Disturbance>().unwrap(), g);
    }

    #[test]
    fn rejects_malformed() {
        for s in ["9:load-step:0.1", "x:load-step:0.1:1", "9:fault:0.1:1", "9:load:abc:1"] {
            assert!(s.parse::<Disturbance>().is_err(), "{s}");
        }
    }

    #[test]
    fn config_checks() {
        assert!(SimConfig::default().validate().is_ok());
        assert_eq!(SimConfig::default().steps(), 20_000);
        let c = SimConfig { dt: 0.0, ..SimConfig::default() };
        assert!(c.validate().is_err());
    }
}
