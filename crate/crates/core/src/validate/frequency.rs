use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default differencing window, s.
pub const DEFAULT_WINDOW: f64 = 1.0 / 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceLabel {
    /// Windowed difference of a simulated angle.
    Sim,
    TrdFd,
    Prop,
    Prop0,
}

impl TraceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceLabel::Sim => "sim",
            TraceLabel::TrdFd => "trd-fd",
            TraceLabel::Prop => "prop",
            TraceLabel::Prop0 => "prop0",
        }
    }
}

impl fmt::Display for TraceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// Frequency deviation series in pu on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    pub label: TraceLabel,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub nominal_hz: f64,
}

impl FrequencyTrace {
    pub fn to_mhz(&self) -> Vec<f64> {
        self.values.iter().map(|v| v * self.nominal_hz * 1e3).collect()
    }
}

/// Window length in samples, checked against the grid.
pub(crate) fn window_lag(dt: f64, window: f64) -> Result<f64> {
    if !(dt > 0.0) || !(window >= 2.0 * dt * (1.0 - 1e-12)) {
        return Err(Error::Config(format!(
            "differencing window {window} s must span at least two steps of {dt} s"
        )));
    }
    Ok(window / dt)
}

/// First sample index with a full window behind it.
pub(crate) fn first_index(lag: f64) -> usize {
    (lag - 1e-9).ceil() as usize
}

/// Value of `x` at fractional sample position `pos` (linear).
fn interp(x: &[f64], pos: f64) -> f64 {
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if frac < 1e-12 || i + 1 >= x.len() {
        x[i.min(x.len() - 1)]
    } else {
        x[i] + frac * (x[i + 1] - x[i])
    }
}

/// (x(t) − x(t − w))/w for every sample with a full window; x(t − w) is
/// linearly interpolated when w is not a multiple of dt.
pub fn windowed_rate(x: &[f64], dt: f64, window: f64) -> Result<Vec<f64>> {
    let lag = window_lag(dt, window)?;
    let k0 = first_index(lag);
    if x.len() <= k0 {
        return Err(Error::TooShort(format!(
            "{} samples cannot hold a {window} s window at dt = {dt} s",
            x.len()
        )));
    }
    Ok((k0..x.len()).map(|k| (x[k] - interp(x, k as f64 - lag)) / window).collect())
}

/// Δω(t) = [θ(t) − θ(t − w)]/(ω⁰·w) from an unwrapped angle series that
/// starts at t = 0.
pub fn extract_frequency(angle: &[f64], dt: f64, window: f64, nominal_hz: f64) -> Result<FrequencyTrace> {
    let w0 = std::f64::consts::TAU * nominal_hz;
    let lag = window_lag(dt, window)?;
    let k0 = first_index(lag);
    let values = windowed_rate(angle, dt, window)?.into_iter().map(|r| r / w0).collect();
    Ok(FrequencyTrace {
        label: TraceLabel::Sim,
        times: (k0..angle.len()).map(|k| k as f64 * dt).collect(),
        values,
        nominal_hz,
    })
}

fn check_grid(a: &FrequencyTrace, b: &FrequencyTrace) -> Result<()> {
    let same = a.times.len() == b.times.len()
        && a.times.iter().zip(&b.times).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs()));
    if !same || a.nominal_hz != b.nominal_hz {
        return Err(Error::GridMismatch(format!(
            "{} ({} samples) and {} ({} samples) are not on a common grid",
            a.label,
            a.times.len(),
            b.label,
            b.times.len()
        )));
    }
    Ok(())
}

/// (1/T)·∫|f_cal − f_ref| dt over the whole common grid, in mHz.
pub fn error_index(calc: &FrequencyTrace, reference: &FrequencyTrace) -> Result<f64> {
    check_grid(calc, reference)?;
    match (calc.times.first(), calc.times.last()) {
        (Some(&a), Some(&b)) => error_index_over(calc, reference, a, b),
        _ => Err(Error::TooShort("empty traces".into())),
    }
}

/// Error index restricted to [t_start, t_end] (trapezoidal, mHz).
pub fn error_index_over(calc: &FrequencyTrace, reference: &FrequencyTrace, t_start: f64, t_end: f64) -> Result<f64> {
    check_grid(calc, reference)?;
    let eps = 1e-9;
    let idx: Vec<usize> = (0..calc.times.len())
        .filter(|&k| calc.times[k] >= t_start - eps && calc.times[k] <= t_end + eps)
        .collect();
    if idx.len() < 2 {
        return Err(Error::TooShort(format!(
            "error window [{t_start}, {t_end}] holds {} samples",
            idx.len()
        )));
    }
    let d = |k: usize| (calc.values[k] - reference.values[k]).abs();
    let mut integral = 0.0;
    for w in idx.windows(2) {
        integral += 0.5 * (d(w[0]) + d(w[1])) * (calc.times[w[1]] - calc.times[w[0]]);
    }
    let span = calc.times[*idx.last().unwrap()] - calc.times[idx[0]];
    Ok(integral / span * calc.nominal_hz * 1e3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(values: Vec<f64>, dt: f64) -> FrequencyTrace {
        FrequencyTrace {
            label: TraceLabel::Prop,
            times: (0..values.len()).map(|k| k as f64 * dt).collect(),
            values,
            nominal_hz: 60.0,
        }
    }

    #[test]
    fn ramp_gives_constant_deviation() {
        let (dt, w0) = (5e-4, std::f64::consts::TAU * 60.0);
        let theta: Vec<f64> = (0..2000).map(|k| w0 * 0.01 * k as f64 * dt).collect();
        let f = extract_frequency(&theta, dt, DEFAULT_WINDOW, 60.0).unwrap();
        assert!(f.values.iter().all(|v| (v - 0.01).abs() < 1e-12));
        assert!((f.times[0] - DEFAULT_WINDOW).abs() < dt);
    }

    #[test]
    fn constant_angle_gives_zero() {
        let f = extract_frequency(&[0.7; 100], 1e-3, 0.01, 50.0).unwrap();
        assert!(f.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn window_must_cover_two_steps() {
        assert!(extract_frequency(&[0.0; 100], 1e-3, 1.5e-3, 60.0).is_err());
        assert!(extract_frequency(&[0.0; 3], 1e-3, 5e-3, 60.0).is_err());
    }

    #[test]
    fn constant_offset_of_one_millihertz() {
        let a = trace(vec![0.0; 50], 0.01);
        let b = trace(vec![1e-3 / 60.0; 50], 0.01);
        assert!((error_index(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(error_index(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_grids_rejected() {
        let a = trace(vec![0.0; 50], 0.01);
        let b = trace(vec![0.0; 49], 0.01);
        assert!(matches!(error_index(&a, &b), Err(Error::GridMismatch(_))));
    }
}
