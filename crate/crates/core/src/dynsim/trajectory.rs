use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use super::{Disturbance, SimState};
use crate::branchfd::{branch_current_complex, Terminal};
use crate::export::fmt_num;
use crate::fdcore::VoltageSuperposition;
use crate::netmodel::{unwrap_angles, BusId, BusLocation, NetworkCase, OperatingPoint, Partition, Phasor};
use crate::{Error, Result};

/// One network configuration, valid from sample `start` on.
#[derive(Debug, Clone)]
pub struct Segment {
    pub start: usize,
    pub vs: VoltageSuperposition,
    /// Admittances added to Y_nn by load steps so far, keyed by N index.
    pub extra_shunts: Vec<(usize, Complex64)>,
}

/// Recorded simulation. Every series is indexed `[entity][sample]`; angles
/// are unwrapped. Samples at an event instant are post-event.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub nominal_omega: f64,
    pub dt: f64,
    pub times: Vec<f64>,
    pub partition: Partition,
    pub e_mag: Vec<f64>,
    pub delta: Vec<Vec<f64>>,
    pub domega: Vec<Vec<f64>>,
    pub pll_theta: Vec<Vec<f64>>,
    pub pll_int: Vec<Vec<f64>>,
    /// PLL frequency proxy kp·v_q + integrator, pu.
    pub pll_freq: Vec<Vec<f64>>,
    pub i_d: Vec<Vec<f64>>,
    pub i_q: Vec<Vec<f64>>,
    pub u_n_mag: Vec<Vec<f64>>,
    pub u_n_ang: Vec<Vec<f64>>,
    pub u_f_mag: Vec<Vec<f64>>,
    pub u_f_ang: Vec<Vec<f64>>,
    pub i_f_mag: Vec<Vec<f64>>,
    pub i_f_ang: Vec<Vec<f64>>,
    /// Δω^F = dθ^{F,I}/dt / ω⁰, by central differences.
    pub domega_f: Vec<Vec<f64>>,
    /// dI^F/dt in pu/s, by central differences.
    pub di_f_dt: Vec<Vec<f64>>,
    pub segments: Vec<Segment>,
    /// Applied events with the sample index at which they took effect.
    pub events: Vec<(usize, Disturbance)>,
}

/// Central differences, one-sided at both ends.
pub fn central_difference(x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 3 {
        return Err(Error::TooShort(format!("{n} samples, need at least 3 to differentiate")));
    }
    let mut d = Vec::with_capacity(n);
    d.push((x[1] - x[0]) / dt);
    for k in 1..n - 1 {
        d.push((x[k + 1] - x[k - 1]) / (2.0 * dt));
    }
    d.push((x[n - 1] - x[n - 2]) / dt);
    Ok(d)
}

/// (Δω^F, dI^F/dt) from an injected-current angle (rad, any wrapping) and
/// magnitude series on a uniform grid.
pub fn equivalent_frequency_from_series(
    angle: &[f64],
    magnitude: &[f64],
    dt: f64,
    nominal_omega: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if angle.len() != magnitude.len() {
        return Err(Error::GridMismatch(format!(
            "angle has {} samples, magnitude {}",
            angle.len(),
            magnitude.len()
        )));
    }
    let w = central_difference(&unwrap_angles(angle), dt)?
        .into_iter()
        .map(|r| r / nominal_omega)
        .collect();
    Ok((w, central_difference(magnitude, dt)?))
}

/// Equivalent frequency and current-amplitude rate of GFL `f`.
pub fn gfl_equivalent_frequency(traj: &Trajectory, f: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if f >= traj.i_f_ang.len() {
        return Err(Error::Dimension(format!("no GFL with index {f}")));
    }
    equivalent_frequency_from_series(&traj.i_f_ang[f], &traj.i_f_mag[f], traj.dt, traj.nominal_omega)
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> SimState {
        let at = |s: &Vec<Vec<f64>>| s.iter().map(|v| v[k]).collect();
        SimState {
            delta: at(&self.delta),
            domega: at(&self.domega),
            pll_theta: at(&self.pll_theta),
            pll_int: at(&self.pll_int),
            i_d: at(&self.i_d),
            i_q: at(&self.i_q),
        }
    }

    /// Full operating point at sample `k`, including source frequencies.
    pub fn operating_point(&self, k: usize) -> OperatingPoint {
        let ph = |m: &Vec<Vec<f64>>, a: &Vec<Vec<f64>>| -> Vec<Phasor> {
            m.iter().zip(a).map(|(m, a)| Phasor::new(m[k], a[k])).collect()
        };
        let at = |s: &Vec<Vec<f64>>| s.iter().map(|v| v[k]).collect();
        OperatingPoint {
            u_n: ph(&self.u_n_mag, &self.u_n_ang),
            u_f: ph(&self.u_f_mag, &self.u_f_ang),
            e_g: self.e_mag.iter().zip(&self.delta).map(|(m, d)| Phasor::new(*m, d[k])).collect(),
            i_f: ph(&self.i_f_mag, &self.i_f_ang),
            domega_g: at(&self.domega),
            domega_f: at(&self.domega_f),
            di_f_dt: at(&self.di_f_dt),
        }
    }

    /// Segment in force at sample `k`.
    pub fn segment_at(&self, k: usize) -> &Segment {
        let idx = self.segments.partition_point(|s| s.start <= k);
        &self.segments[idx.saturating_sub(1)]
    }

    /// (magnitude, unwrapped angle) series of a physical bus.
    pub fn bus_voltage(&self, bus: BusId) -> Option<(&[f64], &[f64])> {
        match self.partition.location(bus)? {
            BusLocation::N(i) => Some((&self.u_n_mag[i], &self.u_n_ang[i])),
            BusLocation::F(i) => Some((&self.u_f_mag[i], &self.u_f_ang[i])),
        }
    }

    /// Branch current phasor series (`[branch][sample]`), unwrapped angles.
    pub fn branch_currents(&self, case: &NetworkCase, terminal: Terminal) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        case.branches
            .iter()
            .map(|br| {
                let missing = |b| Error::Validation(format!("branch bus {b} not recorded"));
                let (mi, ai) = self.bus_voltage(br.from_bus).ok_or_else(|| missing(br.from_bus))?;
                let (mj, aj) = self.bus_voltage(br.to_bus).ok_or_else(|| missing(br.to_bus))?;
                let (mut mag, mut ang) = (Vec::with_capacity(self.len()), Vec::with_capacity(self.len()));
                for k in 0..self.len() {
                    let i = branch_current_complex(
                        br,
                        Complex64::from_polar(mi[k], ai[k]),
                        Complex64::from_polar(mj[k], aj[k]),
                        terminal,
                    );
                    mag.push(i.norm());
                    ang.push(i.arg());
                }
                Ok((mag, unwrap_angles(&ang)))
            })
            .collect()
    }

    fn header(&self, case: &NetworkCase) -> Vec<String> {
        let mut h = vec!["time".to_string()];
        for b in &self.partition.sg_buses {
            let l = case.bus_label(*b);
            h.extend([format!("sg{l}_delta"), format!("sg{l}_domega")]);
        }
        for b in &self.partition.f_buses {
            let l = case.bus_label(*b);
            for s in [
                "pll_theta",
                "pll_int",
                "pll_freq",
                "i_d",
                "i_q",
                "i_mag",
                "i_ang",
                "domega",
                "didt",
            ] {
                h.push(format!("gfl{l}_{s}"));
            }
        }
        for b in self.partition.n_buses.iter().chain(&self.partition.f_buses) {
            let l = case.bus_label(*b);
            h.extend([format!("u{l}_mag"), format!("u{l}_ang")]);
        }
        h
    }

    /// CSV with the column order: time; per SG delta, domega; per GFL
    /// pll_theta, pll_int, pll_freq, i_d, i_q, i_mag, i_ang, domega, didt;
    /// per N bus then per GFL bus u_mag, u_ang.
    pub fn write_csv<W: Write>(&self, case: &NetworkCase, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header(case))?;
        let mut row = Vec::new();
        for k in 0..self.len() {
            row.clear();
            row.push(fmt_num(self.times[k]));
            for g in 0..self.delta.len() {
                row.extend([fmt_num(self.delta[g][k]), fmt_num(self.domega[g][k])]);
            }
            for f in 0..self.pll_theta.len() {
                for s in [
                    &self.pll_theta,
                    &self.pll_int,
                    &self.pll_freq,
                    &self.i_d,
                    &self.i_q,
                    &self.i_f_mag,
                    &self.i_f_ang,
                    &self.domega_f,
                    &self.di_f_dt,
                ] {
                    row.push(fmt_num(s[f][k]));
                }
            }
            for (m, a) in self.u_n_mag.iter().zip(&self.u_n_ang).chain(self.u_f_mag.iter().zip(&self.u_f_ang)) {
                row.extend([fmt_num(m[k]), fmt_num(a[k])]);
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<trajectory csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, case: &NetworkCase, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(case, std::io::BufWriter::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramps_are_recovered() {
        let (w0, dt) = (std::f64::consts::TAU * 60.0, 1e-3);
        let t: Vec<f64> = (0..500).map(|k| k as f64 * dt).collect();
        let ang: Vec<f64> = t.iter().map(|t| crate::netmodel::wrap_angle(w0 * 0.01 * t)).collect();
        let mag: Vec<f64> = t.iter().map(|t| 1.0 + 0.1 * t).collect();
        let (w, d) = equivalent_frequency_from_series(&ang, &mag, dt, w0).unwrap();
        assert!(w.iter().all(|x| (x - 0.01).abs() < 1e-6));
        assert!(d.iter().all(|x| (x - 0.1).abs() < 1e-6));
    }

    #[test]
    fn constant_phasor_gives_zero() {
        let (w, d) = equivalent_frequency_from_series(&[0.3; 10], &[1.2; 10], 1e-3, 377.0).unwrap();
        assert!(w.iter().chain(&d).all(|x| *x == 0.0));
    }

    #[test]
    fn too_short() {
        assert!(matches!(central_difference(&[1.0, 2.0], 0.1), Err(Error::TooShort(_))));
    }
}
