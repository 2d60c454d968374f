use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Polar phasor `magnitude ∠ angle` (per unit, radians).
///
/// Stored angles are wrapped to (−π, π]; time series keep their own
/// unwrapped copies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phasor {
    pub magnitude: f64,
    pub angle: f64,
}

impl Phasor {
    /// Builds a phasor, folding a negative magnitude into the angle.
    pub fn new(magnitude: f64, angle: f64) -> Self {
        if magnitude < 0.0 {
            Self {
                magnitude: -magnitude,
                angle: wrap_angle(angle + PI),
            }
        } else {
            Self {
                magnitude,
                angle: wrap_angle(angle),
            }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.norm(), z.arg())
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.magnitude, self.angle)
    }

    pub fn zero() -> Self {
        Self {
            magnitude: 0.0,
            angle: 0.0,
        }
    }
}

impl From<Complex64> for Phasor {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<Phasor> for Complex64 {
    fn from(p: Phasor) -> Self {
        p.to_complex()
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

/// Principal-value difference `a − b`, in (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Removes 2π jumps from a sampled angle sequence.
pub fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    for (k, &a) in angles.iter().enumerate() {
        if k == 0 {
            out.push(a);
        } else {
            let prev: f64 = out[k - 1];
            out.push(prev + wrap_angle(a - prev));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_keeps_pi_and_maps_minus_pi() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5 + 4.0 * PI) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_magnitude_flips_angle() {
        let p = Phasor::new(-2.0, 0.25);
        assert_eq!(p.magnitude, 2.0);
        assert!((p.angle - (0.25 - PI)).abs() < 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let raw: Vec<f64> = (0..50).map(|k| wrap_angle(0.3 * k as f64)).collect();
        let un = unwrap_angles(&raw);
        for (k, a) in un.iter().enumerate() {
            assert!((a - 0.3 * k as f64).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn rectangular_round_trip(mag in 1e-6f64..1e3, ang in -10.0f64..10.0) {
            let p = Phasor::new(mag, ang);
            let back = Phasor::from_complex(p.to_complex());
            prop_assert!((back.magnitude - p.magnitude).abs() <= 1e-12 * p.magnitude);
            let z = p.to_complex();
            let z2 = back.to_complex();
            prop_assert!((z - z2).norm() <= 1e-12 * mag);
            prop_assert!(back.angle > -PI && back.angle <= PI);
        }
    }
}
