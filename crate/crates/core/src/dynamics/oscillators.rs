use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::hamiltonian::HamiltonianSystem;
use super::ode::OdeSystem;
use crate::error::{Error, Result};

/// Integration aborts this close to a singular boundary.
pub const GUARD_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OscillatorKind {
    H2,
    H3,
    H4,
    /// `H = (p^2 + q^2)/2`, used as a test problem.
    Harmonic,
}

impl OscillatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OscillatorKind::H2 => "H2",
            OscillatorKind::H3 => "H3",
            OscillatorKind::H4 => "H4",
            OscillatorKind::Harmonic => "harmonic",
        }
    }

    /// Canonical orbits of H4 reach `q = pi/2` in finite time, where the
    /// momentum diverges; its motion is followed in the velocity chart.
    pub fn needs_velocity_chart(self) -> bool {
        self == OscillatorKind::H4
    }
}

impl fmt::Display for OscillatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OscillatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h2" => Ok(OscillatorKind::H2),
            "h3" => Ok(OscillatorKind::H3),
            "h4" => Ok(OscillatorKind::H4),
            "harmonic" => Ok(OscillatorKind::Harmonic),
            _ => Err(Error::invalid(format!(
                "unknown system {s:?} (expected H2, H3, H4 or harmonic)"
            ))),
        }
    }
}

/// One of the isochronous oscillators with parameter `c`.
///
/// * H2: `H = [p^2 q^3 / c + c (q + 1/q)] / 2` on `q > 0`
/// * H3: `H = [p^2 sin^2(q) sin(2q) / (2c) + 2c / sin(2q)] / 2` on `0 < q < pi/2`
/// * H4: `H = [p^2 sin^2(q) sin(2q) / (2c) + 2c cot(2q)] / 2` on `0 < q < pi/2`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillator {
    pub kind: OscillatorKind,
    pub c: f64,
}

pub fn build_oscillator(kind: OscillatorKind, c: f64) -> Result<Oscillator> {
    if !c.is_finite() {
        return Err(Error::invalid(format!("c must be finite, got {c}")));
    }
    match kind {
        OscillatorKind::H2 if c <= 0.0 => Err(Error::invalid(format!("H2 needs c > 0, got {c}"))),
        OscillatorKind::H3 | OscillatorKind::H4 if c == 0.0 => {
            Err(Error::invalid(format!("{kind} needs c != 0")))
        }
        _ => Ok(Oscillator { kind, c }),
    }
}

/// `sin^2 q sin 2q` and its first two derivatives.
fn kinetic_shape(q: f64) -> (f64, f64, f64) {
    let (s, co) = q.sin_cos();
    let (s2, c2) = (2.0 * q).sin_cos();
    let k = s * s * s2;
    let k1 = 2.0 * s * co * s2 + 2.0 * s * s * c2;
    let k2 = 2.0 * (co * co - s * s) * s2 + 8.0 * s * co * c2 - 4.0 * s * s * s2;
    (k, k1, k2)
}

impl Oscillator {
    /// Coefficient `g(q)` in `H = g(q) p^2 / 2 + V(q)`, and `g'`, `g''`.
    pub fn kinetic(&self, q: f64) -> (f64, f64, f64) {
        let c = self.c;
        match self.kind {
            OscillatorKind::H2 => (q.powi(3) / c, 3.0 * q * q / c, 6.0 * q / c),
            OscillatorKind::H3 | OscillatorKind::H4 => {
                let (k, k1, k2) = kinetic_shape(q);
                (k / (2.0 * c), k1 / (2.0 * c), k2 / (2.0 * c))
            }
            OscillatorKind::Harmonic => (1.0, 0.0, 0.0),
        }
    }

    /// Potential `V(q)` and `V'(q)`.
    pub fn potential(&self, q: f64) -> (f64, f64) {
        let c = self.c;
        match self.kind {
            OscillatorKind::H2 => (0.5 * c * (q + 1.0 / q), 0.5 * c * (1.0 - 1.0 / (q * q))),
            OscillatorKind::H3 => {
                let (s2, c2) = (2.0 * q).sin_cos();
                (c / s2, -2.0 * c * c2 / (s2 * s2))
            }
            OscillatorKind::H4 => {
                let (s2, c2) = (2.0 * q).sin_cos();
                (c * c2 / s2, -2.0 * c / (s2 * s2))
            }
            OscillatorKind::Harmonic => (0.5 * q * q, q),
        }
    }

    /// Interval of `q` on which the Hamiltonian is regular.
    pub fn domain(&self) -> (f64, f64) {
        match self.kind {
            OscillatorKind::H2 => (0.0, f64::INFINITY),
            OscillatorKind::H3 | OscillatorKind::H4 => (0.0, FRAC_PI_2),
            OscillatorKind::Harmonic => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Stable equilibrium `(q, H)` if there is one.
    pub fn equilibrium(&self) -> Option<(f64, f64)> {
        match self.kind {
            OscillatorKind::H2 => Some((1.0, self.c)),
            OscillatorKind::H3 if self.c > 0.0 => Some((std::f64::consts::FRAC_PI_4, self.c)),
            OscillatorKind::Harmonic => Some((0.0, 0.0)),
            _ => None,
        }
    }

    pub fn h(&self, q: f64, p: f64) -> f64 {
        self.energy(&[q], &[p])
    }

    /// `q' = g p` for a canonical state.
    pub fn velocity(&self, q: f64, p: f64) -> f64 {
        self.kinetic(q).0 * p
    }

    fn boundary_error(&self, t: f64, q: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if q - lo < GUARD_BAND || hi - q < GUARD_BAND {
            let edge = if q - lo < hi - q { lo } else { hi };
            return Err(Error::SingularApproach {
                time: t,
                detail: format!(
                    "{} reached q = {q:.17e}, within {GUARD_BAND:e} of the boundary {edge}",
                    self.kind
                ),
            });
        }
        Ok(())
    }
}

impl HamiltonianSystem for Oscillator {
    fn dof(&self) -> usize {
        1
    }

    fn label(&self) -> String {
        self.kind.to_string()
    }

    fn params(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("c".to_string(), self.c)])
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> f64 {
        let (g, _, _) = self.kinetic(q[0]);
        0.5 * g * p[0] * p[0] + self.potential(q[0]).0
    }

    fn gradient(&self, q: &[f64], p: &[f64], dh_dq: &mut [f64], dh_dp: &mut [f64]) {
        let (g, g1, _) = self.kinetic(q[0]);
        dh_dp[0] = g * p[0];
        dh_dq[0] = 0.5 * g1 * p[0] * p[0] + self.potential(q[0]).1;
    }

    fn in_domain(&self, q: &[f64], _p: &[f64]) -> bool {
        let (lo, hi) = self.domain();
        q[0] > lo && q[0] < hi
    }

    fn check_state(&self, t: f64, q: &[f64], _p: &[f64]) -> Result<()> {
        self.boundary_error(t, q[0])
    }
}

/// Newtonian form `q'' = v^2 g'/(2g) - g V'` on `y = (q, v)`.
///
/// For H4 the `1/cos q` singularities of this form are removed with the
/// energy of the initial data, which leaves an equation regular on the
/// whole of `(0, pi)`:
/// `q'' = (3/2) v^2 cot q + (sin q / 2) [cos q (1 + 2 sin^2 q) - 2 (E/c) sin^3 q]`.
#[derive(Debug, Clone, Copy)]
pub struct VelocityForm {
    pub oscillator: Oscillator,
    /// `E/c` of the orbit; only used by H4.
    pub energy_over_c: f64,
}

impl VelocityForm {
    /// Velocity-chart system for the orbit through the canonical state
    /// `(q0, p0)`, with its initial state `(q0, v0)`.
    pub fn through(oscillator: Oscillator, q0: f64, p0: f64) -> Result<(Self, [f64; 2])> {
        if !oscillator.in_domain(&[q0], &[p0]) || !p0.is_finite() {
            return Err(Error::invalid(format!(
                "initial state ({q0}, {p0}) outside the domain of {}",
                oscillator.kind
            )));
        }
        let v0 = oscillator.velocity(q0, p0);
        Ok((
            VelocityForm {
                oscillator,
                energy_over_c: oscillator.h(q0, p0) / oscillator.c,
            },
            [q0, v0],
        ))
    }

    pub fn domain(&self) -> (f64, f64) {
        match self.oscillator.kind {
            OscillatorKind::H4 => (0.0, std::f64::consts::PI),
            _ => self.oscillator.domain(),
        }
    }

    pub fn acceleration(&self, q: f64, v: f64) -> f64 {
        match self.oscillator.kind {
            OscillatorKind::H2 => 1.5 * v * v / q + 0.5 * q * (1.0 - q * q),
            OscillatorKind::H3 => {
                let (s, co) = q.sin_cos();
                0.5 * v * v * (3.0 * co / s - s / co) + s * (2.0 * q).cos() / (2.0 * co)
            }
            OscillatorKind::H4 => {
                let (s, co) = q.sin_cos();
                1.5 * v * v * co / s
                    + 0.5 * s * (co * (1.0 + 2.0 * s * s) - 2.0 * self.energy_over_c * s * s * s)
            }
            OscillatorKind::Harmonic => -q,
        }
    }

    /// A first integral that is regular on the whole chart: the energy for
    /// H2, H3 and the harmonic test problem, and for H4
    /// `(c/2)(v^2 + sin^2 q cos^2 q - sin^4 q) - E sin^3 q cos q`, which is
    /// zero on the orbit.
    pub fn invariant(&self, q: f64, v: f64) -> f64 {
        let osc = &self.oscillator;
        match osc.kind {
            OscillatorKind::H4 => {
                let (s, co) = q.sin_cos();
                let c = osc.c;
                0.5 * c * (v * v + s * s * co * co - s.powi(4))
                    - self.energy_over_c * c * s.powi(3) * co
            }
            _ => {
                let (g, _, _) = osc.kinetic(q);
                0.5 * v * v / g + osc.potential(q).0
            }
        }
    }
}

impl OdeSystem for VelocityForm {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = self.acceleration(y[0], y[1]);
    }

    fn admissible(&self, y: &[f64]) -> bool {
        let (lo, hi) = self.domain();
        y[0] > lo && y[0] < hi
    }

    fn check_state(&self, t: f64, y: &[f64]) -> Result<()> {
        let (lo, hi) = self.domain();
        let q = y[0];
        if q - lo < GUARD_BAND || hi - q < GUARD_BAND {
            return Err(Error::SingularApproach {
                time: t,
                detail: format!(
                    "{} velocity chart reached q = {q:.17e}",
                    self.oscillator.kind
                ),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::hamiltonian::gradient_check;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    #[test]
    fn build_validates_c() {
        assert!(build_oscillator(OscillatorKind::H2, 0.0).is_err());
        assert!(build_oscillator(OscillatorKind::H2, -1.0).is_err());
        assert!(build_oscillator(OscillatorKind::H3, 0.0).is_err());
        assert!(build_oscillator(OscillatorKind::H4, -2.0).is_ok());
        assert!(build_oscillator(OscillatorKind::H3, f64::NAN).is_err());
        assert!("h5".parse::<OscillatorKind>().is_err());
    }

    #[test]
    fn spot_values() {
        let h2 = build_oscillator(OscillatorKind::H2, 1.0).unwrap();
        assert_eq!(h2.h(1.0, 0.0), 1.0);
        let (mut dq, mut dp) = ([1.0], [1.0]);
        h2.gradient(&[1.0], &[0.0], &mut dq, &mut dp);
        assert_eq!((dq[0], dp[0]), (0.0, 0.0));
        let h3 = build_oscillator(OscillatorKind::H3, 1.0).unwrap();
        assert!((h3.h(FRAC_PI_4, 0.0) - 1.0).abs() < 1e-15);
        let h4 = build_oscillator(OscillatorKind::H4, 1.0).unwrap();
        assert!(h4.h(FRAC_PI_4, 0.0).abs() < 1e-15);
    }

    #[test]
    fn gradients_match_finite_differences() {
        for kind in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
            let osc = build_oscillator(kind, 1.7).unwrap();
            let pts: Vec<_> = (1..40)
                .map(|k| {
                    let x = k as f64 / 40.0;
                    let q = match kind {
                        OscillatorKind::H2 => 0.1 + 5.0 * x,
                        _ => 0.05 + (FRAC_PI_2 - 0.1) * x,
                    };
                    (vec![q], vec![3.0 * (7.0 * x).sin()])
                })
                .collect();
            assert!(gradient_check(&osc, &pts) < 1e-6, "{kind}");
        }
    }

    /// The velocity chart must reproduce Hamilton's equations where both
    /// are defined: q'' from the chain rule on (q, p).
    #[test]
    fn velocity_chart_agrees_with_canonical_equations() {
        for kind in [
            OscillatorKind::H2,
            OscillatorKind::H3,
            OscillatorKind::H4,
            OscillatorKind::Harmonic,
        ] {
            let osc = build_oscillator(kind, 1.3).unwrap();
            for &(q, p) in &[(0.4, 0.3), (FRAC_PI_3, -0.7), (1.1, 1.9)] {
                let (form, [_, v]) = VelocityForm::through(osc, q, p).unwrap();
                let (g, g1, _) = osc.kinetic(q);
                let (_, v1) = osc.potential(q);
                let p_dot = -(0.5 * g1 * p * p + v1);
                let q_ddot = g1 * v * p + g * p_dot;
                let a = form.acceleration(q, v);
                assert!(
                    (a - q_ddot).abs() < 1e-12 * (1.0 + q_ddot.abs()),
                    "{kind} at {q}: {a} vs {q_ddot}"
                );
            }
        }
    }
}
