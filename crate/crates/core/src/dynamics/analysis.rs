use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::hamiltonian::{HamiltonianFlow, HamiltonianSystem};
use super::ode::{solve, OdeSystem, Sampling, SolverOptions};
use super::oscillators::{build_oscillator, Oscillator, OscillatorKind, VelocityForm};
use super::trajectory::{integrate_with, Chart, Trajectory};
use crate::error::{Error, Result};

/// A trajectory counts as having left its initial state once it is this
/// fraction of its maximal excursion away.
const LEAVE_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodEstimate {
    pub period: f64,
    /// `|z(T) - z(0)|` at the detected return.
    pub residual: f64,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// First return time to the initial state.
///
/// Local minima of `|z(t) - z(0)|` after the trajectory has left `z(0)` are
/// located as sign changes of `(z - z0) . z'` on the dense interpolant and
/// refined by bisection; without an interpolant the minimum of a parabola
/// through three samples is used. The first minimum below `tol` wins.
pub fn detect_period(traj: &Trajectory, tol: f64) -> Result<PeriodEstimate> {
    let z0 = traj
        .states
        .first()
        .ok_or_else(|| Error::invalid("empty trajectory"))?;
    let dists: Vec<f64> = traj.states.iter().map(|z| distance(z, z0)).collect();
    let dmax = dists.iter().cloned().fold(0.0, f64::max);
    if dmax == 0.0 {
        return Err(Error::NoReturn(
            "the trajectory never leaves its initial state".into(),
        ));
    }
    let leave = dists
        .iter()
        .position(|&d| d > LEAVE_FRACTION * dmax)
        .expect("dmax is attained");
    let t_leave = traj.times[leave];
    let mut best = f64::INFINITY;
    let found = match &traj.dense {
        Some(dense) => {
            let slope = |t: f64| {
                let (z, dz) = dense
                    .eval_with_derivative(t)
                    .expect("t inside the dense range");
                z.iter()
                    .zip(z0)
                    .zip(&dz)
                    .map(|((a, b), d)| (a - b) * d)
                    .sum::<f64>()
            };
            let knots: Vec<f64> = dense
                .breakpoints()
                .into_iter()
                .filter(|&t| t >= t_leave)
                .collect();
            let mut found = None;
            for w in knots.windows(2) {
                let (mut a, mut b) = (w[0], w[1]);
                let (ga, gb) = (slope(a), slope(b));
                if !(ga < 0.0 && gb >= 0.0) {
                    continue;
                }
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if m <= a || m >= b {
                        break;
                    }
                    if slope(m) < 0.0 {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                let t = if slope(a).abs() < slope(b).abs() {
                    a
                } else {
                    b
                };
                let d = distance(&dense.eval(t).expect("t inside the dense range"), z0);
                best = best.min(d);
                if d <= tol {
                    found = Some(PeriodEstimate {
                        period: t,
                        residual: d,
                    });
                    break;
                }
            }
            found
        }
        None => {
            let mut found = None;
            for i in (leave + 1)..dists.len().saturating_sub(1) {
                let (d0, d1, d2) = (dists[i - 1].powi(2), dists[i].powi(2), dists[i + 1].powi(2));
                if !(d1 <= d0 && d1 < d2) {
                    continue;
                }
                let (t0, t1, t2) = (traj.times[i - 1], traj.times[i], traj.times[i + 1]);
                // Vertex of the parabola through the three samples.
                let num = (t1 - t0).powi(2) * (d1 - d2) - (t1 - t2).powi(2) * (d1 - d0);
                let den = (t1 - t0) * (d1 - d2) - (t1 - t2) * (d1 - d0);
                let t = if den != 0.0 { t1 - 0.5 * num / den } else { t1 };
                let l0 = (t - t1) * (t - t2) / ((t0 - t1) * (t0 - t2));
                let l1 = (t - t0) * (t - t2) / ((t1 - t0) * (t1 - t2));
                let l2 = (t - t0) * (t - t1) / ((t2 - t0) * (t2 - t1));
                let d = (l0 * d0 + l1 * d1 + l2 * d2).max(0.0).sqrt();
                best = best.min(d);
                if d <= tol {
                    found = Some(PeriodEstimate {
                        period: t,
                        residual: d,
                    });
                    break;
                }
            }
            found
        }
    };
    found.ok_or_else(|| {
        Error::NoReturn(if best.is_finite() {
            format!("closest return {best:e} exceeds tol {tol:e}; the window may be too short")
        } else {
            "no local minimum of the return distance; the window may be too short".into()
        })
    })
}

/// Period of the oscillator orbit through `(q0, p0)` from `periods`
/// conjectured periods of integration at tolerance `tol`.
pub fn oscillator_period(
    osc: &Oscillator,
    q0: f64,
    p0: f64,
    periods: f64,
    tol: f64,
    return_tol: f64,
) -> Result<PeriodEstimate> {
    let t_end = periods * std::f64::consts::TAU;
    let traj =
        super::trajectory::integrate_oscillator(osc, q0, p0, t_end, &SolverOptions::new(tol))?;
    detect_period(&traj, return_tol)
}

/// `max_t |r(t)|` with `r = q'' - 3 q'^2/(2q) - q (1 - q^2)/2` along an H2
/// trajectory; `q'` and `q''` come from Hamilton's equations.
pub fn newton_residual(traj: &Trajectory) -> Result<f64> {
    if traj.system != OscillatorKind::H2.as_str() || traj.chart != Chart::Canonical {
        return Err(Error::invalid(format!(
            "Newton residual needs a canonical H2 trajectory, got {} ({:?})",
            traj.system, traj.chart
        )));
    }
    let c = *traj
        .params
        .get("c")
        .ok_or_else(|| Error::invalid("trajectory has no parameter c"))?;
    let osc = build_oscillator(OscillatorKind::H2, c)?;
    let mut worst = 0.0f64;
    for z in &traj.states {
        let (q, p) = (z[0], z[1]);
        let (mut dh_dq, mut dh_dp) = ([0.0], [0.0]);
        osc.gradient(&[q], &[p], &mut dh_dq, &mut dh_dp);
        let q_dot = dh_dp[0];
        let p_dot = -dh_dq[0];
        let q_ddot = (p_dot * q.powi(3) + 3.0 * p * q * q * q_dot) / c;
        let r = q_ddot - 1.5 * q_dot * q_dot / q - 0.5 * q * (1.0 - q * q);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct CScalingReport {
    pub c1: f64,
    pub c2: f64,
    pub q0: f64,
    pub t_end: f64,
    pub samples: usize,
    /// `max_t |q_c1(t) - q_c2(t)|`.
    pub max_q_deviation: f64,
    /// `max_t |p_c2(t) - (c2/c1) p_c1(t)|`.
    pub max_p_deviation: f64,
}

pub const C_SCALING_SAMPLES: usize = 2000;

/// Integrates H2 from `(q0, 0)` with `c1` and with `c2` and compares the
/// sampled trajectories.
pub fn c_scaling_check(c1: f64, c2: f64, q0: f64, t_end: f64, tol: f64) -> Result<CScalingReport> {
    let opts = SolverOptions::new(tol)
        .sampling(Sampling::Uniform(C_SCALING_SAMPLES))
        .keep_dense(false);
    let run = |c| -> Result<Trajectory> {
        let osc = build_oscillator(OscillatorKind::H2, c)?;
        integrate_with(&osc, &[q0, 0.0], t_end, &opts)
    };
    let (a, b) = (run(c1)?, run(c2)?);
    let ratio = c2 / c1;
    let mut max_q = 0.0f64;
    let mut max_p = 0.0f64;
    for (za, zb) in a.states.iter().zip(&b.states) {
        max_q = max_q.max((za[0] - zb[0]).abs());
        max_p = max_p.max((zb[1] - ratio * za[1]).abs());
    }
    Ok(CScalingReport {
        c1,
        c2,
        q0,
        t_end,
        samples: a.len(),
        max_q_deviation: max_q,
        max_p_deviation: max_p,
    })
}

/// Integrates to `t_end`, applies the time-reversal map `flip`, integrates
/// for `t_end` again and returns `max |y_final - flip(y0)|`.
pub fn time_reversal_ode(
    system: &dyn OdeSystem,
    y0: &[f64],
    t_end: f64,
    tol: f64,
    flip: impl Fn(&mut [f64]),
) -> Result<f64> {
    let opts = SolverOptions::new(tol).keep_dense(false);
    let forward = solve(system, 0.0, y0, t_end, &opts)?;
    let mut mid = forward.states.last().expect("final state").clone();
    flip(&mut mid);
    let back = solve(system, 0.0, &mid, t_end, &opts)?;
    let mut target = y0.to_vec();
    flip(&mut target);
    let end = back.states.last().expect("final state");
    Ok(end
        .iter()
        .zip(&target)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// Time-reversal error of a Hamiltonian system with `p -> -p`.
pub fn time_reversal_check(
    system: &dyn HamiltonianSystem,
    z0: &[f64],
    t_end: f64,
    tol: f64,
) -> Result<f64> {
    let n = system.dof();
    time_reversal_ode(&HamiltonianFlow(system), z0, t_end, tol, |y| {
        for v in &mut y[n..] {
            *v = -*v;
        }
    })
}

/// Time-reversal error of an oscillator in its preferred chart.
pub fn oscillator_time_reversal(
    osc: &Oscillator,
    q0: f64,
    p0: f64,
    t_end: f64,
    tol: f64,
) -> Result<f64> {
    if osc.kind.needs_velocity_chart() {
        let (form, y0) = VelocityForm::through(*osc, q0, p0)?;
        time_reversal_ode(&form, &y0, t_end, tol, |y| y[1] = -y[1])
    } else {
        time_reversal_check(osc, &[q0, p0], t_end, tol)
    }
}

/// Range of `q0` (with `p0 = 0`) used for moderate-energy samples.
pub fn moderate_q_range(kind: OscillatorKind) -> (f64, f64) {
    match kind {
        // q + 1/q <= 20 keeps H <= 10 H(equilibrium).
        OscillatorKind::H2 => (0.2, 5.0),
        // 1/sin(2q) <= 10 near both ends.
        OscillatorKind::H3 => (0.15, 1.42),
        OscillatorKind::H4 => (0.25, 1.3),
        OscillatorKind::Harmonic => (-3.0, 3.0),
    }
}

/// `count` seeded initial states `(q0, 0)` of moderate energy. For H2 `q0`
/// is log-uniform.
pub fn moderate_initial_conditions(
    kind: OscillatorKind,
    count: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = moderate_q_range(kind);
    (0..count)
        .map(|_| {
            let q0 = match kind {
                OscillatorKind::H2 => (rng.random_range(lo.ln()..hi.ln())).exp(),
                _ => rng.random_range(lo..hi),
            };
            (q0, 0.0)
        })
        .collect()
}

/// Random interior phase-space points for gradient checks.
pub fn random_interior_points(
    osc: &Oscillator,
    count: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let q = match osc.kind {
                OscillatorKind::H2 => rng.random_range(0.1f64.ln()..10f64.ln()).exp(),
                OscillatorKind::H3 | OscillatorKind::H4 => {
                    rng.random_range(0.05..std::f64::consts::FRAC_PI_2 - 0.05)
                }
                OscillatorKind::Harmonic => rng.random_range(-5.0..5.0),
            };
            (vec![q], vec![rng.random_range(-3.0..3.0)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::trajectory::integrate;
    use std::f64::consts::TAU;

    #[test]
    fn harmonic_period_from_dense_and_from_samples() {
        let osc = build_oscillator(OscillatorKind::Harmonic, 1.0).unwrap();
        let traj = integrate(&osc, &[1.0, 0.0], 3.0 * TAU + 0.5, 1e-12).unwrap();
        let est = detect_period(&traj, 1e-6).unwrap();
        assert!((est.period - TAU).abs() < 1e-8, "{est:?}");
        let opts = SolverOptions::new(1e-12)
            .sampling(Sampling::Uniform(3000))
            .keep_dense(false);
        let coarse = integrate_with(&osc, &[1.0, 0.0], 3.0 * TAU + 0.5, &opts).unwrap();
        let est = detect_period(&coarse, 1e-3).unwrap();
        assert!((est.period - TAU).abs() < 1e-5, "{est:?}");
    }

    #[test]
    fn equilibrium_has_no_period() {
        let osc = build_oscillator(OscillatorKind::H2, 1.0).unwrap();
        let traj = integrate(&osc, &[1.0, 0.0], 20.0, 1e-10).unwrap();
        assert!(traj.states.iter().all(|z| z == &vec![1.0, 0.0]));
        assert!(matches!(
            detect_period(&traj, 1e-6),
            Err(Error::NoReturn(_))
        ));
        assert_eq!(newton_residual(&traj).unwrap(), 0.0);
    }

    #[test]
    fn short_window_reports_no_return() {
        let osc = build_oscillator(OscillatorKind::H2, 1.0).unwrap();
        let traj = integrate(&osc, &[2.0, 0.0], 4.0, 1e-10).unwrap();
        assert!(matches!(
            detect_period(&traj, 1e-6),
            Err(Error::NoReturn(_))
        ));
    }

    #[test]
    fn isochronous_periods() {
        for kind in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
            let osc = build_oscillator(kind, 1.0).unwrap();
            for (q0, p0) in moderate_initial_conditions(kind, 3, 11) {
                let est = oscillator_period(&osc, q0, p0, 3.0, 1e-11, 1e-6).unwrap();
                assert!((est.period - TAU).abs() < 1e-6, "{kind} q0 = {q0}: {est:?}");
            }
        }
    }

    #[test]
    fn h4_canonical_orbit_hits_the_guard_band() {
        let osc = build_oscillator(OscillatorKind::H4, 1.0).unwrap();
        let err = integrate(&osc, &[std::f64::consts::FRAC_PI_3, 0.0], 10.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::SingularApproach { .. }), "{err}");
    }

    #[test]
    fn c_scaling_and_reversal() {
        let r = c_scaling_check(1.0, 2.0, 2.0, 2.0 * TAU, 1e-12).unwrap();
        assert!(
            r.max_q_deviation < 1e-7 && r.max_p_deviation < 1e-7,
            "{r:?}"
        );
        let same = c_scaling_check(1.0, 1.0, 2.0, TAU, 1e-10).unwrap();
        assert_eq!((same.max_q_deviation, same.max_p_deviation), (0.0, 0.0));
        let osc = build_oscillator(OscillatorKind::H2, 1.0).unwrap();
        assert!(time_reversal_check(&osc, &[2.0, 0.3], 10.0, 1e-10).unwrap() < 1e-6);
        let h4 = build_oscillator(OscillatorKind::H4, 1.0).unwrap();
        assert!(oscillator_time_reversal(&h4, 1.0, 0.0, 10.0, 1e-10).unwrap() < 1e-6);
    }

    #[test]
    fn newton_residual_is_c_independent() {
        for c in [1.0, 5.0] {
            let osc = build_oscillator(OscillatorKind::H2, c).unwrap();
            let traj = integrate(&osc, &[2.0, 0.0], 2.0 * TAU, 1e-12).unwrap();
            assert!(newton_residual(&traj).unwrap() < 1e-8);
        }
        let h3 = build_oscillator(OscillatorKind::H3, 1.0).unwrap();
        let traj = integrate(&h3, &[1.0, 0.0], 1.0, 1e-10).unwrap();
        assert!(newton_residual(&traj).is_err());
    }
}
