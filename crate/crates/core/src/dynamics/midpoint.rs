use nalgebra::{DMatrix, DVector};

use super::ode::{OdeSystem, Solution, StepStats};
use crate::error::{Error, Result};

const MAX_NEWTON: usize = 50;

/// Solves `y1 = y0 + h f(t + h/2, (y0 + y1)/2)` by Newton's method with a
/// forward-difference Jacobian.
fn midpoint_step(
    system: &dyn OdeSystem,
    t: f64,
    y0: &[f64],
    h: f64,
    tol: f64,
    evaluations: &mut usize,
) -> Result<Vec<f64>> {
    let n = y0.len();
    let mut f = vec![0.0; n];
    let mut residual = |y1: &[f64], out: &mut [f64], evals: &mut usize| -> bool {
        let mid: Vec<f64> = y0.iter().zip(y1).map(|(a, b)| 0.5 * (a + b)).collect();
        if !system.admissible(&mid) {
            return false;
        }
        *evals += 1;
        system.rhs(t + 0.5 * h, &mid, &mut f);
        for i in 0..n {
            out[i] = y1[i] - y0[i] - h * f[i];
        }
        out.iter().all(|v| v.is_finite())
    };
    // Explicit Euler predictor.
    let mut y1 = y0.to_vec();
    let mut r = vec![0.0; n];
    if !residual(&y1, &mut r, evaluations) {
        return Err(Error::SingularApproach {
            time: t,
            detail: "implicit stage left the domain".into(),
        });
    }
    for i in 0..n {
        y1[i] -= r[i];
    }
    let mut jac = DMatrix::<f64>::zeros(n, n);
    let mut rp = vec![0.0; n];
    let mut last = f64::INFINITY;
    for _ in 0..MAX_NEWTON {
        if !residual(&y1, &mut r, evaluations) {
            return Err(Error::SingularApproach {
                time: t,
                detail: "implicit stage left the domain".into(),
            });
        }
        let scale = y1.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        last = r.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale;
        if last <= tol.min(1e-12) * 1e-2 || last == 0.0 {
            return Ok(y1);
        }
        for j in 0..n {
            let dj = 1e-7 * y1[j].abs().max(1.0);
            let mut yp = y1.clone();
            yp[j] += dj;
            if !residual(&yp, &mut rp, evaluations) {
                return Err(Error::SingularApproach {
                    time: t,
                    detail: "implicit stage left the domain".into(),
                });
            }
            for i in 0..n {
                jac[(i, j)] = (rp[i] - r[i]) / dj;
            }
        }
        let delta = jac
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .ok_or_else(|| Error::NonConvergence {
                residual: last,
                detail: format!("singular Newton matrix at t = {t}"),
            })?;
        for i in 0..n {
            y1[i] -= delta[i];
        }
        if delta.amax() <= 1e-15 * scale {
            return Ok(y1);
        }
    }
    Err(Error::NonConvergence {
        residual: last,
        detail: format!("implicit midpoint Newton iteration at t = {t}"),
    })
}

pub(crate) fn integrate(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    step: f64,
    tol: f64,
    samples: Option<&[f64]>,
) -> Result<Solution> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::invalid(format!(
            "implicit midpoint step must be positive, got {step}"
        )));
    }
    if samples.is_some() {
        return Err(Error::invalid(
            "implicit midpoint records every step; sample times need the adaptive method",
        ));
    }
    let n_steps = ((t_end - t0) / step).ceil() as usize;
    let h = (t_end - t0) / n_steps as f64;
    let mut stats = StepStats::default();
    let mut times = vec![t0];
    let mut states = vec![y0.to_vec()];
    let mut y = y0.to_vec();
    for k in 0..n_steps {
        let t = t0 + k as f64 * h;
        y = midpoint_step(system, t, &y, h, tol, &mut stats.evaluations)?;
        stats.accepted += 1;
        let t_new = if k + 1 == n_steps {
            t_end
        } else {
            t0 + (k + 1) as f64 * h
        };
        system.check_state(t_new, &y)?;
        times.push(t_new);
        states.push(y.clone());
    }
    Ok(Solution {
        times,
        states,
        stats,
        dense: None,
    })
}
