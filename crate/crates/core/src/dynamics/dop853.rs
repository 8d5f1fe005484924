use super::dop853_tableau::{A, B, C, D, E3, E5, INTERPOLATOR_POWER, N_STAGES, N_STAGES_EXTENDED};
use super::ode::{DenseOutput, OdeSystem, Solution, SolverOptions, StepStats};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

/// One step of the continuous extension.
#[derive(Debug, Clone)]
pub(crate) struct Segment {
    pub(crate) t_old: f64,
    pub(crate) t_new: f64,
    pub(crate) h: f64,
    y_old: Vec<f64>,
    /// `INTERPOLATOR_POWER` rows of length n.
    f: Vec<Vec<f64>>,
}

impl Segment {
    /// Value and time derivative at `t`.
    pub(crate) fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let x = (t - self.t_old) / self.h;
        let n = self.y_old.len();
        let mut y = vec![0.0; n];
        let mut dy = vec![0.0; n];
        for (i, row) in self.f.iter().rev().enumerate() {
            let (w, dw) = if i % 2 == 0 {
                (x, 1.0)
            } else {
                (1.0 - x, -1.0)
            };
            for k in 0..n {
                let acc = y[k] + row[k];
                dy[k] = dy[k] * w + acc * dw;
                y[k] = acc * w;
            }
        }
        for k in 0..n {
            y[k] += self.y_old[k];
            dy[k] /= self.h;
        }
        (y, dy)
    }
}

fn rms(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    (v.map(|x| x * x).sum::<f64>() / n as f64).sqrt()
}

struct Stepper<'a> {
    system: &'a dyn OdeSystem,
    n: usize,
    rtol: f64,
    atol: f64,
    k: Vec<Vec<f64>>,
    evaluations: usize,
}

enum StageOutcome {
    Ok { y_new: Vec<f64> },
    Inadmissible,
}

impl Stepper<'_> {
    fn eval(&mut self, t: f64, y: &[f64], out_stage: usize) -> bool {
        if !self.system.admissible(y) {
            return false;
        }
        self.evaluations += 1;
        let mut dy = std::mem::take(&mut self.k[out_stage]);
        self.system.rhs(t, y, &mut dy);
        let ok = dy.iter().all(|v| v.is_finite());
        self.k[out_stage] = dy;
        ok
    }

    fn stage_state(&self, y: &[f64], s: usize, h: f64) -> Vec<f64> {
        let mut ys = y.to_vec();
        for (j, &a) in A[s][..s].iter().enumerate() {
            if a != 0.0 {
                for i in 0..self.n {
                    ys[i] += h * a * self.k[j][i];
                }
            }
        }
        ys
    }

    /// Stages 1..=12 given `k[0] = f(t, y)`. On success `k[12] = f(t+h, y_new)`.
    fn rk_step(&mut self, t: f64, y: &[f64], h: f64) -> StageOutcome {
        for s in 1..N_STAGES {
            let ys = self.stage_state(y, s, h);
            if !self.eval(t + C[s] * h, &ys, s) {
                return StageOutcome::Inadmissible;
            }
        }
        let mut y_new = y.to_vec();
        for (j, &b) in B.iter().enumerate() {
            if b != 0.0 {
                for i in 0..self.n {
                    y_new[i] += h * b * self.k[j][i];
                }
            }
        }
        if y_new.iter().any(|v| !v.is_finite()) || !self.eval(t + h, &y_new, N_STAGES) {
            return StageOutcome::Inadmissible;
        }
        StageOutcome::Ok { y_new }
    }

    fn error_norm(&self, y: &[f64], y_new: &[f64], h: f64) -> f64 {
        let mut err5 = 0.0;
        let mut err3 = 0.0;
        for i in 0..self.n {
            let scale = self.atol + y[i].abs().max(y_new[i].abs()) * self.rtol;
            let mut e5 = 0.0;
            let mut e3 = 0.0;
            for j in 0..=N_STAGES {
                e5 += self.k[j][i] * E5[j];
                e3 += self.k[j][i] * E3[j];
            }
            err5 += (e5 / scale).powi(2);
            err3 += (e3 / scale).powi(2);
        }
        if err5 == 0.0 && err3 == 0.0 {
            return 0.0;
        }
        let denom = err5 + 0.01 * err3;
        h.abs() * err5 / (denom * self.n as f64).sqrt()
    }

    fn dense_segment(
        &mut self,
        t_old: f64,
        y_old: &[f64],
        t_new: f64,
        y_new: &[f64],
        h: f64,
    ) -> Result<Segment> {
        for s in N_STAGES + 1..N_STAGES_EXTENDED {
            let ys = self.stage_state(y_old, s, h);
            if !self.eval(t_old + C[s] * h, &ys, s) {
                return Err(Error::NonConvergence {
                    residual: f64::NAN,
                    detail: format!("dense-output stage left the domain near t = {t_old}"),
                });
            }
        }
        let n = self.n;
        let f_old = &self.k[0];
        let f_new = &self.k[N_STAGES];
        let mut f = vec![vec![0.0; n]; INTERPOLATOR_POWER];
        for i in 0..n {
            let delta = y_new[i] - y_old[i];
            f[0][i] = delta;
            f[1][i] = h * f_old[i] - delta;
            f[2][i] = 2.0 * delta - h * (f_new[i] + f_old[i]);
        }
        for (r, drow) in D.iter().enumerate() {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, &d) in drow.iter().enumerate() {
                    acc += d * self.k[j][i];
                }
                f[3 + r][i] = h * acc;
            }
        }
        Ok(Segment {
            t_old,
            t_new,
            h,
            y_old: y_old.to_vec(),
            f,
        })
    }

    fn initial_step(&mut self, t0: f64, y0: &[f64], t_end: f64, max_step: f64) -> f64 {
        let interval = t_end - t0;
        let f0 = self.k[0].clone();
        let scale: Vec<f64> = y0.iter().map(|v| self.atol + v.abs() * self.rtol).collect();
        let d0 = rms(y0.iter().zip(&scale).map(|(v, s)| v / s), self.n);
        let d1 = rms(f0.iter().zip(&scale).map(|(v, s)| v / s), self.n);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(interval);
        let y1: Vec<f64> = y0.iter().zip(&f0).map(|(y, f)| y + h0 * f).collect();
        let d2 = if self.eval(t0 + h0, &y1, 1) {
            rms(
                self.k[1]
                    .iter()
                    .zip(&f0)
                    .zip(&scale)
                    .map(|((a, b), s)| (a - b) / s),
                self.n,
            ) / h0
        } else {
            f64::INFINITY
        };
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(interval).min(max_step)
    }
}

fn min_step(t: f64) -> f64 {
    10.0 * ((t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE))
}

pub(crate) fn integrate(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
    samples: Option<&[f64]>,
) -> Result<Solution> {
    let n = system.dim();
    let mut st = Stepper {
        system,
        n,
        rtol: opts.tol,
        atol: opts.tol,
        k: vec![vec![0.0; n]; N_STAGES_EXTENDED],
        evaluations: 0,
    };
    if !st.eval(t0, y0, 0) {
        return Err(Error::invalid(
            "right-hand side is not finite at the initial state",
        ));
    }
    let mut h_abs = st.initial_step(t0, y0, t_end, opts.max_step);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut stats = StepStats::default();
    let mut dense = DenseOutput::default();
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut next_sample = 0usize;
    match samples {
        None => {
            times.push(t0);
            states.push(y0.to_vec());
        }
        Some(ts) => {
            while next_sample < ts.len() && ts[next_sample] <= t0 {
                times.push(ts[next_sample]);
                states.push(y0.to_vec());
                next_sample += 1;
            }
        }
    }
    let need_dense = opts.keep_dense || samples.is_some();

    while t < t_end {
        if stats.accepted >= opts.max_steps {
            return Err(Error::NonConvergence {
                residual: f64::NAN,
                detail: format!("step limit {} reached at t = {t}", opts.max_steps),
            });
        }
        let min_h = min_step(t);
        h_abs = h_abs.min(opts.max_step).max(min_h);
        let mut rejected = false;
        let mut last_violation: Option<Error> = None;
        let (t_new, y_new, h) = loop {
            if h_abs < min_h {
                return Err(last_violation.unwrap_or(Error::Stiffness {
                    time: t,
                    step: h_abs,
                }));
            }
            let mut h = h_abs;
            let mut t_new = t + h;
            if t_new > t_end {
                t_new = t_end;
            }
            h = t_new - t;
            h_abs = h;
            match st.rk_step(t, &y, h) {
                StageOutcome::Inadmissible => {
                    stats.rejected += 1;
                    h_abs *= MIN_FACTOR;
                    rejected = true;
                    if last_violation.is_none() {
                        last_violation = system.check_state(t, &y).err();
                    }
                    if h_abs < min_h {
                        return Err(last_violation.unwrap_or(Error::SingularApproach {
                            time: t,
                            detail:
                                "right-hand side undefined arbitrarily close to the current state"
                                    .into(),
                        }));
                    }
                }
                StageOutcome::Ok { y_new } => {
                    let err = st.error_norm(&y, &y_new, h);
                    if err < 1.0 {
                        let mut factor = if err == 0.0 {
                            MAX_FACTOR
                        } else {
                            MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                        };
                        if rejected {
                            factor = factor.min(1.0);
                        }
                        h_abs *= factor;
                        break (t_new, y_new, h);
                    }
                    stats.rejected += 1;
                    h_abs *= MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
                    rejected = true;
                }
            }
        };
        stats.accepted += 1;
        let segment = if need_dense {
            Some(st.dense_segment(t, &y, t_new, &y_new, h)?)
        } else {
            None
        };
        system.check_state(t_new, &y_new)?;
        match samples {
            None => {
                times.push(t_new);
                states.push(y_new.clone());
            }
            Some(ts) => {
                let seg = segment.as_ref().expect("dense segment for sampling");
                while next_sample < ts.len() && ts[next_sample] <= t_new {
                    let ts_k = ts[next_sample];
                    times.push(ts_k);
                    states.push(if ts_k == t_new {
                        y_new.clone()
                    } else {
                        seg.eval(ts_k).0
                    });
                    next_sample += 1;
                }
            }
        }
        if opts.keep_dense {
            dense.segments.push(segment.expect("dense segment"));
        }
        // f(t_new, y_new) becomes the first stage of the next step.
        st.k.swap(0, N_STAGES);
        t = t_new;
        y = y_new;
    }
    stats.evaluations = st.evaluations;
    Ok(Solution {
        times,
        states,
        stats,
        dense: opts.keep_dense.then_some(dense),
    })
}
