use serde::Serialize;

use crate::error::{Error, Result};

/// First-order system `y' = f(t, y)`.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// False where the right-hand side is undefined. Steps whose stages
    /// leave this set are rejected and retried with a smaller step.
    fn admissible(&self, _y: &[f64]) -> bool {
        true
    }

    /// Error for an accepted state the integration must stop at (guard
    /// band, blow-up).
    fn check_state(&self, _t: f64, _y: &[f64]) -> Result<()> {
        Ok(())
    }
}

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-3;

pub fn validate_tol(tol: f64) -> Result<()> {
    if !(MIN_TOL..=MAX_TOL).contains(&tol) {
        return Err(Error::invalid(format!(
            "tol must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {tol:e}"
        )));
    }
    Ok(())
}

/// Where the solution is recorded.
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// `n + 1` equally spaced times from `t0` to `t_end`.
    Uniform(usize),
    /// Explicit increasing times inside `[t0, t_end]`.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Adaptive explicit Runge-Kutta 8(5,3) with seventh-order dense output.
    Dop853,
    /// Fixed-step implicit midpoint rule.
    ImplicitMidpoint { step: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Dop853 => "dop853",
            Method::ImplicitMidpoint { .. } => "implicit-midpoint",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub tol: f64,
    pub method: Method,
    pub sampling: Sampling,
    /// Keep the piecewise dense interpolant (DOP853 only).
    pub keep_dense: bool,
    pub max_step: f64,
    pub max_steps: usize,
}

impl SolverOptions {
    pub fn new(tol: f64) -> Self {
        SolverOptions {
            tol,
            method: Method::Dop853,
            sampling: Sampling::Steps,
            keep_dense: true,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }

    pub fn sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn keep_dense(mut self, keep: bool) -> Self {
        self.keep_dense = keep;
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Piecewise polynomial interpolant over the accepted steps.
#[derive(Debug, Clone, Default)]
pub struct DenseOutput {
    pub(crate) segments: Vec<super::dop853::Segment>,
}

impl DenseOutput {
    pub fn t_start(&self) -> Option<f64> {
        self.segments.first().map(|s| s.t_old)
    }

    pub fn t_end(&self) -> Option<f64> {
        self.segments.last().map(|s| s.t_new)
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    fn locate(&self, t: f64) -> Option<&super::dop853::Segment> {
        let idx = self.segments.partition_point(|s| s.t_new < t);
        self.segments
            .get(idx)
            .or(self.segments.last())
            .filter(|s| t >= s.t_old - 1e-12 * s.h.abs())
    }

    /// State at time `t`, or `None` outside the covered interval.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        self.locate(t).map(|s| s.eval(t).0)
    }

    /// State and time derivative of the interpolant at `t`.
    pub fn eval_with_derivative(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        self.locate(t).map(|s| s.eval(t))
    }

    /// Step boundaries `t_0 < t_1 < .. < t_m`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.t_old).collect();
        if let Some(last) = self.segments.last() {
            out.push(last.t_new);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub stats: StepStats,
    pub dense: Option<DenseOutput>,
}

/// Integrates `system` from `(t0, y0)` to `t_end > t0`.
pub fn solve(
    system: &dyn OdeSystem,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Solution> {
    validate_tol(opts.tol)?;
    if y0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            left: y0.len(),
            right: system.dim(),
        });
    }
    if !(t_end.is_finite() && t0.is_finite()) || t_end <= t0 {
        return Err(Error::invalid(format!(
            "need finite t_end > t0, got t0 = {t0}, t_end = {t_end}"
        )));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("initial state has non-finite entries"));
    }
    if !system.admissible(y0) {
        return Err(Error::invalid(
            "initial state outside the domain of the system",
        ));
    }
    system.check_state(t0, y0)?;
    let samples = match &opts.sampling {
        Sampling::Steps => None,
        Sampling::Uniform(n) => {
            let n = (*n).max(1);
            Some(
                (0..=n)
                    .map(|k| t0 + (t_end - t0) * k as f64 / n as f64)
                    .collect::<Vec<_>>(),
            )
        }
        Sampling::Times(ts) => {
            if ts.windows(2).any(|w| w[1] <= w[0]) || ts.iter().any(|&t| t < t0 || t > t_end) {
                return Err(Error::invalid(
                    "sample times must be increasing and inside [t0, t_end]",
                ));
            }
            Some(ts.clone())
        }
    };
    match opts.method {
        Method::Dop853 => super::dop853::integrate(system, t0, y0, t_end, opts, samples.as_deref()),
        Method::ImplicitMidpoint { step } => {
            super::midpoint::integrate(system, t0, y0, t_end, step, opts.tol, samples.as_deref())
        }
    }
}
