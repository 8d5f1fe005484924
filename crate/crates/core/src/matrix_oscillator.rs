//! The matrix equation `U'' = (A U + U A)/2 + b U^3` for real square `U`.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::{solve, OdeSystem, SolverOptions, StepStats};
use crate::error::{Error, Result};
use crate::io::write_csv_row;

/// Integration stops with a finite-time-escape error once an entry of `U`
/// or `V` exceeds this magnitude.
pub const ESCAPE_THRESHOLD: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixState {
    pub u: DMatrix<f64>,
    /// `dU/dt`.
    pub v: DMatrix<f64>,
}

impl MatrixState {
    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if !u.is_square() || u.shape() != v.shape() || u.nrows() == 0 {
            return Err(Error::invalid(format!(
                "U and V must be non-empty square matrices of one size, got {:?} and {:?}",
                u.shape(),
                v.shape()
            )));
        }
        if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix state has non-finite entries"));
        }
        Ok(MatrixState { u, v })
    }

    pub fn zeros(n: usize) -> Self {
        MatrixState {
            u: DMatrix::zeros(n, n),
            v: DMatrix::zeros(n, n),
        }
    }

    pub fn size(&self) -> usize {
        self.u.nrows()
    }

    /// Row-major `U` followed by row-major `V`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.u
            .transpose()
            .iter()
            .chain(self.v.transpose().iter())
            .copied()
            .collect()
    }

    pub fn from_flat(n: usize, y: &[f64]) -> Self {
        MatrixState {
            u: DMatrix::from_row_slice(n, n, &y[..n * n]),
            v: DMatrix::from_row_slice(n, n, &y[n * n..]),
        }
    }
}

fn check_dims(a: &DMatrix<f64>, s: &MatrixState) -> Result<()> {
    if !a.is_square() || a.nrows() != s.size() {
        return Err(Error::DimensionMismatch {
            left: a.nrows(),
            right: s.size(),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("A has non-finite entries"));
    }
    Ok(())
}

/// `E = tr(V^2)/2 - tr(A U^2)/2 - (b/4) tr(U^4)`, conserved for every
/// real square `A` by cyclicity of the trace.
pub fn matrix_energy(s: &MatrixState, a: &DMatrix<f64>, b: f64) -> Result<f64> {
    check_dims(a, s)?;
    Ok(energy_unchecked(s, a, b))
}

fn energy_unchecked(s: &MatrixState, a: &DMatrix<f64>, b: f64) -> f64 {
    let u2 = &s.u * &s.u;
    0.5 * (&s.v * &s.v).trace() - 0.5 * (a * &u2).trace() - 0.25 * b * (&u2 * &u2).trace()
}

/// First-order form on the flattened state `(U, V)`.
pub struct MatrixFlow {
    pub a: DMatrix<f64>,
    pub b: f64,
}

impl MatrixFlow {
    fn n(&self) -> usize {
        self.a.nrows()
    }
}

impl OdeSystem for MatrixFlow {
    fn dim(&self) -> usize {
        2 * self.n() * self.n()
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n();
        let m = n * n;
        let u = DMatrix::from_row_slice(n, n, &y[..m]);
        let acc = 0.5 * (&self.a * &u + &u * &self.a) + self.b * (&u * &u * &u);
        dy[..m].copy_from_slice(&y[m..]);
        for i in 0..n {
            for j in 0..n {
                dy[m + i * n + j] = acc[(i, j)];
            }
        }
    }

    fn admissible(&self, y: &[f64]) -> bool {
        y.iter().all(|v| v.is_finite())
    }

    fn check_state(&self, t: f64, y: &[f64]) -> Result<()> {
        let magnitude = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if magnitude > ESCAPE_THRESHOLD {
            return Err(Error::FiniteTimeEscape { time: t, magnitude });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MatrixTrajectory {
    pub a: DMatrix<f64>,
    pub b: f64,
    pub tol: f64,
    pub times: Vec<f64>,
    pub states: Vec<MatrixState>,
    pub energies: Vec<f64>,
    pub stats: StepStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixMetadata {
    pub n: usize,
    pub b: f64,
    /// Row-major entries of `A`.
    pub a: Vec<Vec<f64>>,
    pub tol: f64,
    pub stats: StepStats,
    pub energy_drift: f64,
    pub seed: Option<u64>,
}

impl MatrixTrajectory {
    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .fold(0.0f64, |m, e| m.max((e - e0).abs()))
    }

    pub fn final_state(&self) -> &MatrixState {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    pub fn csv_header(&self) -> String {
        let n = self.size();
        let mut cols = vec!["t".to_string()];
        for name in ["U", "V"] {
            for i in 1..=n {
                for j in 1..=n {
                    cols.push(format!("{name}_{i}_{j}"));
                }
            }
        }
        cols.push("E".into());
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for ((t, s), e) in self.times.iter().zip(&self.states).zip(&self.energies) {
            write_csv_row(
                w,
                std::iter::once(*t)
                    .chain(s.to_flat())
                    .chain(std::iter::once(*e)),
            )?;
        }
        Ok(())
    }

    pub fn metadata(&self, seed: Option<u64>) -> MatrixMetadata {
        let n = self.size();
        MatrixMetadata {
            n,
            b: self.b,
            a: (0..n)
                .map(|i| (0..n).map(|j| self.a[(i, j)]).collect())
                .collect(),
            tol: self.tol,
            stats: self.stats,
            energy_drift: self.energy_drift(),
            seed,
        }
    }
}

pub fn integrate_matrix(
    a: &DMatrix<f64>,
    b: f64,
    s0: &MatrixState,
    t_end: f64,
    tol: f64,
) -> Result<MatrixTrajectory> {
    integrate_matrix_with(a, b, s0, t_end, &SolverOptions::new(tol).keep_dense(false))
}

pub fn integrate_matrix_with(
    a: &DMatrix<f64>,
    b: f64,
    s0: &MatrixState,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<MatrixTrajectory> {
    check_dims(a, s0)?;
    if !b.is_finite() {
        return Err(Error::invalid("b must be finite"));
    }
    let n = s0.size();
    let flow = MatrixFlow { a: a.clone(), b };
    let sol = solve(&flow, 0.0, &s0.to_flat(), t_end, opts)?;
    let states: Vec<MatrixState> = sol
        .states
        .iter()
        .map(|y| MatrixState::from_flat(n, y))
        .collect();
    let energies = states.iter().map(|s| energy_unchecked(s, a, b)).collect();
    Ok(MatrixTrajectory {
        a: a.clone(),
        b,
        tol: opts.tol,
        times: sol.times,
        states,
        energies,
        stats: sol.stats,
    })
}

/// Integrates forward, negates `V`, integrates again and returns
/// `max|U_final - U0| + max|V_final + V0|`.
pub fn time_reversal_check(
    a: &DMatrix<f64>,
    b: f64,
    s0: &MatrixState,
    t_end: f64,
    tol: f64,
) -> Result<f64> {
    check_dims(a, s0)?;
    let n = s0.size();
    let m = n * n;
    let flow = MatrixFlow { a: a.clone(), b };
    let y0 = s0.to_flat();
    let opts = SolverOptions::new(tol).keep_dense(false);
    let forward = solve(&flow, 0.0, &y0, t_end, &opts)?;
    let mut mid = forward.states.last().expect("final state").clone();
    mid[m..].iter_mut().for_each(|v| *v = -*v);
    let back = solve(&flow, 0.0, &mid, t_end, &opts)?;
    let end = back.states.last().expect("final state");
    let du = (0..m).fold(0.0f64, |acc, i| acc.max((end[i] - y0[i]).abs()));
    let dv = (m..2 * m).fold(0.0f64, |acc, i| acc.max((end[i] + y0[i]).abs()));
    Ok(du + dv)
}
