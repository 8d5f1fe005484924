use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::hamiltonian::{HamiltonianFlow, HamiltonianSystem};
use super::ode::{solve, DenseOutput, Method, SolverOptions, StepStats};
use super::oscillators::{Oscillator, VelocityForm};
use crate::error::{Error, Result};
use crate::io::write_csv_row;

/// Coordinates of the stored states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Chart {
    /// `(q_1..q_n, p_1..p_n)`.
    Canonical,
    /// `(q, dq/dt)` of a one-dimensional oscillator.
    Velocity,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub chart: Chart,
    pub dof: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// The energy along canonical trajectories; a regular first integral in
    /// the velocity chart.
    pub energies: Vec<f64>,
    pub stats: StepStats,
    pub tol: f64,
    pub method: Method,
    pub dense: Option<DenseOutput>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub chart: Chart,
    pub tol: f64,
    pub integrator: Method,
    pub seed: Option<u64>,
    pub stats: StepStats,
    pub energy_drift: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least the initial state")
    }

    /// `max_t |H(z(t)) - H(z(0))|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .fold(0.0f64, |m, e| m.max((e - e0).abs()))
    }

    pub fn csv_header(&self) -> String {
        let n = self.dof;
        let mut cols = vec!["t".to_string()];
        cols.extend((1..=n).map(|i| format!("q{i}")));
        match self.chart {
            Chart::Canonical => {
                cols.extend((1..=n).map(|i| format!("p{i}")));
                cols.push("H".into());
            }
            Chart::Velocity => {
                cols.extend((1..=n).map(|i| format!("v{i}")));
                cols.push("I".into());
            }
        }
        cols.join(",")
    }

    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{}", self.csv_header())?;
        for ((t, z), e) in self.times.iter().zip(&self.states).zip(&self.energies) {
            write_csv_row(
                w,
                std::iter::once(*t)
                    .chain(z.iter().copied())
                    .chain(std::iter::once(*e)),
            )?;
        }
        Ok(())
    }

    pub fn metadata(&self, seed: Option<u64>) -> RunMetadata {
        RunMetadata {
            system: self.system.clone(),
            params: self.params.clone(),
            chart: self.chart,
            tol: self.tol,
            integrator: self.method,
            seed,
            stats: self.stats,
            energy_drift: self.energy_drift(),
        }
    }
}

/// Integrates Hamilton's equations from `z0 = (q, p)` over `[0, t_end]`
/// with DOP853 at tolerance `tol`, recording every accepted step and
/// keeping the dense interpolant.
pub fn integrate(
    system: &dyn HamiltonianSystem,
    z0: &[f64],
    t_end: f64,
    tol: f64,
) -> Result<Trajectory> {
    integrate_with(system, z0, t_end, &SolverOptions::new(tol))
}

pub fn integrate_with(
    system: &dyn HamiltonianSystem,
    z0: &[f64],
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let n = system.dof();
    if z0.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            left: z0.len(),
            right: 2 * n,
        });
    }
    let sol = solve(&HamiltonianFlow(system), 0.0, z0, t_end, opts)?;
    let energies = sol
        .states
        .iter()
        .map(|z| system.energy(&z[..n], &z[n..]))
        .collect();
    Ok(Trajectory {
        system: system.label(),
        params: system.params(),
        chart: Chart::Canonical,
        dof: n,
        times: sol.times,
        states: sol.states,
        energies,
        stats: sol.stats,
        tol: opts.tol,
        method: opts.method,
        dense: sol.dense,
    })
}

/// Integrates the Newtonian equation of an oscillator from the canonical
/// state `(q0, p0)`; states are `(q, dq/dt)`.
pub fn integrate_velocity_form(
    oscillator: &Oscillator,
    q0: f64,
    p0: f64,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    let (form, y0) = VelocityForm::through(*oscillator, q0, p0)?;
    let sol = solve(&form, 0.0, &y0, t_end, opts)?;
    let energies = sol
        .states
        .iter()
        .map(|y| form.invariant(y[0], y[1]))
        .collect();
    Ok(Trajectory {
        system: oscillator.label(),
        params: oscillator.params(),
        chart: Chart::Velocity,
        dof: 1,
        times: sol.times,
        states: sol.states,
        energies,
        stats: sol.stats,
        tol: opts.tol,
        method: opts.method,
        dense: sol.dense,
    })
}

/// Canonical integration, or the velocity chart for oscillators whose
/// canonical orbits are singular (H4).
pub fn integrate_oscillator(
    oscillator: &Oscillator,
    q0: f64,
    p0: f64,
    t_end: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if oscillator.kind.needs_velocity_chart() {
        integrate_velocity_form(oscillator, q0, p0, t_end, opts)
    } else {
        integrate_with(oscillator, &[q0, p0], t_end, opts)
    }
}
