//! Numerical integration of the isochronous oscillators and related
//! checks: period detection, the Newtonian form, c-scaling and time
//! reversal.

mod analysis;
mod dop853;
mod dop853_tableau;
mod hamiltonian;
mod midpoint;
mod ode;
mod oscillators;
mod trajectory;

pub use analysis::{
    c_scaling_check, detect_period, moderate_initial_conditions, moderate_q_range, newton_residual,
    oscillator_period, oscillator_time_reversal, random_interior_points, time_reversal_check,
    time_reversal_ode, CScalingReport, PeriodEstimate, C_SCALING_SAMPLES,
};
pub use hamiltonian::{gradient_check, HamiltonianFlow, HamiltonianSystem};
pub use ode::{
    solve, validate_tol, DenseOutput, Method, OdeSystem, Sampling, Solution, SolverOptions,
    StepStats, MAX_TOL, MIN_TOL,
};
pub use oscillators::{build_oscillator, Oscillator, OscillatorKind, VelocityForm, GUARD_BAND};
pub use trajectory::{
    integrate, integrate_oscillator, integrate_velocity_form, integrate_with, Chart, RunMetadata,
    Trajectory,
};
