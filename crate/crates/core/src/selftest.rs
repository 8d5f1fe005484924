//! Quick invariant suite covering every module, used by `oscq selftest`.

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{
    build_oscillator, c_scaling_check, integrate_oscillator, moderate_initial_conditions,
    newton_residual, oscillator_period, OscillatorKind, SolverOptions,
};
use crate::error::Result;
use crate::matrix_oscillator::{integrate_matrix, MatrixState};
use crate::poly_algebra::random::{random_in_p2, random_in_pinf1, random_polynomial};
use crate::poly_algebra::{moyal_bracket, parse_observable, poisson_bracket};
use crate::quartic_manybody::{self as quartic, ManyBodyState, ManyBodySystem, QuarticParams};
use crate::schrodinger_spectra::{ground_state, SpectralProblem};
use crate::weyl_algebra::{
    dirac_defect, gvh_contradiction, quantum_bracket, weyl_quantize, weyl_symbol, WeylOperator,
};

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub checks: Vec<SelfCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Check = fn(&mut ChaCha8Rng) -> Result<(bool, String)>;

fn gvh(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let report = gvh_contradiction()?;
    let expected = WeylOperator::parse("-1/3 * hbar^2", Some(1))?;
    Ok((
        report.difference == expected,
        format!("difference = {}", report.difference),
    ))
}

fn dirac(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..30 {
        let (f, g) = (random_in_p2(rng, 2), random_in_p2(rng, 2));
        if !dirac_defect(&f, &g)?.is_zero() {
            return Ok((false, format!("P2 pair ({f}, {g}) has a defect")));
        }
        let (f, g) = (random_in_pinf1(rng, 2, 4), random_in_pinf1(rng, 2, 4));
        if !dirac_defect(&f, &g)?.is_zero() {
            return Ok((false, format!("P(inf,1) pair ({f}, {g}) has a defect")));
        }
    }
    let defect = dirac_defect(
        &parse_observable("q^3", Some(1))?,
        &parse_observable("p^3", Some(1))?,
    )?;
    let expected = WeylOperator::parse("-3/2 * hbar^2", Some(1))?;
    Ok((defect == expected, format!("defect(q^3, p^3) = {defect}")))
}

fn bracket_axioms(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..40 {
        let f = random_polynomial(rng, 2, 4, 4);
        let g = random_polynomial(rng, 2, 4, 4);
        let h = random_polynomial(rng, 2, 4, 4);
        let fg = poisson_bracket(&f, &g)?;
        let antisym = fg.clone() + poisson_bracket(&g, &f)?;
        let jacobi = poisson_bracket(&f, &poisson_bracket(&g, &h)?)?
            + poisson_bracket(&g, &poisson_bracket(&h, &f)?)?
            + poisson_bracket(&h, &fg)?;
        let leibniz = poisson_bracket(&f, &(g.clone() * h.clone()))?
            - (fg * h.clone() + g.clone() * poisson_bracket(&f, &h)?);
        if !(antisym.is_zero() && jacobi.is_zero() && leibniz.is_zero()) {
            return Ok((false, format!("axioms fail for ({f}, {g}, {h})")));
        }
    }
    Ok((true, "40 triples".into()))
}

fn moyal_weyl(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    for _ in 0..15 {
        let f = random_polynomial(rng, 2, 4, 3);
        let g = random_polynomial(rng, 2, 4, 3);
        let symbol = weyl_symbol(&quantum_bracket(&weyl_quantize(&f)?, &weyl_quantize(&g)?)?);
        if symbol != moyal_bracket(&f, &g)?.to_symbol() {
            return Ok((false, format!("mismatch for ({f}, {g})")));
        }
    }
    Ok((true, "15 pairs".into()))
}

fn isochronicity(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for kind in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
        let osc = build_oscillator(kind, 1.0)?;
        for (q0, p0) in moderate_initial_conditions(kind, 2, 11) {
            let est = oscillator_period(&osc, q0, p0, 1.5, 1e-11, 1e-6)?;
            worst = worst.max((est.period - TAU).abs());
        }
    }
    Ok((worst <= 1e-5 * TAU, format!("max |T - 2 pi| = {worst:e}")))
}

fn classical_c_invariance(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let r = c_scaling_check(1.0, 2.0, 2.0, TAU, 1e-11)?;
    let ok = r.max_q_deviation <= 1e-7 && r.max_p_deviation <= 1e-7;
    Ok((
        ok,
        format!(
            "q dev {:e}, p dev {:e}",
            r.max_q_deviation, r.max_p_deviation
        ),
    ))
}

fn newton(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for c in [1.0, 5.0] {
        let osc = build_oscillator(OscillatorKind::H2, c)?;
        let traj = integrate_oscillator(&osc, 2.0, 0.0, 2.0 * TAU, &SolverOptions::new(1e-12))?;
        worst = worst.max(newton_residual(&traj)?);
    }
    Ok((worst <= 1e-8, format!("max residual {worst:e}")))
}

fn matrix(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let n = 2;
    let u0 = DMatrix::from_row_slice(n, n, &[0.3, -0.2, 0.5, 0.1]);
    let s0 = MatrixState::new(
        u0.clone(),
        DMatrix::from_row_slice(n, n, &[0.0, 0.4, -0.1, 0.2]),
    )?;
    let harmonic = integrate_matrix(&-DMatrix::identity(n, n), 0.0, &s0, TAU, 1e-12)?;
    let ret = (&harmonic.final_state().u - &u0).amax();
    let quartic = integrate_matrix(&-DMatrix::identity(n, n), 0.1, &s0, 20.0, 1e-12)?;
    let drift = quartic.energy_drift();
    Ok((
        ret <= 1e-8 && drift <= 1e-8,
        format!("return {ret:e}, drift {drift:e}"),
    ))
}

fn manybody(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let n = 2;
    let params = QuarticParams::new(vec![vec![-1.0, 0.2], vec![0.2, -1.0]], 0.5)?;
    let system = ManyBodySystem::new(n, params.clone())?;
    let pts: Vec<_> = (0..5)
        .map(|_| {
            let z = ManyBodyState::random(n, 1.0, rng).to_flat();
            let m = z.len() / 2;
            (z[..m].to_vec(), z[m..].to_vec())
        })
        .collect();
    let grad = crate::dynamics::gradient_check(&system, &pts);
    let s = ManyBodyState::random(n, 1.0, rng);
    let rot: Matrix3<f64> = quartic::random_rotation(rng);
    let h = quartic::evaluate_H(&s, &params)?;
    let rel = quartic::rotation_invariance_check(&s, &params, &rot)? / h.abs().max(1.0);
    Ok((
        grad <= 1e-6 && rel <= 1e-10,
        format!("gradient {grad:e}, rotation {rel:e}"),
    ))
}

fn spectrum(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let res = ground_state(
        &SpectralProblem::new(OscillatorKind::Harmonic, 1.0, 1.0, 1024)?,
        3,
    )?;
    let levels = res
        .eigenvalues
        .iter()
        .enumerate()
        .all(|(n, e)| (e - (n as f64 + 0.5)).abs() <= 1e-3);
    let order = res.observed_order.unwrap_or(f64::NAN);
    let ok = levels && (1.8..=2.2).contains(&order) && res.nodeless;
    Ok((ok, format!("E = {:?}, order {order:.3}", res.eigenvalues)))
}

pub const CHECKS: [(&str, Check); 10] = [
    ("gvh", gvh),
    ("dirac", dirac),
    ("bracket-axioms", bracket_axioms),
    ("moyal-weyl", moyal_weyl),
    ("isochronicity", isochronicity),
    ("classical-c-invariance", classical_c_invariance),
    ("newton", newton),
    ("matrix", matrix),
    ("manybody", manybody),
    ("spectrum", spectrum),
];

/// Runs every check in order; a check that errors counts as failed.
pub fn run_selftest(seed: u64) -> SelftestReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let checks = CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = check(&mut rng).unwrap_or_else(|e| (false, e.to_string()));
            SelfCheck {
                name: name.to_string(),
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SelftestReport { seed, checks }
}
