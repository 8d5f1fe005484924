mod common;

use common::{linear_matrix_solution, negative_definite, random_matrix_state, rng};
use nalgebra::DMatrix;
use oscq::dynamics::gradient_check;
use oscq::matrix_oscillator::{integrate_matrix, matrix_energy, time_reversal_check, MatrixState};
use oscq::quartic_manybody::{
    energy_blocks, gradient, integrate_manybody, random_rotation, rotation_invariance_check,
    ManyBodyState, ManyBodySystem, QuarticParams,
};
use rand::Rng;

#[test]
fn matrix_linear_limit_matches_eigendecomposition() {
    let mut r = rng(21);
    for n in [1, 2, 3] {
        let a = negative_definite(n, &mut r);
        let s0 = random_matrix_state(n, 1.0, &mut r);
        let traj = integrate_matrix(&a, 0.0, &s0, 20.0, 1e-12).unwrap();
        let mut worst: f64 = 0.0;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let exact = linear_matrix_solution(&a, &s0, *t);
            worst = worst
                .max((&s.u - &exact.u).amax())
                .max((&s.v - &exact.v).amax());
        }
        assert!(worst <= 1e-7, "n = {n}: {worst:e}");
    }
}

#[test]
fn matrix_scale_covariance() {
    let mut r = rng(4);
    let n = 2;
    let a = negative_definite(n, &mut r);
    let s0 = random_matrix_state(n, 0.5, &mut r);
    let (b, lambda) = (0.1, -1.7);
    let scaled = MatrixState::new(s0.u.clone() * lambda, s0.v.clone() * lambda).unwrap();
    let base = integrate_matrix(&a, b, &s0, 10.0, 1e-12).unwrap();
    let other = integrate_matrix(&a, b / (lambda * lambda), &scaled, 10.0, 1e-12).unwrap();
    let (x, y) = (base.final_state(), other.final_state());
    assert!((&x.u * lambda - &y.u).amax() <= 1e-8 * (1.0 + y.u.amax()));
    assert!((&x.v * lambda - &y.v).amax() <= 1e-8 * (1.0 + y.v.amax()));
}

/// The conserved energy needs only trace cyclicity, so A may be any square
/// matrix; here a non-symmetric one near -I keeps the motion bounded.
#[test]
fn matrix_energy_conserved_for_general_coupling() {
    let mut r = rng(8);
    for n in [2, 3] {
        let a = DMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { -1.0 } else { 0.0 } + 0.3 * r.random_range(-1.0..1.0),
        );
        assert!((&a - a.transpose()).amax() > 0.0);
        let s0 = random_matrix_state(n, 0.3, &mut r);
        let tol = 1e-11;
        let traj = integrate_matrix(&a, 0.05, &s0, 10.0, tol).unwrap();
        let e0 = matrix_energy(&s0, &a, 0.05).unwrap();
        assert!(
            traj.energy_drift() <= 100.0 * tol * (1.0 + e0.abs()),
            "n = {n}: {:e}",
            traj.energy_drift()
        );
    }
}

#[test]
fn matrix_time_reversal() {
    let mut r = rng(13);
    let a = negative_definite(3, &mut r);
    let s0 = random_matrix_state(3, 0.5, &mut r);
    let err = time_reversal_check(&a, 0.05, &s0, 10.0, 1e-10).unwrap();
    assert!(err <= 1e-6, "{err:e}");
}

fn coupling(n: usize, r: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        -1.0
                    } else {
                        0.2 * r.random_range(-1.0..1.0)
                    }
                })
                .collect()
        })
        .collect()
}

#[test]
fn manybody_potential_is_velocity_independent() {
    let mut r = rng(2);
    for n in 1..=3 {
        let s = ManyBodyState::random(n, 1.0, &mut r);
        let g1 = gradient(&s, &QuarticParams::new(coupling(n, &mut r), 0.9).unwrap()).unwrap();
        let g2 = gradient(&s, &QuarticParams::new(coupling(n, &mut r), -0.4).unwrap()).unwrap();
        assert_eq!(g1.p, g2.p);
        assert_eq!(g1.pi, g2.pi);
    }
}

#[test]
fn manybody_quadratic_block_alone() {
    let mut r = rng(6);
    let n = 2;
    let params = QuarticParams::new(coupling(n, &mut r), 0.0).unwrap();
    let system = ManyBodySystem::new(n, params.clone()).unwrap();
    let pts: Vec<_> = (0..10)
        .map(|_| {
            let z = ManyBodyState::random(n, 1.0, &mut r).to_flat();
            let m = z.len() / 2;
            (z[..m].to_vec(), z[m..].to_vec())
        })
        .collect();
    assert!(gradient_check(&system, &pts) <= 1e-6);
    let s = ManyBodyState::random(n, 1.0, &mut r);
    assert_eq!(energy_blocks(&s, &params).unwrap().quartic, 0.0);
}

#[test]
fn manybody_energy_and_rotations() {
    let mut r = rng(17);
    let n = 2;
    for b in [0.0, 0.01] {
        let params = QuarticParams::new(coupling(n, &mut r), b).unwrap();
        let s0 = ManyBodyState::random(n, 0.3, &mut r);
        let traj = integrate_manybody(&s0, &params, 10.0, 1e-11).unwrap();
        assert!(
            traj.energy_drift() <= 1e-8,
            "b = {b}: {:e}",
            traj.energy_drift()
        );
    }
    for n in 1..=3 {
        let params = QuarticParams::new(coupling(n, &mut r), 0.8).unwrap();
        for _ in 0..20 {
            let s = ManyBodyState::random(n, 1.0, &mut r);
            let rot = random_rotation(&mut r);
            let h = oscq::quartic_manybody::evaluate_H(&s, &params).unwrap();
            assert!(
                rotation_invariance_check(&s, &params, &rot).unwrap() <= 1e-10 * (1.0 + h.abs())
            );
        }
    }
}
