//! Acceptance criteria 1-10. Prints one line per criterion and exits
//! non-zero if any fails.

mod common;

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use common::{
    linear_matrix_solution, minus_i, negative_definite, q_power, random_matrix_state, rng,
    weyl_by_words,
};
use nalgebra::DMatrix;
use oscq::dynamics::{
    build_oscillator, c_scaling_check, gradient_check, integrate_with, moderate_initial_conditions,
    newton_residual, oscillator_period, OscillatorKind, SolverOptions,
};
use oscq::matrix_oscillator::{integrate_matrix, MatrixState};
use oscq::poly_algebra::random::{random_in_p2, random_in_pinf1, random_polynomial};
use oscq::poly_algebra::{
    classify_subalgebra, int, moyal_bracket, parse_observable, poisson_bracket, rat, Gaussian,
    PolyObservable, SubalgebraTag, Symbol,
};
use oscq::quartic_manybody::{
    evaluate_H, integrate_manybody, random_rotation, rotation_invariance_check, ManyBodyState,
    ManyBodySystem, QuarticParams,
};
use oscq::schrodinger_spectra::{e0_scan, ground_state, SpectralProblem};
use oscq::weyl_algebra::{
    dirac_defect, gvh_contradiction, quantum_bracket, weyl_quantize, weyl_symbol, WeylOperator,
};
use rand::Rng;

type Outcome = Result<(bool, String), String>;

fn obs(s: &str) -> PolyObservable {
    parse_observable(s, Some(1)).unwrap()
}

fn gaussian(num: i64, den: i64) -> Gaussian {
    Gaussian::new(rat(num, den), int(0))
}

/// `(1/(i hbar)) [W(q^a p^b), W(q^c p^d)] psi`, every operator built by
/// averaging words.
fn word_bracket(x: (u32, u32), y: (u32, u32), psi: &Symbol) -> Symbol {
    let ab = weyl_by_words(x.0, x.1, &weyl_by_words(y.0, y.1, psi));
    let ba = weyl_by_words(y.0, y.1, &weyl_by_words(x.0, x.1, psi));
    (ab - ba).divide_by_hbar_power(1).unwrap().scale(&minus_i())
}

fn criterion_1() -> Outcome {
    let report = gvh_contradiction().map_err(|e| e.to_string())?;
    let expected = WeylOperator::parse("-1/3 * hbar^2", Some(1)).unwrap();
    let scalar = report.difference.scalar();
    let is_hbar2_multiple = scalar
        .as_ref()
        .is_some_and(|s| !s.is_zero() && s.terms().all(|(m, c)| m.hbar() == 2 && c.im == int(0)));
    // Moyal oracle: the symbol of (1/(i hbar)) [W(f), W(g)] is the Moyal bracket.
    let moyal = moyal_bracket(&obs("q^3"), &obs("p^3"))
        .unwrap()
        .scale(&rat(1, 9))
        - moyal_bracket(&obs("q^2 * p"), &obs("q * p^2"))
            .unwrap()
            .scale(&rat(1, 3));
    let moyal_ok = weyl_symbol(&report.difference) == moyal.to_symbol();
    // Word oracle: act on q^k with symmetrized words and p = -i hbar d/dq.
    let word_ok = (0..=5).all(|k| {
        let psi = q_power(k);
        let a = word_bracket((3, 0), (0, 3), &psi).scale(&gaussian(1, 9));
        let b = word_bracket((2, 1), (1, 2), &psi).scale(&gaussian(1, 3));
        a - b == (psi * Symbol::hbar(1).pow(2)).scale(&gaussian(-1, 3))
    });
    let ok = report.difference == expected && is_hbar2_multiple && moyal_ok && word_ok;
    Ok((
        ok,
        format!(
            "difference = {}, Moyal oracle {moyal_ok}, word oracle {word_ok}",
            weyl_symbol(&report.difference)
        ),
    ))
}

fn criterion_2() -> Outcome {
    let mut r = rng(2);
    for _ in 0..200 {
        let n = r.random_range(1..=3);
        let (f, g) = (random_in_p2(&mut r, n), random_in_p2(&mut r, n));
        if !dirac_defect(&f, &g).map_err(|e| e.to_string())?.is_zero() {
            return Ok((false, format!("P2 pair ({f}, {g}) has a defect")));
        }
    }
    for _ in 0..200 {
        let n = r.random_range(1..=3);
        let (f, g) = (random_in_pinf1(&mut r, n, 5), random_in_pinf1(&mut r, n, 5));
        if !dirac_defect(&f, &g).map_err(|e| e.to_string())?.is_zero() {
            return Ok((false, format!("P(inf,1) pair ({f}, {g}) has a defect")));
        }
    }
    let q3p3 = dirac_defect(&obs("q^3"), &obs("p^3")).unwrap();
    let q3p3_ok = q3p3 == WeylOperator::parse("-3/2 * hbar^2", Some(1)).unwrap();
    // GENERAL pairs: the defect is nonzero exactly when the Moyal correction is.
    let mut general = 0;
    let mut nonzero = 0;
    while general < 100 {
        let (f, g) = (
            random_polynomial(&mut r, 1, 5, 3),
            random_polynomial(&mut r, 1, 5, 3),
        );
        let is_general =
            |h: &PolyObservable| classify_subalgebra(h).unwrap() == SubalgebraTag::General;
        if !(is_general(&f) && is_general(&g)) {
            continue;
        }
        general += 1;
        let correction = moyal_bracket(&f, &g).unwrap() - poisson_bracket(&f, &g).unwrap();
        let defect = dirac_defect(&f, &g).unwrap();
        if weyl_symbol(&defect) != correction.to_symbol() {
            return Ok((
                false,
                format!("defect of ({f}, {g}) differs from its Moyal correction"),
            ));
        }
        nonzero += usize::from(!defect.is_zero());
    }
    let mixed = dirac_defect(&obs("q^2 * p"), &obs("q * p^2")).unwrap();
    // {f, f} and a quadratic partner carry no Moyal correction, so this pair
    // sits on the vanishing side of the dichotomy.
    let (f, g) = (obs("q^2 * p^2"), obs("q^2 * p^2 + q * p"));
    let self_pair = dirac_defect(&f, &g).unwrap().is_zero()
        && moyal_bracket(&f, &g).unwrap() == poisson_bracket(&f, &g).unwrap();
    let ok = q3p3_ok && !mixed.is_zero() && nonzero > 0 && self_pair;
    Ok((
        ok,
        format!(
            "400 quantizable pairs exact; defect(q^3, p^3) = {}; defect(q^2 p, q p^2) = {}; {nonzero}/100 random GENERAL pairs nonzero, all equal to their Moyal correction; (q^2 p^2, q^2 p^2 + q p) has no correction and defect zero: {self_pair}",
            weyl_symbol(&q3p3),
            weyl_symbol(&mixed),
        ),
    ))
}

fn criterion_3() -> Outcome {
    let mut r = rng(3);
    for _ in 0..500 {
        let n = r.random_range(1..=3);
        let [f, g, h] = [0; 3].map(|_| random_polynomial(&mut r, n, 5, 4));
        let pb = |a: &PolyObservable, b: &PolyObservable| poisson_bracket(a, b).unwrap();
        let fg = pb(&f, &g);
        let antisym = fg.clone() + pb(&g, &f);
        let jacobi = pb(&f, &pb(&g, &h)) + pb(&g, &pb(&h, &f)) + pb(&h, &fg);
        let leibniz = pb(&f, &(g.clone() * h.clone())) - fg * h.clone() - g.clone() * pb(&f, &h);
        if !(antisym.is_zero() && jacobi.is_zero() && leibniz.is_zero()) {
            return Ok((false, format!("axioms fail for ({f}, {g}, {h})")));
        }
    }
    Ok((
        true,
        "antisymmetry, Jacobi, Leibniz exact on 500 triples".into(),
    ))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    for _ in 0..100 {
        let n = r.random_range(1..=2);
        let (f, g) = (
            random_polynomial(&mut r, n, 6, 3),
            random_polynomial(&mut r, n, 6, 3),
        );
        let qb = quantum_bracket(&weyl_quantize(&f).unwrap(), &weyl_quantize(&g).unwrap()).unwrap();
        if weyl_symbol(&qb) != moyal_bracket(&f, &g).unwrap().to_symbol() {
            return Ok((false, format!("mismatch for ({f}, {g})")));
        }
    }
    Ok((
        true,
        "Moyal bracket = symbol of (1/(i hbar)) [W(f), W(g)] on 100 pairs".into(),
    ))
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for kind in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
        let osc = build_oscillator(kind, 1.0).unwrap();
        let mut kind_worst: f64 = 0.0;
        for (q0, p0) in moderate_initial_conditions(kind, 5, 5) {
            let est = oscillator_period(&osc, q0, p0, 1.5, 1e-11, 1e-6)
                .map_err(|e| format!("{kind} q0 = {q0}: {e}"))?;
            kind_worst = kind_worst.max((est.period - TAU).abs());
        }
        worst = worst.max(kind_worst);
        lines.push(format!("{kind} {kind_worst:.1e}"));
    }
    Ok((
        worst <= 1e-5 * TAU,
        format!("max |T - 2 pi|: {}", lines.join(", ")),
    ))
}

fn criterion_6() -> Outcome {
    let c = c_scaling_check(1.0, 2.0, 2.0, 2.0 * TAU, 1e-11).map_err(|e| e.to_string())?;
    let classical = c.max_q_deviation <= 1e-7 && c.max_p_deviation <= 1e-7;
    let scan = e0_scan(OscillatorKind::H2, &[1.0, 2.0, 4.0], 1.0, 2048, None)
        .map_err(|e| e.to_string())?;
    let rows: Vec<String> = scan
        .rows
        .iter()
        .map(|r| match (r.e0, r.e0_error) {
            (Some(e), Some(err)) => format!("E0({}) = {e:.8} +/- {err:.1e}", r.c),
            _ => format!(
                "E0({}) failed: {}",
                r.c,
                r.failure.clone().unwrap_or_default()
            ),
        })
        .collect();
    let quantum = scan.rows.iter().all(|r| r.e0.is_some()) && scan.pairwise_separated(10.0);
    Ok((
        classical && quantum,
        format!(
            "q dev {:.1e}, p dev {:.1e}; {}; gaps > 10x errors: {quantum}",
            c.max_q_deviation,
            c.max_p_deviation,
            rows.join(", ")
        ),
    ))
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut per_c = Vec::new();
    for c in [1.0, 5.0] {
        let osc = build_oscillator(OscillatorKind::H2, c).unwrap();
        let mut ics = vec![(2.0, 0.0)];
        ics.extend(moderate_initial_conditions(OscillatorKind::H2, 2, 7));
        let mut w: f64 = 0.0;
        for (q0, p0) in ics {
            let p0 = p0 * c;
            let traj = integrate_with(&osc, &[q0, p0], 2.0 * TAU, &SolverOptions::new(1e-12))
                .map_err(|e| e.to_string())?;
            w = w.max(newton_residual(&traj).map_err(|e| e.to_string())?);
        }
        per_c.push(format!("c = {c}: {w:.1e}"));
        worst = worst.max(w);
    }
    Ok((
        worst <= 1e-8,
        format!("max Newton residual over 2 periods: {}", per_c.join(", ")),
    ))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let tol = 1e-11;
    let mut drift: f64 = 0.0;
    let mut linear: f64 = 0.0;
    for n in [2, 3] {
        let a = negative_definite(n, &mut r);
        let s0 = random_matrix_state(n, 0.5, &mut r);
        for b in [0.0, 0.1] {
            let traj = integrate_matrix(&a, b, &s0, 20.0, tol).map_err(|e| e.to_string())?;
            drift = drift.max(traj.energy_drift());
            if b == 0.0 {
                for (t, s) in traj.times.iter().zip(&traj.states) {
                    let exact = linear_matrix_solution(&a, &s0, *t);
                    linear = linear.max((&s.u - &exact.u).amax());
                }
            }
        }
    }
    let minus_i = -DMatrix::<f64>::identity(2, 2);
    let s0 = MatrixState::new(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap();
    let harmonic = integrate_matrix(&minus_i, 0.0, &s0, TAU, 1e-12).map_err(|e| e.to_string())?;
    let ret = (&harmonic.final_state().u - &s0.u).amax();
    Ok((
        drift <= 1e-8 && linear <= 1e-7 && ret <= 1e-8,
        format!("energy drift {drift:.1e}, linear oracle {linear:.1e}, |U(2 pi) - U0| {ret:.1e}"),
    ))
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let coupling = |n: usize, r: &mut rand_chacha::ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            -1.0
                        } else {
                            0.3 * r.random_range(-1.0..1.0)
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mut grad: f64 = 0.0;
    for k in 0..100 {
        let n = 1 + k % 3;
        let params = QuarticParams::new(coupling(n, &mut r), r.random_range(-1.0..1.0)).unwrap();
        let system = ManyBodySystem::new(n, params).unwrap();
        let z = ManyBodyState::random(n, 1.0, &mut r).to_flat();
        let m = z.len() / 2;
        grad = grad.max(gradient_check(
            &system,
            &[(z[..m].to_vec(), z[m..].to_vec())],
        ));
    }
    let mut rot: f64 = 0.0;
    for k in 0..100 {
        let n = 1 + k % 3;
        let params = QuarticParams::new(coupling(n, &mut r), r.random_range(-1.0..1.0)).unwrap();
        let s = ManyBodyState::random(n, 1.0, &mut r);
        let h = evaluate_H(&s, &params).unwrap();
        let dev = rotation_invariance_check(&s, &params, &random_rotation(&mut r))
            .map_err(|e| e.to_string())?;
        rot = rot.max(dev / (1.0 + h.abs()));
    }
    let mut drift: f64 = 0.0;
    for b in [0.0, 0.01, 0.1] {
        let params = QuarticParams::new(coupling(2, &mut r), b).unwrap();
        let s0 = ManyBodyState::random(2, 0.3, &mut r);
        let traj = integrate_manybody(&s0, &params, 10.0, 1e-11).map_err(|e| e.to_string())?;
        drift = drift.max(traj.energy_drift());
    }
    Ok((
        grad <= 1e-6 && rot <= 1e-10 && drift <= 1e-8,
        format!("gradient rel. error {grad:.1e}, rotation rel. deviation {rot:.1e}, N=2 energy drift {drift:.1e}"),
    ))
}

fn criterion_10() -> Outcome {
    let harmonic = SpectralProblem::new(OscillatorKind::Harmonic, 1.0, 1.0, 1024)
        .map_err(|e| e.to_string())?;
    let res = ground_state(&harmonic, 3).map_err(|e| e.to_string())?;
    let levels = res
        .eigenvalues
        .iter()
        .enumerate()
        .all(|(n, e)| (e - (n as f64 + 0.5)).abs() <= 1e-3);
    let mut orders = vec![("harmonic", res.observed_order)];
    for kind in [OscillatorKind::H2, OscillatorKind::H3, OscillatorKind::H4] {
        let prob = SpectralProblem::new(kind, 1.0, 1.0, 1024).map_err(|e| e.to_string())?;
        orders.push((
            kind.as_str(),
            ground_state(&prob, 1)
                .map_err(|e| e.to_string())?
                .observed_order,
        ));
    }
    let orders_ok = orders
        .iter()
        .all(|(_, o)| o.is_some_and(|o| (1.8..=2.2).contains(&o)));
    let shown: Vec<String> = orders
        .iter()
        .map(|(k, o)| format!("{k} {:.3}", o.unwrap_or(f64::NAN)))
        .collect();
    Ok((
        levels && orders_ok,
        format!(
            "E0..2 = {:.6?}; observed orders {}",
            res.eigenvalues,
            shown.join(", ")
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(fn() -> Outcome, f64); 10] = [
        (criterion_1, 1.0),
        (criterion_2, 10.0),
        (criterion_3, 30.0),
        (criterion_4, 30.0),
        (criterion_5, 60.0),
        (criterion_6, 300.0),
        (criterion_7, 10.0),
        (criterion_8, 60.0),
        (criterion_9, 120.0),
        (criterion_10, 60.0),
    ];
    let mut failures = 0;
    for (i, (run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        let secs = start.elapsed().as_secs_f64();
        let pass = ok && secs < *limit;
        failures += usize::from(!pass);
        println!(
            "criterion {:>2}: {} | {detail} | {secs:.2} s (limit {limit} s)",
            i + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
