//! Oracles shared by the integration tests. None of them go through the
//! code paths they check.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use oscq::matrix_oscillator::MatrixState;
use oscq::poly_algebra::{int, rat, Gaussian, Monomial, Symbol};
use oscq::weyl_algebra::WeylOperator;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn minus_i() -> Gaussian {
    Gaussian::new(int(0), int(-1))
}

/// `psi(q) = q^k` as a one-degree-of-freedom symbol.
pub fn q_power(k: u32) -> Symbol {
    Symbol::from_terms(
        1,
        [(
            Monomial::new(vec![k], vec![0], 0),
            Gaussian::new(int(1), int(0)),
        )],
    )
}

/// `-i hbar d/dq`.
fn apply_p(psi: &Symbol) -> Symbol {
    psi.d_q(0) * Symbol::hbar(1).scale(&minus_i())
}

fn apply_q(psi: &Symbol) -> Symbol {
    psi.clone() * q_power(1)
}

/// Applies a word of position (`true`) and momentum (`false`) operators,
/// rightmost letter first.
pub fn apply_word(word: &[bool], psi: &Symbol) -> Symbol {
    word.iter().rev().fold(psi.clone(), |acc, &is_q| {
        if is_q {
            apply_q(&acc)
        } else {
            apply_p(&acc)
        }
    })
}

/// `W(q^a p^b) psi` as the average over all orderings of the word.
pub fn weyl_by_words(a: u32, b: u32, psi: &Symbol) -> Symbol {
    let len = (a + b) as usize;
    let mut total = Symbol::zero(1);
    let mut count = 0i64;
    for mask in 0u32..(1 << len) {
        if mask.count_ones() != a {
            continue;
        }
        let word: Vec<bool> = (0..len).map(|i| mask & (1 << i) != 0).collect();
        total = total + apply_word(&word, psi);
        count += 1;
    }
    total.scale(&Gaussian::new(rat(1, count), int(0)))
}

/// Applies a normal-ordered one-degree-of-freedom operator (momentum powers
/// act first).
pub fn apply_operator(op: &WeylOperator, psi: &Symbol) -> Symbol {
    let mut out = Symbol::zero(1);
    for (mono, c) in op.normal_ordered().terms() {
        let mut v = psi.clone();
        for _ in 0..mono.p_exps()[0] {
            v = apply_p(&v);
        }
        for _ in 0..mono.q_exps()[0] {
            v = apply_q(&v);
        }
        for _ in 0..mono.hbar() {
            v = v * Symbol::hbar(1);
        }
        out = out + v.scale(c);
    }
    out
}

/// `n!`.
pub fn factorial(n: u32) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

/// Closed-form solution of `U'' = (A U + U A) / 2` for symmetric negative
/// definite `A`, through the eigendecomposition of the row-major linear map.
pub fn linear_matrix_solution(a: &DMatrix<f64>, s0: &MatrixState, t: f64) -> MatrixState {
    let n = a.nrows();
    let m = n * n;
    let l = DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = (r / n, r % n);
        let (k, l) = (c / n, c % n);
        let mut v = 0.0;
        if l == j {
            v += 0.5 * a[(i, k)];
        }
        if k == i {
            v += 0.5 * a[(l, j)];
        }
        v
    });
    let eig = l.symmetric_eigen();
    let flat = s0.to_flat();
    let u0 = DVector::from_column_slice(&flat[..m]);
    let v0 = DVector::from_column_slice(&flat[m..]);
    let (cu, cv) = (
        eig.eigenvectors.transpose() * u0,
        eig.eigenvectors.transpose() * v0,
    );
    let mut ut = DVector::zeros(m);
    let mut vt = DVector::zeros(m);
    for k in 0..m {
        let lambda = eig.eigenvalues[k];
        assert!(lambda < 0.0, "oracle needs a negative definite map");
        let w = (-lambda).sqrt();
        let (s, c) = (w * t).sin_cos();
        ut[k] = c * cu[k] + s / w * cv[k];
        vt[k] = -w * s * cu[k] + c * cv[k];
    }
    let (ut, vt) = (&eig.eigenvectors * ut, &eig.eigenvectors * vt);
    let mut y: Vec<f64> = ut.iter().copied().collect();
    y.extend(vt.iter());
    MatrixState::from_flat(n, &y)
}

/// Random symmetric matrix with eigenvalues in `[-2, -0.5]`.
pub fn negative_definite(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    use rand::Rng;
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = m.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| -rng.random_range(0.5..2.0)));
    let a = &q * d * q.transpose();
    0.5 * (&a + a.transpose())
}

pub fn random_matrix_state(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> MatrixState {
    use rand::Rng;
    let u = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    let v = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    MatrixState::new(u, v).unwrap()
}
