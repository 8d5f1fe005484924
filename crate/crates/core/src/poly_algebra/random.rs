//! Seeded generators of random observables for property checks.

use rand::Rng;

use super::polynomial::{rat, Monomial, PolyObservable};

fn random_coefficient<R: Rng>(rng: &mut R) -> num_rational::BigRational {
    let mut num = rng.random_range(1..=9i64);
    if rng.random_bool(0.5) {
        num = -num;
    }
    rat(num, rng.random_range(1..=4i64))
}

/// Random exponent split of a total degree across `2 * num_dof` slots.
fn random_exponents<R: Rng>(rng: &mut R, num_dof: usize, degree: u32) -> (Vec<u32>, Vec<u32>) {
    let mut slots = vec![0u32; 2 * num_dof];
    for _ in 0..degree {
        slots[rng.random_range(0..2 * num_dof)] += 1;
    }
    let p = slots.split_off(num_dof);
    (slots, p)
}

/// Classical polynomial with up to `max_terms` terms of total degree at most
/// `max_degree`.
pub fn random_polynomial<R: Rng>(
    rng: &mut R,
    num_dof: usize,
    max_degree: u32,
    max_terms: usize,
) -> PolyObservable {
    let n_terms = rng.random_range(1..=max_terms.max(1));
    let terms = (0..n_terms).map(|_| {
        let degree = rng.random_range(0..=max_degree);
        let (q, p) = random_exponents(rng, num_dof, degree);
        (Monomial::new(q, p, 0), random_coefficient(rng))
    });
    PolyObservable::from_terms(num_dof, terms.collect::<Vec<_>>())
}

/// Random element of P2: total degree at most two.
pub fn random_in_p2<R: Rng>(rng: &mut R, num_dof: usize) -> PolyObservable {
    random_polynomial(rng, num_dof, 2, 6)
}

/// Random element of P(inf,1): at most linear in the momenta, arbitrary
/// polynomial dependence on the coordinates (degree at most `max_q_degree`).
pub fn random_in_pinf1<R: Rng>(rng: &mut R, num_dof: usize, max_q_degree: u32) -> PolyObservable {
    let n_terms = rng.random_range(1..=5);
    let terms: Vec<_> = (0..n_terms)
        .map(|_| {
            let qdeg = rng.random_range(0..=max_q_degree);
            let mut q = vec![0u32; num_dof];
            for _ in 0..qdeg {
                q[rng.random_range(0..num_dof)] += 1;
            }
            let mut p = vec![0u32; num_dof];
            if rng.random_bool(0.7) {
                p[rng.random_range(0..num_dof)] = 1;
            }
            (Monomial::new(q, p, 0), random_coefficient(rng))
        })
        .collect();
    PolyObservable::from_terms(num_dof, terms)
}
