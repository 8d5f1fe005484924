mod common;

use common::{apply_operator, q_power, rng, weyl_by_words};
use oscq::poly_algebra::random::{random_in_p2, random_in_pinf1, random_polynomial};
use oscq::poly_algebra::{
    classify_subalgebra, int, moyal_bracket, parse_observable, poisson_bracket, rat, Gaussian,
    PolyObservable, SubalgebraTag,
};
use oscq::weyl_algebra::{dirac_defect, op_mul, quantum_bracket, weyl_quantize, weyl_symbol};
use proptest::prelude::*;

fn poly(seed: u64, n: usize, degree: u32) -> PolyObservable {
    random_polynomial(&mut rng(seed), n, degree, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn poisson_axioms(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let f = random_polynomial(&mut r, n, 4, 4);
        let g = random_polynomial(&mut r, n, 4, 4);
        let h = random_polynomial(&mut r, n, 4, 4);
        let fg = poisson_bracket(&f, &g).unwrap();
        prop_assert!((fg.clone() + poisson_bracket(&g, &f).unwrap()).is_zero());
        let jacobi = poisson_bracket(&f, &poisson_bracket(&g, &h).unwrap()).unwrap()
            + poisson_bracket(&g, &poisson_bracket(&h, &f).unwrap()).unwrap()
            + poisson_bracket(&h, &fg).unwrap();
        prop_assert!(jacobi.is_zero());
        let leibniz = poisson_bracket(&f, &(g.clone() * h.clone())).unwrap()
            - fg * h.clone()
            - g * poisson_bracket(&f, &h).unwrap();
        prop_assert!(leibniz.is_zero());
    }

    #[test]
    fn moyal_degenerates_to_poisson(seed in any::<u64>(), n in 1usize..=2) {
        let (f, g) = (poly(seed, n, 5), poly(seed ^ 0x9e37, n, 5));
        let m = moyal_bracket(&f, &g).unwrap();
        prop_assert_eq!(m.hbar_component(0), poisson_bracket(&f, &g).unwrap());
        prop_assert!((m + moyal_bracket(&g, &f).unwrap()).is_zero());
    }

    #[test]
    fn moyal_equals_poisson_against_quadratics(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let f = random_polynomial(&mut r, n, 5, 4);
        let g = random_in_p2(&mut r, n);
        prop_assert_eq!(moyal_bracket(&f, &g).unwrap(), poisson_bracket(&f, &g).unwrap());
    }

    #[test]
    fn moyal_is_symbol_of_quantum_bracket(seed in any::<u64>(), n in 1usize..=2) {
        let (f, g) = (poly(seed, n, 5), poly(seed.wrapping_add(1), n, 5));
        let qb = quantum_bracket(&weyl_quantize(&f).unwrap(), &weyl_quantize(&g).unwrap()).unwrap();
        prop_assert_eq!(weyl_symbol(&qb), moyal_bracket(&f, &g).unwrap().to_symbol());
    }

    #[test]
    fn operator_product_is_associative(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let [a, b, c] = [0; 3].map(|_| weyl_quantize(&random_polynomial(&mut r, n, 3, 3)).unwrap());
        let left = op_mul(&op_mul(&a, &b).unwrap(), &c).unwrap();
        let right = op_mul(&a, &op_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn quantization_is_linear_and_invertible(seed in any::<u64>(), n in 1usize..=3) {
        let (f, g) = (poly(seed, n, 5), poly(seed ^ 0x51, n, 5));
        let (alpha, beta) = (rat(-3, 4), rat(5, 2));
        let lhs = weyl_quantize(&(f.scale(&alpha) + g.scale(&beta))).unwrap();
        let to_g = |r| Gaussian::new(r, int(0));
        let rhs = weyl_quantize(&f).unwrap().scale(&to_g(alpha)) + weyl_quantize(&g).unwrap().scale(&to_g(beta));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(weyl_symbol(&weyl_quantize(&f).unwrap()), f.to_symbol());
    }

    #[test]
    fn dirac_holds_on_quantizable_subalgebras(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (f, g) = (random_in_p2(&mut r, n), random_in_p2(&mut r, n));
        prop_assert!(dirac_defect(&f, &g).unwrap().is_zero());
        let (f, g) = (random_in_pinf1(&mut r, n, 5), random_in_pinf1(&mut r, n, 5));
        prop_assert!(dirac_defect(&f, &g).unwrap().is_zero());
    }

    #[test]
    fn dirac_defect_symbol_is_moyal_correction(seed in any::<u64>()) {
        let (f, g) = (poly(seed, 1, 5), poly(seed ^ 0xabc, 1, 5));
        let expected = moyal_bracket(&f, &g).unwrap() - poisson_bracket(&f, &g).unwrap();
        prop_assert_eq!(weyl_symbol(&dirac_defect(&f, &g).unwrap()), expected.to_symbol());
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let f = poly(seed, n, 5);
        prop_assert_eq!(parse_observable(&f.to_string(), Some(n)).unwrap(), f);
    }
}

/// McCoy's formula checked against the average over all orderings of the
/// operator word, acting on test polynomials.
#[test]
fn weyl_quantization_matches_symmetrized_words() {
    for a in 0..=3u32 {
        for b in 0..=3u32 {
            let op = weyl_quantize(&PolyObservable::monomial_1d(a, b, int(1))).unwrap();
            for k in 0..=4 {
                let psi = q_power(k);
                assert_eq!(
                    apply_operator(&op, &psi),
                    weyl_by_words(a, b, &psi),
                    "q^{a} p^{b} on q^{k}"
                );
            }
        }
    }
}

#[test]
fn classification_examples() {
    let tag = |s: &str| classify_subalgebra(&parse_observable(s, Some(1)).unwrap()).unwrap();
    assert_eq!(tag("q + p + 3"), SubalgebraTag::P1);
    assert_eq!(tag("q^2 + p^2"), SubalgebraTag::P2);
    assert_eq!(tag("q^5 * p + q^2"), SubalgebraTag::PInf1);
    assert_eq!(tag("q^2 * p^2"), SubalgebraTag::General);
    assert_eq!(tag("p^3"), SubalgebraTag::General);
}
