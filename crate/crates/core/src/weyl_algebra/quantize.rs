use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::operator::{binomial, contractions, expand_product, imag_unit, WeylOperator};
use crate::error::{Error, Result};
use crate::poly_algebra::{Gaussian, Monomial, PolyObservable, Rational, Symbol};

/// `W(q^a p^b)` for one degree of freedom, normal ordered, via
/// `2^-a sum_k C(a, k) q^k p^b q^(a-k)`.
fn quantize_1d(a: u32, b: u32) -> Vec<(u32, u32, u32, Gaussian)> {
    let minus_i = -imag_unit();
    let mut acc: BTreeMap<(u32, u32, u32), Gaussian> = BTreeMap::new();
    let two_a = BigInt::one() << a as usize;
    for k in 0..=a {
        let weight = Gaussian::new(
            Rational::new(binomial(a, k), two_a.clone()),
            Rational::zero(),
        );
        for (j, c) in contractions(b, a - k, &minus_i) {
            let entry = acc.entry((a - j, b - j, j)).or_insert_with(Gaussian::zero);
            *entry = entry.clone() + weight.clone() * c;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((q, p, h), c)| (q, p, h, c))
        .collect()
}

/// Symmetric (Weyl) quantization. Linear, with `W(1) = I`, `W(q_i) = q_i`,
/// `W(p_i) = p_i`.
pub fn weyl_quantize(f: &PolyObservable) -> Result<WeylOperator> {
    if !f.is_classical() {
        return Err(Error::NotClassical);
    }
    let n = f.num_dof();
    let mut acc = BTreeMap::new();
    for (m, c) in f.terms() {
        let coeff = Gaussian::new(c.clone(), Rational::zero());
        expand_product(
            n,
            0,
            &coeff,
            |i| quantize_1d(m.q_exps()[i], m.p_exps()[i]),
            &mut acc,
        );
    }
    Ok(WeylOperator::from_normal_ordered(Symbol::from_terms(
        n, acc,
    )))
}

/// Weyl symbol of an operator, `exp(i hbar/2 sum_i d_qi d_pi)` applied to
/// its normal-ordered symbol. Inverse of [`weyl_quantize`] on classical
/// input, e.g. `q p` (operator) maps to `q p + i hbar/2`.
pub fn weyl_symbol(a: &WeylOperator) -> Symbol {
    let half_i = imag_unit() * Gaussian::new(Rational::new(1.into(), 2.into()), Rational::zero());
    let terms = a.normal_ordered();
    let n = terms.num_dof();
    let mut acc = BTreeMap::new();
    for (m, c) in terms.terms() {
        expand_product(
            n,
            m.hbar(),
            c,
            |i| {
                let (qa, pb) = (m.q_exps()[i], m.p_exps()[i]);
                contractions(qa, pb, &half_i)
                    .into_iter()
                    .map(|(j, c)| (qa - j, pb - j, j, c))
                    .collect()
            },
            &mut acc,
        );
    }
    Symbol::from_terms(n, acc)
}

/// Coefficients `c_j` (polynomials in hbar) of the ordering rule
/// `W(f(q) p^m) = sum_j c_j f^(j)(q) p^(m-j)` for one degree of freedom.
///
/// Read off from `W(q^m p^m)`: its `q^(m-j) p^(m-j)` part is
/// `c_j * m!/(m-j)!`. Linearity in `f` extends the rule to any smooth `f`.
pub fn ordered_kinetic_coefficients(m: u32) -> Vec<Symbol> {
    let w = weyl_quantize(&PolyObservable::monomial_1d(m, m, Rational::one()))
        .expect("classical monomial");
    (0..=m)
        .map(|j| {
            let falling: BigInt = ((m - j + 1)..=m).map(BigInt::from).product();
            let inv = Gaussian::new(Rational::new(BigInt::one(), falling), Rational::zero());
            let terms = w
                .normal_ordered()
                .terms()
                .filter(|(mono, _)| mono.q_exps()[0] == m - j && mono.p_exps()[0] == m - j)
                .map(|(mono, c)| {
                    (
                        Monomial::new(vec![0], vec![0], mono.hbar()),
                        c.clone() * inv.clone(),
                    )
                })
                .collect::<Vec<_>>();
            Symbol::from_terms(1, terms)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_algebra::{parse_observable, parse_symbol, rat};

    fn obs(s: &str) -> PolyObservable {
        parse_observable(s, Some(1)).unwrap()
    }

    fn op(s: &str) -> WeylOperator {
        WeylOperator::parse(s, Some(1)).unwrap()
    }

    #[test]
    fn basic_quantizations() {
        assert_eq!(weyl_quantize(&obs("1")).unwrap(), WeylOperator::identity(1));
        assert_eq!(weyl_quantize(&obs("q")).unwrap(), WeylOperator::q_hat(1, 0));
        assert_eq!(weyl_quantize(&obs("p")).unwrap(), WeylOperator::p_hat(1, 0));
        assert_eq!(
            weyl_quantize(&obs("q * p")).unwrap(),
            op("q * d - (0, 1/2) * hbar")
        );
        assert_eq!(weyl_quantize(&obs("q^3")).unwrap(), op("q^3"));
        assert!(matches!(
            weyl_quantize(&obs("hbar * q")),
            Err(Error::NotClassical)
        ));
    }

    #[test]
    fn symbols() {
        assert_eq!(weyl_symbol(&WeylOperator::identity(1)), Symbol::one(1));
        assert_eq!(
            weyl_symbol(&op("q * d")),
            parse_symbol("q * p + (0, 1/2) * hbar", Some(1)).unwrap()
        );
        let f = parse_observable("q1^3 * p1^2 * q2 * p2^4 - 7/3 * p1^5 + q2^2", None).unwrap();
        assert_eq!(weyl_symbol(&weyl_quantize(&f).unwrap()), f.to_symbol());
    }

    #[test]
    fn kinetic_ordering_for_p_squared() {
        let c = ordered_kinetic_coefficients(2);
        let i = imag_unit();
        assert_eq!(c[0], Symbol::one(1));
        assert_eq!(c[1], Symbol::hbar(1).scale(&-i));
        assert_eq!(
            c[2],
            Symbol::hbar(1)
                .pow(2)
                .scale(&Gaussian::new(rat(-1, 4), Rational::zero()))
        );
    }

    /// The rule read off at q^m must reproduce W(q^k p^m) for other k.
    #[test]
    fn kinetic_ordering_is_independent_of_the_q_power() {
        for m in 1..=4u32 {
            let c = ordered_kinetic_coefficients(m);
            for k in 0..=6u32 {
                let mut expected = WeylOperator::zero(1);
                for (j, cj) in c.iter().enumerate() {
                    let j = j as u32;
                    if j > k {
                        continue;
                    }
                    let falling: BigInt = ((k - j + 1)..=k).map(BigInt::from).product();
                    let mono = Symbol::monomial_1d(
                        k - j,
                        m - j,
                        Gaussian::new(Rational::from_integer(falling), Rational::zero()),
                    );
                    expected = expected + WeylOperator::from_normal_ordered(cj * &mono);
                }
                let w = weyl_quantize(&PolyObservable::monomial_1d(k, m, Rational::one())).unwrap();
                assert_eq!(w, expected, "m = {m}, k = {k}");
            }
        }
    }
}
