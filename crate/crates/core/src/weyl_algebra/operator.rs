use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly_algebra::{
    parse_operator_terms, write_terms, Gaussian, Monomial, Rational, Symbol,
};

pub(crate) fn gaussian(re: Rational, im: Rational) -> Gaussian {
    Complex::new(re, im)
}

pub(crate) fn imag_unit() -> Gaussian {
    gaussian(Rational::zero(), Rational::one())
}

pub(crate) fn binomial(n: u32, k: u32) -> BigInt {
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

/// Terms `unit^j * j! * C(a, j) * C(b, j)` for `j = 0..=min(a, b)`.
///
/// With `unit = -i` this is the reordering `p^b q^a = sum_j (..) hbar^j
/// q^(a-j) p^(b-j)` of a single degree of freedom; with `unit = +-i/2` it is
/// the action of `exp(+-i hbar/2 d_q d_p)` on `q^a p^b`.
pub(crate) fn contractions(a: u32, b: u32, unit: &Gaussian) -> Vec<(u32, Gaussian)> {
    let mut power = Gaussian::one();
    let mut out = Vec::new();
    for j in 0..=a.min(b) {
        let weight = Rational::from_integer(factorial(j) * binomial(a, j) * binomial(b, j));
        out.push((j, power.clone() * Gaussian::new(weight, Rational::zero())));
        power = power * unit.clone();
    }
    out
}

/// Per-degree-of-freedom expansion of a monomial: for each dof, a list of
/// `(q exponent, p exponent, hbar exponent, coefficient)` alternatives.
/// The cartesian product over dofs, multiplied out, is the full expansion.
pub(crate) fn expand_product(
    num_dof: usize,
    base_hbar: u32,
    coeff: &Gaussian,
    per_dof: impl Fn(usize) -> Vec<(u32, u32, u32, Gaussian)>,
    out: &mut BTreeMap<Monomial, Gaussian>,
) {
    let mut partial: Vec<(Vec<u32>, Vec<u32>, u32, Gaussian)> =
        vec![(Vec::new(), Vec::new(), base_hbar, coeff.clone())];
    for i in 0..num_dof {
        let options = per_dof(i);
        let mut next = Vec::with_capacity(partial.len() * options.len());
        for (q, p, h, c) in &partial {
            for (qa, pa, ha, ca) in &options {
                let mut q = q.clone();
                let mut p = p.clone();
                q.push(*qa);
                p.push(*pa);
                next.push((q, p, h + ha, c.clone() * ca.clone()));
            }
        }
        partial = next;
    }
    for (q, p, h, c) in partial {
        let entry = out
            .entry(Monomial::new(q, p, h))
            .or_insert_with(Gaussian::zero);
        *entry = entry.clone() + c;
    }
}

/// Normal-ordered polynomial in position operators `q_i` and momentum
/// operators `p_i = -i hbar d/dq_i`, with Gaussian-rational coefficients
/// graded by hbar.
///
/// Each stored monomial `q^a p^b hbar^h` stands for the operator with every
/// position factor to the left of every momentum factor. In text form the
/// momentum slot is written `d1, d2, ..`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeylOperator {
    terms: Symbol,
}

impl WeylOperator {
    pub fn zero(num_dof: usize) -> Self {
        WeylOperator {
            terms: Symbol::zero(num_dof),
        }
    }

    pub fn identity(num_dof: usize) -> Self {
        WeylOperator {
            terms: Symbol::one(num_dof),
        }
    }

    /// Position operator of coordinate `i` (zero-based).
    pub fn q_hat(num_dof: usize, i: usize) -> Self {
        WeylOperator {
            terms: Symbol::q(num_dof, i),
        }
    }

    /// Momentum operator `-i hbar d/dq_i` (zero-based).
    pub fn p_hat(num_dof: usize, i: usize) -> Self {
        WeylOperator {
            terms: Symbol::p(num_dof, i),
        }
    }

    /// The scalar operator `hbar * I`.
    pub fn hbar(num_dof: usize) -> Self {
        WeylOperator {
            terms: Symbol::hbar(num_dof),
        }
    }

    /// Builds an operator from normal-ordered terms, read as `q^a p^b hbar^h`.
    pub fn from_normal_ordered(terms: Symbol) -> Self {
        WeylOperator { terms }
    }

    pub fn num_dof(&self) -> usize {
        self.terms.num_dof()
    }

    /// Normal-ordered terms; the `p` exponents count momentum operators.
    pub fn normal_ordered(&self) -> &Symbol {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_zero()
    }

    /// For a multiple of the identity, the scalar as a polynomial in hbar.
    pub fn scalar(&self) -> Option<Symbol> {
        self.terms
            .terms()
            .all(|(m, _)| m.q_degree() == 0 && m.p_degree() == 0)
            .then(|| self.terms.clone())
    }

    pub fn scale(&self, c: &Gaussian) -> Self {
        WeylOperator {
            terms: self.terms.scale(c),
        }
    }

    pub fn ensure_same_dof(&self, other: &Self) -> Result<()> {
        self.terms.ensure_same_dof(&other.terms)
    }

    /// Parses operator text such as `(1/1, 0/1) * q1 * d1 - (0/1, 1/2) * hbar`.
    pub fn parse(src: &str, num_dof: Option<usize>) -> Result<Self> {
        Ok(WeylOperator {
            terms: parse_operator_terms(src, num_dof)?,
        })
    }

    /// `(1 / (i hbar)) * self`; fails if some term carries no hbar.
    pub fn div_i_hbar(&self) -> Result<Self> {
        let lowered = self.terms.divide_by_hbar_power(1)?;
        Ok(WeylOperator {
            terms: lowered.scale(&-imag_unit()),
        })
    }
}

/// Operator product, re-normal-ordered with `[q_i, p_j] = i hbar delta_ij`.
pub fn op_mul(a: &WeylOperator, b: &WeylOperator) -> Result<WeylOperator> {
    a.ensure_same_dof(b)?;
    let n = a.num_dof();
    let minus_i = -imag_unit();
    let mut acc = BTreeMap::new();
    for (ma, ca) in a.terms.terms() {
        for (mb, cb) in b.terms.terms() {
            let coeff = ca.clone() * cb.clone();
            expand_product(
                n,
                ma.hbar() + mb.hbar(),
                &coeff,
                |i| {
                    let (qa, pa, qb, pb) = (
                        ma.q_exps()[i],
                        ma.p_exps()[i],
                        mb.q_exps()[i],
                        mb.p_exps()[i],
                    );
                    contractions(pa, qb, &minus_i)
                        .into_iter()
                        .map(|(j, c)| (qa + qb - j, pa + pb - j, j, c))
                        .collect()
                },
                &mut acc,
            );
        }
    }
    Ok(WeylOperator {
        terms: Symbol::from_terms(n, acc),
    })
}

/// `AB - BA`.
pub fn commutator(a: &WeylOperator, b: &WeylOperator) -> Result<WeylOperator> {
    Ok(op_mul(a, b)? - op_mul(b, a)?)
}

macro_rules! forward_op {
    ($tr:ident, $method:ident, $f:expr) => {
        impl $tr<&WeylOperator> for &WeylOperator {
            type Output = WeylOperator;
            fn $method(self, rhs: &WeylOperator) -> WeylOperator {
                WeylOperator {
                    terms: $f(&self.terms, &rhs.terms),
                }
            }
        }
        impl $tr<WeylOperator> for WeylOperator {
            type Output = WeylOperator;
            fn $method(self, rhs: WeylOperator) -> WeylOperator {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&WeylOperator> for WeylOperator {
            type Output = WeylOperator;
            fn $method(self, rhs: &WeylOperator) -> WeylOperator {
                (&self).$method(rhs)
            }
        }
    };
}

forward_op!(Add, add, |a: &Symbol, b: &Symbol| a + b);
forward_op!(Sub, sub, |a: &Symbol, b: &Symbol| a - b);

impl Neg for WeylOperator {
    type Output = WeylOperator;
    fn neg(self) -> WeylOperator {
        WeylOperator { terms: -self.terms }
    }
}

impl Neg for &WeylOperator {
    type Output = WeylOperator;
    fn neg(self) -> WeylOperator {
        WeylOperator {
            terms: -&self.terms,
        }
    }
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(self.terms.terms(), 'd', f)
    }
}

impl FromStr for WeylOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        WeylOperator::parse(s, None)
    }
}
