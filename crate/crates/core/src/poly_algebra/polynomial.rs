use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Rational real and imaginary parts.
pub type Gaussian = Complex<BigRational>;

/// Exponents of one term: `q_1^a_1 .. q_n^a_n p_1^b_1 .. p_n^b_n hbar^h`.
///
/// The derived ordering is lexicographic on (q-exponents, p-exponents,
/// hbar-power), which fixes the canonical term order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    q: Vec<u32>,
    p: Vec<u32>,
    hbar: u32,
}

impl Monomial {
    pub fn new(q: Vec<u32>, p: Vec<u32>, hbar: u32) -> Self {
        assert_eq!(
            q.len(),
            p.len(),
            "q and p exponent vectors differ in length"
        );
        Monomial { q, p, hbar }
    }

    pub fn one(num_dof: usize) -> Self {
        Monomial {
            q: vec![0; num_dof],
            p: vec![0; num_dof],
            hbar: 0,
        }
    }

    pub fn num_dof(&self) -> usize {
        self.q.len()
    }

    pub fn q_exps(&self) -> &[u32] {
        &self.q
    }

    pub fn p_exps(&self) -> &[u32] {
        &self.p
    }

    pub fn hbar(&self) -> u32 {
        self.hbar
    }

    pub fn q_degree(&self) -> u32 {
        self.q.iter().sum()
    }

    pub fn p_degree(&self) -> u32 {
        self.p.iter().sum()
    }

    /// Degree in the phase-space variables; hbar is not counted.
    pub fn total_degree(&self) -> u32 {
        self.q_degree() + self.p_degree()
    }

    pub fn is_constant(&self) -> bool {
        self.total_degree() == 0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + b).collect(),
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + b).collect(),
            hbar: self.hbar + other.hbar,
        }
    }

    pub(crate) fn with_hbar(&self, hbar: u32) -> Monomial {
        Monomial {
            q: self.q.clone(),
            p: self.p.clone(),
            hbar,
        }
    }
}

/// Coefficient field of a [`Polynomial`].
pub trait Coefficient:
    Clone + fmt::Debug + Eq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    fn from_rational(r: Rational) -> Self;

    /// Writes the coefficient in the text serialization grammar.
    fn write_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;

    /// True when the coefficient should be rendered with a leading minus
    /// and its negation printed instead.
    fn prints_negative(&self) -> bool {
        false
    }
}

pub(crate) fn write_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}/{}", r.numer(), r.denom())
}

impl Coefficient for Rational {
    fn from_rational(r: Rational) -> Self {
        r
    }

    fn write_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rational(self, f)
    }

    fn prints_negative(&self) -> bool {
        self.is_negative()
    }
}

impl Coefficient for Gaussian {
    fn from_rational(r: Rational) -> Self {
        Complex::new(r, Rational::zero())
    }

    fn write_coeff(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        write_rational(&self.re, f)?;
        write!(f, ", ")?;
        write_rational(&self.im, f)?;
        write!(f, ")")
    }
}

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Sparse polynomial in `q_1..q_n, p_1..p_n` and the formal grading
/// variable hbar.
///
/// Zero coefficients are never stored, so two equal polynomials have
/// identical term maps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial<C> {
    num_dof: usize,
    terms: BTreeMap<Monomial, C>,
}

/// Classical observables and their hbar-graded deformations.
pub type PolyObservable = Polynomial<Rational>;

/// Weyl symbols of general (not necessarily Hermitian) operators.
pub type Symbol = Polynomial<Gaussian>;

impl<C: Coefficient> Polynomial<C> {
    pub fn zero(num_dof: usize) -> Self {
        assert!(num_dof > 0, "num_dof must be positive");
        Polynomial {
            num_dof,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_dof: usize, c: C) -> Self {
        Self::from_term(Monomial::one(num_dof), c)
    }

    pub fn one(num_dof: usize) -> Self {
        Self::constant(num_dof, C::one())
    }

    pub fn from_term(mono: Monomial, c: C) -> Self {
        let mut out = Self::zero(mono.num_dof());
        out.add_term(mono, c);
        out
    }

    pub fn from_terms(num_dof: usize, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut out = Self::zero(num_dof);
        for (m, c) in terms {
            assert_eq!(
                m.num_dof(),
                num_dof,
                "monomial has wrong number of degrees of freedom"
            );
            out.add_term(m, c);
        }
        out
    }

    /// The coordinate `q_i` (zero-based index).
    pub fn q(num_dof: usize, i: usize) -> Self {
        let mut m = Monomial::one(num_dof);
        m.q[i] = 1;
        Self::from_term(m, C::one())
    }

    /// The momentum `p_i` (zero-based index).
    pub fn p(num_dof: usize, i: usize) -> Self {
        let mut m = Monomial::one(num_dof);
        m.p[i] = 1;
        Self::from_term(m, C::one())
    }

    pub fn hbar(num_dof: usize) -> Self {
        Self::from_term(
            Monomial::new(vec![0; num_dof], vec![0; num_dof], 1),
            C::one(),
        )
    }

    /// `c * q^a p^b` for one degree of freedom.
    pub fn monomial_1d(a: u32, b: u32, c: C) -> Self {
        Self::from_term(Monomial::new(vec![a], vec![b], 0), c)
    }

    pub fn num_dof(&self) -> usize {
        self.num_dof
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &Monomial) -> Option<&C> {
        self.terms.get(mono)
    }

    pub(crate) fn add_term(&mut self, mono: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&mono);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(mono, c);
            }
        }
    }

    pub fn ensure_same_dof(&self, other: &Self) -> Result<()> {
        if self.num_dof != other.num_dof {
            return Err(Error::DimensionMismatch {
                left: self.num_dof,
                right: other.num_dof,
            });
        }
        Ok(())
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_dof);
        }
        Polynomial {
            num_dof: self.num_dof,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(
            self.num_dof,
            self.terms.iter().map(|(m, c)| (m.clone(), f(c))),
        )
    }

    /// True when no term carries a power of hbar.
    pub fn is_classical(&self) -> bool {
        self.terms.keys().all(|m| m.hbar == 0)
    }

    pub fn max_hbar_power(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.hbar).max()
    }

    /// The coefficient of `hbar^k`, as an hbar-free polynomial.
    pub fn hbar_component(&self, k: u32) -> Self {
        Self::from_terms(
            self.num_dof,
            self.terms
                .iter()
                .filter(|(m, _)| m.hbar == k)
                .map(|(m, c)| (m.with_hbar(0), c.clone())),
        )
    }

    /// Multiplies every term by `hbar^-k`; fails if some term has a lower
    /// hbar power than `k`.
    pub fn divide_by_hbar_power(&self, k: u32) -> Result<Self> {
        let mut out = Self::zero(self.num_dof);
        for (m, c) in &self.terms {
            if m.hbar < k {
                return Err(Error::InvariantViolation(format!(
                    "term of hbar order {} cannot be divided by hbar^{k}",
                    m.hbar
                )));
            }
            out.add_term(m.with_hbar(m.hbar - k), c.clone());
        }
        Ok(out)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    pub fn p_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::p_degree).max()
    }

    pub fn q_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::q_degree).max()
    }

    /// Partial derivative with respect to `q_i`.
    pub fn d_q(&self, i: usize) -> Self {
        self.differentiate(i, true)
    }

    /// Partial derivative with respect to `p_i`.
    pub fn d_p(&self, i: usize) -> Self {
        self.differentiate(i, false)
    }

    fn differentiate(&self, i: usize, wrt_q: bool) -> Self {
        assert!(i < self.num_dof, "variable index out of range");
        let mut out = Self::zero(self.num_dof);
        for (m, c) in &self.terms {
            let e = if wrt_q { m.q[i] } else { m.p[i] };
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            if wrt_q {
                dm.q[i] -= 1;
            } else {
                dm.p[i] -= 1;
            }
            out.add_term(dm, c.clone() * C::from_rational(int(e as i64)));
        }
        out
    }

    fn combine(&self, other: &Self, negate: bool) -> Self {
        assert_eq!(self.num_dof, other.num_dof, "polynomials differ in num_dof");
        let mut out = self.clone();
        for (m, c) in &other.terms {
            let c = if negate { -c.clone() } else { c.clone() };
            out.add_term(m.clone(), c);
        }
        out
    }

    fn product(&self, other: &Self) -> Self {
        assert_eq!(self.num_dof, other.num_dof, "polynomials differ in num_dof");
        let mut out = Self::zero(self.num_dof);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(self.num_dof);
        for _ in 0..e {
            out = out.product(self);
        }
        out
    }
}

impl PolyObservable {
    /// Promotes the rational coefficients to Gaussian rationals.
    pub fn to_symbol(&self) -> Symbol {
        self.map_coefficients(|c| Gaussian::new(c.clone(), Rational::zero()))
    }
}

impl Symbol {
    pub fn real_part(&self) -> PolyObservable {
        self.map_coefficients(|c| c.re.clone())
    }

    pub fn imag_part(&self) -> PolyObservable {
        self.map_coefficients(|c| c.im.clone())
    }

    /// Drops the (vanishing) imaginary part; fails if it is nonzero.
    pub fn into_real(self) -> Result<PolyObservable> {
        if !self.imag_part().is_zero() {
            return Err(Error::InvariantViolation(format!(
                "symbol has a nonzero imaginary part: {}",
                self.imag_part()
            )));
        }
        Ok(self.real_part())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<C: Coefficient> $trait<&Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                $body(self, rhs)
            }
        }
        impl<C: Coefficient> $trait<Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                $body(&self, &rhs)
            }
        }
        impl<C: Coefficient> $trait<&Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                $body(&self, rhs)
            }
        }
        impl<C: Coefficient> $trait<Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                $body(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a: &Polynomial<C>, b: &Polynomial<C>| a
    .combine(b, false));
forward_binop!(Sub, sub, |a: &Polynomial<C>, b: &Polynomial<C>| a
    .combine(b, true));
forward_binop!(Mul, mul, |a: &Polynomial<C>, b: &Polynomial<C>| a
    .product(b));

impl<C: Coefficient> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.scale(&-C::one())
    }
}

pub(crate) fn write_factors(
    m: &Monomial,
    momentum_letter: char,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    let factor = |name: String, e: u32, f: &mut fmt::Formatter<'_>| -> fmt::Result {
        match e {
            0 => Ok(()),
            1 => write!(f, " * {name}"),
            _ => write!(f, " * {name}^{e}"),
        }
    };
    for (i, &e) in m.q.iter().enumerate() {
        factor(format!("q{}", i + 1), e, f)?;
    }
    for (i, &e) in m.p.iter().enumerate() {
        factor(format!("{momentum_letter}{}", i + 1), e, f)?;
    }
    factor("hbar".to_string(), m.hbar, f)
}

pub(crate) fn write_terms<'a, C: Coefficient>(
    terms: impl Iterator<Item = (&'a Monomial, &'a C)>,
    momentum_letter: char,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    let mut first = true;
    for (m, c) in terms {
        if c.prints_negative() {
            write!(f, "{}", if first { "-" } else { " - " })?;
            (-c.clone()).write_coeff(f)?;
        } else {
            if !first {
                write!(f, " + ")?;
            }
            c.write_coeff(f)?;
        }
        write_factors(m, momentum_letter, f)?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl<C: Coefficient> fmt::Display for Polynomial<C> {
    /// `num/den * q1^a1 * .. * pn^bn * hbar^h` terms joined by `+`/`-`,
    /// in canonical order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(self.terms.iter(), 'p', f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> PolyObservable {
        PolyObservable::q(1, 0)
    }
    fn p() -> PolyObservable {
        PolyObservable::p(1, 0)
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let f = &q() - &q();
        assert!(f.is_zero());
        assert_eq!(f, PolyObservable::zero(1));
    }

    #[test]
    fn product_and_power() {
        let f = (&q() + &p()).pow(2);
        let expected = q().pow(2) + (q() * p()).scale(&int(2)) + p().pow(2);
        assert_eq!(f, expected);
    }

    #[test]
    fn derivatives() {
        let f = q().pow(3) * p().pow(2);
        assert_eq!(f.d_q(0), (q().pow(2) * p().pow(2)).scale(&int(3)));
        assert_eq!(f.d_p(0), (q().pow(3) * p()).scale(&int(2)));
        assert!(PolyObservable::one(1).d_q(0).is_zero());
    }

    #[test]
    fn hbar_components() {
        let h = PolyObservable::hbar(1);
        let f = &q() * &p() + h.pow(2).scale(&rat(-3, 2));
        assert!(!f.is_classical());
        assert_eq!(f.hbar_component(0), q() * p());
        assert_eq!(f.hbar_component(2), PolyObservable::constant(1, rat(-3, 2)));
        assert_eq!(f.max_hbar_power(), Some(2));
    }

    #[test]
    fn display_is_canonical() {
        let f = q().pow(2).scale(&int(9)) * p().pow(2)
            + PolyObservable::hbar(1).pow(2).scale(&rat(-3, 2));
        assert_eq!(f.to_string(), "-3/2 * hbar^2 + 9/1 * q1^2 * p1^2");
        assert_eq!(PolyObservable::zero(2).to_string(), "0");
    }
}
