use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::polynomial::{Monomial, PolyObservable, Rational};
use crate::error::{Error, Result};

fn check_classical_pair(f: &PolyObservable, g: &PolyObservable) -> Result<()> {
    f.ensure_same_dof(g)?;
    if !f.is_classical() || !g.is_classical() {
        return Err(Error::NotClassical);
    }
    Ok(())
}

/// `{f, g} = sum_i (df/dq_i dg/dp_i - df/dp_i dg/dq_i)`.
pub fn poisson_bracket(f: &PolyObservable, g: &PolyObservable) -> Result<PolyObservable> {
    check_classical_pair(f, g)?;
    Ok(poisson_unchecked(f, g))
}

pub(crate) fn poisson_unchecked(f: &PolyObservable, g: &PolyObservable) -> PolyObservable {
    let mut out = PolyObservable::zero(f.num_dof());
    for i in 0..f.num_dof() {
        out = out + f.d_q(i) * g.d_p(i) - f.d_p(i) * g.d_q(i);
    }
    out
}

/// n! / (n-k)!
fn falling(n: u32, k: u32) -> BigInt {
    (n - k + 1..=n).fold(BigInt::one(), |acc, v| acc * BigInt::from(v))
}

fn factorial(k: u32) -> BigInt {
    falling(k, k)
}

/// Moyal bracket, expanded as
/// `sum_k (-1)^k (hbar/2)^(2k) / (2k+1)! * f Lambda^(2k+1) g`
/// with `Lambda = sum_i (<-d_qi ->d_pi - <-d_pi ->d_qi)`.
///
/// The series terminates for polynomials. The hbar^0 part is the Poisson
/// bracket.
pub fn moyal_bracket(f: &PolyObservable, g: &PolyObservable) -> Result<PolyObservable> {
    check_classical_pair(f, g)?;
    let n = f.num_dof();
    let mut out = PolyObservable::zero(n);
    for (ma, ca) in f.terms() {
        for (mb, cb) in g.terms() {
            let coeff = ca * cb;
            for (mono, c) in moyal_monomial_pair(ma, mb) {
                out.add_term(mono, c * &coeff);
            }
        }
    }
    Ok(out)
}

/// Contribution of `x^a (star-bracket) x^b` for two classical monomials.
///
/// `Lambda^m / m!` expands multinomially into choices `(s_i, t_i)` with
/// `sum (s_i + t_i) = m`: `s_i` derivatives `d_qi` on the left factor paired
/// with `d_pi` on the right, `t_i` derivatives `d_pi` on the left paired with
/// `d_qi` on the right, weighted by `prod (-1)^t_i / (s_i! t_i!)`.
fn moyal_monomial_pair(a: &Monomial, b: &Monomial) -> Vec<(Monomial, Rational)> {
    let n = a.num_dof();
    // Partial expansions over the first i degrees of freedom:
    // (derivative order m so far, q exps, p exps, weight).
    type Partial = (u32, Vec<u32>, Vec<u32>, Rational);
    let mut partials: Vec<Partial> = vec![(0, Vec::new(), Vec::new(), Rational::one())];
    for i in 0..n {
        let (aq, ap, bq, bp) = (a.q_exps()[i], a.p_exps()[i], b.q_exps()[i], b.p_exps()[i]);
        let mut next = Vec::new();
        for (m, qs, ps, w) in &partials {
            for s in 0..=aq.min(bp) {
                for t in 0..=ap.min(bq) {
                    let mut weight = Rational::new(
                        falling(aq, s) * falling(ap, t) * falling(bp, s) * falling(bq, t),
                        factorial(s) * factorial(t),
                    );
                    if t % 2 == 1 {
                        weight = -weight;
                    }
                    let mut q = qs.clone();
                    let mut p = ps.clone();
                    q.push(aq - s + bq - t);
                    p.push(ap - t + bp - s);
                    next.push((m + s + t, q, p, w * weight));
                }
            }
        }
        partials = next;
    }
    let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for (m, q, p, w) in partials {
        if m % 2 == 0 {
            continue;
        }
        // (-1)^k (1/2)^(2k) with m = 2k + 1; hbar power 2k.
        let k = (m - 1) / 2;
        let mut scale = Rational::new(BigInt::one(), BigInt::from(4u32).pow(k));
        if k % 2 == 1 {
            scale = -scale;
        }
        let mono = Monomial::new(q, p, a.hbar() + b.hbar() + 2 * k);
        *acc.entry(mono).or_insert_with(Rational::zero) += w * scale;
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// True iff `{f, H}` vanishes identically.
pub fn is_constant_of_motion(f: &PolyObservable, hamiltonian: &PolyObservable) -> Result<bool> {
    Ok(poisson_bracket(f, hamiltonian)?.is_zero())
}

/// True iff every pairwise Poisson bracket vanishes.
pub fn in_involution(fs: &[PolyObservable]) -> Result<bool> {
    let first = fs
        .first()
        .ok_or_else(|| Error::invalid("empty list of observables"))?;
    for f in fs {
        first.ensure_same_dof(f)?;
    }
    for (i, f) in fs.iter().enumerate() {
        for g in &fs[i + 1..] {
            if !poisson_bracket(f, g)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Incremental row echelon form over the rationals, rows keyed by their
/// largest monomial.
#[derive(Debug, Default)]
pub(crate) struct SpanBasis {
    rows: BTreeMap<Monomial, BTreeMap<Monomial, Rational>>,
}

impl SpanBasis {
    fn reduce(&self, v: &PolyObservable) -> BTreeMap<Monomial, Rational> {
        let mut v: BTreeMap<Monomial, Rational> =
            v.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        // Each subtraction removes the current leading monomial and only
        // introduces smaller ones, so scanning downwards terminates.
        let mut cursor: Option<Monomial> = None;
        loop {
            let lead = match &cursor {
                None => v.keys().next_back().cloned(),
                Some(c) => v.range(..c.clone()).next_back().map(|(m, _)| m.clone()),
            };
            let Some(lead) = lead else { break };
            if let Some(row) = self.rows.get(&lead) {
                let factor = v[&lead].clone();
                for (m, c) in row {
                    let entry = v.entry(m.clone()).or_insert_with(Rational::zero);
                    *entry -= c * &factor;
                    if entry.is_zero() {
                        v.remove(m);
                    }
                }
            }
            cursor = Some(lead);
        }
        v
    }

    /// Adds `v` to the basis; returns false if it was already in the span.
    pub(crate) fn insert(&mut self, v: &PolyObservable) -> bool {
        let mut r = self.reduce(v);
        let Some((lead, pivot)) = r.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) else {
            return false;
        };
        for c in r.values_mut() {
            *c /= pivot.clone();
        }
        self.rows.insert(lead, r);
        true
    }

    pub(crate) fn contains(&self, v: &PolyObservable) -> bool {
        self.reduce(v).is_empty()
    }
}

/// True iff every pairwise Poisson bracket of the basis elements lies in
/// their rational linear span.
pub fn bracket_closed(basis: &[PolyObservable]) -> Result<bool> {
    let first = basis.first().ok_or_else(|| Error::invalid("empty basis"))?;
    let mut span = SpanBasis::default();
    for b in basis {
        first.ensure_same_dof(b)?;
        span.insert(b);
    }
    for (i, f) in basis.iter().enumerate() {
        for g in &basis[i + 1..] {
            if !span.contains(&poisson_bracket(f, g)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
