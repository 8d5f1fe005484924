//! Parser for the polynomial text grammar.
//!
//! ```text
//! poly   := ["+"|"-"] term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := int ["/" int]                      rational coefficient
//!         | "(" signed "," signed ")"          Gaussian coefficient
//!         | var ["^" int]                      q1.., p1.. (or d1..), hbar
//! ```
//!
//! Whitespace is ignored everywhere. A bare `q`, `p` or `d` means index 1.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::polynomial::{Gaussian, Monomial, PolyObservable, Polynomial, Rational, Symbol};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Int(BigInt),
    Ident(String),
    Slash,
    Star,
    Caret,
    Plus,
    Minus,
    LParen,
    RParen,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match ch {
            '/' => Token::Slash,
            '*' => Token::Star,
            '^' => Token::Caret,
            '+' => Token::Plus,
            '-' => Token::Minus,
            '(' => Token::LParen,
            ')' => Token::RParen,
            ',' => Token::Comma,
            c if c.is_ascii_digit() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                out.push((start, Token::Int(BigInt::from_str(&src[start..i]).unwrap())));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Token::Ident(src[start..i].to_string())));
                continue;
            }
            other => {
                return Err(Error::Parse {
                    pos: start,
                    msg: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

/// One parsed term before it is bound to a concrete number of degrees of
/// freedom. Variable indices are zero-based.
struct RawTerm {
    coeff: Gaussian,
    q: BTreeMap<usize, u32>,
    p: BTreeMap<usize, u32>,
    hbar: u32,
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    momentum_letter: &'a str,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(o, _)| *o)
            .unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected {want:?}")),
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Token::Int(n)) => {
                let n = n.clone();
                self.pos += 1;
                Ok(n)
            }
            _ => self.err("expected an integer"),
        }
    }

    fn small_int(&mut self) -> Result<u32> {
        let n = self.int()?;
        u32::try_from(&n).or_else(|_| self.err("exponent out of range"))
    }

    fn rational_tail(&mut self, num: BigInt) -> Result<Rational> {
        if self.peek() == Some(&Token::Slash) {
            self.pos += 1;
            let den = self.int()?;
            if den.is_zero() {
                return self.err("zero denominator");
            }
            Ok(Rational::new(num, den))
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    fn signed_rational(&mut self) -> Result<Rational> {
        let neg = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                true
            }
            Some(Token::Plus) => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let num = self.int()?;
        let r = self.rational_tail(num)?;
        Ok(if neg { -r } else { r })
    }

    fn variable_index(&self, name: &str, prefix: &str) -> Option<usize> {
        let rest = name.strip_prefix(prefix)?;
        if rest.is_empty() {
            return Some(0);
        }
        if rest.starts_with('0') {
            return None;
        }
        rest.parse::<usize>()
            .ok()
            .filter(|&k| k >= 1)
            .map(|k| k - 1)
    }

    fn factor(&mut self, term: &mut RawTerm) -> Result<()> {
        match self.next() {
            Some(Token::Int(n)) => {
                let r = self.rational_tail(n)?;
                term.coeff = term.coeff.clone() * Gaussian::new(r, Rational::zero());
            }
            Some(Token::LParen) => {
                let re = self.signed_rational()?;
                self.expect(Token::Comma)?;
                let im = self.signed_rational()?;
                self.expect(Token::RParen)?;
                term.coeff = term.coeff.clone() * Gaussian::new(re, im);
            }
            Some(Token::Ident(name)) => {
                let exp = if self.peek() == Some(&Token::Caret) {
                    self.pos += 1;
                    self.small_int()?
                } else {
                    1
                };
                if name == "hbar" {
                    term.hbar += exp;
                } else if let Some(i) = self.variable_index(&name, "q") {
                    *term.q.entry(i).or_insert(0) += exp;
                } else if let Some(i) = self.variable_index(&name, self.momentum_letter) {
                    *term.p.entry(i).or_insert(0) += exp;
                } else {
                    self.pos -= 1;
                    return self.err(format!("unknown variable {name:?}"));
                }
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                return self.err("expected a coefficient or a variable");
            }
        }
        Ok(())
    }

    fn term(&mut self, negate: bool) -> Result<RawTerm> {
        let mut term = RawTerm {
            coeff: if negate {
                -Gaussian::one()
            } else {
                Gaussian::one()
            },
            q: BTreeMap::new(),
            p: BTreeMap::new(),
            hbar: 0,
        };
        self.factor(&mut term)?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            self.factor(&mut term)?;
        }
        Ok(term)
    }

    fn poly(&mut self) -> Result<Vec<RawTerm>> {
        let mut terms = Vec::new();
        let mut negate = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                true
            }
            Some(Token::Plus) => {
                self.pos += 1;
                false
            }
            None => return self.err("empty polynomial"),
            _ => false,
        };
        loop {
            terms.push(self.term(negate)?);
            match self.next() {
                None => break,
                Some(Token::Plus) => negate = false,
                Some(Token::Minus) => negate = true,
                Some(_) => {
                    self.pos -= 1;
                    return self.err("expected '+', '-' or end of input");
                }
            }
        }
        Ok(terms)
    }
}

fn parse_raw(src: &str, momentum_letter: &str) -> Result<Vec<RawTerm>> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        momentum_letter,
        end: src.len(),
    };
    parser.poly()
}

fn bind(raw: Vec<RawTerm>, num_dof: Option<usize>) -> Result<Symbol> {
    let inferred = raw
        .iter()
        .flat_map(|t| t.q.keys().chain(t.p.keys()))
        .map(|&i| i + 1)
        .max()
        .unwrap_or(1);
    let n = match num_dof {
        Some(0) => return Err(Error::invalid("num_dof must be positive")),
        Some(n) if n < inferred => {
            return Err(Error::invalid(format!(
                "variable index {inferred} exceeds declared num_dof {n}"
            )))
        }
        Some(n) => n,
        None => inferred,
    };
    let terms = raw.into_iter().map(|t| {
        let mut q = vec![0; n];
        let mut p = vec![0; n];
        for (i, e) in t.q {
            q[i] = e;
        }
        for (i, e) in t.p {
            p[i] = e;
        }
        (Monomial::new(q, p, t.hbar), t.coeff)
    });
    Ok(Polynomial::from_terms(n, terms))
}

/// Parses an observable written with `q`/`p` variables and rational
/// coefficients. With `num_dof = None` the dimension is the largest index
/// that occurs.
pub fn parse_observable(src: &str, num_dof: Option<usize>) -> Result<PolyObservable> {
    let symbol = bind(parse_raw(src, "p")?, num_dof)?;
    if !symbol.imag_part().is_zero() {
        return Err(Error::Parse {
            pos: 0,
            msg: "observable coefficients must be real".into(),
        });
    }
    Ok(symbol.real_part())
}

/// Parses a symbol: `q`/`p` variables and real or `(re, im)` coefficients.
pub fn parse_symbol(src: &str, num_dof: Option<usize>) -> Result<Symbol> {
    bind(parse_raw(src, "p")?, num_dof)
}

/// Parses normal-ordered operator text (`q` and `d` slots).
pub(crate) fn parse_operator_terms(src: &str, num_dof: Option<usize>) -> Result<Symbol> {
    bind(parse_raw(src, "d")?, num_dof)
}

impl FromStr for PolyObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_observable(s, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_algebra::polynomial::{int, rat};

    #[test]
    fn parses_its_own_output() {
        let f = parse_observable("9/1 * q1^2 * p1^2 - 3/2 * hbar^2", None).unwrap();
        assert_eq!(parse_observable(&f.to_string(), None).unwrap(), f);
        assert_eq!(f.hbar_component(2), PolyObservable::constant(1, rat(-3, 2)));
    }

    #[test]
    fn whitespace_and_shorthand() {
        let a = parse_observable("q^2*p+3", None).unwrap();
        let b = parse_observable("  3/1 +  1 * q1 ^ 2 * p1 ", None).unwrap();
        assert_eq!(a, b);
        let q = PolyObservable::q(1, 0);
        let p = PolyObservable::p(1, 0);
        assert_eq!(a, q.pow(2) * p + PolyObservable::constant(1, int(3)));
    }

    #[test]
    fn dimension_inference_and_padding() {
        let f = parse_observable("q2 * p1", None).unwrap();
        assert_eq!(f.num_dof(), 2);
        let g = parse_observable("q2 * p1", Some(3)).unwrap();
        assert_eq!(g.num_dof(), 3);
        assert!(parse_observable("q4", Some(3)).is_err());
    }

    #[test]
    fn gaussian_coefficients() {
        let s = parse_symbol("(0, 1/2) * hbar + q * p", None).unwrap();
        assert_eq!(s.imag_part(), PolyObservable::hbar(1).scale(&rat(1, 2)));
        assert!(parse_observable("(0, 1) * q", None).is_err());
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "q +", "2 q", "x1", "q0", "1/0", "q^", "(1, 2", "* q"] {
            assert!(parse_observable(bad, None).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn zero_polynomial() {
        assert!(parse_observable("0", None).unwrap().is_zero());
        assert!(parse_observable("q - q", None).unwrap().is_zero());
    }
}
