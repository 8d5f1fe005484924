//! Exact classical observable algebra on flat phase space.
//!
//! Observables are sparse polynomials in `q_1..q_n, p_1..p_n` with exact
//! rational coefficients, optionally graded by a formal `hbar`. Nothing in
//! this module uses floating point.

mod bracket;
mod classify;
mod polynomial;
pub mod random;
mod text;

pub use bracket::{
    bracket_closed, in_involution, is_constant_of_motion, moyal_bracket, poisson_bracket,
};
pub use classify::{classify_subalgebra, SubalgebraTag};
pub(crate) use polynomial::write_terms;
pub use polynomial::{
    int, rat, Coefficient, Gaussian, Monomial, PolyObservable, Polynomial, Rational, Symbol,
};
pub(crate) use text::parse_operator_terms;
pub use text::{parse_observable, parse_symbol};
