//! Exact quantization algebra and numerical dynamics for solvable nonlinear
//! oscillators.
//!
//! The crate is split along the two halves of the workbench:
//!
//! * exact algebra: [`poly_algebra`] (Poisson and Moyal brackets on sparse
//!   rational polynomials over flat phase space) and [`weyl_algebra`]
//!   (symmetric-ordered operators, commutators and the Groenewold–van Hove
//!   obstruction);
//! * numerics: [`dynamics`] (adaptive integration of the isochronous
//!   one-degree-of-freedom oscillators), [`matrix_oscillator`],
//!   [`quartic_manybody`] and [`schrodinger_spectra`].
//!
//! Exact modules never touch floating point. Numerical modules are
//! deterministic: the same inputs and seed always produce the same numbers.

pub mod dynamics;
pub mod error;
pub mod io;
pub mod matrix_oscillator;
pub mod poly_algebra;
pub mod quartic_manybody;
pub mod schrodinger_spectra;
pub mod selftest;
pub mod weyl_algebra;

pub use error::{Error, ErrorKind, Result};
