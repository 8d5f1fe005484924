//! Exact Weyl quantization of polynomial observables.
//!
//! Operators are normal-ordered polynomials in `q_i` and `p_i = -i hbar
//! d/dq_i` with Gaussian-rational coefficients graded by a formal hbar. The
//! operator bracket paired with the Poisson bracket is `(1/(i hbar)) [A, B]`,
//! so that `q, p` map to `1` for every ordering.

mod obstruction;
mod operator;
mod quantize;

pub use obstruction::{
    dirac_defect, gvh_contradiction, quantum_bracket, verify_quantization_conditions,
    ConditionCheck, ConditionStatus, DiracFailure, GvhReport, QuantizationReport, ORDERING,
};
pub use operator::{commutator, op_mul, WeylOperator};
pub use quantize::{ordered_kinetic_coefficients, weyl_quantize, weyl_symbol};
