use serde::{Deserialize, Serialize};

use super::polynomial::PolyObservable;
use crate::error::{Error, Result};

/// Polynomial Lie subalgebras of one degree of freedom.
///
/// `P1` is the Heisenberg algebra span{1, q, p}; `P2` is total degree at most
/// two; `PInf1` is polynomials at most linear in p. P2 and PInf1 are the two
/// maximal quantizable extensions of P1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubalgebraTag {
    P1,
    P2,
    PInf1,
    General,
}

impl SubalgebraTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SubalgebraTag::P1 => "P1",
            SubalgebraTag::P2 => "P2",
            SubalgebraTag::PInf1 => "PInf1",
            SubalgebraTag::General => "GENERAL",
        }
    }
}

impl std::fmt::Display for SubalgebraTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Smallest tag containing `f`. P1 is tried first, then P2, then PInf1.
pub fn classify_subalgebra(f: &PolyObservable) -> Result<SubalgebraTag> {
    if f.num_dof() != 1 {
        return Err(Error::Unsupported(format!(
            "subalgebra classification is defined for one degree of freedom, got {}",
            f.num_dof()
        )));
    }
    if !f.is_classical() {
        return Err(Error::NotClassical);
    }
    let degree = f.total_degree().unwrap_or(0);
    let p_degree = f.p_degree().unwrap_or(0);
    Ok(if degree <= 1 {
        SubalgebraTag::P1
    } else if degree <= 2 {
        SubalgebraTag::P2
    } else if p_degree <= 1 {
        SubalgebraTag::PInf1
    } else {
        SubalgebraTag::General
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly_algebra::text::parse_observable;

    fn tag(s: &str) -> SubalgebraTag {
        classify_subalgebra(&parse_observable(s, Some(1)).unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(tag("q^2 * p^2"), SubalgebraTag::General);
        assert_eq!(tag("q^5 * p + q^2"), SubalgebraTag::PInf1);
        assert_eq!(tag("q * p"), SubalgebraTag::P2);
        assert_eq!(tag("3 + q - 1/2 * p"), SubalgebraTag::P1);
        assert_eq!(tag("0"), SubalgebraTag::P1);
        assert_eq!(tag("p^2"), SubalgebraTag::P2);
        assert_eq!(tag("p^3"), SubalgebraTag::General);
    }

    #[test]
    fn rejects_multi_dof_and_quantum() {
        let f = parse_observable("q1 * p2", None).unwrap();
        assert!(matches!(
            classify_subalgebra(&f),
            Err(Error::Unsupported(_))
        ));
        let g = parse_observable("q * hbar", Some(1)).unwrap();
        assert!(matches!(classify_subalgebra(&g), Err(Error::NotClassical)));
    }
}
