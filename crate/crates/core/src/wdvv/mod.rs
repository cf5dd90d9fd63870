//! Genus-zero theory of the elliptic orbifolds `X_r = E / Z_r`.
//!
//! Each orbifold has a registry of correlators with closed forms in the
//! modular variable `Q = q^r`, a system of WDVV equations stored as a text
//! fixture, a recursive solver for those systems, and (for `X2`, `X3`) the
//! explicit genus-zero potential.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::expr::ParseError;
use crate::modforms::{Level, ModformError};
use crate::quasipoly::PolyError;
use crate::series::SeriesError;
use crate::surd::SurdError;

pub mod potential;
pub mod registry;
pub mod solver;
pub mod system;

pub use registry::{closed_form, closed_form_series, correlator, correlators, gw_invariant, Correlator};
pub use solver::{solve_ode, Solution};
pub use potential::{potential, potential_coefficients, potential_with_text, Potential};
pub use system::{
    builtin_system, verify_parsed, verify_polynomial_relations, verify_system, EquationReport, OdeSystem, Status, SystemReport,
    Variant,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WdvvError {
    #[error("{0} has no genus-zero system in scope")]
    UnsupportedOrbifold(Orbifold),
    #[error("unknown orbifold {0:?}")]
    UnknownOrbifold(String),
    #[error("{orbifold} has no correlator named {name}")]
    UnknownCorrelator { orbifold: Orbifold, name: String },
    #[error("n I - J is singular at q^{0}; seed this order")]
    ResonantOrder(i64),
    #[error("the constant term of {0} must be seeded")]
    UnseededConstant(String),
    #[error("seeds violate {equation} at q^{order}: residual {residual}")]
    SeedInconsistency { order: i64, equation: String, residual: String },
    #[error("{equation} cannot be satisfied at q^{order}: residual {residual}")]
    Inconsistent { order: i64, equation: String, residual: String },
    #[error("{0} appears in an equation but is neither an unknown nor defined")]
    UnknownVariable(String),
    #[error("coefficient {0} is not rational")]
    IrrationalCoefficient(String),
    #[error("fixture line {line}: {msg}")]
    Fixture { line: usize, msg: String },
    #[error("cyclic definition through {0}")]
    Cycle(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Surd(#[from] SurdError),
    #[error(transparent)]
    Modform(#[from] ModformError),
}

/// `X_r`; `X1` is the elliptic curve itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Orbifold {
    X1,
    X2,
    X3,
    X4,
    X6,
}

impl Orbifold {
    pub const ALL: [Orbifold; 5] = [Orbifold::X1, Orbifold::X2, Orbifold::X3, Orbifold::X4, Orbifold::X6];
    /// The orbifolds with a WDVV system.
    pub const WDVV: [Orbifold; 4] = [Orbifold::X2, Orbifold::X3, Orbifold::X4, Orbifold::X6];

    /// Order of the automorphism group; `q = Q^(1/r)`.
    pub fn r(self) -> u32 {
        match self {
            Orbifold::X1 => 1,
            Orbifold::X2 => 2,
            Orbifold::X3 => 3,
            Orbifold::X4 => 4,
            Orbifold::X6 => 6,
        }
    }

    /// Orders of the orbifold points of `P^1_{a,b,...}`.
    pub fn isotropy(self) -> &'static [u32] {
        match self {
            Orbifold::X1 => &[],
            Orbifold::X2 => &[2, 2, 2, 2],
            Orbifold::X3 => &[3, 3, 3],
            Orbifold::X4 => &[4, 4, 2],
            Orbifold::X6 => &[6, 3, 2],
        }
    }

    /// Rank of the Chen-Ruan cohomology: `1, P` plus `a - 1` twist sectors per point.
    pub fn mu(self) -> u32 {
        2 + self.isotropy().iter().map(|a| a - 1).sum::<u32>()
    }

    /// Level of the elliptic curve family whose generators express the correlators.
    pub fn level(self) -> Level {
        match self {
            Orbifold::X1 => Level::One,
            Orbifold::X2 => Level::Four,
            Orbifold::X3 => Level::Three,
            Orbifold::X4 => Level::Two,
            Orbifold::X6 => Level::OneStar,
        }
    }

    /// Name of the orbifold line, e.g. `P1_{4,4,2}`.
    pub fn weighted_line(self) -> String {
        let a: Vec<String> = self.isotropy().iter().map(u32::to_string).collect();
        if a.is_empty() {
            "E".into()
        } else {
            format!("P1_{{{}}}", a.join(","))
        }
    }
}

impl fmt::Display for Orbifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.r())
    }
}

impl FromStr for Orbifold {
    type Err = WdvvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_prefix('X').or_else(|| t.strip_prefix('x')).unwrap_or(t);
        Ok(match t {
            "1" => Orbifold::X1,
            "2" => Orbifold::X2,
            "3" => Orbifold::X3,
            "4" => Orbifold::X4,
            "6" => Orbifold::X6,
            _ => return Err(WdvvError::UnknownOrbifold(s.to_string())),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_and_levels() {
        let mu: Vec<u32> = Orbifold::ALL.iter().map(|o| o.mu()).collect();
        assert_eq!(mu, [2, 6, 8, 9, 10]);
        for o in Orbifold::WDVV {
            // -1/(2r) = -1/2 + mu/24
            assert_eq!(24 * o.mu() as i64 * o.r() as i64, 12 * (o.r() as i64 - 1) * 24);
            assert_eq!(o.level().info().r, o.r());
        }
        assert_eq!("X4".parse::<Orbifold>().unwrap().weighted_line(), "P1_{4,4,2}");
        assert!("X5".parse::<Orbifold>().is_err());
    }
}
