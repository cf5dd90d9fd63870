//! Correlators of each orbifold with their closed forms in `Q = q^r`.
//!
//! A closed form is [`QuasiPoly`] text. It may mention other correlators of
//! the same orbifold by name; those are substituted before evaluation. Forms
//! that come from relations rather than a printed expression are flagged
//! with `printed: false`, so checks against them are not mistaken for
//! independent evidence.

use std::collections::HashMap;

use num_rational::Rational64;

use super::{Orbifold, WdvvError};
use crate::expr::parse_expr;
use crate::quasipoly::QuasiPoly;
use crate::series::{QSeries, Rat};

/// Another expression for the same correlator, checked against the closed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alternative {
    pub label: &'static str,
    pub form: &'static str,
    /// `false` records a printed form that is known not to match.
    pub expect_equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correlator {
    pub orbifold: Orbifold,
    pub name: &'static str,
    pub insertions: Vec<&'static str>,
    /// Number of twist-sector insertions.
    pub twisted: u32,
    /// Number of divisor (`P`) insertions.
    pub divisors: u32,
    pub genus: u32,
    pub form: &'static str,
    pub printed: bool,
    pub alternatives: Vec<Alternative>,
}

impl Correlator {
    fn new(orbifold: Orbifold, name: &'static str, insertions: &'static str, form: &'static str) -> Self {
        let insertions: Vec<&'static str> = insertions.split(',').map(str::trim).collect();
        Correlator {
            orbifold,
            name,
            twisted: insertions.len() as u32,
            insertions,
            divisors: 0,
            genus: 0,
            form,
            printed: true,
            alternatives: Vec::new(),
        }
    }

    fn derived(mut self) -> Self {
        self.printed = false;
        self
    }

    fn alt(mut self, label: &'static str, form: &'static str) -> Self {
        self.alternatives.push(Alternative {
            label,
            form,
            expect_equal: true,
        });
        self
    }

    fn misprint(mut self, label: &'static str, form: &'static str) -> Self {
        self.alternatives.push(Alternative {
            label,
            form,
            expect_equal: false,
        });
        self
    }

    /// `T + 2D + 2g - 2`.
    pub fn expected_weight(&self) -> Rational64 {
        Rational64::from(self.twisted as i64 + 2 * self.divisors as i64 + 2 * self.genus as i64 - 2)
    }

    /// `sum(ages) - (T + 2g - 2)`; a correlator with nonzero defect vanishes
    /// by the degree axiom.
    pub fn age_defect(&self) -> Option<Rational64> {
        age_defect(self.orbifold, &self.insertions, self.genus)
    }

    /// The closed form with references to other correlators expanded.
    pub fn closed_form(&self) -> Result<QuasiPoly, WdvvError> {
        resolve(self.orbifold, self.form, 0)
    }
}

fn resolve(orbifold: Orbifold, text: &str, depth: usize) -> Result<QuasiPoly, WdvvError> {
    if depth > 8 {
        return Err(WdvvError::Cycle(text.to_string()));
    }
    let e = parse_expr(text)?;
    let table = correlators(orbifold)?;
    let mut refs = HashMap::new();
    for v in e.vars() {
        if let Some(c) = table.iter().find(|c| c.name == v) {
            refs.insert(v, resolve(orbifold, c.form, depth + 1)?);
        }
    }
    Ok(QuasiPoly::from_expr(&e, &|name| refs.get(name).cloned())?)
}

/// Age of a twist-sector label such as `x^2` or `D1^2`: the power divided by
/// the order of its point. Points are `x, y, z, w` or `D1, D2, ...`.
pub fn insertion_age(orbifold: Orbifold, label: &str) -> Option<Rational64> {
    let (point, power) = match label.split_once('^') {
        Some((p, k)) => (p, k.parse::<i64>().ok()?),
        None => (label, 1),
    };
    let index = match point {
        "x" => 0,
        "y" => 1,
        "z" => 2,
        "w" => 3,
        _ => point.strip_prefix('D')?.parse::<usize>().ok()?.checked_sub(1)?,
    };
    let order = *orbifold.isotropy().get(index)? as i64;
    (1..order).contains(&power).then(|| Rational64::new(power, order))
}

/// Degree-axiom defect of a correlator with twisted insertions only:
/// `sum(ages) - (T + 2g - 2)`, or `None` for an unknown label.
pub fn age_defect<S: AsRef<str>>(orbifold: Orbifold, insertions: &[S], genus: u32) -> Option<Rational64> {
    let mut total = Rational64::from(0);
    for i in insertions {
        total += insertion_age(orbifold, i.as_ref())?;
    }
    Some(total - Rational64::from(insertions.len() as i64 + 2 * genus as i64 - 2))
}

/// Closed form of a stand-alone expression that may mention correlators of `orbifold`.
pub fn resolve_form(orbifold: Orbifold, text: &str) -> Result<QuasiPoly, WdvvError> {
    resolve(orbifold, text, 0)
}

pub fn correlators(orbifold: Orbifold) -> Result<Vec<Correlator>, WdvvError> {
    let c = |name, ins, form| Correlator::new(orbifold, name, ins, form);
    Ok(match orbifold {
        Orbifold::X1 => return Err(WdvvError::UnsupportedOrbifold(orbifold)),
        Orbifold::X2 => vec![
            c("X", "D1,D2,D3,D4", "1/4*A@4*C@4").alt("variable q", "1/16*C@4(Q^(1/2))^2"),
            c("Y", "D1,D1,D1,D1", "1/8*(-3*E@4 + A@4^2 - 2*C@4^2)")
                .alt("variable q", "-1/16*(3*E@4(Q^(1/2)) + A@4(Q^(1/2))^2 + C@4(Q^(1/2))^2)"),
            c("Z", "D1,D1,D2,D2", "1/8*(-E@4 + A@4^2)").alt("variable q", "-1/16*(E@4(Q^(1/2)) - B@4(Q^(1/2))^2)"),
        ],
        Orbifold::X3 => vec![
            c("Z1", "D1,D1,D1", "1/3*A@3"),
            c("Z2", "D1^2,D1,D2^2,D2", "-1/18*(E@3 - A@3^2)"),
            c("Z3", "D1^2,D1^2,D1,D1", "-1/9*E@3"),
            c("Z4", "D1,D2,D3", "1/3*C@3"),
            c("Z5", "D1^2,D1^2,D2,D3", "1/9*A@3*C@3"),
            c("Z6", "D1^2,D2^2,D3,D3", "1/9*C@3^2"),
            c("Z7", "D3^2,D1^2,D1^2,D1,D2^2", "1/27*A@3*C@3^2"),
        ],
        Orbifold::X4 => vec![
            c("Z1", "x,x,x^2", "1/4*A@4"),
            c("Z2", "x,x^3,z,z", "1/8*(A@4^2 - E@4)"),
            c("Z3", "x^2,x^2,z,z", "1/8*(A@4^2 - E@4)"),
            c("Z4", "x,x^3,y,y^3", "1/16*(A@4^2 - E@4)"),
            c("Z5", "z,z,z,z", "1/4*(2*A@4^2 - C@4^2 - 3*E@4)"),
            c("Z6", "x,x,x^3,x^3", "1/16*(-2*E@4 + A@4^2 - C@4^2)"),
            c("Z7", "x,y,z", "2^(-3/2)*C@2"),
            c("Z8", "x^2,x^3,y,z", "1/16*2^(1/2)*A@4*C@2"),
            c("Z9", "x^2,y,y", "1/4*C@4"),
            c("Z10", "x^2,y^2,z,z", "1/8*C@2^2"),
            c("Z11", "x^3,x^3,y,y", "1/16*C@2^2"),
            c("Z12", "x^3,y,y^2,z", "1/16*2^(1/2)*C@4*C@2"),
            c("X", "x^3,x^2,x^2,x", "-1/16*E@4"),
            c("Y", "x^3,x^2,x,y^2", "1/16*A@4*C@4"),
            c("Z", "x^3,y^2,y^2,x", "1/16*(A@4^2 - C@4^2 - E@4)"),
            c("U", "x^2,x^2,x^2,x^2", "1/16*(A@4^2 - 2*C@4^2 - 3*E@4)"),
            c("V", "x^2,x^2,y^2,y^2", "1/16*(A@4^2 - E@4)"),
            c("W", "x^2,x^2,x^2,y^2", "0"),
        ],
        Orbifold::X6 => vec![
            c("Z1", "x,x,x^4", "1/6*A@3"),
            c("Z2", "x,x^2,x^3", "1/6*A@3(Q^2)"),
            c("Z3", "y,y,y", "2*Z1").derived(),
            c("Z4", "x,x^5,z,z", "3/2*Z1^2 + 3*Z1*Z2 - 3*Z2^2 + 3/2*Z9")
                .derived()
                .alt("level 4 form", "1/8*(A@4^2 - E@4)")
                .alt("half argument, B squared", "1/16*(B@4(Q^(1/2))^2 - E@4(Q^(1/2)))")
                .misprint("half argument, B unsquared", "1/16*(B@4(Q^(1/2)) - E@4(Q^(1/2)))"),
            c("Z5", "x^2,x^4,z,z", "Z4 - Z21^2").derived(),
            c("Z6", "x^3,x^3,z,z", "Z4").derived(),
            c("Z7", "x,x^5,y,y^2", "Z9 + Z1^2").derived().alt("level 3 form", "1/18*(A@3^2 - E@3)"),
            c("Z8", "y,y^2,z,z", "2*Z4 + 2*Z21^2").derived(),
            c("Z9", "x,x,x^5,x^5", "-1/36*Ei2"),
            c("Z10", "x,y,z", "1/3*(C@3(Q^(1/2)) - C@3(Q^2))")
                .alt("theta product", "1/2*theta{1/2,0}*theta{1/6,0}(Q^3)")
                .alt(
                    "difference of A3",
                    "1/6*(A@3(Q^(1/6)) - A@3(Q^(2/3)) - A@3(Q^(1/2)) + A@3(Q^2))",
                )
                .misprint("theta product with equal characteristics", "1/2*theta{1/2,0}*theta{1/2,0}(Q^3)"),
            c("Z11", "y,y,y^2,y^2", "4*Z9").derived(),
            c("Z12", "z,z,z,z", "3*Z4 + 9*Z9").derived().alt("Eisenstein form", "1/4*(Ei2(Q^2) - 2*Ei2)"),
            c("Z13", "x,y^2,y^2,z", "2*Z1*Z10").derived(),
            c("Z14", "x^2,x^5,y,z", "1/2*Z13").derived(),
            c("Z15", "x^3,x^4,y,z", "1/2*Z13").derived(),
            c("Z16", "x,x,y^2", "1/3*C@3"),
            c("Z17", "x^2,y,y", "Z16").derived(),
            c("Z18", "x^2,y^2,z,z", "Z10^2").derived(),
            c("Z19", "x^3,x^5,y,y", "2*Z2*Z16").derived(),
            c("Z20", "x^4,x^4,y,y", "2*Z1*Z16").derived().alt("level 3 form", "1/9*A@3*C@3"),
            c("Z21", "x,x^2,z", "1/6*(A@3(Q^(1/2)) - A@3(Q^2))").alt("theta product", "1/4*theta2*theta2(Q^3)"),
            c("Z22", "x,x^3,x^5,z", "(Z1 + Z2)*Z21").derived().alt("level 4 form", "1/12*A@4*C@4"),
            c("Z23", "x,x^4,x^4,z", "2*Z2*Z21").derived(),
            c("Z24", "x^3,z,z,z", "6*Z22").derived(),
            c("Z25", "x^3,y,y^2,z", "Z16*Z10").derived(),
            c("Z26", "x,x^3,y", "1/3*C@3(Q^2)"),
            c("Z27", "x^2,x^2,y", "0").derived(),
            c("Z28", "x^4,y,z,z", "2*Z10*Z21").derived(),
            c("Z29", "x^4,y,y,y^2", "2*Z30").derived(),
            c("Z30", "x,x^4,x^5,y", "1/2*Z16^2").derived().alt("level 3 form", "1/18*C@3^2"),
            c("Z31", "x,x^4,y^2,z", "Z16*Z21").derived().alt("second product", "Z26*Z10"),
            c("Z32", "x^5,y,y,z", "2*Z31").derived(),
        ],
    })
}

pub fn correlator(orbifold: Orbifold, name: &str) -> Result<Correlator, WdvvError> {
    correlators(orbifold)?
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| WdvvError::UnknownCorrelator {
            orbifold,
            name: name.to_string(),
        })
}

pub fn closed_form(orbifold: Orbifold, name: &str) -> Result<QuasiPoly, WdvvError> {
    correlator(orbifold, name)?.closed_form()
}

/// Evaluate a closed form (in `Q`) and rewrite it in the orbifold variable
/// `q = Q^(1/r)`, known below `q^trunc`.
pub fn q_series(orbifold: Orbifold, p: &QuasiPoly, trunc: i64) -> Result<QSeries, WdvvError> {
    let r = orbifold.r() as i64;
    let s = p.eval(Rational64::new(trunc, r))?.to_rational()?;
    Ok(s.substitute(Rational64::from(r)))
}

/// The correlator as a series in `q`, known below `q^trunc`.
pub fn closed_form_series(orbifold: Orbifold, name: &str, trunc: i64) -> Result<QSeries, WdvvError> {
    q_series(orbifold, &closed_form(orbifold, name)?, trunc)
}

/// Degree `d` Gromov-Witten invariant: the coefficient of `q^d`.
pub fn gw_invariant(orbifold: Orbifold, name: &str, d: i64) -> Result<Rat, WdvvError> {
    let s = closed_form_series(orbifold, name, d + 1)?;
    Ok(s.coeff_checked(Rational64::from(d))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x2_invariants() {
        let v: Vec<Rat> = (0..4).map(|d| gw_invariant(Orbifold::X2, "X", d).unwrap()).collect();
        let want: Vec<Rat> = [0, 1, 0, 4].iter().map(|&n| Rat::from_integer(n.into())).collect();
        assert_eq!(v, want);
    }

    #[test]
    fn references_resolve() {
        let p = closed_form(Orbifold::X6, "Z32").unwrap();
        assert!(p.generators().iter().all(|g| !g.to_string().starts_with('Z')));
        assert!(matches!(
            closed_form(Orbifold::X3, "Z9"),
            Err(WdvvError::UnknownCorrelator { .. })
        ));
        assert!(correlators(Orbifold::X1).is_err());
    }

    #[test]
    fn registry_obeys_degree_axiom() {
        for o in Orbifold::WDVV {
            for c in correlators(o).unwrap() {
                assert_eq!(c.age_defect(), Some(Rational64::from(0)), "{o} {}", c.name);
            }
        }
        assert_eq!(age_defect(Orbifold::X6, &["x", "x^2", "y", "y^2"], 0), Some(Rational64::new(-1, 2)));
        assert_eq!(insertion_age(Orbifold::X4, "z^2"), None);
    }
}
