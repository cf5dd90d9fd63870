//! Genus-one and genus-two correlators `<<P>>_{1,1}` and `<<P psi^2>>_{2,1}`.
//!
//! The genus-one series comes from Getzler's relation in `M_{1,4}`,
//! `12 d22 - 4 d23 - 2 d24 + 6 d34 + d03 + d04 - 2 d_beta = 0`, integrated
//! against four twisted insertions. Each stratum integral is a polynomial in
//! genus-zero correlators and `<<P>>_{1,1}`. Solving for the latter gives a
//! q-series that must equal `-Ei2(Q) / 12`.

use std::collections::BTreeMap;

use num_rational::Rational64;
use serde::Serialize;
use thiserror::Error;

use crate::expr::parse_expr;
use crate::quasipoly::{eisenstein_derivation, PolyError, QuasiPoly};
use crate::series::{QSeries, Rat, SeriesError};
use crate::surd::{Surd, SurdError};
use crate::wdvv::system::NamedSeries;
use crate::wdvv::{builtin_system, closed_form_series, solve_ode, Orbifold, Variant, WdvvError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenusError {
    #[error("{0} is not covered by this formula")]
    UnsupportedOrbifold(Orbifold),
    #[error("{0} vanishes identically to the requested order; cannot divide by it")]
    ZeroLeadingDivisor(String),
    #[error(transparent)]
    Wdvv(#[from] WdvvError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Surd(#[from] SurdError),
}

/// Where the genus-zero input series come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Inputs {
    /// Quasi-modular closed forms of the correlators.
    ClosedForms,
    /// Series solved order by order from the full WDVV system.
    Solver,
}

fn q(s: &str) -> QuasiPoly {
    s.parse().expect("built-in form parses")
}

/// `-Ei2(Q)/12` for `r = 2, 3, 4, 6`; `-Ei2(Q)/24` for the elliptic curve.
pub fn genus1_closed(orbifold: Orbifold, trunc: i64) -> Result<QSeries, GenusError> {
    let p = if orbifold == Orbifold::X1 { q("-1/24*Ei2") } else { q("-1/12*Ei2") };
    Ok(p.eval(trunc)?.to_rational()?)
}

/// `<<P>>_{1,1}` in the level generators `A_N, C_N, E_N` of the orbifold.
pub fn genus1_form(orbifold: Orbifold) -> QuasiPoly {
    match orbifold {
        Orbifold::X1 => q("-1/24*E@1"),
        Orbifold::X2 => q("1/12*(-3*E@4 + 2*A@4^2 - C@4^2)"),
        Orbifold::X3 => q("1/12*(-2*E@3 + A@3^2)"),
        Orbifold::X4 => q("-1/24*(3*E@2 - A@2^2)"),
        Orbifold::X6 => q("-1/12*E@1"),
    }
}

/// The printed level 4 expression for `X4`, which also equals `-Ei2/12`.
pub fn genus1_x4_level4_form() -> QuasiPoly {
    q("1/12*(-3*E@4 + 2*A@4^2 - C@4^2)")
}

/// `d/dE_N <<P>>_{1,1}`; the constant `-1/(2r)`.
pub fn genus1_e_derivative(orbifold: Orbifold) -> Result<Rat, GenusError> {
    constant_of(&genus1_form(orbifold).partial_e()?)
}

/// The same derivative via `d/dE_N = (6/r) d/dEi2` applied to `-Ei2/12`.
pub fn genus1_ei2_route(orbifold: Orbifold) -> Result<Rat, GenusError> {
    if orbifold == Orbifold::X1 {
        return Err(GenusError::UnsupportedOrbifold(orbifold));
    }
    let d = q("-1/12*Ei2").partial(&"Ei2".parse().map_err(PolyError::from)?);
    let c = constant_of(&d)?;
    Ok(c * Rat::new(6.into(), orbifold.r().into()))
}

fn constant_of(p: &QuasiPoly) -> Result<Rat, GenusError> {
    if p.is_zero() {
        return Ok(Rat::from_integer(0.into()));
    }
    match p.generators().is_empty() {
        true => {
            let (_, c) = p.terms().next().expect("nonzero");
            Ok(c.as_rational().cloned().ok_or_else(|| SurdError::Irrational(c.to_string()))?)
        }
        false => Err(PolyError::NotPolynomial(format!("{p} is not constant")).into()),
    }
}

/// One named piece of a Getzler evaluation, as a q-series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stratum {
    pub name: String,
    pub formula: String,
    #[serde(skip)]
    pub series: QSeries,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GetzlerReport {
    pub orbifold: Orbifold,
    pub inputs: Inputs,
    pub strata: Vec<Stratum>,
    /// `<<P>>_{1,1}` as a series in `Q`.
    #[serde(skip)]
    pub result: QSeries,
    /// Further printed forms of the same quantity, as Q-series.
    #[serde(skip)]
    pub forms: Vec<(String, QSeries)>,
}

fn eval(text: &str, env: &BTreeMap<String, QSeries>) -> Result<QSeries, GenusError> {
    Ok(parse_expr(text).map_err(WdvvError::from)?.eval(&NamedSeries(env))?)
}

fn divide(num: &QSeries, den: &QSeries, name: &str) -> Result<QSeries, GenusError> {
    if den.is_zero() {
        return Err(GenusError::ZeroLeadingDivisor(name.to_string()));
    }
    Ok(num.div(den)?)
}

/// Names of the genus-zero correlators each evaluation reads.
fn needed(orbifold: Orbifold) -> &'static [&'static str] {
    match orbifold {
        Orbifold::X2 => &["X", "Y", "Z"],
        Orbifold::X3 => &["Z2", "Z3", "Z5", "Z6"],
        Orbifold::X4 => &["Z2", "Z3", "Z5", "Z6", "Z8", "Z10", "Z11", "Z12", "U", "V", "Y"],
        Orbifold::X6 => &["Z9"],
        Orbifold::X1 => &[],
    }
}

/// Genus-zero q-series below `q^trunc` from the chosen source.
pub fn genus_zero_inputs(orbifold: Orbifold, inputs: Inputs, trunc: i64) -> Result<BTreeMap<String, QSeries>, GenusError> {
    let names = needed(orbifold);
    Ok(match inputs {
        Inputs::ClosedForms => names
            .iter()
            .map(|n| Ok((n.to_string(), closed_form_series(orbifold, n, trunc)?)))
            .collect::<Result<_, WdvvError>>()?,
        Inputs::Solver => {
            let sol = solve_ode(&builtin_system(orbifold, Variant::Full)?, trunc)?;
            names
                .iter()
                .map(|n| {
                    sol.series
                        .get(*n)
                        .map(|s| (n.to_string(), s.clone()))
                        .ok_or_else(|| WdvvError::UnknownVariable(n.to_string()))
                })
                .collect::<Result<_, _>>()?
        }
    })
}

fn to_q_variable(orbifold: Orbifold, s: &QSeries) -> QSeries {
    s.substitute(Rational64::new(1, orbifold.r() as i64))
}

/// `<<P>>_{1,1}` from Getzler's relation, known below `Q^trunc`.
///
/// `X2` and `X3` solve the relation stratum by stratum, `X4` evaluates the
/// already contracted combination and `X6` uses `3 Z9`.
pub fn genus1_getzler(orbifold: Orbifold, inputs: Inputs, trunc: i64) -> Result<GetzlerReport, GenusError> {
    let r = orbifold.r() as i64;
    // Division by a correlator of q-valuation 1 or 2 costs that many orders.
    let qt = trunc * r + 3;
    let env = genus_zero_inputs(orbifold, inputs, qt)?;
    let stratum = |name: &str, formula: &str| -> Result<Stratum, GenusError> {
        Ok(Stratum {
            name: name.into(),
            formula: formula.into(),
            series: eval(formula, &env)?,
        })
    };
    let mut forms = Vec::new();
    let (strata, result) = match orbifold {
        Orbifold::X2 | Orbifold::X3 => {
            let (div, list) = if orbifold == Orbifold::X2 {
                ("X", [("d03", "X*(16*Y + 48*Z)"), ("d04", "6*theta_q X"), ("d_beta", "48*X*Z")])
            } else {
                (
                    "Z5",
                    [
                        ("d03", "Z5*(72*Z3 + 144*Z2)"),
                        ("d04", "8*theta_q Z5"),
                        ("d_beta", "Z5*(9*Z3 + 90*Z2) + 36*Z6*Z6"),
                    ],
                )
            };
            let strata: Vec<Stratum> = list.iter().map(|(n, f)| stratum(n, f)).collect::<Result<_, _>>()?;
            // d22 = d23 = d24 = 0 and d34 = 4 <<P>> D, so 24 D <<P>> = -(d03 + d04 - 2 d_beta).
            let rest = strata[0].series.add(&strata[1].series).sub(&strata[2].series.scale(&Rat::from_integer(2.into())));
            let den = env[div].scale(&Rat::from_integer((-24).into()));
            let p = divide(&rest, &den, div)?;
            if orbifold == Orbifold::X2 {
                let th = eval("theta_q X", &env)?;
                let pre = eval("1/3*(-2*Y + 6*Z)", &env)?.sub(&divide(&th, &env["X"].scale(&Rat::from_integer(4.into())), "X")?);
                forms.push(("(-2Y + 6Z)/3 - theta_q X/(4X)".to_string(), to_q_variable(orbifold, &pre)));
                forms.push(("Y/3 + Z".to_string(), to_q_variable(orbifold, &eval("1/3*Y + Z", &env)?)));
            }
            (strata, p)
        }
        Orbifold::X4 => {
            let a = stratum("polynomial part", "1/6*(4*Z2 + 2*Z3 - Z5 - 16*Z6 - 4*U - 4*V)")?;
            let b = stratum("numerator", "8*Z12*(3*Z10 + 8*Z11 + 8*Y) - 9*theta_q Z8")?;
            let den = env["Z8"].scale(&Rat::from_integer(24.into()));
            let p = a.series.add(&divide(&b.series, &den, "Z8")?);
            (vec![a, b], p)
        }
        Orbifold::X6 => {
            let s = stratum("3 Z9", "3*Z9")?;
            let p = s.series.clone();
            (vec![s], p)
        }
        Orbifold::X1 => return Err(GenusError::UnsupportedOrbifold(orbifold)),
    };
    let result = to_q_variable(orbifold, &result).truncate(Rational64::from(trunc));
    Ok(GetzlerReport {
        orbifold,
        inputs,
        strata,
        result,
        forms: forms.into_iter().map(|(n, s)| (n, s.truncate(Rational64::from(trunc)))).collect(),
    })
}

/// `c_r` of the genus-two formula.
pub fn genus2_constant(orbifold: Orbifold) -> Result<i64, GenusError> {
    Ok(match orbifold {
        Orbifold::X2 => 48,
        Orbifold::X3 => 144,
        Orbifold::X4 => 252,
        Orbifold::X6 => 480,
        Orbifold::X1 => return Err(GenusError::UnsupportedOrbifold(orbifold)),
    })
}

/// `1/10 + 1/(10r) + c_r/120`.
pub fn genus2_derivative_coefficient(orbifold: Orbifold) -> Result<Rat, GenusError> {
    let r = orbifold.r() as i64;
    let c = genus2_constant(orbifold)?;
    Ok(Rat::new(1.into(), 10.into()) + Rat::new(1.into(), (10 * r).into()) + Rat::new(c.into(), 120.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Genus2 {
    pub orbifold: Orbifold,
    /// `<<P psi^2>>_{2,1}` below `Q^trunc`.
    pub series: QSeries,
    /// The same quantity as a polynomial in `Ei2, Ei4`.
    pub form: QuasiPoly,
}

/// `7/5 G^2 + (1/10 + 1/(10r) + c_r/120) theta_q G` with `G = <<P>>_{1,1}`.
pub fn genus2_from(orbifold: Orbifold, g: &QSeries) -> Result<QSeries, GenusError> {
    let k = genus2_derivative_coefficient(orbifold)?;
    let r = Rat::from_integer((orbifold.r() as i64).into());
    let theta_q = g.theta().scale(&r);
    Ok(g.mul(g).scale(&Rat::new(7.into(), 5.into())).add(&theta_q.scale(&k)))
}

/// The genus-two formula evaluated on the level-generator form of `G`,
/// with its `Ei2, Ei4` polynomial form for weight checks.
pub fn genus2_ppsi2(orbifold: Orbifold, trunc: i64) -> Result<Genus2, GenusError> {
    let k = genus2_derivative_coefficient(orbifold)?;
    let g = genus1_form(orbifold).eval(trunc)?.to_rational()?;
    let series = genus2_from(orbifold, &g)?.truncate(Rational64::from(trunc));
    let g = q("-1/12*Ei2");
    let r = Surd::from_int(orbifold.r() as i64);
    let form = g
        .mul(&g)
        .scale(&Surd::rational(Rat::new(7.into(), 5.into())))
        .add(&g.derive(&eisenstein_derivation)?.scale(&r).scale(&Surd::rational(k)));
    Ok(Genus2 { orbifold, series, form })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e_derivatives() {
        for (o, d) in [(Orbifold::X2, 4), (Orbifold::X3, 6), (Orbifold::X4, 8), (Orbifold::X6, 12)] {
            let want = Rat::new((-1).into(), d.into());
            assert_eq!(genus1_e_derivative(o).unwrap(), want);
            assert_eq!(genus1_ei2_route(o).unwrap(), want);
        }
    }

    #[test]
    fn getzler_small() {
        for o in Orbifold::WDVV {
            for inputs in [Inputs::ClosedForms, Inputs::Solver] {
                let rep = genus1_getzler(o, inputs, 12).unwrap();
                let want = genus1_closed(o, 12).unwrap();
                assert_eq!(rep.result, want, "{o} {inputs:?}");
                for (n, s) in &rep.forms {
                    assert_eq!(s, &want, "{o} {n}");
                }
            }
        }
    }
}
