//! Explicit genus-zero potentials of `X2` and `X3`.
//!
//! A potential is a polynomial in flat coordinates whose coefficients are
//! quasi-modular forms in `Q`. The coordinate `t` dual to the point class `P`
//! enters through `q = e^t`, so differentiating along it applies
//! `theta_q = r theta_Q` to the coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use super::registry::{correlators, resolve_form};
use super::{Orbifold, WdvvError};
use crate::expr::{parse_expr, ExprRing};
use crate::quasipoly::{level3_derivation, level4_derivation, QuasiPoly};
use crate::series::Rat;
use crate::surd::Surd;

type Exponents = Vec<u32>;

/// Polynomial in the flat coordinates with quasi-modular coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TPoly(BTreeMap<Exponents, QuasiPoly>);

impl TPoly {
    fn add_term(&mut self, m: Exponents, c: QuasiPoly) {
        let e = self.0.entry(m).or_default();
        *e = e.add(&c);
        self.0.retain(|_, c| !c.is_zero());
    }

    fn constant(n: usize, c: QuasiPoly) -> Self {
        let mut t = TPoly::default();
        t.add_term(vec![0; n], c);
        t
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &QuasiPoly)> {
        self.0.iter()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &o.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        TPoly(self.0.iter().map(|(m, c)| (m.clone(), c.neg())).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = TPoly::default();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &o.0 {
                let m = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                out.add_term(m, ca.mul(cb));
            }
        }
        out
    }

    fn scale(&self, c: &QuasiPoly) -> Self {
        let mut out = TPoly::default();
        for (m, x) in &self.0 {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    /// Derivative in coordinate `i`, ignoring any dependence of the coefficients.
    fn explicit_partial(&self, i: usize) -> Self {
        let mut out = TPoly::default();
        for (m, c) in &self.0 {
            if m[i] > 0 {
                let mut m2 = m.clone();
                m2[i] -= 1;
                out.add_term(m2, c.scale(&Surd::from_int(m[i] as i64)));
            }
        }
        out
    }
}

/// Genus-zero potential with its coordinates and inverse pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Potential {
    pub orbifold: Orbifold,
    /// Coordinate names; index 0 is the unit, index 1 the point class.
    pub coords: Vec<String>,
    /// Insertion each coordinate stands for, e.g. `D1^2`.
    pub insertions: Vec<String>,
    /// Nonzero entries of the inverse pairing.
    pub eta: Vec<(usize, usize, Rat)>,
    pub f: TPoly,
}

const X2_POTENTIAL: &str = "1/2*t0^2*t + 1/4*t0*(t1^2 + t2^2 + t3^2 + t4^2) + X*t1*t2*t3*t4 \
    + 1/24*Y*(t1^4 + t2^4 + t3^4 + t4^4) \
    + 1/4*Z*(t1^2*t2^2 + t1^2*t3^2 + t1^2*t4^2 + t2^2*t3^2 + t2^2*t4^2 + t3^2*t4^2)";

const X3_POTENTIAL: &[&str] = &[
    "1/2*t0^2*t",
    "1/3*t0*(t1*t6 + t2*t5 + t3*t4)",
    "t1*t2*t3*(1/3*C@3)",
    "1/6*(t1^3 + t2^3 + t3^3)*(1/3*A@3)",
    "(t1*t2*t5*t6 + t1*t3*t4*t6 + t2*t3*t4*t5)*(1/18*(A@3^2 - E@3))",
    "1/2*(t1^2*t4*t5 + t2^2*t4*t6 + t3^2*t5*t6)*(1/9*C@3^2)",
    "1/2*(t1*t2*t4^2 + t1*t3*t5^2 + t2*t3*t6^2)*(1/9*A@3*C@3)",
    "1/4*(t1^2*t6^2 + t2^2*t5^2 + t3^2*t4^2)*(-1/9*E@3)",
    "1/2*(t1*t4*t5*t6^2 + t2*t4*t5^2*t6 + t3*t4^2*t5*t6)*(1/27*A@3*C@3^2)",
    "1/4*(t1*t4^2*t5^2 + t2*t4^2*t6^2 + t3*t5^2*t6^2)*(1/27*A@3^2*C@3)",
    "1/6*(t1*t6*(t4^3 + t5^3) + t2*t5*(t4^3 + t6^3) + t3*t4*(t5^3 + t6^3))*(1/27*C@3^3)",
    "1/24*(t1*t6^4 + t2*t5^4 + t3*t4^4)*(1/27*A@3^3)",
    "1/8*t4^2*t5^2*t6^2*(1/81*(2*C@3^4 + A@3^3*C@3))",
    "1/36*(t4^3*t5^3 + t4^3*t6^3 + t5^3*t6^3)*(1/27*A@3*C@3^3)",
    "1/24*(t4*t5*t6^4 + t4*t5^4*t6 + t4^4*t5*t6)*(1/27*A@3^2*C@3^2)",
    "1/720*(t4^6 + t5^6 + t6^6)*(1/27*(2*A@3*C@3^3 - A@3^4))",
];

struct Ring<'a> {
    orbifold: Orbifold,
    coords: &'a [String],
}

impl ExprRing<TPoly, WdvvError> for Ring<'_> {
    fn constant(&self, c: &Surd) -> Result<TPoly, WdvvError> {
        Ok(TPoly::constant(self.coords.len(), QuasiPoly::constant(c)))
    }
    fn var(&self, name: &str) -> Result<TPoly, WdvvError> {
        let n = self.coords.len();
        if let Some(i) = self.coords.iter().position(|c| c == name) {
            let mut m = vec![0; n];
            m[i] = 1;
            return Ok(TPoly(BTreeMap::from([(m, QuasiPoly::constant(&Surd::one()))])));
        }
        Ok(TPoly::constant(n, resolve_form(self.orbifold, name)?))
    }
    fn add(&self, a: &TPoly, b: &TPoly) -> TPoly {
        a.add(b)
    }
    fn mul(&self, a: &TPoly, b: &TPoly) -> TPoly {
        a.mul(b)
    }
    fn neg(&self, a: &TPoly) -> TPoly {
        a.neg()
    }
    fn pow(&self, a: &TPoly, n: u32) -> TPoly {
        let mut out = TPoly::constant(self.coords.len(), QuasiPoly::constant(&Surd::one()));
        for _ in 0..n {
            out = out.mul(a);
        }
        out
    }
    fn theta(&self, _: &TPoly) -> Result<TPoly, WdvvError> {
        Err(WdvvError::Fixture {
            line: 0,
            msg: "theta_q inside a potential".into(),
        })
    }
}

/// The genus-zero potential of `X2` or `X3`.
pub fn potential(orbifold: Orbifold) -> Result<Potential, WdvvError> {
    let text = match orbifold {
        Orbifold::X2 => X2_POTENTIAL.to_string(),
        Orbifold::X3 => X3_POTENTIAL.join(" + "),
        _ => return Err(WdvvError::UnsupportedOrbifold(orbifold)),
    };
    potential_with_text(orbifold, &text)
}

/// A potential of `X2` or `X3` given as text in the coordinates `t0, t, t1, ...`.
/// Coefficients may name generators and registry correlators.
pub fn potential_with_text(orbifold: Orbifold, text: &str) -> Result<Potential, WdvvError> {
    let (coords, insertions, eta): (Vec<&str>, Vec<&str>, Vec<(usize, usize, i64)>) = match orbifold {
        Orbifold::X2 => (
            vec!["t0", "t", "t1", "t2", "t3", "t4"],
            vec!["1", "P", "D1", "D2", "D3", "D4"],
            vec![(0, 1, 1), (2, 2, 2), (3, 3, 2), (4, 4, 2), (5, 5, 2)],
        ),
        Orbifold::X3 => (
            vec!["t0", "t", "t1", "t2", "t3", "t4", "t5", "t6"],
            vec!["1", "P", "D1", "D2", "D3", "D3^2", "D2^2", "D1^2"],
            vec![(0, 1, 1), (2, 7, 3), (3, 6, 3), (4, 5, 3)],
        ),
        _ => return Err(WdvvError::UnsupportedOrbifold(orbifold)),
    };
    let coords: Vec<String> = coords.into_iter().map(String::from).collect();
    let f = parse_expr(text)?.eval(&Ring {
        orbifold,
        coords: &coords,
    })?;
    let mut sym = Vec::new();
    for (i, j, v) in eta {
        sym.push((i, j, Rat::from_integer(v.into())));
        if i != j {
            sym.push((j, i, Rat::from_integer(v.into())));
        }
    }
    Ok(Potential {
        orbifold,
        coords,
        insertions: insertions.into_iter().map(String::from).collect(),
        eta: sym,
        f,
    })
}

/// One coefficient of a potential and the correlator it encodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoefficientRow {
    pub monomial: String,
    pub coefficient: String,
    /// Coefficient times the factorials of the exponents.
    pub correlator: String,
    pub insertions: Vec<String>,
    /// Registry correlator equal to this one up to relabelling the points.
    pub matches: Option<String>,
}

fn factorial(n: u32) -> i64 {
    (1..=n as i64).product()
}

impl Potential {
    fn derivation(&self) -> fn(&crate::modforms::GeneratorId) -> Option<QuasiPoly> {
        match self.orbifold {
            Orbifold::X2 => level4_derivation,
            _ => level3_derivation,
        }
    }

    /// `d/dt_i`; along the point class this includes `theta_q` of the coefficients.
    pub fn partial(&self, p: &TPoly, i: usize) -> Result<TPoly, WdvvError> {
        let mut out = p.explicit_partial(i);
        if i == 1 {
            let r = Surd::from_int(self.orbifold.r() as i64);
            let table = self.derivation();
            for (m, c) in p.terms() {
                let d = c.derive(&table)?.scale(&r);
                out.add_term(m.clone(), d);
            }
        }
        Ok(out)
    }

    pub fn monomial_name(&self, m: &[u32]) -> String {
        let parts: Vec<String> = m
            .iter()
            .zip(&self.coords)
            .filter(|(k, _)| **k > 0)
            .map(|(k, c)| if *k == 1 { c.clone() } else { format!("{c}^{k}") })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    fn parse_monomial(&self, text: &str) -> Result<Exponents, WdvvError> {
        let p = parse_expr(text)?.eval(&Ring {
            orbifold: self.orbifold,
            coords: &self.coords,
        })?;
        match p.0.into_iter().next() {
            Some((m, c)) if c == QuasiPoly::constant(&Surd::one()) => Ok(m),
            _ => Err(WdvvError::UnknownVariable(text.to_string())),
        }
    }

    /// Coefficient of a monomial such as `t1^3` (zero when absent).
    pub fn coefficient(&self, monomial: &str) -> Result<QuasiPoly, WdvvError> {
        let m = self.parse_monomial(monomial)?;
        Ok(self.f.0.get(&m).cloned().unwrap_or_default())
    }

    /// Every coefficient, keyed by monomial name.
    pub fn coefficients(&self) -> BTreeMap<String, QuasiPoly> {
        self.f.terms().map(|(m, c)| (self.monomial_name(m), c.clone())).collect()
    }

    /// Coefficients together with the correlators they encode.
    pub fn rows(&self) -> Result<Vec<CoefficientRow>, WdvvError> {
        let table = correlators(self.orbifold)?;
        let mut out = Vec::new();
        for (m, c) in self.f.terms() {
            let fact: i64 = m.iter().map(|k| factorial(*k)).product();
            let corr = c.scale(&Surd::from_int(fact));
            let insertions: Vec<String> = m
                .iter()
                .enumerate()
                .flat_map(|(i, k)| std::iter::repeat_n(self.insertions[i].clone(), *k as usize))
                .collect();
            let matches = table
                .iter()
                .find(|k| same_up_to_relabelling(&insertions, &k.insertions))
                .map(|k| k.name.to_string());
            out.push(CoefficientRow {
                monomial: self.monomial_name(m),
                coefficient: c.to_string(),
                correlator: corr.to_string(),
                insertions,
                matches,
            });
        }
        Ok(out)
    }

    /// `sum_{e,f} F_abe eta^ef F_fcd`.
    fn contract(&self, third: &BTreeMap<Vec<usize>, TPoly>, a: usize, b: usize, c: usize, d: usize) -> TPoly {
        let get = |x: usize, y: usize, z: usize| {
            let mut k = vec![x, y, z];
            k.sort_unstable();
            &third[&k]
        };
        let mut out = TPoly::default();
        for (e, f, v) in &self.eta {
            let w = QuasiPoly::constant(&Surd::rational(v.clone()));
            out = out.add(&get(a, b, *e).mul(get(*f, c, d)).scale(&w));
        }
        out
    }

    /// Check every WDVV equation symbolically. Coefficients that do not cancel
    /// as polynomials in the generators are compared as `Q`-series.
    pub fn check_wdvv(&self, order: i64) -> Result<WdvvCheck, WdvvError> {
        let n = self.coords.len();
        let mut first = Vec::new();
        for i in 0..n {
            first.push(self.partial(&self.f, i)?);
        }
        let mut third: BTreeMap<Vec<usize>, TPoly> = BTreeMap::new();
        for a in 0..n {
            for b in a..n {
                let ab = self.partial(&first[a], b)?;
                for c in b..n {
                    third.insert(vec![a, b, c], self.partial(&ab, c)?);
                }
            }
        }
        let mut report = WdvvCheck::default();
        for a in 0..n {
            for b in a..n {
                for c in b..n {
                    for d in c..n {
                        let s = self.contract(&third, a, b, c, d);
                        for other in [self.contract(&third, a, c, b, d), self.contract(&third, a, d, b, c)] {
                            report.equations += 1;
                            let diff = s.sub(&other);
                            if diff.is_zero() {
                                report.symbolic += 1;
                                continue;
                            }
                            let mut ok = true;
                            for (_, coef) in diff.terms() {
                                if !coef.eval(Rational64::from(order))?.is_zero() {
                                    ok = false;
                                }
                            }
                            if ok {
                                report.by_series += 1;
                            } else {
                                report.failures.push(format!("({a}{b}|{c}{d})"));
                            }
                        }
                    }
                }
            }
        }
        Ok(report)
    }
}

fn point_label(s: &str) -> Option<(u32, u32)> {
    let rest = s.strip_prefix('D')?;
    let (i, k) = match rest.split_once('^') {
        Some((i, k)) => (i, k.parse().ok()?),
        None => (rest, 1),
    };
    Some((i.parse().ok()?, k))
}

fn permutations(n: u32) -> Vec<Vec<u32>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n);
            out.push(q);
        }
    }
    out
}

/// Equal as multisets after some permutation of the orbifold points.
fn same_up_to_relabelling<A: AsRef<str>, B: AsRef<str>>(a: &[A], b: &[B]) -> bool {
    let pa: Option<Vec<_>> = a.iter().map(|s| point_label(s.as_ref())).collect();
    let pb: Option<Vec<_>> = b.iter().map(|s| point_label(s.as_ref())).collect();
    let (Some(pa), Some(mut pb)) = (pa, pb) else {
        return false;
    };
    if pa.len() != pb.len() {
        return false;
    }
    pb.sort_unstable();
    let points = pa.iter().chain(&pb).map(|(i, _)| *i).max().unwrap_or(0);
    permutations(points).into_iter().any(|perm| {
        let mut q: Vec<(u32, u32)> = pa.iter().map(|(i, k)| (perm[*i as usize - 1], *k)).collect();
        q.sort_unstable();
        q == pb
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct WdvvCheck {
    pub equations: usize,
    pub symbolic: usize,
    pub by_series: usize,
    pub failures: Vec<String>,
}

impl WdvvCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for WdvvCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} equations: {} cancel symbolically, {} as series, {} fail",
            self.equations,
            self.symbolic,
            self.by_series,
            self.failures.len()
        )
    }
}

/// Coefficients of the potential keyed by monomial, e.g. `t1^3`.
pub fn potential_coefficients(orbifold: Orbifold) -> Result<BTreeMap<String, QuasiPoly>, WdvvError> {
    Ok(potential(orbifold)?.coefficients())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potentials_satisfy_wdvv() {
        for o in [Orbifold::X2, Orbifold::X3] {
            let p = potential(o).unwrap();
            let c = p.check_wdvv(20).unwrap();
            println!("{o}: {c}");
            assert!(c.passed(), "{o}: {:?}", c.failures);
        }
    }

    #[test]
    fn rows_match_registry() {
        let p = potential(Orbifold::X3).unwrap();
        for r in p.rows().unwrap() {
            println!("{:<16} {:<12?} {}", r.monomial, r.matches, r.correlator);
        }
        assert_eq!(p.coefficient("t1^3").unwrap().scale(&Surd::from_int(6)), "1/3*A@3".parse().unwrap());
    }
}
