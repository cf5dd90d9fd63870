//! Polynomials in generator ids with coefficients in `Q(radicals)`.
//!
//! A [`QuasiPoly`] is the closed form of a correlator, e.g.
//! `1/4*A@4*C@4` or `1/16*2^(1/2)*A@4*C@2`. It evaluates to a q-expansion,
//! carries a weight grading (each generator has a fixed half-integral weight
//! regardless of its argument `Q^m`) and a formal derivative in the
//! quasi-modular generator `E`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::expr::{parse_expr, Expr, ExprRing, ParseError};
use crate::modforms::{generator, GeneratorId, Kind, Level, ModformError};
use crate::series::Rat;
use crate::surd::{Radical, Surd, SurdSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("monomials {0} and {1} have different weights")]
    InhomogeneousPolynomial(String, String),
    #[error("the zero polynomial has no weight")]
    ZeroPolynomial,
    #[error("several quasi-modular generators: {0} and {1}")]
    MixedEGenerators(String, String),
    #[error("not a polynomial: {0}")]
    NotPolynomial(String),
    #[error("no derivative known for {0}")]
    NoDerivative(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Modform(#[from] ModformError),
}

/// Product of generator powers (exponents are positive).
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<GeneratorId, u32>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(id: GeneratorId) -> Self {
        Monomial(BTreeMap::from([(id, 1)]))
    }

    pub fn factors(&self) -> impl Iterator<Item = (&GeneratorId, u32)> {
        self.0.iter().map(|(g, k)| (g, *k))
    }

    pub fn degree_in(&self, id: &GeneratorId) -> u32 {
        self.0.get(id).copied().unwrap_or(0)
    }

    fn mul(&self, other: &Self) -> Self {
        let mut m = self.0.clone();
        for (g, k) in &other.0 {
            *m.entry(g.clone()).or_insert(0) += k;
        }
        Monomial(m)
    }

    fn without_one(&self, id: &GeneratorId) -> Self {
        let mut m = self.0.clone();
        if let Some(k) = m.get_mut(id) {
            *k -= 1;
            if *k == 0 {
                m.remove(id);
            }
        }
        Monomial(m)
    }

    pub fn doubled_weight(&self) -> i64 {
        self.0.iter().map(|(g, k)| g.doubled_weight() * *k as i64).sum()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(g, k)| {
                let s = g.to_string();
                if *k == 1 {
                    s
                } else {
                    format!("{s}^{k}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QuasiPoly {
    terms: BTreeMap<(Monomial, Radical), Rat>,
}

impl QuasiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: &Surd) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn term(c: &Surd, m: Monomial) -> Self {
        let mut p = Self::zero();
        if !c.is_zero() {
            p.terms.insert((m, c.rad.clone()), c.rat.clone());
        }
        p
    }

    pub fn var(id: GeneratorId) -> Self {
        Self::term(&Surd::one(), Monomial::var(id))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Surd)> {
        self.terms.iter().map(|((m, r), c)| {
            (
                m,
                Surd {
                    rat: c.clone(),
                    rad: r.clone(),
                },
            )
        })
    }

    /// Every generator that occurs.
    pub fn generators(&self) -> BTreeSet<GeneratorId> {
        self.terms.keys().flat_map(|(m, _)| m.0.keys().cloned()).collect()
    }

    fn add_term(&mut self, m: Monomial, c: Surd) {
        if c.is_zero() {
            return;
        }
        let key = (m, c.rad);
        let v = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *v += c.rat;
        if v.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(&Surd::from_int(-1))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Surd) -> Self {
        let mut out = Self::zero();
        for (m, x) in self.terms() {
            out.add_term(m.clone(), x.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, a) in self.terms() {
            for (mb, b) in other.terms() {
                out.add_term(ma.mul(mb), a.mul(&b));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(&Surd::one());
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Build from an expression; variables that `resolve` does not know are
    /// read as generator ids.
    pub fn from_expr(e: &Expr, resolve: &dyn Fn(&str) -> Option<QuasiPoly>) -> Result<Self, PolyError> {
        struct Ring<'a>(&'a dyn Fn(&str) -> Option<QuasiPoly>);
        impl ExprRing<QuasiPoly, PolyError> for Ring<'_> {
            fn constant(&self, c: &Surd) -> Result<QuasiPoly, PolyError> {
                Ok(QuasiPoly::constant(c))
            }
            fn var(&self, name: &str) -> Result<QuasiPoly, PolyError> {
                match (self.0)(name) {
                    Some(p) => Ok(p),
                    None => Ok(QuasiPoly::var(name.parse()?)),
                }
            }
            fn add(&self, a: &QuasiPoly, b: &QuasiPoly) -> QuasiPoly {
                a.add(b)
            }
            fn mul(&self, a: &QuasiPoly, b: &QuasiPoly) -> QuasiPoly {
                a.mul(b)
            }
            fn neg(&self, a: &QuasiPoly) -> QuasiPoly {
                a.neg()
            }
            fn pow(&self, a: &QuasiPoly, n: u32) -> QuasiPoly {
                a.pow(n)
            }
            fn theta(&self, a: &QuasiPoly) -> Result<QuasiPoly, PolyError> {
                Err(PolyError::NotPolynomial(format!("theta_q ({a})")))
            }
        }
        e.eval(&Ring(resolve))
    }

    /// Evaluate to a q-expansion known below `Q^order`.
    pub fn eval(&self, order: impl Into<Rational64>) -> Result<SurdSeries, PolyError> {
        let order = order.into();
        let mut base: HashMap<GeneratorId, SurdSeries> = HashMap::new();
        for g in self.generators() {
            base.insert(g.clone(), generator(&g, order)?);
        }
        let mut powers: HashMap<(GeneratorId, u32), SurdSeries> = HashMap::new();
        let mut acc = SurdSeries::constant(&Surd::zero()).truncate(order);
        for (m, c) in self.terms() {
            let mut t = SurdSeries::constant(&c);
            for (g, k) in m.factors() {
                let p = powers
                    .entry((g.clone(), k))
                    .or_insert_with(|| base[g].pow(k))
                    .clone();
                t = t.mul(&p);
            }
            acc = acc.add(&t);
        }
        Ok(acc.truncate(order))
    }

    /// The common weight of all monomials.
    pub fn weight(&self) -> Result<Rational64, PolyError> {
        let mut it = self.terms.keys();
        let (m0, _) = it.next().ok_or(PolyError::ZeroPolynomial)?;
        let w = m0.doubled_weight();
        for (m, _) in it {
            if m.doubled_weight() != w {
                return Err(PolyError::InhomogeneousPolynomial(m0.to_string(), m.to_string()));
            }
        }
        Ok(Rational64::new(w, 2))
    }

    /// The single quasi-modular generator (`E@N` or `Ei2`) that occurs, if any.
    pub fn e_generator(&self) -> Result<Option<GeneratorId>, PolyError> {
        let es: Vec<GeneratorId> = self.generators().into_iter().filter(|g| g.is_e_type()).collect();
        match es.as_slice() {
            [] => Ok(None),
            [e] => Ok(Some(e.clone())),
            [a, b, ..] => Err(PolyError::MixedEGenerators(a.to_string(), b.to_string())),
        }
    }

    /// Formal partial derivative in one generator.
    pub fn partial(&self, id: &GeneratorId) -> Self {
        let mut out = Self::zero();
        for (m, c) in self.terms() {
            let k = m.degree_in(id);
            if k > 0 {
                out.add_term(m.without_one(id), c.mul(&Surd::from_int(k as i64)));
            }
        }
        out
    }

    /// `d/dE` treating every other generator as independent of `E`.
    pub fn partial_e(&self) -> Result<Self, PolyError> {
        Ok(match self.e_generator()? {
            Some(e) => self.partial(&e),
            None => Self::zero(),
        })
    }

    /// `theta_Q` of the polynomial, from the derivatives of its generators.
    /// `table` gives `theta_Q g` for generators at argument `Q`; arguments
    /// `Q^m` are handled by the chain rule.
    pub fn derive(&self, table: &dyn Fn(&GeneratorId) -> Option<QuasiPoly>) -> Result<Self, PolyError> {
        let mut out = Self::zero();
        for g in self.generators() {
            let base = GeneratorId::new(g.kind.clone());
            let dg = table(&base).ok_or_else(|| PolyError::NoDerivative(g.to_string()))?;
            let dg = dg.at(g.arg).scale(&Surd::rational(Rat::new((*g.arg.numer()).into(), (*g.arg.denom()).into())));
            out = out.add(&self.partial(&g).mul(&dg));
        }
        Ok(out)
    }

    /// Substitute `Q -> Q^m` in every generator.
    pub fn at(&self, m: Rational64) -> Self {
        if m.is_one() {
            return self.clone();
        }
        let mut out = Self::zero();
        for (mono, c) in self.terms() {
            let mono = Monomial(mono.0.iter().map(|(g, k)| (g.clone().at(m), *k)).collect());
            out.add_term(mono, c);
        }
        out
    }
}

/// `theta_Q` of the Eisenstein series `Ei2, Ei4, Ei6`.
pub fn eisenstein_derivation(g: &GeneratorId) -> Option<QuasiPoly> {
    let p = |s: &str| s.parse::<QuasiPoly>().ok();
    match g.kind {
        Kind::Eisenstein(2) => p("1/12*Ei2^2 - 1/12*Ei4"),
        Kind::Eisenstein(4) => p("1/3*Ei2*Ei4 - 1/3*Ei6"),
        Kind::Eisenstein(6) => p("1/2*Ei2*Ei6 - 1/2*Ei4^2"),
        _ => None,
    }
}

/// `theta_Q` of the level 3 generators as polynomials in `A@3, C@3, E@3`.
pub fn level3_derivation(g: &GeneratorId) -> Option<QuasiPoly> {
    let p = |s: &str| s.parse::<QuasiPoly>().ok();
    match g.kind {
        Kind::A(Level::Three) => p("1/6*(A@3*E@3 + 2*C@3^3 - A@3^3)"),
        Kind::C(Level::Three) => p("1/6*C@3*(E@3 + A@3^2)"),
        Kind::E(Level::Three) => p("1/6*(E@3^2 - A@3^4)"),
        _ => None,
    }
}

/// `theta_Q` of the level 4 generators as polynomials in `A@4, C@4, E@4`,
/// with `B@4^2 = A@4^2 - C@4^2` eliminated.
pub fn level4_derivation(g: &GeneratorId) -> Option<QuasiPoly> {
    let p = |s: &str| s.parse::<QuasiPoly>().ok();
    match g.kind {
        Kind::A(Level::Four) => p("1/4*A@4*(E@4 + 2*C@4^2 - A@4^2)"),
        Kind::B(Level::Four) => p("1/4*B@4*(E@4 - A@4^2)"),
        Kind::C(Level::Four) => p("1/4*C@4*(E@4 + A@4^2)"),
        Kind::E(Level::Four) => p("1/4*(E@4^2 - A@4^4)"),
        _ => None,
    }
}

impl FromStr for QuasiPoly {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_expr(&parse_expr(s)?, &|_| None)
    }
}

impl fmt::Display for QuasiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.rat < Rat::zero();
            let a = Surd {
                rat: if neg { -c.rat.clone() } else { c.rat.clone() },
                rad: c.rad.clone(),
            };
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let ms = m.to_string();
            match (a == Surd::one(), ms == "1") {
                (true, _) => write!(f, "{ms}")?,
                (false, true) => write!(f, "{a}")?,
                (false, false) => write!(f, "{a}*{ms}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuasiPoly {
        s.parse().unwrap()
    }

    #[test]
    fn weights() {
        assert_eq!(q("A@4*C@4").weight().unwrap(), Rational64::from(2));
        assert_eq!(q("-(3*E@4 + A@4^2 + C@4^2)/16").weight().unwrap(), Rational64::from(2));
        assert!(matches!(q("A@4 + E@4").weight(), Err(PolyError::InhomogeneousPolynomial(..))));
        assert_eq!(q("1/4*theta2*theta2(Q^3)").weight().unwrap(), Rational64::from(1));
        assert_eq!(q("A@3(Q^2)").weight().unwrap(), Rational64::from(1));
        assert!(matches!(QuasiPoly::zero().weight(), Err(PolyError::ZeroPolynomial)));
    }

    #[test]
    fn partial_e() {
        let d = q("(-3*E@4 + 2*A@4^2 - C@4^2)/12").partial_e().unwrap();
        assert_eq!(d, q("-1/4"));
        assert!(q("A@4^3").partial_e().unwrap().is_zero());
        assert_eq!(q("E@4^2").partial_e().unwrap(), q("2*E@4"));
        assert!(matches!(q("E@4*Ei2").partial_e(), Err(PolyError::MixedEGenerators(..))));
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "1/4*A@4*C@4",
            "2^(-3/2)*C@2",
            "1/16*2^(1/2)*A@4*C@2 - 1/3",
            "E@1**A@1*E@1*",
            "-1/36*Ei2 + 1/2*theta{1/2,0}*theta{1/6,0}(Q^3)",
        ] {
            let p = q(s);
            assert_eq!(q(&p.to_string()), p, "{s} -> {p}");
        }
    }

    #[test]
    fn eval_basics() {
        assert_eq!(q("1").eval(5).unwrap().to_rational().unwrap(), crate::series::QSeries::one().truncate(5.into()));
        let z = q("A@4^2 - B@4^2 - C@4^2").eval(20).unwrap();
        assert!(z.is_zero());
        let c2 = q("2^(-3/2)*C@2").eval(6).unwrap().to_rational().unwrap();
        assert_eq!(c2.leading().unwrap().1, &Rat::one());
    }

    #[test]
    fn chain_rule_for_arguments() {
        let p = q("Ei2(Q^2)");
        let d = p.derive(&eisenstein_derivation).unwrap();
        assert_eq!(d, q("1/6*Ei2(Q^2)^2 - 1/6*Ei4(Q^2)"));
        let lhs = p.eval(20).unwrap().theta();
        assert!(lhs.sub(&d.eval(20).unwrap()).is_zero());
    }

    #[test]
    fn level_derivations_match_series() {
        let tables: [(&str, &dyn Fn(&GeneratorId) -> Option<QuasiPoly>); 2] =
            [("3", &level3_derivation), ("4", &level4_derivation)];
        for (n, table) in tables {
            for g in ["A", "C", "E"] {
                let p = q(&format!("{g}@{n}"));
                let d = p.derive(table).unwrap();
                let diff = p.eval(30).unwrap().theta().sub(&d.eval(30).unwrap());
                assert!(diff.is_zero(), "theta {g}@{n}");
            }
        }
        let b = q("B@4");
        assert!(b.eval(30).unwrap().theta().sub(&b.derive(&level4_derivation).unwrap().eval(30).unwrap()).is_zero());
    }
}
