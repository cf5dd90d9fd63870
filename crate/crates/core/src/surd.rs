//! Real algebraic prefactors of the form `c * p1^e1 * ... * pk^ek`.
//!
//! A few generators (the level 1 and level 2 `C`) and some correlator closed
//! forms carry factors such as `2^(3/2)` or `432^(1/6)`. These are kept exact
//! as a rational times a [`Radical`], a product of distinct primes raised to
//! exponents strictly between 0 and 1. Distinct radicals are linearly
//! independent over the rationals, so a [`SurdSeries`] (one rational series per
//! radical) is zero exactly when every component is.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::rat::{format_rat, rational_root};
use crate::series::{Mismatch, QSeries, Rat, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurdError {
    #[error("cannot factor {0} into small primes")]
    Unfactorable(BigInt),
    #[error("even root of a negative number")]
    NegativeEvenRoot,
    #[error("value has an irrational component {0}")]
    Irrational(String),
    #[error("root of a series with several irrational components")]
    MixedRoot,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// `prod p^e` over distinct primes with `0 < e < 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radical(BTreeMap<u64, Rational64>);

fn floor_frac(e: Rational64) -> (i64, Rational64) {
    let f = e.floor().to_integer();
    (f, e - Rational64::from(f))
}

fn int_pow_rat(p: u64, n: i64) -> Rat {
    let b = BigInt::from(p).pow(n.unsigned_abs() as u32);
    if n >= 0 {
        Rat::from_integer(b)
    } else {
        Rat::new(BigInt::one(), b)
    }
}

const TRIAL_LIMIT: u64 = 1 << 20;

/// Prime factorization by trial division. Large prime cofactors are refused.
fn factor(n: &BigInt) -> Result<BTreeMap<u64, i64>, SurdError> {
    let mut out = BTreeMap::new();
    let mut m = n.abs();
    let mut p: u64 = 2;
    while !m.is_one() {
        if p > TRIAL_LIMIT {
            return Err(SurdError::Unfactorable(n.clone()));
        }
        if let Some(small) = m.to_u64() {
            if p * p > small {
                *out.entry(small).or_insert(0) += 1;
                break;
            }
        }
        let bp = BigInt::from(p);
        while m.is_multiple_of(&bp) {
            m /= &bp;
            *out.entry(p).or_insert(0) += 1;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    Ok(out)
}

impl Radical {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (u64, Rational64)> + '_ {
        self.0.iter().map(|(p, e)| (*p, *e))
    }

    /// Build `prod p^e` from arbitrary rational exponents, splitting off the
    /// rational part.
    fn normalize(exps: BTreeMap<u64, Rational64>) -> (Rat, Radical) {
        let mut c = Rat::one();
        let mut r = BTreeMap::new();
        for (p, e) in exps {
            let (f, frac) = floor_frac(e);
            c *= int_pow_rat(p, f);
            if !frac.is_zero() {
                r.insert(p, frac);
            }
        }
        (c, Radical(r))
    }

    pub fn mul(&self, other: &Self) -> (Rat, Radical) {
        let mut exps = self.0.clone();
        for (p, e) in &other.0 {
            *exps.entry(*p).or_insert_with(Rational64::zero) += e;
        }
        Self::normalize(exps)
    }

    pub fn pow(&self, k: Rational64) -> (Rat, Radical) {
        Self::normalize(self.0.iter().map(|(p, e)| (*p, e * k)).collect())
    }

    /// Approximate value, for display only.
    pub fn to_f64(&self) -> f64 {
        self.0
            .iter()
            .map(|(p, e)| (*p as f64).powf(e.to_f64().unwrap_or(0.0)))
            .product()
    }
}

impl fmt::Display for Radical {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.0.iter().map(|(p, e)| format!("{p}^({e})")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// `rat * rad`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Surd {
    pub rat: Rat,
    pub rad: Radical,
}

impl Surd {
    pub fn rational(c: Rat) -> Self {
        Surd {
            rat: c,
            rad: Radical::one(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::rational(Rat::from_integer(n.into()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.rad.is_one() || self.rat.is_zero()
    }

    pub fn as_rational(&self) -> Option<&Rat> {
        self.is_rational().then_some(&self.rat)
    }

    /// `base^exp` for a positive rational base.
    pub fn power_of(base: &Rat, exp: Rational64) -> Result<Self, SurdError> {
        if base.is_zero() {
            return Ok(if exp.is_positive() {
                Self::zero()
            } else {
                Self::one()
            });
        }
        if base.is_negative() {
            if exp.is_integer() {
                let n = exp.to_integer();
                let mut s = Self::power_of(&-base, exp)?;
                if n % 2 != 0 {
                    s.rat = -s.rat;
                }
                return Ok(s);
            }
            if exp.denom() % 2 == 0 {
                return Err(SurdError::NegativeEvenRoot);
            }
            let mut s = Self::power_of(&-base, exp)?;
            if exp.numer() % 2 != 0 {
                s.rat = -s.rat;
            }
            return Ok(s);
        }
        let mut exps: BTreeMap<u64, Rational64> = BTreeMap::new();
        for (p, k) in factor(base.numer())? {
            *exps.entry(p).or_insert_with(Rational64::zero) += exp * k;
        }
        for (p, k) in factor(base.denom())? {
            *exps.entry(p).or_insert_with(Rational64::zero) -= exp * k;
        }
        let (c, rad) = Radical::normalize(exps);
        Ok(Surd { rat: c, rad })
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (c, rad) = self.rad.mul(&other.rad);
        Surd {
            rat: &self.rat * &other.rat * c,
            rad,
        }
    }

    pub fn recip(&self) -> Self {
        let (c, rad) = self.rad.pow(Rational64::from(-1));
        Surd {
            rat: self.rat.recip() * c,
            rad,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let (c, rad) = self.rad.pow(Rational64::from(n as i64));
        Surd {
            rat: num_traits::pow(self.rat.clone(), n as usize) * c,
            rad,
        }
    }

    /// Real `r`-th root (positive for even `r`).
    pub fn root(&self, r: u32) -> Result<Self, SurdError> {
        let k = Rational64::new(1, r as i64);
        if let Some(q) = rational_root(&self.rat, r) {
            let (c, rad) = self.rad.pow(k);
            return Ok(Surd { rat: q * c, rad });
        }
        let base = Self::power_of(&self.rat, k)?;
        let (c, rad) = self.rad.pow(k);
        Ok(base.mul(&Surd { rat: c, rad }))
    }

    pub fn to_f64(&self) -> f64 {
        self.rat.to_f64().unwrap_or(f64::NAN) * self.rad.to_f64()
    }
}

impl fmt::Display for Surd {
    /// `3/4`, `2^(1/2)`, `-1/16*2^(1/2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", format_rat(&self.rat));
        }
        if self.rat.is_one() {
            write!(f, "{}", self.rad)
        } else if (-&self.rat).is_one() {
            write!(f, "-{}", self.rad)
        } else {
            write!(f, "{}*{}", format_rat(&self.rat), self.rad)
        }
    }
}

/// A series with coefficients in `Q(radicals)`, one rational series per radical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurdSeries {
    parts: BTreeMap<Radical, QSeries>,
}

impl From<QSeries> for SurdSeries {
    fn from(s: QSeries) -> Self {
        SurdSeries {
            parts: BTreeMap::from([(Radical::one(), s)]),
        }
    }
}

impl SurdSeries {
    pub fn zero() -> Self {
        QSeries::zero().into()
    }

    pub fn constant(c: &Surd) -> Self {
        Self::scaled(c, &QSeries::one())
    }

    /// `c * s`.
    pub fn scaled(c: &Surd, s: &QSeries) -> Self {
        let mut out = SurdSeries {
            parts: BTreeMap::from([(c.rad.clone(), s.scale(&c.rat))]),
        };
        out.tidy();
        out
    }

    /// Drop exact zero components; truncated zeros carry information and stay.
    fn tidy(&mut self) {
        self.parts.retain(|_, s| !(s.is_zero() && s.is_exact()));
        if self.parts.is_empty() {
            self.parts.insert(Radical::one(), QSeries::zero());
        }
    }

    pub fn parts(&self) -> impl Iterator<Item = (&Radical, &QSeries)> {
        self.parts.iter()
    }

    pub fn trunc(&self) -> Option<Rational64> {
        self.parts.values().filter_map(|s| s.trunc()).min()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.values().all(|s| s.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.parts.iter().all(|(r, s)| r.is_one() || s.is_zero())
    }

    /// The rational series, or an error naming an irrational component.
    pub fn to_rational(&self) -> Result<QSeries, SurdError> {
        let mut out = QSeries::zero();
        for (r, s) in &self.parts {
            if r.is_one() || s.is_zero() {
                out = out.add(s);
            } else {
                return Err(SurdError::Irrational(format!("{r}*({s})")));
            }
        }
        Ok(out)
    }

    /// `(radical, rational series)` when the value is a single radical times a
    /// rational series.
    pub fn single(&self) -> Option<(&Radical, &QSeries)> {
        let nz: Vec<_> = self.parts.iter().filter(|(_, s)| !s.is_zero()).collect();
        match nz.as_slice() {
            [] => self.parts.iter().next(),
            [one] => Some(*one),
            _ => None,
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&QSeries, &QSeries) -> QSeries) -> Self {
        let mut parts = self.parts.clone();
        for (r, s) in &other.parts {
            let cur = parts.remove(r).unwrap_or_else(QSeries::zero);
            parts.insert(r.clone(), f(&cur, s));
        }
        for (r, s) in self.parts.iter() {
            if !other.parts.contains_key(r) {
                parts.insert(r.clone(), f(s, &QSeries::zero()));
            }
        }
        let mut out = SurdSeries { parts };
        out.tidy();
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        self.map(|s| s.neg())
    }

    fn map(&self, f: impl Fn(&QSeries) -> QSeries) -> Self {
        let mut out = SurdSeries {
            parts: self.parts.iter().map(|(r, s)| (r.clone(), f(s))).collect(),
        };
        out.tidy();
        out
    }

    pub fn scale(&self, c: &Surd) -> Self {
        let mut acc: Option<SurdSeries> = None;
        for (r, s) in &self.parts {
            let (k, rad) = r.mul(&c.rad);
            let term = SurdSeries {
                parts: BTreeMap::from([(rad, s.scale(&(&k * &c.rat)))]),
            };
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        let mut out = acc.unwrap_or_else(Self::zero);
        out.tidy();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut parts: BTreeMap<Radical, QSeries> = BTreeMap::new();
        for (ra, a) in &self.parts {
            for (rb, b) in &other.parts {
                let (k, rad) = ra.mul(rb);
                let p = a.mul(b).scale(&k);
                let cur = parts.remove(&rad).unwrap_or_else(QSeries::zero);
                parts.insert(rad, cur.add(&p));
            }
        }
        let mut out = SurdSeries { parts };
        out.tidy();
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(&Surd::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Division by a series with a single radical component.
    pub fn div(&self, other: &Self) -> Result<Self, SurdError> {
        let (rb, b) = other.single().ok_or(SurdError::MixedRoot)?;
        let inv = Surd {
            rat: Rat::one(),
            rad: rb.clone(),
        }
        .recip();
        let mut parts = BTreeMap::new();
        for (ra, a) in &self.parts {
            parts.insert(ra.clone(), a.div(b)?);
        }
        Ok(SurdSeries { parts }.scale(&inv))
    }

    /// Real `r`-th root of a single-component series.
    pub fn root(&self, r: u32) -> Result<Self, SurdError> {
        let (rad, s) = self.single().ok_or(SurdError::MixedRoot)?;
        let (_, c) = s.leading().ok_or(SeriesError::ZeroRoot)?;
        let lead = Surd {
            rat: c.clone(),
            rad: rad.clone(),
        }
        .root(r)?;
        let u = s.unit_root(r)?;
        Ok(Self::scaled(&lead, &u))
    }

    pub fn theta(&self) -> Self {
        self.map(|s| s.theta())
    }

    pub fn substitute(&self, m: Rational64) -> Self {
        self.map(|s| s.substitute(m))
    }

    pub fn truncate(&self, order: Rational64) -> Self {
        self.map(|s| s.truncate(order))
    }

    /// Componentwise comparison below `Q^order`.
    pub fn equal_upto(&self, other: &Self, order: Rational64) -> Result<Option<(Radical, Mismatch)>, SurdError> {
        let diff = self.sub(other);
        if let Some(t) = self.trunc().into_iter().chain(other.trunc()).min() {
            if t < order {
                return Err(SeriesError::InsufficientTruncation {
                    requested: order,
                    available: t,
                }
                .into());
            }
        }
        let mut best: Option<(Radical, Mismatch)> = None;
        for (r, d) in &diff.parts {
            if let Some((e, _)) = d.truncate(order).leading() {
                if best.as_ref().is_none_or(|(_, m)| e < m.exponent) {
                    let pick = |x: &Self| {
                        x.parts
                            .get(r)
                            .map(|s| s.coeff(e))
                            .unwrap_or_else(Rat::zero)
                    };
                    best = Some((
                        r.clone(),
                        Mismatch {
                            exponent: e,
                            left: pick(self),
                            right: pick(other),
                        },
                    ));
                }
            }
        }
        Ok(best)
    }

    pub fn to_json(&self) -> serde_json::Value {
        if let Ok(s) = self.to_rational() {
            return s.to_json();
        }
        if let Some((r, s)) = self.single() {
            let mut v = s.to_json();
            v["prefactor"] = serde_json::Value::String(r.to_string());
            return v;
        }
        let comps: Vec<_> = self
            .parts
            .iter()
            .map(|(r, s)| {
                let mut v = s.to_json();
                v["prefactor"] = serde_json::Value::String(r.to_string());
                v
            })
            .collect();
        serde_json::json!({ "components": comps })
    }
}

impl fmt::Display for SurdSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (r, s) in &self.parts {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if r.is_one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "{r}*({s})")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn power_splits_rational_part() {
        let s = Surd::power_of(&r(2, 1), Rational64::new(3, 2)).unwrap();
        assert_eq!(s.to_string(), "2*2^(1/2)");
        let s = Surd::power_of(&r(432, 1), Rational64::new(1, 6)).unwrap();
        assert_eq!(s.to_string(), "2^(2/3)*3^(1/2)");
        let s = Surd::power_of(&r(2, 1), Rational64::new(-3, 2)).unwrap();
        assert_eq!(s.to_string(), "1/4*2^(1/2)");
        assert!((s.to_f64() - 2f64.powf(-1.5)).abs() < 1e-15);
        let s = Surd::power_of(&r(-8, 27), Rational64::new(1, 3)).unwrap();
        assert_eq!(s.to_string(), "-2/3");
    }

    #[test]
    fn radicals_multiply_back_to_rationals() {
        let h = Surd::power_of(&r(2, 1), Rational64::new(1, 2)).unwrap();
        assert_eq!(h.mul(&h), Surd::from_int(2));
        assert_eq!(h.pow(3).to_string(), "2*2^(1/2)");
        assert_eq!(h.recip().mul(&h), Surd::one());
        assert_eq!(Surd::from_int(8).root(6).unwrap().to_string(), "2^(1/2)");
    }

    #[test]
    fn series_components_are_independent() {
        let h = Surd::power_of(&r(2, 1), Rational64::new(1, 2)).unwrap();
        let a = SurdSeries::scaled(&h, &QSeries::one()).add(&QSeries::one().into());
        assert!(a.to_rational().is_err());
        let sq = a.mul(&a);
        // (1 + sqrt2)^2 = 3 + 2 sqrt2
        let want = SurdSeries::constant(&Surd::from_int(3)).add(&SurdSeries::constant(&h.mul(&Surd::from_int(2))));
        assert_eq!(sq, want);
        let c6 = SurdSeries::scaled(&h, &QSeries::one()).pow(6);
        assert_eq!(c6.to_rational().unwrap(), QSeries::constant(r(8, 1)));
    }

    #[test]
    fn root_with_irrational_leading_coefficient() {
        let s = QSeries::from_dense(vec![r(2, 1), r(2, 1)]).truncate(Rational64::from(5));
        let root = SurdSeries::from(s.clone()).root(2).unwrap();
        let (rad, _) = root.single().unwrap();
        assert_eq!(rad.to_string(), "2^(1/2)");
        assert_eq!(root.pow(2).to_rational().unwrap(), s);
    }
}
