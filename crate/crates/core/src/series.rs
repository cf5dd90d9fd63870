//! Truncated formal power series in fractional powers of `Q`.
//!
//! A [`QSeries`] stores `sum c_k Q^(k/D)` sparsely on a grid of denominator `D`
//! together with a truncation exponent: every coefficient below `Q^(T/D)` is
//! exact, nothing at or beyond it is claimed. Series without a truncation are
//! exact finite sums (constants, monomials, polynomials).
//!
//! Truncation is tracked pessimistically, so a claimed coefficient never
//! depends on a discarded tail.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::rat::{format_rat, parse_rat, rational_root};

/// Exact rational coefficient.
pub type Rat = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeriesError {
    #[error("division by a series that vanishes to its truncation order")]
    DivisionByZeroSeries,
    #[error("quotient would have a pole: valuation {dividend} below divisor valuation {divisor}")]
    NegativeValuation {
        dividend: Rational64,
        divisor: Rational64,
    },
    #[error("leading coefficient {coeff} has no rational {r}-th root")]
    IrrationalLeadingRoot { coeff: Rat, r: u32 },
    #[error("series is known below Q^{available}, but Q^{requested} was requested")]
    InsufficientTruncation {
        requested: Rational64,
        available: Rational64,
    },
    #[error("root of the zero series")]
    ZeroRoot,
    #[error("quotient of two exact series does not terminate; truncate one side first")]
    UnboundedQuotient,
    #[error("malformed series: {0}")]
    Malformed(String),
}

/// First exponent where two series differ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub exponent: Rational64,
    pub left: Rat,
    pub right: Rat,
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Q^{}: {} vs {}",
            self.exponent,
            format_rat(&self.left),
            format_rat(&self.right)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    den: i64,
    coeffs: BTreeMap<i64, Rat>,
    /// `None` means exact (finite support, nothing discarded).
    trunc: Option<i64>,
}

fn lcm(a: i64, b: i64) -> i64 {
    a / a.gcd(&b) * b
}

fn min_trunc(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `None` plays the role of +infinity here.
fn add_inf(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    Some(a? + b?)
}

fn below(k: i64, t: Option<i64>) -> bool {
    t.is_none_or(|t| k < t)
}

/// Dense coefficient block: exponent of entry `i` is `start + i * step` on the grid.
struct Dense {
    start: i64,
    step: i64,
    vals: Vec<Rat>,
}

impl QSeries {
    fn build(den: i64, coeffs: BTreeMap<i64, Rat>, trunc: Option<i64>) -> Self {
        let mut s = QSeries { den, coeffs, trunc };
        s.canonicalize();
        s
    }

    fn canonicalize(&mut self) {
        let t = self.trunc;
        self.coeffs.retain(|k, v| !v.is_zero() && below(*k, t));
        let mut g = self.den;
        for k in self.coeffs.keys() {
            g = g.gcd(k);
        }
        if let Some(t) = self.trunc {
            g = g.gcd(&t);
        }
        if g > 1 {
            self.den /= g;
            self.coeffs = std::mem::take(&mut self.coeffs)
                .into_iter()
                .map(|(k, v)| (k / g, v))
                .collect();
            self.trunc = self.trunc.map(|t| t / g);
        }
    }

    /// The exact zero series.
    pub fn zero() -> Self {
        QSeries {
            den: 1,
            coeffs: BTreeMap::new(),
            trunc: None,
        }
    }

    /// Zero known to vanish only below `Q^order`.
    pub fn zero_to(order: Rational64) -> Self {
        Self::monomial(Rat::zero(), Rational64::zero()).truncate(order)
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Self {
        Self::monomial(c, Rational64::zero())
    }

    /// `c * Q^e`, exact. Panics if `e < 0`.
    pub fn monomial(c: Rat, e: Rational64) -> Self {
        assert!(!e.is_negative(), "negative exponent {e}");
        let den = *e.denom();
        let mut coeffs = BTreeMap::new();
        coeffs.insert(*e.numer(), c);
        Self::build(den, coeffs, None)
    }

    /// Build from `(exponent, coefficient)` pairs; repeated exponents are summed.
    /// `order` truncates (exclusive); `None` keeps the sum exact.
    pub fn from_terms<I>(terms: I, order: Option<Rational64>) -> Result<Self, SeriesError>
    where
        I: IntoIterator<Item = (Rational64, Rat)>,
    {
        let terms: Vec<_> = terms.into_iter().collect();
        let mut den = order.map_or(1, |o| *o.denom());
        for (e, _) in &terms {
            if e.is_negative() {
                return Err(SeriesError::NegativeValuation {
                    dividend: *e,
                    divisor: Rational64::zero(),
                });
            }
            den = lcm(den, *e.denom());
        }
        let mut coeffs: BTreeMap<i64, Rat> = BTreeMap::new();
        for (e, c) in terms {
            let k = e.numer() * (den / e.denom());
            *coeffs.entry(k).or_insert_with(Rat::zero) += c;
        }
        let trunc = order.map(|o| o.numer() * (den / o.denom()));
        Ok(Self::build(den, coeffs, trunc))
    }

    /// Integer-exponent series `sum c[n] Q^n` known below `Q^c.len()`.
    pub fn from_dense(c: Vec<Rat>) -> Self {
        let t = c.len() as i64;
        Self::build(1, c.into_iter().enumerate().map(|(i, v)| (i as i64, v)).collect(), Some(t))
    }

    pub fn grid_denominator(&self) -> i64 {
        self.den
    }

    /// Truncation exponent, `None` for exact series.
    pub fn trunc(&self) -> Option<Rational64> {
        self.trunc.map(|t| Rational64::new(t, self.den))
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none()
    }

    /// True if no coefficient below the truncation is nonzero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Smallest exponent with a nonzero coefficient.
    pub fn valuation(&self) -> Option<Rational64> {
        self.coeffs
            .keys()
            .next()
            .map(|k| Rational64::new(*k, self.den))
    }

    pub fn leading(&self) -> Option<(Rational64, &Rat)> {
        self.coeffs
            .iter()
            .next()
            .map(|(k, v)| (Rational64::new(*k, self.den), v))
    }

    /// Coefficient of `Q^e`; zero if absent. Does not check the truncation.
    pub fn coeff(&self, e: Rational64) -> Rat {
        if (self.den % e.denom()) != 0 {
            return Rat::zero();
        }
        let k = e.numer() * (self.den / e.denom());
        self.coeffs.get(&k).cloned().unwrap_or_else(Rat::zero)
    }

    /// Coefficient of `Q^e`, failing if it lies at or beyond the truncation.
    pub fn coeff_checked(&self, e: Rational64) -> Result<Rat, SeriesError> {
        if let Some(t) = self.trunc() {
            if e >= t {
                return Err(SeriesError::InsufficientTruncation {
                    requested: e + Rational64::new(1, *e.denom()),
                    available: t,
                });
            }
        }
        Ok(self.coeff(e))
    }

    /// Nonzero terms in ascending exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (Rational64, &Rat)> + '_ {
        self.coeffs
            .iter()
            .map(move |(k, v)| (Rational64::new(*k, self.den), v))
    }

    /// Number of stored nonzero coefficients.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn regrid(&self, den: i64) -> (BTreeMap<i64, Rat>, Option<i64>) {
        let f = den / self.den;
        if f == 1 {
            return (self.coeffs.clone(), self.trunc);
        }
        (
            self.coeffs.iter().map(|(k, v)| (k * f, v.clone())).collect(),
            self.trunc.map(|t| t * f),
        )
    }

    /// Drop everything at or beyond `Q^order`.
    pub fn truncate(&self, order: Rational64) -> Self {
        let den = lcm(self.den, *order.denom());
        let (coeffs, t) = self.regrid(den);
        let new_t = order.numer() * (den / order.denom());
        Self::build(den, coeffs, min_trunc(t, Some(new_t)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let den = lcm(self.den, other.den);
        let (mut a, ta) = self.regrid(den);
        let (b, tb) = other.regrid(den);
        let t = min_trunc(ta, tb);
        for (k, v) in b {
            *a.entry(k).or_insert_with(Rat::zero) += v;
        }
        Self::build(den, a, t)
    }

    pub fn neg(&self) -> Self {
        QSeries {
            den: self.den,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, -v)).collect(),
            trunc: self.trunc,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return QSeries {
                den: self.den,
                coeffs: BTreeMap::new(),
                trunc: self.trunc,
            }
            .canonical();
        }
        QSeries {
            den: self.den,
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect(),
            trunc: self.trunc,
        }
    }

    fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Grid valuation, or the truncation for an empty truncated series, or
    /// `None` (+infinity) for the exact zero.
    fn val_or_trunc(&self) -> Option<i64> {
        self.coeffs.keys().next().copied().or(self.trunc)
    }

    /// Dense layout on grid `den`, only the exponents below `limit`.
    fn dense(&self, den: i64, limit: Option<i64>) -> Option<Dense> {
        let f = den / self.den;
        let start = *self.coeffs.keys().next()? * f;
        let mut step = 0i64;
        for k in self.coeffs.keys() {
            step = step.gcd(&(k * f - start));
        }
        let end = match limit {
            Some(l) => l,
            None => self.coeffs.keys().next_back().unwrap() * f + 1,
        };
        if end <= start {
            return Some(Dense {
                start,
                step,
                vals: Vec::new(),
            });
        }
        // step 0 marks a single term
        let n = if step == 0 { 1 } else { ((end - start) + step - 1) / step };
        let mut vals = vec![Rat::zero(); n as usize];
        for (k, v) in &self.coeffs {
            let i = if step == 0 { 0 } else { (k * f - start) / step };
            if i < n {
                vals[i as usize] = v.clone();
            }
        }
        Some(Dense { start, step, vals })
    }

    /// Cauchy product. The result is known below `min(T_a + v_b, T_b + v_a)`.
    pub fn mul(&self, other: &Self) -> Self {
        let den = lcm(self.den, other.den);
        let fa = den / self.den;
        let fb = den / other.den;
        let va = self.val_or_trunc().map(|v| v * fa);
        let vb = other.val_or_trunc().map(|v| v * fb);
        let ta = self.trunc.map(|t| t * fa);
        let tb = other.trunc.map(|t| t * fb);
        let t = match (ta, tb) {
            (None, None) => None,
            _ => {
                let c1 = if ta.is_some() { add_inf(ta, vb) } else { None };
                let c2 = if tb.is_some() { add_inf(tb, va) } else { None };
                min_trunc(c1, c2)
            }
        };
        if self.is_zero() || other.is_zero() {
            return Self::build(den, BTreeMap::new(), t);
        }
        let (a0, b0) = (va.unwrap(), vb.unwrap());
        let la = t.map(|t| t - b0);
        let lb = t.map(|t| t - a0);
        let da = self.dense(den, la).unwrap();
        let db = other.dense(den, lb).unwrap();
        let step = da.step.gcd(&db.step).max(1);
        let ra = da.step / step;
        let rb = db.step / step;
        let start = da.start + db.start;
        let len = match t {
            Some(t) => ((t - start) + step - 1) / step,
            None => {
                ((da.vals.len() as i64 - 1) * ra + (db.vals.len() as i64 - 1) * rb) + 1
            }
        }
        .max(0) as usize;
        let (an, ad) = scaled_ints(&da.vals);
        let (bn, bd) = scaled_ints(&db.vals);
        let mut out = vec![BigInt::zero(); len];
        for (i, x) in an.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let oi = i * ra as usize;
            if oi >= len {
                break;
            }
            for (j, y) in bn.iter().enumerate() {
                let o = oi + j * rb as usize;
                if o >= len {
                    break;
                }
                if !y.is_zero() {
                    out[o] += x * y;
                }
            }
        }
        let d = ad * bd;
        let coeffs = out
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (start + i as i64 * step, Rat::new(v, d.clone())))
            .collect();
        Self::build(den, coeffs, t)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::one();
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / b`, known below `min(T_a - v_b, T_b + v_a - 2 v_b)`.
    pub fn div(&self, b: &Self) -> Result<Self, SeriesError> {
        let den = lcm(self.den, b.den);
        let fa = den / self.den;
        let fb = den / b.den;
        let vb = match b.coeffs.keys().next() {
            Some(k) => k * fb,
            None => return Err(SeriesError::DivisionByZeroSeries),
        };
        let va = self.val_or_trunc().map(|v| v * fa);
        if let Some(va) = va {
            if va < vb {
                return Err(SeriesError::NegativeValuation {
                    dividend: Rational64::new(va, den),
                    divisor: Rational64::new(vb, den),
                });
            }
        }
        let ta = self.trunc.map(|t| t * fa);
        let tb = b.trunc.map(|t| t * fb);
        let c1 = ta.map(|t| t - vb);
        let c2 = match (tb, va) {
            (Some(tb), Some(va)) => Some(tb + va - 2 * vb),
            _ => None,
        };
        let mut t = min_trunc(c1, c2);
        if t.is_none() {
            if self.is_zero() {
                return Ok(Self::zero());
            }
            if b.coeffs.len() != 1 {
                return Err(SeriesError::UnboundedQuotient);
            }
            // exact division by a monomial
            let c = b.coeffs.values().next().unwrap();
            let coeffs = self
                .coeffs
                .iter()
                .map(|(k, v)| (k * fa - vb, v / c))
                .collect();
            return Ok(Self::build(den, coeffs, None));
        }
        if self.is_zero() {
            return Ok(Self::build(den, BTreeMap::new(), t));
        }
        let va = va.unwrap();
        let start = va - vb;
        let tt = t.unwrap();
        // shifted numerator / unit divisor on a common step
        let da = self.dense(den, Some(tt + vb)).unwrap();
        let db = b.dense(den, Some(tt - start + vb)).unwrap();
        let step = da.step.gcd(&db.step).max(1);
        let n = ((tt - start) + step - 1) / step;
        let n = n.max(0) as usize;
        let mut a = vec![Rat::zero(); n];
        for (i, v) in da.vals.iter().enumerate() {
            let idx = (i as i64 * da.step) / step;
            if (idx as usize) < n {
                a[idx as usize] = v.clone();
            }
        }
        let mut u: Vec<(usize, Rat)> = Vec::new();
        for (i, v) in db.vals.iter().enumerate() {
            if !v.is_zero() {
                let idx = (i as i64 * db.step / step) as usize;
                if idx < n {
                    u.push((idx, v.clone()));
                }
            }
        }
        let b0 = u[0].1.clone();
        let inv_b0 = b0.recip();
        let mut q: Vec<Rat> = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = a[i].clone();
            for (j, bj) in u.iter().skip(1) {
                if *j > i {
                    break;
                }
                let qi = &q[i - j];
                if !qi.is_zero() {
                    s -= bj * qi;
                }
            }
            q.push(s * &inv_b0);
        }
        let coeffs = q
            .into_iter()
            .enumerate()
            .map(|(i, v)| (start + i as i64 * step, v))
            .collect();
        t = Some(tt);
        Ok(Self::build(den, coeffs, t))
    }

    /// `theta_Q = Q d/dQ`: the coefficient of `Q^e` is multiplied by `e`.
    pub fn theta(&self) -> Self {
        let den = Rat::from_integer(BigInt::from(self.den));
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, v)| (*k, v * Rat::from_integer(BigInt::from(*k)) / &den))
            .collect();
        Self::build(self.den, coeffs, self.trunc)
    }

    /// Substitute `Q -> Q^(num/den)`.
    pub fn substitute_power(&self, num: u32, den: u32) -> Self {
        assert!(num > 0 && den > 0, "substitution exponent must be positive");
        let (num, d) = (num as i64, den as i64);
        let coeffs = self.coeffs.iter().map(|(k, v)| (k * num, v.clone())).collect();
        Self::build(self.den * d, coeffs, self.trunc.map(|t| t * num))
    }

    /// Substitute `Q -> Q^m` for a positive rational `m`.
    pub fn substitute(&self, m: Rational64) -> Self {
        assert!(m.is_positive(), "substitution exponent must be positive");
        self.substitute_power(*m.numer() as u32, *m.denom() as u32)
    }

    /// The series `g` with `g^r = self` and positive leading coefficient when `r` is even.
    ///
    /// The valuation is divided by `r`, refining the grid as needed.
    /// The result is known below `T - (r-1) v / r`.
    pub fn root(&self, r: u32) -> Result<Self, SeriesError> {
        let c0 = match self.leading() {
            Some((_, c)) => c.clone(),
            None => return Err(SeriesError::ZeroRoot),
        };
        let lead = rational_root(&c0, r).ok_or(SeriesError::IrrationalLeadingRoot {
            coeff: c0.clone(),
            r,
        })?;
        Ok(self.unit_root(r)?.scale(&lead))
    }

    /// Like [`QSeries::root`] but normalized to leading coefficient one, so the
    /// leading coefficient of `self` may be any nonzero rational.
    pub fn unit_root(&self, r: u32) -> Result<Self, SeriesError> {
        assert!(r > 0, "root index must be positive");
        let (v, c0) = match self.leading() {
            Some((v, c)) => (v, c.clone()),
            None => return Err(SeriesError::ZeroRoot),
        };
        let Some(t) = self.trunc() else {
            if self.coeffs.len() == 1 {
                return Ok(Self::monomial(Rat::one(), v / r as i64));
            }
            return Err(SeriesError::UnboundedQuotient);
        };
        let vk = *self.coeffs.keys().next().unwrap();
        let d = self.dense(self.den, self.trunc).unwrap();
        let step = d.step;
        let n = d.vals.len();
        let inv_c0 = c0.recip();
        let u: Vec<(usize, Rat)> = d
            .vals
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, x)| (i, x * &inv_c0))
            .collect();
        // Miller's recurrence for u^(1/r): n g_n = sum_k ((1/r + 1) k - n) u_k g_{n-k}
        let rr = BigInt::from(r);
        let mut g: Vec<Rat> = Vec::with_capacity(n);
        g.push(Rat::one());
        for m in 1..n {
            let mut s = Rat::zero();
            for (k, uk) in &u {
                if *k > m {
                    break;
                }
                let gm = &g[m - k];
                if gm.is_zero() {
                    continue;
                }
                let w = BigInt::from((r as i64 + 1) * *k as i64 - r as i64 * m as i64);
                if w.is_zero() {
                    continue;
                }
                s += uk * gm * Rat::from_integer(w);
            }
            g.push(s / Rat::from_integer(&rr * BigInt::from(m)));
        }
        // shift by v/r on the refined grid
        let nden = self.den * r as i64;
        let shift = vk;
        let coeffs = g
            .into_iter()
            .enumerate()
            .map(|(i, x)| (shift + (i as i64 * step) * r as i64, x))
            .collect();
        let new_t = t - v + v / r as i64;
        let nt = new_t.numer() * (nden / new_t.denom());
        Ok(Self::build(nden, coeffs, Some(nt)))
    }

    /// Compare coefficients at every exponent below `Q^order`.
    ///
    /// `Ok(None)` means equal; `Ok(Some(m))` reports the smallest mismatch.
    pub fn equal_upto(&self, other: &Self, order: Rational64) -> Result<Option<Mismatch>, SeriesError> {
        for s in [self, other] {
            if let Some(t) = s.trunc() {
                if t < order {
                    return Err(SeriesError::InsufficientTruncation {
                        requested: order,
                        available: t,
                    });
                }
            }
        }
        let diff = self.sub(other).truncate(order);
        Ok(diff.leading().map(|(e, _)| Mismatch {
            exponent: e,
            left: self.coeff(e),
            right: other.coeff(e),
        }))
    }

    /// Exact equality of all claimed coefficients up to the shorter truncation.
    pub fn agrees_with(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// First exponent whose coefficient is not an integer after scaling by `scale`.
    pub fn first_non_integer(&self, scale: &BigInt) -> Option<(Rational64, Rat)> {
        let s = Rat::from_integer(scale.clone());
        self.terms()
            .map(|(e, c)| (e, c * &s))
            .find(|(_, c)| !c.is_integer())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("series serialization cannot fail")
    }
}

/// Common-denominator integer numerators of a rational vector.
fn scaled_ints(v: &[Rat]) -> (Vec<BigInt>, BigInt) {
    let mut d = BigInt::one();
    for x in v {
        if !x.denom().is_one() {
            d = d.lcm(x.denom());
        }
    }
    let nums = v
        .iter()
        .map(|x| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                x.numer() * (&d / x.denom())
            }
        })
        .collect();
    (nums, d)
}

#[derive(Serialize, Deserialize)]
struct SeriesJson {
    grid_denominator: i64,
    trunc: Option<i64>,
    coeffs: Vec<(i64, String)>,
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SeriesJson {
            grid_denominator: self.den,
            trunc: self.trunc,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, v)| (*k, format!("{}/{}", v.numer(), v.denom())))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QSeries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let j = SeriesJson::deserialize(d)?;
        if j.grid_denominator <= 0 {
            return Err(D::Error::custom("grid_denominator must be positive"));
        }
        let mut coeffs = BTreeMap::new();
        for (k, c) in j.coeffs {
            if k < 0 {
                return Err(D::Error::custom("negative exponent"));
            }
            let v = parse_rat(&c).map_err(D::Error::custom)?;
            *coeffs.entry(k).or_insert_with(Rat::zero) += v;
        }
        Ok(QSeries::build(j.grid_denominator, coeffs, j.trunc))
    }
}

impl FromStr for QSeries {
    type Err = SeriesError;

    /// Parses the JSON series format.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_str(s).map_err(|e| SeriesError::Malformed(e.to_string()))
    }
}

fn fmt_exp(f: &mut fmt::Formatter<'_>, e: Rational64) -> fmt::Result {
    if e.is_integer() {
        write!(f, "Q^{}", e.numer())
    } else {
        write!(f, "Q^({}/{})", e.numer(), e.denom())
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.terms() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{}", format_rat(&a))?;
            } else {
                if !a.is_one() {
                    write!(f, "{}*", format_rat(&a))?;
                }
                fmt_exp(f, e)?;
            }
        }
        if let Some(t) = self.trunc() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "O(")?;
            fmt_exp(f, t)?;
            write!(f, ")")?;
        } else if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl std::ops::Add for &QSeries {
    type Output = QSeries;
    fn add(self, o: &QSeries) -> QSeries {
        QSeries::add(self, o)
    }
}

impl std::ops::Sub for &QSeries {
    type Output = QSeries;
    fn sub(self, o: &QSeries) -> QSeries {
        QSeries::sub(self, o)
    }
}

impl std::ops::Mul for &QSeries {
    type Output = QSeries;
    fn mul(self, o: &QSeries) -> QSeries {
        QSeries::mul(self, o)
    }
}

impl std::ops::Neg for &QSeries {
    type Output = QSeries;
    fn neg(self) -> QSeries {
        QSeries::neg(self)
    }
}

/// Convert a small rational to `i64` parts when it fits.
pub fn rat_to_r64(x: &Rat) -> Option<Rational64> {
    Some(Rational64::new(x.numer().to_i64()?, x.denom().to_i64()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    fn e(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn poly(cs: &[i64], order: i64) -> QSeries {
        QSeries::from_terms(
            cs.iter().enumerate().map(|(i, c)| (e(i as i64, 1), r(*c))),
            Some(e(order, 1)),
        )
        .unwrap()
    }

    #[test]
    fn cancellation() {
        let a = poly(&[1, 1], 10);
        let b = poly(&[1, -1], 10);
        let s = a.add(&b);
        assert_eq!(s.terms().count(), 1);
        assert_eq!(s.coeff(e(0, 1)), r(2));
    }

    #[test]
    fn monomial_product_refines_grid() {
        let a = QSeries::monomial(r(1), e(1, 2));
        let b = QSeries::monomial(r(1), e(1, 3));
        let p = a.mul(&b);
        assert_eq!(p.grid_denominator(), 6);
        assert_eq!(p.coeff(e(5, 6)), r(1));
        assert!(p.is_exact());
    }

    #[test]
    fn product_truncation_rule() {
        // a known below Q^10 with valuation 0, b = Q^2 (1 + Q) known below Q^5
        let a = poly(&[1, 1], 10);
        let b = QSeries::from_terms([(e(2, 1), r(1)), (e(3, 1), r(1))], Some(e(5, 1))).unwrap();
        let p = a.mul(&b);
        assert_eq!(p.trunc(), Some(e(5, 1)));
        let p = b.mul(&a);
        assert_eq!(p.trunc(), Some(e(5, 1)));
        let c = QSeries::monomial(r(1), e(3, 1));
        assert_eq!(a.mul(&c).trunc(), Some(e(13, 1)));
    }

    #[test]
    fn geometric_series() {
        let one = QSeries::one().truncate(e(8, 1));
        let d = poly(&[1, -1], 8);
        let g = one.div(&d).unwrap();
        for k in 0..8 {
            assert_eq!(g.coeff(e(k, 1)), r(1));
        }
        assert_eq!(g.trunc(), Some(e(8, 1)));
    }

    #[test]
    fn div_exact_factor() {
        let a = poly(&[1, 0, -1], 10);
        let b = poly(&[1, -1], 10);
        let q = a.div(&b).unwrap();
        assert!(q.equal_upto(&poly(&[1, 1], 10), e(10, 1)).unwrap().is_none());
    }

    #[test]
    fn div_errors() {
        let a = poly(&[1], 5);
        assert_eq!(a.div(&QSeries::zero_to(e(5, 1))), Err(SeriesError::DivisionByZeroSeries));
        let b = QSeries::monomial(r(1), e(1, 1));
        assert!(matches!(a.div(&b), Err(SeriesError::NegativeValuation { .. })));
    }

    #[test]
    fn theta_of_constant_is_zero() {
        assert!(QSeries::constant(r(7)).theta().is_zero());
        let m = QSeries::monomial(r(3), e(5, 6)).theta();
        assert_eq!(m.coeff(e(5, 6)), Rat::new(5.into(), 2.into()));
    }

    #[test]
    fn substitution() {
        let q = QSeries::monomial(r(1), e(1, 1));
        assert_eq!(q.substitute_power(2, 1), QSeries::monomial(r(1), e(2, 1)));
        let s = poly(&[1, 2, 3], 3).substitute_power(1, 3);
        assert_eq!(s.trunc(), Some(e(1, 1)));
        assert_eq!(s.coeff(e(2, 3)), r(3));
    }

    #[test]
    fn square_root() {
        let u = QSeries::monomial(r(1), e(1, 24));
        let f = QSeries::one().add(&u.scale(&r(2))).add(&u.mul(&u)).truncate(e(1, 1));
        let g = f.root(2).unwrap();
        assert!(g
            .equal_upto(&QSeries::one().add(&u).truncate(e(1, 1)), e(1, 1))
            .unwrap()
            .is_none());
    }

    #[test]
    fn irrational_root() {
        let f = poly(&[2, 1], 5);
        assert!(matches!(f.root(2), Err(SeriesError::IrrationalLeadingRoot { .. })));
    }

    #[test]
    fn root_refines_valuation() {
        // Q (1 + Q)^2, cube root has valuation 1/3
        let f = QSeries::from_terms([(e(1, 1), r(8)), (e(2, 1), r(16)), (e(3, 1), r(8))], Some(e(10, 1)))
            .unwrap();
        let g = f.root(3).unwrap();
        assert_eq!(g.valuation(), Some(e(1, 3)));
        assert_eq!(g.leading().unwrap().1, &r(2));
        assert_eq!(g.trunc(), Some(e(10, 1) - e(2, 3)));
        let back = g.pow(3);
        assert!(back.equal_upto(&f, g.trunc().unwrap()).unwrap().is_none());
    }

    #[test]
    fn equality_reports() {
        let a = poly(&[1, 1], 5);
        let b = poly(&[1, 2], 5);
        let m = a.equal_upto(&b, e(5, 1)).unwrap().unwrap();
        assert_eq!(m.exponent, e(1, 1));
        assert_eq!((m.left, m.right), (r(1), r(2)));
        assert!(matches!(
            a.equal_upto(&a, e(6, 1)),
            Err(SeriesError::InsufficientTruncation { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let s = QSeries::from_terms(
            [(e(1, 24), r(1)), (e(25, 24), Rat::new((-3).into(), 7.into()))],
            Some(e(2, 1)),
        )
        .unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(j, r#"{"grid_denominator":24,"trunc":48,"coeffs":[[1,"1/1"],[25,"-3/7"]]}"#);
        let back: QSeries = j.parse().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn display() {
        let s = QSeries::from_terms([(e(0, 1), r(1)), (e(1, 3), r(-3))], Some(e(2, 1))).unwrap();
        assert_eq!(s.to_string(), "1 - 3*Q^(1/3) + O(Q^2)");
    }
}
