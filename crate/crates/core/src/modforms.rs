//! q-expansions of the modular objects used throughout: Eisenstein series,
//! the Dedekind eta function, theta constants with characteristics, the `A2`
//! lattice theta function, and the generators `A, B, C, E` of the level
//! `N = 1*, 2, 3, 4` rings of (quasi-)modular forms.
//!
//! The generators are built from eta quotients. Theta-function expressions for
//! the same objects live in [`theta_forms`] and are only used for cross-checks.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::series::{QSeries, Rat, SeriesError};
use crate::surd::{Surd, SurdError, SurdSeries};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModformError {
    #[error("theta characteristic ({a}, {b}) has a non-real phase")]
    IrrationalPhase { a: Rational64, b: Rational64 },
    #[error("unsupported generator: {0}")]
    UnsupportedCombination(String),
    #[error("cannot parse generator id {0:?}")]
    Parse(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Surd(#[from] SurdError),
}

/// Level tag. `One` is only used by `E@1`, the `Ei2` convention for the level
/// one genus-one check; `A@1`, `B@1`, `C@1` are read as `1*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    One,
    OneStar,
    Two,
    Three,
    Four,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::OneStar, Level::Two, Level::Three, Level::Four];

    pub fn info(self) -> LevelInfo {
        let (n, r, kappa) = match self {
            Level::One | Level::OneStar => (1, 6, 432),
            Level::Two => (2, 4, 64),
            Level::Three => (3, 3, 27),
            Level::Four => (4, 2, 16),
        };
        LevelInfo {
            level: self,
            n,
            r,
            kappa,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Level::One => "1",
            Level::OneStar => "1*",
            Level::Two => "2",
            Level::Three => "3",
            Level::Four => "4",
        }
    }
}

/// Arithmetic data of a level: `A^r = B^r + C^r` and `C = (kappa Q)^(1/r) (1 + O(Q))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelInfo {
    pub level: Level,
    pub n: u32,
    pub r: u32,
    pub kappa: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Eta,
    /// `theta2`, `theta3`, `theta4`.
    ThetaConst(u8),
    /// `theta{a,b}` with `0 <= a < 1`.
    ThetaChar(Rational64, Rational64),
    /// `Ei2`, `Ei4`, `Ei6`.
    Eisenstein(u8),
    /// `thetaA2`, the `A2` lattice theta function.
    ThetaA2,
    A(Level),
    B(Level),
    C(Level),
    E(Level),
}

/// A named modular object evaluated at `Q^arg`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GeneratorId {
    pub kind: Kind,
    pub arg: Rational64,
}

impl GeneratorId {
    pub fn new(kind: Kind) -> Self {
        GeneratorId {
            kind,
            arg: Rational64::one(),
        }
    }

    pub fn at(mut self, m: impl Into<Rational64>) -> Self {
        self.arg *= m.into();
        self
    }

    /// Twice the modular weight.
    pub fn doubled_weight(&self) -> i64 {
        match self.kind {
            Kind::Eta | Kind::ThetaConst(_) | Kind::ThetaChar(..) => 1,
            Kind::Eisenstein(k) => 2 * k as i64,
            Kind::ThetaA2 | Kind::A(_) | Kind::B(_) | Kind::C(_) => 2,
            Kind::E(_) => 4,
        }
    }

    /// `E@N` and `Ei2`, the generators that are only quasi-modular.
    pub fn is_e_type(&self) -> bool {
        matches!(self.kind, Kind::E(_) | Kind::Eisenstein(2))
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Eta => write!(f, "eta"),
            Kind::ThetaConst(j) => write!(f, "theta{j}"),
            Kind::ThetaChar(a, b) => write!(f, "theta{{{a},{b}}}"),
            Kind::Eisenstein(k) => write!(f, "Ei{k}"),
            Kind::ThetaA2 => write!(f, "thetaA2"),
            Kind::A(l) => write!(f, "A@{}", l.tag()),
            Kind::B(l) => write!(f, "B@{}", l.tag()),
            Kind::C(l) => write!(f, "C@{}", l.tag()),
            Kind::E(l) => write!(f, "E@{}", l.tag()),
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.arg.is_one() {
            write!(f, "(Q^{})", self.arg)?;
        }
        Ok(())
    }
}

fn parse_r64(s: &str) -> Option<Rational64> {
    let s = s.trim();
    let s = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            (q != 0).then(|| Rational64::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Rational64::from),
    }
}

fn reduce_mod1(a: Rational64) -> Rational64 {
    a - a.floor()
}

impl FromStr for GeneratorId {
    type Err = ModformError;

    /// `kind[@level][(Q^m)]`, e.g. `A@4`, `C@3(Q^2)`, `theta{1/6,0}(Q^3)`, `Ei2(Q^1/2)`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModformError::Parse(s.to_string());
        let s = s.trim();
        let (head, arg) = match s.find("(Q") {
            Some(i) => {
                let tail = s[i..].strip_prefix("(Q").unwrap().strip_suffix(')').ok_or_else(bad)?;
                let arg = if tail.is_empty() {
                    Rational64::one()
                } else {
                    parse_r64(tail.strip_prefix('^').ok_or_else(bad)?).ok_or_else(bad)?
                };
                (&s[..i], arg)
            }
            None => (s, Rational64::one()),
        };
        if !arg.is_positive() {
            return Err(bad());
        }
        let kind = if let Some((k, lvl)) = head.split_once('@') {
            let level = match lvl {
                "1" => Level::One,
                "1*" => Level::OneStar,
                "2" => Level::Two,
                "3" => Level::Three,
                "4" => Level::Four,
                _ => return Err(bad()),
            };
            let abc = if level == Level::One {
                Level::OneStar
            } else {
                level
            };
            match k {
                "A" => Kind::A(abc),
                "B" => Kind::B(abc),
                "C" => Kind::C(abc),
                "E" => Kind::E(level),
                _ => return Err(bad()),
            }
        } else if let Some(ch) = head.strip_prefix("theta{") {
            let ch = ch.strip_suffix('}').ok_or_else(bad)?;
            let (a, b) = ch.split_once(',').ok_or_else(bad)?;
            let a = parse_r64(a).ok_or_else(bad)?;
            let b = parse_r64(b).ok_or_else(bad)?;
            Kind::ThetaChar(reduce_mod1(a), b)
        } else {
            match head {
                "eta" => Kind::Eta,
                "theta2" => Kind::ThetaConst(2),
                "theta3" => Kind::ThetaConst(3),
                "theta4" => Kind::ThetaConst(4),
                "Ei2" => Kind::Eisenstein(2),
                "Ei4" => Kind::Eisenstein(4),
                "Ei6" => Kind::Eisenstein(6),
                "thetaA2" => Kind::ThetaA2,
                _ => return Err(bad()),
            }
        };
        Ok(GeneratorId { kind, arg })
    }
}

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn r64(n: i64) -> Rational64 {
    Rational64::from(n)
}

fn ceil_int(o: Rational64) -> i64 {
    o.ceil().to_integer()
}

fn divisor_power_sums(n_max: usize, p: u32) -> Vec<BigInt> {
    let mut s = vec![BigInt::zero(); n_max + 1];
    for d in 1..=n_max {
        let dp = BigInt::from(d).pow(p);
        for m in (d..=n_max).step_by(d) {
            s[m] += &dp;
        }
    }
    s
}

/// `Ei_k = 1 + c_k sum sigma_{k-1}(n) Q^n`, known below `Q^order`.
pub fn eisenstein(k: u32, order: impl Into<Rational64>) -> Result<QSeries, ModformError> {
    let order = order.into();
    let c = match k {
        2 => -24,
        4 => 240,
        6 => -504,
        _ => return Err(ModformError::UnsupportedCombination(format!("Ei{k}"))),
    };
    let n = ceil_int(order).max(1) as usize;
    let sig = divisor_power_sums(n, k - 1);
    let terms = (0..n).map(|i| {
        let v = if i == 0 {
            Rat::one()
        } else {
            Rat::from_integer(&sig[i] * c)
        };
        (r64(i as i64), v)
    });
    Ok(QSeries::from_terms(terms, Some(order))?)
}

/// `prod_{n>=1} (1 - Q^n)` from Euler's pentagonal number theorem.
pub fn eta_unit(order: impl Into<Rational64>) -> QSeries {
    let order = order.into();
    let mut terms = vec![(r64(0), Rat::one())];
    let mut k: i64 = 1;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if r64(e1) >= order {
            break;
        }
        terms.push((r64(e1), rat(sign)));
        if r64(e2) < order {
            terms.push((r64(e2), rat(sign)));
        }
        k += 1;
    }
    QSeries::from_terms(terms, Some(order)).expect("pentagonal terms are well formed")
}

/// Dedekind eta `Q^(1/24) prod (1 - Q^n)`.
pub fn eta(order: impl Into<Rational64>) -> QSeries {
    let order = order.into();
    let shift = Rational64::new(1, 24);
    let u = eta_unit(order - shift);
    QSeries::monomial(Rat::one(), shift).mul(&u).truncate(order)
}

/// `theta_{a,b}(0, m tau) = sum_n exp(2 pi i (n+a) b) Q^(m (n+a)^2 / 2)`.
///
/// Only characteristics whose phases are all `+1` or `-1` are supported.
pub fn theta_char(
    a: Rational64,
    b: Rational64,
    m: Rational64,
    order: impl Into<Rational64>,
) -> Result<QSeries, ModformError> {
    let order = order.into();
    assert!(m.is_positive(), "theta argument must be positive");
    let a = reduce_mod1(a);
    let phase = |n: i64| -> Result<i64, ModformError> {
        let x = reduce_mod1((r64(n) + a) * b);
        if x.is_zero() {
            Ok(1)
        } else if x == Rational64::new(1, 2) {
            Ok(-1)
        } else {
            Err(ModformError::IrrationalPhase { a, b })
        }
    };
    phase(0)?;
    phase(1)?;
    let bound = ((2.0 * ceil_int(order).max(1) as f64 / (*m.numer() as f64 / *m.denom() as f64)).sqrt()) as i64 + 2;
    let mut terms = Vec::new();
    for n in -bound..=bound {
        let x = r64(n) + a;
        let e = m * x * x / 2;
        if e < order {
            terms.push((e, rat(phase(n)?)));
        }
    }
    Ok(QSeries::from_terms(terms, Some(order))?)
}

/// `sum_{(m,n)} Q^(m^2 + mn + n^2)`, by enumerating the lattice.
pub fn lattice_theta_a2(order: impl Into<Rational64>) -> QSeries {
    let order = order.into();
    let n = ceil_int(order).max(1);
    // m^2 + mn + n^2 >= 3/4 max(|m|,|n|)^2
    let b = ((4.0 * n as f64 / 3.0).sqrt()) as i64 + 1;
    let mut counts = vec![0i64; n as usize];
    for x in -b..=b {
        for y in -b..=b {
            let q = x * x + x * y + y * y;
            if q < n {
                counts[q as usize] += 1;
            }
        }
    }
    let terms = counts.into_iter().enumerate().map(|(k, c)| (r64(k as i64), rat(c)));
    QSeries::from_terms(terms, Some(order)).expect("lattice counts are well formed")
}

fn theta_const(j: u8, m: Rational64, order: Rational64) -> Result<QSeries, ModformError> {
    let (a, b) = match j {
        2 => (Rational64::new(1, 2), r64(0)),
        3 => (r64(0), r64(0)),
        4 => (r64(0), Rational64::new(1, 2)),
        _ => return Err(ModformError::UnsupportedCombination(format!("theta{j}"))),
    };
    theta_char(a, b, m, order)
}

/// `u(Q^k)` where `u = prod (1 - Q^n)`.
fn unit_at(k: i64, n: i64) -> QSeries {
    eta_unit(r64(n / k + 1)).substitute_power(k as u32, 1)
}

/// Generators at argument `Q`, known at least below `Q^n`.
fn level_generator(kind: &Kind, n: i64) -> Result<SurdSeries, ModformError> {
    use Kind::*;
    let n1 = n + 1;
    let ei2 = |k: i64| -> Result<QSeries, ModformError> {
        Ok(eisenstein(2, r64(n1 / k + 1))?.substitute_power(k as u32, 1))
    };
    let u = |k: i64| unit_at(k, n1);
    let q = |e: Rational64| QSeries::monomial(Rat::one(), e);
    let s: SurdSeries = match kind {
        A(Level::Four) => {
            let inner = u(1).pow(8).add(&q(r64(1)).mul(&u(4).pow(8)).scale(&rat(16)));
            inner.root(2)?.div(&u(2).pow(2))?.into()
        }
        B(Level::Four) | B(Level::Two) => u(1).pow(4).div(&u(2).pow(2))?.into(),
        C(Level::Four) => q(Rational64::new(1, 2))
            .mul(&u(4).pow(4))
            .div(&u(2).pow(2))?
            .scale(&rat(4))
            .into(),
        E(Level::Four) => ei2(1)?
            .sub(&ei2(2)?.scale(&rat(2)))
            .add(&ei2(4)?.scale(&rat(4)))
            .scale(&Rat::new(1.into(), 3.into()))
            .into(),
        A(Level::Three) => {
            let inner = u(1).pow(12).add(&q(r64(1)).mul(&u(3).pow(12)).scale(&rat(27)));
            inner.root(3)?.div(&u(1).mul(&u(3)))?.into()
        }
        B(Level::Three) => u(1).pow(3).div(&u(3))?.into(),
        C(Level::Three) => q(Rational64::new(1, 3))
            .mul(&u(3).pow(3))
            .div(&u(1))?
            .scale(&rat(3))
            .into(),
        E(Level::Three) => ei2(3)?
            .scale(&rat(3))
            .add(&ei2(1)?)
            .scale(&Rat::new(1.into(), 4.into()))
            .into(),
        A(Level::Two) => {
            let inner = u(1).pow(24).add(&q(r64(1)).mul(&u(2).pow(24)).scale(&rat(64)));
            inner.root(4)?.div(&u(1).pow(2).mul(&u(2).pow(2)))?.into()
        }
        C(Level::Two) => {
            let hat = q(Rational64::new(1, 4)).mul(&u(2).pow(4)).div(&u(1).pow(2))?;
            SurdSeries::scaled(&Surd::power_of(&rat(2), Rational64::new(3, 2))?, &hat)
        }
        E(Level::Two) => ei2(2)?
            .scale(&rat(2))
            .add(&ei2(1)?)
            .scale(&Rat::new(1.into(), 3.into()))
            .into(),
        A(Level::OneStar) => eisenstein(4, r64(n1))?.root(4)?.into(),
        B(Level::OneStar) | C(Level::OneStar) => {
            let (b6, c6) = level_one_sixth_powers(n1)?;
            let x = if matches!(kind, B(_)) { b6 } else { c6 };
            SurdSeries::from(x).root(6)?
        }
        E(Level::OneStar) => {
            let (b6, c6) = level_one_sixth_powers(n1 + 1)?;
            let p = b6.mul(&c6);
            p.theta().div(&p)?.into()
        }
        E(Level::One) => eisenstein(2, r64(n1))?.into(),
        _ => return Err(ModformError::UnsupportedCombination(kind.to_string())),
    };
    Ok(s)
}

/// `(B^6, C^6) = ((Ei4^(3/2) +- Ei6) / 2)` at level `1*`.
fn level_one_sixth_powers(n: i64) -> Result<(QSeries, QSeries), ModformError> {
    let a6 = eisenstein(4, r64(n))?.root(2)?.pow(3);
    let e6 = eisenstein(6, r64(n))?;
    let half = Rat::new(1.into(), 2.into());
    Ok((a6.add(&e6).scale(&half), a6.sub(&e6).scale(&half)))
}

fn build(id: &GeneratorId, order: Rational64) -> Result<SurdSeries, ModformError> {
    let base_order = order / id.arg;
    let n = ceil_int(base_order).max(1);
    let base: SurdSeries = match &id.kind {
        Kind::Eta => eta(r64(n)).into(),
        Kind::ThetaConst(j) => theta_const(*j, r64(1), r64(n))?.into(),
        Kind::ThetaChar(a, b) => theta_char(*a, *b, r64(1), r64(n))?.into(),
        Kind::Eisenstein(k) => eisenstein(*k as u32, r64(n))?.into(),
        Kind::ThetaA2 => lattice_theta_a2(r64(n)).into(),
        k => level_generator(k, n)?,
    };
    Ok(base.substitute(id.arg).truncate(order))
}

static CACHE_ON: AtomicBool = AtomicBool::new(true);

type Cache = Mutex<HashMap<GeneratorId, (Rational64, SurdSeries)>>;

fn cache() -> &'static Cache {
    static C: OnceLock<Cache> = OnceLock::new();
    C.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Turn the in-memory generator cache on or off. Turning it off clears it.
pub fn set_cache_enabled(on: bool) {
    CACHE_ON.store(on, Ordering::SeqCst);
    if !on {
        cache().lock().unwrap().clear();
    }
}

fn disk_cache_dir() -> Option<PathBuf> {
    std::env::var_os("QMF_CACHE_DIR").map(PathBuf::from)
}

fn disk_name(id: &GeneratorId, order: Rational64) -> String {
    let clean: String = id
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    format!("{clean}-{}_{}.json", order.numer(), order.denom())
}

fn disk_load(id: &GeneratorId, order: Rational64) -> Option<SurdSeries> {
    let path = disk_cache_dir()?.join(disk_name(id, order));
    let text = std::fs::read_to_string(path).ok()?;
    let v: serde_json::Value = serde_json::from_str(&text).ok()?;
    let prefactor = v.get("prefactor").and_then(|p| p.as_str()).map(str::to_string);
    let s: QSeries = serde_json::from_value(v).ok()?;
    match prefactor {
        None => Some(s.into()),
        Some(p) => {
            // Prefactors are products `p^(a/b)`; rebuild them from the factors.
            let mut c = Surd::one();
            for f in p.split('*') {
                let (base, e) = f.split_once("^(")?;
                let e = parse_r64(e.strip_suffix(')')?)?;
                c = c.mul(&Surd::power_of(&Rat::from_integer(base.parse().ok()?), e).ok()?);
            }
            Some(SurdSeries::scaled(&c, &s))
        }
    }
}

fn disk_store(id: &GeneratorId, order: Rational64, s: &SurdSeries) {
    let Some(dir) = disk_cache_dir() else { return };
    if s.single().is_none() {
        return;
    }
    let _ = std::fs::create_dir_all(&dir);
    let _ = std::fs::write(dir.join(disk_name(id, order)), s.to_json().to_string());
}

/// The q-expansion of a generator, known below `Q^order`.
///
/// Results are memoized; a cached expansion to a higher order is truncated
/// rather than recomputed. Setting `QMF_CACHE_DIR` also persists expansions
/// as JSON files.
pub fn generator(id: &GeneratorId, order: impl Into<Rational64>) -> Result<SurdSeries, ModformError> {
    let order = order.into();
    let use_cache = CACHE_ON.load(Ordering::SeqCst);
    if use_cache {
        if let Some((o, s)) = cache().lock().unwrap().get(id) {
            if *o >= order {
                return Ok(s.truncate(order));
            }
        }
    }
    let s = match disk_load(id, order) {
        Some(s) => s,
        None => {
            let s = build(id, order)?;
            disk_store(id, order, &s);
            s
        }
    };
    if use_cache {
        let mut c = cache().lock().unwrap();
        let keep = c.get(id).is_none_or(|(o, _)| *o < order);
        if keep {
            c.insert(id.clone(), (order, s.clone()));
        }
    }
    Ok(s)
}

/// Parse a generator id and expand it.
pub fn generator_str(id: &str, order: impl Into<Rational64>) -> Result<SurdSeries, ModformError> {
    generator(&id.parse()?, order)
}

/// Rational generator expansion; fails for `C@1*`, `C@2` and other irrational ones.
pub fn generator_rational(id: &GeneratorId, order: impl Into<Rational64>) -> Result<QSeries, ModformError> {
    Ok(generator(id, order)?.to_rational()?)
}

/// Theta-function and lattice expressions for the level generators. These are
/// independent of the eta-quotient constructions in [`generator`] and are
/// used only to cross-check them.
pub mod theta_forms {
    use super::*;

    fn half() -> Rational64 {
        Rational64::new(1, 2)
    }

    fn th(a: Rational64, b: Rational64, m: i64, o: Rational64) -> Result<QSeries, ModformError> {
        theta_char(a, b, r64(m), o)
    }

    /// `sum_{(m,n)} w(m - n) Q^(m^2+mn+n^2)` with `w = 1` on multiples of 3
    /// and `-1/2` otherwise: the real part of the cubic character sum.
    fn a2_character_sum(order: Rational64) -> QSeries {
        let n = ceil_int(order).max(1);
        let b = ((4.0 * n as f64 / 3.0).sqrt()) as i64 + 1;
        let mut c = vec![Rat::zero(); n as usize];
        let minus_half = Rat::new((-1).into(), 2.into());
        for x in -b..=b {
            for y in -b..=b {
                let q = x * x + x * y + y * y;
                if q < n {
                    if (x - y).rem_euclid(3) == 0 {
                        c[q as usize] += Rat::one();
                    } else {
                        c[q as usize] += &minus_half;
                    }
                }
            }
        }
        QSeries::from_terms(c.into_iter().enumerate().map(|(k, v)| (r64(k as i64), v)), Some(order))
            .expect("well formed")
    }

    /// Every alternative expression for one generator, with a short label.
    pub fn alternatives(kind: &Kind, order: Rational64) -> Result<Vec<(&'static str, SurdSeries)>, ModformError> {
        let o = order;
        let z = r64(0);
        let mut out: Vec<(&'static str, SurdSeries)> = Vec::new();
        match kind {
            Kind::A(Level::Four) => {
                out.push(("theta3(2tau)^2", th(z, z, 2, o)?.pow(2).into()));
                let n = ceil_int(o) + 1;
                let e = unit_at(2, n).pow(10).div(&unit_at(1, n).pow(4).mul(&unit_at(4, n).pow(4)))?;
                out.push(("eta(2tau)^10/(eta^4 eta(4tau)^4)", e.into()));
            }
            Kind::B(Level::Four) => out.push(("theta4(2tau)^2", th(z, half(), 2, o)?.pow(2).into())),
            Kind::C(Level::Four) => out.push(("theta2(2tau)^2", th(half(), z, 2, o)?.pow(2).into())),
            Kind::A(Level::Three) => {
                out.push(("A2 lattice", lattice_theta_a2(o).into()));
                let s = th(half(), z, 2, o)?
                    .mul(&th(half(), z, 6, o)?)
                    .add(&th(z, z, 2, o)?.mul(&th(z, z, 6, o)?));
                out.push(("theta2(2tau)theta2(6tau)+theta3(2tau)theta3(6tau)", s.into()));
            }
            Kind::B(Level::Three) => out.push(("A2 lattice with cubic character", a2_character_sum(o).into())),
            Kind::C(Level::Three) => {
                let s = th(z, z, 2, o)?
                    .mul(&th(Rational64::new(2, 3), z, 6, o)?)
                    .add(&th(half(), z, 2, o)?.mul(&th(Rational64::new(1, 6), z, 6, o)?));
                out.push(("theta{0,0}(2tau)theta{2/3,0}(6tau)+theta{1/2,0}(2tau)theta{1/6,0}(6tau)", s.into()));
                let big = lattice_theta_a2(o * 3).substitute(Rational64::new(1, 3));
                let s = big.sub(&lattice_theta_a2(o)).scale(&Rat::new(1.into(), 2.into()));
                out.push(("(A(tau/3) - A(tau))/2", s.truncate(o).into()));
            }
            Kind::A(Level::Two) => {
                let s = th(half(), z, 2, o)?.pow(4).add(&th(z, z, 2, o)?.pow(4)).root(2)?;
                out.push(("(theta2^4(2tau)+theta3^4(2tau))^(1/2)", s.into()));
                let s = th(z, z, 1, o)?
                    .pow(4)
                    .add(&th(z, half(), 1, o)?.pow(4))
                    .scale(&Rat::new(1.into(), 2.into()))
                    .root(2)?;
                out.push(("((theta3^4+theta4^4)/2)^(1/2)", s.into()));
            }
            Kind::B(Level::Two) => {
                out.push(("theta3 theta4", th(z, z, 1, o)?.mul(&th(z, half(), 1, o)?).into()));
                out.push(("theta4(2tau)^2", th(z, half(), 2, o)?.pow(2).into()));
            }
            Kind::C(Level::Two) => {
                let r2 = Surd::power_of(&rat(2), half())?;
                let a = th(half(), z, 1, o)?.pow(2);
                out.push(("2^(-1/2) theta2^2", SurdSeries::scaled(&r2.recip(), &a)));
                let b = th(half(), z, 2, o)?.mul(&th(z, z, 2, o)?);
                out.push(("2^(1/2) theta2(2tau) theta3(2tau)", SurdSeries::scaled(&r2, &b)));
            }
            Kind::A(Level::OneStar) | Kind::B(Level::OneStar) | Kind::C(Level::OneStar) => {
                // E8 lattice theta in place of Ei4, then the same sixth roots
                let o1 = o + 1;
                let e8 = th(half(), z, 1, o1)?
                    .pow(8)
                    .add(&th(z, z, 1, o1)?.pow(8))
                    .add(&th(z, half(), 1, o1)?.pow(8))
                    .scale(&Rat::new(1.into(), 2.into()));
                let s = match kind {
                    Kind::A(_) => e8.root(4)?.into(),
                    _ => {
                        let a6 = e8.root(2)?.pow(3);
                        let e6 = eisenstein(6, o1)?;
                        let x = if matches!(kind, Kind::B(_)) { a6.add(&e6) } else { a6.sub(&e6) };
                        SurdSeries::from(x.scale(&Rat::new(1.into(), 2.into()))).root(6)?
                    }
                };
                out.push(("E8 lattice theta", s));
            }
            Kind::E(level) if *level != Level::One => {
                // log-derivative of C^r B^r
                let info = level.info();
                let o1 = o + 1;
                let c = generator(&GeneratorId::new(Kind::C(*level)), o1)?;
                let b = generator(&GeneratorId::new(Kind::B(*level)), o1)?;
                let p = c.pow(info.r).mul(&b.pow(info.r)).to_rational()?;
                out.push(("theta_Q log(C^r B^r)", p.theta().div(&p)?.into()));
            }
            _ => {}
        }
        Ok(out.into_iter().map(|(l, s)| (l, s.truncate(o))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> QSeries {
        QSeries::from_dense(v.iter().map(|x| rat(*x)).collect())
    }

    #[test]
    fn id_round_trip() {
        for s in ["A@4", "C@3(Q^2)", "theta2", "theta{1/6,0}(Q^3)", "Ei2", "eta", "E@1*", "E@1", "Ei4(Q^1/2)"] {
            assert_eq!(s.parse::<GeneratorId>().unwrap().to_string(), s);
        }
        assert_eq!("C@1".parse::<GeneratorId>().unwrap().to_string(), "C@1*");
        assert_eq!("A@4(Q^(1/2))".parse::<GeneratorId>().unwrap().to_string(), "A@4(Q^1/2)");
        assert!("D@4".parse::<GeneratorId>().is_err());
        assert!("A@5".parse::<GeneratorId>().is_err());
    }

    #[test]
    fn a4_counts_sums_of_two_squares() {
        let a = generator_rational(&"A@4".parse().unwrap(), 5).unwrap();
        assert_eq!(a, ints(&[1, 4, 4, 0, 4]).truncate(r64(5)));
    }

    #[test]
    fn c3_leading_term() {
        let c = generator_rational(&"C@3".parse().unwrap(), 2).unwrap();
        let (v, lead) = c.leading().unwrap();
        assert_eq!(v, Rational64::new(1, 3));
        assert_eq!(*lead, rat(3));
    }

    #[test]
    fn c2_carries_a_surd() {
        let c = generator(&"C@2".parse().unwrap(), 3).unwrap();
        assert!(c.to_rational().is_err());
        assert_eq!(c.pow(2).to_rational().unwrap().leading().unwrap().1, &rat(8));
    }

    #[test]
    fn phase_check() {
        assert!(theta_char(Rational64::new(1, 3), Rational64::new(1, 3), r64(1), 3).is_err());
        assert!(theta_char(r64(0), Rational64::new(1, 2), r64(1), 3).is_ok());
    }

    #[test]
    fn cache_is_transparent() {
        let id: GeneratorId = "B@3(Q^2)".parse().unwrap();
        let a = generator(&id, 12).unwrap();
        let b = generator(&id, 7).unwrap();
        set_cache_enabled(false);
        let c = generator(&id, 7).unwrap();
        set_cache_enabled(true);
        assert_eq!(b, c);
        assert_eq!(a.truncate(r64(7)), b);
    }
}
