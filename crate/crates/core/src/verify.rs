//! Named verification suites.
//!
//! Every check is independent and exact. Checks run in parallel and a failing
//! or panicking check is recorded, never fatal, so one run gathers every
//! residual. Reports keep the order in which the suite lists its checks.

use std::collections::BTreeMap;
use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::genus::{
    genus1_closed, genus1_e_derivative, genus1_ei2_route, genus1_form, genus1_getzler, genus1_x4_level4_form,
    genus2_constant, genus2_from, genus2_ppsi2, Inputs,
};
use crate::modforms::{generator, theta_forms, GeneratorId, Kind, Level};
use crate::quasipoly::QuasiPoly;
use crate::rat::format_rat;
use crate::series::{QSeries, Rat};
use crate::surd::{Surd, SurdSeries};
use crate::wdvv::registry::{age_defect, resolve_form};
use crate::wdvv::{
    correlators, potential, potential_with_text, verify_parsed, verify_polynomial_relations, verify_system, OdeSystem,
    Orbifold, SystemReport, Variant,
};

pub use crate::wdvv::Status;

pub const SUITES: [&str; 10] = [
    "ramanujan",
    "isogeny",
    "theta",
    "wdvv",
    "potentials",
    "genus1",
    "genus2",
    "cross",
    "integrality",
    "weights",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("unknown suite {0:?}; expected one of {list}", list = SUITES.join(", "))]
    UnknownSuite(String),
    #[error("truncation order must be positive, got {0}")]
    BadOrder(i64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    /// What the check is about, in words.
    pub paper_ref: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub trunc: i64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    /// No check failed; documented errata do not count as failures.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn errata(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Erratum)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let st = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Erratum => "erratum",
            };
            writeln!(f, "{st:<8} {:<40} {}", c.id, c.detail)?;
        }
        Ok(())
    }
}

/// Default truncation order of a suite: in `Q` except for `wdvv`, which
/// works in the orbifold variable `q`.
pub fn default_trunc(suite: &str) -> Result<i64, VerifyError> {
    Ok(match suite {
        "ramanujan" | "isogeny" | "theta" | "potentials" | "genus2" | "cross" => 50,
        "wdvv" | "genus1" => 100,
        "integrality" => 200,
        "weights" => 40,
        _ => return Err(VerifyError::UnknownSuite(suite.to_string())),
    })
}

pub fn run_suite(name: &str, trunc: i64) -> Result<SuiteReport, VerifyError> {
    if trunc <= 0 {
        return Err(VerifyError::BadOrder(trunc));
    }
    let mut s = Suite::default();
    let o = Rational64::from(trunc);
    match name {
        "ramanujan" => ramanujan(&mut s, o),
        "isogeny" => isogeny(&mut s, o),
        "theta" => theta(&mut s, o),
        "wdvv" => wdvv(&mut s, trunc),
        "potentials" => potentials(&mut s, o),
        "genus1" => genus1(&mut s, trunc),
        "genus2" => genus2(&mut s, trunc),
        "cross" => cross(&mut s, o),
        "integrality" => integrality(&mut s, trunc),
        "weights" => weights(&mut s, trunc),
        _ => return Err(VerifyError::UnknownSuite(name.to_string())),
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        trunc,
        checks: s.run(),
    })
}

/// Outcome of [`integrality_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Integrality {
    pub integral: bool,
    /// Exponent and scaled coefficient of the first non-integer term.
    pub first_non_integer: Option<(Rational64, Rat)>,
    pub checked_below: Option<Rational64>,
}

/// Whether every known coefficient of `scale * series` is an integer.
pub fn integrality_check(series: &QSeries, scale: &BigInt) -> Integrality {
    let first = series.first_non_integer(scale);
    Integrality {
        integral: first.is_none(),
        first_non_integer: first,
        checked_below: series.trunc(),
    }
}

enum Outcome {
    Pass(String),
    Fail(String),
    Erratum(String),
}

impl From<Result<String, String>> for Outcome {
    fn from(r: Result<String, String>) -> Self {
        match r {
            Ok(d) => Outcome::Pass(d),
            Err(d) => Outcome::Fail(d),
        }
    }
}

type Job = Box<dyn FnOnce() -> Outcome + Send>;

#[derive(Default)]
struct Suite {
    jobs: Vec<(String, String, Job)>,
}

impl Suite {
    fn add(&mut self, id: impl Into<String>, about: impl Into<String>, job: impl FnOnce() -> Result<String, String> + Send + 'static) {
        self.jobs.push((id.into(), about.into(), Box::new(move || job().into())));
    }

    fn add_outcome(&mut self, id: impl Into<String>, about: impl Into<String>, job: impl FnOnce() -> Outcome + Send + 'static) {
        self.jobs.push((id.into(), about.into(), Box::new(job)));
    }

    fn identity(&mut self, id: impl Into<String>, about: impl Into<String>, order: Rational64, orbifold: Option<Orbifold>, sides: &[&str]) {
        let sides: Vec<(Option<Orbifold>, String)> = sides.iter().map(|s| (orbifold, s.to_string())).collect();
        self.add(id, about, move || equal_sides(&sides, order));
    }

    fn run(self) -> Vec<Check> {
        self.jobs
            .into_par_iter()
            .map(|(id, about, job)| {
                let (status, detail) = match catch_unwind(AssertUnwindSafe(job)) {
                    Ok(Outcome::Pass(d)) => (Status::Pass, d),
                    Ok(Outcome::Fail(d)) => (Status::Fail, d),
                    Ok(Outcome::Erratum(d)) => (Status::Erratum, d),
                    Err(p) => {
                        let msg = p
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_default();
                        (Status::Fail, format!("panicked: {msg}"))
                    }
                };
                Check {
                    id,
                    paper_ref: about,
                    status,
                    detail,
                }
            })
            .collect()
    }
}

fn err(e: impl fmt::Display) -> String {
    e.to_string()
}

fn form(orbifold: Option<Orbifold>, text: &str) -> Result<QuasiPoly, String> {
    match orbifold {
        Some(o) => resolve_form(o, text).map_err(err),
        None => text.parse().map_err(err),
    }
}

fn eval(orbifold: Option<Orbifold>, text: &str, order: Rational64) -> Result<SurdSeries, String> {
    form(orbifold, text)?.eval(order).map_err(err)
}

fn nonzero_below(s: &SurdSeries, order: Rational64) -> usize {
    s.parts().map(|(_, p)| p.terms().filter(|(e, _)| *e < order).count()).sum()
}

/// `Ok` with the number of nonzero coefficients compared, or the first difference.
fn compare(a: &SurdSeries, b: &SurdSeries, order: Rational64) -> Result<String, String> {
    match a.equal_upto(b, order) {
        Ok(None) => Ok(format!("equal below Q^{order} ({} nonzero coefficients)", nonzero_below(a, order))),
        Ok(Some((rad, m))) if rad.is_one() => Err(format!("first difference at {m}")),
        Ok(Some((rad, m))) => Err(format!("first difference in the {rad} part at {m}")),
        Err(e) => Err(err(e)),
    }
}

fn equal_sides(sides: &[(Option<Orbifold>, String)], order: Rational64) -> Result<String, String> {
    let (o, t) = &sides[0];
    let first = eval(*o, t, order)?;
    let mut detail = String::new();
    for (o, t) in &sides[1..] {
        let s = eval(*o, t, order)?;
        detail = compare(&first, &s, order).map_err(|d| format!("{t}: {d}"))?;
    }
    Ok(detail)
}

fn rational(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// `Q^m` as an argument suffix.
fn arg(m: Rational64) -> String {
    if m.is_one() {
        String::new()
    } else if m.is_integer() {
        format!("(Q^{m})")
    } else {
        format!("(Q^({m}))")
    }
}

fn level_tag(level: Level) -> &'static str {
    match level {
        Level::One => "1",
        Level::OneStar => "1*",
        Level::Two => "2",
        Level::Three => "3",
        Level::Four => "4",
    }
}

fn gen(kind: Kind, order: Rational64) -> Result<SurdSeries, String> {
    generator(&GeneratorId::new(kind), order).map_err(err)
}

fn ramanujan(s: &mut Suite, order: Rational64) {
    for level in Level::ALL {
        for which in ['A', 'B', 'C', 'E'] {
            let id = format!("ramanujan/{}/{which}", level_tag(level));
            let about = format!("Ramanujan identity for the derivative of {which} at level {}", level_tag(level));
            s.add(id, about, move || ramanujan_check(level, which, order));
        }
    }
}

fn ramanujan_check(level: Level, which: char, order: Rational64) -> Result<String, String> {
    let r = level.info().r;
    let (a, b, c, e) = (
        gen(Kind::A(level), order)?,
        gen(Kind::B(level), order)?,
        gen(Kind::C(level), order)?,
        gen(Kind::E(level), order)?,
    );
    let k = Surd::rational(rational(1, 2 * r as i64));
    let a2 = a.pow(2);
    let (lhs, rhs) = match which {
        'A' => {
            let hauptmodul_term = c.pow(r).sub(&b.pow(r)).div(&a.pow(r)).map_err(err)?;
            (a.theta(), a.mul(&e.add(&hauptmodul_term.mul(&a2))).scale(&k))
        }
        'B' => (b.theta(), b.mul(&e.sub(&a2)).scale(&k)),
        'C' => (c.theta(), c.mul(&e.add(&a2)).scale(&k)),
        _ => (e.theta(), e.pow(2).sub(&a2.pow(2)).scale(&k)),
    };
    compare(&lhs, &rhs, order)
}

/// `1 + 6 sum_n (d_1(n) - d_2(n)) Q^n`, counting divisors by residue mod 3.
fn a3_divisor_sum(order: i64) -> QSeries {
    let mut c = vec![Rat::zero(); order as usize];
    c[0] = Rat::one();
    for n in 1..order {
        let mut e = 0i64;
        for d in 1..=n {
            if n % d == 0 {
                match d % 3 {
                    1 => e += 1,
                    2 => e -= 1,
                    _ => {}
                }
            }
        }
        c[n as usize] = Rat::from_integer((6 * e).into());
    }
    QSeries::from_dense(c)
}

fn isogeny(s: &mut Suite, o: Rational64) {
    let ids: &[(&str, &str, &[&str])] = &[
        ("4/double/A", "level 4 forms at Q^2", &["A@4(Q^2)", "1/2*(A@4 + B@4)"]),
        ("4/double/B", "level 4 forms at Q^2", &["B@4(Q^2)^2", "A@4*B@4"]),
        ("4/double/C", "level 4 forms at Q^2", &["C@4(Q^2)", "1/2*(A@4 - B@4)"]),
        ("4/half/A", "level 4 forms at Q^(1/2)", &["A@4(Q^(1/2))", "A@4 + C@4"]),
        ("4/half/B", "level 4 forms at Q^(1/2)", &["B@4(Q^(1/2))", "A@4 - C@4"]),
        ("4/half/C", "level 4 forms at Q^(1/2)", &["C@4(Q^(1/2))^2", "4*A@4*C@4"]),
        ("4/half/E", "level 4 forms at Q^(1/2)", &["E@4(Q^(1/2))", "2*E@4 - A@4^2 - 2*A@4*C@4 + C@4^2"]),
        ("theta/double/3", "quadratic theta identities", &["theta3(Q^2)^2", "1/2*(theta3^2 + theta4^2)"]),
        ("theta/double/4", "quadratic theta identities", &["theta4(Q^2)^2", "theta3*theta4"]),
        ("theta/jacobi", "Jacobi quartic identity", &["theta3^4", "theta4^4 + theta2^4"]),
        ("3/third/A", "level 3 forms at Q^(1/3)", &["A@3(Q^(1/3))", "A@3 + 2*C@3"]),
        ("3/third/B", "level 3 forms at Q^(1/3)", &["B@3(Q^(1/3))", "A@3 - C@3"]),
        ("3/C", "C3 from A3 under the 3-isogeny", &["C@3", "1/2*(A@3(Q^(1/3)) - A@3)"]),
        ("3/split/A", "splitting A3 by exponents mod 3", &["A@3", "A@3(Q^3) + 2*C@3(Q^3)"]),
        ("3/split/B", "splitting A3 by exponents mod 3", &["B@3", "A@3(Q^3) - C@3(Q^3)"]),
        ("2/half/A", "level 2 forms at Q^(1/2)", &["A@2(Q^(1/2))^2", "A@2^2 + 3*C@2^2"]),
        ("2/half/B", "level 2 forms at Q^(1/2)", &["B@2(Q^(1/2))^2", "A@2^2 - C@2^2"]),
        ("2/B", "level 2 and level 4 relation", &["B@2", "B@4"]),
        ("2/C^2", "level 2 and level 4 relation", &["C@2^2", "2*A@4*C@4"]),
        ("2/C", "level 2 and level 4 relation", &["C@2", "2^(-1/2)*C@4(Q^(1/2))"]),
        ("2/E", "E_N in terms of Ei2", &["E@2", "1/3*(2*Ei2(Q^2) + Ei2)"]),
        ("3/E", "E_N in terms of Ei2", &["E@3", "1/4*(3*Ei2(Q^3) + Ei2)"]),
        ("4/E", "E_N in terms of Ei2", &["E@4", "1/3*(Ei2 - 2*Ei2(Q^2) + 4*Ei2(Q^4))"]),
        ("2/A^2", "A^2 as a difference of Ei2", &["A@2^2", "2*Ei2(Q^2) - Ei2"]),
        ("3/A^2", "A^2 as a difference of Ei2", &["A@3^2", "1/2*(3*Ei2(Q^3) - Ei2)"]),
        ("4/A^2", "A^2 as a difference of Ei2", &["A@4^2", "1/3*(4*Ei2(Q^4) - Ei2)"]),
        ("1*/A^4", "level 1* forms from Eisenstein series", &["A@1^4", "Ei4"]),
        ("1*/B^6-C^6", "level 1* forms from Eisenstein series", &["B@1^6 - C@1^6", "Ei6"]),
        ("1*/C^6B^6", "level 1* forms from Eisenstein series", &["C@1^6*B@1^6", "432*eta^24"]),
        ("1*/A^12", "level 1* forms from Eisenstein series", &["A@1^12", "Ei4^3"]),
    ];
    for (id, about, sides) in ids {
        s.identity(format!("isogeny/{id}"), *about, o, None, sides);
    }
    for level in Level::ALL {
        let t = level_tag(level);
        let a = if level == Level::OneStar { "1" } else { t };
        let r = level.info().r;
        s.identity(
            format!("isogeny/{t}/A^r=B^r+C^r"),
            "A^r = B^r + C^r",
            o,
            None,
            &[&format!("A@{a}^{r}"), &format!("B@{a}^{r} + C@{a}^{r}")],
        );
        s.add(format!("boundary/{t}"), "boundary behaviour of A, B, C, E", move || boundary(level, o));
    }
    s.add("isogeny/1*/E", "E_N in terms of Ei2", move || {
        compare(&gen(Kind::E(Level::OneStar), o)?, &gen(Kind::Eisenstein(2), o)?, o)
    });
    s.add("isogeny/3/A divisor sum", "A3 as a twisted divisor sum", move || {
        let n = o.ceil().to_integer();
        compare(&gen(Kind::A(Level::Three), o)?, &SurdSeries::from(a3_divisor_sum(n)), o)
    });
}

/// `A, B, E = 1 + O(Q)` and `C^r = kappa Q (1 + O(Q))`.
fn boundary(level: Level, o: Rational64) -> Result<String, String> {
    let info = level.info();
    for kind in [Kind::A(level), Kind::B(level), Kind::E(level)] {
        let x = gen(kind.clone(), o)?.to_rational().map_err(err)?;
        let rest = x.sub(&QSeries::one());
        if let Some((e, _)) = rest.leading().filter(|(e, _)| *e < Rational64::one()) {
            return Err(format!("{kind} has a term Q^{e} below Q^1"));
        }
        if x.coeff(Rational64::zero()) != Rat::one() {
            return Err(format!("{kind} does not start with 1"));
        }
    }
    let cr = gen(Kind::C(level), o)?.pow(info.r).to_rational().map_err(err)?;
    match cr.leading() {
        Some((e, c)) if e == Rational64::one() && *c == Rat::from_integer(info.kappa.into()) => {
            Ok(format!("C^{} = {} Q + O(Q^2)", info.r, info.kappa))
        }
        Some((e, c)) => Err(format!("C^{} starts with {} Q^{e}", info.r, format_rat(c))),
        None => Err(format!("C^{} vanishes", info.r)),
    }
}

/// `f`, `g`, `h` at `Q^m`: products of theta constants at `Q^2m` and `Q^6m`.
fn fgh(which: u8, m: Rational64) -> String {
    let k = match which {
        b'f' => 2,
        b'g' => 3,
        _ => 4,
    };
    format!("theta{k}{}*theta{k}{}", arg(m * 2), arg(m * 6))
}

fn theta(s: &mut Suite, o: Rational64) {
    for level in Level::ALL {
        for kind in [Kind::A(level), Kind::B(level), Kind::C(level), Kind::E(level)] {
            let alts = match theta_forms::alternatives(&kind, o) {
                Ok(a) => a,
                Err(e) => {
                    let msg = e.to_string();
                    s.add(format!("theta/{kind}"), "theta expressions of the generators", move || Err(msg));
                    continue;
                }
            };
            for (label, series) in alts {
                let kind = kind.clone();
                s.add(format!("theta/{kind}/{label}"), "theta expressions of the generators", move || {
                    compare(&gen(kind, o)?, &series, o)
                });
            }
        }
    }

    let one = Rational64::one();
    let third = Rational64::new(1, 3);
    let (f, g, h) = (fgh(b'f', one), fgh(b'g', one), fgh(b'h', one));
    let list: Vec<(&str, &str, Vec<String>)> = vec![
        ("theta/A3", "A3 and C3 as theta products", vec!["A@3".into(), "theta2(Q^2)*theta2(Q^6) + theta3(Q^2)*theta3(Q^6)".into()]),
        (
            "theta/C3",
            "A3 and C3 as theta products",
            vec!["C@3".into(), "theta{0,0}(Q^2)*theta{2/3,0}(Q^6) + theta{1/2,0}(Q^2)*theta{1/6,0}(Q^6)".into()],
        ),
        ("theta/g=f+h", "f, g, h relations", vec![g.clone(), format!("{f} + {h}")]),
        ("theta/f", "f, g, h relations", vec![f.clone(), "2/3*A@3 - 2/3*A@3(Q^4)".into()]),
        ("theta/g", "f, g, h relations", vec![g.clone(), "1/3*A@3 + 2/3*A@3(Q^4)".into()]),
        ("theta/A3=f+g", "f, g, h relations", vec!["A@3".into(), format!("{f} + {g}")]),
        (
            "theta/new/1",
            "two further theta product identities",
            vec!["theta{0,0}(Q^2)*theta{2/3,0}(Q^6)".into(), format!("1/2*({} - {g})", fgh(b'g', third))],
        ),
        (
            "theta/new/2",
            "two further theta product identities",
            vec!["theta{1/2,0}(Q^2)*theta{1/6,0}(Q^6)".into(), format!("1/2*({} - {f})", fgh(b'f', third))],
        ),
        (
            "theta/C3=sum",
            "two further theta product identities",
            vec!["C@3".into(), format!("1/2*({} - {g}) + 1/2*({} - {f})", fgh(b'g', third), fgh(b'f', third))],
        ),
    ];
    for (id, about, sides) in list {
        let sides: Vec<&str> = sides.iter().map(String::as_str).collect();
        s.identity(id, about, o, None, &sides);
    }
    let half = Rational64::new(1, 2);
    let sixth = Rational64::new(1, 6);
    let x6 = Some(Orbifold::X6);
    let z21 = format!("1/4*({})", fgh(b'f', half));
    s.identity(
        "theta/X6/Z21",
        "weight one correlators of X6 via f",
        o,
        x6,
        &["Z21", &z21, "1/6*(A@3(Q^(1/2)) - A@3(Q^2))"],
    );
    let z10 = format!("1/4*({} - {})", fgh(b'f', sixth), fgh(b'f', half));
    s.identity(
        "theta/X6/Z10",
        "weight one correlators of X6 via f",
        o,
        x6,
        &["Z10", &z10, "1/6*(A@3(Q^(1/6)) - A@3(Q^(2/3)) - A@3(Q^(1/2)) + A@3(Q^2))", "1/3*(C@3(Q^(1/2)) - C@3(Q^2))"],
    );

    for orb in Orbifold::WDVV {
        let Ok(table) = correlators(orb) else { continue };
        for c in table {
            for alt in c.alternatives.clone() {
                let name = c.name;
                let id = format!("alternative/{orb}/{name}/{}", alt.label);
                let about = format!("printed alternative form of {name} for {orb}");
                s.add_outcome(id, about, move || {
                    let r = equal_sides(&[(Some(orb), name.to_string()), (Some(orb), alt.form.to_string())], o);
                    match (r, alt.expect_equal) {
                        (Ok(d), true) => Outcome::Pass(d),
                        (Err(d), true) => Outcome::Fail(d),
                        (Err(d), false) => Outcome::Erratum(format!("printed form differs from the closed form: {d}")),
                        (Ok(d), false) => Outcome::Fail(format!("form recorded as a misprint matches: {d}")),
                    }
                });
            }
        }
    }
}

fn wdvv_checks(s: &mut Suite, rep: SystemReport, tag: &str) {
    for e in rep.entries {
        let id = format!("{}/{tag}/{}", rep.orbifold, e.label);
        let about = format!("{} {} {}", rep.orbifold, e.kind, e.text);
        let mut detail = match (&e.residual, e.checked_below) {
            (Some(r), _) => format!("residual {r}"),
            (None, Some(t)) => format!("zero below q^{t}"),
            (None, None) => "zero".into(),
        };
        if let Some(c) = &e.corrected {
            let fixed = match c.checked_below {
                Some(t) => format!("zero below q^{t}"),
                None => c.residual.clone().unwrap_or_default(),
            };
            detail = format!("{detail}; corrected {} gives {fixed}", c.text);
        }
        if let Some(n) = &e.note {
            detail = format!("{detail}; {n}");
        }
        let status = e.status;
        s.add_outcome(id, about, move || match status {
            Status::Pass => Outcome::Pass(detail),
            Status::Fail => Outcome::Fail(detail),
            Status::Erratum => Outcome::Erratum(detail),
        });
    }
}

fn wdvv(s: &mut Suite, trunc: i64) {
    let reports: Vec<(String, Result<SystemReport, String>)> = Orbifold::WDVV
        .par_iter()
        .flat_map_iter(|&o| {
            let mut v = Vec::new();
            for variant in [Variant::Minimal, Variant::Full] {
                v.push((format!("{o}/{variant}"), verify_system(o, variant, trunc).map_err(err)));
            }
            v.push((format!("{o}/relations"), verify_polynomial_relations(o, trunc).map_err(err)));
            v
        })
        .collect();
    for (tag, rep) in reports {
        match rep {
            Ok(rep) => {
                let kind = tag.rsplit('/').next().unwrap_or_default().to_string();
                wdvv_checks(s, rep, &kind);
            }
            Err(e) => s.add(tag, "WDVV system", move || Err(e)),
        }
    }
}

/// The `wdvv` checks of one parsed system, such as an edited fixture.
pub fn system_suite(sys: &OdeSystem, trunc: i64) -> SuiteReport {
    let mut s = Suite::default();
    wdvv_checks(&mut s, verify_parsed(sys, trunc), &sys.variant.to_string());
    SuiteReport {
        suite: "fixture".into(),
        trunc,
        checks: s.run(),
    }
}

/// The `X2` potential with its quartic `Z` term printed as a sum over `i != j`
/// of `t_i^2 + t_j^2`.
pub fn x2_printed_potential_text() -> String {
    let mut pairs = Vec::new();
    for i in 1..=4 {
        for j in 1..=4 {
            if i != j {
                pairs.push(format!("t{i}^2 + t{j}^2"));
            }
        }
    }
    format!(
        "1/2*t0^2*t + 1/4*t0*(t1^2 + t2^2 + t3^2 + t4^2) + X*t1*t2*t3*t4 + 1/24*Y*(t1^4 + t2^4 + t3^4 + t4^4) + 1/4*Z*({})",
        pairs.join(" + ")
    )
}

fn potentials(s: &mut Suite, o: Rational64) {
    let series_order = o.to_integer().min(20);
    for orb in [Orbifold::X2, Orbifold::X3] {
        s.add(format!("{orb}/wdvv"), format!("WDVV equations of the genus-zero potential of {orb}"), move || {
            let c = potential(orb).map_err(err)?.check_wdvv(series_order).map_err(err)?;
            if c.passed() {
                Ok(c.to_string())
            } else {
                Err(format!("{c}: {}", c.failures.join("; ")))
            }
        });
        let rows = match potential(orb).and_then(|p| p.rows()) {
            Ok(r) => r,
            Err(e) => {
                let e = e.to_string();
                s.add(format!("{orb}/rows"), "coefficients of the potential", move || Err(e));
                continue;
            }
        };
        for row in rows {
            let id = format!("{orb}/{}", row.monomial);
            let about = format!("coefficient of {} in the potential of {orb}", row.monomial);
            if row.insertions.iter().any(|i| i == "1" || i == "P") {
                s.add(id, about, move || Ok(format!("classical term {}", row.coefficient)));
                continue;
            }
            s.add(id, about, move || {
                let p = form(None, &row.correlator)?;
                let t = row.insertions.len() as i64;
                if !p.is_zero() {
                    let w = p.weight().map_err(err)?;
                    if w != Rational64::from(t - 2) {
                        return Err(format!("weight {w}, expected {}", t - 2));
                    }
                }
                match &row.matches {
                    Some(name) => {
                        let want = eval(Some(orb), name, o)?;
                        let got = p.eval(o).map_err(err)?;
                        compare(&got, &want, o).map(|d| format!("<<{}>> = {name}: {d}", row.insertions.join(",")))
                    }
                    None => Ok(format!(
                        "<<{}>> = {}; not a basic correlator, fixed by the WDVV check with weight {}",
                        row.insertions.join(","),
                        row.correlator,
                        t - 2
                    )),
                }
            });
        }
    }
    s.add_outcome("X2/printed sum form", "the X2 potential with the Z term as printed", move || {
        let printed = potential_with_text(Orbifold::X2, &x2_printed_potential_text()).and_then(|p| p.check_wdvv(series_order));
        let fixed = potential(Orbifold::X2).and_then(|p| p.check_wdvv(series_order));
        match (printed, fixed) {
            (Ok(p), Ok(f)) if !p.passed() && f.passed() => Outcome::Erratum(format!(
                "sum over i != j of (t_i^2 + t_j^2) breaks WDVV ({} failing); t_i^2 t_j^2 over i < j passes",
                p.failures.len()
            )),
            (Ok(p), Ok(f)) => Outcome::Fail(format!("printed: {p}; corrected: {f}")),
            (Err(e), _) | (_, Err(e)) => Outcome::Fail(e.to_string()),
        }
    });
}

fn genus1(s: &mut Suite, trunc: i64) {
    let o = Rational64::from(trunc);
    for orb in Orbifold::WDVV {
        for inputs in [Inputs::ClosedForms, Inputs::Solver] {
            let tag = match inputs {
                Inputs::ClosedForms => "closed forms",
                Inputs::Solver => "solver",
            };
            s.add(
                format!("{orb}/getzler/{tag}"),
                format!("Getzler relation for {orb} gives -Ei2/12"),
                move || {
                    let rep = genus1_getzler(orb, inputs, trunc).map_err(err)?;
                    let want = genus1_closed(orb, trunc).map_err(err)?;
                    let w = SurdSeries::from(want);
                    let mut detail = compare(&SurdSeries::from(rep.result), &w, o)?;
                    for (name, f) in rep.forms {
                        compare(&SurdSeries::from(f), &w, o).map_err(|d| format!("{name}: {d}"))?;
                        detail = format!("{detail}; {name} agrees");
                    }
                    Ok(detail)
                },
            );
        }
        s.add(format!("{orb}/level form"), "<<P>>_{1,1} in level generators", move || {
            compare(&genus1_form(orb).eval(o).map_err(err)?, &eval(None, "-1/12*Ei2", o)?, o)
        });
        let want = rational(-1, 2 * orb.r() as i64);
        let mu_route = rational(-1, 2) + rational(orb.mu() as i64, 24);
        s.add(format!("{orb}/dE"), "derivative of <<P>>_{1,1} in E_N", move || {
            let direct = genus1_e_derivative(orb).map_err(err)?;
            let via = genus1_ei2_route(orb).map_err(err)?;
            if direct == want && via == want && mu_route == want {
                Ok(format!("{} by both routes, = -1/2 + mu/24", format_rat(&want)))
            } else {
                Err(format!(
                    "level form {}, Ei2 route {}, mu formula {}, expected {}",
                    format_rat(&direct),
                    format_rat(&via),
                    format_rat(&mu_route),
                    format_rat(&want)
                ))
            }
        });
    }
    s.add("X4/level 4 form", "<<P>>_{1,1} of X4 in level 4 generators", move || {
        compare(&genus1_x4_level4_form().eval(o).map_err(err)?, &eval(None, "-1/12*Ei2", o)?, o)
    });
    s.add("X1/closed", "elliptic curve <<P>>_{1,1} = -Ei2/24", move || {
        let mut c = vec![rational(-1, 24)];
        for n in 1..trunc {
            let sigma: i64 = (1..=n).filter(|d| n % d == 0).sum();
            c.push(Rat::from_integer(sigma.into()));
        }
        let oracle = SurdSeries::from(QSeries::from_dense(c));
        let got = SurdSeries::from(genus1_closed(Orbifold::X1, trunc).map_err(err)?);
        compare(&got, &oracle, o)?;
        compare(&genus1_form(Orbifold::X1).eval(o).map_err(err)?, &oracle, o)
    });
    s.add("r-independence", "<<P>>_{1,1} is the same for r = 2, 3, 4, 6", move || {
        let base = genus1_form(Orbifold::X2).eval(o).map_err(err)?;
        let mut d = String::new();
        for orb in [Orbifold::X3, Orbifold::X4, Orbifold::X6] {
            d = compare(&genus1_form(orb).eval(o).map_err(err)?, &base, o).map_err(|e| format!("{orb}: {e}"))?;
        }
        Ok(d)
    });
}

fn genus2(s: &mut Suite, trunc: i64) {
    let o = Rational64::from(trunc);
    for (orb, c) in [(Orbifold::X2, 48), (Orbifold::X3, 144), (Orbifold::X4, 252), (Orbifold::X6, 480)] {
        s.add(format!("{orb}/series"), "<<P psi^2>>_{2,1} from <<P>>_{1,1}", move || {
            let g = genus2_ppsi2(orb, trunc).map_err(err)?;
            if genus2_constant(orb).map_err(err)? != c {
                return Err(format!("c_r is not {c}"));
            }
            let independent = g.form.eval(o).map_err(err)?;
            compare(&SurdSeries::from(g.series), &independent, o).map(|d| format!("c_r = {c}; {d}"))
        });
        s.add(format!("{orb}/weight"), "weight of <<P psi^2>>_{2,1}", move || {
            let w = genus2_ppsi2(orb, 1).map_err(err)?.form.weight().map_err(err)?;
            if w == Rational64::from(4) {
                Ok("weight 4".into())
            } else {
                Err(format!("weight {w}"))
            }
        });
        s.add(format!("{orb}/zero input"), "the genus-two formula is homogeneous", move || {
            let z = genus2_from(orb, &QSeries::zero_to(o)).map_err(err)?;
            if z.is_zero() {
                Ok("G = 0 gives 0".into())
            } else {
                Err(format!("G = 0 gives {}", z.to_json()))
            }
        });
    }
}

/// A correlator written with the points named `x, y, z, w`.
#[derive(Clone)]
struct Term {
    orbifold: Orbifold,
    coeff: i64,
    insertions: &'static str,
}

fn t(orbifold: Orbifold, coeff: i64, insertions: &'static str) -> Term {
    Term {
        orbifold,
        coeff,
        insertions,
    }
}

/// Registry notation for `X2` and `X3`, whose points are `D1, D2, ...`.
fn registry_label(orbifold: Orbifold, label: &str) -> String {
    if !matches!(orbifold, Orbifold::X2 | Orbifold::X3) {
        return label.to_string();
    }
    let (p, k) = label.split_once('^').map_or((label, None), |(p, k)| (p, Some(k)));
    let i = match p {
        "x" => 1,
        "y" => 2,
        "z" => 3,
        _ => 4,
    };
    match k {
        Some(k) => format!("D{i}^{k}"),
        None => format!("D{i}"),
    }
}

/// Registry name and closed form of a term; zero when the degree axiom forces it.
fn resolve_term(term: &Term) -> Result<(String, QuasiPoly), String> {
    let mut want: Vec<String> = term.insertions.split(',').map(|l| registry_label(term.orbifold, l)).collect();
    want.sort();
    let table = correlators(term.orbifold).map_err(err)?;
    let scale = Surd::from_int(term.coeff);
    for c in &table {
        let mut have: Vec<String> = c.insertions.iter().map(|s| s.to_string()).collect();
        have.sort();
        if have == want {
            let p = c.closed_form().map_err(err)?.scale(&scale);
            let coeff = if term.coeff == 1 { String::new() } else { format!("{}*", term.coeff) };
            return Ok((format!("{coeff}{}^{}", c.name, term.orbifold), p));
        }
    }
    match age_defect(term.orbifold, &want, 0) {
        Some(d) if !d.is_zero() => Ok((
            format!("<<{}>>^{} (zero, ages off by {d})", term.insertions, term.orbifold),
            QuasiPoly::zero(),
        )),
        _ => Err(format!("no correlator <<{}>> for {}", term.insertions, term.orbifold)),
    }
}

fn chain(terms: &[Term], o: Rational64) -> Result<String, String> {
    let mut names = Vec::new();
    let mut first: Option<SurdSeries> = None;
    for term in terms {
        let (name, p) = resolve_term(term)?;
        let s = p.eval(o).map_err(err)?;
        if let Some(f) = &first {
            compare(f, &s, o).map_err(|d| format!("{} vs {name}: {d}", names[0]))?;
        } else {
            first = Some(s);
        }
        names.push(name);
    }
    let count = first.as_ref().map_or(0, |f| nonzero_below(f, o));
    Ok(format!("{} agree below Q^{o} ({count} nonzero coefficients)", names.join(" = ")))
}

fn cross(s: &mut Suite, o: Rational64) {
    use Orbifold::{X2, X3, X4, X6};
    let list: Vec<(&str, Vec<Term>, Option<Vec<Term>>)> = vec![
        ("cross/1", vec![t(X6, 2, "x,x,x^4"), t(X6, 1, "y,y,y"), t(X3, 1, "x,x,x")], None),
        ("cross/2", vec![t(X6, 1, "x,x,y^2"), t(X6, 1, "x^2,y,y"), t(X3, 1, "x,y,z")], None),
        (
            "cross/3",
            vec![t(X6, 1, "x,x^2,y,y^2"), t(X3, 1, "x,x^2,y,y^2")],
            Some(vec![t(X6, 1, "x,x^5,y,y^2"), t(X3, 1, "x,x^2,y,y^2")]),
        ),
        ("cross/4", vec![t(X6, 1, "x^4,x^4,y,y"), t(X3, 1, "x^2,x^2,y,z")], None),
        ("cross/5", vec![t(X6, 2, "x,x^4,x^5,y"), t(X6, 1, "x^4,y,y,y^2"), t(X3, 1, "x^2,y^2,z,z")], None),
        (
            "cross/6",
            vec![t(X2, 1, "x,y,z,w"), t(X4, 1, "x^2,y^2,z,z"), t(X4, 2, "x^3,x^3,y,y"), t(X6, 3, "x,x^3,x^5,z")],
            None,
        ),
        (
            "cross/7",
            vec![
                t(X2, 1, "x,x,y,y"),
                t(X4, 1, "x,x^3,z,z"),
                t(X4, 1, "x^2,x^2,z,z"),
                t(X4, 2, "x,x^3,y,y^3"),
                t(X6, 1, "x,x^5,z,z"),
            ],
            None,
        ),
    ];
    for (id, printed, corrected) in list {
        s.add_outcome(id, "identities among correlators of different orbifolds", move || {
            match (chain(&printed, o), corrected) {
                (Ok(d), _) => Outcome::Pass(d),
                (Err(d), None) => Outcome::Fail(d),
                (Err(d), Some(c)) => match chain(&c, o) {
                    Ok(fixed) => Outcome::Erratum(format!("as printed: {d}; corrected: {fixed}")),
                    Err(e) => Outcome::Fail(format!("as printed: {d}; corrected: {e}")),
                },
            }
        });
    }
}

fn integrality(s: &mut Suite, trunc: i64) {
    let o = Rational64::from(trunc);
    let one = BigInt::one();
    for level in Level::ALL {
        for kind in [Kind::A(level), Kind::B(level), Kind::C(level), Kind::E(level)] {
            let one = one.clone();
            s.add(format!("integrality/{kind}"), "integral q-expansions of the generators", move || {
                let x = gen(kind, o)?;
                let (rad, series) = x.single().ok_or("more than one radical part")?;
                let r = integrality_check(series, &one);
                let prefactor = if rad.is_one() { String::new() } else { format!(" after the prefactor {rad}") };
                match r.first_non_integer {
                    None => Ok(format!("integral below Q^{o}{prefactor}")),
                    Some((e, c)) => Err(format!("Q^{e} has coefficient {}{prefactor}", format_rat(&c))),
                }
            });
        }
    }
    for orb in Orbifold::WDVV {
        s.add(format!("integrality/12<<P>>_{{1,1}}/{orb}"), "12 <<P>>_{1,1} has integral invariants", move || {
            let g = genus1_form(orb).eval(o).map_err(err)?.to_rational().map_err(err)?;
            let q = g.substitute(Rational64::from(orb.r() as i64));
            let r = integrality_check(&q, &BigInt::from(12));
            match r.first_non_integer {
                None => Ok(format!("integral below q^{}", trunc * orb.r() as i64)),
                Some((e, c)) => Err(format!("q^{e}: {}", format_rat(&c))),
            }
        });
    }
}

fn weights(s: &mut Suite, trunc: i64) {
    for orb in Orbifold::WDVV {
        let Ok(table) = correlators(orb) else { continue };
        for c in table {
            let name = c.name;
            let about = format!("weight T + 2D + 2g - 2 of {name} for {orb}");
            let cc = c.clone();
            s.add(format!("{orb}/{name}/weight"), about, move || {
                let want = cc.expected_weight();
                let p = cc.closed_form().map_err(err)?;
                if p.is_zero() {
                    return Ok("identically zero; weight vacuous".into());
                }
                let w = p.weight().map_err(err)?;
                let mut detail = format!("weight {w}");
                for alt in cc.alternatives.iter().filter(|a| a.expect_equal) {
                    let aw = form(Some(orb), alt.form)?.weight().map_err(err)?;
                    if aw != want {
                        return Err(format!("{}: weight {aw}, expected {want}", alt.label));
                    }
                    detail = format!("{detail}; {} also {aw}", alt.label);
                }
                if w == want {
                    Ok(detail)
                } else {
                    Err(format!("weight {w}, expected {want}"))
                }
            });
            s.add(format!("{orb}/{name}/ages"), "degree axiom: ages sum to T + 2g - 2", move || {
                match c.age_defect() {
                    Some(d) if d.is_zero() => Ok(format!("ages of {} sum to {}", c.insertions.join(","), c.insertions.len() - 2)),
                    Some(d) => Err(format!("ages off by {d}")),
                    None => Err("unknown insertion label".into()),
                }
            });
        }
        s.add(format!("{orb}/<<P>>_{{1,1}}/weight"), "weight of <<P>>_{1,1} is 2", move || {
            let w = genus1_form(orb).weight().map_err(err)?;
            (w == Rational64::from(2)).then(|| format!("weight {w}")).ok_or(format!("weight {w}"))
        });
        s.add(format!("{orb}/<<P psi^2>>_{{2,1}}/weight"), "weight of <<P psi^2>>_{2,1} is 4", move || {
            let w = genus2_ppsi2(orb, trunc.min(4)).map_err(err)?.form.weight().map_err(err)?;
            (w == Rational64::from(4)).then(|| format!("weight {w}")).ok_or(format!("weight {w}"))
        });
    }
}

/// Every suite at its default order, keyed by name.
pub fn run_all() -> BTreeMap<&'static str, Result<SuiteReport, VerifyError>> {
    SUITES
        .iter()
        .map(|&n| (n, default_trunc(n).and_then(|t| run_suite(n, t))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite() {
        assert!(matches!(run_suite("bogus", 10), Err(VerifyError::UnknownSuite(_))));
        assert!(matches!(run_suite("theta", 0), Err(VerifyError::BadOrder(0))));
    }

    #[test]
    fn integrality_examples() {
        let a3 = generator(&"A@3".parse().unwrap(), 30).unwrap().to_rational().unwrap();
        assert!(integrality_check(&a3, &BigInt::one()).integral);
        let s = QSeries::from_dense(vec![Rat::one(), Rat::zero(), rational(1, 3)]);
        let r = integrality_check(&s, &BigInt::from(2));
        assert!(!r.integral);
        assert_eq!(r.first_non_integer, Some((Rational64::from(2), rational(2, 3))));
    }

    #[test]
    fn small_suites() {
        for name in ["ramanujan", "isogeny", "theta", "cross", "weights", "genus2"] {
            let rep = run_suite(name, 12).unwrap();
            print!("{rep}");
            assert!(rep.passed(), "{name}");
        }
    }
}
