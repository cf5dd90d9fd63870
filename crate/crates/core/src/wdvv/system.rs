//! WDVV systems as text fixtures, and their verification on closed forms.
//!
//! Fixture lines:
//!
//! ```text
//! orbifold X3
//! unknowns Z1 Z4 Z3             solved for, in this order
//! let Z6 = Z4^2                 a relation used to eliminate Z6
//! seed Z4 = q + O(q^2)          coefficients fixed below q^2
//! claim Z5 = 1/3*q + O(q^4)     expected expansion, checked only
//! solve m2: theta_q Z4 = ...    used by the solver
//! check e5: Z1*Z6 = Z4*Z5       verified, never used to solve
//! fix e6: ...                   corrected form of a misprinted equation
//! note e6: ...                  free text attached to an equation
//! ```
//!
//! A `full:` prefix restricts a line to the full variant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::One;
use serde::Serialize;

use super::registry::closed_form_series;
use super::solver::solve_ode;
use super::{Orbifold, WdvvError};
use crate::expr::{parse_equation, parse_expr, Expr, ExprRing};
use crate::rat::format_rat;
use crate::series::{QSeries, Rat};
use crate::surd::Surd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Minimal,
    Full,
}

impl FromStr for Variant {
    type Err = WdvvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minimal" => Ok(Variant::Minimal),
            "full" => Ok(Variant::Full),
            _ => Err(WdvvError::Fixture {
                line: 0,
                msg: format!("unknown variant {s:?}"),
            }),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Minimal => "minimal",
            Variant::Full => "full",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Solve,
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub label: String,
    pub role: Role,
    pub text: String,
    pub lhs: Expr,
    pub rhs: Expr,
    pub fix: Option<(String, Expr, Expr)>,
    pub note: Option<String>,
}

fn has_theta(e: &Expr) -> bool {
    match e {
        Expr::Theta(..) => true,
        Expr::Num(_) | Expr::Var(_) => false,
        Expr::Add(xs) | Expr::Mul(xs) => xs.iter().any(has_theta),
        Expr::Neg(x) | Expr::Pow(x, _) => has_theta(x),
    }
}

fn difference(lhs: &Expr, rhs: &Expr) -> Expr {
    Expr::Add(vec![lhs.clone(), Expr::Neg(Box::new(rhs.clone()))])
}

impl Equation {
    pub fn is_differential(&self) -> bool {
        has_theta(&self.lhs) || has_theta(&self.rhs)
    }

    /// `lhs - rhs`.
    pub fn residual(&self) -> Expr {
        difference(&self.lhs, &self.rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeSystem {
    pub orbifold: Orbifold,
    pub variant: Variant,
    pub unknowns: Vec<String>,
    pub definitions: Vec<(String, Expr)>,
    /// Exact seed coefficients; the truncation marks where the seed ends.
    pub seeds: BTreeMap<String, QSeries>,
    pub claims: Vec<(String, QSeries)>,
    pub equations: Vec<Equation>,
}

const X2: &str = include_str!("../../fixtures/x2.wdvv");
const X3: &str = include_str!("../../fixtures/x3.wdvv");
const X4: &str = include_str!("../../fixtures/x4.wdvv");
const X6: &str = include_str!("../../fixtures/x6.wdvv");

/// The shipped transcription of an orbifold's WDVV system.
pub fn builtin_system(orbifold: Orbifold, variant: Variant) -> Result<OdeSystem, WdvvError> {
    let text = match orbifold {
        Orbifold::X1 => return Err(WdvvError::UnsupportedOrbifold(orbifold)),
        Orbifold::X2 => X2,
        Orbifold::X3 => X3,
        Orbifold::X4 => X4,
        Orbifold::X6 => X6,
    };
    OdeSystem::parse(text, variant)
}

/// Ring of exact series in a single variable `q`, for seeds and claims.
struct PolyInQ;

impl ExprRing<QSeries, WdvvError> for PolyInQ {
    fn constant(&self, c: &Surd) -> Result<QSeries, WdvvError> {
        rational(c).map(QSeries::constant)
    }
    fn var(&self, name: &str) -> Result<QSeries, WdvvError> {
        match name {
            "q" => Ok(QSeries::monomial(Rat::one(), Rational64::one())),
            _ => Err(WdvvError::UnknownVariable(name.to_string())),
        }
    }
    fn add(&self, a: &QSeries, b: &QSeries) -> QSeries {
        a.add(b)
    }
    fn mul(&self, a: &QSeries, b: &QSeries) -> QSeries {
        a.mul(b)
    }
    fn neg(&self, a: &QSeries) -> QSeries {
        a.neg()
    }
    fn pow(&self, a: &QSeries, n: u32) -> QSeries {
        a.pow(n)
    }
    fn theta(&self, a: &QSeries) -> Result<QSeries, WdvvError> {
        Ok(a.theta())
    }
}

pub(crate) fn rational(c: &Surd) -> Result<Rat, WdvvError> {
    c.as_rational()
        .cloned()
        .ok_or_else(|| WdvvError::IrrationalCoefficient(c.to_string()))
}

/// `poly + O(q^n)` as a series truncated at `q^n`.
fn parse_truncated(text: &str) -> Result<QSeries, String> {
    let text = text.trim();
    let i = text.rfind("O(").ok_or_else(|| format!("{text:?} lacks an O(q^n) term"))?;
    let (head, tail) = (&text[..i], text[i + 2..].trim());
    let n: i64 = match tail.strip_suffix(')').map(str::trim) {
        Some("1") => 0,
        Some("q") => 1,
        Some(t) => t
            .strip_prefix("q^")
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| format!("bad order in {text:?}"))?,
        None => return Err(format!("unclosed O( in {text:?}")),
    };
    let head = head.trim_end();
    let head = head.strip_suffix('+').unwrap_or(head).trim();
    let poly = if head.is_empty() {
        QSeries::zero()
    } else {
        parse_expr(head)
            .map_err(|e| e.to_string())?
            .eval(&PolyInQ)
            .map_err(|e| e.to_string())?
    };
    Ok(poly.truncate(Rational64::from(n)))
}

impl OdeSystem {
    pub fn parse(text: &str, variant: Variant) -> Result<Self, WdvvError> {
        let mut orbifold = None;
        let mut sys = OdeSystem {
            orbifold: Orbifold::X1,
            variant,
            unknowns: Vec::new(),
            definitions: Vec::new(),
            seeds: BTreeMap::new(),
            claims: Vec::new(),
            equations: Vec::new(),
        };
        let mut fixes = Vec::new();
        let mut notes = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let bad = |msg: String| WdvvError::Fixture { line, msg };
            let mut s = raw.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(rest) = s.strip_prefix("full:") {
                if variant != Variant::Full {
                    continue;
                }
                s = rest.trim();
            }
            let (key, rest) = s.split_once(char::is_whitespace).ok_or_else(|| bad(format!("bare {s:?}")))?;
            let rest = rest.trim();
            match key {
                "orbifold" => orbifold = Some(rest.parse::<Orbifold>()?),
                "unknowns" => sys.unknowns.extend(rest.split_whitespace().map(String::from)),
                "let" => {
                    let (name, e) = rest.split_once('=').ok_or_else(|| bad("let without '='".into()))?;
                    sys.definitions.push((name.trim().to_string(), parse_expr(e)?));
                }
                "seed" | "claim" => {
                    let (name, e) = rest.split_once('=').ok_or_else(|| bad(format!("{key} without '='")))?;
                    let series = parse_truncated(e).map_err(bad)?;
                    let name = name.trim().to_string();
                    if key == "seed" {
                        sys.seeds.insert(name, series);
                    } else {
                        sys.claims.push((name, series));
                    }
                }
                "solve" | "check" | "fix" | "note" => {
                    let (label, body) = rest.split_once(':').ok_or_else(|| bad("missing label".into()))?;
                    let label = label.trim().to_string();
                    let body = body.trim();
                    match key {
                        "fix" => fixes.push((line, label, body.to_string())),
                        "note" => notes.push((line, label, body.to_string())),
                        _ => {
                            let (lhs, rhs) = parse_equation(body)?;
                            sys.equations.push(Equation {
                                label,
                                role: if key == "solve" { Role::Solve } else { Role::Check },
                                text: body.to_string(),
                                lhs,
                                rhs,
                                fix: None,
                                note: None,
                            });
                        }
                    }
                }
                _ => return Err(bad(format!("unknown directive {key:?}"))),
            }
        }
        for (line, label, body) in fixes {
            let (l, r) = parse_equation(&body)?;
            let eq = sys.equation_mut(&label).ok_or(WdvvError::Fixture {
                line,
                msg: format!("fix for unknown equation {label}"),
            })?;
            eq.fix = Some((body, l, r));
        }
        for (line, label, body) in notes {
            let eq = sys.equation_mut(&label).ok_or(WdvvError::Fixture {
                line,
                msg: format!("note for unknown equation {label}"),
            })?;
            eq.note = Some(body);
        }
        sys.orbifold = orbifold.ok_or(WdvvError::Fixture {
            line: 0,
            msg: "missing orbifold line".into(),
        })?;
        for name in sys.seeds.keys() {
            if !sys.unknowns.contains(name) {
                return Err(WdvvError::Fixture {
                    line: 0,
                    msg: format!("seed for {name}, which is not an unknown"),
                });
            }
        }
        Ok(sys)
    }

    fn equation_mut(&mut self, label: &str) -> Option<&mut Equation> {
        self.equations.iter_mut().find(|e| e.label == label)
    }

    pub fn equation(&self, label: &str) -> Option<&Equation> {
        self.equations.iter().find(|e| e.label == label)
    }

    pub fn solving_equations(&self) -> impl Iterator<Item = &Equation> {
        self.equations.iter().filter(|e| e.role == Role::Solve)
    }

    /// Every correlator name the system mentions.
    pub fn names(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.unknowns.iter().cloned().collect();
        for (n, e) in &self.definitions {
            out.insert(n.clone());
            out.extend(e.vars());
        }
        for eq in &self.equations {
            out.extend(eq.lhs.vars());
            out.extend(eq.rhs.vars());
            if let Some((_, l, r)) = &eq.fix {
                out.extend(l.vars());
                out.extend(r.vars());
            }
        }
        out.extend(self.claims.iter().map(|(n, _)| n.clone()));
        out
    }

    /// Rewrite `e` in terms of the unknowns by expanding definitions.
    pub fn expand(&self, e: &Expr) -> Result<Expr, WdvvError> {
        let defs: BTreeMap<String, Expr> = self.definitions.iter().cloned().collect();
        let mut cur = e.clone();
        for _ in 0..=defs.len() {
            let pending: Vec<String> = cur.vars().into_iter().filter(|v| defs.contains_key(v)).collect();
            if pending.is_empty() {
                return Ok(cur);
            }
            cur = cur.substitute(&defs);
        }
        let stuck = cur.vars().into_iter().find(|v| defs.contains_key(v)).unwrap_or_default();
        Err(WdvvError::Cycle(stuck))
    }

    /// Residual of a deliberately altered copy of equation `label`: the
    /// right side gains `delta * term`. Used for fault injection.
    pub fn perturbed(&self, label: &str, delta: &Rat, term: &str) -> Result<Self, WdvvError> {
        let mut out = self.clone();
        let eq = out.equation_mut(label).ok_or_else(|| WdvvError::UnknownVariable(label.to_string()))?;
        let extra = Expr::Mul(vec![Expr::Num(Surd::rational(delta.clone())), parse_expr(term)?]);
        eq.rhs = Expr::Add(vec![eq.rhs.clone(), extra]);
        eq.text = format!("{} = {}", eq.lhs, eq.rhs);
        eq.fix = None;
        Ok(out)
    }
}

/// Series ring over named q-series, with `theta_q` as the derivation.
pub(crate) struct NamedSeries<'a>(pub &'a BTreeMap<String, QSeries>);

impl ExprRing<QSeries, WdvvError> for NamedSeries<'_> {
    fn constant(&self, c: &Surd) -> Result<QSeries, WdvvError> {
        rational(c).map(QSeries::constant)
    }
    fn var(&self, name: &str) -> Result<QSeries, WdvvError> {
        self.0
            .get(name)
            .cloned()
            .ok_or_else(|| WdvvError::UnknownVariable(name.to_string()))
    }
    fn add(&self, a: &QSeries, b: &QSeries) -> QSeries {
        a.add(b)
    }
    fn mul(&self, a: &QSeries, b: &QSeries) -> QSeries {
        a.mul(b)
    }
    fn neg(&self, a: &QSeries) -> QSeries {
        a.neg()
    }
    fn pow(&self, a: &QSeries, n: u32) -> QSeries {
        a.pow(n)
    }
    fn theta(&self, a: &QSeries) -> Result<QSeries, WdvvError> {
        Ok(a.theta())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// A printed statement that fails while its documented correction passes.
    Erratum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquationReport {
    pub label: String,
    pub kind: String,
    pub text: String,
    pub status: Status,
    /// Residual known to vanish below `q^checked_below` (when passing).
    pub checked_below: Option<i64>,
    /// First nonzero residual term, e.g. `q^4: -3/2`.
    pub residual: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected: Option<Box<EquationReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl EquationReport {
    fn from_residual(label: &str, kind: &str, text: String, r: Result<QSeries, WdvvError>) -> Self {
        let (status, checked_below, residual) = match r {
            Ok(s) => match s.leading() {
                None => (Status::Pass, s.trunc().map(|t| t.to_integer()), None),
                Some((e, c)) => (Status::Fail, None, Some(format!("q^{e}: {}", format_rat(c)))),
            },
            Err(e) => (Status::Fail, None, Some(format!("error: {e}"))),
        };
        EquationReport {
            label: label.to_string(),
            kind: kind.to_string(),
            text,
            status,
            checked_below,
            residual,
            corrected: None,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SystemReport {
    pub orbifold: Orbifold,
    pub variant: Variant,
    pub trunc: i64,
    pub entries: Vec<EquationReport>,
}

impl SystemReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EquationReport> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn errata(&self) -> impl Iterator<Item = &EquationReport> {
        self.entries.iter().filter(|e| e.status == Status::Erratum)
    }
}

fn eval_named(e: &Expr, env: &BTreeMap<String, QSeries>) -> Result<QSeries, WdvvError> {
    e.eval(&NamedSeries(env))
}

fn kind_of(eq: &Equation) -> &'static str {
    if eq.is_differential() {
        "differential"
    } else {
        "polynomial"
    }
}

/// Residual of every equation and definition of `sys` on the series in `env`.
pub fn residuals(sys: &OdeSystem, env: &BTreeMap<String, QSeries>, polynomial_only: bool) -> Vec<EquationReport> {
    let mut out = Vec::new();
    for (name, e) in &sys.definitions {
        let lhs = Expr::Var(name.clone());
        let r = eval_named(&difference(&lhs, e), env);
        out.push(EquationReport::from_residual(name, "relation", format!("{name} = {e}"), r));
    }
    for eq in &sys.equations {
        if polynomial_only && eq.is_differential() {
            continue;
        }
        let mut rep = EquationReport::from_residual(&eq.label, kind_of(eq), eq.text.clone(), eval_named(&eq.residual(), env));
        rep.note = eq.note.clone();
        if let Some((text, l, r)) = &eq.fix {
            let fixed = EquationReport::from_residual(&eq.label, kind_of(eq), text.clone(), eval_named(&difference(l, r), env));
            if rep.status == Status::Fail && fixed.status == Status::Pass {
                rep.status = Status::Erratum;
            }
            rep.corrected = Some(Box::new(fixed));
        }
        out.push(rep);
    }
    out
}

/// Closed forms, as q-series, of every name the system mentions.
pub fn closed_form_env(sys: &OdeSystem, trunc: i64) -> Result<BTreeMap<String, QSeries>, WdvvError> {
    let mut env = BTreeMap::new();
    for name in sys.names() {
        env.insert(name.clone(), closed_form_series(sys.orbifold, &name, trunc)?);
    }
    Ok(env)
}

fn compare(label: String, kind: &str, got: &QSeries, want: &QSeries, order: i64) -> EquationReport {
    let text = format!("{label} against closed form");
    let r = got
        .equal_upto(want, Rational64::from(order))
        .map_err(WdvvError::from)
        .map(|m| match m {
            None => QSeries::zero_to(Rational64::from(order)),
            Some(m) => QSeries::monomial(&m.left - &m.right, m.exponent),
        });
    EquationReport::from_residual(&label, kind, text, r)
}

fn claims_against(sys: &OdeSystem, env: &BTreeMap<String, QSeries>, kind: &str) -> Vec<EquationReport> {
    sys.claims
        .iter()
        .map(|(name, claim)| {
            let label = format!("{kind} {name}");
            let text = format!("{name} = {claim}").replace('Q', "q");
            let r = match env.get(name) {
                Some(s) => Ok(s.truncate(claim.trunc().unwrap_or_default()).sub(claim)),
                None => Err(WdvvError::UnknownVariable(name.clone())),
            };
            EquationReport::from_residual(&label, kind, text, r)
        })
        .collect()
}

/// Substitute the closed forms into every equation and relation, check the
/// boundary claims, then solve from the seeds and compare with the closed forms.
pub fn verify_system(orbifold: Orbifold, variant: Variant, trunc: i64) -> Result<SystemReport, WdvvError> {
    let sys = builtin_system(orbifold, variant)?;
    Ok(verify_parsed(&sys, trunc))
}

/// [`verify_system`] for an already parsed (possibly altered) system.
pub fn verify_parsed(sys: &OdeSystem, trunc: i64) -> SystemReport {
    let mut entries = Vec::new();
    match closed_form_env(sys, trunc) {
        Ok(env) => {
            entries.extend(residuals(sys, &env, false));
            entries.extend(claims_against(sys, &env, "claim"));
            match solve_ode(sys, trunc) {
                Ok(sol) => {
                    for (name, s) in &sol.series {
                        entries.push(compare(format!("solved {name}"), "solver", s, &env[name], trunc));
                    }
                    entries.extend(claims_against(sys, &sol.series, "solver claim"));
                }
                Err(e) => entries.push(EquationReport::from_residual("solve", "solver", "solve from seeds".into(), Err(e))),
            }
        }
        Err(e) => entries.push(EquationReport::from_residual("closed forms", "setup", String::new(), Err(e))),
    }
    SystemReport {
        orbifold: sys.orbifold,
        variant: sys.variant,
        trunc,
        entries,
    }
}

/// Only the derivative-free equations and the relations, on closed forms.
pub fn verify_polynomial_relations(orbifold: Orbifold, trunc: i64) -> Result<SystemReport, WdvvError> {
    let sys = builtin_system(orbifold, Variant::Full)?;
    let env = closed_form_env(&sys, trunc)?;
    Ok(SystemReport {
        orbifold,
        variant: Variant::Full,
        trunc,
        entries: residuals(&sys, &env, true),
    })
}

impl fmt::Display for SystemReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let st = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Erratum => "erratum",
            };
            write!(f, "{} {:<8} {:<14} {}", self.orbifold, st, e.label, e.text)?;
            if let Some(r) = &e.residual {
                write!(f, "  [{r}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl Default for OdeSystem {
    fn default() -> Self {
        OdeSystem {
            orbifold: Orbifold::X1,
            variant: Variant::Minimal,
            unknowns: Vec::new(),
            definitions: Vec::new(),
            seeds: BTreeMap::new(),
            claims: Vec::new(),
            equations: Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn systems_verify_on_closed_forms() {
        for o in Orbifold::WDVV {
            for v in [Variant::Minimal, Variant::Full] {
                let t = if o == Orbifold::X6 { 60 } else { 100 };
                let rep = verify_system(o, v, t).unwrap();
                print!("{rep}");
                assert!(rep.passed(), "{o} {v}");
            }
        }
    }
}
