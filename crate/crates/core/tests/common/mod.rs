//! Randomized series properties shared by the property and acceptance tests.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use qmf::series::{QSeries, Rat};

pub const CASES: u32 = 1000;

fn rat() -> impl Strategy<Value = Rat> {
    (-30i64..=30, 1i64..=6).prop_map(|(n, d)| Rat::new(BigInt::from(n), BigInt::from(d)))
}

/// A truncated series on the grid `Q^(1/den)`, `den` in 1..=3.
pub fn series() -> impl Strategy<Value = QSeries> {
    (1i64..=3, 2i64..=14).prop_flat_map(|(den, t)| {
        prop::collection::vec((0..t, rat()), 0..8).prop_map(move |terms| {
            let terms = terms.into_iter().map(|(k, c)| (Rational64::new(k, den), c));
            QSeries::from_terms(terms, Some(Rational64::new(t, den))).unwrap()
        })
    })
}

/// Three series sharing a grid and truncation.
fn triple() -> impl Strategy<Value = (QSeries, QSeries, QSeries)> {
    (series(), series(), series())
}

/// `1 + ...` with an integral grid, so every root is defined.
fn unit_series() -> impl Strategy<Value = QSeries> {
    (2i64..=12, prop::collection::vec((1i64..12, rat()), 0..6)).prop_map(|(t, terms)| {
        let mut v: Vec<_> = terms.into_iter().filter(|(k, _)| *k < t).map(|(k, c)| (Rational64::from(k), c)).collect();
        v.push((Rational64::from(0), Rat::from_integer(1.into())));
        QSeries::from_terms(v, Some(Rational64::from(t))).unwrap()
    })
}

fn same(a: &QSeries, b: &QSeries, what: &str) -> Result<(), TestCaseError> {
    if a.agrees_with(b) {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: {a} vs {b}")))
    }
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(s: S, f: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    runner().run(&s, f).map_err(|e| e.to_string())
}

pub fn ring_axioms() -> Result<(), String> {
    run(triple(), |(a, b, c)| {
        same(&a.add(&b).add(&c), &a.add(&b.add(&c)), "additive associativity")?;
        same(&a.add(&b), &b.add(&a), "additive commutativity")?;
        same(&a.mul(&b), &b.mul(&a), "commutativity")?;
        same(&a.mul(&b).mul(&c), &a.mul(&b.mul(&c)), "associativity")?;
        same(&a.mul(&b.add(&c)), &a.mul(&b).add(&a.mul(&c)), "distributivity")?;
        same(&a.mul(&QSeries::one()), &a, "unit")?;
        prop_assert!(a.sub(&a).is_zero(), "a - a = {}", a.sub(&a));
        Ok(())
    })
}

/// `theta_Q` is a derivation.
pub fn derivation_rule() -> Result<(), String> {
    run((series(), series()), |(a, b)| {
        same(&a.mul(&b).theta(), &a.theta().mul(&b).add(&a.mul(&b.theta())), "Leibniz")?;
        same(&a.add(&b).theta(), &a.theta().add(&b.theta()), "additivity")?;
        Ok(())
    })
}

/// `(s^(1/r))^r = s`, and `(a^r)^(1/r) = a` for a positive leading coefficient.
pub fn root_round_trip() -> Result<(), String> {
    run((unit_series(), 1u32..=6, series()), |(s, r, a)| {
        let g = s.unit_root(r).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(g.trunc(), s.trunc());
        same(&g.pow(r), &s, "unit root")?;
        if let Some((_, c)) = a.leading() {
            if *c > Rat::from_integer(0.into()) && a.trunc().is_some() {
                let back = a.pow(r).root(r).map_err(|e| TestCaseError::fail(e.to_string()))?;
                same(&back, &a, "root of power")?;
            }
        }
        Ok(())
    })
}

/// `Q -> Q^m` is a ring map and `Q^(1/m)` undoes it.
pub fn substitution_round_trip() -> Result<(), String> {
    let m = (1i64..=6, 1i64..=6).prop_map(|(n, d)| Rational64::new(n, d));
    run((series(), series(), m), |(a, b, m)| {
        let back = a.substitute(m).substitute(m.recip());
        prop_assert_eq!(&back, &a);
        same(&a.mul(&b).substitute(m), &a.substitute(m).mul(&b.substitute(m)), "multiplicative")?;
        same(&a.theta().substitute(m), &a.substitute(m).theta().scale(&Rat::new((*m.denom()).into(), (*m.numer()).into())), "chain rule")?;
        Ok(())
    })
}
