//! Fault injection for the WDVV solver: missing seeds, contradictory seeds
//! and altered equations must all be caught.

use num_rational::Rational64;

use qmf::series::Rat;
use qmf::wdvv::{builtin_system, closed_form_series, solve_ode, verify_parsed, OdeSystem, Orbifold, Status, Variant, WdvvError};

const X2: &str = include_str!("../fixtures/x2.wdvv");
const X6: &str = include_str!("../fixtures/x6.wdvv");

fn edited(text: &str, from: &str, to: &str) -> OdeSystem {
    assert!(text.contains(from), "fixture lacks {from:?}");
    OdeSystem::parse(&text.replace(from, to), Variant::Full).unwrap()
}

#[test]
fn shipped_text_matches_builtin() {
    assert_eq!(OdeSystem::parse(X2, Variant::Full).unwrap(), builtin_system(Orbifold::X2, Variant::Full).unwrap());
}

#[test]
fn missing_seed_hits_resonance() {
    let sys = edited(X2, "seed X = q + O(q^2)", "seed X = O(q)");
    assert_eq!(solve_ode(&sys, 10), Err(WdvvError::ResonantOrder(1)));

    let sys = edited(X6, "seed Z21 = q^3 + O(q^4)", "seed Z21 = O(q^3)");
    assert_eq!(solve_ode(&sys, 10), Err(WdvvError::ResonantOrder(3)));
}

#[test]
fn contradictory_seed_is_rejected() {
    let sys = edited(X2, "seed Z = O(q)", "seed Z = 1 + O(q)");
    match solve_ode(&sys, 10) {
        Err(WdvvError::SeedInconsistency { order, .. }) => assert_eq!(order, 0),
        other => panic!("expected a seed inconsistency, got {other:?}"),
    }
}

#[test]
fn seeds_are_reproduced() {
    let sol = solve_ode(&builtin_system(Orbifold::X6, Variant::Full).unwrap(), 8).unwrap();
    assert_eq!(sol.series["Z21"].coeff(Rational64::from(3)), Rat::from_integer(1.into()));
    assert_eq!(sol.series["Z9"].coeff(Rational64::from(0)), Rat::new((-1).into(), 36.into()));
}

#[test]
fn perturbed_equation_is_detected() {
    let sys = builtin_system(Orbifold::X2, Variant::Full).unwrap();
    let bad = sys.perturbed("e3", &Rat::new(1.into(), 7.into()), "X*Y").unwrap();

    // The altered system still solves, but not to the closed forms.
    let sol = solve_ode(&bad, 12).unwrap();
    let z = closed_form_series(Orbifold::X2, "Z", 12).unwrap();
    assert!(!sol.series["Z"].agrees_with(&z));

    let rep = verify_parsed(&bad, 12);
    let failed: Vec<_> = rep.failures().map(|e| e.label.as_str()).collect();
    assert!(failed.contains(&"e3"), "{failed:?}");
    assert!(failed.iter().any(|l| l.starts_with("solved")), "{failed:?}");
    assert!(!rep.passed());
}

#[test]
fn corrected_equation_is_an_erratum_not_a_pass() {
    let rep = verify_parsed(&builtin_system(Orbifold::X3, Variant::Full).unwrap(), 20);
    let e6 = rep.entries.iter().find(|e| e.label == "e6").unwrap();
    assert_eq!(e6.status, Status::Erratum);
    assert_eq!(e6.residual.as_deref(), Some("q^3: 27"));
    assert_eq!(e6.corrected.as_ref().unwrap().status, Status::Pass);
    assert!(rep.passed());
}
