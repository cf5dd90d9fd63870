//! One PASS/FAIL line per acceptance criterion.
//!
//! Every comparison is exact (rational coefficients, zero tolerance); the
//! only pinned tolerances are wall-clock budgets. A criterion whose printed
//! statement fails while its documented correction holds prints FAIL; the
//! target itself only fails when the state differs from the documented one.
//! It runs without the libtest harness so the lines are always printed.

mod common;

use std::time::{Duration, Instant};

use num_rational::Rational64;

use qmf::genus::{genus1_closed, genus1_e_derivative, genus2_constant, genus2_ppsi2};
use qmf::modforms::{eisenstein, generator, GeneratorId, Kind, Level};
use qmf::series::{QSeries, Rat};
use qmf::verify::{run_suite, SuiteReport};
use qmf::wdvv::{builtin_system, solve_ode, verify_system, Orbifold, Status, Variant};

const RAMANUJAN_BUDGET: Duration = Duration::from_secs(10);
const WDVV_BUDGET: Duration = Duration::from_secs(60);

struct Line {
    n: u32,
    ok: bool,
    text: String,
}

fn line(n: u32, ok: bool, text: impl Into<String>) -> Line {
    let l = Line { n, ok, text: text.into() };
    println!("[{:>2}] {} {}", l.n, if l.ok { "PASS" } else { "FAIL" }, l.text);
    l
}

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

fn suite_summary(r: &SuiteReport) -> String {
    let fails: Vec<_> = r.failures().map(|c| c.id.as_str()).collect();
    let errata: Vec<_> = r.errata().map(|c| c.id.as_str()).collect();
    format!("{} checks, failures {fails:?}, errata {errata:?}", r.checks.len())
}

fn ramanujan() -> Line {
    let t0 = Instant::now();
    let r = run_suite("ramanujan", 50).unwrap();
    let dt = t0.elapsed();
    let ok = r.passed() && r.errata().count() == 0 && r.checks.len() == 16 && dt < RAMANUJAN_BUDGET;
    line(1, ok, format!("Ramanujan identities, N=1*,2,3,4 to Q^50: {} in {dt:.2?} (budget {RAMANUJAN_BUDGET:?})", suite_summary(&r)))
}

fn boundary() -> Line {
    let mut bad = Vec::new();
    for level in Level::ALL {
        let info = level.info();
        for kind in [Kind::A(level), Kind::B(level), Kind::E(level)] {
            let id = GeneratorId::new(kind);
            let s = generator(&id, 4).unwrap().to_rational().unwrap();
            if s.leading() != Some((Rational64::from(0), &rat(1, 1))) {
                bad.push(format!("{id} leads with {:?}", s.leading()));
            }
        }
        let id = GeneratorId::new(Kind::C(level));
        let cr = generator(&id, 4).unwrap().pow(info.r).to_rational().unwrap();
        let kappa = rat(info.kappa as i64, 1);
        if cr.leading() != Some((Rational64::from(1), &kappa)) {
            bad.push(format!("{id}^{} leads with {:?}", info.r, cr.leading()));
        }
    }
    line(2, bad.is_empty(), format!("A,B,E = 1+O(Q) and C^r = kappa Q(1+O(Q)), kappa = 432,64,27,16: {bad:?}"))
}

/// Printed WDVV equations (`e1`, `e2`, ...) in each shipped system. The
/// criterion quotes 33 for X6, but the printed list has 32.
const EQUATION_COUNTS: [(Orbifold, usize); 4] = [(Orbifold::X2, 3), (Orbifold::X3, 9), (Orbifold::X4, 16), (Orbifold::X6, 32)];

/// Printed equations that fail while their documented correction holds.
const WDVV_ERRATA: [&str; 1] = ["X3/e6"];

struct Wdvv {
    line: Line,
    solver_bad: Vec<String>,
    printed_bad: Vec<String>,
    errata: Vec<String>,
}

fn is_numbered(label: &str) -> bool {
    label.strip_prefix('e').is_some_and(|n| n.parse::<u32>().is_ok())
}

fn wdvv() -> Wdvv {
    let t0 = Instant::now();
    let mut solver_bad = Vec::new();
    let mut printed_bad = Vec::new();
    let mut errata = Vec::new();
    let mut counts = Vec::new();
    for (o, n) in EQUATION_COUNTS {
        let t = if o == Orbifold::X6 { 60 } else { 100 };
        let sys = builtin_system(o, Variant::Full).unwrap();
        let numbered = sys.equations.iter().filter(|e| is_numbered(&e.label)).count();
        counts.push(format!("{o}: {numbered} numbered + {} more", sys.equations.len() - numbered + sys.definitions.len()));
        if numbered != n {
            printed_bad.push(format!("{o} has {numbered} numbered equations"));
        }
        for v in [Variant::Minimal, Variant::Full] {
            let rep = verify_system(o, v, t).unwrap();
            for e in &rep.entries {
                let tag = format!("{o}/{}", e.label);
                match (e.kind.as_str(), e.status) {
                    (_, Status::Pass) => {}
                    ("solver" | "solver claim", _) => solver_bad.push(format!("{o}/{v}/{}", e.label)),
                    (_, Status::Erratum) if !errata.contains(&tag) => errata.push(tag),
                    (_, Status::Erratum) => {}
                    (_, Status::Fail) => printed_bad.push(format!("{o}/{v}/{}", e.label)),
                }
            }
        }
    }
    let dt = t0.elapsed();
    let ok = solver_bad.is_empty() && printed_bad.is_empty() && errata.is_empty() && dt < WDVV_BUDGET;
    let line = line(
        3,
        ok,
        format!(
            "WDVV solutions from seeds equal the closed forms to q^100 (X6: q^60) with mismatches {solver_bad:?}; \
             every printed equation and relation vanishes except {printed_bad:?} and, as printed, {errata:?} \
             (corrected forms vanish); {counts:?}; {dt:.2?} (budget {WDVV_BUDGET:?})"
        ),
    );
    Wdvv {
        line,
        solver_bad,
        printed_bad,
        errata,
    }
}

fn x2_values() -> Line {
    let sol = solve_ode(&builtin_system(Orbifold::X2, Variant::Full).unwrap(), 10).unwrap();
    let q = |k: i64| Rational64::from(k);
    let (x, y, z) = (&sol.series["X"], &sol.series["Y"], &sol.series["Z"]);
    let ok = x.coeff(q(0)) == rat(0, 1)
        && x.coeff(q(1)) == rat(1, 1)
        && x.coeff(q(2)) == rat(0, 1)
        && x.coeff(q(3)) == rat(4, 1)
        && z.coeff(q(0)) == rat(0, 1)
        && z.coeff(q(1)) == rat(0, 1)
        && z.coeff(q(2)) == rat(2, 1)
        && y.coeff(q(0)) == rat(-1, 4);
    let text = format!("X2: X = {}, Z = {}, Y = {}", x.truncate(q(5)), z.truncate(q(4)), y.truncate(q(3)));
    line(4, ok, text.replace('Q', "q"))
}

fn x3_potential() -> Line {
    let r = run_suite("potentials", 50).unwrap();
    let x3: Vec<_> = r.checks.iter().filter(|c| c.id.starts_with("X3/")).collect();
    let bad: Vec<_> = x3.iter().filter(|c| c.status != Status::Pass).map(|c| c.id.as_str()).collect();
    line(5, !x3.is_empty() && bad.is_empty(), format!("X3 potential coefficients against closed forms to q^50: {} checks, failing {bad:?}", x3.len()))
}

fn genus_one() -> Line {
    let r = run_suite("genus1", 100).unwrap();
    let ei2 = eisenstein(2, 100).unwrap();
    let x1 = genus1_closed(Orbifold::X1, 100).unwrap();
    let elliptic = x1 == ei2.scale(&rat(-1, 24));
    let mut de = Vec::new();
    for (o, d) in [(Orbifold::X2, 4), (Orbifold::X3, 6), (Orbifold::X4, 8), (Orbifold::X6, 12)] {
        let got = genus1_e_derivative(o).unwrap();
        if got != rat(-1, d) {
            de.push(format!("{o}: {got}"));
        }
    }
    line(6, r.passed() && r.errata().count() == 0 && elliptic && de.is_empty(), format!("<<P>>_{{1,1}} = -Ei2/12 to Q^100, X1 = -Ei2/24: {elliptic}, dE = -1/4,-1/6,-1/8,-1/12 mismatches {de:?}; {}", suite_summary(&r)))
}

fn genus_two() -> Line {
    let r = run_suite("genus2", 50).unwrap();
    let mut bad = Vec::new();
    for (o, c) in [(Orbifold::X2, 48), (Orbifold::X3, 144), (Orbifold::X4, 252), (Orbifold::X6, 480)] {
        if genus2_constant(o).unwrap() != c {
            bad.push(format!("{o}: c_r"));
        }
        let g = genus2_ppsi2(o, 50).unwrap();
        if g.form.weight().unwrap() != Rational64::from(4) {
            bad.push(format!("{o}: weight"));
        }
        if g.series.is_zero() {
            bad.push(format!("{o}: zero series"));
        }
    }
    line(7, r.passed() && r.errata().count() == 0 && bad.is_empty(), format!("<<P psi^2>>_{{2,1}} with c_r = 48,144,252,480, weight 4, Ei2 re-evaluation: {bad:?}; {}", suite_summary(&r)))
}

fn cross(r: &SuiteReport) -> Line {
    line(8, r.passed() && r.errata().count() == 0, format!("cross-orbifold identities to q^50: {}", suite_summary(r)))
}

fn integrality() -> Line {
    let r = run_suite("integrality", 200).unwrap();
    line(9, r.passed() && r.errata().count() == 0, format!("A,B,C,E and 12<<P>>_{{1,1}} integral to Q^200: {}", suite_summary(&r)))
}

fn weights() -> Line {
    let r = run_suite("weights", 40).unwrap();
    line(10, r.passed() && r.errata().count() == 0, format!("weight = T + 2D + 2g - 2 for every registered correlator: {}", suite_summary(&r)))
}

fn properties() -> Line {
    let results = [
        ("ring axioms", common::ring_axioms()),
        ("derivation rule", common::derivation_rule()),
        ("root round trip", common::root_round_trip()),
        ("substitution round trip", common::substitution_round_trip()),
    ];
    let bad: Vec<_> = results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    line(11, bad.is_empty(), format!("{} cases each of ring axioms, derivation rule, root and substitution round trips: {bad:?}", common::CASES))
}

/// Sanity check that an exact comparison really is exact.
fn detects_one_unit_in_q_to_the_100(ei2: &QSeries) -> bool {
    let bumped = ei2.add(&QSeries::monomial(rat(1, 1), Rational64::from(99)));
    !bumped.agrees_with(ei2)
}

/// Printed cross-orbifold identities that fail while their correction holds.
const CROSS_ERRATA: [&str; 1] = ["cross/3"];

fn main() {
    println!("acceptance criteria (exact arithmetic; time budgets are the only tolerances)");
    let mut lines = vec![ramanujan(), boundary()];
    let w = wdvv();
    lines.push(w.line);
    lines.extend([x2_values(), x3_potential(), genus_one(), genus_two()]);
    let cross_report = run_suite("cross", 50).unwrap();
    lines.push(cross(&cross_report));
    lines.extend([integrality(), weights(), properties()]);
    assert!(detects_one_unit_in_q_to_the_100(&eisenstein(2, 100).unwrap()));

    let red: Vec<_> = lines.iter().filter(|l| !l.ok).map(|l| l.n).collect();
    println!("failing criteria: {red:?}");
    // Criteria 3 and 8 are red only through misprinted statements whose
    // corrections hold; anything else red is a regression.
    assert!(w.solver_bad.is_empty() && w.printed_bad.is_empty(), "WDVV regression");
    assert_eq!(w.errata, WDVV_ERRATA);
    assert!(cross_report.passed());
    assert_eq!(cross_report.errata().map(|c| c.id.as_str()).collect::<Vec<_>>(), CROSS_ERRATA);
    assert_eq!(red, vec![3, 8], "see the FAIL lines above");
}
