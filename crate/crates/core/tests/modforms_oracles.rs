//! Independent oracles for the modular-form constructors.

use num_bigint::BigInt;
use num_rational::Rational64;
use qmf::modforms::{self, eisenstein, eta, generator, lattice_theta_a2, theta_char, GeneratorId, Kind, Level};
use qmf::series::{QSeries, Rat};
use qmf::surd::SurdSeries;

fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn int_coeffs(s: &QSeries, n: usize) -> Vec<i64> {
    (0..n).map(|k| s.coeff(Rational64::from(k as i64)).to_integer().try_into().unwrap()).collect()
}

/// sigma_p(n) by trial division, independent of the library's sieve.
fn sigma(n: i64, p: u32) -> i64 {
    (1..=n).filter(|d| n % d == 0).map(|d| d.pow(p)).sum()
}

#[test]
fn eisenstein_matches_divisor_sums() {
    assert_eq!(int_coeffs(&eisenstein(2, 5).unwrap(), 5), [1, -24, -72, -96, -168]);
    assert_eq!(int_coeffs(&eisenstein(4, 4).unwrap(), 4), [1, 240, 2160, 6720]);
    assert_eq!(int_coeffs(&eisenstein(6, 4).unwrap(), 4), [1, -504, -16632, -122976]);
    for (k, c) in [(2u32, -24i64), (4, 240), (6, -504)] {
        let e = eisenstein(k, 40).unwrap();
        for n in 1..40 {
            assert_eq!(e.coeff(Rational64::from(n)), rat(c * sigma(n, k - 1)), "Ei{k} at Q^{n}");
        }
    }
}

#[test]
fn eta_matches_pentagonal_numbers() {
    let e = eta(60);
    assert_eq!(e.valuation(), Some(r(1, 24)));
    // brute-force product prod (1 - Q^n) for n < 60
    let mut p = vec![0i64; 60];
    p[0] = 1;
    for n in 1..60 {
        for k in (n..60).rev() {
            p[k] -= p[k - n];
        }
    }
    for (k, c) in p.iter().enumerate() {
        assert_eq!(e.coeff(r(1, 24) + Rational64::from(k as i64)), rat(*c), "eta at Q^{k}");
    }
    let head: Vec<i64> = (0..16).map(|k| p[k]).collect();
    assert_eq!(head, [1, -1, -1, 0, 0, 1, 0, 1, 0, 0, 0, 0, -1, 0, 0, -1]);
}

#[test]
fn theta_constants_by_direct_summation() {
    let t3 = theta_char(r(0, 1), r(0, 1), r(1, 1), 5).unwrap();
    let want = QSeries::from_terms(
        [(r(0, 1), rat(1)), (r(1, 2), rat(2)), (r(2, 1), rat(2)), (r(9, 2), rat(2))],
        Some(r(5, 1)),
    )
    .unwrap();
    assert_eq!(t3, want);
    let t2 = modforms::generator_rational(&"theta2".parse().unwrap(), 7).unwrap();
    let want = QSeries::from_terms(
        [(r(1, 8), rat(2)), (r(9, 8), rat(2)), (r(25, 8), rat(2)), (r(49, 8), rat(2))],
        Some(r(7, 1)),
    )
    .unwrap();
    assert_eq!(t2, want);
    let t = theta_char(r(1, 6), r(0, 1), r(3, 1), 2).unwrap();
    assert_eq!(t.valuation(), Some(r(1, 24)));
}

#[test]
fn a2_lattice_by_enumeration() {
    let a = lattice_theta_a2(8);
    assert_eq!(int_coeffs(&a, 8), [1, 6, 0, 6, 6, 0, 0, 12]);
    // norm-form counts against representation numbers 6 * sum of (d/3)
    let a = lattice_theta_a2(50);
    for n in 1..50i64 {
        let chi: i64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| match d % 3 {
                1 => 1,
                2 => -1,
                _ => 0,
            })
            .sum();
        assert_eq!(a.coeff(Rational64::from(n)), rat(6 * chi), "A2 at Q^{n}");
    }
}

fn abc(level: Level, o: i64) -> [SurdSeries; 4] {
    let g = |k: Kind| generator(&GeneratorId::new(k), o).unwrap();
    [g(Kind::A(level)), g(Kind::B(level)), g(Kind::C(level)), g(Kind::E(level))]
}

#[test]
fn generators_agree_with_theta_expressions() {
    let o = Rational64::from(30);
    for level in Level::ALL {
        for k in [Kind::A(level), Kind::B(level), Kind::C(level), Kind::E(level)] {
            let main = generator(&GeneratorId::new(k.clone()), o).unwrap();
            for (label, alt) in modforms::theta_forms::alternatives(&k, o).unwrap() {
                assert_eq!(main.equal_upto(&alt, o).unwrap(), None, "{k} vs {label}");
            }
        }
    }
}

#[test]
fn fermat_relation_and_leading_terms() {
    for level in Level::ALL {
        let info = level.info();
        let [a, b, c, e] = abc(level, 25);
        let lhs = a.pow(info.r);
        let rhs = b.pow(info.r).add(&c.pow(info.r));
        assert_eq!(lhs.equal_upto(&rhs, Rational64::from(25)).unwrap(), None, "{level:?}");
        // C^r = kappa Q (1 + O(Q))
        let cr = c.pow(info.r).to_rational().unwrap();
        assert_eq!(cr.leading().unwrap(), (Rational64::from(1), &rat(info.kappa as i64)));
        assert_eq!(e.to_rational().unwrap().coeff(Rational64::from(0)), rat(1));
    }
}

#[test]
fn ramanujan_identities_every_level() {
    // theta A = A (E + (C^r - B^r)/A^(r-2)) / (2r), theta B = B (E - A^2)/(2r),
    // theta C = C (E + A^2)/(2r), theta E = (E^2 - A^4)/(2r)
    let o = Rational64::from(30);
    for level in Level::ALL {
        let r = level.info().r;
        let [a, b, c, e] = abc(level, 31);
        let k = qmf::surd::Surd::rational(Rat::new(1.into(), (2 * r as i64).into()));
        let a2 = a.pow(2);
        let diff = c.pow(r).sub(&b.pow(r));
        let ta = a.mul(&e).add(&a2.mul(&diff).div(&a.pow(r - 1)).unwrap()).scale(&k);
        let checks = [
            ("A", a.theta(), ta),
            ("B", b.theta(), b.mul(&e.sub(&a2)).scale(&k)),
            ("C", c.theta(), c.mul(&e.add(&a2)).scale(&k)),
            ("E", e.theta(), e.pow(2).sub(&a2.pow(2)).scale(&k)),
        ];
        for (name, lhs, rhs) in checks {
            assert_eq!(lhs.equal_upto(&rhs, o).unwrap(), None, "theta {name} at {level:?}");
        }
    }
}

#[test]
fn quadratic_ei2_relations() {
    let o = Rational64::from(30);
    for (level, n) in [(Level::Two, 2i64), (Level::Three, 3), (Level::Four, 4)] {
        let [a, ..] = abc(level, 30);
        let e2 = |m: i64| -> SurdSeries { generator(&"Ei2".parse::<GeneratorId>().unwrap().at(m), o).unwrap() };
        let rhs = e2(n)
            .scale(&qmf::surd::Surd::from_int(n))
            .sub(&e2(1))
            .scale(&qmf::surd::Surd::rational(Rat::new(1.into(), (n - 1).into())));
        assert_eq!(a.pow(2).equal_upto(&rhs, o).unwrap(), None, "N={n}");
    }
}

#[test]
fn level_one_discriminant() {
    let [_, b, c, e] = abc(Level::OneStar, 20);
    let c6 = c.pow(6).mul(&b.pow(6)).to_rational().unwrap();
    let eta24 = eta(21).pow(24).truncate(Rational64::from(20));
    assert_eq!(c6.equal_upto(&eta24.scale(&rat(432)), Rational64::from(20)).unwrap(), None);
    let ei2 = eisenstein(2, 20).unwrap();
    assert_eq!(e.to_rational().unwrap().equal_upto(&ei2, Rational64::from(20)).unwrap(), None);
}

#[test]
fn integral_coefficients() {
    for id in ["A@4", "B@4", "C@4", "A@3", "B@3", "C@3", "A@2", "B@2", "A@1*", "B@1*"] {
        let s = modforms::generator_rational(&id.parse().unwrap(), 60).unwrap();
        assert_eq!(s.first_non_integer(&BigInt::from(1)), None, "{id}");
    }
}
