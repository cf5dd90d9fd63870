mod common;

#[test]
fn series_ring_axioms() {
    common::ring_axioms().unwrap();
}

#[test]
fn theta_is_a_derivation() {
    common::derivation_rule().unwrap();
}

#[test]
fn roots_round_trip() {
    common::root_round_trip().unwrap();
}

#[test]
fn substitution_round_trips() {
    common::substitution_round_trip().unwrap();
}
