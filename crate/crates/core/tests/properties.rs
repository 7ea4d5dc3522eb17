mod common;

fn check(name: &str) {
    if let Err(e) = common::run(name, common::CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn twopoint_monotone() {
    check("twopoint_monotone");
}

#[test]
fn twopoint_dominance() {
    check("twopoint_dominance");
}

#[test]
fn ibound_identity() {
    check("ibound_identity");
}

#[test]
fn inc_beta_symmetry() {
    check("inc_beta_symmetry");
}

#[test]
fn pair_check_invariance() {
    check("pair_check_invariance");
}

#[test]
fn half_cube_inseparable() {
    check("half_cube_inseparable");
}

#[test]
fn duplicate_pair_count() {
    check("duplicate_pair_count");
}
