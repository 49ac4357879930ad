//! Acceptance suite: one test per criterion, each printing its pass/fail
//! line. Tolerances are pinned inside `repelwalk::acceptance`.

use repelwalk::acceptance::run_criterion;

fn check(id: u32) {
    let outcome = run_criterion(id).expect("known criterion id");
    println!("{}", outcome.line());
    assert!(outcome.pass, "{}", outcome.line());
}

#[test]
fn criterion_01_oracle_closed_forms() {
    check(1);
}

#[test]
fn criterion_02_ising_tightness() {
    check(2);
}

#[test]
fn criterion_03_short_range_growth() {
    check(3);
}

#[test]
fn criterion_04_gks_suites() {
    check(4);
}

#[test]
fn criterion_05_ballistic() {
    check(5);
}

#[test]
fn criterion_06_tanh_bound_trials() {
    check(6);
}

#[test]
fn criterion_07_four_point_extremality() {
    check(7);
}

#[test]
fn criterion_08_block_covariance_chain() {
    check(8);
}

#[test]
fn criterion_09_recursion_constants() {
    check(9);
}

#[test]
fn criterion_10_mcmc_validation() {
    check(10);
}

#[test]
fn criterion_11_spin_polynomial_positivity() {
    check(11);
}
