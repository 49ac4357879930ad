//! Cross-validation against an independent brute-force implementation.
//!
//! The expected values were computed with a separate straight-line Python
//! enumeration (no Gray code, no log-domain tricks, no shared code), so
//! they check the whole oracle pipeline end to end. Tolerances cover
//! summation-order differences only.

use repelwalk::tilt::block_covariance_check;
use repelwalk::transfer::banded_msd;
use repelwalk::{expectation, GibbsSpec, Observable, PairPotential};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[test]
fn power_law_expectation_matches_reference() {
    let spec = GibbsSpec::new(1, 6, 1.0, 0.7, PairPotential::power_law(2, 1.5).unwrap()).unwrap();
    let r = expectation(&spec, &Observable::EndpointSquare).unwrap();
    assert!(rel(r.value, 35.74109852834131) < 1e-12, "value {}", r.value);
    assert!(
        rel(r.log_partition, 19.591789979467496) < 1e-12,
        "lnZ {}",
        r.log_partition
    );
}

#[test]
fn split_measure_covariance_matches_reference() {
    let r = block_covariance_check(1.0, 0.5, 8).unwrap();
    assert!(rel(r.cross_moment, 3.511790730019978) < 1e-12, "cross {}", r.cross_moment);
    assert!(rel(r.v, 3.9207685713260734) < 1e-12, "V {}", r.v);
    assert!(rel(r.slack, 0.05237009929131897) < 1e-10, "slack {}", r.slack);
    assert!(r.certified);
}

#[test]
fn range3_table_matches_reference_and_banded() {
    let pot =
        PairPotential::coefficient_table(2, &[(1, 2, 0.7), (1, 3, 0.4), (2, 3, 0.1)]).unwrap();
    let spec = GibbsSpec::new(1, 10, 1.0, 0.3, pot.clone()).unwrap();
    let r = expectation(&spec, &Observable::EndpointSquare).unwrap();
    assert!(rel(r.value, 98.61964520867924) < 1e-12, "value {}", r.value);
    let b = banded_msd(&pot, 0.3, 10).unwrap();
    assert!(rel(b, 98.61964520867924) < 1e-8, "banded {b}");
}
