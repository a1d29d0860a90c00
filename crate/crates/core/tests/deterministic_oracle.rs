//! A K = 1 stochastic Galerkin run must reproduce a plain scalar
//! central-upwind solver written independently of the library.

mod common;

#[test]
fn k1_example_one_matches_scalar_central_upwind() {
    let (worst, steps) = common::k1_oracle_deviation(50);
    assert!(worst <= 1e-12, "largest deviation {worst:e}");
    assert!(steps > 5);
}
