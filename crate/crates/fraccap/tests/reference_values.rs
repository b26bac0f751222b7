//! Numerically computed reference values against closed forms and against
//! each other.

use std::f64::consts::PI;

use fraccap::constants::{self, ConstantContext, EstimateDirection, ReferenceConfig};
use fraccap::lattice::{LatticeDomain, Shape};
use fraccap::solvers::{capacity, frequency, SolverConfig};
use fraccap::FracParams;

fn half_laplacian() -> FracParams {
    FracParams::new(1, 0.5, 2.0, 2.0).unwrap()
}

#[test]
fn half_laplacian_ground_state_of_the_interval() {
    // first eigenvalue of the half Laplacian on (-1, 1) is 1.1577738836977;
    // the unnormalised double integral carries the factor 2π
    let exact = 2.0 * PI * 1.1577738836977;
    let ctx = ConstantContext::numeric(half_laplacian(), &ReferenceConfig::default()).unwrap();
    let lam = ctx.ref_lambda_ball.unwrap();
    assert!((lam - exact).abs() / exact < 0.01, "{lam} vs {exact}");
}

#[test]
fn local_references_match_elementary_solutions() {
    let ctx = ConstantContext::numeric(half_laplacian(), &ReferenceConfig::default()).unwrap();
    let lam = ctx.ref_local_lambda.unwrap();
    let exact = (PI / 4.0).powi(2);
    assert!((lam - exact).abs() / exact < 0.01, "{lam}");
    // linear profile on either side of [-1, 1]
    let cap = ctx.ref_local_cap.unwrap();
    assert!((cap - 2.0).abs() < 0.1, "{cap}");
}

#[test]
fn capacity_dominates_volume_times_frequency() {
    for params in [half_laplacian(), FracParams::new(1, 0.3, 1.5, 1.5).unwrap()] {
        let cfg = SolverConfig::default();
        let h = 1.0 / 32.0;
        let b2 = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 2.0), 1, h).unwrap();
        let b1 = b2.select(&Shape::ball([0.0, 0.0], 1.0), true);
        let lam = frequency(&b2, &params, &cfg).unwrap().value;
        let cap = capacity(&b1, b2.set(), &params, &cfg).unwrap().value;
        assert!(b1.measure() * lam <= cap * (1.0 + 1e-9), "{params:?}: {} > {cap}", b1.measure() * lam);
    }
}

#[test]
fn sobolev_estimate_is_flagged_and_positive() {
    let params = FracParams::new(1, 0.3, 2.0, 2.0).unwrap();
    let est = constants::sobolev_estimate(&params, 2.0, 1.0 / 32.0, &SolverConfig::default()).unwrap();
    assert_eq!(est.direction, EstimateDirection::LowerBoundOfSup);
    assert!(est.value > 0.0 && est.value.is_finite());
    // a larger ball can only do better for a supremum over test functions
    let big = constants::sobolev_estimate(&params, 3.0, 1.0 / 32.0, &SolverConfig::default()).unwrap();
    assert!(big.value >= est.value * (1.0 - 1e-6), "{} < {}", big.value, est.value);
}

#[test]
fn conformal_gamma0_uses_the_conformal_branch() {
    let ctx = ConstantContext::numeric(half_laplacian(), &ReferenceConfig::default()).unwrap();
    assert!(ctx.sobolev_s.is_none());
    assert!(ctx.ref_lambda_conformal.is_some());
    let g0 = constants::gamma0(&ctx).unwrap();
    assert!(g0 > 0.0 && g0 <= 1.0);
    let c = constants::c_upper(&ctx, 0.25 * g0).unwrap();
    let sigma = constants::sigma(&ctx).unwrap();
    assert!(c.is_finite() && sigma > 0.0);
}
