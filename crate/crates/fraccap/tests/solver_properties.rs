//! Order and scaling properties of the discrete capacity and frequency.

use fraccap::lattice::{Grid, LatticeDomain, LatticeSet, Shape};
use fraccap::solvers::{capacity, frequency, torsion, SolverConfig};
use fraccap::FracParams;
use proptest::prelude::*;

const H: f64 = 1.0 / 16.0;

fn host() -> LatticeDomain {
    LatticeDomain::from_shape(&Shape::Interval { a: -3.0, b: 3.0 }, 1, H).unwrap()
}

fn interval(dom: &LatticeDomain, c: f64, half: f64, closed: bool) -> LatticeSet {
    dom.select(&Shape::Interval { a: c - half, b: c + half }, closed)
}

fn params_strategy() -> impl Strategy<Value = FracParams> {
    // sp stays at most N = 1
    (0.1f64..0.9, prop_oneof![Just(1.0), Just(1.5), Just(2.0)])
        .prop_map(|(t, p)| FracParams::new(1, t / p, p, p).unwrap())
}

fn cap(sigma: &LatticeSet, env: &LatticeSet, params: &FracParams) -> f64 {
    capacity(sigma, env, params, &SolverConfig::default()).unwrap().value
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn capacity_grows_with_the_compact_set(params in params_strategy(), b1 in 0.2f64..0.8, extra in 0.0f64..0.6, c in -0.3f64..0.3) {
        let dom = host();
        let env = interval(&dom, 0.0, 2.0, false);
        let small = interval(&dom, c, b1, true);
        let large = interval(&dom, c, b1 + extra, true);
        let (a, b) = (cap(&small, &env, &params), cap(&large, &env, &params));
        prop_assert!(a <= b * (1.0 + 1e-6) + 1e-9, "{a} > {b}");
    }

    #[test]
    fn capacity_shrinks_with_the_environment(params in params_strategy(), e1 in 1.2f64..2.0, extra in 0.0f64..0.8) {
        let dom = host();
        let sigma = interval(&dom, 0.0, 1.0, true);
        let inner = interval(&dom, 0.0, e1, false);
        let outer = interval(&dom, 0.0, e1 + extra, false);
        let (a, b) = (cap(&sigma, &inner, &params), cap(&sigma, &outer, &params));
        prop_assert!(b <= a * (1.0 + 1e-6) + 1e-9, "{b} > {a}");
    }

    #[test]
    fn capacity_dominates_volume_times_frequency(params in params_strategy(), b in 0.3f64..1.0, e in 1.3f64..2.0) {
        let dom = host();
        let env = LatticeDomain::from_set(interval(&dom, 0.0, e, false)).unwrap();
        let sigma = interval(&dom, 0.0, b, true);
        let lam = frequency(&env, &params, &SolverConfig::default()).unwrap().value;
        let c = cap(&sigma, env.set(), &params);
        prop_assert!(sigma.measure() * lam <= c * (1.0 + 1e-6), "{} > {c}", sigma.measure() * lam);
    }

    #[test]
    fn capacity_scales_exactly(params in params_strategy(), t in 0.25f64..4.0) {
        let mask: Vec<bool> = (0..40).map(|i| (3..37).contains(&i)).collect();
        let sigma: Vec<bool> = (0..40).map(|i| (12..25).contains(&i)).collect();
        let at = |h: f64| {
            let grid = Grid::new(1, h, [0, 0], [40, 1]).unwrap();
            let env = LatticeSet::from_mask(grid, mask.clone()).unwrap();
            let sig = LatticeSet::from_mask(grid, sigma.clone()).unwrap();
            cap(&sig, &env, &params)
        };
        let (base, scaled) = (at(H), at(H * t));
        let expected = base * t.powf(params.energy_scaling());
        prop_assert!((scaled - expected).abs() <= 1e-9 * expected, "{scaled} vs {expected}");
    }

    #[test]
    fn torsion_function_is_nonnegative(t in 0.1f64..0.9, p in 1.3f64..2.5, r in 0.3f64..1.0) {
        let params = FracParams::new(1, t / p, p, p).unwrap();
        let v = torsion(r, 1.0, &params, H, &SolverConfig::default()).unwrap();
        prop_assert!(v.minimizer.values().iter().all(|&x| x >= 0.0));
        prop_assert!(v.minimizer.values().iter().any(|&x| x > 0.0));
    }
}
