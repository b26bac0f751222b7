//! Seeded random test functions: sums of tensor-product bumps
//! `a·Π_d (1 - ((x_d - c_d)/w)²)²₊`.

use fraccap::lattice::{Grid, LatticeFunction, LatticeSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for check number `stream` under the run seed.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    /// Box the centers are drawn from.
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub max_bumps: usize,
    /// Allow negative amplitudes.
    pub signed: bool,
}

fn profile(t: f64) -> f64 {
    let v = 1.0 - t * t;
    if v > 0.0 {
        v * v
    } else {
        0.0
    }
}

/// A random bump sum on `grid`, zeroed outside `support` and on `zero_on`.
/// Returns `None` when clamping leaves nothing (the caller redraws).
pub fn bump_function(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    spec: &BumpSpec,
    support: &LatticeSet,
    zero_on: Option<&LatticeSet>,
) -> Option<LatticeFunction> {
    let dim = grid.dim();
    let n = rng.gen_range(1..=spec.max_bumps.max(1));
    let diam = (0..dim).map(|d| spec.hi[d] - spec.lo[d]).fold(0.0, f64::max);
    let bumps: Vec<(f64, [f64; 2], f64)> = (0..n)
        .map(|_| {
            let a = if spec.signed { rng.gen_range(-1.0..1.0) } else { rng.gen_range(0.2..1.0) };
            let mut c = [0.0; 2];
            for d in 0..dim {
                c[d] = rng.gen_range(spec.lo[d]..spec.hi[d]);
            }
            let w = diam * rng.gen_range(0.15..0.7);
            (a, c, w)
        })
        .collect();
    let mut u = LatticeFunction::from_fn(*grid, |x| {
        bumps.iter().map(|(a, c, w)| a * (0..dim).map(|d| profile((x[d] - c[d]) / w)).product::<f64>()).sum()
    });
    let values = u.values_mut();
    for (i, v) in values.iter_mut().enumerate() {
        if !support.contains(i) || zero_on.is_some_and(|z| z.contains(i)) {
            *v = 0.0;
        }
    }
    if values.iter().all(|v| v.abs() < 1e-12) {
        None
    } else {
        Some(u)
    }
}

/// Redraws until a non-trivial function appears (bounded attempts).
pub fn draw(
    rng: &mut ChaCha8Rng,
    grid: &Grid,
    spec: &BumpSpec,
    support: &LatticeSet,
    zero_on: Option<&LatticeSet>,
) -> Option<LatticeFunction> {
    (0..64).find_map(|_| bump_function(rng, grid, spec, support, zero_on))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fraccap::lattice::{LatticeDomain, Shape};

    #[test]
    fn same_seed_same_function() {
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 1.0 / 32.0).unwrap();
        let spec = BumpSpec { lo: [0.0, 0.0], hi: [1.0, 0.0], max_bumps: 3, signed: false };
        let f = |seed, stream| draw(&mut rng(seed, stream), dom.grid(), &spec, dom.set(), None).unwrap().into_values();
        assert_eq!(f(7, 1), f(7, 1));
        assert_ne!(f(7, 1), f(7, 2));
    }

    #[test]
    fn clamps_to_support_and_zero_set() {
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 1.0 / 32.0).unwrap();
        let zero = dom.select(&Shape::Interval { a: 0.25, b: 0.5 }, true);
        let spec = BumpSpec { lo: [0.0, 0.0], hi: [1.0, 0.0], max_bumps: 4, signed: true };
        let mut r = rng(3, 0);
        for _ in 0..20 {
            let u = draw(&mut r, dom.grid(), &spec, dom.set(), Some(&zero)).unwrap();
            for (i, v) in u.values().iter().enumerate() {
                if !dom.is_active(i) || zero.contains(i) {
                    assert_eq!(*v, 0.0);
                }
            }
        }
    }
}
