//! Inradius, negligible balls and the capacitary inradius.
//!
//! A ball `B_r(x₀)` is negligible at level `γ` when
//! `cap(B̄_r(x₀) ∖ Ω; B_{2r}(x₀)) ≤ γ cap(B̄_r(x₀); B_{2r}(x₀))`.
//! Both capacities scale like `r^{N-sp}` (`r^{N-p}` for the local energy), so
//! every test is carried out on one reference lattice covering `B_2`: the
//! removed set is the set of reference cells `y` in `B̄_1` whose sample point
//! `x₀ + r y` misses `Ω`.  Identical removed sets share one solve.

use alloc::collections::BTreeMap;

use crate::lattice::{Grid, KernelWeights, LatticeDomain, LatticeSet, Point, Shape};
use crate::params::FracParams;
use crate::prelude::*;
use crate::solvers::{capacity_with_kernel, local_capacity, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegligibleResult {
    pub negligible: bool,
    /// `cap(B̄_r ∖ Ω; B_{2r})`.
    pub lhs: f64,
    /// `γ cap(B̄_r; B_{2r})`.
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Use every `center_stride`-th active cell along each axis.
    pub center_stride: usize,
    /// Also test face midpoints between neighbouring sampled centers.
    pub midpoints: bool,
    /// Reference lattice resolution (cells per unit length); `None` picks
    /// 32 in one dimension and 8 in two.
    pub ref_cells_per_unit: Option<usize>,
    /// Largest radius tried; `None` uses the diameter of the lattice box.
    pub max_radius: Option<f64>,
    /// Budget of `(center, radius)` tests.
    pub max_samples: usize,
    /// Test with the local capacity instead of the fractional one.
    pub local: bool,
    pub solver: SolverConfig,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            center_stride: 1,
            midpoints: true,
            ref_cells_per_unit: None,
            max_radius: None,
            max_samples: 1_000_000,
            local: false,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InradiusResult {
    /// Largest radius of a ball certified negligible.
    pub r_lower: f64,
    /// Smallest ladder radius above `r_lower` at which every sampled center
    /// fails.  Heuristic: failure is not known to be monotone in the radius.
    pub r_upper: f64,
    pub witness: Ball,
    /// Number of `(center, radius)` tests performed.
    pub samples: usize,
    /// Whether the sample budget ran out.
    pub exhausted: bool,
}

/// Distance from points to the complement of a domain, resolved at cell
/// granularity.
#[derive(Debug, Clone)]
pub struct ComplementDistance {
    boxes: Vec<(Point, Point)>,
    dim: usize,
}

impl ComplementDistance {
    pub fn new(omega: &LatticeDomain) -> Self {
        let grid = omega.grid();
        let h = grid.h();
        // the nearest inactive cell always touches an active one
        let boxes = (0..grid.len())
            .filter(|&i| !omega.is_active(i))
            .filter(|&i| grid.neighbours(i).any(|n| n.is_some_and(|j| omega.is_active(j))))
            .map(|i| {
                let c = grid.center(i);
                let lo = [c[0] - 0.5 * h, c[1] - 0.5 * h];
                let hi = [c[0] + 0.5 * h, c[1] + 0.5 * h];
                (lo, hi)
            })
            .collect();
        ComplementDistance { boxes, dim: grid.dim() }
    }

    pub fn distance(&self, x: Point) -> f64 {
        let mut best = f64::INFINITY;
        for (lo, hi) in &self.boxes {
            let mut d2 = 0.0;
            for a in 0..self.dim {
                let t = (lo[a] - x[a]).max(x[a] - hi[a]).max(0.0);
                d2 += t * t;
            }
            best = best.min(d2);
        }
        best.sqrt()
    }
}

/// Largest distance from a lattice point (cell center, face midpoint or
/// corner of an active cell) to the complement of `omega`.
pub fn inradius(omega: &LatticeDomain) -> f64 {
    let field = ComplementDistance::new(omega);
    sample_centers(omega, 1, true).into_iter().map(|x| field.distance(x)).fold(0.0, f64::max)
}

enum Energy {
    Fractional(KernelWeights),
    Local(f64),
}

/// Negligibility tests against a fixed reference lattice, with a cache of
/// removed-set capacities.
pub struct Negligibility {
    energy: Energy,
    exponent: f64,
    grid: Grid,
    env: LatticeSet,
    ball_cells: Vec<usize>,
    ball_cap: f64,
    cache: BTreeMap<Vec<u64>, f64>,
    solves: usize,
    cfg: SolverConfig,
}

impl Negligibility {
    pub fn new(params: &FracParams, cfg: &SearchConfig) -> Result<Self> {
        params.validate()?;
        let n = params.dim;
        let per_unit = cfg.ref_cells_per_unit.unwrap_or(if n == 1 { 32 } else { 8 });
        if per_unit < 2 {
            return Err(Error::InvalidParams("reference lattice needs at least 2 cells per unit".into()));
        }
        let h = 1.0 / per_unit as f64;
        let grid = Grid::covering(n, h, [-2.0, -2.0], [2.0, 2.0], 2)?;
        let origin = [0.0, 0.0];
        let env = LatticeSet::from_shape(grid, &Shape::ball(origin, 2.0), false);
        let ball = LatticeSet::from_shape(grid, &Shape::ball(origin, 1.0), true);
        let (energy, exponent) = if cfg.local {
            (Energy::Local(params.p), n as f64 - params.p)
        } else {
            let k = KernelWeights::assemble(&grid, params, cfg.solver.near_band, cfg.solver.near_field)?;
            (Energy::Fractional(k), params.energy_scaling())
        };
        let mut this = Negligibility {
            energy,
            exponent,
            grid,
            env,
            ball_cells: ball.cells(),
            ball_cap: 0.0,
            cache: BTreeMap::new(),
            solves: 0,
            cfg: cfg.solver,
        };
        this.ball_cap = this.reference_capacity(&ball)?;
        Ok(this)
    }

    /// `cap(B̄_1; B_2)` on the reference lattice.
    pub fn ball_capacity(&self) -> f64 {
        self.ball_cap
    }

    /// Scaling exponent of both capacities in the radius.
    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    /// Number of capacity solves so far.
    pub fn solves(&self) -> usize {
        self.solves
    }

    fn reference_capacity(&mut self, sigma: &LatticeSet) -> Result<f64> {
        self.solves += 1;
        let r = match &self.energy {
            Energy::Fractional(k) => capacity_with_kernel(k, sigma, &self.env, &self.cfg)?,
            Energy::Local(p) => local_capacity(sigma, &self.env, *p, &self.cfg)?,
        };
        Ok(r.value)
    }

    /// Reference cells of `B̄_1` whose sample point misses `omega`.
    pub fn removed_set(&self, omega: &LatticeDomain, ball: Ball) -> LatticeSet {
        let mut set = LatticeSet::empty(self.grid);
        for &i in &self.ball_cells {
            let y = self.grid.center(i);
            let x = [ball.center[0] + ball.radius * y[0], ball.center[1] + ball.radius * y[1]];
            if !omega.contains_point(x) {
                set.insert(i);
            }
        }
        set
    }

    /// Capacity of the removed set at unit radius.
    fn removed_capacity(&mut self, omega: &LatticeDomain, ball: Ball) -> Result<f64> {
        let set = self.removed_set(omega, ball);
        if set.is_empty() {
            return Ok(0.0);
        }
        let mut key = vec![0u64; self.ball_cells.len().div_ceil(64)];
        for (k, &i) in self.ball_cells.iter().enumerate() {
            if set.contains(i) {
                key[k / 64] |= 1 << (k % 64);
            }
        }
        if let Some(&v) = self.cache.get(&key) {
            return Ok(v);
        }
        let v = if set.count() == self.ball_cells.len() { self.ball_cap } else { self.reference_capacity(&set)? };
        self.cache.insert(key, v);
        Ok(v)
    }

    pub fn test(&mut self, omega: &LatticeDomain, ball: Ball, gamma: f64) -> Result<NegligibleResult> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParams(format!("gamma = {gamma} not in (0, 1)")));
        }
        if !(ball.radius > 0.0 && ball.radius.is_finite()) {
            return Err(Error::InvalidParams(format!("radius {} must be positive", ball.radius)));
        }
        if omega.dim() != self.grid.dim() {
            return Err(Error::GridMismatch);
        }
        let scale = ball.radius.powf(self.exponent);
        let lhs = scale * self.removed_capacity(omega, ball)?;
        let rhs = gamma * scale * self.ball_cap;
        Ok(NegligibleResult { negligible: lhs <= rhs, lhs, rhs })
    }
}

/// One negligibility test.  For repeated tests build a [`Negligibility`].
pub fn negligible(
    ball: Ball,
    omega: &LatticeDomain,
    params: &FracParams,
    gamma: f64,
    cfg: &SearchConfig,
) -> Result<NegligibleResult> {
    Negligibility::new(params, cfg)?.test(omega, ball, gamma)
}

/// Sampled centers: active cell centers on a stride and, with `midpoints`,
/// the points half a stride up from them along each axis and diagonally.
pub fn sample_centers(omega: &LatticeDomain, stride: usize, midpoints: bool) -> Vec<Point> {
    let grid = omega.grid();
    let stride = stride.max(1);
    let half = 0.5 * stride as f64 * grid.h();
    let offsets: &[[f64; 2]] = match (midpoints, grid.dim()) {
        (false, _) => &[[0.0, 0.0]],
        (true, 1) => &[[0.0, 0.0], [1.0, 0.0]],
        (true, _) => &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]],
    };
    let mut out = Vec::new();
    for i in omega.active_cells() {
        let g = grid.global(i);
        if g.iter().take(grid.dim()).any(|c| c.rem_euclid(stride as i64) != 0) {
            continue;
        }
        let c = grid.center(i);
        for o in offsets {
            let x = [c[0] + o[0] * half, c[1] + o[1] * half];
            if omega.contains_point(x) {
                out.push(x);
            }
        }
    }
    out
}

/// Search for the capacitary inradius `R^s_{p,γ}(Ω)`.
///
/// Radii live on the ladder `k h / 2`.  For each center `c`, with `d` its
/// distance to the complement, balls of radius up to `d` are negligible and
/// `f(c)` is the largest radius `ρ` in `{d} ∪ ladder` such that every ladder
/// radius in `(d, ρ]` passes.  `r_lower = max_c f(c)` does not depend on the
/// visiting order and is non-decreasing in `γ`.
pub fn capacitary_inradius(
    omega: &LatticeDomain,
    params: &FracParams,
    gamma: f64,
    cfg: &SearchConfig,
) -> Result<InradiusResult> {
    let mut tester = Negligibility::new(params, cfg)?;
    search(&mut tester, omega, gamma, cfg)
}

/// [`capacitary_inradius`] with a caller-owned tester, so the cache can be
/// shared between levels `γ`.
pub fn search(
    tester: &mut Negligibility,
    omega: &LatticeDomain,
    gamma: f64,
    cfg: &SearchConfig,
) -> Result<InradiusResult> {
    let step = 0.5 * omega.h();
    let field = ComplementDistance::new(omega);
    let max_radius = cfg.max_radius.unwrap_or_else(|| {
        let lo = omega.grid().box_lo();
        let hi = omega.grid().box_hi();
        (0..omega.dim()).map(|a| (hi[a] - lo[a]).powi(2)).sum::<f64>().sqrt()
    });
    let last = (max_radius / step).floor() as usize;
    let mut centers: Vec<(Point, f64)> =
        sample_centers(omega, cfg.center_stride, cfg.midpoints).into_iter().map(|c| (c, field.distance(c))).collect();
    // deepest first so the pruning bites early; stable for determinism
    centers.sort_by(|a, b| b.1.total_cmp(&a.1));

    let mut samples = 0usize;
    let mut exhausted = false;
    let mut best = 0.0f64;
    let mut witness = Ball { center: centers.first().map_or([0.0; 2], |c| c.0), radius: 0.0 };
    let pass = |tester: &mut Negligibility, c: Point, k: usize, samples: &mut usize| -> Result<Option<bool>> {
        if *samples >= cfg.max_samples {
            return Ok(None);
        }
        *samples += 1;
        let r = tester.test(omega, Ball { center: c, radius: k as f64 * step }, gamma)?;
        Ok(Some(r.negligible))
    };

    'centers: for &(c, d) in &centers {
        if d > best {
            best = d;
            witness = Ball { center: c, radius: d };
        }
        // first ladder index strictly above d and strictly above best
        let first = (d / step).floor() as usize + 1;
        let target = ((best / step).floor() as usize + 1).max(first);
        if target > last {
            continue;
        }
        match pass(tester, c, target, &mut samples)? {
            None => {
                exhausted = true;
                break;
            }
            Some(false) => continue,
            Some(true) => {}
        }
        for k in (first..target).rev() {
            match pass(tester, c, k, &mut samples)? {
                None => {
                    exhausted = true;
                    break 'centers;
                }
                Some(false) => continue 'centers,
                Some(true) => {}
            }
        }
        let mut top = target;
        while top < last {
            match pass(tester, c, top + 1, &mut samples)? {
                None => {
                    exhausted = true;
                    break;
                }
                Some(false) => break,
                Some(true) => top += 1,
            }
        }
        let radius = top as f64 * step;
        if radius > best {
            best = radius;
            witness = Ball { center: c, radius };
        }
        if exhausted {
            break;
        }
    }

    // smallest ladder radius above r_lower where all centers fail
    let mut k = (best / step).floor() as usize + 1;
    let mut r_upper = f64::INFINITY;
    'ladder: while !exhausted && k <= last {
        for &(c, d) in &centers {
            if d >= k as f64 * step {
                k += 1;
                continue 'ladder;
            }
            match pass(tester, c, k, &mut samples)? {
                None => {
                    exhausted = true;
                    break 'ladder;
                }
                Some(true) => {
                    k += 1;
                    continue 'ladder;
                }
                Some(false) => {}
            }
        }
        r_upper = k as f64 * step;
        break;
    }
    Ok(InradiusResult { r_lower: best, r_upper, witness, samples, exhausted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Shape;

    fn params(dim: usize) -> FracParams {
        FracParams::new(dim, 0.5, 2.0, 2.0).unwrap()
    }

    fn quick() -> SearchConfig {
        SearchConfig { ref_cells_per_unit: Some(16), ..SearchConfig::default() }
    }

    #[test]
    fn inradius_of_simple_shapes() {
        let h = 1.0 / 32.0;
        let ball = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), 2, h).unwrap();
        assert!((inradius(&ball) - 1.0).abs() <= h);
        let unit = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, h).unwrap();
        assert!((inradius(&unit) - 0.5).abs() <= h);
        let two = Shape::Union(vec![Shape::ball([-2.0, 0.0], 1.0), Shape::ball([2.5, 0.0], 2.0)]);
        let two = LatticeDomain::from_shape(&two, 2, 1.0 / 16.0).unwrap();
        assert!((inradius(&two) - 2.0).abs() <= 1.0 / 16.0);
    }

    #[test]
    fn distance_field_matches_brute_force() {
        let dom = LatticeDomain::from_shape(&Shape::ball([0.1, 0.0], 0.8), 2, 0.1).unwrap();
        let field = ComplementDistance::new(&dom);
        let g = dom.grid();
        for i in dom.active_cells() {
            let x = g.center(i);
            let brute = (0..g.len())
                .filter(|&j| !dom.is_active(j))
                .map(|j| {
                    let c = g.center(j);
                    let dx = ((c[0] - x[0]).abs() - 0.05).max(0.0);
                    let dy = ((c[1] - x[1]).abs() - 0.05).max(0.0);
                    (dx * dx + dy * dy).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!((field.distance(x) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_inside_is_negligible_for_every_gamma() {
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: -1.0, b: 1.0 }, 1, 1.0 / 32.0).unwrap();
        let mut t = Negligibility::new(&params(1), &quick()).unwrap();
        for gamma in [1e-6, 0.1, 0.9] {
            let r = t.test(&dom, Ball { center: [0.0, 0.0], radius: 0.9 }, gamma).unwrap();
            assert!(r.negligible);
            assert_eq!(r.lhs, 0.0);
            assert!(r.rhs > 0.0);
        }
        assert_eq!(t.solves(), 1);
    }

    #[test]
    fn ball_outside_is_never_negligible() {
        let far = LatticeDomain::from_shape(&Shape::Interval { a: 10.0, b: 11.0 }, 1, 1.0 / 32.0).unwrap();
        let mut t = Negligibility::new(&params(1), &quick()).unwrap();
        for gamma in [0.1, 0.5, 0.99] {
            let r = t.test(&far, Ball { center: [0.0, 0.0], radius: 0.7 }, gamma).unwrap();
            assert!(!r.negligible);
            assert!((r.lhs * gamma - r.rhs).abs() <= 1e-12 * r.rhs);
        }
    }

    #[test]
    fn removed_capacity_scales_with_the_radius() {
        // a half-line domain: B̄_r(0) minus Ω is the left half at every radius
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 20.0 }, 1, 1.0 / 64.0).unwrap();
        let mut t = Negligibility::new(&params(1), &quick()).unwrap();
        let a = t.test(&dom, Ball { center: [0.0, 0.0], radius: 1.0 }, 0.5).unwrap();
        let b = t.test(&dom, Ball { center: [0.0, 0.0], radius: 3.0 }, 0.5).unwrap();
        let e = t.exponent();
        assert!((b.lhs - 3f64.powf(e) * a.lhs).abs() <= 1e-12 * b.lhs.max(1e-300));
        assert_eq!(t.solves(), 2);
    }

    #[test]
    fn capacitary_inradius_of_an_interval() {
        let h = 1.0 / 16.0;
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, h).unwrap();
        let p = params(1);
        let res = capacitary_inradius(&dom, &p, 0.3, &quick()).unwrap();
        assert!(res.r_lower >= inradius(&dom));
        assert!(res.r_lower <= res.r_upper);
        assert!(!res.exhausted);
        let again = negligible(res.witness, &dom, &p, 0.3, &quick()).unwrap();
        assert!(again.negligible);
    }

    #[test]
    fn capacitary_inradius_grows_with_gamma() {
        let h = 1.0 / 16.0;
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, h).unwrap();
        let cfg = quick();
        let mut t = Negligibility::new(&params(1), &cfg).unwrap();
        let mut prev = 0.0;
        for gamma in [0.05, 0.2, 0.4, 0.8] {
            let r = search(&mut t, &dom, gamma, &cfg).unwrap();
            assert!(r.r_lower >= prev, "{gamma}: {} < {prev}", r.r_lower);
            prev = r.r_lower;
        }
    }

    #[test]
    fn ball_domain_certifies_its_radius() {
        let h = 1.0 / 8.0;
        let dom = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), 2, h).unwrap();
        let cfg = SearchConfig { ref_cells_per_unit: Some(4), center_stride: 2, ..SearchConfig::default() };
        let res = capacitary_inradius(&dom, &params(2), 0.2, &cfg).unwrap();
        assert!(res.r_lower >= 1.0 - h, "{res:?}");
    }
}
