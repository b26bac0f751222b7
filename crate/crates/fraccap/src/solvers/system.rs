//! Pair energies `E(u) = Σ_{a≠b} w_ab ψ(u_a - u_b) + Σ_a κ_a ψ(u_a)` over a
//! finite list of cells, with `u = 0` on every other cell of `R^N`.

use nalgebra::DMatrix;

use crate::lattice::{Grid, KernelWeights, LatticeFunction};
use crate::prelude::*;
use crate::quad::pairwise_sum;

/// The scalar profile `ψ` applied to differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Potential {
    /// `|t|^p`.
    Power(f64),
    /// `sqrt(t² + ε²) - ε`, a smooth stand-in for `|t|`.
    Smoothed(f64),
}

impl Potential {
    /// Second derivative, with `|t|` replaced by `sqrt(t² + δ²)` so that it
    /// stays finite and positive.
    #[inline]
    pub fn curvature(self, t: f64, delta: f64) -> f64 {
        match self {
            Potential::Power(2.0) => 2.0,
            Potential::Power(p) => p * (p - 1.0) * (t * t + delta * delta).powf(0.5 * (p - 2.0)),
            Potential::Smoothed(e) => {
                let r = t * t + e * e;
                e * e / (r * r.sqrt())
            }
        }
    }
}

/// Monomorphic form of a [`Potential`] used inside the pair loops.
pub(crate) trait Profile: Copy {
    fn value(self, t: f64) -> f64;
    fn slope(self, t: f64) -> f64;
}

#[derive(Clone, Copy)]
struct Quadratic;
#[derive(Clone, Copy)]
struct Absolute;
#[derive(Clone, Copy)]
struct GeneralPower(f64);
#[derive(Clone, Copy)]
struct Smooth(f64);

impl Profile for Quadratic {
    #[inline(always)]
    fn value(self, t: f64) -> f64 {
        t * t
    }
    #[inline(always)]
    fn slope(self, t: f64) -> f64 {
        2.0 * t
    }
}

impl Profile for Absolute {
    #[inline(always)]
    fn value(self, t: f64) -> f64 {
        t.abs()
    }
    #[inline(always)]
    fn slope(self, t: f64) -> f64 {
        if t > 0.0 {
            1.0
        } else if t < 0.0 {
            -1.0
        } else {
            0.0
        }
    }
}

impl Profile for GeneralPower {
    #[inline(always)]
    fn value(self, t: f64) -> f64 {
        t.abs().powf(self.0)
    }
    #[inline(always)]
    fn slope(self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            self.0 * t.abs().powf(self.0 - 1.0) * t.signum()
        }
    }
}

impl Profile for Smooth {
    #[inline(always)]
    fn value(self, t: f64) -> f64 {
        (t * t + self.0 * self.0).sqrt() - self.0
    }
    #[inline(always)]
    fn slope(self, t: f64) -> f64 {
        t / (t * t + self.0 * self.0).sqrt()
    }
}

macro_rules! dispatch {
    ($pot:expr, $f:ident($($arg:expr),*)) => {
        match $pot {
            Potential::Power(p) if p == 2.0 => $f(Quadratic, $($arg),*),
            Potential::Power(p) if p == 1.0 => $f(Absolute, $($arg),*),
            Potential::Power(p) => $f(GeneralPower(p), $($arg),*),
            Potential::Smoothed(e) => $f(Smooth(e), $($arg),*),
        }
    };
}

pub(crate) trait PairEnergy {
    fn grid(&self) -> &Grid;
    /// Grid indices of the variables.
    fn cells(&self) -> &[usize];
    fn killing(&self, a: usize) -> f64;
    /// `Σ_{b≠a} w_ab + κ_a / 2`: half the diagonal of the quadratic form.
    fn degree(&self, a: usize) -> f64;
    fn weight(&self, a: usize, b: usize) -> f64;
    /// Calls `f(b0, ws)` for runs of partners `b0, b0 + 1, ...` of `a`, all
    /// greater than `a`, with `ws[k] = w_{a, b0 + k}`.  Every interacting
    /// `b > a` appears exactly once.
    fn for_each_upper_slice(&self, a: usize, f: impl FnMut(usize, &[f64]));

    /// Like [`PairEnergy::for_each_upper_slice`] but over every partner
    /// `b ≠ a`, in increasing order.
    fn for_each_slice(&self, a: usize, f: impl FnMut(usize, &[f64]));

    /// Calls `f(b, w_ab)` for every `b > a` that interacts with `a`.
    #[inline]
    fn for_each_upper(&self, a: usize, mut f: impl FnMut(usize, f64)) {
        self.for_each_upper_slice(a, |b0, ws| {
            for (k, &w) in ws.iter().enumerate() {
                f(b0 + k, w);
            }
        });
    }

    fn len(&self) -> usize {
        self.cells().len()
    }

    fn to_function(&self, u: &[f64]) -> LatticeFunction {
        let mut f = LatticeFunction::zeros(*self.grid());
        for (&c, &v) in self.cells().iter().zip(u) {
            f.values_mut()[c] = v;
        }
        f
    }

    fn gather(&self, f: &LatticeFunction) -> Vec<f64> {
        self.cells().iter().map(|&c| f.values()[c]).collect()
    }
}

/// A maximal set of variables that are consecutive cells of one lattice row.
#[derive(Debug, Clone, Copy)]
struct Run {
    y: i64,
    x0: i64,
    start: usize,
    len: usize,
}

/// The discrete Gagliardo energy restricted to functions supported on `cells`.
pub(crate) struct NonlocalSystem<'k> {
    kernel: &'k KernelWeights,
    cells: Vec<usize>,
    xs: Vec<i64>,
    ys: Vec<i64>,
    stride: usize,
    runs: Vec<Run>,
    run_of: Vec<usize>,
    /// `unfolded[dy * width + dx + stride - 1] = w(|dx|, dy)` for signed `dx`.
    unfolded: Vec<f64>,
    killing: Vec<f64>,
}

impl<'k> NonlocalSystem<'k> {
    /// `cells` are sorted; the variable order is increasing grid index.
    pub fn new(kernel: &'k KernelWeights, mut cells: Vec<usize>) -> Self {
        cells.sort_unstable();
        cells.dedup();
        let grid = kernel.grid();
        let [stride, rows] = grid.shape();
        let xs: Vec<i64> = cells.iter().map(|&c| (c % stride) as i64).collect();
        let ys: Vec<i64> = cells.iter().map(|&c| (c / stride) as i64).collect();
        let mut runs: Vec<Run> = Vec::new();
        let mut run_of = Vec::with_capacity(cells.len());
        for a in 0..cells.len() {
            match runs.last_mut() {
                Some(r) if r.y == ys[a] && r.x0 + r.len as i64 == xs[a] => r.len += 1,
                _ => runs.push(Run { y: ys[a], x0: xs[a], start: a, len: 1 }),
            }
            run_of.push(runs.len() - 1);
        }
        let width = 2 * stride - 1;
        let mut unfolded = vec![0.0; width * rows];
        for dy in 0..rows {
            for k in 0..width {
                let dx = (k as i64 - (stride as i64 - 1)).unsigned_abs() as usize;
                unfolded[dy * width + k] = kernel.table()[dx + dy * stride];
            }
        }
        let mut sys = NonlocalSystem { kernel, cells, xs, ys, stride, runs, run_of, unfolded, killing: Vec::new() };
        let n = sys.cells.len();
        let mut inside = vec![0.0; n];
        for a in 0..n {
            let mut acc = 0.0;
            sys.for_each_upper_slice(a, |b0, ws| {
                for (k, &w) in ws.iter().enumerate() {
                    acc += w;
                    inside[b0 + k] += w;
                }
            });
            inside[a] += acc;
        }
        sys.killing = (0..n).map(|a| 2.0 * (kernel.row_total(sys.cells[a]) - inside[a])).collect();
        sys
    }
}

impl PairEnergy for NonlocalSystem<'_> {
    fn grid(&self) -> &Grid {
        self.kernel.grid()
    }

    fn cells(&self) -> &[usize] {
        &self.cells
    }

    fn killing(&self, a: usize) -> f64 {
        self.killing[a]
    }

    fn degree(&self, a: usize) -> f64 {
        self.kernel.row_total(self.cells[a])
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let dx = (self.xs[a] - self.xs[b]).unsigned_abs() as usize;
        let dy = (self.ys[a] - self.ys[b]).unsigned_abs() as usize;
        self.kernel.table()[dx + dy * self.stride]
    }

    #[inline]
    fn for_each_upper_slice(&self, a: usize, mut f: impl FnMut(usize, &[f64])) {
        let width = 2 * self.stride - 1;
        let centre = self.stride as i64 - 1;
        let own = self.run_of[a];
        let (xa, ya) = (self.xs[a], self.ys[a]);
        let run = self.runs[own];
        let rest = run.start + run.len - (a + 1);
        if rest > 0 {
            let k0 = (centre + 1) as usize;
            f(a + 1, &self.unfolded[k0..k0 + rest]);
        }
        for r in &self.runs[own + 1..] {
            let dy = (r.y - ya) as usize;
            let k0 = dy * width + (r.x0 - xa + centre) as usize;
            f(r.start, &self.unfolded[k0..k0 + r.len]);
        }
    }

    #[inline]
    fn for_each_slice(&self, a: usize, mut f: impl FnMut(usize, &[f64])) {
        let width = 2 * self.stride - 1;
        let centre = self.stride as i64 - 1;
        let (xa, ya) = (self.xs[a], self.ys[a]);
        for r in &self.runs {
            let dy = (r.y - ya).unsigned_abs() as usize;
            let k0 = dy * width + (r.x0 - xa + centre) as usize;
            let ws = &self.unfolded[k0..k0 + r.len];
            if a >= r.start && a < r.start + r.len {
                let split = a - r.start;
                if split > 0 {
                    f(r.start, &ws[..split]);
                }
                if split + 1 < r.len {
                    f(a + 1, &ws[split + 1..]);
                }
            } else {
                f(r.start, ws);
            }
        }
    }
}

/// Nearest-neighbour Dirichlet energy `Σ_edges h^{N-p} |u_i - u_j|^p`, where
/// the edges include those joining a variable to any cell outside the list.
pub(crate) struct LocalSystem {
    grid: Grid,
    cells: Vec<usize>,
    /// Upper neighbours of each variable.
    upper: Vec<Vec<usize>>,
    /// All neighbours of each variable, sorted.
    around: Vec<Vec<usize>>,
    edge: f64,
    killing: Vec<f64>,
}

impl LocalSystem {
    pub fn new(grid: &Grid, cells: Vec<usize>, p: f64) -> Self {
        let edge = grid.h().powf(grid.dim() as f64 - p);
        let mut slot = vec![usize::MAX; grid.len()];
        for (k, &c) in cells.iter().enumerate() {
            slot[c] = k;
        }
        let mut upper = vec![Vec::new(); cells.len()];
        let mut around = vec![Vec::new(); cells.len()];
        let mut killing = vec![0.0; cells.len()];
        for (a, &c) in cells.iter().enumerate() {
            let mut inner = 0;
            for nb in grid.face_neighbours(c) {
                if let Some(b) = nb.map(|j| slot[j]).filter(|&b| b != usize::MAX) {
                    inner += 1;
                    around[a].push(b);
                    if b > a {
                        upper[a].push(b);
                    }
                }
            }
            killing[a] = edge * (2 * grid.dim() - inner) as f64;
            around[a].sort_unstable();
            upper[a].sort_unstable();
        }
        LocalSystem { grid: *grid, cells, upper, around, edge, killing }
    }
}

impl PairEnergy for LocalSystem {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn cells(&self) -> &[usize] {
        &self.cells
    }

    fn killing(&self, a: usize) -> f64 {
        self.killing[a]
    }

    fn degree(&self, _a: usize) -> f64 {
        self.edge * self.grid.dim() as f64
    }

    fn weight(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if self.upper[lo].contains(&hi) {
            0.5 * self.edge
        } else {
            0.0
        }
    }

    fn for_each_upper_slice(&self, a: usize, mut f: impl FnMut(usize, &[f64])) {
        let w = [0.5 * self.edge];
        for &b in &self.upper[a] {
            f(b, &w);
        }
    }

    fn for_each_slice(&self, a: usize, mut f: impl FnMut(usize, &[f64])) {
        let w = [0.5 * self.edge];
        for &b in &self.around[a] {
            f(b, &w);
        }
    }
}

/// `Σ_k ws[k] ψ(ua - ub[k])` with four independent accumulators.
#[inline(always)]
fn row_value<P: Profile>(pot: P, ua: f64, ws: &[f64], ub: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut wc = ws.chunks_exact(4);
    let mut uc = ub.chunks_exact(4);
    for (w, u) in (&mut wc).zip(&mut uc) {
        for l in 0..4 {
            acc[l] += w[l] * pot.value(ua - u[l]);
        }
    }
    for (w, u) in wc.remainder().iter().zip(uc.remainder()) {
        acc[0] += w * pot.value(ua - u);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

fn energy_impl<P: Profile, S: PairEnergy>(pot: P, sys: &S, u: &[f64]) -> f64 {
    let rows: Vec<f64> = (0..sys.len())
        .map(|a| {
            let ua = u[a];
            let mut acc = 0.0;
            sys.for_each_upper_slice(a, |b0, ws| acc += row_value(pot, ua, ws, &u[b0..b0 + ws.len()]));
            2.0 * acc + sys.killing(a) * pot.value(ua)
        })
        .collect();
    pairwise_sum(&rows)
}

pub(crate) fn energy<S: PairEnergy>(sys: &S, pot: Potential, u: &[f64]) -> f64 {
    dispatch!(pot, energy_impl(sys, u))
}

/// `Σ_k ws[k] ψ'(ua - ub[k])` with four independent accumulators.
#[inline(always)]
fn row_slope<P: Profile>(pot: P, ua: f64, ws: &[f64], ub: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let mut wc = ws.chunks_exact(4);
    let mut uc = ub.chunks_exact(4);
    for (w, u) in (&mut wc).zip(&mut uc) {
        for l in 0..4 {
            acc[l] += w[l] * pot.slope(ua - u[l]);
        }
    }
    for (w, u) in wc.remainder().iter().zip(uc.remainder()) {
        acc[0] += w * pot.slope(ua - u);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

fn gradient_impl<P: Profile, S: PairEnergy>(pot: P, sys: &S, u: &[f64], grad: &mut [f64]) {
    // Separate reductions over full rows vectorise; a fused value-and-slope
    // loop or a scatter over the upper triangle does not.
    for (a, g) in grad.iter_mut().enumerate() {
        let ua = u[a];
        let mut s = 0.0;
        sys.for_each_slice(a, |b0, ws| s += row_slope(pot, ua, ws, &u[b0..b0 + ws.len()]));
        *g = 2.0 * s + sys.killing(a) * pot.slope(ua);
    }
}

/// Energy and its gradient with respect to every variable.
pub(crate) fn energy_grad<S: PairEnergy>(sys: &S, pot: Potential, u: &[f64], grad: &mut [f64]) -> f64 {
    dispatch!(pot, gradient_impl(sys, u, grad));
    energy(sys, pot, u)
}

/// Hessian of the energy, with curvature regularised by `delta`.
pub(crate) fn hessian<S: PairEnergy>(sys: &S, pot: Potential, u: &[f64], delta: f64) -> DMatrix<f64> {
    let n = sys.len();
    let mut h = DMatrix::zeros(n, n);
    for a in 0..n {
        h[(a, a)] += sys.killing(a) * pot.curvature(u[a], delta);
        sys.for_each_upper(a, |b, w| {
            let c = 2.0 * w * pot.curvature(u[a] - u[b], delta);
            h[(a, b)] -= c;
            h[(b, a)] -= c;
            h[(a, a)] += c;
            h[(b, b)] += c;
        });
    }
    h
}

/// The matrix `M` with `E(u) = uᵀ M u` for `ψ(t) = t²`.
pub(crate) fn quadratic_matrix<S: PairEnergy>(sys: &S) -> DMatrix<f64> {
    let n = sys.len();
    let mut m = DMatrix::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = 2.0 * sys.degree(a);
        sys.for_each_upper(a, |b, w| {
            m[(a, b)] = -2.0 * w;
            m[(b, a)] = -2.0 * w;
        });
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::gagliardo;
    use crate::lattice::{LatticeDomain, NearField, Shape};
    use crate::FracParams;

    fn setup(p: f64) -> (LatticeDomain, KernelWeights) {
        let dom = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), 2, 0.25).unwrap();
        let params = FracParams::new(2, 0.4, p, p).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        (dom, k)
    }

    #[test]
    fn system_energy_matches_gagliardo() {
        for p in [1.0, 1.5, 2.0] {
            let (dom, k) = setup(p);
            let sys = NonlocalSystem::new(&k, dom.active_cells());
            let u: Vec<f64> = (0..sys.len()).map(|i| ((i * 7) % 5) as f64 - 1.5).collect();
            let e = energy(&sys, Potential::Power(p), &u);
            let reference = gagliardo(&sys.to_function(&u), &k).unwrap().value;
            assert!((e - reference).abs() < 1e-12 * reference, "p={p}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (dom, k) = setup(1.5);
        let sys = NonlocalSystem::new(&k, dom.active_cells());
        let u: Vec<f64> = (0..sys.len()).map(|i| (i as f64 * 0.37).sin()).collect();
        for pot in [Potential::Power(1.5), Potential::Smoothed(0.1)] {
            let mut g = vec![0.0; u.len()];
            energy_grad(&sys, pot, &u, &mut g);
            for a in [0, 5, 11] {
                let step = 1e-6;
                let mut up = u.clone();
                up[a] += step;
                let mut dn = u.clone();
                dn[a] -= step;
                let fd = (energy(&sys, pot, &up) - energy(&sys, pot, &dn)) / (2.0 * step);
                assert!((fd - g[a]).abs() < 1e-6 * (1.0 + g[a].abs()), "{pot:?} a={a} fd={fd} g={}", g[a]);
            }
        }
    }

    #[test]
    fn quadratic_form_reproduces_energy() {
        let (dom, k) = setup(2.0);
        let sys = NonlocalSystem::new(&k, dom.active_cells());
        let m = quadratic_matrix(&sys);
        let u = nalgebra::DVector::from_fn(sys.len(), |i, _| (i as f64).cos());
        let quad = u.dot(&(&m * &u));
        let e = energy(&sys, Potential::Power(2.0), u.as_slice());
        assert!((quad - e).abs() < 1e-12 * e);
        let h = hessian(&sys, Potential::Power(2.0), u.as_slice(), 0.0);
        assert!((h - 2.0 * m).abs().max() < 1e-9);
    }

    #[test]
    fn slices_enumerate_every_upper_partner_once() {
        let dom =
            LatticeDomain::from_shape(&Shape::Annulus { center: [0.0, 0.0], inner: 0.4, outer: 1.0 }, 2, 0.2).unwrap();
        let params = FracParams::new(2, 0.4, 2.0, 2.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        let sys = NonlocalSystem::new(&k, dom.active_cells());
        for a in 0..sys.len() {
            let mut seen = Vec::new();
            sys.for_each_upper(a, |b, w| {
                assert_eq!(w, k.weight(sys.cells()[a], sys.cells()[b]));
                seen.push(b);
            });
            let expected: Vec<usize> = (a + 1..sys.len()).collect();
            assert_eq!(seen, expected);
        }
    }

    #[test]
    fn local_energy_counts_every_edge() {
        // u = 1 on a 1D segment of n cells: two boundary edges of weight h^{1-p}
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 0.125).unwrap();
        let sys = LocalSystem::new(dom.grid(), dom.active_cells(), 2.0);
        let ones = vec![1.0; sys.len()];
        assert!((energy(&sys, Potential::Power(2.0), &ones) - 2.0 * 8.0).abs() < 1e-12);
        let ramp: Vec<f64> = (0..sys.len()).map(|i| i as f64).collect();
        // 7 interior unit jumps plus the end values 0 and 7 against the exterior
        let expected = 8.0 * (7.0 + 0.0 + 49.0);
        assert!((energy(&sys, Potential::Power(2.0), &ramp) - expected).abs() < 1e-9);
    }
}
