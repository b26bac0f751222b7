//! Uniform cell lattices, lattice sets and domains built from simple shapes.
//!
//! Cell `g` (a global integer coordinate) covers `[g h, (g + 1) h)` on each
//! axis, so lattices with the same spacing always line up.  Points are
//! `[f64; 2]`; the second coordinate is ignored in one dimension.

mod kernel;
mod mask;
mod shape;

pub use kernel::{near_integral, tail_weight, KernelWeights, NearField};
pub use mask::{parse_fracmask, MASK_PADDING};
pub use shape::Shape;

use crate::prelude::*;

pub type Point = [f64; 2];

/// A box of cells: global offset `lo`, extents `shape`, spacing `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    h: f64,
    lo: [i64; 2],
    shape: [usize; 2],
}

impl Grid {
    pub fn new(dim: usize, h: f64, lo: [i64; 2], shape: [usize; 2]) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParams(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParams(format!("spacing h = {h} must be positive")));
        }
        let shape = if dim == 1 { [shape[0], 1] } else { shape };
        let lo = if dim == 1 { [lo[0], 0] } else { lo };
        if shape[0] == 0 || shape[1] == 0 {
            return Err(Error::EmptyDomain);
        }
        Ok(Grid { dim, h, lo, shape })
    }

    /// Smallest grid containing `[lo, hi]` plus `pad` extra layers per side.
    pub fn covering(dim: usize, h: f64, lo: Point, hi: Point, pad: usize) -> Result<Self> {
        let mut glo = [0i64; 2];
        let mut n = [1usize; 2];
        for a in 0..dim {
            let first = (lo[a] / h).floor() as i64 - pad as i64;
            let last = (hi[a] / h).ceil() as i64 + pad as i64;
            glo[a] = first;
            n[a] = (last - first).max(1) as usize;
        }
        Grid::new(dim, h, glo, n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> [i64; 2] {
        self.lo
    }

    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Volume of one cell, `h^N`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn local(&self, idx: usize) -> [usize; 2] {
        [idx % self.shape[0], idx / self.shape[0]]
    }

    pub fn global(&self, idx: usize) -> [i64; 2] {
        let l = self.local(idx);
        [self.lo[0] + l[0] as i64, self.lo[1] + l[1] as i64]
    }

    pub fn index_of_local(&self, l: [i64; 2]) -> Option<usize> {
        if l[0] < 0 || l[1] < 0 || l[0] >= self.shape[0] as i64 || l[1] >= self.shape[1] as i64 {
            return None;
        }
        Some(l[0] as usize + l[1] as usize * self.shape[0])
    }

    pub fn index_of_global(&self, g: [i64; 2]) -> Option<usize> {
        self.index_of_local([g[0] - self.lo[0], g[1] - self.lo[1]])
    }

    pub fn center(&self, idx: usize) -> Point {
        let g = self.global(idx);
        let y = if self.dim == 2 { (g[1] as f64 + 0.5) * self.h } else { 0.0 };
        [(g[0] as f64 + 0.5) * self.h, y]
    }

    pub fn cell_of_point(&self, x: Point) -> [i64; 2] {
        let y = if self.dim == 2 { (x[1] / self.h).floor() as i64 } else { 0 };
        [(x[0] / self.h).floor() as i64, y]
    }

    pub fn box_lo(&self) -> Point {
        [self.lo[0] as f64 * self.h, self.lo[1] as f64 * self.h]
    }

    pub fn box_hi(&self) -> Point {
        [(self.lo[0] + self.shape[0] as i64) as f64 * self.h, (self.lo[1] + self.shape[1] as i64) as f64 * self.h]
    }

    /// Cells whose Chebyshev distance to `idx` is exactly one (inside the box).
    pub fn neighbours(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let l = self.local(idx);
        let ry: i64 = if self.dim == 2 { 1 } else { 0 };
        (-ry..=ry).flat_map(move |dy| {
            (-1i64..=1).filter_map(move |dx| {
                if dx == 0 && dy == 0 {
                    return None;
                }
                Some(self.index_of_local([l[0] as i64 + dx, l[1] as i64 + dy]))
            })
        })
    }

    /// Face neighbours; `None` marks a neighbour outside the box.
    pub fn face_neighbours(&self, idx: usize) -> impl Iterator<Item = Option<usize>> + '_ {
        let l = self.local(idx);
        let offsets: &[[i64; 2]] = if self.dim == 2 { &[[-1, 0], [1, 0], [0, -1], [0, 1]] } else { &[[-1, 0], [1, 0]] };
        offsets.iter().map(move |o| self.index_of_local([l[0] as i64 + o[0], l[1] as i64 + o[1]]))
    }

    fn same_lattice(&self, other: &Grid) -> bool {
        self == other
    }
}

/// A set of cells of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSet {
    grid: Grid,
    mask: Vec<bool>,
}

impl LatticeSet {
    pub fn empty(grid: Grid) -> Self {
        LatticeSet { mask: vec![false; grid.len()], grid }
    }

    pub fn from_mask(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::InvalidParams(format!(
                "mask has {} entries for a grid of {} cells",
                mask.len(),
                grid.len()
            )));
        }
        Ok(LatticeSet { grid, mask })
    }

    /// Cells whose centers lie in `shape` (its closure when `closed`).
    pub fn from_shape(grid: Grid, shape: &Shape, closed: bool) -> Self {
        let mask = (0..grid.len()).map(|i| shape.contains_cell(&grid, i, closed)).collect();
        LatticeSet { grid, mask }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn insert(&mut self, idx: usize) {
        self.mask[idx] = true;
    }

    pub fn remove(&mut self, idx: usize) {
        self.mask[idx] = false;
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.grid.cell_measure()
    }

    pub fn cells(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn is_subset_of(&self, other: &LatticeSet) -> bool {
        self.grid.same_lattice(&other.grid) && self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }

    pub fn intersection(&self, other: &LatticeSet) -> Result<LatticeSet> {
        self.check_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| a && b).collect();
        Ok(LatticeSet { grid: self.grid, mask })
    }

    pub fn difference(&self, other: &LatticeSet) -> Result<LatticeSet> {
        self.check_grid(other)?;
        let mask = self.mask.iter().zip(&other.mask).map(|(&a, &b)| a && !b).collect();
        Ok(LatticeSet { grid: self.grid, mask })
    }

    pub fn check_grid(&self, other: &LatticeSet) -> Result<()> {
        if self.grid.same_lattice(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Number of distinct coordinates spanned along `axis`.
    pub fn extent(&self, axis: usize) -> usize {
        let mut lo = usize::MAX;
        let mut hi = 0usize;
        for i in self.cells() {
            let l = self.grid.local(i)[axis];
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if lo == usize::MAX {
            0
        } else {
            hi - lo + 1
        }
    }

    /// True when some member cell touches (face or corner) a non-member of `env`
    /// or the edge of the box.
    pub fn touches_outside_of(&self, env: &LatticeSet) -> bool {
        self.cells().into_iter().any(|i| self.grid.neighbours(i).any(|n| n.is_none_or(|j| !env.contains(j))))
    }
}

/// An open set discretized on a lattice: the active cells plus at least one
/// inactive padding layer inside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDomain {
    set: LatticeSet,
}

/// Default number of inactive padding layers.
pub const DEFAULT_PADDING: usize = 2;

impl LatticeDomain {
    pub fn from_set(set: LatticeSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let grid = set.grid;
        for a in 0..grid.dim {
            let e = set.extent(a);
            if e < 3 {
                return Err(Error::TooCoarse(format!("{e} active cells along axis {a}; need at least 3")));
            }
        }
        for i in set.cells() {
            let l = grid.local(i);
            for a in 0..grid.dim {
                if l[a] == 0 || l[a] + 1 == grid.shape[a] {
                    return Err(Error::InvalidParams("active cell on the edge of the lattice box".into()));
                }
            }
        }
        Ok(LatticeDomain { set })
    }

    pub fn from_shape(shape: &Shape, dim: usize, h: f64) -> Result<Self> {
        Self::from_shape_padded(shape, dim, h, DEFAULT_PADDING)
    }

    pub fn from_shape_padded(shape: &Shape, dim: usize, h: f64, pad: usize) -> Result<Self> {
        let (lo, hi) = shape.bounding_box(dim);
        let grid = Grid::covering(dim, h, lo, hi, pad.max(1))?;
        Self::from_set(LatticeSet::from_shape(grid, shape, false))
    }

    /// Domain from a 0/1 cell mask with the mask's cell `(0, 0)` at the origin.
    pub fn from_cell_mask(dim: usize, h: f64, size: [usize; 2], bits: &[bool], pad: usize) -> Result<Self> {
        let size = if dim == 1 { [size[0], 1] } else { size };
        if bits.len() != size[0] * size[1] {
            return Err(Error::InvalidParams(format!("mask has {} cells, expected {}", bits.len(), size[0] * size[1])));
        }
        let pad = pad.max(1);
        let lo = [-(pad as i64), if dim == 2 { -(pad as i64) } else { 0 }];
        let shape = [size[0] + 2 * pad, if dim == 2 { size[1] + 2 * pad } else { 1 }];
        let grid = Grid::new(dim, h, lo, shape)?;
        let mut set = LatticeSet::empty(grid);
        for j in 0..size[1] {
            for i in 0..size[0] {
                if bits[i + j * size[0]] {
                    let idx = grid.index_of_global([i as i64, j as i64]).expect("inside padded grid");
                    set.insert(idx);
                }
            }
        }
        Self::from_set(set)
    }

    pub fn grid(&self) -> &Grid {
        &self.set.grid
    }

    pub fn dim(&self) -> usize {
        self.set.grid.dim
    }

    pub fn h(&self) -> f64 {
        self.set.grid.h
    }

    pub fn set(&self) -> &LatticeSet {
        &self.set
    }

    pub fn into_set(self) -> LatticeSet {
        self.set
    }

    pub fn active_cells(&self) -> Vec<usize> {
        self.set.cells()
    }

    pub fn count(&self) -> usize {
        self.set.count()
    }

    pub fn measure(&self) -> f64 {
        self.set.measure()
    }

    pub fn is_active(&self, idx: usize) -> bool {
        self.set.contains(idx)
    }

    /// Membership of an arbitrary point, resolved at cell granularity.
    pub fn contains_point(&self, x: Point) -> bool {
        let g = self.set.grid.cell_of_point(x);
        self.set.grid.index_of_global(g).is_some_and(|i| self.set.contains(i))
    }

    /// Cells of this grid selected by `shape`.
    pub fn select(&self, shape: &Shape, closed: bool) -> LatticeSet {
        LatticeSet::from_shape(self.set.grid, shape, closed)
    }

    /// The same domain with extra inactive padding.
    pub fn repadded(&self, pad: usize) -> Result<Self> {
        let g = self.set.grid;
        let cells = self.active_cells();
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for &i in &cells {
            let c = g.global(i);
            for a in 0..2 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
        let pad = pad.max(1) as i64;
        let mut nlo = [0i64; 2];
        let mut n = [1usize; 2];
        for a in 0..g.dim {
            nlo[a] = lo[a] - pad;
            n[a] = (hi[a] - lo[a] + 1 + 2 * pad) as usize;
        }
        let grid = Grid::new(g.dim, g.h, nlo, n)?;
        let mut set = LatticeSet::empty(grid);
        for &i in &cells {
            set.insert(grid.index_of_global(g.global(i)).expect("inside repadded grid"));
        }
        Self::from_set(set)
    }
}

/// Values on every cell of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl LatticeFunction {
    pub fn zeros(grid: Grid) -> Self {
        LatticeFunction { values: vec![0.0; grid.len()], grid }
    }

    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParams(format!("{} values for a grid of {} cells", values.len(), grid.len())));
        }
        Ok(LatticeFunction { grid, values })
    }

    pub fn indicator(set: &LatticeSet) -> Self {
        let values = set.mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        LatticeFunction { grid: set.grid, values }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(Point) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.center(i))).collect();
        LatticeFunction { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cells where the value is nonzero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.values.len()).filter(|&i| self.values[i] != 0.0).collect()
    }

    /// Zero outside `set`.
    pub fn restricted_to(&self, set: &LatticeSet) -> Result<Self> {
        if set.grid != self.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&set.mask).map(|(&v, &m)| if m { v } else { 0.0 }).collect();
        Ok(LatticeFunction { grid: self.grid, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        LatticeFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_cells_sit_on_the_lattice() {
        let d = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 0.25).unwrap();
        let centers: Vec<f64> = d.active_cells().iter().map(|&i| d.grid().center(i)[0]).collect();
        assert_eq!(centers, [0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn unit_disk_at_half_spacing_has_twelve_cells() {
        let d = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), 2, 0.5).unwrap();
        assert_eq!(d.count(), 12);
    }

    #[test]
    fn punctured_interval_drops_one_cell() {
        let shape = Shape::Punctured {
            base: alloc::boxed::Box::new(Shape::Interval { a: 0.0, b: 1.0 }),
            removed: vec![[2, 0]],
        };
        let d = LatticeDomain::from_shape(&shape, 1, 0.25).unwrap();
        assert_eq!(d.count(), 3);
        assert!(!d.contains_point([0.6, 0.0]));
        assert!(d.contains_point([0.3, 0.0]));
    }

    #[test]
    fn coarse_or_empty_shapes_are_rejected() {
        let tiny = Shape::Interval { a: 0.0, b: 0.5 };
        assert!(matches!(LatticeDomain::from_shape(&tiny, 1, 0.25), Err(Error::TooCoarse(_))));
        let empty = Shape::Interval { a: 0.15, b: 0.2 };
        assert_eq!(LatticeDomain::from_shape(&empty, 1, 0.25), Err(Error::EmptyDomain));
    }

    #[test]
    fn cell_mask_round_trips_membership() {
        let bits = [true, true, true, false, true, true, true, true, true];
        let d = LatticeDomain::from_cell_mask(2, 0.5, [3, 3], &bits, 1).unwrap();
        assert_eq!(d.count(), 8);
        assert!(d.contains_point([0.1, 0.1]));
        assert!(!d.contains_point([0.1, 0.6]));
    }

    #[test]
    fn repadding_keeps_active_cells() {
        let d = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 0.125).unwrap();
        let e = d.repadded(5).unwrap();
        assert_eq!(e.count(), d.count());
        assert_eq!(e.grid().shape()[0], 8 + 10);
    }
}
