use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{Grid, Point};

/// Simple open sets used to build domains.  Cell membership is decided at
/// cell centers.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Interval {
        a: f64,
        b: f64,
    },
    Ball {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        inner: f64,
        outer: f64,
    },
    Rectangle {
        lo: Point,
        hi: Point,
    },
    /// `(-L, L)^{N-1} x (-w, w)`.
    Slab {
        half_length: f64,
        half_width: f64,
    },
    Union(Vec<Shape>),
    /// `base` without the listed cells (global lattice coordinates).
    Punctured {
        base: Box<Shape>,
        removed: Vec<[i64; 2]>,
    },
}

impl Shape {
    pub fn ball(center: Point, radius: f64) -> Self {
        Shape::Ball { center, radius }
    }

    pub fn contains(&self, x: Point, dim: usize, closed: bool) -> bool {
        let lt = |a: f64, b: f64| if closed { a <= b } else { a < b };
        match self {
            Shape::Interval { a, b } => lt(*a, x[0]) && lt(x[0], *b),
            Shape::Ball { center, radius } => lt(dist2(x, *center, dim), radius * radius),
            Shape::Annulus { center, inner, outer } => {
                let d = dist2(x, *center, dim);
                lt(inner * inner, d) && lt(d, outer * outer)
            }
            Shape::Rectangle { lo, hi } => (0..dim).all(|a| lt(lo[a], x[a]) && lt(x[a], hi[a])),
            Shape::Slab { half_length, half_width } => {
                let last = dim - 1;
                (0..dim).all(|a| {
                    let w = if a == last { *half_width } else { *half_length };
                    lt(x[a].abs(), w)
                })
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains(x, dim, closed)),
            Shape::Punctured { base, .. } => base.contains(x, dim, closed),
        }
    }

    pub(crate) fn contains_cell(&self, grid: &Grid, idx: usize, closed: bool) -> bool {
        match self {
            Shape::Punctured { base, removed } => {
                let g = grid.global(idx);
                base.contains_cell(grid, idx, closed) && !removed.contains(&g)
            }
            Shape::Union(parts) => parts.iter().any(|s| s.contains_cell(grid, idx, closed)),
            _ => self.contains(grid.center(idx), grid.dim(), closed),
        }
    }

    pub fn bounding_box(&self, dim: usize) -> (Point, Point) {
        match self {
            Shape::Interval { a, b } => ([*a, 0.0], [*b, 0.0]),
            Shape::Ball { center, radius } | Shape::Annulus { center, outer: radius, .. } => {
                ([center[0] - radius, center[1] - radius], [center[0] + radius, center[1] + radius])
            }
            Shape::Rectangle { lo, hi } => (*lo, *hi),
            Shape::Slab { half_length, half_width } => {
                if dim == 1 {
                    ([-half_width, 0.0], [*half_width, 0.0])
                } else {
                    ([-half_length, -half_width], [*half_length, *half_width])
                }
            }
            Shape::Union(parts) => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for s in parts {
                    let (l, h) = s.bounding_box(dim);
                    for a in 0..2 {
                        lo[a] = lo[a].min(l[a]);
                        hi[a] = hi[a].max(h[a]);
                    }
                }
                (lo, hi)
            }
            Shape::Punctured { base, .. } => base.bounding_box(dim),
        }
    }

    /// The shape dilated by `t` about the origin.
    pub fn scaled(&self, t: f64) -> Shape {
        let sp = |x: Point| [t * x[0], t * x[1]];
        match self {
            Shape::Interval { a, b } => Shape::Interval { a: t * a, b: t * b },
            Shape::Ball { center, radius } => Shape::Ball { center: sp(*center), radius: t * radius },
            Shape::Annulus { center, inner, outer } => {
                Shape::Annulus { center: sp(*center), inner: t * inner, outer: t * outer }
            }
            Shape::Rectangle { lo, hi } => Shape::Rectangle { lo: sp(*lo), hi: sp(*hi) },
            Shape::Slab { half_length, half_width } => {
                Shape::Slab { half_length: t * half_length, half_width: t * half_width }
            }
            Shape::Union(parts) => Shape::Union(parts.iter().map(|s| s.scaled(t)).collect()),
            Shape::Punctured { base, removed } => {
                Shape::Punctured { base: Box::new(base.scaled(t)), removed: removed.clone() }
            }
        }
    }
}

fn dist2(x: Point, c: Point, dim: usize) -> f64 {
    (0..dim).map(|a| (x[a] - c[a]) * (x[a] - c[a])).sum()
}
