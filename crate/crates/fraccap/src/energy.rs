//! Discrete Gagliardo energies, strip seminorms, perimeters and Lebesgue norms.
//!
//! A lattice function is piecewise constant on cells and vanishes outside the
//! lattice box; everything beyond the box enters through the exterior tails.

use crate::lattice::{KernelWeights, LatticeFunction, LatticeSet, Point};
use crate::prelude::*;
use crate::quad::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyValue {
    /// `interior + tail`.
    pub value: f64,
    /// Pairs of cells inside the box.
    pub interior: f64,
    /// Interaction with the exterior of the box.
    pub tail: f64,
}

#[inline]
pub(crate) fn pow_abs(t: f64, p: f64) -> f64 {
    if p == 1.0 {
        t.abs()
    } else if p == 2.0 {
        t * t
    } else {
        t.abs().powf(p)
    }
}

fn check_grid(u: &LatticeFunction, kernel: &KernelWeights) -> Result<()> {
    if u.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `Σ_{i≠j} w_ij |u_i - u_j|^p + 2 Σ_i τ_i |u_i|^p` with `p` taken from the
/// kernel.  Cost is quadratic in the support of `u`.
pub fn gagliardo(u: &LatticeFunction, kernel: &KernelWeights) -> Result<EnergyValue> {
    check_grid(u, kernel)?;
    let p = kernel.p();
    let vals = u.values();
    let support = u.support();
    let mut pair_rows = Vec::with_capacity(support.len());
    let mut out_rows = Vec::with_capacity(support.len());
    let mut tail_rows = Vec::with_capacity(support.len());
    for &a in &support {
        let ua = vals[a];
        let mut pairs = 0.0;
        let mut inside = 0.0;
        for &b in &support {
            if a != b {
                let w = kernel.weight(a, b);
                pairs += w * pow_abs(ua - vals[b], p);
                inside += w;
            }
        }
        let ua_p = pow_abs(ua, p);
        pair_rows.push(pairs);
        out_rows.push(ua_p * (kernel.row_box(a) - inside));
        tail_rows.push(ua_p * kernel.tail(a));
    }
    let interior = pairwise_sum(&pair_rows) + 2.0 * pairwise_sum(&out_rows);
    let tail = 2.0 * pairwise_sum(&tail_rows);
    Ok(EnergyValue { value: interior + tail, interior, tail })
}

/// Cells of the kernel's grid whose centers lie in the open ball.
pub fn ball_cells(kernel: &KernelWeights, center: Point, radius: f64) -> Result<Vec<usize>> {
    let g = kernel.grid();
    let (lo, hi) = (g.box_lo(), g.box_hi());
    for a in 0..g.dim() {
        if center[a] - radius < lo[a] || center[a] + radius > hi[a] {
            return Err(Error::BallOutsideBox);
        }
    }
    let r2 = radius * radius;
    Ok((0..g.len())
        .filter(|&i| {
            let c = g.center(i);
            (0..g.dim()).map(|a| (c[a] - center[a]).powi(2)).sum::<f64>() < r2
        })
        .collect())
}

/// Asymmetric strip seminorm: ordered pairs `(x, y)` with `x` in the ball and
/// `y` anywhere, each counted once.
pub fn strip_seminorm(u: &LatticeFunction, kernel: &KernelWeights, center: Point, radius: f64) -> Result<f64> {
    check_grid(u, kernel)?;
    let p = kernel.p();
    let vals = u.values();
    let support = u.support();
    let ball = ball_cells(kernel, center, radius)?;
    let rows: Vec<f64> = ball
        .iter()
        .map(|&a| {
            let ua = vals[a];
            let mut pairs = 0.0;
            let mut inside = 0.0;
            for &b in &support {
                if a != b {
                    let w = kernel.weight(a, b);
                    pairs += w * pow_abs(ua - vals[b], p);
                    inside += w;
                }
            }
            if ua != 0.0 {
                pairs += pow_abs(ua, p) * (kernel.row_total(a) - inside);
            }
            pairs
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// `P_s(A) = 2 Σ_{i∈A, j∉A} w_ij + 2 Σ_{i∈A} τ_i` for a kernel built with `p = 1`.
pub fn frac_perimeter(set: &LatticeSet, kernel: &KernelWeights) -> Result<f64> {
    if set.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    if kernel.p() != 1.0 {
        return Err(Error::InvalidParams("perimeter needs a kernel built with p = 1".into()));
    }
    let cells = set.cells();
    let rows: Vec<f64> = cells
        .iter()
        .map(|&a| {
            let inside: f64 = cells.iter().filter(|&&b| b != a).map(|&b| kernel.weight(a, b)).sum();
            kernel.row_total(a) - inside
        })
        .collect();
    Ok(2.0 * pairwise_sum(&rows))
}

/// `(Σ_{i ∈ region} h^N |u_i|^q)^{1/q}`.
pub fn lq_norm(u: &LatticeFunction, region: &LatticeSet, q: f64) -> Result<f64> {
    if u.grid() != region.grid() {
        return Err(Error::GridMismatch);
    }
    let cells = region.cells();
    if cells.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let terms: Vec<f64> = cells.iter().map(|&i| pow_abs(u.values()[i], q)).collect();
    Ok((u.grid().cell_measure() * pairwise_sum(&terms)).powf(1.0 / q))
}

/// Mean value of `u` over the cells of `region`.
pub fn average(u: &LatticeFunction, region: &LatticeSet) -> Result<f64> {
    if u.grid() != region.grid() {
        return Err(Error::GridMismatch);
    }
    let terms: Vec<f64> = region.cells().iter().map(|&i| u.values()[i]).collect();
    if terms.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(pairwise_sum(&terms) / terms.len() as f64)
}
