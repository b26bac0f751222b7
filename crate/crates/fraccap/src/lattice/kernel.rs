//! Pair weights `w_ij ≈ ∫_{C_i}∫_{C_j} |x - y|^{-(N+sp)}` and exterior tails.
//!
//! On a uniform lattice the pair weight depends only on the offset between the
//! two cells, so the weights are stored as a table indexed by `(|dx|, |dy|)`.
//! Offsets beyond the near band use the midpoint rule.  Inside the band the
//! cell-pair integrals are computed semi-analytically: exactly when they are
//! finite (`NearField::CellPair`, needs `sp < 1`), or as `|z|^p`-moment
//! matched weights that keep the scheme consistent for `sp >= 1`
//! (`NearField::Moment`).

use core::f64::consts::FRAC_PI_4;

use super::{Grid, Point};
use crate::params::FracParams;
use crate::prelude::*;
use crate::quad::GaussRule;

/// How near-band pair weights are built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NearField {
    /// `CellPair` for `p = 1`, `Moment` otherwise.
    Auto,
    /// Exact cell-pair integrals of the kernel.
    CellPair,
    /// Cell-pair integrals of `|x - y|^p K(x - y)` divided by `|k h|^p`; the
    /// self-cell moment is moved to the face neighbours.
    Moment,
}

#[derive(Debug, Clone)]
pub struct KernelWeights {
    grid: Grid,
    params: FracParams,
    near_band: usize,
    near_field: NearField,
    table: Vec<f64>,
    row_box: Vec<f64>,
    tail: Vec<f64>,
}

impl KernelWeights {
    pub fn assemble(grid: &Grid, params: &FracParams, near_band: usize, near_field: NearField) -> Result<Self> {
        if grid.dim() != params.dim {
            return Err(Error::InvalidParams("grid and parameter dimensions differ".into()));
        }
        let near_field = match near_field {
            NearField::Auto if params.p == 1.0 => NearField::CellPair,
            NearField::Auto => NearField::Moment,
            other => other,
        };
        if near_field == NearField::CellPair && params.sp() >= 1.0 {
            return Err(Error::InvalidParams("exact cell-pair weights diverge for sp >= 1; use moment weights".into()));
        }
        let dim = grid.dim();
        let [n0, n1] = grid.shape();
        let alpha = params.kernel_exponent();
        let scale = grid.h().powf(2.0 * dim as f64 - alpha);
        let band = near_band as i64;

        let mut table = vec![0.0; n0 * n1];
        for dy in 0..n1 {
            for dx in 0..n0 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let k = [dx as i64, dy as i64];
                let cheb = k[0].max(k[1]);
                let w = if cheb <= band {
                    match near_field {
                        NearField::CellPair => near_integral(dim, k, -alpha)?,
                        _ => {
                            let len = ((k[0] * k[0] + k[1] * k[1]) as f64).sqrt();
                            near_integral(dim, k, params.p - alpha)? / len.powf(params.p)
                        }
                    }
                } else {
                    let len2 = (k[0] * k[0] + k[1] * k[1]) as f64;
                    len2.powf(-0.5 * alpha)
                };
                table[dx + dy * n0] = w;
            }
        }
        if near_field == NearField::Moment && band >= 1 {
            let self_moment = near_integral(dim, [0, 0], params.p - alpha)?;
            let share = self_moment / (2.0 * dim as f64);
            if n0 > 1 {
                table[1] += share;
            }
            if dim == 2 && n1 > 1 {
                table[n0] += share;
            }
        }
        for w in &mut table {
            *w *= scale;
        }

        let row_box = row_sums(&table, n0, n1);
        let tail = cell_tails(grid, params.sp())?.into_iter().map(|t| t * scale).collect();
        Ok(KernelWeights { grid: *grid, params: *params, near_band, near_field, table, row_box, tail })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    pub fn p(&self) -> f64 {
        self.params.p
    }

    pub fn near_band(&self) -> usize {
        self.near_band
    }

    pub fn near_field(&self) -> NearField {
        self.near_field
    }

    /// Weight for the cell offset `(|dx|, |dy|)`.
    pub fn offset_weight(&self, d: [usize; 2]) -> f64 {
        self.table[d[0] + d[1] * self.grid.shape()[0]]
    }

    /// `w_ij`; zero on the diagonal.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let n0 = self.grid.shape()[0];
        let (xi, yi) = (i % n0, i / n0);
        let (xj, yj) = (j % n0, j / n0);
        self.table[xi.abs_diff(xj) + yi.abs_diff(yj) * n0]
    }

    /// `Σ_{j ≠ i, j in box} w_ij`.
    pub fn row_box(&self, i: usize) -> f64 {
        self.row_box[i]
    }

    /// Cell tail `∫_{C_i} ∫_{R^N \ box} |x - y|^{-(N+sp)}`.
    pub fn tail(&self, i: usize) -> f64 {
        self.tail[i]
    }

    pub fn tails(&self) -> &[f64] {
        &self.tail
    }

    /// Total interaction of cell `i` with everything outside itself.
    pub fn row_total(&self, i: usize) -> f64 {
        self.row_box[i] + self.tail[i]
    }

    /// The quadrant weight table, indexed by `|dx| + |dy| * shape[0]`.
    pub fn table(&self) -> &[f64] {
        &self.table
    }
}

/// `∫ |z|^β Λ_k(z) dz` in lattice units, where `Λ_k(z) = Π_a (1 - |z_a - k_a|)_+`
/// is the overlap of the unit cell with the unit cell shifted by `k - z`.
/// For `β < 0` this is the cell-pair integral `∫_{C_0}∫_{C_k} |x - y|^β`.
pub fn near_integral(dim: usize, k: [i64; 2], beta: f64) -> Result<f64> {
    let k = [k[0].abs(), k[1].abs()];
    let touches_origin = k[0] <= 1 && (dim == 1 || k[1] <= 1);
    let is_self = k[0] == 0 && (dim == 1 || k[1] == 0);
    if is_self && beta <= -(dim as f64) {
        return Err(Error::InvalidParams("self-cell moment diverges".into()));
    }
    if touches_origin && beta <= -(dim as f64) - 1.0 {
        return Err(Error::InvalidParams("adjacent-cell integral diverges".into()));
    }
    if dim == 1 {
        let g = |t: i64| -> f64 {
            let t = t.abs() as f64;
            if t == 0.0 {
                0.0
            } else {
                t.powf(beta + 2.0) / ((beta + 1.0) * (beta + 2.0))
            }
        };
        return Ok(g(k[0] + 1) - 2.0 * g(k[0]) + g(k[0] - 1));
    }

    let rule = GaussRule::new(16);
    let radial = GaussRule::new(24);
    let mut total = 0.0;
    for a in [k[0] - 1, k[0]] {
        for b in [k[1] - 1, k[1]] {
            let corner = (a == 0 || a == -1) && (b == 0 || b == -1);
            if corner {
                // reflect onto [0,1]^2; each overlap factor is c + d t there
                let lin = |ka: i64| if ka == 0 { (1.0, -1.0) } else { (0.0, 1.0) };
                let (c0, d0) = lin(k[0]);
                let (c1, d1) = lin(k[1]);
                total +=
                    duffy_corner(&radial, beta, (c0, d0), (c1, d1))? + duffy_corner(&radial, beta, (c1, d1), (c0, d0))?;
            } else {
                let (a, b) = (a as f64, b as f64);
                let kx = k[0] as f64;
                let ky = k[1] as f64;
                for (x, wx) in rule.points(a, a + 1.0) {
                    let lx = 1.0 - (x - kx).abs();
                    for (y, wy) in rule.points(b, b + 1.0) {
                        let ly = 1.0 - (y - ky).abs();
                        total += wx * wy * (x * x + y * y).powf(0.5 * beta) * lx * ly;
                    }
                }
            }
        }
    }
    Ok(total)
}

/// `∫_T |t|^β (c0 + d0 t0)(c1 + d1 t1) dt` over `T = {0 <= t1 <= t0 <= 1}`,
/// with `t0 = u`, `t1 = u v` so the radial part integrates in closed form.
fn duffy_corner(rule: &GaussRule, beta: f64, (c0, d0): (f64, f64), (c1, d1): (f64, f64)) -> Result<f64> {
    let e0 = c0 * c1;
    let mut total = 0.0;
    for (v, wv) in rule.points(0.0, 1.0) {
        let e1 = c0 * d1 * v + d0 * c1;
        let e2 = d0 * d1 * v;
        let mut radial = 0.0;
        for (j, e) in [e0, e1, e2].into_iter().enumerate() {
            if e == 0.0 {
                continue;
            }
            let expo = beta + 2.0 + j as f64;
            if expo <= 0.0 {
                return Err(Error::InvalidParams("corner integral diverges".into()));
            }
            radial += e / expo;
        }
        total += wv * (1.0 + v * v).powf(0.5 * beta) * radial;
    }
    Ok(total)
}

/// Sums of the table over every in-box offset, one per cell, via 2-D prefix
/// sums of the quadrant table.
fn row_sums(table: &[f64], n0: usize, n1: usize) -> Vec<f64> {
    let mut pre = vec![0.0; n0 * n1];
    for y in 0..n1 {
        let mut run = 0.0;
        for x in 0..n0 {
            run += table[x + y * n0];
            pre[x + y * n0] = run + if y > 0 { pre[x + (y - 1) * n0] } else { 0.0 };
        }
    }
    let p = |x: usize, y: usize| pre[x + y * n0];
    let mut rows = vec![0.0; n0 * n1];
    for j in 0..n1 {
        for i in 0..n0 {
            let (xp, xm) = (n0 - 1 - i, i);
            let (yp, ym) = (n1 - 1 - j, j);
            let g = |x: usize| p(x, yp) + p(x, ym) - p(x, 0);
            rows[i + j * n0] = g(xp) + g(xm) - (p(0, yp) + p(0, ym) - p(0, 0));
        }
    }
    rows
}

/// `∫_{R^N \ box} |x - y|^{-(N+sp)} dy` for a node `x` strictly inside the box.
pub fn tail_weight(node: Point, lo: Point, hi: Point, dim: usize, sp: f64) -> Result<f64> {
    let d = [node[0] - lo[0], hi[0] - node[0], node[1] - lo[1], hi[1] - node[1]];
    if d[..2 * dim].iter().any(|&v| !(v > 0.0)) {
        return Err(Error::NodeOnBoundary);
    }
    if dim == 1 {
        return Ok((d[0].powf(-sp) + d[1].powf(-sp)) / sp);
    }
    Ok(tail_2d(&d, sp, &GaussRule::new(16)))
}

/// Exterior integral in the plane.  Along each direction the radial part is
/// `L(θ)^{-sp} / sp`, with `L` the distance to the box edge; the box edge seen
/// from the node splits the circle into four sectors, one per side.
fn tail_2d(d: &[f64; 4], sp: f64, rule: &GaussRule) -> f64 {
    let [left, right, down, up] = *d;
    let side = |dist: f64, a: f64, b: f64| {
        dist.powf(-sp)
            * (cos_power_integral((a / dist).atan(), sp, rule) + cos_power_integral((b / dist).atan(), sp, rule))
    };
    (side(right, down, up) + side(left, down, up) + side(up, left, right) + side(down, left, right)) / sp
}

/// `∫_0^θ cos^a φ dφ` for `0 <= θ < π/2`; near `π/2` the integral is taken in
/// `log(π/2 - φ)`, where the integrand is smooth.
fn cos_power_integral(theta: f64, a: f64, rule: &GaussRule) -> f64 {
    let first = rule.integrate(0.0, theta.min(FRAC_PI_4), |phi| phi.cos().powf(a));
    if theta <= FRAC_PI_4 {
        return first;
    }
    let lo = (core::f64::consts::FRAC_PI_2 - theta).ln();
    let hi = FRAC_PI_4.ln();
    first
        + rule.integrate(lo, hi, |v| {
            let psi = v.exp();
            psi.sin().powf(a) * psi
        })
}

/// Cell tails in lattice units (multiply by `h^{N - sp}` for physical values).
fn cell_tails(grid: &Grid, sp: f64) -> Result<Vec<f64>> {
    let [n0, n1] = grid.shape();
    let dim = grid.dim();
    let mut out = vec![0.0; grid.len()];
    if dim == 1 {
        for (i, t) in out.iter_mut().enumerate() {
            *t = interval_cell_tail(i as f64, (n0 - 1 - i) as f64, sp);
        }
        return Ok(out);
    }
    let rule = GaussRule::new(16);
    let cell_rule = GaussRule::new(2);
    let pts: Vec<(f64, f64)> = cell_rule.points(0.0, 1.0).collect();
    let lo = [0.0, 0.0];
    let hi = [n0 as f64, n1 as f64];
    // tails are symmetric under the box reflections
    let hx = n0.div_ceil(2);
    let hy = n1.div_ceil(2);
    for j in 0..hy {
        for i in 0..hx {
            let near_edge = i.min(j) < 4;
            let value = if near_edge {
                let mut acc = 0.0;
                for &(x, wx) in &pts {
                    for &(y, wy) in &pts {
                        let node = [i as f64 + x, j as f64 + y];
                        let d = [node[0] - lo[0], hi[0] - node[0], node[1] - lo[1], hi[1] - node[1]];
                        acc += wx * wy * tail_2d(&d, sp, &rule);
                    }
                }
                acc
            } else {
                let node = [i as f64 + 0.5, j as f64 + 0.5];
                let d = [node[0], hi[0] - node[0], node[1], hi[1] - node[1]];
                tail_2d(&d, sp, &rule)
            };
            for (x, y) in [(i, j), (n0 - 1 - i, j), (i, n1 - 1 - j), (n0 - 1 - i, n1 - 1 - j)] {
                out[x + y * n0] = value;
            }
        }
    }
    Ok(out)
}

/// Exact cell average of the 1-D exterior integral for a unit cell with `left`
/// and `right` whole cells between it and the box edges.
fn interval_cell_tail(left: f64, right: f64, sp: f64) -> f64 {
    let side = |gap: f64| {
        if gap == 0.0 {
            // the cell touches the edge; fall back to its center
            return 0.5f64.powf(-sp) / sp;
        }
        let (a, b) = (gap, gap + 1.0);
        if (sp - 1.0).abs() < 1e-14 {
            (b / a).ln() / sp
        } else {
            (b.powf(1.0 - sp) - a.powf(1.0 - sp)) / ((1.0 - sp) * sp)
        }
    };
    side(left) + side(right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeDomain, Shape};

    fn params(dim: usize, s: f64, p: f64) -> FracParams {
        FracParams::supercritical(dim, s, p, p).unwrap()
    }

    // Independent oracle: closed-form 1-D double integral of |x - y|^{-a}
    // over [x0, x1] x [y0, y1] with x1 <= y0, via F'' = |t|^{-a}.
    fn pair_oracle_1d(x0: f64, x1: f64, y0: f64, y1: f64, a: f64) -> f64 {
        let f = |t: f64| if t == 0.0 { 0.0 } else { t.powf(2.0 - a) / ((1.0 - a) * (2.0 - a)) };
        f(y1 - x0) - f(y0 - x0) - f(y1 - x1) + f(y0 - x1)
    }

    #[test]
    fn adjacent_unit_cells_match_closed_form() {
        // ∫_0^1 ∫_1^2 |x - y|^{-1.5} = 4 (2 - √2)
        let got = near_integral(1, [1, 0], -1.5).unwrap();
        let oracle = pair_oracle_1d(0.0, 1.0, 1.0, 2.0, 1.5);
        assert!((oracle - 4.0 * (2.0 - 2f64.sqrt())).abs() < 1e-12);
        assert!((got - oracle).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_near_offsets_match_closed_form() {
        for a in [1.1, 1.5, 1.9] {
            for k in 1..4 {
                let got = near_integral(1, [k, 0], -a).unwrap();
                let kf = k as f64;
                let oracle = pair_oracle_1d(0.0, 1.0, kf, kf + 1.0, a);
                assert!((got - oracle).abs() < 1e-11 * oracle, "a={a} k={k}");
            }
        }
    }

    // Brute-force oracle for planar cell pairs: tensor midpoint rule on a fine
    // subgrid of both cells, valid for separated cells.
    fn pair_oracle_2d(k: [f64; 2], a: f64, m: usize) -> f64 {
        let step = 1.0 / m as f64;
        let mut acc = 0.0;
        for i0 in 0..m {
            for j0 in 0..m {
                let x = [(i0 as f64 + 0.5) * step, (j0 as f64 + 0.5) * step];
                for i1 in 0..m {
                    for j1 in 0..m {
                        let y = [k[0] + (i1 as f64 + 0.5) * step, k[1] + (j1 as f64 + 0.5) * step];
                        let r2 = (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
                        acc += r2.powf(-0.5 * a);
                    }
                }
            }
        }
        acc * step.powi(4)
    }

    #[test]
    fn planar_separated_offsets_match_brute_force() {
        for k in [[2i64, 0], [2, 1], [2, 2]] {
            let got = near_integral(2, k, -2.5).unwrap();
            // midpoint error is O(m^-2): extrapolate two resolutions
            let kf = [k[0] as f64, k[1] as f64];
            let oracle = (4.0 * pair_oracle_2d(kf, 2.5, 32) - pair_oracle_2d(kf, 2.5, 16)) / 3.0;
            assert!((got - oracle).abs() < 2e-6 * oracle, "k={k:?} got={got} oracle={oracle}");
        }
    }

    #[test]
    fn planar_adjacent_offsets_converge_under_refinement() {
        // the adjacent integral is finite for exponents below 3; compare the
        // semi-analytic value with a Richardson-free check: splitting each cell
        // into four and summing sub-pair integrals (scaled) must agree.
        let a = 2.5;
        for k in [[1i64, 0], [1, 1]] {
            let whole = near_integral(2, k, -a).unwrap();
            // each unit cell = 4 half cells; sub-pair integral scales by (1/2)^{4-a}
            let mut parts = 0.0;
            for i0 in 0..2i64 {
                for j0 in 0..2i64 {
                    for i1 in 0..2i64 {
                        for j1 in 0..2i64 {
                            let off = [2 * k[0] + i1 - i0, 2 * k[1] + j1 - j0];
                            parts += near_integral(2, off, -a).unwrap_or_else(|_| {
                                // sub-offsets beyond the band still need the exact value
                                panic!("diverging sub-offset {off:?}")
                            });
                        }
                    }
                }
            }
            let parts = parts * 0.5f64.powf(4.0 - a);
            assert!((whole - parts).abs() < 1e-9 * whole, "k={k:?} whole={whole} parts={parts}");
        }
    }

    #[test]
    fn distant_cells_use_midpoint_rule() {
        // N = 1, h = 1, sp = 1, centers 10 apart: w = 10^{-2}
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 12.0 }, 1, 1.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params(1, 0.5, 2.0), 2, NearField::Auto).unwrap();
        let g = dom.grid();
        let i = g.index_of_global([0, 0]).unwrap();
        let j = g.index_of_global([10, 0]).unwrap();
        assert!((k.weight(i, j) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn tail_of_centered_node_is_closed_form() {
        // ρ = 2 on both sides, sp = 1: 2 * (1/1) * 2^{-1} = 1
        let t = tail_weight([0.0, 0.0], [-2.0, 0.0], [2.0, 0.0], 1, 1.0).unwrap();
        assert!((t - 1.0).abs() < 1e-15);
        assert_eq!(tail_weight([2.0, 0.0], [-2.0, 0.0], [2.0, 0.0], 1, 1.0), Err(Error::NodeOnBoundary));
    }

    // Ray-casting oracle for the planar tail: ∫ L(θ)^{-sp}/sp dθ on a uniform
    // angular grid, L from ray/box intersection.
    fn tail_oracle_2d(x: Point, lo: Point, hi: Point, sp: f64, m: usize) -> f64 {
        let mut acc = 0.0;
        for i in 0..m {
            let th = (i as f64 + 0.5) * core::f64::consts::TAU / m as f64;
            let (c, s) = (th.cos(), th.sin());
            let tx = if c > 0.0 { (hi[0] - x[0]) / c } else { (lo[0] - x[0]) / c };
            let ty = if s > 0.0 { (hi[1] - x[1]) / s } else { (lo[1] - x[1]) / s };
            acc += tx.min(ty).powf(-sp) / sp;
        }
        acc * core::f64::consts::TAU / m as f64
    }

    #[test]
    fn planar_tail_matches_ray_casting() {
        for (x, sp) in [([0.3, 0.2], 0.5), ([1.7, 0.1], 1.0), ([0.05, 0.9], 1.6)] {
            let got = tail_weight(x, [0.0, 0.0], [2.0, 1.0], 2, sp).unwrap();
            let oracle = tail_oracle_2d(x, [0.0, 0.0], [2.0, 1.0], sp, 400_000);
            assert!((got - oracle).abs() < 1e-6 * oracle, "x={x:?} got={got} oracle={oracle}");
        }
    }

    #[test]
    fn tail_never_exceeds_inscribed_ball_bound() {
        // the box contains the inscribed ball, so the exterior of the box is
        // smaller than the exterior of the ball: τ <= N ω_N ρ^{-sp} / sp
        for x in [[0.5, 0.5], [0.1, 0.8], [1.9, 0.3]] {
            let sp = 0.7;
            let rho = x[0].min(2.0 - x[0]).min(x[1]).min(1.0 - x[1]);
            let t = tail_weight(x, [0.0, 0.0], [2.0, 1.0], 2, sp).unwrap();
            assert!(t <= 2.0 * core::f64::consts::PI * rho.powf(-sp) / sp);
        }
    }

    #[test]
    fn row_sums_match_direct_sums() {
        let dom = LatticeDomain::from_shape(&Shape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 0.75] }, 2, 0.125).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params(2, 0.4, 2.0), 2, NearField::Auto).unwrap();
        let n = dom.grid().len();
        for i in [0, 7, n / 2, n - 1] {
            let direct: f64 = (0..n).filter(|&j| j != i).map(|j| k.weight(i, j)).sum();
            assert!((direct - k.row_box(i)).abs() < 1e-12 * direct);
        }
    }

    #[test]
    fn weights_are_symmetric_positive_and_scale_exactly() {
        let shape = Shape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 0.5] };
        let p = params(2, 0.6, 1.5);
        let a = LatticeDomain::from_shape(&shape, 2, 0.125).unwrap();
        let b = LatticeDomain::from_shape(&shape.scaled(2.0), 2, 0.25).unwrap();
        let ka = KernelWeights::assemble(a.grid(), &p, 2, NearField::Auto).unwrap();
        let kb = KernelWeights::assemble(b.grid(), &p, 2, NearField::Auto).unwrap();
        let factor = 2f64.powf(2.0 - p.sp());
        let n = a.grid().len();
        for i in 0..n {
            assert!((kb.tail(i) - factor * ka.tail(i)).abs() < 1e-12 * kb.tail(i));
            for j in 0..n {
                assert_eq!(ka.weight(i, j), ka.weight(j, i));
                if i != j {
                    assert!(ka.weight(i, j) > 0.0);
                    assert!((kb.weight(i, j) - factor * ka.weight(i, j)).abs() < 1e-12 * kb.weight(i, j));
                }
            }
        }
    }

    #[test]
    fn cell_pair_weights_reject_sp_at_least_one() {
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: 0.0, b: 1.0 }, 1, 0.25).unwrap();
        let r = KernelWeights::assemble(dom.grid(), &params(1, 0.5, 2.0), 2, NearField::CellPair);
        assert!(r.is_err());
    }

    #[test]
    fn moment_weights_reproduce_second_moment() {
        // for p = 2 the near weights plus the redistributed self moment carry
        // the exact second moment of the kernel over the near band
        let s = 0.8;
        let alpha = 1.0 + 2.0 * s;
        let band = 2i64;
        let mut discrete = 0.0;
        let mut exact = near_integral(1, [0, 0], 2.0 - alpha).unwrap();
        for k in 1..=band {
            let w = near_integral(1, [k, 0], 2.0 - alpha).unwrap() / (k * k) as f64;
            discrete += 2.0 * w * (k * k) as f64;
            exact += 2.0 * near_integral(1, [k, 0], 2.0 - alpha).unwrap();
        }
        discrete += near_integral(1, [0, 0], 2.0 - alpha).unwrap();
        assert!((discrete - exact).abs() < 1e-12 * exact);
    }
}
