//! The torsion function of `B_r` in `B_R`: the minimiser of
//! `(1/p) E(u) - ∫_{B_r} u` over `u` vanishing off `B_R`.

use super::descent::{cg_quadratic, direct_quadratic, fista, newton, Objective};
use super::system::{NonlocalSystem, PairEnergy, Potential};
use super::{MinimizeResult, SolverConfig};
use crate::lattice::{KernelWeights, LatticeDomain, Shape};
use crate::params::FracParams;
use crate::prelude::*;

/// The lattice ball `B_R` used by [`torsion`].
pub fn torsion_domain(big_r: f64, dim: usize, h: f64) -> Result<LatticeDomain> {
    LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], big_r), dim, h)
}

pub fn torsion(r: f64, big_r: f64, params: &FracParams, h: f64, cfg: &SolverConfig) -> Result<MinimizeResult> {
    params.validate()?;
    if !(r > 0.0 && r <= big_r) {
        return Err(Error::InvalidParams(format!("need 0 < r <= R, got r = {r}, R = {big_r}")));
    }
    let p = params.p;
    if p <= 1.0 {
        return Err(Error::InvalidParams("torsion needs p > 1".into()));
    }
    let dom = torsion_domain(big_r, params.dim, h)?;
    let kernel = KernelWeights::assemble(dom.grid(), params, cfg.near_band, cfg.near_field)?;
    let inner = dom.select(&Shape::ball([0.0, 0.0], r), false);
    if inner.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let sys = NonlocalSystem::new(&kernel, dom.active_cells());
    let n = sys.len();
    let cell = dom.grid().cell_measure();
    let linear: Vec<f64> = sys.cells().iter().map(|&c| if inner.contains(c) { cell } else { 0.0 }).collect();
    let free = vec![true; n];
    let zero = vec![0.0; n];
    let quad_obj = Objective { scale: 0.5, linear: &linear, free: &free };
    let quadratic = || {
        if n <= cfg.dense_limit {
            direct_quadratic(&sys, &quad_obj, &zero)
        } else {
            Ok(cg_quadratic(&sys, &quad_obj, &zero, cfg.tol, cfg.max_iter))
        }
    };
    let mut out = if p == 2.0 {
        quadratic()?
    } else {
        let obj = Objective { scale: 1.0 / p, linear: &linear, free: &free };
        if n <= cfg.dense_limit {
            let start = quadratic()?;
            let mut out = newton(&sys, Potential::Power(p), &obj, &start.u, cfg.tol, cfg.newton_max_iter)?;
            out.iterations += start.iterations;
            out
        } else {
            fista(&sys, Potential::Power(p), &obj, &zero, (0.0, f64::INFINITY), cfg.tol, cfg.max_iter)
        }
    };
    // the minimiser is nonnegative; clear rounding-level negatives
    for v in &mut out.u {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let obj = Objective { scale: 1.0 / p, linear: &linear, free: &free };
    let value = obj_value(&sys, p, &obj, &out.u);
    Ok(MinimizeResult {
        value,
        minimizer: sys.to_function(&out.u),
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
    })
}

fn obj_value<S: PairEnergy>(sys: &S, p: f64, obj: &Objective, u: &[f64]) -> f64 {
    obj.scale * super::system::energy(sys, Potential::Power(p), u)
        - obj.linear.iter().zip(u).map(|(b, x)| b * x).sum::<f64>()
}
