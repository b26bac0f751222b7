//! Minimisers for `F(u) = c·E(u) - Σ_a b_a u_a` with some variables held fixed.

use nalgebra::{DMatrix, DVector};

use super::system::{energy, energy_grad, hessian, quadratic_matrix, PairEnergy, Potential};
use crate::prelude::*;

pub(crate) struct Objective<'a> {
    /// Multiplier `c` of the energy.
    pub scale: f64,
    /// Linear coefficients `b`; empty means zero.
    pub linear: &'a [f64],
    /// Variables allowed to move.
    pub free: &'a [bool],
}

impl Objective<'_> {
    fn value<S: PairEnergy>(&self, sys: &S, pot: Potential, u: &[f64]) -> f64 {
        self.scale * energy(sys, pot, u) - self.linear_part(u)
    }

    fn value_grad<S: PairEnergy>(&self, sys: &S, pot: Potential, u: &[f64], g: &mut [f64]) -> f64 {
        let e = energy_grad(sys, pot, u, g);
        for (a, ga) in g.iter_mut().enumerate() {
            *ga *= self.scale;
            if let Some(b) = self.linear.get(a) {
                *ga -= b;
            }
            if !self.free[a] {
                *ga = 0.0;
            }
        }
        self.scale * e - self.linear_part(u)
    }

    fn linear_part(&self, u: &[f64]) -> f64 {
        self.linear.iter().zip(u).map(|(b, x)| b * x).sum()
    }

    fn free_indices(&self) -> Vec<usize> {
        (0..self.free.len()).filter(|&a| self.free[a]).collect()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

fn submatrix(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Exact minimiser for `ψ(t) = t²` by a Cholesky solve on the free block.
pub(crate) fn direct_quadratic<S: PairEnergy>(sys: &S, obj: &Objective, u0: &[f64]) -> Result<Outcome> {
    let m = quadratic_matrix(sys);
    let free = obj.free_indices();
    let mut u = u0.to_vec();
    if !free.is_empty() {
        let mut rhs = DVector::zeros(free.len());
        for (i, &a) in free.iter().enumerate() {
            let mut r = obj.linear.get(a).copied().unwrap_or(0.0);
            for b in 0..u.len() {
                if !obj.free[b] && u[b] != 0.0 {
                    r -= 2.0 * obj.scale * m[(a, b)] * u[b];
                }
            }
            rhs[i] = r;
        }
        let mff = submatrix(&m, &free) * (2.0 * obj.scale);
        let chol = mff.clone().cholesky().ok_or(Error::Singular)?;
        let x = chol.solve(&rhs);
        for (i, &a) in free.iter().enumerate() {
            u[a] = x[i];
        }
        let mut r = &mff * &x - &rhs;
        for (i, &a) in free.iter().enumerate() {
            r[i] = r[i].abs() / (rhs[i].abs() + (mff[(i, i)] * u[a]).abs()).max(f64::MIN_POSITIVE);
        }
        let residual = r.max();
        return Ok(Outcome { u, iterations: 1, residual, converged: true });
    }
    Ok(Outcome { u, iterations: 0, residual: 0.0, converged: true })
}

/// Damped Newton with a dense Cholesky of the (regularised) Hessian.  The
/// residual is the Newton decrement relative to `|F|`; iteration continues to
/// `tol²` because identities that are linear in the gradient only see its
/// square root.
pub(crate) fn newton<S: PairEnergy>(
    sys: &S,
    pot: Potential,
    obj: &Objective,
    u0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Outcome> {
    let free = obj.free_indices();
    let n = u0.len();
    let mut u = u0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = obj.value_grad(sys, pot, &u, &mut g);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = free.is_empty();
    while !converged && iterations < max_iter {
        iterations += 1;
        let size = u.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
        let h = submatrix(&hessian(sys, pot, &u, 1e-6 * size), &free) * obj.scale;
        let gf = DVector::from_iterator(free.len(), free.iter().map(|&a| g[a]));
        let chol = h.cholesky().ok_or(Error::Singular)?;
        let d = -chol.solve(&gf);
        let slope = gf.dot(&d);
        residual = -0.5 * slope / f.abs().max(f64::MIN_POSITIVE);
        if residual <= tol * tol {
            converged = true;
            break;
        }
        let mut t = 1.0;
        let mut trial = u.clone();
        let mut accepted = false;
        for _ in 0..60 {
            for (i, &a) in free.iter().enumerate() {
                trial[a] = u[a] + t * d[i];
            }
            let ft = obj.value(sys, pot, &trial);
            if ft <= f + 1e-4 * t * slope {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // No representable decrease along the Newton direction.
            converged = residual <= tol;
            break;
        }
        u.copy_from_slice(&trial);
        let previous = f;
        f = obj.value_grad(sys, pot, &u, &mut g);
        if residual <= tol && previous - f <= 8.0 * f64::EPSILON * f.abs() {
            // objective at rounding level
            converged = true;
            break;
        }
    }
    Ok(Outcome { u, iterations, residual, converged })
}

/// Accelerated projected gradient with backtracking and adaptive restart.
/// Free variables are clamped to `[lo, hi]`.  Converged when the relative
/// decrease over the last `window` iterations drops below `tol`.
pub(crate) fn fista<S: PairEnergy>(
    sys: &S,
    pot: Potential,
    obj: &Objective,
    u0: &[f64],
    bounds: (f64, f64),
    tol: f64,
    max_iter: usize,
) -> Outcome {
    const WINDOW: usize = 20;
    let n = u0.len();
    let project = |v: &mut [f64]| {
        for a in 0..n {
            if obj.free[a] {
                v[a] = v[a].clamp(bounds.0, bounds.1);
            }
        }
    };
    let mut x = u0.to_vec();
    project(&mut x);
    let mut fx = obj.value(sys, pot, &x);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut lip = {
        let scale = (0..n).map(|a| sys.degree(a)).fold(0.0, f64::max);
        let curv = pot.curvature(0.0, 1.0).max(1.0);
        (obj.scale * scale * curv).max(1e-300)
    };
    lip *= 0.25;
    let mut g = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut history = Vec::with_capacity(max_iter + 1);
    history.push(fx);
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let fy = obj.value_grad(sys, pot, &y, &mut g);
        let mut ft;
        let mut backtracked = false;
        loop {
            for a in 0..n {
                trial[a] = y[a] - g[a] / lip;
            }
            project(&mut trial);
            ft = obj.value(sys, pot, &trial);
            let mut model = fy;
            let mut dist = 0.0;
            for a in 0..n {
                let d = trial[a] - y[a];
                model += g[a] * d;
                dist += d * d;
            }
            model += 0.5 * lip * dist;
            if ft <= model + 1e-12 * fy.abs() || lip > 1e300 {
                break;
            }
            lip *= 2.0;
            backtracked = true;
        }
        if ft > fx {
            // restart momentum from the last iterate
            t = 1.0;
            y.copy_from_slice(&x);
            history.push(fx);
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for a in 0..n {
                y[a] = trial[a] + beta * (trial[a] - x[a]);
            }
            project(&mut y);
            x.copy_from_slice(&trial);
            fx = ft;
            t = t_next;
            history.push(fx);
        }
        if !backtracked {
            lip *= 0.9;
        }
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            residual = (old - fx).abs() / fx.abs().max(f64::MIN_POSITIVE);
            if residual < tol {
                converged = true;
                break;
            }
        }
    }
    Outcome { u: x, iterations, residual, converged }
}

/// Jacobi-preconditioned conjugate gradients for the quadratic case, for
/// systems too large for a dense factorisation.
pub(crate) fn cg_quadratic<S: PairEnergy>(sys: &S, obj: &Objective, u0: &[f64], tol: f64, max_iter: usize) -> Outcome {
    let n = u0.len();
    let c2 = 2.0 * obj.scale;
    let apply = |v: &[f64], out: &mut [f64]| {
        for a in 0..n {
            out[a] = 2.0 * sys.degree(a) * v[a];
        }
        for a in 0..n {
            let va = v[a];
            let mut acc = 0.0;
            sys.for_each_upper(a, |b, w| {
                acc += w * v[b];
                out[b] -= 2.0 * w * va;
            });
            out[a] -= 2.0 * acc;
        }
        for x in out.iter_mut() {
            *x *= c2;
        }
    };
    let mut u = u0.to_vec();
    let mut fixed_part = vec![0.0; n];
    let held: Vec<f64> = (0..n).map(|a| if obj.free[a] { 0.0 } else { u[a] }).collect();
    apply(&held, &mut fixed_part);
    let mut x: Vec<f64> = (0..n).map(|a| if obj.free[a] { u[a] } else { 0.0 }).collect();
    let rhs: Vec<f64> = (0..n)
        .map(|a| if obj.free[a] { obj.linear.get(a).copied().unwrap_or(0.0) - fixed_part[a] } else { 0.0 })
        .collect();
    let diag: Vec<f64> = (0..n).map(|a| c2 * 2.0 * sys.degree(a)).collect();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|a| if obj.free[a] { rhs[a] - ax[a] } else { 0.0 }).collect();
    let mut z: Vec<f64> = (0..n).map(|a| r[a] / diag[a]).collect();
    let mut d = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let norm_b = rhs.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let mut residual = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
    let mut iterations = 0;
    let mut ad = vec![0.0; n];
    while residual > tol && iterations < max_iter {
        iterations += 1;
        apply(&d, &mut ad);
        for a in 0..n {
            if !obj.free[a] {
                ad[a] = 0.0;
            }
        }
        let dad: f64 = d.iter().zip(&ad).map(|(a, b)| a * b).sum();
        if dad <= 0.0 {
            break;
        }
        let alpha = rz / dad;
        for a in 0..n {
            x[a] += alpha * d[a];
            r[a] -= alpha * ad[a];
            z[a] = r[a] / diag[a];
        }
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for a in 0..n {
            d[a] = z[a] + beta * d[a];
        }
        residual = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
    }
    for a in 0..n {
        if obj.free[a] {
            u[a] = x[a];
        }
    }
    Outcome { u, iterations, residual, converged: residual <= tol }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{KernelWeights, LatticeDomain, NearField, Shape};
    use crate::solvers::system::NonlocalSystem;
    use crate::FracParams;

    fn torsion_setup(p: f64) -> (KernelWeights, Vec<usize>) {
        let dom = LatticeDomain::from_shape(&Shape::Interval { a: -1.0, b: 1.0 }, 1, 1.0 / 16.0).unwrap();
        let params = FracParams::new(1, 0.4, p, p).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        (k, dom.active_cells())
    }

    #[test]
    fn newton_and_direct_agree_for_quadratics() {
        let (k, cells) = torsion_setup(2.0);
        let sys = NonlocalSystem::new(&k, cells);
        let n = sys.len();
        let b = vec![1.0 / 16.0; n];
        let free = vec![true; n];
        let obj = Objective { scale: 0.5, linear: &b, free: &free };
        let d = direct_quadratic(&sys, &obj, &vec![0.0; n]).unwrap();
        let nw = newton(&sys, Potential::Power(2.0), &obj, &vec![0.0; n], 1e-14, 20).unwrap();
        assert!(nw.converged && nw.iterations <= 3);
        let diff = d.u.iter().zip(&nw.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10 * d.u.iter().fold(0.0f64, |m, x| m.max(*x)));
        let cg = cg_quadratic(&sys, &obj, &vec![0.0; n], 1e-13, 500);
        assert!(cg.converged);
        let diff = d.u.iter().zip(&cg.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10 * d.u.iter().fold(0.0f64, |m, x| m.max(*x)));
    }

    #[test]
    fn fista_approaches_newton_minimum() {
        let (k, cells) = torsion_setup(1.5);
        let sys = NonlocalSystem::new(&k, cells);
        let n = sys.len();
        let b = vec![1.0 / 16.0; n];
        let free = vec![true; n];
        let obj = Objective { scale: 1.0 / 1.5, linear: &b, free: &free };
        let nw = newton(&sys, Potential::Power(1.5), &obj, &vec![0.1; n], 1e-13, 100).unwrap();
        assert!(nw.converged, "{nw:?}");
        let fi = fista(&sys, Potential::Power(1.5), &obj, &vec![0.1; n], (0.0, f64::INFINITY), 1e-12, 5000);
        let (fv, nv) = (obj.value(&sys, Potential::Power(1.5), &fi.u), obj.value(&sys, Potential::Power(1.5), &nw.u));
        assert!(fv >= nv - 1e-12 * nv.abs());
        assert!((fv - nv).abs() < 1e-6 * nv.abs(), "{fv} {nv}");
    }
}
