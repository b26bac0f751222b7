//! Principal frequencies `λ_{p,q}(Ω) = min E(u) / ‖u‖_{L^q(Ω)}^p` over `u`
//! vanishing off `Ω`.

use nalgebra::{DMatrix, DVector};

use super::descent::{cg_quadratic, Objective};
use super::system::{energy, energy_grad, quadratic_matrix, LocalSystem, NonlocalSystem, PairEnergy, Potential};
use super::{MinimizeResult, SolverConfig};
use crate::energy::pow_abs;
use crate::lattice::{KernelWeights, LatticeDomain, LatticeFunction, LatticeSet};
use crate::params::FracParams;
use crate::prelude::*;

pub fn frequency(omega: &LatticeDomain, params: &FracParams, cfg: &SolverConfig) -> Result<MinimizeResult> {
    params.validate()?;
    let kernel = KernelWeights::assemble(omega.grid(), params, cfg.near_band, cfg.near_field)?;
    frequency_with_kernel(&kernel, omega.set(), params.q, cfg)
}

/// Frequency with a prebuilt kernel: the symmetric eigen-solve when
/// `p = q = 2`, otherwise projected descent from the quadratic ground state.
pub fn frequency_with_kernel(
    kernel: &KernelWeights,
    omega: &LatticeSet,
    q: f64,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    let sys = nonlocal(kernel, omega, q)?;
    solve_frequency(&sys, kernel.p(), q, None, cfg)
}

/// Projected descent on the quotient started from `seed`, whatever `p` and `q`.
pub fn frequency_from(
    kernel: &KernelWeights,
    omega: &LatticeSet,
    q: f64,
    seed: &LatticeFunction,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    let sys = nonlocal(kernel, omega, q)?;
    if seed.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let start = sys.gather(seed);
    solve_frequency(&sys, kernel.p(), q, Some(start), cfg)
}

/// Frequency of the local energy `Σ_edges h^{N-p} |u_i - u_j|^p` with `q = p`.
pub fn local_frequency(omega: &LatticeDomain, p: f64, cfg: &SolverConfig) -> Result<MinimizeResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p = {p} must be finite and at least 1")));
    }
    let sys = LocalSystem::new(omega.grid(), omega.active_cells(), p);
    solve_frequency(&sys, p, p, None, cfg)
}

fn nonlocal<'k>(kernel: &'k KernelWeights, omega: &LatticeSet, q: f64) -> Result<NonlocalSystem<'k>> {
    if omega.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    if omega.is_empty() {
        return Err(Error::EmptyDomain);
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::InvalidParams(format!("q = {q} must be finite and at least 1")));
    }
    Ok(NonlocalSystem::new(kernel, omega.cells()))
}

fn lq_power(u: &[f64], q: f64, cell: f64) -> f64 {
    cell * u.iter().map(|&v| pow_abs(v, q)).sum::<f64>()
}

fn quotient<S: PairEnergy>(sys: &S, p: f64, q: f64, u: &[f64]) -> f64 {
    let cell = sys.grid().cell_measure();
    energy(sys, Potential::Power(p), u) / lq_power(u, q, cell).powf(p / q)
}

fn normalize(u: &mut [f64], q: f64, cell: f64) {
    let n = lq_power(u, q, cell).powf(1.0 / q);
    if n > 0.0 {
        for v in u.iter_mut() {
            *v /= n;
        }
    }
}

pub(crate) fn solve_frequency<S: PairEnergy>(
    sys: &S,
    p: f64,
    q: f64,
    seed: Option<Vec<f64>>,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    let cell = sys.grid().cell_measure();
    let dense = sys.len() <= cfg.dense_limit;
    let m = if dense { Some(quadratic_matrix(sys)) } else { None };
    let chol = match &m {
        Some(m) => Some(m.clone().cholesky().ok_or(Error::Singular)?),
        None => None,
    };
    let (mut u, mut iterations, mut residual, mut converged) = match seed {
        Some(u) => (u, 0, f64::INFINITY, false),
        None => {
            let eig = match (&m, &chol) {
                (Some(m), Some(c)) => dense_ground_state(m, c, cell, cfg)?,
                _ => iterative_ground_state(sys, cell, cfg)?,
            };
            (eig.0, eig.1, eig.2, eig.3)
        }
    };
    if p != 2.0 || q != 2.0 || iterations == 0 {
        let precond = |g: &[f64]| -> Vec<f64> {
            match &chol {
                Some(c) => c.solve(&DVector::from_column_slice(g)).as_slice().to_vec(),
                None => g.iter().enumerate().map(|(a, v)| v / (2.0 * sys.degree(a))).collect(),
            }
        };
        let out = quotient_descent(sys, p, q, u, precond, cfg);
        u = out.0;
        iterations += out.1;
        residual = out.2;
        converged = out.3;
    }
    normalize(&mut u, q, cell);
    let value = quotient(sys, p, q, &u);
    Ok(MinimizeResult { value, minimizer: sys.to_function(&u), iterations, residual, converged })
}

type Ground = (Vec<f64>, usize, f64, bool);

fn eigen_residual(m: &DMatrix<f64>, u: &DVector<f64>, cell: f64) -> (f64, f64) {
    let mu = m * u;
    let rho = u.dot(&mu) / (cell * u.dot(u));
    let r = (&mu - u * (rho * cell)).norm() / mu.norm();
    (rho, r)
}

fn orient(u: &mut DVector<f64>) {
    let n = u.norm();
    let sign = if u.sum() < 0.0 { -1.0 } else { 1.0 };
    *u *= sign / n;
}

fn single_signed(u: &DVector<f64>) -> bool {
    let top = u.amax();
    u.iter().all(|&v| v >= -1e-8 * top)
}

/// Inverse iteration, finished by Rayleigh-quotient shifts once the estimate
/// has settled.  A shifted run that leaves the positive cone is discarded and
/// plain inverse iteration continues instead.
fn dense_ground_state(
    m: &DMatrix<f64>,
    chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
    cell: f64,
    cfg: &SolverConfig,
) -> Result<Ground> {
    let n = m.nrows();
    let mut u = DVector::from_element(n, 1.0);
    orient(&mut u);
    let (mut rho, mut res) = eigen_residual(m, &u, cell);
    let mut it = 0;
    let mut shifted = false;
    while res > cfg.tol && it < cfg.max_iter {
        it += 1;
        let previous = rho;
        u = chol.solve(&u);
        orient(&mut u);
        (rho, res) = eigen_residual(m, &u, cell);
        if !shifted && it >= 3 && (previous - rho).abs() <= 1e-6 * rho {
            shifted = true;
            let saved = (u.clone(), rho, res);
            for _ in 0..12 {
                if res <= cfg.tol {
                    break;
                }
                it += 1;
                let shift = m - DMatrix::identity(n, n) * (rho * cell);
                match shift.lu().solve(&u) {
                    Some(y) if y.iter().all(|v| v.is_finite()) => u = y,
                    _ => break,
                }
                orient(&mut u);
                (rho, res) = eigen_residual(m, &u, cell);
            }
            if !single_signed(&u) || rho > saved.1 * (1.0 + 1e-9) {
                (u, rho, res) = saved;
            }
        }
    }
    if !rho.is_finite() {
        return Err(Error::NoConvergence { iterations: it, residual: res });
    }
    Ok((u.as_slice().to_vec(), it, res, res <= cfg.tol))
}

/// Inverse iteration with conjugate-gradient inner solves.
fn iterative_ground_state<S: PairEnergy>(sys: &S, cell: f64, cfg: &SolverConfig) -> Result<Ground> {
    let n = sys.len();
    let free = vec![true; n];
    let mut u = vec![1.0; n];
    let mut rho = f64::INFINITY;
    let mut res = f64::INFINITY;
    let mut it = 0;
    while it < cfg.max_iter {
        it += 1;
        let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        u.iter_mut().for_each(|v| *v /= nu);
        let obj = Objective { scale: 0.5, linear: &u, free: &free };
        let solve = cg_quadratic(sys, &obj, &u, cfg.tol * 1e-2, cfg.max_iter);
        let y = solve.u;
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let next: Vec<f64> = y.iter().map(|v| v / ny).collect();
        let e = energy(sys, Potential::Power(2.0), &next);
        let new_rho = e / cell;
        let change = (rho - new_rho).abs() / new_rho;
        rho = new_rho;
        u = next;
        res = change;
        if change <= cfg.tol {
            break;
        }
    }
    if !rho.is_finite() {
        return Err(Error::NoConvergence { iterations: it, residual: res });
    }
    Ok((u, it, res, res <= cfg.tol))
}

/// Preconditioned descent on the quotient over `u ≥ 0`, renormalising after
/// each step.  The residual is the relative decrease over the last 20 steps.
fn quotient_descent<S: PairEnergy>(
    sys: &S,
    p: f64,
    q: f64,
    mut u: Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    cfg: &SolverConfig,
) -> (Vec<f64>, usize, f64, bool) {
    const WINDOW: usize = 20;
    let cell = sys.grid().cell_measure();
    let n = u.len();
    for v in u.iter_mut() {
        *v = v.abs();
    }
    normalize(&mut u, q, cell);
    let mut history = vec![quotient(sys, p, q, &u)];
    let mut grad = vec![0.0; n];
    let mut step = 1.0f64;
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < cfg.max_iter {
        it += 1;
        let e = energy_grad(sys, Potential::Power(p), &u, &mut grad);
        let lq = lq_power(&u, q, cell);
        let denom = lq.powf(p / q);
        let qv = e / denom;
        let dcoef = p * lq.powf(p / q - 1.0) * cell;
        for a in 0..n {
            let gd = dcoef * pow_abs(u[a], q - 1.0) * u[a].signum();
            grad[a] = (grad[a] - qv * gd) / denom;
        }
        let dir = precond(&grad);
        let mut accepted = None;
        while step > 1e-20 {
            let mut v: Vec<f64> = (0..n).map(|a| (u[a] - step * dir[a]).max(0.0)).collect();
            if v.iter().any(|&x| x > 0.0) {
                normalize(&mut v, q, cell);
                let qn = quotient(sys, p, q, &v);
                if qn < qv {
                    accepted = Some((v, qn));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((v, qn)) = accepted else {
            residual = 0.0;
            break;
        };
        u = v;
        history.push(qn);
        step = (step * 1.5).min(1e6);
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            residual = (old - qn) / qn;
            if residual < cfg.tol {
                break;
            }
        }
    }
    (u, it, residual, residual <= cfg.tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Grid, NearField, Shape};

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    fn interval(a: f64, b: f64, h: f64) -> LatticeDomain {
        LatticeDomain::from_shape(&Shape::Interval { a, b }, 1, h).unwrap()
    }

    #[test]
    fn two_cell_lattice_matches_hand_eigenvalue() {
        let grid = Grid::new(1, 0.5, [-3, 0], [6, 1]).unwrap();
        let mut set = LatticeSet::empty(grid);
        set.insert(2);
        set.insert(3);
        let params = FracParams::new(1, 0.3, 2.0, 2.0).unwrap();
        let k = KernelWeights::assemble(&grid, &params, 2, NearField::Auto).unwrap();
        let r = frequency_with_kernel(&k, &set, 2.0, &cfg()).unwrap();
        // M = [[2T, -2w], [-2w, 2T]] with eigenvalues 2T ± 2w, divided by h
        let (t, w) = (k.row_total(2), k.weight(2, 3));
        assert!((k.row_total(3) - t).abs() < 1e-14 * t);
        let exact = (2.0 * t - 2.0 * w) / 0.5;
        assert!((r.value - exact).abs() < 1e-12 * exact, "{} {exact}", r.value);
        assert!(r.converged);
    }

    #[test]
    fn dense_eigenvalue_agrees_with_full_decomposition() {
        let dom =
            LatticeDomain::from_shape(&Shape::Rectangle { lo: [0.0, 0.0], hi: [1.0, 0.5] }, 2, 1.0 / 8.0).unwrap();
        let params = FracParams::new(2, 0.6, 2.0, 2.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        let r = frequency_with_kernel(&k, dom.set(), 2.0, &cfg()).unwrap();
        let sys = NonlocalSystem::new(&k, dom.active_cells());
        let m = quadratic_matrix(&sys);
        let lowest = m.symmetric_eigenvalues().min() / dom.grid().cell_measure();
        assert!((r.value - lowest).abs() < 1e-10 * lowest);
    }

    #[test]
    fn frequency_scales_exactly() {
        let params = FracParams::new(1, 0.35, 2.0, 2.0).unwrap();
        let a = frequency(&interval(0.0, 1.0, 1.0 / 32.0), &params, &cfg()).unwrap();
        let b = frequency(&interval(0.0, 3.0, 3.0 / 32.0), &params, &cfg()).unwrap();
        let expected = 3f64.powf(-0.7);
        assert!((b.value / a.value / expected - 1.0).abs() < 1e-10);
    }

    #[test]
    fn smaller_domains_have_larger_frequencies() {
        let dom = interval(0.0, 1.0, 1.0 / 32.0);
        let part = dom.select(&Shape::Interval { a: 0.0, b: 0.6 }, false);
        let params = FracParams::new(1, 0.5, 1.5, 2.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        let big = frequency_with_kernel(&k, dom.set(), 2.0, &cfg()).unwrap();
        let small = frequency_with_kernel(&k, &part, 2.0, &cfg()).unwrap();
        assert!(big.converged && small.converged, "{big:?}");
        assert!(big.value <= small.value);
    }

    #[test]
    fn descent_reproduces_the_eigen_solve() {
        let dom = interval(0.0, 1.0, 1.0 / 32.0);
        let params = FracParams::new(1, 0.5, 2.0, 2.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        let eig = frequency_with_kernel(&k, dom.set(), 2.0, &cfg()).unwrap();
        let seed = LatticeFunction::indicator(dom.set());
        let desc = frequency_from(&k, dom.set(), 2.0, &seed, &cfg()).unwrap();
        assert!((desc.value / eig.value - 1.0).abs() < 1e-8, "{} {}", desc.value, eig.value);
        assert!(desc.value >= eig.value * (1.0 - 1e-12));
    }

    #[test]
    fn iterative_path_matches_dense_path() {
        let dom = interval(0.0, 1.0, 1.0 / 24.0);
        let params = FracParams::new(1, 0.4, 2.0, 2.0).unwrap();
        let dense = frequency(&dom, &params, &cfg()).unwrap();
        let sparse = frequency(&dom, &params, &SolverConfig { dense_limit: 0, ..cfg() }).unwrap();
        assert!(sparse.converged);
        assert!((sparse.value / dense.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn value_is_the_quotient_of_the_minimizer() {
        let dom = interval(0.0, 1.0, 1.0 / 16.0);
        let params = FracParams::new(1, 0.4, 1.5, 3.0).unwrap();
        let k = KernelWeights::assemble(dom.grid(), &params, 2, NearField::Auto).unwrap();
        let r = frequency_with_kernel(&k, dom.set(), 3.0, &cfg()).unwrap();
        let e = crate::energy::gagliardo(&r.minimizer, &k).unwrap().value;
        let n = crate::energy::lq_norm(&r.minimizer, dom.set(), 3.0).unwrap();
        assert!((r.value - e / n.powf(1.5)).abs() < 1e-12 * r.value);
        assert!(r.minimizer.values().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn local_frequency_of_unit_interval() {
        let r = local_frequency(&interval(0.0, 1.0, 1.0 / 512.0), 2.0, &cfg()).unwrap();
        let pi2 = core::f64::consts::PI.powi(2);
        assert!((r.value / pi2 - 1.0).abs() < 0.005, "{}", r.value);
        let a = local_frequency(&interval(0.0, 1.0, 1.0 / 16.0), 2.0, &cfg()).unwrap();
        let b = local_frequency(&interval(0.0, 2.0, 2.0 / 16.0), 2.0, &cfg()).unwrap();
        assert!((a.value / b.value - 4.0).abs() < 1e-10);
    }
}
