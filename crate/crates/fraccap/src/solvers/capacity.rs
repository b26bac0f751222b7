//! Relative capacity `cap(Σ; E) = min { E(φ) : φ = 1 on Σ, φ = 0 off E, 0 ≤ φ ≤ 1 }`.

use super::descent::{cg_quadratic, direct_quadratic, fista, newton, Objective, Outcome};
use super::levelset::{level_order, SetState};
use super::system::{energy, LocalSystem, NonlocalSystem, PairEnergy, Potential};
use super::{MinimizeResult, SolverConfig};
use crate::lattice::{KernelWeights, LatticeFunction, LatticeSet};
use crate::params::FracParams;
use crate::prelude::*;

pub fn capacity(
    sigma: &LatticeSet,
    env: &LatticeSet,
    params: &FracParams,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    params.validate()?;
    let kernel = KernelWeights::assemble(env.grid(), params, cfg.near_band, cfg.near_field)?;
    capacity_with_kernel(&kernel, sigma, env, cfg)
}

fn check_sets(sigma: &LatticeSet, env: &LatticeSet) -> Result<()> {
    sigma.check_grid(env)?;
    if !sigma.is_subset_of(env) || sigma.touches_outside_of(env) {
        return Err(Error::NotCompactlyContained);
    }
    Ok(())
}

fn empty_result(sigma: &LatticeSet) -> MinimizeResult {
    MinimizeResult {
        value: 0.0,
        minimizer: LatticeFunction::zeros(*sigma.grid()),
        iterations: 0,
        residual: 0.0,
        converged: true,
    }
}

/// Capacity with a prebuilt kernel; the exponent is the kernel's `p`.
pub fn capacity_with_kernel(
    kernel: &KernelWeights,
    sigma: &LatticeSet,
    env: &LatticeSet,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    if sigma.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    check_sets(sigma, env)?;
    if sigma.is_empty() {
        return Ok(empty_result(sigma));
    }
    let sys = NonlocalSystem::new(kernel, env.cells());
    let fixed: Vec<bool> = sys.cells().iter().map(|&c| sigma.contains(c)).collect();
    solve_capacity(&sys, &fixed, kernel.p(), cfg)
}

/// Capacity for the local energy `Σ_edges h^{N-p} |u_i - u_j|^p`.
pub fn local_capacity(sigma: &LatticeSet, env: &LatticeSet, p: f64, cfg: &SolverConfig) -> Result<MinimizeResult> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParams(format!("p = {p} must be finite and at least 1")));
    }
    check_sets(sigma, env)?;
    if sigma.is_empty() {
        return Ok(empty_result(sigma));
    }
    let sys = LocalSystem::new(sigma.grid(), env.cells(), p);
    let fixed: Vec<bool> = sys.cells().iter().map(|&c| sigma.contains(c)).collect();
    solve_capacity(&sys, &fixed, p, cfg)
}

pub(crate) fn solve_capacity<S: PairEnergy>(
    sys: &S,
    fixed: &[bool],
    p: f64,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    let n = sys.len();
    let free: Vec<bool> = fixed.iter().map(|f| !f).collect();
    let n_free = free.iter().filter(|&&f| f).count();
    let u0: Vec<f64> = fixed.iter().map(|&f| if f { 1.0 } else { 0.0 }).collect();
    let obj = Objective { scale: 1.0, linear: &[], free: &free };
    if p == 1.0 {
        return Ok(perimeter_capacity(sys, fixed, &free, u0, cfg));
    }
    let quadratic = |u0: &[f64]| -> Result<Outcome> {
        if n_free <= cfg.dense_limit {
            direct_quadratic(sys, &obj, u0)
        } else {
            Ok(cg_quadratic(sys, &obj, u0, cfg.tol, cfg.max_iter))
        }
    };
    let mut out = if p == 2.0 {
        quadratic(&u0)?
    } else if n_free <= cfg.dense_limit {
        let start = quadratic(&u0)?;
        let mut out = newton(sys, Potential::Power(p), &obj, &start.u, cfg.tol, cfg.newton_max_iter)?;
        out.iterations += start.iterations;
        out
    } else {
        fista(sys, Potential::Power(p), &obj, &u0, (0.0, 1.0), cfg.tol, cfg.max_iter)
    };
    // truncation to [0, 1] never raises the energy
    for v in &mut out.u {
        *v = v.clamp(0.0, 1.0);
    }
    let value = energy(sys, Potential::Power(p), &out.u);
    debug_assert_eq!(out.u.len(), n);
    Ok(MinimizeResult {
        value,
        minimizer: sys.to_function(&out.u),
        iterations: out.iterations,
        residual: out.residual,
        converged: out.converged,
    })
}

/// `p = 1`: smoothed descent through the widths of `cfg.smoothing`, then the
/// best superlevel set, then single-cell flips to a local optimum.
fn perimeter_capacity<S: PairEnergy>(
    sys: &S,
    fixed: &[bool],
    free: &[bool],
    mut u: Vec<f64>,
    cfg: &SolverConfig,
) -> MinimizeResult {
    let obj = Objective { scale: 1.0, linear: &[], free };
    let mut iterations = 0;
    for &eps in &cfg.smoothing {
        let out = fista(sys, Potential::Smoothed(eps), &obj, &u, (0.0, 1.0), cfg.tol, cfg.smoothing_iter);
        iterations += out.iterations;
        u = out.u;
    }
    let candidates: Vec<usize> = (0..sys.len()).filter(|&a| free[a]).collect();
    let (order, breaks) = level_order(&u, &candidates);
    let mut state = SetState::new(sys, fixed.to_vec(), vec![0.0; sys.len()]);
    state.sweep(&order, &breaks, |e, _| e);
    let (flips, converged) = state.polish(free, |e, _| e, 1e-13, cfg.flip_limit);
    let indicator: Vec<f64> = state.inside().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let value = energy(sys, Potential::Power(1.0), &indicator);
    MinimizeResult {
        value,
        minimizer: sys.to_function(&indicator),
        iterations: iterations + flips,
        residual: 0.0,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{frac_perimeter, gagliardo};
    use crate::lattice::{LatticeDomain, Shape};

    fn ball_sets(dim: usize, h: f64, r: f64, big_r: f64) -> (LatticeSet, LatticeSet) {
        let dom = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], big_r), dim, h).unwrap();
        let sigma = dom.select(&Shape::ball([0.0, 0.0], r), true);
        (sigma, dom.into_set())
    }

    #[test]
    fn empty_sigma_has_zero_capacity() {
        let (_, env) = ball_sets(1, 0.125, 0.5, 1.0);
        let params = FracParams::new(1, 0.5, 2.0, 2.0).unwrap();
        let r = capacity(&LatticeSet::empty(*env.grid()), &env, &params, &SolverConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn sigma_must_sit_inside_env() {
        let (_, env) = ball_sets(1, 0.125, 0.5, 1.0);
        let params = FracParams::new(1, 0.5, 2.0, 2.0).unwrap();
        let err = capacity(&env, &env, &params, &SolverConfig::default()).unwrap_err();
        assert_eq!(err, Error::NotCompactlyContained);
    }

    #[test]
    fn quadratic_capacity_satisfies_euler_lagrange() {
        // the potential is harmonic off sigma: cap = φᵀMφ = Σ_{Σ} (Mφ)_i
        let (sigma, env) = ball_sets(1, 1.0 / 32.0, 0.5, 1.0);
        let params = FracParams::new(1, 0.4, 2.0, 2.0).unwrap();
        let k = KernelWeights::assemble(env.grid(), &params, 2, crate::lattice::NearField::Auto).unwrap();
        let r = capacity_with_kernel(&k, &sigma, &env, &SolverConfig::default()).unwrap();
        let e = gagliardo(&r.minimizer, &k).unwrap().value;
        assert!((e - r.value).abs() < 1e-12 * e);
        let phi = r.minimizer.values();
        assert!(phi.iter().all(|&v| (0.0..=1.0).contains(&v)));
        // perturbing a free value can only raise the energy
        let mut bumped = r.minimizer.clone();
        let free = env.difference(&sigma).unwrap().cells()[3];
        bumped.values_mut()[free] += 1e-3;
        assert!(gagliardo(&bumped, &k).unwrap().value > e);
    }

    #[test]
    fn perimeter_capacity_of_interval() {
        let (sigma, env) = ball_sets(1, 1.0 / 64.0, 0.5, 1.0);
        let params = FracParams::new(1, 0.5, 1.0, 1.0).unwrap();
        let k = KernelWeights::assemble(env.grid(), &params, 2, crate::lattice::NearField::Auto).unwrap();
        let r = capacity_with_kernel(&k, &sigma, &env, &SolverConfig::default()).unwrap();
        let per = frac_perimeter(&sigma, &k).unwrap();
        assert!(r.converged);
        assert!(r.value <= per * (1.0 + 1e-12));
        assert!((r.value / per - 1.0).abs() < 0.03, "{} vs {per}", r.value);
    }

    #[test]
    fn power_capacity_lies_between_neighbouring_exponents_scaled() {
        // sanity: p = 1.5 solve converges and is monotone in sigma
        let (sigma, env) = ball_sets(1, 1.0 / 32.0, 0.5, 1.0);
        let small =
            env.intersection(&LatticeSet::from_shape(*env.grid(), &Shape::ball([0.0, 0.0], 0.25), true)).unwrap();
        let params = FracParams::new(1, 0.4, 1.5, 1.5).unwrap();
        let cfg = SolverConfig::default();
        let big = capacity(&sigma, &env, &params, &cfg).unwrap();
        let little = capacity(&small, &env, &params, &cfg).unwrap();
        assert!(big.converged && little.converged, "{big:?}");
        assert!(little.value < big.value);
    }

    #[test]
    fn local_capacity_of_interval_matches_linear_profile() {
        // 1D, p = 2: cap([-a, a]; (-1, 1)) = 2 / (1 - a) for the continuous problem
        let (sigma, env) = ball_sets(1, 1.0 / 128.0, 0.5, 1.0);
        let r = local_capacity(&sigma, &env, 2.0, &SolverConfig::default()).unwrap();
        let a = 0.5;
        assert!((r.value / (2.0 / (1.0 - a)) - 1.0).abs() < 0.02, "{}", r.value);
        let none = local_capacity(&LatticeSet::empty(*env.grid()), &env, 2.0, &SolverConfig::default()).unwrap();
        assert_eq!(none.value, 0.0);
    }
}
