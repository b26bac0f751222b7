//! Cheeger constant `h_s(E; Ω) = inf P_s(A) / |A ∩ E|` over `A ⊆ Ω`, which
//! equals the `L¹` frequency `min E_1(φ) / ‖φ‖_{L¹(E)}`.

use super::levelset::{level_order, SetState};
use super::system::{energy, energy_grad, NonlocalSystem, PairEnergy, Potential};
use super::{MinimizeResult, SolverConfig};
use crate::lattice::{KernelWeights, LatticeDomain, LatticeSet};
use crate::params::FracParams;
use crate::prelude::*;

pub fn cheeger(e_region: &LatticeSet, omega: &LatticeDomain, s: f64, cfg: &SolverConfig) -> Result<MinimizeResult> {
    let params = FracParams::new(omega.dim(), s, 1.0, 1.0)?;
    e_region.check_grid(omega.set())?;
    if !e_region.is_subset_of(omega.set()) {
        return Err(Error::NotCompactlyContained);
    }
    if e_region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let kernel = KernelWeights::assemble(omega.grid(), &params, cfg.near_band, cfg.near_field)?;
    let sys = NonlocalSystem::new(&kernel, omega.active_cells());
    let cell = omega.grid().cell_measure();
    let mass: Vec<f64> = sys.cells().iter().map(|&c| if e_region.contains(c) { cell } else { 0.0 }).collect();

    let (phi, iterations) = smoothed_ratio_descent(&sys, &mass, cfg);
    let ratio = |e: f64, m: f64| if m > 0.0 { e / m } else { f64::INFINITY };
    let all: Vec<usize> = (0..sys.len()).collect();
    let (order, breaks) = level_order(&phi, &all);
    let mut state = SetState::new(&sys, vec![false; sys.len()], mass.clone());
    state.sweep(&order, &breaks, ratio);
    let movable = vec![true; sys.len()];
    let (flips, converged) = state.polish(&movable, ratio, 1e-13, cfg.flip_limit);

    let indicator: Vec<f64> = state.inside().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let m: f64 = indicator.iter().zip(&mass).map(|(a, b)| a * b).sum();
    let value = energy(&sys, Potential::Power(1.0), &indicator) / m;
    Ok(MinimizeResult {
        value,
        minimizer: sys.to_function(&indicator),
        iterations: iterations + flips,
        residual: 0.0,
        converged,
    })
}

/// Projected descent on `E_ε(φ) / Σ mass·φ` over `φ ≥ 0`, from `φ = 1`,
/// through the smoothing schedule.  Iterates are rescaled to `max φ = 1`.
fn smoothed_ratio_descent<S: PairEnergy>(sys: &S, mass: &[f64], cfg: &SolverConfig) -> (Vec<f64>, usize) {
    let n = sys.len();
    let mut phi = vec![1.0; n];
    let mut grad = vec![0.0; n];
    let mut iterations = 0;
    let max_degree = (0..n).map(|a| sys.degree(a)).fold(0.0, f64::max);
    let total: f64 = mass.iter().sum();
    let ratio = |pot: Potential, v: &[f64]| {
        let m: f64 = v.iter().zip(mass).map(|(a, b)| a * b).sum();
        if m > 0.0 {
            energy(sys, pot, v) / m
        } else {
            f64::INFINITY
        }
    };
    for &eps in &cfg.smoothing {
        let pot = Potential::Smoothed(eps);
        let mut step = total * eps / max_degree;
        for _ in 0..cfg.smoothing_iter {
            iterations += 1;
            let e = energy_grad(sys, pot, &phi, &mut grad);
            let m: f64 = phi.iter().zip(mass).map(|(a, b)| a * b).sum();
            let r = e / m;
            for a in 0..n {
                grad[a] = (grad[a] - r * mass[a]) / m;
            }
            let mut accepted = false;
            while step > 1e-30 {
                let mut trial: Vec<f64> = (0..n).map(|a| (phi[a] - step * grad[a]).max(0.0)).collect();
                let top = trial.iter().fold(0.0f64, |x, &y| x.max(y));
                if top > 0.0 {
                    trial.iter_mut().for_each(|v| *v /= top);
                    if ratio(pot, &trial) < r {
                        phi = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
            step *= 1.5;
        }
    }
    (phi, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::frac_perimeter;
    use crate::lattice::{NearField, Shape};

    #[test]
    fn cheeger_of_ball_in_larger_ball() {
        // N = 1, r = 1, R = 2, s = 1/2: P_s((-1, 1)) / 2 = 8 √2
        let h = 1.0 / 64.0;
        let omega = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 2.0), 1, h).unwrap();
        let e = omega.select(&Shape::ball([0.0, 0.0], 1.0), false);
        let res = cheeger(&e, &omega, 0.5, &SolverConfig::default()).unwrap();
        let exact = 8.0 * 2f64.sqrt();
        assert!(res.converged);
        assert!((res.value / exact - 1.0).abs() < 0.03, "{}", res.value);
        // optimal set is the ball up to one cell layer
        let chosen = res.minimizer.support();
        for c in 0..omega.grid().len() {
            let x = omega.grid().center(c)[0].abs();
            if x < 1.0 - h {
                assert!(chosen.contains(&c), "missing {x}");
            }
            if x > 1.0 + h {
                assert!(!chosen.contains(&c), "extra {x}");
            }
        }
    }

    #[test]
    fn cheeger_never_exceeds_tested_sets() {
        let omega = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), 2, 0.2).unwrap();
        let res = cheeger(omega.set(), &omega, 0.4, &SolverConfig::default()).unwrap();
        let params = FracParams::new(2, 0.4, 1.0, 1.0).unwrap();
        let k = KernelWeights::assemble(omega.grid(), &params, 2, NearField::Auto).unwrap();
        let full = frac_perimeter(omega.set(), &k).unwrap() / omega.measure();
        assert!(res.value <= full * (1.0 + 1e-12));
        for r in [0.4, 0.6, 0.8] {
            let a = omega.select(&Shape::ball([0.1, 0.0], r), false);
            if !a.is_empty() {
                let q = frac_perimeter(&a, &k).unwrap() / a.measure();
                assert!(res.value <= q * (1.0 + 1e-12));
            }
        }
    }
}
