//! Exact rescaling, domain monotonicity and removable points.

use fraccap::energy::frac_perimeter;
use fraccap::geometry::inradius;
use fraccap::lattice::{LatticeSet, Shape};
use fraccap::solvers::{frequency_with_kernel, local_frequency};

use super::{ball, cap, domain, interval, kernel, lambda, params, rect, Runner, Scope};
use crate::report::{Check, Relation};
use crate::Result;

/// Tolerance for rescaling checks solved by iterative descent rather than a
/// direct factorisation.
pub(crate) const ITERATIVE_TOL: f64 = 1e-6;

fn base_shape(dim: usize) -> Shape {
    if dim == 1 {
        interval(0.0, 1.0)
    } else {
        rect(0.0, 0.0, 1.0, 0.5)
    }
}

fn tag(x: f64) -> String {
    format!("{x}").replace('.', "_")
}

/// `(value on the lattice of Ω, value on the lattice of tΩ)` after checking
/// that both lattices have the same number of cells.
fn rescaled<F>(sc: &Scope, shape: &Shape, dim: usize, t: f64, mut f: F) -> Result<(f64, f64)>
where
    F: FnMut(&fraccap::lattice::LatticeDomain, &Shape) -> Result<f64>,
{
    let h = sc.h(dim);
    let a = domain(shape, dim, h)?;
    let scaled = shape.scaled(t);
    let b = domain(&scaled, dim, t * h)?;
    if a.count() != b.count() {
        return Err(crate::Error::Usage(format!("rescaled lattice has {} cells instead of {}", b.count(), a.count())));
    }
    Ok((f(&a, shape)?, f(&b, &scaled)?))
}

pub fn scaling(r: &mut Runner) {
    const FREQ: &str = "principal frequency rescales as t^(-α), α = sp - N + Np/q";
    for (dim, s, p, q) in [
        (1, 0.25, 2.0, 2.0),
        (1, 0.5, 2.0, 2.0),
        (2, 0.5, 2.0, 2.0),
        (2, 0.75, 2.0, 2.0),
        (1, 0.25, 2.0, 1.5),
        (1, 0.4, 1.5, 1.5),
    ] {
        for t in [0.5, 3.0] {
            let id = format!("scaling.lambda.n{dim}.s{}.p{}.q{}.t{}", tag(s), tag(p), tag(q), tag(t));
            r.run(&id.clone(), FREQ, Relation::Eq, |sc| {
                let prm = params(dim, s, p, q)?;
                sc.note(&prm);
                let cfg = sc.solver();
                let (l, lt) = rescaled(sc, &base_shape(dim), dim, t, |d, _| lambda(d, &prm, &cfg))?;
                let tol = if p == 2.0 && q == 2.0 { sc.cfg.tol_exact } else { ITERATIVE_TOL };
                Ok(vec![Check::eq(&id, FREQ, lt, l * t.powf(-prm.alpha()), tol)])
            });
        }
    }

    const CAP: &str = "relative capacity of a closed ball in a concentric ball rescales as t^(N-sp)";
    for (dim, s) in [(1, 0.25), (1, 0.5), (2, 0.5), (2, 0.75)] {
        for t in [0.5, 3.0] {
            let id = format!("scaling.cap.n{dim}.s{}.t{}", tag(s), tag(t));
            r.run(&id.clone(), CAP, Relation::Eq, |sc| {
                let prm = params(dim, s, 2.0, 2.0)?;
                sc.note(&prm);
                let cfg = sc.solver();
                let (c, ct) = rescaled(sc, &ball(1.0), dim, t, |env, shape| {
                    let rad = match shape {
                        Shape::Ball { radius, .. } => *radius,
                        _ => unreachable!(),
                    };
                    let sigma = env.select(&ball(0.5 * rad), true);
                    cap(&sigma, env.set(), &prm, &cfg)
                })?;
                Ok(vec![Check::eq(&id, CAP, ct, c * t.powf(prm.energy_scaling()), sc.cfg.tol_exact)])
            });
        }
    }

    const PER: &str = "fractional perimeter rescales as t^(N-s)";
    for (dim, s) in [(1, 0.5), (2, 0.5)] {
        for t in [0.5, 3.0] {
            let id = format!("scaling.perimeter.n{dim}.s{}.t{}", tag(s), tag(t));
            r.run(&id.clone(), PER, Relation::Eq, |sc| {
                let prm = params(dim, s, 1.0, 1.0)?;
                sc.note(&prm);
                let cfg = sc.solver();
                let shape = if dim == 1 { interval(-1.0, 1.0) } else { ball(1.0) };
                let (a, b) =
                    rescaled(sc, &shape, dim, t, |d, _| Ok(frac_perimeter(d.set(), &kernel(d, &prm, &cfg)?)?))?;
                Ok(vec![Check::eq(&id, PER, b, a * t.powf(dim as f64 - s), sc.cfg.tol_exact)])
            });
        }
    }

    const LOCAL: &str = "local principal frequency rescales as t^(-p)";
    for dim in [1, 2] {
        let id = format!("scaling.local_lambda.n{dim}");
        r.run(&id.clone(), LOCAL, Relation::Eq, |sc| {
            let cfg = sc.solver();
            let t = 3.0;
            let (a, b) = rescaled(sc, &base_shape(dim), dim, t, |d, _| Ok(local_frequency(d, 2.0, &cfg)?.value))?;
            Ok(vec![Check::eq(&id, LOCAL, b, a * t.powf(-2.0), sc.cfg.tol_exact)])
        });
    }
}

pub fn monotonicity(r: &mut Runner) {
    const SUB: &str = "principal frequency is monotone under inclusion: λ(Ω) ≤ λ(B) for a ball B ⊂ Ω";
    const BALL: &str = "sharp upper bound by the inscribed ball: λ(Ω) ≤ λ(B_1) r_Ω^(-α)";
    const PUNCT: &str = "removing cells raises the principal frequency";
    for (dim, s) in [(1, 0.5), (2, 0.5)] {
        let id = format!("monotonicity.subset_ball.n{dim}");
        r.run(&id.clone(), SUB, Relation::Le, |sc| {
            let prm = params(dim, s, 2.0, 2.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let omega = domain(&base_shape(dim), dim, sc.h(dim))?;
            let k = kernel(&omega, &prm, &cfg)?;
            let inner = if dim == 1 { Shape::ball([0.5, 0.0], 0.25) } else { Shape::ball([0.5, 0.25], 0.2) };
            let b = omega.select(&inner, false);
            let l_omega = frequency_with_kernel(&k, omega.set(), 2.0, &cfg)?.value;
            let l_ball = frequency_with_kernel(&k, &b, 2.0, &cfg)?.value;
            Ok(vec![Check::le(&id, SUB, l_omega, l_ball, sc.cfg.tol_exact)])
        });

        let id = format!("monotonicity.inradius_bound.n{dim}");
        r.run(&id.clone(), BALL, Relation::Le, |sc| {
            let prm = params(dim, s, 2.0, 2.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let h = sc.h(dim);
            let omega = domain(&base_shape(dim), dim, h)?;
            let r_omega = inradius(&omega);
            let l_omega = lambda(&omega, &prm, &cfg)?;
            let l_b1 = lambda(&domain(&ball(1.0), dim, h)?, &prm, &cfg)?;
            Ok(vec![Check::le(&id, BALL, l_omega, l_b1 * r_omega.powf(-prm.alpha()), sc.tol_discrete(dim))
                .with_diagnostic(format!("r_Ω = {r_omega}"))])
        });

        let id = format!("monotonicity.punctured.n{dim}");
        r.run(&id.clone(), PUNCT, Relation::Le, |sc| {
            let prm = params(dim, s, 2.0, 2.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let omega = domain(&base_shape(dim), dim, sc.h(dim))?;
            let k = kernel(&omega, &prm, &cfg)?;
            let punct = puncture(omega.set(), [0.3, 0.2]);
            let a = frequency_with_kernel(&k, omega.set(), 2.0, &cfg)?.value;
            let b = frequency_with_kernel(&k, &punct, 2.0, &cfg)?.value;
            Ok(vec![Check::le(&id, PUNCT, a, b, sc.cfg.tol_exact)])
        });
    }
}

/// `set` without the cell containing `x`.
fn puncture(set: &LatticeSet, x: [f64; 2]) -> LatticeSet {
    let grid = *set.grid();
    let mut out = set.clone();
    if let Some(i) = grid.index_of_global(grid.cell_of_point(x)) {
        out.remove(i);
    }
    out
}

pub fn cap_null(r: &mut Runner) {
    const DESC: &str = "sets of zero capacity do not change the frequency: the relative gap λ(Ω∖cell)/λ(Ω) - 1 shrinks under refinement when sp < N";
    for (dim, s, levels) in [(1, 0.25, 3), (2, 0.5, 3)] {
        let id = format!("cap_null.refinement.n{dim}");
        r.run(&id.clone(), DESC, Relation::Le, |sc| {
            let prm = params(dim, s, 2.0, 2.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let mut gaps = Vec::new();
            for k in 0..levels {
                let h = sc.h(dim) / f64::powi(2.0, k);
                let omega = domain(&base_shape(dim), dim, h)?;
                let kern = kernel(&omega, &prm, &cfg)?;
                let punct = puncture(omega.set(), [0.3, 0.2]);
                let a = frequency_with_kernel(&kern, omega.set(), 2.0, &cfg)?.value;
                let b = frequency_with_kernel(&kern, &punct, 2.0, &cfg)?.value;
                gaps.push((b - a) / a);
            }
            Ok(gaps
                .windows(2)
                .enumerate()
                .map(|(k, w)| {
                    Check::le(&format!("{id}.level{}", k + 1), DESC, w[1], w[0], 0.0)
                        .with_diagnostic(format!("gaps {gaps:?}"))
                })
                .collect())
        });
    }
}
