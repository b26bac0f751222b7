//! The two-sided frequency bound by the capacitary inradius, and the slab
//! example.

use fraccap::constants::{
    c_upper, gamma0, gamma0_slab, omega as unit_ball_volume, phi_slab, phi_slab_inv, sigma, slab_rhs, ConstantContext,
    ReferenceConfig,
};
use fraccap::geometry::{capacitary_inradius, inradius, Ball, Negligibility, SearchConfig};
use fraccap::lattice::{LatticeDomain, Shape};
use fraccap::FracParams;

use super::{ball, domain, interval, lambda, params, rect, Runner};
use crate::report::{Check, Relation};
use crate::Result;

fn punctured_rect(h: f64) -> Result<LatticeDomain> {
    let base = domain(&rect(0.0, 0.0, 1.0, 0.5), 2, h)?;
    let grid = *base.grid();
    let mut set = base.set().clone();
    if let Some(i) = grid.index_of_global(grid.cell_of_point([0.5, 0.25])) {
        set.remove(i);
    }
    Ok(LatticeDomain::from_set(set)?)
}

pub fn sandwich(r: &mut Runner) {
    const LOWER: &str = "lower bound by the capacitary inradius: γ σ R^(-α) ≤ λ, with R the heuristic upper bracket";
    const UPPER: &str = "upper bound by the capacitary inradius: λ ≤ C R^(-α), with R the certified lower bracket";
    const INR: &str = "the inradius never exceeds the capacitary inradius";
    let cases: [(&str, usize, f64); 4] =
        [("interval", 1, 2.0), ("interval_p1", 1, 1.0), ("rect", 2, 2.0), ("punctured_rect", 2, 2.0)];
    for (name, dim, p) in cases {
        let id = format!("sandwich.{name}");
        r.run(&id.clone(), UPPER, Relation::Le, |sc| {
            let prm = params(dim, 0.5, p, p)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let h = sc.h(dim);
            let omega = match name {
                "punctured_rect" => punctured_rect(h)?,
                "rect" => domain(&rect(0.0, 0.0, 1.0, 0.5), 2, h)?,
                _ => domain(&interval(0.0, 1.0), 1, h)?,
            };
            let ctx = ConstantContext::numeric(prm, &ReferenceConfig { solver: cfg, ..ReferenceConfig::default() })?;
            let g0 = gamma0(&ctx)?;
            let gamma = sc.cfg.gamma_safety * g0;
            let sig = sigma(&ctx)?;
            let big_c = c_upper(&ctx, gamma)?;
            let search = SearchConfig { solver: cfg, ..SearchConfig::default() };
            let inr = capacitary_inradius(&omega, &prm, gamma, &search)?;
            let lam = lambda(&omega, &prm, &cfg)?;
            let alpha = prm.alpha();
            let note = format!(
                "γ0 ≈ {g0} (estimate), γ = {gamma}, σ = {sig}, C = {big_c}, R in [{}, {}], {} tests",
                inr.r_lower, inr.r_upper, inr.samples
            );
            let tol = sc.tol_discrete(dim);
            Ok(vec![
                Check::le(&format!("{id}.lower"), LOWER, gamma * sig * inr.r_upper.powf(-alpha), lam, tol)
                    .with_diagnostic(note.clone()),
                Check::le(&format!("{id}.upper"), UPPER, lam, big_c * inr.r_lower.powf(-alpha), tol)
                    .with_diagnostic(note),
                Check::le(&format!("{id}.inradius"), INR, inradius(&omega), inr.r_lower, 1e-12),
            ])
        });
    }

    const GROW: &str = "frequency tends to zero as the inradius grows: λ((0, L)) decreases like L^(-α)";
    r.run("sandwich.unbounded_trend", GROW, Relation::Le, |sc| {
        let prm = params(1, 0.25, 2.0, 2.0)?;
        sc.note(&prm);
        let cfg = sc.solver();
        let lengths = [1.0, 2.0, 4.0];
        let mut values = Vec::new();
        for l in lengths {
            values.push(lambda(&domain(&interval(0.0, l), 1, sc.h(1))?, &prm, &cfg)?);
        }
        let mut out: Vec<Check> = values
            .windows(2)
            .enumerate()
            .map(|(k, w)| Check::le(&format!("sandwich.unbounded_trend.step{}", k + 1), GROW, w[1], w[0], 0.0))
            .collect();
        let drift = fraccap::constants::plateau_drift(&lengths, &values, -prm.alpha());
        out.push(Check::plateau("sandwich.unbounded_trend.rate", GROW, drift, sc.tol_discrete(1)));
        Ok(out)
    });
}

/// Estimate of `liminf_{s→0} s λ^s_p(B_2)`: the smaller of `s λ^s_{p,p}(B_2)`
/// at `s = 0.05` and `s = 0.1`.
pub(crate) fn s_lambda_limit(prm: &FracParams, refs: &ReferenceConfig) -> Result<f64> {
    let h = refs.h.unwrap_or(if prm.dim == 1 { 1.0 / 64.0 } else { 1.0 / 12.0 });
    let b2 = domain(&ball(2.0), prm.dim, h)?;
    let mut limit = f64::INFINITY;
    for t in [0.05, 0.1] {
        limit = limit.min(t * lambda(&b2, &FracParams { s: t, q: prm.p, ..*prm }, &refs.solver)?);
    }
    Ok(limit)
}

pub fn slab(r: &mut Runner) {
    const BALLS: &str =
        "in the slab R^(N-1) × (-1, 1) every negligible ball of radius r > 1 has φ_N(r) ≤ the volume bound";
    const RADIUS: &str = "in the slab the capacitary inradius is at most φ_N^(-1) of the volume bound";
    r.run("slab", RADIUS, Relation::Le, |sc| {
        let dim = 2;
        let s = 0.25;
        let prm = params(dim, s, 2.0, 2.0)?;
        sc.note(&prm);
        let cfg = sc.solver();
        let h = sc.h(dim);
        let slab_shape = Shape::Slab { half_length: 8.0, half_width: 1.0 };
        let omega = domain(&slab_shape, dim, h)?;
        let refs = ReferenceConfig { solver: cfg, ..ReferenceConfig::default() };
        let mut ctx = ConstantContext::numeric(prm, &refs)?;
        ctx.ref_s_lambda_limit = Some(s_lambda_limit(&prm, &refs)?);
        let g0 = gamma0_slab(&ctx)?;
        let max_radius = 4.0;
        let search =
            SearchConfig { solver: cfg, center_stride: 4, max_radius: Some(max_radius), ..SearchConfig::default() };
        let mut tester = Negligibility::new(&prm, &search)?;
        let mut out = Vec::new();
        for factor in [0.25, 0.5] {
            let gamma = factor * g0;
            let tag = format!("slab.gamma{}", factor.to_string().replace('.', "_"));
            let rhs = slab_rhs(&ctx, gamma)?;
            let mut found = 0usize;
            let mut violations = 0usize;
            let mut worst_phi = 0.0f64;
            let steps = (max_radius / (0.5 * h)).floor() as usize;
            let ys: Vec<f64> =
                (0..).map(|j| (j as f64 + 0.5) * h).take_while(|y| *y < 1.0).flat_map(|y| [y, -y]).collect();
            for &y in &ys {
                for k in 1..=steps {
                    let radius = k as f64 * 0.5 * h;
                    if radius <= 1.0 {
                        continue;
                    }
                    let res = tester.test(&omega, Ball { center: [0.0, y], radius }, gamma)?;
                    if res.negligible {
                        found += 1;
                        let phi = phi_slab(dim, radius)?;
                        worst_phi = worst_phi.max(phi);
                        if phi > rhs * (1.0 + sc.tol_discrete(dim)) {
                            violations += 1;
                        }
                    }
                }
            }
            let mut balls = Check::le(&format!("{tag}.negligible_balls"), BALLS, worst_phi, rhs, sc.tol_discrete(dim))
                .with_diagnostic(format!("γ0_slab ≈ {g0}, γ = {gamma}, {found} negligible balls with r > 1"));
            balls.samples = Some(found);
            balls.violations = Some(violations);
            balls.pass = balls.pass && violations == 0;
            out.push(balls);

            let inr = fraccap::geometry::search(&mut tester, &omega, gamma, &search)?;
            let top = unit_ball_volume(dim);
            let bound = if rhs < top { phi_slab_inv(dim, rhs)? } else { f64::INFINITY };
            out.push(
                Check::le(&format!("{tag}.inradius"), RADIUS, inr.r_lower, bound, sc.tol_discrete(dim))
                    .with_diagnostic(format!("volume bound {rhs}, r_lower {}, witness {:?}", inr.r_lower, inr.witness)),
            );
        }
        Ok(out)
    });
}
