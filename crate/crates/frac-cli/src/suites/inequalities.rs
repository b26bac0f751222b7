//! Poincaré-type inequalities, the Maz'ya inequality and the torsion function.

use fraccap::constants::{m_const, w_const, wirtinger, ConstantContext, ReferenceConfig};
use fraccap::energy::{average, frac_perimeter, gagliardo, lq_norm, strip_seminorm};
use fraccap::lattice::{LatticeDomain, LatticeFunction, LatticeSet, Shape};
use fraccap::solvers::{cheeger, frequency_from, torsion as torsion_solve, torsion_domain};
use fraccap::FracParams;
use rand::Rng;

use super::capacity::{exact_tol, random_compact, random_interval, CORPUS};
use super::{ball, cap, domain, interval_perimeter, kernel, lambda, params, Runner, Worst};
use crate::corpus::{draw, BumpSpec};
use crate::report::{Check, Relation};
use crate::Result;

/// Euler–Lagrange tolerance for the direct (p = 2) torsion solve.
const TORSION_TOL_DIRECT: f64 = 1e-8;
/// Euler–Lagrange tolerance for the iterative (p ≠ 2) torsion solve.
const TORSION_TOL_ITERATIVE: f64 = 1e-3;

fn torsion_tol(p: f64) -> f64 {
    if p == 2.0 {
        TORSION_TOL_DIRECT
    } else {
        TORSION_TOL_ITERATIVE
    }
}

fn bumps(radius: f64) -> BumpSpec {
    BumpSpec { lo: [-radius, -radius], hi: [radius, radius], max_bumps: 4, signed: false }
}

fn signed(radius: f64) -> BumpSpec {
    BumpSpec { signed: true, ..bumps(radius) }
}

/// `‖u - av(u; region)‖_{L^q(region)}^p`.
fn oscillation(u: &LatticeFunction, region: &LatticeSet, q: f64, p: f64) -> Result<f64> {
    let av = average(u, region)?;
    Ok(lq_norm(&u.map(|v| v - av), region, q)?.powf(p))
}

pub fn poincare(r: &mut Runner) {
    const CHEEGER: &str =
        "sharp L1 Poincaré constant of a ball: h_s(B_1; B_2) = P_s(B_1)/|B_1|, attained by the concentric ball";
    r.run("poincare.cheeger", CHEEGER, Relation::Eq, |sc| {
        let s = 0.5;
        let prm = params(1, s, 1.0, 1.0)?;
        sc.note(&prm);
        let cfg = sc.solver();
        let h = sc.h(1);
        let omega = domain(&ball(2.0), 1, h)?;
        let e = omega.select(&ball(1.0), false);
        let res = cheeger(&e, &omega, s, &cfg)?;
        let oracle = interval_perimeter(s, 1.0) / 2.0;
        let extracted: Vec<usize> = res.minimizer.support();
        let mut stray = 0usize;
        for i in 0..omega.grid().len() {
            if extracted.contains(&i) != e.contains(i) {
                let x = omega.grid().center(i)[0].abs();
                if (x - 1.0).abs() > h {
                    stray += 1;
                }
            }
        }
        let k = kernel(&omega, &prm, &cfg)?;
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        for _ in 0..sc.cfg.corpus_size.min(50) {
            let (a, b) = random_interval(&mut rng, -1.0 + h, 1.0 - h, 3.0 * h);
            let set = omega.select(&Shape::Interval { a, b }, false);
            if set.is_empty() {
                continue;
            }
            let ratio = frac_perimeter(&set, &k)? / set.measure();
            worst.push(Check::le("poincare.cheeger.below_subsets", CHEEGER, res.value, ratio, 1e-9));
        }
        Ok(vec![
            Check::eq("poincare.cheeger.value", CHEEGER, res.value, oracle, sc.tol_discrete(1)),
            Check::eq("poincare.cheeger.optimal_set", CHEEGER, stray as f64, 0.0, 0.0).with_diagnostic(format!(
                "{} cells extracted, {} cells in B_1",
                extracted.len(),
                e.count()
            )),
            worst.finish("poincare.cheeger.below_subsets", CHEEGER, Relation::Le),
        ])
    });

    const PS: &str = "Poincaré-Sobolev on a ball: ‖u‖_q^p ≤ 2 r^α / λ(B_1) · strip seminorm over B_r × R^N";
    r.run("poincare.sobolev", PS, Relation::Le, |sc| {
        let cfg = sc.solver();
        let h = sc.h(1);
        let dom = domain(&ball(1.0), 1, h)?;
        let mut setups = Vec::new();
        for &(s, p, q) in CORPUS {
            let prm = params(1, s, p, q)?;
            sc.note(&prm);
            setups.push((prm, kernel(&dom, &prm, &cfg)?, lambda(&dom, &prm, &cfg)?));
        }
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let (prm, k, lam) = &setups[i % setups.len()];
            let spec = if i % 2 == 0 { bumps(1.0) } else { signed(1.0) };
            let Some(u) = draw(&mut rng, dom.grid(), &spec, dom.set(), None) else { continue };
            let lhs = lq_norm(&u, dom.set(), prm.q)?.powf(prm.p);
            let rhs = 2.0 / lam * strip_seminorm(&u, k, [0.0, 0.0], 1.0)?;
            worst.push(Check::le("poincare.sobolev", PS, lhs, rhs, exact_tol(sc, prm.p)));
        }
        Ok(vec![worst.finish("poincare.sobolev", PS, Relation::Le)])
    });

    const PW: &str = "Poincaré-Wirtinger: ‖u - av(u;B_r)‖_p^p / (r^(sp) strip seminorm) is dilation invariant and at most W_(N,p) s(1-s)";
    r.run("poincare.wirtinger", PW, Relation::Le, |sc| {
        let cfg = sc.solver();
        let h = sc.h(1);
        let t = 2.0;
        let small = 1.0;
        let host = domain(&ball(1.5), 1, h)?;
        let host_t = domain(&ball(1.5 * t), 1, t * h)?;
        let region = host.select(&ball(small), false);
        let region_t = host_t.select(&ball(small * t), false);
        let mut setups = Vec::new();
        for &(s, p, q) in CORPUS {
            let prm = params(1, s, p, q)?;
            sc.note(&prm);
            setups.push((prm, kernel(&host, &prm, &cfg)?, kernel(&host_t, &prm, &cfg)?));
        }
        let mut rng = sc.rng();
        let mut inv = Worst::new();
        let mut bound = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let (prm, k, kt) = &setups[i % setups.len()];
            let Some(u) = draw(&mut rng, host.grid(), &signed(1.5), host.set(), None) else { continue };
            let ut = LatticeFunction::new(*host_t.grid(), u.values().to_vec())?;
            let (s, p) = (prm.s, prm.p);
            let ratio =
                oscillation(&u, &region, p, p)? / (small.powf(s * p) * strip_seminorm(&u, k, [0.0, 0.0], small)?);
            let ratio_t = oscillation(&ut, &region_t, p, p)?
                / ((t * small).powf(s * p) * strip_seminorm(&ut, kt, [0.0, 0.0], t * small)?);
            inv.push(Check::eq("poincare.wirtinger.dilation", PW, ratio_t, ratio, sc.cfg.tol_exact));
            bound.push(Check::le(
                "poincare.wirtinger.bound",
                PW,
                ratio,
                wirtinger(1, p) * s * (1.0 - s),
                sc.tol_discrete(1),
            ));
        }
        Ok(vec![
            inv.finish("poincare.wirtinger.dilation", PW, Relation::Eq),
            bound.finish("poincare.wirtinger.bound", PW, Relation::Le),
        ])
    });

    const PSW: &str =
        "Poincaré-Sobolev-Wirtinger: ‖u - av(u;B_r)‖_q^p ≤ W R^α / λ(B_1) · strip seminorm over B_R × R^N";
    r.run("poincare.sobolev_wirtinger", PSW, Relation::Le, |sc| {
        let cfg = sc.solver();
        let h = sc.h(1);
        let (small, big) = (0.5, 1.0);
        let host = domain(&ball(1.5), 1, h)?;
        let region = host.select(&ball(small), false);
        let mut setups = Vec::new();
        for &(s, p, q) in CORPUS {
            let prm = params(1, s, p, q)?;
            sc.note(&prm);
            let lam = lambda(&domain(&ball(1.0), 1, h)?, &prm, &cfg)?;
            setups.push((prm, kernel(&host, &prm, &cfg)?, lam, w_const(&prm, big / small)?));
        }
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let (prm, k, lam, w) = &setups[i % setups.len()];
            let Some(u) = draw(&mut rng, host.grid(), &signed(1.5), host.set(), None) else { continue };
            let lhs = oscillation(&u, &region, prm.q, prm.p)?;
            let rhs = w * big.powf(prm.alpha()) / lam * strip_seminorm(&u, k, [0.0, 0.0], big)?;
            worst.push(Check::le("poincare.sobolev_wirtinger", PSW, lhs, rhs, sc.tol_discrete(1)));
        }
        Ok(vec![worst.finish("poincare.sobolev_wirtinger", PSW, Relation::Le)])
    });
}

pub fn mazya(r: &mut Runner) {
    const DESC: &str = "Maz'ya-Poincaré-Sobolev: M r^(-N/q) cap(Σ;B_R)^(1/p) ‖u‖_(L^q(B_r)) ≤ (strip seminorm over B_R × R^N)^(1/p) when u = 0 on Σ ⊂ B̄_r";
    r.run("mazya.corpus", DESC, Relation::Le, |sc| {
        let cfg = sc.solver();
        let h = sc.h(1);
        let small = 0.5;
        let host = domain(&ball(2.5), 1, h)?;
        let region = host.select(&ball(small), false);
        let mut setups = Vec::new();
        for &(s, p, q) in CORPUS {
            let prm = params(1, s, p, q)?;
            sc.note(&prm);
            let ctx = ConstantContext::numeric(prm, &ReferenceConfig { solver: cfg, ..ReferenceConfig::default() })?;
            setups.push((prm, kernel(&host, &prm, &cfg)?, ctx));
        }
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        let mut accepted = 0;
        // degenerate draws (u vanishing on B_r) are redrawn
        for _ in 0..20 * sc.cfg.corpus_size {
            if accepted == sc.cfg.corpus_size {
                break;
            }
            let (prm, k, ctx) = &setups[accepted % setups.len()];
            let big = rng.gen_range(small + 2.0 * h..4.0 * small);
            let sigma = random_compact(&mut rng, &host, -small, small);
            let env = host.select(&ball(big), false);
            let Some(u) = draw(&mut rng, host.grid(), &signed(2.5), host.set(), Some(&sigma)) else { continue };
            if u.values().iter().zip(region.mask()).all(|(v, &m)| !m || *v == 0.0) {
                continue;
            }
            let FracParams { p, q, .. } = *prm;
            let c = cap(&sigma, &env, prm, &cfg)?;
            let m = m_const(ctx, big / small)?;
            let lhs = m * small.powf(-1.0 / q) * c.powf(1.0 / p) * lq_norm(&u, &region, q)?;
            let rhs = strip_seminorm(&u, k, [0.0, 0.0], big)?.powf(1.0 / p);
            worst.push(Check::le("mazya.corpus", DESC, lhs, rhs, sc.tol_discrete(1)));
            accepted += 1;
        }
        Ok(vec![worst.finish("mazya.corpus", DESC, Relation::Le)])
    });
}

struct Torsion {
    dom: LatticeDomain,
    inner: LatticeSet,
    v: LatticeFunction,
    energy: f64,
    integral: f64,
    kernel: fraccap::lattice::KernelWeights,
}

fn solve_torsion(
    prm: FracParams,
    small: f64,
    big: f64,
    h: f64,
    cfg: &fraccap::solvers::SolverConfig,
) -> Result<Torsion> {
    let res = torsion_solve(small, big, &prm, h, cfg)?;
    let dom = torsion_domain(big, prm.dim, h)?;
    let k = kernel(&dom, &prm, cfg)?;
    let energy = gagliardo(&res.minimizer, &k)?.value;
    let inner = dom.select(&ball(small), false);
    let integral = inner.cells().iter().map(|&c| res.minimizer.values()[c]).sum::<f64>() * dom.grid().cell_measure();
    Ok(Torsion { dom, inner, v: res.minimizer, energy, integral, kernel: k })
}

pub fn torsion(r: &mut Runner) {
    const EL: &str = "torsion function solves (-Δ_p)^s V = 1 on B_r: testing with V gives ∫_(B_r) V = [V]^p";
    const BOUND: &str = "torsion energy bound [V]^(p(p-1)) ≤ |B_r|^(sp/N - 1 + p) S with the Sobolev constant estimate";
    const CONF: &str = "torsion energy bound in the conformal case: [V]^(p(p-1)) ≤ 1/λ_(p,1)(B_R)";
    const DUAL: &str = "torsion duality: (∫_(B_r) |φ|)^p / [φ]^p ≤ [V]^(p(p-1)) for every φ supported in B_R";
    const POS: &str = "the torsion function is nonnegative";
    let cases = [(1, 0.25, 2.0), (1, 0.4, 1.5), (2, 0.5, 2.0), (1, 0.5, 2.0)];
    for (dim, s, p) in cases {
        let id = format!("torsion.n{dim}.s{}.p{}", s.to_string().replace('.', "_"), p.to_string().replace('.', "_"));
        r.run(&id.clone(), EL, Relation::Eq, |sc| {
            let prm = params(dim, s, p, p)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let t = solve_torsion(prm, 0.5, 1.0, sc.h(dim), &cfg)?;
            let tol = torsion_tol(p);
            let mut out = vec![Check::eq(&format!("{id}.euler_lagrange"), EL, t.integral, t.energy, tol)];
            let lhs = t.energy.powf(p - 1.0);
            if let Some(crit) = prm.sobolev_exponent() {
                let res = frequency_from(&t.kernel, t.dom.set(), crit, &t.v, &cfg)?;
                let sob = 1.0 / res.value;
                let rhs = t.inner.measure().powf(s * p / dim as f64 - 1.0 + p) * sob;
                out.push(Check::le(&format!("{id}.bound"), BOUND, lhs, rhs, tol).with_diagnostic(format!("S ≥ {sob}")));
            } else if prm.is_conformal() {
                let res = frequency_from(&t.kernel, t.dom.set(), 1.0, &t.v, &cfg)?;
                out.push(Check::le(&format!("{id}.bound"), CONF, lhs, 1.0 / res.value, tol));
            }
            let minv = t.v.values().iter().cloned().fold(f64::INFINITY, f64::min);
            out.push(Check::le(&format!("{id}.nonnegative"), POS, 0.0, minv, 0.0));

            let mut rng = sc.rng();
            let mut worst = Worst::new();
            for i in 0..sc.cfg.corpus_size {
                let spec = if i % 2 == 0 { bumps(1.0) } else { signed(1.0) };
                let Some(phi) = draw(&mut rng, t.dom.grid(), &spec, t.dom.set(), None) else { continue };
                let e = gagliardo(&phi, &t.kernel)?.value;
                let mass: f64 =
                    t.inner.cells().iter().map(|&c| phi.values()[c].abs()).sum::<f64>() * t.dom.grid().cell_measure();
                worst.push(Check::le(&format!("{id}.duality"), DUAL, mass.powf(p) / e, lhs, tol));
            }
            out.push(worst.finish(&format!("{id}.duality"), DUAL, Relation::Le));
            Ok(out)
        });
    }
}
