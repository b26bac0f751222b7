//! Capacity identities, the randomized capacity corpus and the comparison
//! of fractional and local capacitary inradii.

use fraccap::constants::{beta, c_cap_balls, c_holder, ConstantContext, ReferenceConfig};
use fraccap::energy::{frac_perimeter, gagliardo};
use fraccap::geometry::{capacitary_inradius, inradius, SearchConfig};
use fraccap::lattice::{LatticeDomain, LatticeSet, Shape};
use fraccap::solvers::{local_capacity, local_frequency};
use fraccap::FracParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::scaling::ITERATIVE_TOL;
use super::{ball, cap, domain, interval, interval_perimeter, kernel, lambda, params, rect, Runner, Scope, Worst};
use crate::corpus::{draw, BumpSpec};
use crate::report::{Check, Relation};
use crate::Result;

/// The closed-form perimeter is matched to 1%.
pub(crate) const PERIMETER_TOL: f64 = 0.01;

/// Parameter tuples `(s, p, q)` cycled through by the one-dimensional corpora.
pub(crate) const CORPUS: &[(f64, f64, f64)] = &[(0.5, 2.0, 2.0), (0.25, 2.0, 3.0), (0.4, 1.5, 1.5)];

pub(crate) fn exact_tol(sc: &Scope, p: f64) -> f64 {
    if p == 2.0 {
        sc.cfg.tol_exact
    } else {
        ITERATIVE_TOL
    }
}

/// A random closed interval `[a, b] ⊂ [lo, hi]` with `b - a ≥ min_len`.
pub(crate) fn random_interval(rng: &mut ChaCha8Rng, lo: f64, hi: f64, min_len: f64) -> (f64, f64) {
    let len = rng.gen_range(min_len..(hi - lo).max(min_len * 1.0001));
    let a = rng.gen_range(lo..(hi - len).max(lo + 1e-12));
    (a, (a + len).min(hi))
}

/// Σ as one or two random closed intervals in `[lo, hi]`, on `host`.
pub(crate) fn random_compact(rng: &mut ChaCha8Rng, host: &LatticeDomain, lo: f64, hi: f64) -> LatticeSet {
    let h = host.h();
    let pieces = rng.gen_range(1..=2);
    let mut set = LatticeSet::empty(*host.grid());
    for _ in 0..pieces {
        let (a, b) = random_interval(rng, lo, hi, 2.0 * h);
        for i in host.select(&Shape::Interval { a, b }, true).cells() {
            set.insert(i);
        }
    }
    set
}

pub fn cap_identities(r: &mut Runner) {
    const ORACLE: &str = "fractional perimeter of an interval matches the closed form 4 (2r)^(1-s) / (s(1-s))";
    for s in [0.25, 0.5, 0.75] {
        let id = format!("cap_identities.perimeter_oracle.s{}", s.to_string().replace('.', "_"));
        r.run(&id.clone(), ORACLE, Relation::Eq, |sc| {
            let prm = params(1, s, 1.0, 1.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let dom = domain(&interval(-1.0, 1.0), 1, sc.h(1))?;
            let per = frac_perimeter(dom.set(), &kernel(&dom, &prm, &cfg)?)?;
            Ok(vec![Check::eq(&id, ORACLE, per, interval_perimeter(s, 1.0), PERIMETER_TOL)])
        });
    }

    const CAP_PER: &str = "capacity of a closed convex set equals its fractional perimeter when p = 1";
    for (dim, s) in [(1, 0.25), (1, 0.5), (1, 0.75), (2, 0.5)] {
        let id = format!("cap_identities.cap_perimeter.n{dim}.s{}", s.to_string().replace('.', "_"));
        r.run(&id.clone(), CAP_PER, Relation::Eq, |sc| {
            let prm = params(dim, s, 1.0, 1.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let env = domain(&ball(1.0), dim, sc.h(dim))?;
            let sigma = env.select(&ball(0.5), true);
            let c = cap(&sigma, env.set(), &prm, &cfg)?;
            let per = frac_perimeter(&sigma, &kernel(&env, &prm, &cfg)?)?;
            let tol = sc.tol_discrete(dim);
            let mut out = vec![Check::eq(&format!("{id}.discrete"), CAP_PER, c, per, tol)];
            if dim == 1 {
                out.push(Check::eq(&format!("{id}.analytic"), CAP_PER, c, interval_perimeter(s, 0.5), tol));
            }
            Ok(out)
        });
    }

    corpus(r);
}

struct Tuple {
    prm: FracParams,
    env: LatticeDomain,
    lambda_pp: f64,
    local_lambda: f64,
    ctx: ConstantContext,
}

fn tuples(sc: &mut Scope) -> Result<Vec<Tuple>> {
    let cfg = sc.solver();
    let h = sc.h(1);
    let mut out = Vec::new();
    for &(s, p, q) in CORPUS {
        let prm = params(1, s, p, q)?;
        sc.note(&prm);
        let env = domain(&ball(1.0), 1, h)?;
        let lambda_pp = lambda(&env, &FracParams { q: p, ..prm }, &cfg)?;
        let local_lambda = local_frequency(&env, p, &cfg)?.value;
        let ctx = ConstantContext::numeric(prm, &ReferenceConfig { solver: cfg, ..ReferenceConfig::default() })?;
        out.push(Tuple { prm, env, lambda_pp, local_lambda, ctx });
    }
    Ok(out)
}

fn corpus(r: &mut Runner) {
    const VOL: &str = "capacity dominates volume times frequency: |Σ| λ_p(E) ≤ cap(Σ; E)";
    r.run("cap_identities.corpus.cap_vol", VOL, Relation::Le, |sc| {
        let ts = tuples(sc)?;
        let cfg = sc.solver();
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let t = &ts[i % ts.len()];
            let h = t.env.h();
            let sigma = random_compact(&mut rng, &t.env, -1.0 + 3.0 * h, 1.0 - 3.0 * h);
            let c = cap(&sigma, t.env.set(), &t.prm, &cfg)?;
            worst.push(Check::le(
                "cap_identities.corpus.cap_vol",
                VOL,
                sigma.measure() * t.lambda_pp,
                c,
                exact_tol(sc, t.prm.p),
            ));
        }
        Ok(vec![worst.finish("cap_identities.corpus.cap_vol", VOL, Relation::Le)])
    });

    const CAPCAP: &str =
        "fractional capacity is bounded by local capacity: cap_s(Σ;E) ≤ c/(s(1-s)) λ_p(E)^(s-1) cap_p(Σ;E)";
    r.run("cap_identities.corpus.cap_cap", CAPCAP, Relation::Le, |sc| {
        let ts = tuples(sc)?;
        let cfg = sc.solver();
        let mut rng = sc.rng();
        let mut worst = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let t = &ts[i % ts.len()];
            let h = t.env.h();
            let sigma = random_compact(&mut rng, &t.env, -1.0 + 3.0 * h, 1.0 - 3.0 * h);
            let FracParams { s, p, .. } = t.prm;
            let c = cap(&sigma, t.env.set(), &t.prm, &cfg)?;
            let local = local_capacity(&sigma, t.env.set(), p, &cfg)?.value;
            let rhs = c_holder(1, p) / (s * (1.0 - s)) * t.local_lambda.powf(s - 1.0) * local;
            worst.push(Check::le("cap_identities.corpus.cap_cap", CAPCAP, c, rhs, sc.tol_discrete(1)));
        }
        Ok(vec![worst.finish("cap_identities.corpus.cap_cap", CAPCAP, Relation::Le)])
    });

    const BALLS: &str = "capacity with respect to balls: cap(Σ;B_R) ≤ cap(Σ;B_r) ≤ C(N,p,s,R/d) cap(Σ;B_R)";
    r.run("cap_identities.corpus.cap_balls", BALLS, Relation::Le, |sc| {
        let ts = tuples(sc)?;
        let cfg = sc.solver();
        let mut rng = sc.rng();
        let mut left = Worst::new();
        let mut right = Worst::new();
        let small = 0.5;
        for i in 0..sc.cfg.corpus_size {
            let t = &ts[i % ts.len()];
            let h = t.env.h();
            let big = rng.gen_range(small + 2.0 * h..1.0 - h);
            let b_r = t.env.select(&ball(small), false);
            let b_big = t.env.select(&ball(big), false);
            let sigma = random_compact(&mut rng, &t.env, -small + 2.0 * h, small - 2.0 * h);
            let reach = sigma.cells().iter().map(|&c| t.env.grid().center(c)[0].abs() + 0.5 * h).fold(0.0, f64::max);
            let d = small - reach;
            let c_small = cap(&sigma, &b_r, &t.prm, &cfg)?;
            let c_big = cap(&sigma, &b_big, &t.prm, &cfg)?;
            let constant = c_cap_balls(&t.ctx, big / d)?;
            left.push(Check::le("cap_identities.corpus.cap_balls.left", BALLS, c_big, c_small, exact_tol(sc, t.prm.p)));
            right.push(Check::le(
                "cap_identities.corpus.cap_balls.right",
                BALLS,
                c_small,
                constant * c_big,
                sc.tol_discrete(1),
            ));
        }
        Ok(vec![
            left.finish("cap_identities.corpus.cap_balls.left", BALLS, Relation::Le),
            right.finish("cap_identities.corpus.cap_balls.right", BALLS, Relation::Le),
        ])
    });

    const TRUNC: &str = "truncation to [0, 1] never increases the Gagliardo energy";
    r.run("cap_identities.corpus.truncation", TRUNC, Relation::Le, |sc| {
        let cfg = sc.solver();
        let h = sc.h(1);
        let mut rng = sc.rng();
        let env = domain(&ball(1.0), 1, h)?;
        let mut kernels = Vec::new();
        for &(s, p, q) in CORPUS.iter().chain([(0.5, 1.0, 1.0)].iter()) {
            let prm = params(1, s, p, q)?;
            sc.note(&prm);
            kernels.push(kernel(&env, &prm, &cfg)?);
        }
        let spec = BumpSpec { lo: [-1.0, 0.0], hi: [1.0, 0.0], max_bumps: 4, signed: true };
        let mut worst = Worst::new();
        for i in 0..sc.cfg.corpus_size {
            let k = &kernels[i % kernels.len()];
            let Some(u) = draw(&mut rng, env.grid(), &spec, env.set(), None) else { continue };
            let u = u.map(|v| 2.5 * v);
            let clamped = u.map(|v| v.clamp(0.0, 1.0));
            let before = gagliardo(&u, k)?.value;
            let after = gagliardo(&clamped, k)?.value;
            worst.push(Check::le("cap_identities.corpus.truncation", TRUNC, after, before, sc.cfg.tol_exact));
        }
        Ok(vec![worst.finish("cap_identities.corpus.truncation", TRUNC, Relation::Le)])
    });
}

pub fn capin_compare(r: &mut Runner) {
    const DESC: &str =
        "local and fractional capacitary inradii compare: R_(p,βγ) ≤ R^s_(p,γ), and both dominate the inradius";
    for dim in [1, 2] {
        let id = format!("capin_compare.n{dim}");
        r.run(&id.clone(), DESC, Relation::Le, |sc| {
            let prm = params(dim, 0.5, 2.0, 2.0)?;
            sc.note(&prm);
            let cfg = sc.solver();
            let shape = if dim == 1 { interval(0.0, 1.0) } else { rect(0.0, 0.0, 1.0, 0.5) };
            let omega = domain(&shape, dim, sc.h(dim))?;
            let ctx = ConstantContext::numeric(prm, &ReferenceConfig { solver: cfg, ..ReferenceConfig::default() })?;
            let b = beta(&ctx)?;
            let gamma = 0.5 * (1.0f64).min(1.0 / b);
            let search = SearchConfig { solver: cfg, ..SearchConfig::default() };
            let frac = capacitary_inradius(&omega, &prm, gamma, &search)?;
            let local = capacitary_inradius(&omega, &prm, b * gamma, &SearchConfig { local: true, ..search })?;
            let r_omega = inradius(&omega);
            let note = format!(
                "β = {b}, γ = {gamma}, fractional [{}, {}], local [{}, {}]",
                frac.r_lower, frac.r_upper, local.r_lower, local.r_upper
            );
            Ok(vec![
                Check::le(&format!("{id}.local_below_fractional"), DESC, local.r_lower, frac.r_upper, 0.0)
                    .with_diagnostic(note.clone()),
                Check::le(&format!("{id}.inradius_below_fractional"), DESC, r_omega, frac.r_lower, 1e-12)
                    .with_diagnostic(note.clone()),
                Check::le(&format!("{id}.inradius_below_local"), DESC, r_omega, local.r_lower, 1e-12)
                    .with_diagnostic(note),
            ])
        });
    }
}
