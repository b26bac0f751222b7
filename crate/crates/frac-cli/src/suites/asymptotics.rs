//! Limits as s → 0, s → 1, γ → 1 and R/r → ∞.

use std::f64::consts::PI;

use fraccap::constants::{
    asymptotic_probe, c_subcrit, expected_exponent, plateau_drift, Args, ConstantContext, ProbeVariable,
    ReferenceConfig,
};
use fraccap::energy::strip_seminorm;
use fraccap::lattice::LatticeFunction;
use fraccap::solvers::local_frequency;
use fraccap::FracParams;

use super::{ball, domain, interval, kernel, lambda, params, Runner, Scope};
use crate::report::{Check, Relation};
use crate::Result;

const SMALL_S: [f64; 2] = [0.05, 0.1];
const LARGE_S: [f64; 2] = [0.9, 0.95];

fn any_params(s: f64, p: f64, q: f64) -> Result<FracParams> {
    if s * p > 1.0 {
        Ok(FracParams::supercritical(1, s, p, q)?)
    } else {
        params(1, s, p, q)
    }
}

/// `λ^s_{2,2}((0, 1))` along `grid`.
fn interval_lambdas(sc: &mut Scope, grid: &[f64]) -> Result<Vec<f64>> {
    let cfg = sc.solver();
    let dom = domain(&interval(0.0, 1.0), 1, sc.h(1))?;
    grid.iter()
        .map(|&s| {
            let prm = any_params(s, 2.0, 2.0)?;
            sc.note(&prm);
            lambda(&dom, &prm, &cfg)
        })
        .collect()
}

fn probe_checks(
    id: &str,
    desc: &str,
    tol: f64,
    report: fraccap::Result<fraccap::constants::TrendReport>,
) -> Result<Vec<Check>> {
    let rep = report?;
    let note = format!("grid {:?}, values {:?}, fitted exponent {}", rep.grid, rep.values, rep.fitted_exponent);
    Ok(vec![
        Check::plateau(&format!("{id}.plateau"), desc, rep.drift, tol).with_diagnostic(note.clone()),
        Check::eq(&format!("{id}.exponent"), desc, rep.fitted_exponent, rep.expected_exponent, 0.15)
            .with_diagnostic(note),
    ])
}

fn numeric(sc: &Scope, prm: FracParams) -> fraccap::Result<ConstantContext> {
    ConstantContext::numeric(prm, &ReferenceConfig { solver: sc.solver(), ..ReferenceConfig::default() })
}

pub fn asymptotics(r: &mut Runner) {
    const S0: &str = "s λ^s stays bounded and positive as s → 0";
    r.run("asymptotics.lambda.s_to_0", S0, Relation::Plateau, |sc| {
        let values = interval_lambdas(sc, &SMALL_S)?;
        let drift = plateau_drift(&SMALL_S, &values, -1.0);
        Ok(vec![Check::plateau("asymptotics.lambda.s_to_0", S0, drift, sc.cfg.tol_plateau)
            .with_diagnostic(format!("λ = {values:?}"))])
    });

    const S1: &str = "(1-s) λ^s converges to K λ_p as s → 1";
    const K: &str = "the limit constant K = lim (1-s) λ^s / λ_2 equals 1 for N = 1, p = 2; estimated against π² and against the discrete local frequency";
    r.run("asymptotics.lambda.s_to_1", S1, Relation::Plateau, |sc| {
        let values = interval_lambdas(sc, &LARGE_S)?;
        let measures: Vec<f64> = LARGE_S.iter().map(|s| 1.0 - s).collect();
        let drift = plateau_drift(&measures, &values, -1.0);
        let last = LARGE_S.len() - 1;
        let scaled = measures[last] * values[last];
        let k_hat = scaled / (PI * PI);
        // the cell-centred local scheme sees an interval of length 1 + h, so
        // the two routes are compared on a finer lattice
        let fine = domain(&interval(0.0, 1.0), 1, sc.h(1) / 4.0)?;
        let s = LARGE_S[last];
        let fine_scaled = (1.0 - s) * lambda(&fine, &any_params(s, 2.0, 2.0)?, &sc.solver())?;
        let local = local_frequency(&fine, 2.0, &sc.solver())?.value;
        let k_local = fine_scaled / local;
        let k_fine = fine_scaled / (PI * PI);
        Ok(vec![
            Check::plateau("asymptotics.lambda.s_to_1", S1, drift, sc.cfg.tol_plateau)
                .with_diagnostic(format!("λ = {values:?}")),
            Check::eq("asymptotics.lambda.k_hat", K, k_hat, 1.0, sc.cfg.tol_plateau),
            Check::eq("asymptotics.lambda.k_hat_routes", K, k_local, k_fine, sc.tol_discrete(1))
                .with_diagnostic(format!("at h/4: local λ_2 = {local}, (1-s) λ^s = {fine_scaled}")),
        ])
    });

    const STRIP: &str = "the strip seminorm scales like 1/s as s → 0 and like 1/(1-s) as s → 1";
    for (name, grid) in [("s_to_0", SMALL_S), ("s_to_1", LARGE_S)] {
        let id = format!("asymptotics.strip.{name}");
        r.run(&id.clone(), STRIP, Relation::Plateau, |sc| {
            let cfg = sc.solver();
            let host = domain(&ball(1.5), 1, sc.h(1))?;
            let u = LatticeFunction::from_fn(*host.grid(), |x| (1.0 - x[0] * x[0]).max(0.0));
            let mut values = Vec::new();
            for &s in &grid {
                let prm = any_params(s, 2.0, 2.0)?;
                sc.note(&prm);
                values.push(strip_seminorm(&u, &kernel(&host, &prm, &cfg)?, [0.0, 0.0], 1.0)?);
            }
            let measures: Vec<f64> = grid.iter().map(|&s| if name == "s_to_0" { s } else { 1.0 - s }).collect();
            let drift = plateau_drift(&measures, &values, -1.0);
            Ok(
                vec![
                    Check::plateau(&id, STRIP, drift, sc.cfg.tol_plateau).with_diagnostic(format!("values {values:?}"))
                ],
            )
        });
    }

    const SIGMA: &str = "the lower-bound constant σ behaves like 1/s as s → 0";
    // the prescribed grid, then one a decade closer to the limit
    for (id, grid) in
        [("asymptotics.sigma.s_to_0", [0.05, 0.1, 0.2]), ("asymptotics.sigma.s_to_0.deep", [0.005, 0.01, 0.02])]
    {
        r.run(id, SIGMA, Relation::Plateau, |sc| {
            let base = params(1, 0.1, 2.0, 2.0)?;
            sc.note(&base);
            let expected = expected_exponent("sigma", ProbeVariable::S, &base).unwrap_or(-1.0);
            let rep = asymptotic_probe(
                "sigma",
                |s| Ok((numeric(sc, FracParams { s, ..base })?, Args::default())),
                ProbeVariable::S,
                &grid,
                expected,
            );
            probe_checks(id, SIGMA, sc.cfg.tol_plateau, rep)
        });
    }

    const CG: &str = "for p = 1 the upper-bound constant C behaves like 1/(1-γ) as γ → 1";
    r.run("asymptotics.c_upper.gamma_to_1", CG, Relation::Plateau, |sc| {
        let prm = params(1, 0.5, 1.0, 1.0)?;
        sc.note(&prm);
        let ctx = numeric(sc, prm)?;
        let expected = expected_exponent("C_upper", ProbeVariable::Gamma, &prm).unwrap_or(-1.0);
        let rep = asymptotic_probe(
            "C_upper",
            |g| Ok((ctx, Args::gamma(g))),
            ProbeVariable::Gamma,
            &[0.9, 0.95, 0.99],
            expected,
        );
        probe_checks("asymptotics.c_upper.gamma_to_1", CG, sc.cfg.tol_plateau, rep)
    });

    const CS: &str = "for p = 1 the upper-bound constant C behaves like 1/s as s → 0";
    for (id, grid) in
        [("asymptotics.c_upper.s_to_0", [0.05, 0.1, 0.2]), ("asymptotics.c_upper.s_to_0.deep", [0.005, 0.01, 0.02])]
    {
        r.run(id, CS, Relation::Plateau, |sc| {
            let base = params(1, 0.1, 1.0, 1.0)?;
            sc.note(&base);
            let expected = expected_exponent("C_upper", ProbeVariable::S, &base).unwrap_or(-1.0);
            let rep = asymptotic_probe(
                "C_upper",
                |s| Ok((numeric(sc, FracParams { s, ..base })?, Args::gamma(0.5))),
                ProbeVariable::S,
                &grid,
                expected,
            );
            probe_checks(id, CS, sc.cfg.tol_plateau, rep)
        });
    }

    const M: &str = "the Maz'ya constant M decays like (R/r)^(-N/q) as R/r → ∞";
    for (id, grid) in
        [("asymptotics.m.ratio", [10.0, 20.0, 40.0]), ("asymptotics.m.ratio.deep", [160.0, 640.0, 2560.0])]
    {
        r.run(id, M, Relation::Plateau, |sc| {
            let prm = params(1, 0.25, 2.0, 2.0)?;
            sc.note(&prm);
            let ctx = numeric(sc, prm)?;
            let expected = expected_exponent("M", ProbeVariable::Ratio, &prm).unwrap_or(-0.5);
            let rep = asymptotic_probe("M", |t| Ok((ctx, Args::ratio(t))), ProbeVariable::Ratio, &grid, expected);
            probe_checks(id, M, sc.cfg.tol_plateau, rep)
        });
    }

    const POS: &str =
        "s(1-s) λ^s ≥ c (N - sp)^(p-1) |Ω|^(p/p* - p/q): the implied constant c stays positive along the s grid";
    r.run("asymptotics.positivity", POS, Relation::Le, |sc| {
        let grid = [0.05, 0.1, 0.2, 0.3];
        let values = interval_lambdas(sc, &grid)?;
        let mut implied = Vec::new();
        for (&s, &lam) in grid.iter().zip(&values) {
            let prm = params(1, s, 2.0, 2.0)?;
            implied.push(s * (1.0 - s) * lam / c_subcrit(&prm, 1.0, 1.0)?);
        }
        let least = implied.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(vec![Check::le("asymptotics.positivity", POS, 0.0, least, 0.0)
            .with_diagnostic(format!("implied c along s = {grid:?}: {implied:?}"))])
    });
}
