//! End-to-end acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use frac_cli::suites::{run_suite, RunOptions};
use frac_cli::{Config, Report};
use fraccap::energy::frac_perimeter;
use fraccap::lattice::{KernelWeights, LatticeDomain, NearField, Shape};
use fraccap::FracParams;

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Runs the checks of `suite` whose ids start with one of `prefixes`.
fn checks(suite: &str, prefixes: &[&str], cfg: &Config) -> (Vec<frac_cli::Check>, Duration) {
    let start = Instant::now();
    let mut all = Vec::new();
    for p in prefixes {
        let opts = RunOptions { seed: 7, only: Some(p.to_string()), ..RunOptions::default() };
        match run_suite(suite, cfg, opts) {
            Ok(r) => all.extend(r.checks),
            Err(e) => all.push(frac_cli::Check::failed(p, "suite error", frac_cli::Relation::Le, e.to_string())),
        }
    }
    (all, start.elapsed())
}

fn summarise(checks: &[frac_cli::Check], elapsed: Duration, budget: Duration) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    let pass = !checks.is_empty() && failed.is_empty() && elapsed < budget;
    let mut detail =
        format!("{} checks, {} failed, {} (budget {})", checks.len(), failed.len(), secs(elapsed), secs(budget));
    if !failed.is_empty() {
        detail += &format!("; failing: {}", failed.join(", "));
    }
    Outcome { pass, detail }
}

fn perimeter_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for s in [0.25, 0.5, 0.75] {
        let start = Instant::now();
        let value = (|| -> fraccap::Result<f64> {
            let dom = LatticeDomain::from_shape(&Shape::Interval { a: -1.0, b: 1.0 }, 1, 1.0 / 256.0)?;
            let k = KernelWeights::assemble(dom.grid(), &FracParams::new(1, s, 1.0, 1.0)?, 2, NearField::Auto)?;
            frac_perimeter(dom.set(), &k)
        })();
        slowest = slowest.max(start.elapsed());
        let Ok(value) = value else {
            return Outcome { pass: false, detail: format!("s = {s}: {:?}", value.err()) };
        };
        // ∫∫_{(-1,1) × (-1,1)^c} |x - y|^{-1-s} in closed form
        let exact = 4.0 * 2f64.powf(1.0 - s) / (s * (1.0 - s));
        worst = worst.max((value - exact).abs() / exact);
    }
    Outcome {
        pass: worst < 0.01 && slowest < Duration::from_secs(5),
        detail: format!("worst relative error {worst:.2e} (limit 1e-2), slowest {}", secs(slowest)),
    }
}

fn corpus() -> Outcome {
    let cfg = Config::default();
    let (mut all, t1) = checks("cap_identities", &["cap_identities.corpus"], &cfg);
    let (m, t2) = checks("mazya", &["mazya.corpus"], &cfg);
    let (p, t3) = checks("poincare", &["poincare.sobolev"], &cfg);
    all.extend(m);
    all.extend(p.into_iter().filter(|c| c.id == "poincare.sobolev"));
    let short: Vec<String> = all
        .iter()
        .filter(|c| c.samples.unwrap_or(0) < cfg.corpus_size || c.violations.unwrap_or(1) != 0)
        .map(|c| format!("{} ({:?} samples, {:?} violations)", c.id, c.samples, c.violations))
        .collect();
    let mut out = summarise(&all, t1 + t2 + t3, Duration::from_secs(300));
    if !short.is_empty() {
        out.pass = false;
        out.detail += &format!("; incomplete: {}", short.join(", "));
    }
    out
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_frac"))
            .args(["verify", "--suite", "all", "--seed", "7"])
            .output()
            .map(|o| o.stdout)
    };
    match (run(), run()) {
        (Ok(a), Ok(b)) => {
            let report = std::str::from_utf8(&a).ok().and_then(|t| Report::from_json(t).ok());
            let identical = !a.is_empty() && a == b;
            let note = match &report {
                Some(r) => format!("{} checks, report pass = {}", r.checks.len(), r.pass),
                None => "report did not parse".into(),
            };
            Outcome {
                pass: identical && report.is_some(),
                detail: format!("{} bytes, identical = {identical}, {note}, {}", a.len(), secs(start.elapsed())),
            }
        }
        (a, b) => Outcome { pass: false, detail: format!("could not run frac: {:?} {:?}", a.err(), b.err()) },
    }
}

fn main() -> ExitCode {
    let default = Config::default();
    let fine = Config { h: 1.0 / 256.0, ..Config::default() };
    let cautious = Config { gamma_safety: 0.25, ..Config::default() };
    let criteria: Vec<(&str, Criterion)> = vec![
        ("perimeter oracle", Box::new(perimeter_oracle)),
        (
            "scaling exactness",
            Box::new(|| {
                let (c, t) = checks("scaling", &["scaling"], &default);
                summarise(&c, t, Duration::from_secs(10))
            }),
        ),
        (
            "capacity equals perimeter for p = 1",
            Box::new(|| {
                let (c, t) = checks("cap_identities", &["cap_identities.cap_perimeter"], &fine);
                summarise(&c, t, Duration::from_secs(60))
            }),
        ),
        (
            "Cheeger sharpness on balls",
            Box::new(|| {
                let (c, t) = checks("poincare", &["poincare.cheeger"], &default);
                summarise(&c, t, Duration::from_secs(60))
            }),
        ),
        (
            "torsion identity and bound",
            Box::new(|| {
                let (c, t) = checks("torsion", &["torsion"], &default);
                summarise(&c, t, Duration::from_secs(60))
            }),
        ),
        ("randomised inequality corpus", Box::new(corpus)),
        (
            "two-sided inradius bounds",
            Box::new(|| {
                let (c, t) = checks("sandwich", &["sandwich"], &cautious);
                summarise(&c, t, Duration::from_secs(300))
            }),
        ),
        (
            "s -> 0 and s -> 1 limits of the frequency",
            Box::new(|| {
                let (c, t) = checks("asymptotics", &["asymptotics.lambda"], &default);
                summarise(&c, t, Duration::from_secs(300))
            }),
        ),
        (
            "slab volume bound",
            Box::new(|| {
                let (c, t) = checks("slab", &["slab"], &default);
                summarise(&c, t, Duration::from_secs(300))
            }),
        ),
        ("deterministic reports", Box::new(determinism)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        if !out.pass {
            failures += 1;
        }
        println!("criterion {:>2} {}: {}: {}", i + 1, if out.pass { "PASS" } else { "FAIL" }, name, out.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
