//! Verification suites.  Every check runs behind a panic guard, so a
//! failing solver yields a failed check instead of aborting the suite.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use fraccap::lattice::{KernelWeights, LatticeDomain, LatticeSet, Shape};
use fraccap::solvers::{self, SolverConfig};
use fraccap::FracParams;
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Environment, Relation, Report, Tolerances};
use crate::{Config, Error, Result};

mod asymptotics;
mod capacity;
mod inequalities;
mod scaling;
pub(crate) mod theorems;

pub const SUITES: &[&str] = &[
    "scaling",
    "monotonicity",
    "cap_identities",
    "cap_null",
    "poincare",
    "mazya",
    "torsion",
    "sandwich",
    "asymptotics",
    "slab",
    "capin_compare",
];

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    /// Record wall-clock time per check (breaks byte-for-byte determinism).
    pub timings: bool,
    /// Run only the checks whose id starts with this prefix.
    pub only: Option<String>,
}

/// What a check body gets to work with.
pub struct Scope<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    stream: u64,
    params: &'a mut BTreeSet<String>,
}

impl Scope<'_> {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig { near_band: self.cfg.near_band, ..SolverConfig::default() }
    }

    /// Records a parameter tuple in the report environment.
    pub fn note(&mut self, p: &FracParams) {
        self.params.insert(format!("N={} s={} p={} q={}", p.dim, p.s, p.p, p.q));
    }

    /// Generator private to this check.
    pub fn rng(&self) -> ChaCha8Rng {
        crate::corpus::rng(self.seed, self.stream)
    }

    pub fn h(&self, dim: usize) -> f64 {
        self.cfg.h_for(dim)
    }

    pub fn tol_discrete(&self, dim: usize) -> f64 {
        self.cfg.tol_discrete_for(dim)
    }
}

pub struct Runner<'a> {
    cfg: &'a Config,
    opts: RunOptions,
    checks: Vec<Check>,
    params: BTreeSet<String>,
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a Config, opts: RunOptions) -> Self {
        Runner { cfg, opts, checks: Vec::new(), params: BTreeSet::new() }
    }

    /// Runs one check body; errors and panics become a failed check `id`.
    pub fn run(
        &mut self,
        id: &str,
        description: &str,
        relation: Relation,
        body: impl FnOnce(&mut Scope) -> Result<Vec<Check>>,
    ) {
        if let Some(only) = &self.opts.only {
            if !id.starts_with(only.as_str()) && !only.starts_with(id) {
                return;
            }
        }
        let start = Instant::now();
        let mut scope = Scope { cfg: self.cfg, seed: self.opts.seed, stream: fnv(id), params: &mut self.params };
        let outcome = catch_unwind(AssertUnwindSafe(|| body(&mut scope)));
        let mut checks = match outcome {
            Ok(Ok(checks)) if !checks.is_empty() => checks,
            Ok(Ok(_)) => vec![Check::failed(id, description, relation, "check produced no result".into())],
            Ok(Err(e)) => vec![Check::failed(id, description, relation, e.to_string())],
            Err(panic) => {
                let msg = panic
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".into());
                vec![Check::failed(id, description, relation, format!("panicked: {msg}"))]
            }
        };
        if self.opts.timings {
            let ms = start.elapsed().as_millis() as u64;
            for c in &mut checks {
                c.runtime_ms = Some(ms);
            }
        }
        if let Some(only) = &self.opts.only {
            checks.retain(|c| c.id.starts_with(only.as_str()));
        }
        self.checks.extend(checks);
    }

    pub fn finish(self, suite: &str) -> Report {
        let env = Environment {
            params: self.params.into_iter().collect(),
            h: self.cfg.h,
            seed: self.opts.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: Tolerances {
                exact: self.cfg.tol_exact,
                discrete_1d: self.cfg.tol_discrete_for(1),
                discrete_2d: self.cfg.tol_discrete_for(2),
                plateau: self.cfg.tol_plateau,
            },
        };
        Report::new(suite, env, self.checks)
    }
}

fn run_one(name: &str, r: &mut Runner) -> Result<()> {
    match name {
        "scaling" => scaling::scaling(r),
        "monotonicity" => scaling::monotonicity(r),
        "cap_null" => scaling::cap_null(r),
        "cap_identities" => capacity::cap_identities(r),
        "capin_compare" => capacity::capin_compare(r),
        "poincare" => inequalities::poincare(r),
        "mazya" => inequalities::mazya(r),
        "torsion" => inequalities::torsion(r),
        "sandwich" => theorems::sandwich(r),
        "slab" => theorems::slab(r),
        "asymptotics" => asymptotics::asymptotics(r),
        _ => return Err(Error::Usage(format!("unknown suite `{name}`; expected one of {} or all", SUITES.join(", ")))),
    }
    Ok(())
}

pub fn run_suite(name: &str, cfg: &Config, opts: RunOptions) -> Result<Report> {
    let mut runner = Runner::new(cfg, opts);
    if name == "all" {
        for s in SUITES {
            run_one(s, &mut runner)?;
        }
    } else {
        run_one(name, &mut runner)?;
    }
    Ok(runner.finish(name))
}

// Shared helpers for the suite bodies.

pub(crate) fn params(dim: usize, s: f64, p: f64, q: f64) -> Result<FracParams> {
    Ok(FracParams::new(dim, s, p, q)?)
}

pub(crate) fn interval(a: f64, b: f64) -> Shape {
    Shape::Interval { a, b }
}

pub(crate) fn ball(r: f64) -> Shape {
    Shape::ball([0.0, 0.0], r)
}

pub(crate) fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Shape {
    Shape::Rectangle { lo: [x0, y0], hi: [x1, y1] }
}

pub(crate) fn domain(shape: &Shape, dim: usize, h: f64) -> Result<LatticeDomain> {
    Ok(LatticeDomain::from_shape(shape, dim, h)?)
}

pub(crate) fn lambda(dom: &LatticeDomain, p: &FracParams, cfg: &SolverConfig) -> Result<f64> {
    Ok(solvers::frequency(dom, p, cfg)?.value)
}

pub(crate) fn cap(sigma: &LatticeSet, env: &LatticeSet, p: &FracParams, cfg: &SolverConfig) -> Result<f64> {
    Ok(solvers::capacity(sigma, env, p, cfg)?.value)
}

pub(crate) fn kernel(dom: &LatticeDomain, p: &FracParams, cfg: &SolverConfig) -> Result<KernelWeights> {
    Ok(KernelWeights::assemble(dom.grid(), p, cfg.near_band, cfg.near_field)?)
}

/// The closed-form `P_s((-r, r)) = 4 (2r)^{1-s} / (s (1-s))`.
pub(crate) fn interval_perimeter(s: f64, r: f64) -> f64 {
    4.0 * (2.0 * r).powf(1.0 - s) / (s * (1.0 - s))
}

/// Worst case of a randomized check: the sample with the least slack.
pub(crate) struct Worst {
    pub best: Option<Check>,
    pub samples: usize,
    pub violations: usize,
}

impl Worst {
    pub fn new() -> Self {
        Worst { best: None, samples: 0, violations: 0 }
    }

    pub fn push(&mut self, c: Check) {
        self.samples += 1;
        if !c.pass {
            self.violations += 1;
        }
        let worse = match &self.best {
            None => true,
            Some(b) => !(c.slack >= b.slack),
        };
        if worse {
            self.best = Some(c);
        }
    }

    pub fn finish(self, id: &str, description: &str, relation: Relation) -> Check {
        match self.best {
            Some(c) => c.with_samples(self.samples, self.violations),
            None => Check::failed(id, description, relation, "no samples".into()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_and_errors_become_failed_checks() {
        let cfg = Config::default();
        let mut r = Runner::new(&cfg, RunOptions::default());
        r.run("x.panic", "", Relation::Le, |_| panic!("boom"));
        r.run("x.err", "", Relation::Le, |_| Err(Error::Usage("bad".into())));
        r.run("x.ok", "", Relation::Le, |_| Ok(vec![Check::le("x.ok", "", 1.0, 2.0, 0.0)]));
        let rep = r.finish("x");
        assert!(!rep.pass);
        assert_eq!(rep.checks.iter().map(|c| c.pass).collect::<Vec<_>>(), [false, true, false]);
        assert!(rep.checks[0].diagnostic.as_deref().unwrap().contains("bad"));
        assert!(rep.checks[2].diagnostic.as_deref().unwrap().contains("boom"));
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &Config::default(), RunOptions::default()).is_err());
    }

    #[test]
    fn streams_depend_on_the_id() {
        assert_ne!(fnv("a.b"), fnv("a.c"));
    }
}
