//! One-parameter sweeps producing plot-ready tables.

use fraccap::constants::{eval_constant, Args, ConstantContext, ReferenceConfig, REGISTRY};
use fraccap::energy::frac_perimeter;
use fraccap::geometry::{capacitary_inradius, SearchConfig};
use fraccap::lattice::KernelWeights;
use fraccap::solvers::{frequency, SolverConfig};
use fraccap::FracParams;
use serde::{Deserialize, Serialize};

use crate::shapes::ShapeSpec;
use crate::{Config, Error, Result};

pub const PARAMS: &[&str] = &["s", "gamma", "h", "ratio"];
pub const TARGETS: &[&str] = &["lambda", "s_lambda", "one_minus_s_lambda", "perimeter", "r_lower", "r_upper"];

/// Base point of a sweep; the swept parameter overrides one field.
#[derive(Debug, Clone)]
pub struct SweepBase {
    pub shape: ShapeSpec,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub ratio: f64,
    /// `None` takes the spacing from the config.
    pub h: Option<f64>,
}

impl Default for SweepBase {
    fn default() -> Self {
        SweepBase {
            shape: ShapeSpec::parse("interval:0,1").expect("valid literal"),
            s: 0.5,
            p: 2.0,
            q: 2.0,
            gamma: 0.5,
            ratio: 2.0,
            h: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub param: String,
    pub target: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let bad = |e: csv::Error| Error::Report(e.to_string());
        w.write_record([self.param.as_str(), self.target.as_str()]).map_err(bad)?;
        for r in &self.rows {
            w.write_record([r.x.to_string(), r.value.to_string()]).map_err(bad)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
    }
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let grid: std::result::Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let grid = grid.map_err(|_| Error::Usage(format!("bad grid `{text}`")))?;
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Usage(format!("bad grid `{text}`")));
    }
    Ok(grid)
}

fn fparams(dim: usize, s: f64, p: f64, q: f64) -> Result<FracParams> {
    // the s → 1 sweeps need sp > N
    Ok(if s * p > dim as f64 { FracParams::supercritical(dim, s, p, q)? } else { FracParams::new(dim, s, p, q)? })
}

pub fn sweep(param: &str, grid: &[f64], target: &str, base: &SweepBase, cfg: &Config) -> Result<SweepTable> {
    if !PARAMS.contains(&param) {
        return Err(Error::Usage(format!("unknown sweep parameter `{param}`; expected one of {}", PARAMS.join(", "))));
    }
    if !TARGETS.contains(&target) && !REGISTRY.contains(&target) {
        return Err(Error::Usage(format!(
            "unknown target `{target}`; expected one of {} or a constant name ({})",
            TARGETS.join(", "),
            REGISTRY.join(", ")
        )));
    }
    let dim = base.shape.dim()?;
    let solver = SolverConfig { near_band: cfg.near_band, ..SolverConfig::default() };
    let mut rows = Vec::with_capacity(grid.len());
    for &x in grid {
        let mut b = base.clone();
        match param {
            "s" => b.s = x,
            "gamma" => b.gamma = x,
            "h" => b.h = Some(x),
            _ => b.ratio = x,
        }
        let h = b.h.unwrap_or(cfg.h_for(dim));
        let value = match target {
            "lambda" | "s_lambda" | "one_minus_s_lambda" => {
                let dom = b.shape.domain(h)?;
                let lam = frequency(&dom, &fparams(dim, b.s, b.p, b.q)?, &solver)?.value;
                match target {
                    "lambda" => lam,
                    "s_lambda" => b.s * lam,
                    _ => (1.0 - b.s) * lam,
                }
            }
            "perimeter" => {
                let dom = b.shape.domain(h)?;
                let k = KernelWeights::assemble(
                    dom.grid(),
                    &FracParams::new(dim, b.s, 1.0, 1.0)?,
                    solver.near_band,
                    solver.near_field,
                )?;
                frac_perimeter(dom.set(), &k)?
            }
            "r_lower" | "r_upper" => {
                let dom = b.shape.domain(h)?;
                let search = SearchConfig { solver, ..SearchConfig::default() };
                let res = capacitary_inradius(&dom, &fparams(dim, b.s, b.p, b.q)?, b.gamma, &search)?;
                if target == "r_lower" {
                    res.r_lower
                } else {
                    res.r_upper
                }
            }
            name => {
                let prm = fparams(dim, b.s, b.p, b.q)?;
                let args = Args { gamma: Some(b.gamma), ratio: Some(b.ratio), ..Args::default() };
                constant(name, prm, &args, &solver)?
            }
        };
        rows.push(SweepRow { x, value });
    }
    Ok(SweepTable { param: param.to_string(), target: target.to_string(), rows })
}

/// Evaluates a registry constant, computing reference values only when the
/// formula needs them.
pub fn constant(name: &str, prm: FracParams, args: &Args, solver: &SolverConfig) -> Result<f64> {
    match eval_constant(name, &ConstantContext::new(prm), args) {
        Err(fraccap::Error::MissingReference(_)) => {}
        other => return Ok(other?),
    }
    let refs = ReferenceConfig { solver: *solver, ..ReferenceConfig::default() };
    let mut ctx = ConstantContext::numeric(prm, &refs)?;
    match eval_constant(name, &ctx, args) {
        Err(fraccap::Error::MissingReference("ref_s_lambda_limit")) => {
            ctx.ref_s_lambda_limit = Some(crate::suites::theorems::s_lambda_limit(&prm, &refs)?);
            Ok(eval_constant(name, &ctx, args)?)
        }
        other => Ok(other?),
    }
}
