//! The `frac` subcommands as library functions returning JSON values.

use fraccap::constants::{Args, REGISTRY};
use fraccap::energy::{frac_perimeter, gagliardo};
use fraccap::geometry::{capacitary_inradius, inradius as lattice_inradius, SearchConfig};
use fraccap::lattice::{KernelWeights, Shape};
use fraccap::solvers::{
    capacity, cheeger as cheeger_solve, frequency, torsion as torsion_solve, torsion_domain, MinimizeResult,
    SolverConfig,
};
use fraccap::FracParams;
use serde_json::{json, Value};

use crate::shapes::{load_mask, ShapeSpec};
use crate::sweep::constant;
use crate::{Error, Result};

fn solver(near_band: usize) -> SolverConfig {
    SolverConfig { near_band, ..SolverConfig::default() }
}

/// The spacing: `--h` if given, otherwise the mask's own.
fn spacing(spec: &ShapeSpec, h: Option<f64>) -> Result<f64> {
    if let Some(h) = h {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Usage(format!("--h must be positive, got {h}")));
        }
        return Ok(h);
    }
    let mut s = spec;
    loop {
        match s {
            ShapeSpec::Mask(path) => return Ok(load_mask(path)?.h()),
            ShapeSpec::Punctured { base, .. } => s = base,
            ShapeSpec::Shape { .. } => return Err(Error::Usage("--h is required unless the shape is a mask".into())),
        }
    }
}

fn solve_info(r: &MinimizeResult) -> Value {
    json!({ "iterations": r.iterations, "residual": r.residual, "converged": r.converged })
}

fn params_json(p: &FracParams) -> Value {
    json!({ "N": p.dim, "s": p.s, "p": p.p, "q": p.q })
}

pub fn lambda(shape: &str, s: f64, p: f64, q: f64, h: Option<f64>, near_band: usize) -> Result<Value> {
    let spec = ShapeSpec::parse(shape)?;
    let h = spacing(&spec, h)?;
    let dom = spec.domain(h)?;
    let prm = FracParams::new(dom.dim(), s, p, q)?;
    let res = frequency(&dom, &prm, &solver(near_band))?;
    Ok(json!({
        "command": "lambda", "shape": shape, "h": h, "params": params_json(&prm),
        "cells": dom.count(), "lambda": res.value, "solver": solve_info(&res),
    }))
}

pub fn cap(sigma: &str, env: &str, s: f64, p: f64, h: Option<f64>, near_band: usize) -> Result<Value> {
    let env_spec = ShapeSpec::parse(env)?;
    let sigma_spec = ShapeSpec::parse(sigma)?;
    let h = spacing(&env_spec, h)?;
    let env_dom = env_spec.domain(h)?;
    let set = sigma_spec.select_on(&env_dom, true)?;
    let prm = FracParams::new(env_dom.dim(), s, p, p)?;
    let res = capacity(&set, env_dom.set(), &prm, &solver(near_band))?;
    Ok(json!({
        "command": "cap", "sigma": sigma, "env": env, "h": h, "params": params_json(&prm),
        "sigma_cells": set.count(), "env_cells": env_dom.count(), "capacity": res.value, "solver": solve_info(&res),
    }))
}

pub fn perimeter(shape: &str, s: f64, h: Option<f64>, near_band: usize) -> Result<Value> {
    let spec = ShapeSpec::parse(shape)?;
    let h = spacing(&spec, h)?;
    let dom = spec.domain(h)?;
    let prm = FracParams::new(dom.dim(), s, 1.0, 1.0)?;
    let cfg = solver(near_band);
    let k = KernelWeights::assemble(dom.grid(), &prm, cfg.near_band, cfg.near_field)?;
    Ok(json!({
        "command": "perimeter", "shape": shape, "h": h, "s": s,
        "cells": dom.count(), "measure": dom.measure(), "perimeter": frac_perimeter(dom.set(), &k)?,
    }))
}

pub fn cheeger(e: &str, omega: &str, s: f64, h: Option<f64>, near_band: usize) -> Result<Value> {
    let om_spec = ShapeSpec::parse(omega)?;
    let h = spacing(&om_spec, h)?;
    let dom = om_spec.domain(h)?;
    let region = ShapeSpec::parse(e)?.select_on(&dom, false)?;
    let res = cheeger_solve(&region, &dom, s, &solver(near_band))?;
    let set: Vec<Vec<i64>> =
        res.minimizer.support().into_iter().map(|i| dom.grid().global(i)[..dom.dim()].to_vec()).collect();
    Ok(json!({
        "command": "cheeger", "e": e, "omega": omega, "h": h, "s": s,
        "cheeger": res.value, "optimal_set_cells": set, "solver": solve_info(&res),
    }))
}

pub fn torsion(r: f64, big_r: f64, s: f64, p: f64, h: f64, dim: usize, near_band: usize) -> Result<Value> {
    let prm = FracParams::new(dim, s, p, p)?;
    let cfg = solver(near_band);
    let res = torsion_solve(r, big_r, &prm, h, &cfg)?;
    let dom = torsion_domain(big_r, dim, h)?;
    let k = KernelWeights::assemble(dom.grid(), &prm, cfg.near_band, cfg.near_field)?;
    let energy = gagliardo(&res.minimizer, &k)?.value;
    let inner = dom.select(&Shape::ball([0.0, 0.0], r), false);
    let integral: f64 =
        inner.cells().iter().map(|&c| res.minimizer.values()[c]).sum::<f64>() * dom.grid().cell_measure();
    let max = res.minimizer.values().iter().cloned().fold(0.0, f64::max);
    Ok(json!({
        "command": "torsion", "r": r, "R": big_r, "h": h, "params": params_json(&prm),
        "objective": res.value, "energy": energy, "integral": integral, "max": max, "solver": solve_info(&res),
    }))
}

pub fn inradius(shape: &str, s: f64, p: f64, gamma: f64, h: Option<f64>, near_band: usize) -> Result<Value> {
    let spec = ShapeSpec::parse(shape)?;
    let h = spacing(&spec, h)?;
    let dom = spec.domain(h)?;
    let prm = FracParams::new(dom.dim(), s, p, p)?;
    let search = SearchConfig { solver: solver(near_band), ..SearchConfig::default() };
    let res = capacitary_inradius(&dom, &prm, gamma, &search)?;
    let upper = if res.r_upper.is_finite() { json!(res.r_upper) } else { json!("inf") };
    Ok(json!({
        "command": "inradius", "shape": shape, "h": h, "params": params_json(&prm), "gamma": gamma,
        "inradius": lattice_inradius(&dom), "r_lower": res.r_lower, "r_upper": upper,
        "witness": { "center": &res.witness.center[..dom.dim()], "radius": res.witness.radius },
        "samples": res.samples, "exhausted": res.exhausted,
    }))
}

/// `--args k=v,...`: `N`, `s`, `p`, `q` set the parameters (defaults
/// 1, 0.5, 2, 2); the remaining keys are formula arguments.
pub fn constant_cmd(name: &str, args: Option<&str>, near_band: usize) -> Result<Value> {
    if !REGISTRY.contains(&name) {
        return Err(Error::Usage(format!("unknown constant `{name}`; expected one of {}", REGISTRY.join(", "))));
    }
    let (mut n, mut s, mut p, mut q) = (1usize, 0.5, 2.0, 2.0);
    let mut a = Args::default();
    let mut echo = serde_json::Map::new();
    for item in args.unwrap_or("").split(',').filter(|t| !t.trim().is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| Error::Usage(format!("argument `{item}` is not k=v")))?;
        let (k, v) = (k.trim(), v.trim());
        let x: f64 = v.parse().map_err(|_| Error::Usage(format!("argument `{k}` needs a number, got `{v}`")))?;
        echo.insert(k.to_string(), json!(x));
        match k {
            "N" => {
                if x != 1.0 && x != 2.0 {
                    return Err(Error::Usage(format!("N must be 1 or 2, got {v}")));
                }
                n = x as usize;
            }
            "s" => s = x,
            "p" => p = x,
            "q" => q = x,
            _ => a.set(k, x)?,
        }
    }
    let prm = FracParams::new(n, s, p, q)?;
    let value = constant(name, prm, &a, &solver(near_band))?;
    Ok(json!({ "command": "const", "name": name, "params": params_json(&prm), "args": echo, "value": value }))
}

/// `key,value` rows for a flat JSON object; nested values are written as JSON.
pub fn json_to_csv(v: &Value) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let bad = |e: csv::Error| Error::Report(e.to_string());
    w.write_record(["key", "value"]).map_err(bad)?;
    if let Value::Object(map) = v {
        for (k, x) in map {
            let cell = match x {
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            w.write_record([k.as_str(), cell.as_str()]).map_err(bad)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}
