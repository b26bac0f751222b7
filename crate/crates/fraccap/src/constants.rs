//! Explicit constants of the capacitary inradius estimates, as functions of
//! `(N, p, s, q, γ, R/r)` plus a few numerically computed reference values.
//!
//! Reference values live in [`ConstantContext`]; [`ConstantContext::numeric`]
//! fills them by solving on coarse lattices.  The Sobolev constant enters only
//! as a lower estimate of a supremum, so anything derived from it in a
//! denominator (notably `gamma0`) may be too large.

use core::f64::consts::PI;

use crate::lattice::{KernelWeights, LatticeDomain, Shape};
use crate::params::FracParams;
use crate::prelude::*;
use crate::quad::GaussRule;
use crate::solvers::{capacity, frequency, frequency_from, local_capacity, local_frequency, torsion, SolverConfig};

/// Names accepted by [`eval_constant`].
pub const REGISTRY: &[&str] = &[
    "c_holder",
    "E",
    "W",
    "M",
    "C_cap_balls",
    "sigma",
    "A_aux",
    "gamma0",
    "eps0",
    "C_upper",
    "beta",
    "c_subcrit",
    "phi_slab",
    "phi_slab_inv",
    "gamma0_slab",
    "slab_rhs",
];

/// Classical Poincaré–Wirtinger constant on balls used for `μ_{N,p}`.
pub const MU_BALL: f64 = 2.0;

/// Volume of the unit ball in `R^n`, `n ≤ 3`.
pub fn omega(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateDirection {
    /// A value attained by a test function, hence below the supremum.
    LowerBoundOfSup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevEstimate {
    pub value: f64,
    pub direction: EstimateDirection,
}

/// Parameters and numerical reference values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantContext {
    pub params: FracParams,
    /// `λ^s_{p,q}(B_1)`.
    pub ref_lambda_ball: Option<f64>,
    /// `λ^s_{p,p}(B_1)`; falls back to `ref_lambda_ball` when `q = p`.
    pub ref_lambda_ball_pp: Option<f64>,
    /// `cap_{s,p}(B̄_1; B_2)`.
    pub ref_cap_ball: Option<f64>,
    /// Local `λ_p(B_2)`.
    pub ref_local_lambda: Option<f64>,
    /// Local `cap_p(B̄_1; B_2)`.
    pub ref_local_cap: Option<f64>,
    pub sobolev_s: Option<SobolevEstimate>,
    /// Estimate of the constant in `(1-s) λ^s → K λ` as `s → 1`.
    pub bbm_k: Option<f64>,
    /// `λ^s_{N/s,1}(B_1)`, needed when `sp = N`.
    pub ref_lambda_conformal: Option<f64>,
    /// Estimate of `liminf_{s→0} s λ^s_{p}(B_2)`.
    pub ref_s_lambda_limit: Option<f64>,
}

impl ConstantContext {
    pub fn new(params: FracParams) -> Self {
        ConstantContext {
            params,
            ref_lambda_ball: None,
            ref_lambda_ball_pp: None,
            ref_cap_ball: None,
            ref_local_lambda: None,
            ref_local_cap: None,
            sobolev_s: None,
            bbm_k: None,
            ref_lambda_conformal: None,
            ref_s_lambda_limit: None,
        }
    }

    /// Fill the reference slots numerically.
    pub fn numeric(params: FracParams, refs: &ReferenceConfig) -> Result<Self> {
        params.validate()?;
        let n = params.dim;
        let h = refs.h.unwrap_or(if n == 1 { 1.0 / 64.0 } else { 1.0 / 12.0 });
        let cfg = &refs.solver;
        let b1 = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 1.0), n, h)?;
        let b2 = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], 2.0), n, h)?;
        let closed_b1 = b2.select(&Shape::ball([0.0, 0.0], 1.0), true);
        let mut ctx = ConstantContext::new(params);
        ctx.ref_lambda_ball = Some(frequency(&b1, &params, cfg)?.value);
        ctx.ref_lambda_ball_pp = if params.q == params.p {
            ctx.ref_lambda_ball
        } else {
            Some(frequency(&b1, &FracParams { q: params.p, ..params }, cfg)?.value)
        };
        ctx.ref_cap_ball = Some(capacity(&closed_b1, b2.set(), &params, cfg)?.value);
        ctx.ref_local_lambda = Some(local_frequency(&b2, params.p, cfg)?.value);
        ctx.ref_local_cap = Some(local_capacity(&closed_b1, b2.set(), params.p, cfg)?.value);
        if params.sobolev_exponent().is_some() && params.p > 1.0 {
            ctx.sobolev_s = Some(sobolev_estimate(&params, refs.sobolev_radius, h, cfg)?);
        }
        if params.is_conformal() && params.p > 1.0 {
            let conf = FracParams { q: 1.0, ..params };
            ctx.ref_lambda_conformal = Some(frequency(&b1, &conf, cfg)?.value);
        }
        Ok(ctx)
    }

    fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
        match v {
            Some(x) if x > 0.0 && x.is_finite() => Ok(x),
            Some(_) => Err(Error::OutOfDomain(format!("reference value `{name}` must be positive"))),
            None => Err(Error::MissingReference(name)),
        }
    }

    fn lambda_ball(&self) -> Result<f64> {
        Self::need(self.ref_lambda_ball, "ref_lambda_ball")
    }

    fn lambda_ball_pp(&self) -> Result<f64> {
        match self.ref_lambda_ball_pp {
            Some(v) => Self::need(Some(v), "ref_lambda_ball_pp"),
            None if self.params.q == self.params.p => self.lambda_ball(),
            None => Err(Error::MissingReference("ref_lambda_ball_pp")),
        }
    }

    fn cap_ball(&self) -> Result<f64> {
        Self::need(self.ref_cap_ball, "ref_cap_ball")
    }

    fn local_lambda(&self) -> Result<f64> {
        Self::need(self.ref_local_lambda, "ref_local_lambda")
    }

    fn local_cap(&self) -> Result<f64> {
        Self::need(self.ref_local_cap, "ref_local_cap")
    }

    fn sobolev(&self) -> Result<f64> {
        Self::need(self.sobolev_s.map(|e| e.value), "sobolev_s")
    }
}

/// Lattices and solver settings for [`ConstantContext::numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceConfig {
    /// Spacing; `None` picks 1/64 in one dimension and 1/12 in two.
    pub h: Option<f64>,
    /// Radius of the ball on which the Sobolev quotient is optimised.
    pub sobolev_radius: f64,
    pub solver: SolverConfig,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        ReferenceConfig { h: None, sobolev_radius: 2.0, solver: SolverConfig::default() }
    }
}

/// Lower estimate of the sharp Sobolev constant: the reciprocal of the
/// discrete `λ_{p,p*}(B_radius)`, with the descent seeded by the torsion
/// function of the ball.
pub fn sobolev_estimate(params: &FracParams, radius: f64, h: f64, cfg: &SolverConfig) -> Result<SobolevEstimate> {
    let crit =
        params.sobolev_exponent().ok_or_else(|| Error::OutOfDomain("the Sobolev constant needs sp < N".into()))?;
    let params = FracParams { q: crit, ..*params };
    let dom = LatticeDomain::from_shape(&Shape::ball([0.0, 0.0], radius), params.dim, h)?;
    let kernel = KernelWeights::assemble(dom.grid(), &params, cfg.near_band, cfg.near_field)?;
    let seed = torsion(radius, radius, &params, h, cfg)?.minimizer;
    let res = frequency_from(&kernel, dom.set(), crit, &seed, cfg)?;
    Ok(SobolevEstimate { value: 1.0 / res.value, direction: EstimateDirection::LowerBoundOfSup })
}

/// Optional arguments of registry formulas.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Args {
    /// `R/r` for `E`, `W`, `M`; `R/d` for `C_cap_balls`.
    pub ratio: Option<f64>,
    /// Overrides the context's `γ`.
    pub gamma: Option<f64>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    /// Radius for `phi_slab`.
    pub r: Option<f64>,
    /// Value for `phi_slab_inv`.
    pub y: Option<f64>,
    /// `|Ω|` for `c_subcrit`.
    pub volume: Option<f64>,
    /// The unspecified constant of `c_subcrit` (default 1).
    pub c: Option<f64>,
}

impl Args {
    pub fn ratio(ratio: f64) -> Self {
        Args { ratio: Some(ratio), ..Args::default() }
    }

    pub fn gamma(gamma: f64) -> Self {
        Args { gamma: Some(gamma), ..Args::default() }
    }

    /// Set a field by name; unknown keys are errors.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = match key {
            "ratio" => &mut self.ratio,
            "gamma" => &mut self.gamma,
            "eps" => &mut self.eps,
            "delta" => &mut self.delta,
            "r" => &mut self.r,
            "y" => &mut self.y,
            "volume" => &mut self.volume,
            "c" => &mut self.c,
            _ => return Err(Error::InvalidParams(format!("unknown argument `{key}`"))),
        };
        *slot = Some(value);
        Ok(())
    }
}

fn arg(v: Option<f64>, name: &str) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidParams(format!("missing argument `{name}`")))
}

fn gamma_of(ctx: &ConstantContext, args: &Args) -> Result<f64> {
    let g = args.gamma.or(ctx.params.gamma).ok_or_else(|| Error::InvalidParams("missing argument `gamma`".into()))?;
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::OutOfDomain(format!("gamma = {g} not in (0, 1)")));
    }
    Ok(g)
}

/// `c_{N,p} = 2^p N ω_N / p`.
pub fn c_holder(n: usize, p: f64) -> f64 {
    2f64.powf(p) * n as f64 * omega(n) / p
}

/// `E(N, p, R/r)`.
pub fn e_const(n: usize, p: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 1.0) {
        return Err(Error::OutOfDomain(format!("E needs R/r > 1, got {ratio}")));
    }
    let nf = n as f64;
    let t = 2.0 * ratio / (ratio - 1.0);
    Ok(t * (c_holder(n, p).powf(1.0 / p) + (nf * omega(n) / p).powf(1.0 / p) * t.powf(nf / p)))
}

/// The fractional Poincaré–Wirtinger constant `𝒲_{N,p}` through the chain
/// `c = max{2, μ}^p`, `d = max{4, μ}`, `a = max{c^p, d^p}` with `μ = 2`.
pub fn wirtinger(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let c = MU_BALL.max(2.0).powf(p);
    let d = MU_BALL.max(4.0);
    let a = c.powf(p).max(d.powf(p));
    a * p * (nf + 1.0).powf(p) * nf.powf(p - 1.0) / omega(n)
}

fn check_sqrt_n(n: usize, ratio: f64, what: &str) -> Result<()> {
    let root = (n as f64).sqrt();
    if !(ratio > root) {
        return Err(Error::OutOfDomain(format!("{what} needs R/r > sqrt(N) = {root}, got {ratio}")));
    }
    Ok(())
}

/// `W(N, p, s, q, R/r)`; the interpolation constant is taken as `c_holder`.
pub fn w_const(params: &FracParams, ratio: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, q, .. } = *params;
    check_sqrt_n(n, ratio, "W")?;
    let root = (n as f64).sqrt();
    let om = omega(n);
    let inner = 1.0 + (c_holder(n, p) * wirtinger(n, p)).powf(1.0 / p) * (2.0 * ratio / (ratio - root)).powf(s);
    Ok((1.0 + om.powf(-p / q)) * 2f64.powf((q + 1.0) * p / q + 1.0) * inner.powf(p))
}

/// `M(N, p, s, q, R/r)`.
pub fn m_const(ctx: &ConstantContext, ratio: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, q, .. } = ctx.params;
    check_sqrt_n(n, ratio, "M")?;
    let lambda = ctx.lambda_ball()?;
    let om = omega(n);
    let nf = n as f64;
    let w = w_const(&ctx.params, ratio)?;
    let e = e_const(n, p, ratio)?;
    let bracket = 1.0
        + om.powf(1.0 / p - 1.0 / q) * (1.0 + ratio.powf(nf / q)) * (w / (s * (1.0 - s) * lambda)).powf(1.0 / p) * e;
    Ok(om.powf(-1.0 / q) / bracket)
}

/// `𝒞(N, p, s, R/d)` of the comparison between capacities in nested balls.
pub fn c_cap_balls(ctx: &ConstantContext, ratio: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    if !(ratio > 0.0) {
        return Err(Error::OutOfDomain(format!("C_cap_balls needs R/d > 0, got {ratio}")));
    }
    let lambda = ctx.lambda_ball_pp()?;
    let nf = n as f64;
    let ss = s * (1.0 - s);
    let t = 2.0 * ratio;
    let a = (c_holder(n, p) / (ss * lambda)).powf(1.0 / p) * t.powf(s);
    let b = (1.0 - s).powf(1.0 / p) * (nf * omega(n) / (ss * lambda)).powf(1.0 / p) * t.powf((nf + s * p) / p);
    Ok((1.0 + a + b).powf(p))
}

/// `σ = M^p / 𝒞 · cap(B̄_1; B_2) / (4N + 1)^N` with both constants at `2√N`.
pub fn sigma(ctx: &ConstantContext) -> Result<f64> {
    let n = ctx.params.dim;
    let ratio = 2.0 * (n as f64).sqrt();
    let m = m_const(ctx, ratio)?;
    let c = c_cap_balls(ctx, ratio)?;
    let tiles = (4.0 * n as f64 + 1.0).powi(n as i32);
    Ok(m.powf(ctx.params.p) / c * ctx.cap_ball()? / tiles)
}

/// `𝒜(N, p, s, q, γ, ε, δ)`; the Gagliardo–Nirenberg constant is taken as
/// `c_holder`.
pub fn a_aux(ctx: &ConstantContext, gamma: f64, eps: f64, delta: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, q, .. } = ctx.params;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::OutOfDomain(format!("eps = {eps} not in (0, 1/2)")));
    }
    if delta < 0.0 {
        return Err(Error::OutOfDomain(format!("delta = {delta} is negative")));
    }
    let nf = n as f64;
    let cap = ctx.cap_ball()?;
    let om = omega(n);
    let ball = om * (1.0 - 2.0 * eps).powi(n as i32);
    let inner = c_holder(n, p) / (s * (1.0 - s) * cap) * om * (2.0 * nf).powf(s) / eps.powf(s * (p - 1.0));
    Ok(2f64.powf(p - 1.0) * cap / ball.powf(p / q) * (inner + delta + gamma))
}

/// `γ₀`: `1` for `p = 1`, otherwise from the Sobolev constant (`sp < N`) or
/// from `λ_{N/s,1}(B_1)` (`sp = N`).
pub fn gamma0(ctx: &ConstantContext) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    if p == 1.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    let om = omega(n);
    let cap = ctx.cap_ball()?;
    if ctx.params.is_conformal() {
        let lam = ConstantContext::need(ctx.ref_lambda_conformal, "ref_lambda_conformal")?;
        let k = om.powf(nf / s) * lam;
        return Ok((2f64.powf(-nf) * k / cap).min(1.0));
    }
    if ctx.params.sp() > nf {
        return Err(Error::OutOfDomain("gamma0 needs sp <= N".into()));
    }
    let sob = ctx.sobolev()?;
    Ok((1.0 / (om.powf(p / nf - 1.0) * sob * cap)).min(1.0))
}

/// `ε₀(γ)` for `0 < γ < γ₀`.
pub fn eps0(ctx: &ConstantContext, gamma: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    let nf = n as f64;
    let g0 = gamma0(ctx)?;
    if !(gamma > 0.0 && gamma < g0) {
        return Err(Error::OutOfDomain(format!("eps0 needs 0 < gamma < gamma0 = {g0}, got {gamma}")));
    }
    if p == 1.0 {
        return Ok(0.5 * (1.0 - (2.0 * gamma / (1.0 + gamma)).powf(1.0 / (nf - s))));
    }
    let root = if ctx.params.is_conformal() { nf } else { nf - s * p };
    Ok(0.25 * (1.0 - (gamma / g0).powf(1.0 / root)))
}

/// The upper-bound constant `𝒞(N, p, s, q, γ)`.
pub fn c_upper(ctx: &ConstantContext, gamma: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    let nf = n as f64;
    let e0 = eps0(ctx, gamma)?;
    let a = a_aux(ctx, gamma, e0, 0.0)?;
    if p == 1.0 {
        return Ok(2.0 / (1.0 - gamma) * a);
    }
    let ratio = gamma / gamma0(ctx)?;
    if ctx.params.is_conformal() {
        let f = 1.0 - ratio.powf(s / nf) / (1.0 - 2.0 * e0);
        return Ok(f.powf(-nf / s) * a);
    }
    let f = 1.0 - ratio.powf(1.0 / p) / (1.0 - 2.0 * e0).powf(nf / p - s);
    Ok(f.powf(-p) * a)
}

/// `β(N, p, s) = s(1-s) λ_p(B_2)^{1-s} cap_{s,p}(B̄_1; B_2) / (c_{N,p} cap_p(B̄_1; B_2))`
/// relating local and fractional negligibility.  `c_{N,p}` sits in the
/// denominator, as the capacity comparison it comes from requires.
pub fn beta(ctx: &ConstantContext) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    let lam = ctx.local_lambda()?;
    Ok(s * (1.0 - s) * lam.powf(1.0 - s) * ctx.cap_ball()? / (c_holder(n, p) * ctx.local_cap()?))
}

/// `c (N - sp)^{p-1} |Ω|^{p/p* - p/q}`, the lower bound for `s(1-s) λ^s_{p,q}(Ω)`
/// up to the unspecified constant `c` (default 1).
pub fn c_subcrit(params: &FracParams, volume: f64, c: f64) -> Result<f64> {
    let crit = params.sobolev_exponent().ok_or_else(|| Error::OutOfDomain("c_subcrit needs sp < N".into()))?;
    if !(volume > 0.0) {
        return Err(Error::OutOfDomain(format!("volume = {volume} must be positive")));
    }
    let p = params.p;
    Ok(c * (params.dim as f64 - params.sp()).powf(p - 1.0) * volume.powf(p / crit - p / params.q))
}

/// `φ_N(r) = 2 ω_{N-1} ∫_{asin(1/r)}^{π/2} cos^N t dt` for `r > 1`.
pub fn phi_slab(n: usize, r: f64) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::OutOfDomain(format!("phi_slab needs r > 1, got {r}")));
    }
    let a = (1.0 / r).asin();
    let rule = GaussRule::new(24);
    Ok(2.0 * omega(n - 1) * rule.integrate(a, 0.5 * PI, |t| t.cos().powi(n as i32)))
}

/// Inverse of [`phi_slab`] on `(0, ω_N)`, by bisection.
pub fn phi_slab_inv(n: usize, y: f64) -> Result<f64> {
    let top = omega(n);
    if !(y > 0.0 && y < top) {
        return Err(Error::OutOfDomain(format!("phi_slab_inv needs 0 < y < {top}, got {y}")));
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while phi_slab(n, hi)? < y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::OutOfDomain(format!("phi_slab_inv: {y} too close to {top}")));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_slab(n, mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `λ^s_p(B_2) = 2^{-sp} λ^s_{p,p}(B_1)`.
fn lambda_b2(ctx: &ConstantContext) -> Result<f64> {
    Ok(ctx.lambda_ball_pp()? * 2f64.powf(-ctx.params.sp()))
}

/// Right-hand side `γ c λ_p(B_2)^{s-1} cap_p(B̄_1; B_2) / (s(1-s) λ^s_p(B_2))`
/// of the slab volume bound `φ_N(r) ≤ …`.
pub fn slab_rhs(ctx: &ConstantContext, gamma: f64) -> Result<f64> {
    let FracParams { dim: n, s, p, .. } = ctx.params;
    let lam = ctx.local_lambda()?;
    Ok(gamma * c_holder(n, p) * lam.powf(s - 1.0) * ctx.local_cap()? / (s * (1.0 - s) * lambda_b2(ctx)?))
}

/// `γ₀(N, p)` of the slab example, from the estimate of `liminf s λ^s_p(B_2)`.
pub fn gamma0_slab(ctx: &ConstantContext) -> Result<f64> {
    let FracParams { dim: n, p, .. } = ctx.params;
    let lim = ConstantContext::need(ctx.ref_s_lambda_limit, "ref_s_lambda_limit")?;
    Ok((omega(n) * ctx.local_lambda()? / (c_holder(n, p) * ctx.local_cap()?) * lim).min(1.0))
}

/// Evaluate a registry constant.
pub fn eval_constant(name: &str, ctx: &ConstantContext, args: &Args) -> Result<f64> {
    let FracParams { dim: n, p, .. } = ctx.params;
    match name {
        "c_holder" => Ok(c_holder(n, p)),
        "E" => e_const(n, p, arg(args.ratio, "ratio")?),
        "W" => w_const(&ctx.params, arg(args.ratio, "ratio")?),
        "M" => m_const(ctx, arg(args.ratio, "ratio")?),
        "C_cap_balls" => c_cap_balls(ctx, arg(args.ratio, "ratio")?),
        "sigma" => sigma(ctx),
        "A_aux" => a_aux(ctx, gamma_of(ctx, args)?, arg(args.eps, "eps")?, args.delta.unwrap_or(0.0)),
        "gamma0" => gamma0(ctx),
        "eps0" => eps0(ctx, gamma_of(ctx, args)?),
        "C_upper" => c_upper(ctx, gamma_of(ctx, args)?),
        "beta" => beta(ctx),
        "c_subcrit" => c_subcrit(&ctx.params, arg(args.volume, "volume")?, args.c.unwrap_or(1.0)),
        "phi_slab" => phi_slab(n, arg(args.r, "r")?),
        "phi_slab_inv" => phi_slab_inv(n, arg(args.y, "y")?),
        "gamma0_slab" => gamma0_slab(ctx),
        "slab_rhs" => slab_rhs(ctx, gamma_of(ctx, args)?),
        _ => Err(Error::UnknownConstant(name.into())),
    }
}

/// The variable of an asymptotic probe and the quantity it is measured by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeVariable {
    /// `s → 0`, measured by `s`.
    S,
    /// `s → 1`, measured by `1 - s`.
    OneMinusS,
    /// `γ → 1`, measured by `1 - γ`.
    Gamma,
    /// `R/r → ∞`, measured by `R/r`.
    Ratio,
}

impl ProbeVariable {
    fn measure(self, v: f64) -> f64 {
        match self {
            ProbeVariable::S | ProbeVariable::Ratio => v,
            ProbeVariable::OneMinusS | ProbeVariable::Gamma => 1.0 - v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares slope of `log value` against `log measure`.
    pub fitted_exponent: f64,
    pub expected_exponent: f64,
    /// `max/min - 1` of `value · measure^{-expected}`.
    pub drift: f64,
    /// `|fitted - expected| ≤ 0.15`.
    pub pass: bool,
}

/// Exponent of the leading behaviour of a registry constant, when known.
pub fn expected_exponent(name: &str, variable: ProbeVariable, params: &FracParams) -> Option<f64> {
    let n = params.dim as f64;
    match (name, variable) {
        ("sigma", ProbeVariable::S | ProbeVariable::OneMinusS) => Some(-1.0),
        ("C_upper", ProbeVariable::S | ProbeVariable::OneMinusS) => Some(-1.0),
        ("C_upper", ProbeVariable::Gamma) if params.p == 1.0 => Some(-1.0),
        ("M", ProbeVariable::Ratio) => Some(-n / params.q),
        ("M", ProbeVariable::S | ProbeVariable::OneMinusS) => Some(0.0),
        ("E", ProbeVariable::Ratio) => Some(0.0),
        ("W", ProbeVariable::Ratio | ProbeVariable::S | ProbeVariable::OneMinusS) => Some(0.0),
        _ => None,
    }
}

/// Evaluate `name` along `grid` and fit the exponent of its divergence or
/// decay.  `family` supplies the context and arguments at each grid value.
pub fn asymptotic_probe(
    name: &str,
    mut family: impl FnMut(f64) -> Result<(ConstantContext, Args)>,
    variable: ProbeVariable,
    grid: &[f64],
    expected: f64,
) -> Result<TrendReport> {
    if grid.len() < 3 {
        return Err(Error::InvalidParams("a probe needs at least three grid points".into()));
    }
    let xs: Vec<f64> = grid.iter().map(|&v| variable.measure(v)).collect();
    if xs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParams("probe grid leaves the domain of the variable".into()));
    }
    let mut values = Vec::with_capacity(grid.len());
    for &v in grid {
        let (ctx, args) = family(v)?;
        values.push(eval_constant(name, &ctx, &args)?);
    }
    if values.iter().any(|&y| !(y > 0.0 && y.is_finite())) {
        return Err(Error::OutOfDomain(format!("{name} is not positive along the grid")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|y| y.ln()).collect();
    let fitted = log_slope(&lx, &ly)?;
    let drift = plateau_drift(&xs, &values, expected);
    Ok(TrendReport {
        grid: grid.to_vec(),
        values,
        fitted_exponent: fitted,
        expected_exponent: expected,
        drift,
        pass: (fitted - expected).abs() <= 0.15,
    })
}

fn log_slope(lx: &[f64], ly: &[f64]) -> Result<f64> {
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InvalidParams("degenerate probe grid".into()));
    }
    let sxy: f64 = lx.iter().zip(ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// `max/min - 1` of `value · measure^{-exponent}`.
pub fn plateau_drift(measures: &[f64], values: &[f64], exponent: f64) -> f64 {
    let scaled: Vec<f64> = measures.iter().zip(values).map(|(x, y)| y * x.powf(-exponent)).collect();
    let hi = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_with(params: FracParams) -> ConstantContext {
        ConstantContext {
            ref_lambda_ball: Some(3.0),
            ref_lambda_ball_pp: Some(3.0),
            ref_cap_ball: Some(5.0),
            ref_local_lambda: Some(0.6),
            ref_local_cap: Some(2.0),
            sobolev_s: Some(SobolevEstimate { value: 0.2, direction: EstimateDirection::LowerBoundOfSup }),
            ref_lambda_conformal: Some(1.5),
            ref_s_lambda_limit: Some(0.8),
            bbm_k: None,
            ..ConstantContext::new(params)
        }
    }

    fn p12() -> FracParams {
        FracParams::new(1, 0.5, 2.0, 2.0).unwrap()
    }

    #[test]
    fn c_holder_by_hand() {
        assert_eq!(c_holder(1, 2.0), 4.0);
        assert!((c_holder(2, 1.0) - 4.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn e_by_hand() {
        assert!((e_const(1, 2.0, 2.0).unwrap() - 16.0).abs() < 1e-12);
        assert!(e_const(1, 2.0, 1.0).is_err());
    }

    #[test]
    fn phi_slab_by_hand() {
        assert!((phi_slab(1, 2.0).unwrap() - 1.0).abs() < 1e-13);
        for r in [1.1, 1.7, 3.0, 10.0] {
            let a = (1.0 / r).asin();
            let closed = PI - 2.0 * a - (2.0 * a).sin();
            assert!((phi_slab(2, r).unwrap() - closed).abs() < 1e-12);
            assert!((phi_slab(1, r).unwrap() - 2.0 * (1.0 - 1.0 / r)).abs() < 1e-12);
        }
        assert!(phi_slab(1, 1.0).is_err());
    }

    #[test]
    fn phi_slab_inverse_round_trips() {
        for n in [1, 2] {
            for r in [1.01, 1.5, 2.0, 7.0] {
                let y = phi_slab(n, r).unwrap();
                assert!((phi_slab_inv(n, y).unwrap() - r).abs() < 1e-9 * r);
            }
            assert!(phi_slab_inv(n, omega(n)).is_err());
        }
    }

    #[test]
    fn gamma0_is_one_for_p_one() {
        let ctx = ctx_with(FracParams::new(1, 0.3, 1.0, 1.0).unwrap());
        assert_eq!(gamma0(&ctx).unwrap(), 1.0);
    }

    #[test]
    fn eps0_closes_at_gamma0() {
        for params in [p12(), FracParams::new(1, 0.3, 2.0, 2.0).unwrap(), FracParams::new(1, 0.3, 1.0, 1.0).unwrap()] {
            let ctx = ctx_with(params);
            let g0 = gamma0(&ctx).unwrap();
            let near = eps0(&ctx, g0 * (1.0 - 1e-9)).unwrap();
            assert!(near.abs() < 1e-8, "{params:?} {near}");
            assert!(eps0(&ctx, g0).is_err());
            assert!(eps0(&ctx, 0.5 * g0).unwrap() > 0.0);
        }
    }

    #[test]
    fn eps0_for_p_one_halves_the_gap() {
        let params = FracParams::new(2, 0.4, 1.0, 1.0).unwrap();
        let ctx = ctx_with(params);
        for gamma in [0.1, 0.5, 0.9] {
            let e = eps0(&ctx, gamma).unwrap();
            let lhs = 1.0 - gamma / (1.0 - 2.0 * e).powf(2.0 - 0.4);
            assert!((lhs - 0.5 * (1.0 - gamma)).abs() < 1e-14);
        }
    }

    #[test]
    fn cap_balls_constant_increases() {
        let ctx = ctx_with(p12());
        let mut prev = 0.0;
        for t in [0.5, 1.0, 1.5, 2.0, 4.0, 8.0] {
            let c = c_cap_balls(&ctx, t).unwrap();
            assert!(c > prev && c >= 1.0);
            prev = c;
        }
    }

    #[test]
    fn registry_is_complete_and_pure() {
        let ctx = ctx_with(FracParams::new(1, 0.3, 2.0, 2.0).unwrap().with_gamma(0.01).unwrap());
        let args =
            Args { ratio: Some(3.0), eps: Some(0.1), r: Some(2.0), y: Some(1.0), volume: Some(2.0), ..Args::default() };
        for name in REGISTRY {
            let a = eval_constant(name, &ctx, &args).unwrap_or_else(|e| panic!("{name}: {e}"));
            let b = eval_constant(name, &ctx, &args).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{name}");
            assert!(a.is_finite() && a > 0.0, "{name} = {a}");
        }
        assert!(matches!(eval_constant("nope", &ctx, &args), Err(Error::UnknownConstant(_))));
    }

    #[test]
    fn missing_references_are_reported() {
        let ctx = ConstantContext::new(p12());
        assert_eq!(eval_constant("sigma", &ctx, &Args::default()), Err(Error::MissingReference("ref_lambda_ball")));
        assert!(eval_constant("W", &ctx, &Args::ratio(1.0)).is_err());
    }

    #[test]
    fn mazya_constant_decays_like_the_ratio() {
        let ctx = ctx_with(p12());
        let rep =
            asymptotic_probe("M", |_| Ok((ctx, Args::default())), ProbeVariable::Ratio, &[10.0, 20.0, 40.0], -0.5)
                .unwrap_err();
        // the family must pass the ratio through
        assert!(matches!(rep, Error::InvalidParams(_)));
        let rep =
            asymptotic_probe("M", |r| Ok((ctx, Args::ratio(r))), ProbeVariable::Ratio, &[100.0, 200.0, 400.0], -0.5)
                .unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(rep.drift < 0.15, "{rep:?}");
    }

    #[test]
    fn upper_constant_blows_up_like_one_over_one_minus_gamma() {
        let ctx = ctx_with(FracParams::new(1, 0.5, 1.0, 1.0).unwrap());
        let rep =
            asymptotic_probe("C_upper", |g| Ok((ctx, Args::gamma(g))), ProbeVariable::Gamma, &[0.9, 0.95, 0.99], -1.0)
                .unwrap();
        assert!(rep.pass && rep.drift < 0.15, "{rep:?}");
    }
}
