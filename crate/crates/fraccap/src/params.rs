use crate::prelude::*;

const EXPONENT_EPS: f64 = 1e-12;

/// Exponents `(N, s, p, q)` and an optional negligibility level `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    pub dim: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub gamma: Option<f64>,
    pub allow_supercritical: bool,
}

impl FracParams {
    pub fn new(dim: usize, s: f64, p: f64, q: f64) -> Result<Self> {
        let params = FracParams { dim, s, p, q, gamma: None, allow_supercritical: false };
        params.validate()?;
        Ok(params)
    }

    /// Like [`FracParams::new`] but accepts `sp > N`.
    pub fn supercritical(dim: usize, s: f64, p: f64, q: f64) -> Result<Self> {
        let params = FracParams { dim, s, p, q, gamma: None, allow_supercritical: true };
        params.validate()?;
        Ok(params)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = Some(gamma);
        self.validate()?;
        Ok(self)
    }

    pub fn with_s(mut self, s: f64) -> Result<Self> {
        self.s = s;
        self.validate()?;
        Ok(self)
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.p = p;
        self.validate()?;
        Ok(self)
    }

    pub fn with_q(mut self, q: f64) -> Result<Self> {
        self.q = q;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(Error::InvalidParams(format!("dimension {} not in {{1, 2}}", self.dim)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidParams(format!("s = {} not in (0, 1)", self.s)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!("p = {} must be finite and >= 1", self.p)));
        }
        if !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::InvalidParams(format!("q = {} must be finite and >= 1", self.q)));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::InvalidParams(format!("gamma = {g} not in (0, 1)")));
            }
        }
        let n = self.dim as f64;
        if self.sp() > n + EXPONENT_EPS && !self.allow_supercritical {
            return Err(Error::InvalidParams(format!("sp = {} exceeds N = {}", self.sp(), self.dim)));
        }
        if let Some(crit) = self.sobolev_exponent() {
            if self.q > crit * (1.0 + EXPONENT_EPS) {
                return Err(Error::InvalidParams(format!("q = {} exceeds the critical exponent {crit}", self.q)));
            }
        }
        Ok(())
    }

    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// Kernel exponent `N + sp`.
    pub fn kernel_exponent(&self) -> f64 {
        self.dim as f64 + self.sp()
    }

    /// `p*_s = Np / (N - sp)` when `sp < N`, `None` otherwise.
    pub fn sobolev_exponent(&self) -> Option<f64> {
        let n = self.dim as f64;
        if self.sp() < n - EXPONENT_EPS {
            Some(n * self.p / (n - self.sp()))
        } else {
            None
        }
    }

    pub fn is_conformal(&self) -> bool {
        (self.sp() - self.dim as f64).abs() <= EXPONENT_EPS
    }

    /// Scaling exponent of `λ_{p,q}`: `λ(tΩ) = t^{-α} λ(Ω)`.
    pub fn alpha(&self) -> f64 {
        let n = self.dim as f64;
        self.sp() - n + n * self.p / self.q
    }

    /// Scaling exponent `N - sp` of energies and capacities.
    pub fn energy_scaling(&self) -> f64 {
        self.dim as f64 - self.sp()
    }

    pub fn require_p_le_q(&self) -> Result<()> {
        if self.p > self.q * (1.0 + EXPONENT_EPS) {
            return Err(Error::InvalidParams(format!("operation needs p <= q, got p = {} and q = {}", self.p, self.q)));
        }
        Ok(())
    }

    pub fn require_gamma(&self) -> Result<f64> {
        self.gamma.ok_or_else(|| Error::InvalidParams("operation needs gamma".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_exponents() {
        assert!(FracParams::new(3, 0.5, 2.0, 2.0).is_err());
        assert!(FracParams::new(1, 1.0, 2.0, 2.0).is_err());
        assert!(FracParams::new(1, 0.5, 0.5, 2.0).is_err());
        assert!(FracParams::new(1, 0.5, 2.0, 0.5).is_err());
        assert!(FracParams::new(1, 0.5, 2.0, 2.0).unwrap().with_gamma(1.0).is_err());
    }

    #[test]
    fn supercritical_needs_flag() {
        assert!(FracParams::new(1, 0.75, 2.0, 2.0).is_err());
        assert!(FracParams::supercritical(1, 0.75, 2.0, 2.0).is_ok());
    }

    #[test]
    fn q_bounded_by_critical_exponent() {
        // p* = 1 * 2 / (1 - 0.5) = 4
        assert!(FracParams::new(1, 0.25, 2.0, 4.0).is_ok());
        assert!(FracParams::new(1, 0.25, 2.0, 4.5).is_err());
        // conformal: any finite q
        assert!(FracParams::new(1, 0.5, 2.0, 40.0).is_ok());
    }

    #[test]
    fn alpha_matches_definition() {
        let p = FracParams::new(2, 0.5, 2.0, 3.0).unwrap();
        assert!((p.alpha() - (1.0 - 2.0 + 4.0 / 3.0)).abs() < 1e-15);
        assert!(p.require_p_le_q().is_ok());
        assert!(FracParams::new(1, 0.25, 2.0, 1.0).unwrap().require_p_le_q().is_err());
    }
}
