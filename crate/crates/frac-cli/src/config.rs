//! Harness configuration: `key=value` lines, `#` starts a comment.

use std::collections::HashSet;

use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// One-dimensional lattice spacing; two-dimensional checks use `4h`.
    pub h: f64,
    pub near_band: usize,
    pub tol_exact: f64,
    /// Tolerance for discretisation-limited identities in one dimension;
    /// two-dimensional ones get 5/3 of it.
    pub tol_discrete: f64,
    pub tol_plateau: f64,
    pub corpus_size: usize,
    /// Factor applied to the estimated γ0 in the sandwich checks.
    pub gamma_safety: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            h: 1.0 / 64.0,
            near_band: 2,
            tol_exact: 1e-10,
            tol_discrete: 0.03,
            tol_plateau: 0.15,
            corpus_size: 200,
            gamma_safety: 0.5,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut cfg = Config::default();
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| Error::Config { line, message };
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| err(format!("expected key=value, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            let real = || -> Result<f64, Error> {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v > 0.0)
                    .ok_or_else(|| err(format!("`{key}` needs a positive number, got `{value}`")))
            };
            let count = || -> Result<usize, Error> {
                value.parse::<usize>().map_err(|_| err(format!("`{key}` needs an integer, got `{value}`")))
            };
            match key {
                "h" => cfg.h = real()?,
                "near_band" => cfg.near_band = count()?,
                "tol_exact" => cfg.tol_exact = real()?,
                "tol_discrete" => cfg.tol_discrete = real()?,
                "tol_plateau" => cfg.tol_plateau = real()?,
                "corpus_size" => cfg.corpus_size = count()?,
                "gamma_safety" => {
                    cfg.gamma_safety = real()?;
                    if cfg.gamma_safety >= 1.0 {
                        return Err(err("gamma_safety must be below 1".into()));
                    }
                }
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        if cfg.h > 0.25 {
            return Err(Error::Config { line: 0, message: format!("h = {} is too coarse", cfg.h) });
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text)
    }

    pub fn tol_discrete_for(&self, dim: usize) -> f64 {
        if dim == 1 {
            self.tol_discrete
        } else {
            self.tol_discrete * 5.0 / 3.0
        }
    }

    /// Spacing used for `dim`-dimensional lattices.
    pub fn h_for(&self, dim: usize) -> f64 {
        if dim == 1 {
            self.h
        } else {
            4.0 * self.h
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(Config::parse("# nothing\n\n").unwrap(), Config::default());
    }

    #[test]
    fn reads_every_key() {
        let text = "h = 0.0078125\nnear_band=3\ntol_exact=1e-9 # tighter\ntol_discrete=0.05\ntol_plateau=0.2\ncorpus_size=10\ngamma_safety=0.25\n";
        let cfg = Config::parse(text).unwrap();
        assert_eq!(cfg.h, 1.0 / 128.0);
        assert_eq!(cfg.near_band, 3);
        assert_eq!(cfg.corpus_size, 10);
        assert_eq!(cfg.gamma_safety, 0.25);
        assert_eq!(cfg.h_for(2), 1.0 / 32.0);
    }

    #[test]
    fn rejects_bad_lines() {
        for (text, line) in [
            ("h=0.1\nh=0.2", 2),
            ("colour=red", 1),
            ("h", 1),
            ("corpus_size=-3", 1),
            ("\ntol_exact=nan", 2),
            ("gamma_safety=1.5", 1),
        ] {
            match Config::parse(text) {
                Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
