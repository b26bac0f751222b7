//! Verification reports and their JSON and CSV forms.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Non-finite values are written as the strings `"inf"`, `"-inf"` and `"nan"`.
mod real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(de::Error::custom(format!("bad real `{s}`"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// `lhs ≤ rhs`.
    Le,
    /// `lhs = rhs`.
    Eq,
    /// `lhs` is a drift that must stay below the tolerance.
    Plateau,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Le => "le",
            Relation::Eq => "eq",
            Relation::Plateau => "plateau",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    #[serde(with = "real")]
    pub lhs: f64,
    #[serde(with = "real")]
    pub rhs: f64,
    pub relation: Relation,
    #[serde(with = "real")]
    pub tolerance: f64,
    /// Non-negative iff the relation holds within tolerance.
    #[serde(with = "real")]
    pub slack: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

fn scale(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        rhs.abs()
    } else {
        lhs.abs().max(1.0)
    }
}

impl Check {
    fn build(id: &str, description: &str, lhs: f64, rhs: f64, relation: Relation, tolerance: f64, slack: f64) -> Self {
        Check {
            id: id.to_string(),
            description: description.to_string(),
            lhs,
            rhs,
            relation,
            tolerance,
            slack,
            pass: slack >= 0.0,
            runtime_ms: None,
            samples: None,
            violations: None,
            diagnostic: None,
        }
    }

    /// `lhs ≤ rhs` up to a relative tolerance.
    pub fn le(id: &str, description: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = (rhs - lhs) / scale(lhs, rhs) + tolerance;
        Check::build(id, description, lhs, rhs, Relation::Le, tolerance, slack)
    }

    /// `lhs = rhs` up to a relative tolerance.
    pub fn eq(id: &str, description: &str, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let slack = tolerance - (lhs - rhs).abs() / scale(lhs, rhs);
        Check::build(id, description, lhs, rhs, Relation::Eq, tolerance, slack)
    }

    /// A drift `lhs` measured against zero.
    pub fn plateau(id: &str, description: &str, drift: f64, tolerance: f64) -> Self {
        Check::build(id, description, drift, 0.0, Relation::Plateau, tolerance, tolerance - drift)
    }

    /// A check that could not be evaluated.
    pub fn failed(id: &str, description: &str, relation: Relation, diagnostic: String) -> Self {
        let mut c = Check::build(id, description, f64::NAN, f64::NAN, relation, f64::NAN, f64::NAN);
        c.diagnostic = Some(diagnostic);
        c
    }

    pub fn with_diagnostic(mut self, diagnostic: impl Into<String>) -> Self {
        self.diagnostic = Some(diagnostic.into());
        self
    }

    /// Folds the outcome of a randomized check into this worst-case check.
    pub fn with_samples(mut self, samples: usize, violations: usize) -> Self {
        self.samples = Some(samples);
        self.violations = Some(violations);
        self.pass = self.pass && violations == 0 && samples > 0;
        self
    }

    /// Marks the check failed unless `ok`, keeping the numbers.
    pub fn require(mut self, ok: bool, why: &str) -> Self {
        if !ok {
            self.pass = false;
            let note = match self.diagnostic.take() {
                Some(d) => format!("{d}; {why}"),
                None => why.to_string(),
            };
            self.diagnostic = Some(note);
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(with = "real")]
    pub exact: f64,
    #[serde(with = "real")]
    pub discrete_1d: f64,
    #[serde(with = "real")]
    pub discrete_2d: f64,
    #[serde(with = "real")]
    pub plateau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Parameter tuples `(N, s, p, q)` exercised by the suite.
    pub params: Vec<String>,
    #[serde(with = "real")]
    pub h: f64,
    pub seed: u64,
    pub version: String,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub pass: bool,
    pub environment: Environment,
    pub checks: Vec<Check>,
}

impl Report {
    /// Sorts checks by id and sets the overall verdict.
    pub fn new(suite: &str, environment: Environment, mut checks: Vec<Check>) -> Self {
        checks.sort_by(|a, b| a.id.cmp(&b.id));
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Report { suite: suite.to_string(), pass, environment, checks }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))
    }

    pub fn to_csv(&self) -> Result<String, Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let bad = |e: csv::Error| Error::Report(e.to_string());
        w.write_record(["suite", "id", "relation", "lhs", "rhs", "tolerance", "slack", "pass", "description"])
            .map_err(bad)?;
        for c in &self.checks {
            w.write_record([
                self.suite.as_str(),
                &c.id,
                c.relation.as_str(),
                &c.lhs.to_string(),
                &c.rhs.to_string(),
                &c.tolerance.to_string(),
                &c.slack.to_string(),
                if c.pass { "true" } else { "false" },
                &c.description,
            ])
            .map_err(bad)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_signs() {
        assert!(Check::le("a", "", 1.0, 2.0, 0.0).pass);
        assert!(!Check::le("a", "", 2.0, 1.0, 0.5).pass);
        assert!(Check::le("a", "", 1.01, 1.0, 0.02).pass);
        assert!(Check::eq("a", "", 1.01, 1.0, 0.02).pass);
        assert!(!Check::eq("a", "", 1.03, 1.0, 0.02).pass);
        assert!(Check::plateau("a", "", 0.1, 0.15).pass);
        assert!(!Check::le("a", "", f64::NAN, 1.0, 0.1).pass);
    }

    #[test]
    fn failed_checks_fail() {
        let c = Check::failed("x", "", Relation::Eq, "solver diverged".into());
        assert!(!c.pass);
        assert!(!Check::le("a", "", 1.0, 2.0, 0.0).with_samples(5, 1).pass);
        assert!(!Check::le("a", "", 1.0, 2.0, 0.0).require(false, "set mismatch").pass);
    }
}
