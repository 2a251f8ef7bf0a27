//! Machine-readable verification reports.
//!
//! A report holds checks in declaration order and carries no timings, so
//! identical arguments and seeds give byte-identical JSON.

use serde::{Deserialize, Serialize};

use crate::spectral::Certificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// An unasserted measurement; never affects the report verdict.
    Finding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub claim: String,
    pub status: Status,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
}

impl Check {
    /// Passes when `measured` is on the right side of `bound`; NaN fails.
    pub fn compare(
        name: impl Into<String>,
        claim: impl Into<String>,
        measured: f64,
        comparison: Comparison,
        bound: f64,
    ) -> Self {
        let ok = match comparison {
            Comparison::AtMost => measured <= bound,
            Comparison::AtLeast => measured >= bound,
        };
        Check {
            name: name.into(),
            claim: claim.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            measured,
            bound: Some(bound),
            seed: None,
        }
    }

    /// Exact agreement: `measured` counts mismatches and must be 0.
    pub fn exact(name: impl Into<String>, claim: impl Into<String>, mismatches: usize) -> Self {
        Self::compare(name, claim, mismatches as f64, Comparison::AtMost, 0.0)
    }

    pub fn holds(name: impl Into<String>, claim: impl Into<String>, ok: bool) -> Self {
        Self::exact(name, claim, usize::from(!ok))
    }

    pub fn finding(name: impl Into<String>, claim: impl Into<String>, measured: f64) -> Self {
        Check { name: name.into(), claim: claim.into(), status: Status::Finding, measured, bound: None, seed: None }
    }

    pub fn from_certificate(name: impl Into<String>, cert: &Certificate) -> Self {
        Check {
            name: name.into(),
            claim: cert.claim.clone(),
            status: if cert.passed() { Status::Pass } else { Status::Fail },
            measured: cert.measured,
            bound: Some(cert.bound),
            seed: cert.seed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    pub fn new(suite: impl Into<String>, checks: Vec<Check>) -> Self {
        let pass = checks.iter().all(|c| c.status != Status::Fail);
        Report { suite: suite.into(), checks, pass }
    }

    /// Concatenates reports, prefixing each check name with its suite.
    pub fn merge(suite: impl Into<String>, parts: Vec<Report>) -> Self {
        let checks = parts
            .into_iter()
            .flat_map(|r| {
                let prefix = r.suite;
                r.checks.into_iter().map(move |mut c| {
                    c.name = format!("{prefix}/{}", c.name);
                    c
                })
            })
            .collect();
        Self::new(suite, checks)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}
