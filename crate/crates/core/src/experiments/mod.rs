//! Scenario engine: sweeps over `μ`, `α` and both, the far-patch gap fit,
//! the three reference simulations and envelope reports, with CSV and SVG
//! emission.

mod figures;
pub mod output;
mod sweeps;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::domain::{two_patch, Domain1D, TwoPatch};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernel::Alpha;
use crate::steady::MarchConfig;

pub use figures::{reproduce_figures, FigureOutcome, FigureReport, FigureSpec};
pub use sweeps::{
    admissible_range, gap_exponent, joint_target_midpoint, sweep_alpha, sweep_joint, sweep_mu,
    zero_crossing, AlphaSweep, GapReport, JointStep, JointSweep, SweepRecord,
};

pub const DEFAULT_SWEEP_H: f64 = 1.0 / 128.0;

/// Where the scenario's domain comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    /// Two patches of lengths `a1`, `a2` at distance `2μ`, with `μ` taken
    /// from the sweep list.
    TwoPatch { a1: f64, a2: f64 },
    Explicit(Domain1D),
}

impl DomainSpec {
    pub fn at(&self, mu: f64) -> Result<Domain1D> {
        match self {
            DomainSpec::TwoPatch { a1, a2 } => Ok(two_patch(TwoPatch::new(*a1, *a2, mu)?)),
            DomainSpec::Explicit(d) => Ok(d.clone()),
        }
    }

    pub fn patch_lengths(&self) -> Result<(f64, f64)> {
        match self {
            DomainSpec::TwoPatch { a1, a2 } => Ok((*a1, *a2)),
            DomainSpec::Explicit(_) => {
                Err(Error::Config("this command needs a two_patch domain".into()))
            }
        }
    }
}

fn default_scenario() -> String {
    "scenario".into()
}
fn default_h() -> f64 {
    DEFAULT_SWEEP_H
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}
fn default_mu() -> Vec<f64> {
    vec![0.0]
}
fn default_true() -> bool {
    true
}
fn default_tol() -> f64 {
    1e-10
}

/// Scenario configuration, read from a single JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    pub domain: DomainSpec,
    pub alpha: Vec<f64>,
    #[serde(default = "default_mu")]
    pub mu: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub march: MarchConfig,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Tolerance of the monotone steady iteration.
    #[serde(default = "default_tol")]
    pub steady_tol: f64,
    /// Target of the joint sweep; the midpoint of the admissible range
    /// when absent.
    #[serde(default)]
    pub xi_star: Option<f64>,
    /// Plus-patch centers for the far-field decay fit.
    #[serde(default)]
    pub plus_centers: Vec<f64>,
    /// Cap `ε` of the envelope; half the shortest interval when absent.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_true")]
    pub parallel: bool,
}

impl SweepConfig {
    pub fn new(scenario: &str, domain: DomainSpec, alpha: Vec<f64>, mu: Vec<f64>) -> Self {
        SweepConfig {
            scenario: scenario.into(),
            domain,
            alpha,
            mu,
            h: DEFAULT_SWEEP_H,
            march: MarchConfig::default(),
            output: default_output(),
            steady_tol: default_tol(),
            xi_star: None,
            plus_centers: Vec::new(),
            eps: None,
            parallel: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SweepConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.alpha.is_empty() {
            return bad("alpha list is empty".into());
        }
        if self.mu.is_empty() {
            return bad("mu list is empty".into());
        }
        for &a in &self.alpha {
            if Alpha::new(a).is_err() {
                return bad(format!("alpha must lie in (0, 1), got {a}"));
            }
        }
        if self.mu.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return bad("mu values must be finite and nonnegative".into());
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.steady_tol > 0.0) {
            return bad("steady_tol must be positive".into());
        }
        if let DomainSpec::TwoPatch { a1, a2 } = self.domain {
            if !(a1 > 0.0 && a2 > 0.0) {
                return bad("patch lengths must be positive".into());
            }
        }
        self.march.validate()
    }

    pub fn alphas(&self) -> Result<Vec<Alpha>> {
        self.alpha
            .iter()
            .map(|&a| Alpha::new(a).map_err(|e| Error::Config(e.to_string())))
            .collect()
    }

    pub fn execution(&self) -> Execution {
        if self.parallel {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let text = r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[0.5],"mu":[0.0,0.5]}"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        assert_eq!(cfg.h, DEFAULT_SWEEP_H);
        assert_eq!(cfg.march, MarchConfig::default());
        assert_eq!(cfg.domain.patch_lengths().unwrap(), (2.0, 2.0));
        let back = SweepConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn explicit_domain_parses() {
        let text = r#"{"domain":{"intervals":[[0.0,4.0],[19.5,20.5]],"tags":["minus","plus"]},"alpha":[0.5]}"#;
        let cfg = SweepConfig::from_json(text).unwrap();
        let d = cfg.domain.at(0.0).unwrap();
        assert_eq!(d.len(), 2);
        assert!(cfg.domain.patch_lengths().is_err());
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        for text in [
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[]}"#,
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[1.5]}"#,
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[0.5],"mu":[-1.0]}"#,
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[0.5],"h":0.0}"#,
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[0.5],"march":{"dt":-1.0}}"#,
            r#"{"domain":{"a1":2.0,"a2":2.0},"alpha":[0.5],"bogus":1}"#,
            r#"not json"#,
        ] {
            assert!(matches!(SweepConfig::from_json(text), Err(Error::Config(_))), "{text}");
        }
    }
}
