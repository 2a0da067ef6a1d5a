//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::BinSpec;
use crate::model::{validate_triplet, LevyTriplet};
use crate::pathsim::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Classify,
    Qx,
    Identity,
    Consistency,
    Zoo,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Classify => "classify",
            ExperimentKind::Qx => "qx",
            ExperimentKind::Identity => "identity",
            ExperimentKind::Consistency => "consistency",
            ExperimentKind::Zoo => "zoo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

fn default_n() -> usize {
    10_000
}

fn default_min_crossed() -> u64 {
    30
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triplet: Option<LevyTriplet>,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<BinSpec>,
    /// Degeneracy tolerance; engine default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_min_crossed")]
    pub min_crossed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            triplet: None,
            levels: Vec::new(),
            strict: false,
            n: default_n(),
            sim: SimConfig::default(),
            b: None,
            c: None,
            bins: None,
            delta: None,
            min_crossed: default_min_crossed(),
            output: None,
            format: OutputFormat::Csv,
        }
    }

    /// Every problem with the config, not just the first.
    pub fn problems(&self) -> Vec<String> {
        use ExperimentKind::*;
        let mut out: Vec<String> = self.sim.problems().into_iter().map(|p| format!("sim: {p}")).collect();
        let needs_triplet = self.experiment != Zoo;
        match &self.triplet {
            Some(t) => {
                let report = validate_triplet(t);
                out.extend(report.violations.iter().map(|v| format!("triplet: {}", v.message)));
            }
            None if needs_triplet => out.push(format!("{} requires a triplet", self.experiment.as_str())),
            None => {}
        }
        if self.levels.iter().any(|l| !l.is_finite()) {
            out.push("levels must be finite".into());
        }
        match self.experiment {
            Qx if self.levels.is_empty() => out.push("qx requires at least one level".into()),
            Consistency if self.levels.len() < 2 => out.push("consistency requires at least 2 levels".into()),
            Consistency if self.levels.iter().any(|l| *l <= 0.0) => out.push("consistency levels must be > 0".into()),
            Identity => match (self.b, self.c) {
                (Some(b), Some(c)) if c > 0.0 && c < b && b.is_finite() => {}
                (Some(_), Some(_)) => out.push("require 0<c<b".into()),
                _ => out.push("identity requires b and c".into()),
            },
            _ => {}
        }
        if let Some(bins) = &self.bins {
            if let Err(e) = bins.validate() {
                out.push(format!("bins: {e}"));
            }
        }
        if self.n == 0 && self.experiment != Classify {
            out.push("n must be >= 1".into());
        }
        if let Some(d) = self.delta {
            if !(d >= 0.0 && d.is_finite()) {
                out.push("delta must be finite and >= 0".into());
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p.join("; ")))
        }
    }
}

/// Parses and validates a config document. Parse errors name the offending
/// field path and position.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config(format!(
            "at `{path}` (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
