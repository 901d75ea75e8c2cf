use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clump_core::{builtin_scenario, Scaling, ScenarioConfig};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SCENARIO: &str = "balanced-low";
pub const DEFAULT_STUDY_REPS: usize = 200;
pub const DEFAULT_BENCH_REPS: usize = 3;
pub const DEFAULT_SIZES: [usize; 4] = [1000, 2000, 4000, 8000];
pub const DEFAULT_T: usize = 5;

/// A preset name or a full custom design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Name(String),
    Custom(ScenarioConfig),
}

impl ScenarioSpec {
    /// The design to simulate, with the run's seed and visit count applied.
    pub fn resolve(&self, seed: u64, t: Option<usize>) -> Result<ScenarioConfig> {
        let mut config = match self {
            ScenarioSpec::Name(name) => builtin_scenario(name, seed)?,
            ScenarioSpec::Custom(c) => c.clone(),
        };
        config.seed = seed;
        if let Some(t) = t {
            config.times = (0..t).map(|v| v as f64).collect();
        }
        config.validate()?;
        Ok(config)
    }
}

/// Every knob a run can take. Loaded from `--config`, then overridden by
/// whatever was given on the command line; the merged value is what the
/// manifest records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<Scaling>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignments: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub features: Option<PathBuf>,
}

impl Settings {
    /// Reads a settings file. A run manifest is accepted too, so any run can
    /// be repeated with `--config manifest.json`.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut value: serde_json::Value = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        if let Some(inner) = value.get_mut("config") {
            value = inner.take();
        }
        serde_json::from_value(value).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn merged(self, over: Settings) -> Settings {
        Settings {
            seed: over.seed.or(self.seed),
            out_dir: over.out_dir.or(self.out_dir),
            k: over.k.or(self.k),
            scale: over.scale.or(self.scale),
            scenario: over.scenario.or(self.scenario),
            reps: over.reps.or(self.reps),
            sizes: over.sizes.or(self.sizes),
            t: over.t.or(self.t),
            input: over.input.or(self.input),
            assignments: over.assignments.or(self.assignments),
            truth: over.truth.or(self.truth),
            features: over.features.or(self.features),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn scale(&self) -> Scaling {
        self.scale.unwrap_or_default()
    }

    pub fn scenario(&self) -> ScenarioSpec {
        self.scenario
            .clone()
            .unwrap_or_else(|| ScenarioSpec::Name(DEFAULT_SCENARIO.into()))
    }

    pub fn k(&self) -> Result<usize> {
        match self.k {
            Some(0) => bail!("k must be at least 1"),
            Some(k) => Ok(k),
            None => Ok(2),
        }
    }

    pub fn require<'a>(&self, value: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        value
            .as_deref()
            .with_context(|| format!("no {what} file given"))
    }

    /// Fills in the defaults `subcommand` relies on, so the manifest shows
    /// exactly what ran.
    pub fn resolved(mut self, subcommand: &str) -> Settings {
        self.seed = Some(self.seed());
        self.out_dir = Some(self.out_dir());
        self.scale = Some(self.scale());
        match subcommand {
            "cluster" => self.k = Some(self.k.unwrap_or(2)),
            "simulate" => self.scenario = Some(self.scenario()),
            "study" => {
                self.k = Some(self.k.unwrap_or(2));
                self.scenario = Some(self.scenario());
                self.reps = Some(self.reps.unwrap_or(DEFAULT_STUDY_REPS));
            }
            "bench" => {
                self.reps = Some(self.reps.unwrap_or(DEFAULT_BENCH_REPS));
                self.sizes = Some(self.sizes.unwrap_or_else(|| DEFAULT_SIZES.to_vec()));
                self.t = Some(self.t.unwrap_or(DEFAULT_T));
            }
            _ => {}
        }
        self
    }
}
