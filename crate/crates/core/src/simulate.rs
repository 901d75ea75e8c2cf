//! Two-cluster linear mixed-effects generator for artificial micro-panels.
//!
//! Subject `i` of cluster `g` follows
//! `y_it = (b0_g + u0_i) + (b1_g + u1_i) * D_t + e_it`, with `(u0, u1)`
//! bivariate normal (variances `var_u0`, `var_u1`, correlation `corr`) and
//! `e_it` i.i.d. normal with variance `var_e`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{MicroPanel, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedModelParams {
    pub b0: f64,
    pub b1: f64,
    pub var_u0: f64,
    pub var_u1: f64,
    pub corr: f64,
    pub var_e: f64,
}

impl MixedModelParams {
    pub const fn new(b0: f64, b1: f64, var_u0: f64, var_u1: f64, corr: f64, var_e: f64) -> Self {
        Self {
            b0,
            b1,
            var_u0,
            var_u1,
            corr,
            var_e,
        }
    }

    fn check(&self) -> Result<()> {
        let all = [
            self.b0,
            self.b1,
            self.var_u0,
            self.var_u1,
            self.corr,
            self.var_e,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite model parameter".into()));
        }
        if self.var_u0 < 0.0 || self.var_u1 < 0.0 || self.var_e < 0.0 {
            return Err(Error::InvalidConfig(
                "variances must be non-negative".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&self.corr) {
            return Err(Error::InvalidConfig(format!(
                "correlation {} outside [-1, 1]",
                self.corr
            )));
        }
        Ok(())
    }
}

/// Multiple-sclerosis patients, high-noise design.
pub const HIGH_NOISE_MS: MixedModelParams =
    MixedModelParams::new(-0.0600, -0.7400, 0.9999, 0.1000, 0.0390, 2.1015);
/// Healthy controls, high-noise design.
pub const HIGH_NOISE_HC: MixedModelParams =
    MixedModelParams::new(-0.3361, -0.2000, 0.0703, 0.0586, -0.0040, 1.3677);
/// Multiple-sclerosis patients, low-noise design.
pub const LOW_NOISE_MS: MixedModelParams =
    MixedModelParams::new(-0.0600, -0.7400, 0.9999, 0.0100, 0.0120, 0.1000);
/// Healthy controls, low-noise design.
pub const LOW_NOISE_HC: MixedModelParams =
    MixedModelParams::new(-0.3361, -0.2000, 0.0703, 0.0100, -0.0020, 0.1000);

/// The four preset study designs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    BalancedLow,
    BalancedHigh,
    UnbalancedLow,
    UnbalancedHigh,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::BalancedLow,
        Scenario::BalancedHigh,
        Scenario::UnbalancedLow,
        Scenario::UnbalancedHigh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BalancedLow => "balanced-low",
            Scenario::BalancedHigh => "balanced-high",
            Scenario::UnbalancedLow => "unbalanced-low",
            Scenario::UnbalancedHigh => "unbalanced-high",
        }
    }

    pub fn config(self, seed: u64) -> ScenarioConfig {
        let (n_subjects, proportions) = match self {
            Scenario::BalancedLow | Scenario::BalancedHigh => (200, vec![0.5, 0.5]),
            Scenario::UnbalancedLow | Scenario::UnbalancedHigh => (800, vec![0.75, 0.25]),
        };
        let params = match self {
            Scenario::BalancedLow | Scenario::UnbalancedLow => vec![LOW_NOISE_MS, LOW_NOISE_HC],
            Scenario::BalancedHigh | Scenario::UnbalancedHigh => vec![HIGH_NOISE_MS, HIGH_NOISE_HC],
        };
        ScenarioConfig {
            name: self.name().to_string(),
            n_subjects,
            proportions,
            params,
            times: default_times(),
            seed,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::UnknownScenario {
                name: s.to_string(),
                valid: Scenario::ALL.map(Scenario::name).join(", "),
            })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Five annual visits.
pub fn default_times() -> Vec<f64> {
    vec![0.0, 1.0, 2.0, 3.0, 4.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub n_subjects: usize,
    /// Cluster fractions, summing to 1.
    pub proportions: Vec<f64>,
    /// One parameter set per cluster.
    pub params: Vec<MixedModelParams>,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 {
            return Err(Error::InvalidConfig("n_subjects must be positive".into()));
        }
        if self.proportions.is_empty() || self.proportions.len() != self.params.len() {
            return Err(Error::InvalidConfig(format!(
                "{} proportions for {} parameter sets",
                self.proportions.len(),
                self.params.len()
            )));
        }
        if self.proportions.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidConfig(
                "proportions must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "proportions sum to {sum}, not 1"
            )));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidConfig("times must be finite".into()));
        }
        if self.times.len() < 3 || self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "times must be strictly increasing with at least 3 points".into(),
            ));
        }
        self.params.iter().try_for_each(MixedModelParams::check)?;
        self.cluster_sizes().map(|_| ())
    }

    /// Per-cluster subject counts: rounded proportions, with the last cluster
    /// taking the remainder.
    pub fn cluster_sizes(&self) -> Result<Vec<usize>> {
        let n = self.n_subjects;
        let mut sizes: Vec<usize> = self
            .proportions
            .iter()
            .map(|p| (p * n as f64).round() as usize)
            .collect();
        let head: usize = sizes[..sizes.len() - 1].iter().sum();
        if head > n {
            return Err(Error::InvalidConfig(
                "rounded cluster sizes exceed n_subjects".into(),
            ));
        }
        *sizes.last_mut().expect("non-empty") = n - head;
        Ok(sizes)
    }
}

/// Preset configuration for one of the four named designs.
pub fn builtin_scenario(name: &str, seed: u64) -> Result<ScenarioConfig> {
    Ok(name.parse::<Scenario>()?.config(seed))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedPanel {
    pub panel: MicroPanel,
    pub config: ScenarioConfig,
}

/// Draws one panel. Subjects are numbered from 1, cluster by cluster; truth
/// labels are the 1-based cluster indices.
pub fn generate(config: &ScenarioConfig) -> Result<SimulatedPanel> {
    config.validate()?;
    let sizes = config.cluster_sizes()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trajectories = Vec::with_capacity(config.n_subjects);
    let mut truth = std::collections::BTreeMap::new();
    let mut next_id = 1usize;

    for (g, (&count, p)) in sizes.iter().zip(&config.params).enumerate() {
        let (sd0, sd1, sde) = (p.var_u0.sqrt(), p.var_u1.sqrt(), p.var_e.sqrt());
        let resid = (1.0 - p.corr * p.corr).max(0.0).sqrt();
        for _ in 0..count {
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let u0 = sd0 * z0;
            let u1 = sd1 * (p.corr * z0 + resid * z1);
            let (intercept, slope) = (p.b0 + u0, p.b1 + u1);
            let values = config
                .times
                .iter()
                .map(|&t| {
                    let e: f64 = rng.sample(StandardNormal);
                    intercept + slope * t + sde * e
                })
                .collect();
            let id = next_id.to_string();
            next_id += 1;
            truth.insert(id.clone(), g + 1);
            trajectories.push(Trajectory::new(id, config.times.clone(), values)?);
        }
    }
    let panel = MicroPanel::new(trajectories).with_truth(truth)?;
    Ok(SimulatedPanel {
        panel,
        config: config.clone(),
    })
}

/// Derives the seed of replication `r` from a master seed.
///
/// This is element `r` of the SplitMix64 sequence started at `master`, so it
/// does not depend on how many replications run or in which order.
pub fn split_seed(master: u64, replication: u64) -> u64 {
    let mut z = master.wrapping_add(
        replication
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15),
    );
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
