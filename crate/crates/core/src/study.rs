//! Replication study and timing harness.
//!
//! A replication generates one panel, clusters it and scores the partition
//! with all four validity indices. Replication `r` draws its data from
//! `split_seed(master_seed, r)`, so results do not depend on scheduling.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{cut, euclidean_distances, ward_dendrogram};
use crate::error::{Error, Result};
use crate::features::{extract_features, standardize, Scaling};
use crate::simulate::{builtin_scenario, generate, split_seed, ScenarioConfig};
use crate::validity::{extended_f64, IndexReport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub scenario: ScenarioConfig,
    pub replications: usize,
    /// Number of clusters the dendrogram is cut into.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub scaling: Scaling,
    #[serde(default)]
    pub master_seed: u64,
}

fn default_k() -> usize {
    2
}

impl StudyConfig {
    pub fn builtin(name: &str, replications: usize, master_seed: u64) -> Result<Self> {
        Ok(Self {
            scenario: builtin_scenario(name, master_seed)?,
            replications,
            k: default_k(),
            scaling: Scaling::None,
            master_seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidConfig(
                "replications must be at least 1".into(),
            ));
        }
        if self.k == 0 || self.k > self.scenario.n_subjects {
            return Err(Error::InvalidK {
                k: self.k,
                n: self.scenario.n_subjects,
            });
        }
        self.scenario.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub indices: IndexReport,
}

/// Runs one replication end to end.
pub fn run_replication(config: &StudyConfig, replication: u64) -> Result<ReplicationRecord> {
    let mut scenario = config.scenario.clone();
    scenario.seed = split_seed(config.master_seed, replication);
    let sim = generate(&scenario)?;
    let features = standardize(&extract_features(&sim.panel), config.scaling)?;
    let dist = euclidean_distances(&features)?;
    let assignment = cut(&ward_dendrogram(&features)?, config.k)?;
    let truth = sim
        .panel
        .truth_labels()
        .ok_or_else(|| Error::TruthMismatch("simulated panel lacks truth".into()))?;
    Ok(ReplicationRecord {
        replication,
        seed: scenario.seed,
        indices: IndexReport::evaluate(&truth, &assignment.labels, &dist)?,
    })
}

/// All replications, in replication order, run on the current rayon pool.
pub fn run_replications(config: &StudyConfig) -> Result<Vec<ReplicationRecord>> {
    config.validate()?;
    (1..=config.replications as u64)
        .into_par_iter()
        .map(|r| run_replication(config, r))
        .collect()
}

pub fn run_study(config: &StudyConfig) -> Result<StudySummary> {
    let records = run_replications(config)?;
    Ok(StudySummary::from_records(config, &records))
}

pub fn write_records_jsonl<W: Write>(records: &[ReplicationRecord], mut sink: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut sink, r)?;
        sink.write_all(b"\n")?;
    }
    Ok(())
}

/// Descriptive statistics of one index across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexStats {
    pub count: usize,
    #[serde(with = "extended_f64")]
    pub median: f64,
    #[serde(with = "extended_f64")]
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    #[serde(with = "extended_f64")]
    pub std_dev: f64,
    #[serde(with = "extended_f64")]
    pub q1: f64,
    #[serde(with = "extended_f64")]
    pub q3: f64,
}

/// Quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = h - lo as f64;
            if frac == 0.0 {
                sorted[lo]
            } else {
                sorted[lo] + frac * (sorted[hi] - sorted[lo])
            }
        }
    }
}

impl IndexStats {
    pub fn from_values(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_dev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            f64::NAN
        };
        Self {
            count: n,
            median: quantile_sorted(&sorted, 0.5),
            mean,
            std_dev,
            q1: quantile_sorted(&sorted, 0.25),
            q3: quantile_sorted(&sorted, 0.75),
        }
    }
}

type StatCell = fn(&IndexStats) -> String;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub scenario: String,
    pub replications: usize,
    pub k: usize,
    pub scaling: Scaling,
    pub master_seed: u64,
    pub rand: IndexStats,
    pub adjusted_rand: IndexStats,
    pub silhouette: IndexStats,
    pub dunn: IndexStats,
}

impl StudySummary {
    pub fn from_records(config: &StudyConfig, records: &[ReplicationRecord]) -> Self {
        let column = |f: fn(&IndexReport) -> f64| -> Vec<f64> {
            records.iter().map(|r| f(&r.indices)).collect()
        };
        Self {
            scenario: config.scenario.name.clone(),
            replications: records.len(),
            k: config.k,
            scaling: config.scaling,
            master_seed: config.master_seed,
            rand: IndexStats::from_values(&column(|r| r.rand)),
            adjusted_rand: IndexStats::from_values(&column(|r| r.adjusted_rand)),
            silhouette: IndexStats::from_values(&column(|r| r.silhouette)),
            dunn: IndexStats::from_values(&column(|r| r.dunn)),
        }
    }

    /// Rows in the order used by the published result tables: count,
    /// median, mean, standard deviation, first and third quartile.
    pub fn write_table_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(sink);
        wtr.write_record(["statistic", "rand", "adjusted_rand", "silhouette", "dunn"])?;
        let cols = [
            &self.rand,
            &self.adjusted_rand,
            &self.silhouette,
            &self.dunn,
        ];
        let rows: [(&str, StatCell); 6] = [
            ("No. of vals.", |s| s.count.to_string()),
            ("Median", |s| s.median.to_string()),
            ("Mean", |s| s.mean.to_string()),
            ("Std. dev.", |s| s.std_dev.to_string()),
            ("1st quartile", |s| s.q1.to_string()),
            ("3rd quartile", |s| s.q3.to_string()),
        ];
        for (label, get) in rows {
            let mut record = vec![label.to_string()];
            record.extend(cols.iter().map(|s| get(s)));
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub n: usize,
    /// Medians over repetitions, in seconds.
    pub extract_seconds: f64,
    pub cluster_seconds: f64,
    pub total_seconds: f64,
    pub extract_samples: Vec<f64>,
    pub cluster_samples: Vec<f64>,
    pub total_samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub sizes: Vec<usize>,
    pub t: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub rows: Vec<TimingRow>,
}

impl TimingReport {
    /// Least-squares slope of log clustering time against log size.
    pub fn cluster_complexity_slope(&self) -> f64 {
        loglog_slope(
            &self
                .rows
                .iter()
                .map(|r| (r.n as f64, r.cluster_seconds))
                .collect::<Vec<_>>(),
        )
    }
}

pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, 0.5)
}

/// Times the two pipeline phases on balanced low-noise panels of each size,
/// observed at `t` unit-spaced visits. Runs on the calling thread only.
pub fn run_timing(
    sizes: &[usize],
    t: usize,
    repetitions: usize,
    seed: u64,
) -> Result<TimingReport> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("no sizes to time".into()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidConfig(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let mut scenario = builtin_scenario("balanced-low", seed)?;
        scenario.n_subjects = n;
        scenario.times = (0..t).map(|v| v as f64).collect();
        let (mut ext, mut clu, mut tot) = (Vec::new(), Vec::new(), Vec::new());
        for rep in 0..repetitions {
            scenario.seed = split_seed(seed, (i * repetitions + rep) as u64);
            let panel = generate(&scenario)?.panel;
            let start = Instant::now();
            let features = extract_features(&panel);
            let mid = Instant::now();
            let assignment = cut(&ward_dendrogram(&features)?, 2.min(n))?;
            let end = Instant::now();
            std::hint::black_box(assignment);
            ext.push((mid - start).as_secs_f64());
            clu.push((end - mid).as_secs_f64());
            tot.push((end - start).as_secs_f64());
        }
        rows.push(TimingRow {
            n,
            extract_seconds: median(&ext),
            cluster_seconds: median(&clu),
            total_seconds: median(&tot),
            extract_samples: ext,
            cluster_samples: clu,
            total_samples: tot,
        });
    }
    Ok(TimingReport {
        sizes: sizes.to_vec(),
        t,
        repetitions,
        seed,
        rows,
    })
}
