//! Cluster-validity indices: Rand, adjusted Rand (Hubert–Arabie), mean
//! silhouette and Dunn.
//!
//! Rand and adjusted Rand compare two partitions of the same objects and are
//! computed from the contingency table. Silhouette and Dunn judge a single
//! partition against a distance matrix.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::cluster::DistanceMatrix;
use crate::error::{Error, Result};

/// Two labelings of the same objects.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionPair<'a, L> {
    a: &'a [L],
    b: &'a [L],
}

impl<'a, L: Eq + Hash> PartitionPair<'a, L> {
    pub fn new(a: &'a [L], b: &'a [L]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(Error::TooFewRows {
                required: 2,
                actual: a.len(),
            });
        }
        Ok(Self { a, b })
    }

    fn pair_counts(&self) -> PairCounts {
        let mut joint: HashMap<(&L, &L), u64> = HashMap::new();
        let mut rows: HashMap<&L, u64> = HashMap::new();
        let mut cols: HashMap<&L, u64> = HashMap::new();
        for (x, y) in self.a.iter().zip(self.b) {
            *joint.entry((x, y)).or_default() += 1;
            *rows.entry(x).or_default() += 1;
            *cols.entry(y).or_default() += 1;
        }
        let choose2 = |c: &u64| c * c.saturating_sub(1) / 2;
        PairCounts {
            total: choose2(&(self.a.len() as u64)),
            both: joint.values().map(choose2).sum(),
            in_a: rows.values().map(choose2).sum(),
            in_b: cols.values().map(choose2).sum(),
        }
    }
}

/// Numbers of object pairs placed together in both, in `a`, and in `b`.
struct PairCounts {
    total: u64,
    both: u64,
    in_a: u64,
    in_b: u64,
}

/// Fraction of object pairs on which the two partitions agree.
pub fn rand_index<L: Eq + Hash>(pair: &PartitionPair<'_, L>) -> f64 {
    let c = pair.pair_counts();
    let agree = c.both + (c.total + c.both - c.in_a - c.in_b);
    agree as f64 / c.total as f64
}

/// Chance-corrected Rand index. Returns 1 when the maximum and expected
/// index coincide (both partitions trivial and identical).
pub fn adjusted_rand_index<L: Eq + Hash>(pair: &PartitionPair<'_, L>) -> f64 {
    let c = pair.pair_counts();
    let index = c.both as f64;
    let expected = c.in_a as f64 * c.in_b as f64 / c.total as f64;
    let max = 0.5 * (c.in_a + c.in_b) as f64;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// Maps labels to `0..k` in order of first appearance.
fn dense_labels<L: Eq + Hash>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut seen: HashMap<&L, usize> = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = seen.len();
            *seen.entry(l).or_insert(next)
        })
        .collect();
    (dense, seen.len())
}

fn check_len(dist: &DistanceMatrix, n: usize) -> Result<()> {
    if dist.n() != n {
        return Err(Error::LengthMismatch {
            left: dist.n(),
            right: n,
        });
    }
    Ok(())
}

/// Mean silhouette width.
///
/// Objects alone in their cluster score 0, and a partition with fewer than
/// two or more than `n - 1` clusters scores 0 overall.
pub fn silhouette_mean<L: Eq + Hash>(dist: &DistanceMatrix, labels: &[L]) -> Result<f64> {
    let n = labels.len();
    check_len(dist, n)?;
    let (dense, k) = dense_labels(labels);
    if k < 2 || k + 1 > n {
        return Ok(0.0);
    }
    let mut size = vec![0usize; k];
    for &c in &dense {
        size[c] += 1;
    }
    let mut sums = vec![0.0; k];
    let mut total = 0.0;
    for i in 0..n {
        let own = dense[i];
        if size[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[dense[j]] += dist.get(i, j);
            }
        }
        let a = sums[own] / (size[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / size[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        if m > 0.0 {
            total += (b - a) / m;
        }
    }
    Ok(total / n as f64)
}

/// Smallest between-cluster distance over the largest cluster diameter.
/// A zero diameter gives `f64::INFINITY`.
pub fn dunn_index<L: Eq + Hash>(dist: &DistanceMatrix, labels: &[L]) -> Result<f64> {
    let n = labels.len();
    check_len(dist, n)?;
    let (dense, k) = dense_labels(labels);
    if k < 2 {
        return Err(Error::TooFewClusters { k });
    }
    let mut separation = f64::INFINITY;
    let mut diameter: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let d = dist.get(i, j);
            if dense[i] == dense[j] {
                diameter = diameter.max(d);
            } else {
                separation = separation.min(d);
            }
        }
    }
    if diameter == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(separation / diameter)
}

/// Serializes finite values as numbers and non-finite ones as `"inf"`,
/// `"-inf"` or `"NaN"`.
pub(crate) mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("NaN")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Num {
            F(f64),
            S(String),
        }
        match Num::deserialize(d)? {
            Num::F(v) => Ok(v),
            Num::S(s) => s.parse::<f64>().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub rand: f64,
    pub adjusted_rand: f64,
    pub silhouette: f64,
    /// `f64::INFINITY` (serialized as `"inf"`) when no cluster has spread.
    #[serde(with = "extended_f64")]
    pub dunn: f64,
}

impl IndexReport {
    /// Scores `predicted` against `truth` and against the distances the
    /// clustering was computed from. A single-cluster partition gets Dunn 0.
    pub fn evaluate<L: Eq + Hash>(
        truth: &[L],
        predicted: &[L],
        dist: &DistanceMatrix,
    ) -> Result<Self> {
        let pair = PartitionPair::new(truth, predicted)?;
        let dunn = match dunn_index(dist, predicted) {
            Ok(v) => v,
            Err(Error::TooFewClusters { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(Self {
            rand: rand_index(&pair),
            adjusted_rand: adjusted_rand_index(&pair),
            silhouette: silhouette_mean(dist, predicted)?,
            dunn,
        })
    }
}
