//! The seven dynamic characteristics that summarise a trajectory.
//!
//! All characteristics are built from the triangular differences
//! `diff_t = (y_t - y_{t-1}) / (2 (D_t - D_{t-1}))` and the growth
//! coefficients `k_t = y_t / y_{t-1}`, plus one geometric feature (the signed
//! maximum angle between the chord from the first to the last observation and
//! the segments from the first observation to each inner point).

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{MicroPanel, Trajectory};

/// Stand-in denominator for `pos_ratio` when no value decreased.
pub const ZERO_DECREASE_DENOMINATOR: f64 = 0.1;

/// Number of characteristics that enter the distance computation.
pub const N_FEATURES: usize = 7;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "mean_diff",
    "sd_diff",
    "mean_abs_diff",
    "sd_abs_diff",
    "mean_growth",
    "pos_ratio",
    "max_angle",
];

const CSV_HEADER: [&str; 9] = [
    "id",
    "mean_diff",
    "sd_diff",
    "mean_abs_diff",
    "sd_abs_diff",
    "mean_growth",
    "pos_ratio",
    "max_angle",
    "degenerate_growth",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub mean_abs_diff: f64,
    pub sd_abs_diff: f64,
    pub mean_growth: f64,
    pub pos_ratio: f64,
    /// Signed, in radians.
    pub max_angle: f64,
    /// Set when the growth rate is undefined (first value zero or the
    /// first/last ratio not positive); `mean_growth` is then 0.
    pub degenerate_growth: bool,
}

impl FeatureVector {
    /// The seven numeric characteristics in canonical column order.
    pub fn to_array(&self) -> [f64; N_FEATURES] {
        [
            self.mean_diff,
            self.sd_diff,
            self.mean_abs_diff,
            self.sd_abs_diff,
            self.mean_growth,
            self.pos_ratio,
            self.max_angle,
        ]
    }

    pub fn from_array(a: [f64; N_FEATURES], degenerate_growth: bool) -> Self {
        Self {
            mean_diff: a[0],
            sd_diff: a[1],
            mean_abs_diff: a[2],
            sd_abs_diff: a[3],
            mean_growth: a[4],
            pos_ratio: a[5],
            max_angle: a[6],
            degenerate_growth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<FeatureVector>,
    pub standardized: bool,
}

impl FeatureMatrix {
    pub fn new(ids: Vec<String>, rows: Vec<FeatureVector>) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: rows.len(),
            });
        }
        Ok(Self {
            ids,
            rows,
            standardized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Row-major copy of the numeric characteristics.
    pub fn points(&self) -> Vec<[f64; N_FEATURES]> {
        self.rows.iter().map(FeatureVector::to_array).collect()
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(sink);
        wtr.write_record(CSV_HEADER)?;
        for (id, row) in self.ids.iter().zip(&self.rows) {
            let mut record = Vec::with_capacity(CSV_HEADER.len());
            record.push(id.clone());
            record.extend(row.to_array().iter().map(f64::to_string));
            record.push(row.degenerate_growth.to_string());
            wtr.write_record(&record)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut records = rdr.records();
        let header = records.next().ok_or(Error::EmptyInput)??;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{}`", CSV_HEADER.join(",")),
            });
        }
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for record in records {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |message: String| Error::Parse { line, message };
            let mut values = [0.0; N_FEATURES];
            for (slot, (cell, name)) in values
                .iter_mut()
                .zip(record.iter().skip(1).zip(FEATURE_NAMES))
            {
                *slot = cell
                    .parse()
                    .map_err(|_| bad(format!("{name} {cell:?} is not a number")))?;
            }
            let degenerate = record[8].parse::<bool>().map_err(|_| {
                bad(format!(
                    "degenerate_growth {:?} is not a boolean",
                    &record[8]
                ))
            })?;
            ids.push(record[0].to_string());
            rows.push(FeatureVector::from_array(values, degenerate));
        }
        FeatureMatrix::new(ids, rows)
    }
}

/// Half-slopes between consecutive observations, `T - 1` values.
pub fn triangular_diffs(traj: &Trajectory) -> Vec<f64> {
    let (d, y) = (traj.times(), traj.values());
    d.windows(2)
        .zip(y.windows(2))
        .map(|(dt, yt)| 0.5 * (yt[1] - yt[0]) / (dt[1] - dt[0]))
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Square root of the sum of squared deviations over `len - 1`.
fn selective_sd(xs: &[f64], centre: f64) -> f64 {
    let ss: f64 = xs.iter().map(|x| (x - centre).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

pub fn mean_diff(traj: &Trajectory) -> f64 {
    mean(&triangular_diffs(traj))
}

pub fn sd_diff(traj: &Trajectory) -> f64 {
    let diffs = triangular_diffs(traj);
    selective_sd(&diffs, mean(&diffs))
}

pub fn mean_abs_diff(traj: &Trajectory) -> f64 {
    let abs: Vec<f64> = triangular_diffs(traj).iter().map(|d| d.abs()).collect();
    mean(&abs)
}

pub fn sd_abs_diff(traj: &Trajectory) -> f64 {
    let abs: Vec<f64> = triangular_diffs(traj).iter().map(|d| d.abs()).collect();
    selective_sd(&abs, mean(&abs))
}

/// Geometric-mean growth rate `(y_T / y_1)^(1/(T-1)) - 1`.
///
/// Returns `(0.0, true)` when the rate is undefined.
pub fn mean_growth(traj: &Trajectory) -> (f64, bool) {
    let y = traj.values();
    let (first, last) = (y[0], y[y.len() - 1]);
    if first == 0.0 {
        return (0.0, true);
    }
    let ratio = last / first;
    if ratio <= 0.0 {
        return (0.0, true);
    }
    (ratio.powf(1.0 / (y.len() - 1) as f64) - 1.0, false)
}

/// Count of growth coefficients `>= 1` over the count `< 1`.
///
/// Transitions from a zero value are skipped. A zero denominator is replaced
/// by [`ZERO_DECREASE_DENOMINATOR`].
pub fn pos_ratio(traj: &Trajectory) -> f64 {
    let (mut up, mut down) = (0usize, 0usize);
    for w in traj.values().windows(2) {
        if w[0] == 0.0 {
            continue;
        }
        if w[1] / w[0] >= 1.0 {
            up += 1;
        } else {
            down += 1;
        }
    }
    let denominator = if down == 0 {
        ZERO_DECREASE_DENOMINATOR
    } else {
        down as f64
    };
    up as f64 / denominator
}

/// Largest angle at the first observation between the chord to the last
/// observation and the segment to an inner observation.
///
/// The angle is negated when the chord is steeper than the segment to the
/// selected inner point. Ties go to the earliest inner point.
pub fn max_angle(traj: &Trajectory) -> f64 {
    let (d, y) = (traj.times(), traj.values());
    let last = y.len() - 1;
    let chord = (d[last] - d[0], y[last] - y[0]);
    let chord_sq = chord.0 * chord.0 + chord.1 * chord.1;

    let mut best = f64::NEG_INFINITY;
    let mut best_t = 1;
    for t in 1..last {
        let seg = (d[t] - d[0], y[t] - y[0]);
        let seg_sq = seg.0 * seg.0 + seg.1 * seg.1;
        let cos = (chord.0 * seg.0 + chord.1 * seg.1) / (chord_sq * seg_sq).sqrt();
        let angle = cos.clamp(-1.0, 1.0).acos();
        if angle > best {
            best = angle;
            best_t = t;
        }
    }

    let chord_slope = chord.1 / chord.0;
    let inner_slope = (y[best_t] - y[0]) / (d[best_t] - d[0]);
    if chord_slope > inner_slope {
        -best
    } else {
        best
    }
}

/// All seven characteristics of one trajectory.
pub fn trajectory_features(traj: &Trajectory) -> FeatureVector {
    let diffs = triangular_diffs(traj);
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let mean_diff = mean(&diffs);
    let mean_abs_diff = mean(&abs);
    let (mean_growth, degenerate_growth) = mean_growth(traj);
    FeatureVector {
        mean_diff,
        sd_diff: selective_sd(&diffs, mean_diff),
        mean_abs_diff,
        sd_abs_diff: selective_sd(&abs, mean_abs_diff),
        mean_growth,
        pos_ratio: pos_ratio(traj),
        max_angle: max_angle(traj),
        degenerate_growth,
    }
}

/// One feature row per trajectory, in panel order.
pub fn extract_features(panel: &MicroPanel) -> FeatureMatrix {
    FeatureMatrix {
        ids: panel.ids(),
        rows: panel.trajectories.iter().map(trajectory_features).collect(),
        standardized: false,
    }
}

/// Same as [`extract_features`], fanned out over the rayon pool.
pub fn extract_features_par(panel: &MicroPanel) -> FeatureMatrix {
    FeatureMatrix {
        ids: panel.ids(),
        rows: panel
            .trajectories
            .par_iter()
            .map(trajectory_features)
            .collect(),
        standardized: false,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    #[default]
    None,
    Zscore,
}

impl std::str::FromStr for Scaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Scaling::None),
            "zscore" => Ok(Scaling::Zscore),
            other => Err(Error::InvalidConfig(format!(
                "unknown scaling {other:?}; expected none or zscore"
            ))),
        }
    }
}

impl std::fmt::Display for Scaling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scaling::None => "none",
            Scaling::Zscore => "zscore",
        })
    }
}

/// Column-wise z-scores with the sample standard deviation. Constant columns
/// become all zero.
pub fn standardize(matrix: &FeatureMatrix, mode: Scaling) -> Result<FeatureMatrix> {
    if mode == Scaling::None {
        return Ok(matrix.clone());
    }
    let n = matrix.len();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let points = matrix.points();
    let mut rows: Vec<[f64; N_FEATURES]> = vec![[0.0; N_FEATURES]; n];
    for j in 0..N_FEATURES {
        let col_mean = points.iter().map(|p| p[j]).sum::<f64>() / n as f64;
        let var = points
            .iter()
            .map(|p| (p[j] - col_mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        let sd = var.sqrt();
        if sd > 0.0 && sd.is_finite() {
            for (row, p) in rows.iter_mut().zip(&points) {
                row[j] = (p[j] - col_mean) / sd;
            }
        }
    }
    Ok(FeatureMatrix {
        ids: matrix.ids.clone(),
        rows: rows
            .into_iter()
            .zip(&matrix.rows)
            .map(|(a, r)| FeatureVector::from_array(a, r.degenerate_growth))
            .collect(),
        standardized: true,
    })
}
