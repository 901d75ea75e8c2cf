//! Micro-panel domain types, long-format CSV ingestion and structural checks.
//!
//! A trajectory needs at least three observations at strictly increasing
//! times. Trajectories that break these rules are excluded from a parsed panel
//! and listed in a [`ValidationReport`] instead of failing the whole load.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum number of observations a trajectory must have.
pub const MIN_OBSERVATIONS: usize = 3;

const LONG_HEADER: [&str; 3] = ["id", "time", "value"];
const TRUTH_HEADER: [&str; 2] = ["id", "true_cluster"];

/// Time-ordered measurements of one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    id: String,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory without checking its invariants; see [`Trajectory::check`].
    pub fn new(id: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "times ({}) and values ({}) differ in length",
                times.len(),
                values.len()
            )));
        }
        Ok(Self {
            id: id.into(),
            times,
            values,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of observations.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Returns the first broken invariant, if any.
    pub fn check(&self) -> Option<RejectReason> {
        if self
            .times
            .iter()
            .chain(self.values.iter())
            .any(|v| !v.is_finite())
        {
            return Some(RejectReason::NonFiniteValue);
        }
        if self.len() < MIN_OBSERVATIONS {
            return Some(RejectReason::TooShort);
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Some(RejectReason::NonIncreasingTimes);
        }
        None
    }

    /// Shifts the time axis so the first observation is at zero.
    pub fn normalized(mut self) -> Self {
        if let Some(&first) = self.times.first() {
            if first != 0.0 {
                for t in &mut self.times {
                    *t -= first;
                }
            }
        }
        self
    }
}

/// Why a trajectory was excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    TooShort,
    NonIncreasingTimes,
    /// A repeated trajectory id, or a repeated `(id, time)` key in long input.
    DuplicateId,
    NonFiniteValue,
}

impl RejectReason {
    pub fn as_str(self) -> &'static str {
        match self {
            RejectReason::TooShort => "too-short",
            RejectReason::NonIncreasingTimes => "non-increasing-times",
            RejectReason::DuplicateId => "duplicate-id",
            RejectReason::NonFiniteValue => "non-finite-value",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub accepted: usize,
    pub rejected: Vec<(String, RejectReason)>,
}

impl ValidationReport {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} trajectories accepted, {} rejected",
            self.accepted,
            self.rejected.len()
        )?;
        for (id, reason) in &self.rejected {
            write!(f, "\n  rejected {id}: {reason}")?;
        }
        Ok(())
    }
}

/// A set of trajectories with optional ground-truth cluster labels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MicroPanel {
    pub trajectories: Vec<Trajectory>,
    pub truth: Option<BTreeMap<String, usize>>,
}

impl MicroPanel {
    pub fn new(trajectories: Vec<Trajectory>) -> Self {
        Self {
            trajectories,
            truth: None,
        }
    }

    /// Attaches truth labels, which must cover exactly the panel ids.
    pub fn with_truth(mut self, truth: BTreeMap<String, usize>) -> Result<Self> {
        if truth.len() != self.trajectories.len() {
            return Err(Error::TruthMismatch(format!(
                "{} labels for {} trajectories",
                truth.len(),
                self.trajectories.len()
            )));
        }
        if let Some(t) = self
            .trajectories
            .iter()
            .find(|t| !truth.contains_key(t.id()))
        {
            return Err(Error::TruthMismatch(format!("no label for id {}", t.id())));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.trajectories.iter().map(|t| t.id.clone()).collect()
    }

    /// Truth labels in panel order.
    pub fn truth_labels(&self) -> Option<Vec<usize>> {
        let truth = self.truth.as_ref()?;
        self.trajectories
            .iter()
            .map(|t| truth.get(t.id()).copied())
            .collect()
    }
}

/// Orders ids numerically when both parse as integers, otherwise as strings.
fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

fn check_header(record: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = record.iter().collect();
    if got != expected {
        return Err(Error::Parse {
            line: record.position().map_or(1, |p| p.line()),
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            ),
        });
    }
    Ok(())
}

fn parse_number(record: &csv::StringRecord, idx: usize, column: &str) -> Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let cell = record.get(idx).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {column} column"),
    })?;
    cell.parse::<f64>().map_err(|_| Error::Parse {
        line,
        message: format!("{column} {cell:?} is not a number"),
    })
}

fn reader<R: Read>(source: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source)
}

/// Reads a long-format CSV (`id,time,value`) into a panel.
///
/// Rows may come in any order. Each id's observations are sorted by time and
/// shifted so the first time is zero. Trajectories that fail validation are
/// left out of the panel and reported.
pub fn parse_long_csv<R: Read>(source: R) -> Result<(MicroPanel, ValidationReport)> {
    let mut rdr = reader(source);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyInput),
    };
    check_header(&header, &LONG_HEADER)?;

    let mut rows: HashMap<String, Vec<(f64, f64)>> = HashMap::new();
    for record in records {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(Error::Parse {
                line: record.position().map_or(0, |p| p.line()),
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let time = parse_number(&record, 1, "time")?;
        let value = parse_number(&record, 2, "value")?;
        rows.entry(record[0].to_string())
            .or_default()
            .push((time, value));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }

    let mut ids: Vec<String> = rows.keys().cloned().collect();
    ids.sort_by(|a, b| compare_ids(a, b));

    let mut report = ValidationReport::default();
    let mut trajectories = Vec::with_capacity(ids.len());
    for id in ids {
        let mut obs = rows.remove(&id).unwrap_or_default();
        obs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (times, values): (Vec<f64>, Vec<f64>) = obs.into_iter().unzip();
        let has_nan = times.iter().chain(values.iter()).any(|v| !v.is_finite());
        if !has_nan && times.windows(2).any(|w| w[0] == w[1]) {
            report.rejected.push((id, RejectReason::DuplicateId));
            continue;
        }
        let traj = Trajectory { id, times, values };
        match traj.check() {
            Some(reason) => report.rejected.push((traj.id, reason)),
            None => {
                report.accepted += 1;
                trajectories.push(traj.normalized());
            }
        }
    }
    Ok((MicroPanel::new(trajectories), report))
}

/// Re-checks every trajectory invariant and id uniqueness. Later occurrences
/// of a repeated id are reported as duplicates.
pub fn validate(panel: &MicroPanel) -> ValidationReport {
    let mut seen = HashSet::new();
    let mut report = ValidationReport::default();
    for traj in &panel.trajectories {
        let reason = if seen.insert(traj.id()) {
            traj.check()
        } else {
            Some(RejectReason::DuplicateId)
        };
        match reason {
            Some(r) => report.rejected.push((traj.id.clone(), r)),
            None => report.accepted += 1,
        }
    }
    report
}

/// Writes a panel in long format. Numbers use the shortest round-trip form.
pub fn write_long_csv<W: Write>(panel: &MicroPanel, sink: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(LONG_HEADER)?;
    for traj in &panel.trajectories {
        for (t, y) in traj.times.iter().zip(&traj.values) {
            wtr.write_record([traj.id.as_str(), &t.to_string(), &y.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a truth sidecar (`id,true_cluster`).
pub fn parse_truth_csv<R: Read>(source: R) -> Result<BTreeMap<String, usize>> {
    let mut rdr = reader(source);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(r) => r?,
        None => return Err(Error::EmptyInput),
    };
    check_header(&header, &TRUTH_HEADER)?;
    let mut truth = BTreeMap::new();
    for record in records {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let line = record.position().map_or(0, |p| p.line());
        let (Some(id), Some(label)) = (record.get(0), record.get(1)) else {
            return Err(Error::Parse {
                line,
                message: "expected 2 fields".into(),
            });
        };
        let label = label.parse::<usize>().map_err(|_| Error::Parse {
            line,
            message: format!("true_cluster {label:?} is not a non-negative integer"),
        })?;
        if truth.insert(id.to_string(), label).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("duplicate id {id}"),
            });
        }
    }
    Ok(truth)
}

/// Writes the truth sidecar in panel order.
pub fn write_truth_csv<W: Write>(panel: &MicroPanel, sink: W) -> Result<()> {
    let truth = panel
        .truth
        .as_ref()
        .ok_or_else(|| Error::TruthMismatch("panel has no truth labels".into()))?;
    let mut wtr = csv::Writer::from_writer(sink);
    wtr.write_record(TRUTH_HEADER)?;
    for traj in &panel.trajectories {
        let label = truth
            .get(traj.id())
            .ok_or_else(|| Error::TruthMismatch(format!("no label for id {}", traj.id())))?;
        wtr.write_record([traj.id.as_str(), &label.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}
