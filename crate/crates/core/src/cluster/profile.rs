use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::cluster::tree::Assignment;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, N_FEATURES};
use crate::panel::MicroPanel;

/// Summary of one cluster: its size, the mean characteristics of its members
/// and a pooled least-squares line of value on time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    /// In [`crate::features::FEATURE_NAMES`] order.
    pub feature_means: [f64; N_FEATURES],
    /// `None` when the members have fewer than two distinct times.
    pub intercept: Option<f64>,
    pub slope: Option<f64>,
    pub n_observations: usize,
}

pub fn cluster_profiles(
    panel: &MicroPanel,
    matrix: &FeatureMatrix,
    assignment: &Assignment,
) -> Result<Vec<ClusterProfile>> {
    let label_of: HashMap<&str, usize> = assignment
        .ids
        .iter()
        .map(String::as_str)
        .zip(assignment.labels.iter().copied())
        .collect();
    let row_of: HashMap<&str, usize> = matrix
        .ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); assignment.k];
    for (i, traj) in panel.trajectories.iter().enumerate() {
        let label = *label_of
            .get(traj.id())
            .ok_or_else(|| Error::TruthMismatch(format!("id {} has no cluster", traj.id())))?;
        if label == 0 || label > assignment.k {
            return Err(Error::InvalidK {
                k: label,
                n: assignment.k,
            });
        }
        members[label - 1].push(i);
    }

    members
        .iter()
        .enumerate()
        .map(|(c, idx)| {
            let mut means = [0.0; N_FEATURES];
            for &i in idx {
                let id = panel.trajectories[i].id();
                let row = *row_of
                    .get(id)
                    .ok_or_else(|| Error::TruthMismatch(format!("id {id} has no feature row")))?;
                for (m, v) in means.iter_mut().zip(matrix.rows[row].to_array()) {
                    *m += v;
                }
            }
            if !idx.is_empty() {
                for m in &mut means {
                    *m /= idx.len() as f64;
                }
            }

            let obs = idx.iter().flat_map(|&i| {
                let t = &panel.trajectories[i];
                t.times().iter().copied().zip(t.values().iter().copied())
            });
            let (intercept, slope, n_obs) = pooled_ols(obs);
            Ok(ClusterProfile {
                cluster: c + 1,
                size: idx.len(),
                feature_means: means,
                intercept,
                slope,
                n_observations: n_obs,
            })
        })
        .collect()
}

/// Least-squares intercept and slope via centred sums.
fn pooled_ols(obs: impl Iterator<Item = (f64, f64)> + Clone) -> (Option<f64>, Option<f64>, usize) {
    let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for (x, y) in obs.clone() {
        n += 1;
        sx += x;
        sy += y;
    }
    if n == 0 {
        return (None, None, 0);
    }
    let (mx, my) = (sx / n as f64, sy / n as f64);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in obs {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return (None, None, n);
    }
    let slope = sxy / sxx;
    (Some(my - slope * mx), Some(slope), n)
}
