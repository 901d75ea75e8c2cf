use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Symmetric distances with zero diagonal, stored as the condensed upper
/// triangle in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Wraps a condensed upper triangle of length `n (n - 1) / 2`.
    pub fn from_condensed(n: usize, entries: Vec<f64>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if entries.len() != expected {
            return Err(Error::LengthMismatch {
                left: entries.len(),
                right: expected,
            });
        }
        Ok(Self { n, entries })
    }

    /// Builds the matrix by evaluating `dist(i, j)` for every `i < j`.
    pub fn from_fn(n: usize, dist: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                entries.push(dist(i, j));
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn condensed(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        self.n * i - i * (i + 1) / 2 + j - i - 1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.entries[self.index(i, j)],
            std::cmp::Ordering::Greater => self.entries[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }
}

/// Euclidean distances between the seven-characteristic rows. The
/// degenerate-growth flag does not take part.
pub fn euclidean_distances(matrix: &FeatureMatrix) -> Result<DistanceMatrix> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: n,
        });
    }
    let points = matrix.points();
    if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteFeature {
            id: matrix.ids[i].clone(),
        });
    }
    let entries: Vec<f64> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pi = points[i];
            points[i + 1..].iter().map(move |pj| {
                pi.iter()
                    .zip(pj)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
        })
        .collect();
    Ok(DistanceMatrix { n, entries })
}
