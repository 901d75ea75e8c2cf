//! Ward agglomeration with the nearest-neighbour chain.
//!
//! Clusters are represented by centroid and size only, so the working memory
//! is linear in the number of points. The dissimilarity between clusters `A`
//! and `B` is the increase in the error sum of squares caused by merging them,
//! `|A||B| / (|A| + |B|) * ||c_A - c_B||^2`, which is also the merge height.
//!
//! Ties are resolved by a strict total order on cluster pairs: distance, then
//! the smaller of the two clusters' lowest leaf indices, then the larger. Every
//! extension of the chain strictly decreases that key, so the chain never
//! cycles even with exactly equal distances.

use std::cmp::Ordering;

use crate::cluster::tree::{Dendrogram, Merge};
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Merge recorded in chain order: the clusters are named by their lowest leaf.
struct RawMerge {
    a: usize,
    b: usize,
    height: f64,
}

#[inline]
fn sq_dist<const D: usize>(x: &[f64; D], y: &[f64; D]) -> f64 {
    let mut acc = 0.0;
    for k in 0..D {
        let d = x[k] - y[k];
        acc += d * d;
    }
    acc
}

#[inline]
fn pair_key_less(d1: f64, p1: (usize, usize), d2: f64, p2: (usize, usize)) -> bool {
    match d1.total_cmp(&d2) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => p1 < p2,
    }
}

#[inline]
fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn nn_chain<const D: usize>(points: &[[f64; D]]) -> Vec<RawMerge> {
    let n = points.len();
    // Slot `i` holds the cluster whose lowest leaf is `i`.
    let mut centroid: Vec<[f64; D]> = points.to_vec();
    let mut size: Vec<f64> = vec![1.0; n];
    let mut height: Vec<f64> = vec![0.0; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        if chain.is_empty() {
            chain.push(active[0]);
        }
        let (a, b, dist) = loop {
            let c = chain[chain.len() - 1];
            let (cc, sc) = (&centroid[c], size[c]);
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            let mut best_pair = (usize::MAX, usize::MAX);
            for &x in &active {
                if x == c {
                    continue;
                }
                let sx = size[x];
                let d = sc * sx / (sc + sx) * sq_dist(cc, &centroid[x]);
                let pair = ordered(c, x);
                if best == usize::MAX || pair_key_less(d, pair, best_d, best_pair) {
                    best = x;
                    best_d = d;
                    best_pair = pair;
                }
            }
            if chain.len() >= 2 && chain[chain.len() - 2] == best {
                chain.pop();
                chain.pop();
                break (c, best, best_d);
            }
            chain.push(best);
        };

        let (keep, gone) = ordered(a, b);
        let (sk, sg) = (size[keep], size[gone]);
        let total = sk + sg;
        let merged: [f64; D] =
            std::array::from_fn(|k| (sk * centroid[keep][k] + sg * centroid[gone][k]) / total);
        // Ward is monotone; the clamp only absorbs rounding.
        let h = dist.max(height[keep]).max(height[gone]);
        centroid[keep] = merged;
        size[keep] = total;
        height[keep] = h;
        if let Ok(pos) = active.binary_search(&gone) {
            active.remove(pos);
        }
        merges.push(RawMerge {
            a: keep,
            b: gone,
            height: h,
        });
    }
    merges
}

/// Sorts chain-order merges by height and relabels them with
/// scipy-style node ids (leaves `0..n`, merge `i` creates node `n + i`).
fn to_dendrogram(n: usize, mut raw: Vec<RawMerge>, leaves: Vec<String>) -> Dendrogram {
    raw.sort_by(|x, y| x.height.total_cmp(&y.height));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut members: Vec<usize> = vec![1; n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let merges = raw
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let ra = find(&mut parent, m.a);
            let rb = find(&mut parent, m.b);
            let (left, right) = ordered(node[ra], node[rb]);
            let size = members[ra] + members[rb];
            let (root, child) = ordered(ra, rb);
            parent[child] = root;
            node[root] = n + i;
            members[root] = size;
            Merge {
                left,
                right,
                height: m.height,
                size,
            }
        })
        .collect();
    Dendrogram { leaves, merges }
}

/// Ward dendrogram of arbitrary fixed-dimension points.
pub fn ward_dendrogram_points<const D: usize>(
    points: &[[f64; D]],
    leaves: Vec<String>,
) -> Result<Dendrogram> {
    if points.len() < 2 {
        return Err(Error::TooFewRows {
            required: 2,
            actual: points.len(),
        });
    }
    if leaves.len() != points.len() {
        return Err(Error::LengthMismatch {
            left: leaves.len(),
            right: points.len(),
        });
    }
    if let Some(i) = points.iter().position(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteFeature {
            id: leaves[i].clone(),
        });
    }
    let raw = nn_chain(points);
    Ok(to_dendrogram(points.len(), raw, leaves))
}

/// Ward dendrogram of the feature rows.
pub fn ward_dendrogram(matrix: &FeatureMatrix) -> Result<Dendrogram> {
    ward_dendrogram_points(&matrix.points(), matrix.ids.clone())
}

/// Sum of squared deviations of the points about their grand centroid.
pub fn total_sum_of_squares<const D: usize>(points: &[[f64; D]]) -> f64 {
    let n = points.len() as f64;
    let centre: [f64; D] = std::array::from_fn(|k| points.iter().map(|p| p[k]).sum::<f64>() / n);
    points.iter().map(|p| sq_dist(p, &centre)).sum()
}
