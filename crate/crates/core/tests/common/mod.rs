//! Slow reference implementations shared by the integration suites.
#![allow(dead_code, clippy::needless_range_loop)]

use clump_core::DistanceMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const D: usize = 7;

pub fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; D]> {
    (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(-10.0..10.0)))
        .collect()
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

pub fn ess(points: &[[f64; D]], members: &[usize]) -> f64 {
    let m = members.len() as f64;
    let centre: [f64; D] =
        std::array::from_fn(|k| members.iter().map(|&i| points[i][k]).sum::<f64>() / m);
    members
        .iter()
        .map(|&i| {
            (0..D)
                .map(|k| (points[i][k] - centre[k]).powi(2))
                .sum::<f64>()
        })
        .sum()
}

pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len() + 1;
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Returns merge heights and the flat partition after every step.
pub fn naive_ward(points: &[[f64; D]]) -> (Vec<f64>, Vec<Vec<usize>>) {
    let n = points.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    let mut partitions = vec![(1..=n).collect::<Vec<_>>()];
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let union: Vec<usize> = clusters[a].iter().chain(&clusters[b]).copied().collect();
                let cost =
                    ess(points, &union) - ess(points, &clusters[a]) - ess(points, &clusters[b]);
                if cost < best.0 {
                    best = (cost, a, b);
                }
            }
        }
        let (cost, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        heights.push(cost);
        let mut labels = vec![0; n];
        for (c, members) in clusters.iter().enumerate() {
            for &i in members {
                labels[i] = c;
            }
        }
        partitions.push(canonical(&labels));
    }
    (heights, partitions)
}

pub fn lance_williams_ward(points: &[[f64; D]]) -> Vec<f64> {
    let n = points.len();
    let mut cost = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            cost[i][j] = 0.5
                * (0..D)
                    .map(|k| (points[i][k] - points[j][k]).powi(2))
                    .sum::<f64>();
        }
    }
    let mut size = vec![1.0; n];
    let mut alive = vec![true; n];
    let mut heights = Vec::new();
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0, 0);
        for i in (0..n).filter(|&i| alive[i]) {
            for j in (i + 1..n).filter(|&j| alive[j]) {
                if cost[i][j] < best.0 {
                    best = (cost[i][j], i, j);
                }
            }
        }
        let (h, i, j) = best;
        heights.push(h);
        for k in (0..n).filter(|&k| alive[k] && k != i && k != j) {
            let total = size[i] + size[j] + size[k];
            let updated = ((size[i] + size[k]) * cost[k][i] + (size[j] + size[k]) * cost[k][j]
                - size[k] * h)
                / total;
            cost[k][i] = updated;
            cost[i][k] = updated;
        }
        size[i] += size[j];
        alive[j] = false;
    }
    heights
}

pub fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn pair_table(a: &[usize], b: &[usize]) -> (f64, f64, f64, f64) {
    // (same in both, same in a only, same in b only, split in both)
    let (mut ss, mut sd, mut ds, mut dd) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    (ss, sd, ds, dd)
}

pub fn oracle_rand(a: &[usize], b: &[usize]) -> f64 {
    let (ss, sd, ds, dd) = pair_table(a, b);
    (ss + dd) / (ss + sd + ds + dd)
}

pub fn oracle_ari(a: &[usize], b: &[usize]) -> f64 {
    let (ss, sd, ds, dd) = pair_table(a, b);
    let denom = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if denom == 0.0 {
        return 1.0;
    }
    2.0 * (ss * dd - sd * ds) / denom
}

pub fn oracle_silhouette(dist: &DistanceMatrix, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut clusters: Vec<usize> = labels.to_vec();
    clusters.sort_unstable();
    clusters.dedup();
    if clusters.len() < 2 || clusters.len() > n - 1 {
        return 0.0;
    }
    let mean_to = |i: usize, c: usize, skip_self: bool| -> Option<f64> {
        let mut sum = 0.0;
        let mut count = 0;
        for j in 0..n {
            if labels[j] == c && !(skip_self && j == i) {
                sum += dist.get(i, j);
                count += 1;
            }
        }
        (count > 0).then(|| sum / count as f64)
    };
    let mut total = 0.0;
    for i in 0..n {
        let Some(a) = mean_to(i, labels[i], true) else {
            continue;
        };
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .filter_map(|&c| mean_to(i, c, false))
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

pub fn oracle_dunn(dist: &DistanceMatrix, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut separation = f64::INFINITY;
    let mut diameter = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if labels[i] == labels[j] {
                diameter = diameter.max(dist.get(i, j));
            } else {
                separation = separation.min(dist.get(i, j));
            }
        }
    }
    if diameter == 0.0 {
        f64::INFINITY
    } else {
        separation / diameter
    }
}

pub fn random_distances(rng: &mut ChaCha8Rng, n: usize) -> DistanceMatrix {
    let pts: Vec<[f64; 3]> = (0..n)
        .map(|_| std::array::from_fn(|_| rng.random_range(0.0..5.0)))
        .collect();
    DistanceMatrix::from_fn(n, |i, j| {
        pts[i]
            .iter()
            .zip(&pts[j])
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    })
}
