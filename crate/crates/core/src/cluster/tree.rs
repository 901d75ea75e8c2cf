use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One agglomeration step. Node ids follow the scipy convention: leaves are
/// `0..n`, the `i`-th merge creates node `n + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaves: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Flat clustering: `labels[i]` is the cluster (in `1..=k`) of `ids[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub ids: Vec<String>,
    pub labels: Vec<usize>,
    pub k: usize,
}

impl Assignment {
    /// Builds an assignment from arbitrary labels, renumbering clusters to
    /// `1..=k` in order of first appearance.
    pub fn from_labels<L: Eq + std::hash::Hash>(ids: Vec<String>, raw: &[L]) -> Result<Self> {
        if ids.len() != raw.len() {
            return Err(Error::LengthMismatch {
                left: ids.len(),
                right: raw.len(),
            });
        }
        let mut seen: HashMap<&L, usize> = HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = seen.len() + 1;
                *seen.entry(l).or_insert(next)
            })
            .collect();
        Ok(Self {
            ids,
            labels,
            k: seen.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn label_of(&self, id: &str) -> Option<usize> {
        self.ids
            .iter()
            .position(|x| x == id)
            .map(|i| self.labels[i])
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }

    pub fn write_csv<W: Write>(&self, sink: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(sink);
        wtr.write_record(["id", "cluster"])?;
        for (id, label) in self.ids.iter().zip(&self.labels) {
            wtr.write_record([id.as_str(), &label.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads an `id,cluster` file. Labels are kept as written; `k` is the
    /// number of distinct labels.
    pub fn read_csv<R: Read>(source: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(source);
        let mut records = rdr.records();
        let header = records.next().ok_or(Error::EmptyInput)??;
        if header.iter().ne(["id", "cluster"]) {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `id,cluster`".into(),
            });
        }
        let mut ids = Vec::new();
        let mut labels = Vec::new();
        for record in records {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let label = record[1].parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("cluster {:?} is not a non-negative integer", &record[1]),
            })?;
            ids.push(record[0].to_string());
            labels.push(label);
        }
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        Ok(Self {
            ids,
            labels,
            k: distinct.len(),
        })
    }
}

/// Undoes the last `k - 1` merges. Clusters are numbered `1..=k` in order of
/// their first leaf.
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Assignment> {
    let n = dendrogram.n_leaves();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // any leaf inside each node
    let mut rep: Vec<usize> = (0..n).collect();
    rep.reserve(dendrogram.merges.len());
    for (i, m) in dendrogram.merges.iter().enumerate() {
        rep.push(rep[m.left]);
        if i < n - k {
            let ra = find(&mut parent, rep[m.left]);
            let rb = find(&mut parent, rep[m.right]);
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    let labels = (0..n)
        .map(|leaf| {
            let root = find(&mut parent, leaf);
            let next = label_of_root.len() + 1;
            *label_of_root.entry(root).or_insert(next)
        })
        .collect();
    Ok(Assignment {
        ids: dendrogram.leaves.clone(),
        labels,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::ward::ward_dendrogram_points;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("id{i}")).collect()
    }

    #[test]
    fn cuts_of_the_line_example() {
        let d = ward_dendrogram_points(&[[0.0], [1.0], [10.0]], names(3)).unwrap();
        assert_eq!(cut(&d, 1).unwrap().labels, vec![1, 1, 1]);
        assert_eq!(cut(&d, 2).unwrap().labels, vec![1, 1, 2]);
        assert_eq!(cut(&d, 3).unwrap().labels, vec![1, 2, 3]);
        assert!(matches!(cut(&d, 0), Err(Error::InvalidK { k: 0, n: 3 })));
        assert!(cut(&d, 4).is_err());
    }

    #[test]
    fn labels_follow_first_leaf() {
        let d = ward_dendrogram_points(&[[10.0], [0.0], [11.0], [1.0]], names(4)).unwrap();
        let a = cut(&d, 2).unwrap();
        assert_eq!(a.labels, vec![1, 2, 1, 2]);
        assert_eq!(a.label_of("id3"), Some(2));
        assert_eq!(a.sizes(), vec![2, 2]);
    }

    #[test]
    fn assignment_csv_round_trip() {
        let a = Assignment::from_labels(names(4), &["x", "y", "x", "z"]).unwrap();
        assert_eq!(a.labels, vec![1, 2, 1, 3]);
        assert_eq!(a.k, 3);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"id,cluster\n"));
        assert_eq!(Assignment::read_csv(buf.as_slice()).unwrap(), a);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(500))]

        #[test]
        fn cut_yields_exactly_k_nonempty_clusters(
            pts in prop::collection::vec(prop::array::uniform2(-10.0f64..10.0), 2..50),
            frac in 0.0f64..1.0,
        ) {
            let n = pts.len();
            let k = 1 + ((n - 1) as f64 * frac) as usize;
            let d = ward_dendrogram_points(&pts, names(n)).unwrap();
            let a = cut(&d, k).unwrap();
            prop_assert_eq!(a.k, k);
            prop_assert_eq!(a.len(), n);
            let sizes = a.sizes();
            prop_assert_eq!(sizes.len(), k);
            prop_assert!(sizes.iter().all(|&s| s > 0));
            // labels appear in order 1, 2, ... by first leaf
            let mut next = 1;
            for &l in &a.labels {
                prop_assert!(l <= next);
                if l == next { next += 1; }
            }
        }
    }
}
