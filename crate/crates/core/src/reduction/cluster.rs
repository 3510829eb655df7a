//! Agglomerative average-linkage clustering of node trajectories.

use std::fmt::Write as _;

use super::snapshots::SnapshotMatrix;
use crate::error::{Error, Result};

/// A partition of the nodes; ids are contiguous and numbered by first member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub assignment: Vec<usize>,
    pub r_m: usize,
}

impl Clustering {
    /// Relabel arbitrary labels so that ids follow the order of each cluster's first node.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut ids = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = ids.len();
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            assignment,
            r_m: ids.len(),
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            assignment: (0..n).collect(),
            r_m: n,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.r_m];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.r_m];
        for (i, &c) in self.assignment.iter().enumerate() {
            members[c].push(i);
        }
        members
    }

    /// Checks the partition invariants: ids in `[0, r_m)`, every id used, ids in
    /// first-member order.
    pub fn validate(&self) -> Result<()> {
        let mut next = 0;
        for &c in &self.assignment {
            if c > next || c >= self.r_m {
                return Err(Error::validation("clustering", "ids must be contiguous in first-member order"));
            }
            if c == next {
                next += 1;
            }
        }
        if next != self.r_m {
            return Err(Error::validation("clustering", "empty cluster id"));
        }
        Ok(())
    }
}

/// One merge of the dendrogram. `a < b` are the clusters' smallest member nodes;
/// the merged cluster keeps `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    /// One line per merge: `a b distance size`.
    pub fn to_text(&self) -> String {
        let mut s = String::from("# a b distance size\n");
        for m in &self.merges {
            let _ = writeln!(s, "{} {} {:.12e} {}", m.a, m.b, m.distance, m.size);
        }
        s
    }
}

/// Euclidean distance between two trajectories.
#[inline]
pub fn trajectory_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Upper-triangular distance storage without the diagonal.
struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    fn new(x: &SnapshotMatrix) -> Self {
        let n = x.n_nodes();
        let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            let a = x.trajectory(i);
            for j in i + 1..n {
                d.push(trajectory_distance(a, x.trajectory(j)));
            }
        }
        Self { n, d }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.slot(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.d[s] = v;
    }
}

pub fn cluster_trajectories(x: &SnapshotMatrix, th_c: f64) -> Result<Clustering> {
    cluster_with_dendrogram(x, th_c).map(|(c, _)| c)
}

/// Merges the closest pair of clusters (average linkage) while their distance is
/// below `th_c`. Ties go to the lexicographically smallest pair of cluster ids,
/// where a cluster's id is its smallest member node.
pub fn cluster_with_dendrogram(x: &SnapshotMatrix, th_c: f64) -> Result<(Clustering, Dendrogram)> {
    if !(th_c > 0.0) {
        return Err(Error::validation("th_C", "must be > 0"));
    }
    let n = x.n_nodes();
    let mut dist = Condensed::new(x);
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let rescan = |i: usize, active: &[bool], dist: &Condensed, nn: &mut [usize], nn_d: &mut [f64]| {
        let mut best = (f64::INFINITY, usize::MAX);
        for j in 0..n {
            if j != i && active[j] {
                let d = dist.get(i, j);
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        nn_d[i] = best.0;
        nn[i] = best.1;
    };
    for i in 0..n {
        rescan(i, &active, &dist, &mut nn, &mut nn_d);
    }

    let mut merges = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for i in 0..n {
            if active[i] && nn[i] != usize::MAX && best.map_or(true, |b| nn_d[i] < nn_d[b]) {
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        if !(nn_d[i] < th_c) {
            break;
        }
        let (a, b) = (i.min(nn[i]), i.max(nn[i]));
        let d_ab = nn_d[i];
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for k in 0..n {
            if active[k] && k != a && k != b {
                let v = (na * dist.get(a, k) + nb * dist.get(b, k)) / (na + nb);
                dist.set(a, k, v);
            }
        }
        active[b] = false;
        size[a] += size[b];
        let moved = std::mem::take(&mut members[b]);
        for &m in &moved {
            owner[m] = a;
        }
        members[a].extend(moved);
        merges.push(Merge {
            a,
            b,
            distance: d_ab,
            size: size[a],
        });

        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == a || nn[k] == a || nn[k] == b {
                rescan(k, &active, &dist, &mut nn, &mut nn_d);
            } else {
                let d = dist.get(k, a);
                if d < nn_d[k] || (d == nn_d[k] && a < nn[k]) {
                    nn_d[k] = d;
                    nn[k] = a;
                }
            }
        }
    }

    Ok((Clustering::from_labels(&owner), Dendrogram { merges }))
}
