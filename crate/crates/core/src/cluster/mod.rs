//! Ward clustering, dendrogram cuts and gap-statistic model selection.

mod gap;
mod ward;

pub use gap::{dispersion_curve, gap_curve, gap_curve_with_dendrogram, gap_curve_with_reference, UNIFORM_BOX, select_num_clusters, Selection, SelectRule};
pub use ward::{agglomerate, ward_delta};

use serde::{Deserialize, Serialize};

use crate::data::RealMatrix;
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};

/// A flat clustering read off a dendrogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    /// Cluster index per row. Clusters are numbered by their smallest row.
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub sizes: Vec<usize>,
    /// Within-cluster sum of squared distances to the centroids.
    pub within_dispersion: f64,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }

    /// Builds centroids and dispersion for an arbitrary labelling with
    /// labels in `0..k`.
    pub fn from_labels(points: &RealMatrix, labels: Vec<usize>, k: usize) -> Result<Self> {
        if labels.len() != points.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: points.n_rows(),
                actual: labels.len(),
            });
        }
        let d = points.n_cols();
        let mut sums = vec![vec![0.0; d]; k];
        let mut sizes = vec![0usize; k];
        for (row, &l) in points.rows().zip(&labels) {
            if l >= k {
                return Err(Error::InvalidArgument(format!("label {l} >= {k}")));
            }
            sizes[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(row) {
                *s += x;
            }
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("empty cluster".into()));
        }
        let centroids: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&sizes)
            .map(|(s, &n)| s.into_iter().map(|x| x / n as f64).collect())
            .collect();
        let within_dispersion = points
            .rows()
            .zip(&labels)
            .map(|(r, &l)| r.iter().zip(&centroids[l]).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
            .sum();
        Ok(ClusterAssignment {
            labels,
            centroids,
            sizes,
            within_dispersion,
        })
    }
}

/// Cuts the dendrogram into `k` clusters by undoing its last `k - 1` merges.
pub fn cut(dendrogram: &Dendrogram, points: &RealMatrix, k: usize) -> Result<ClusterAssignment> {
    let n = dendrogram.n_leaves;
    if points.n_rows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: points.n_rows(),
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("cluster count {k} outside 1..={n}")));
    }
    let labels = cut_labels(dendrogram, k);
    ClusterAssignment::from_labels(points, labels, k)
}

/// Labels only; clusters numbered in order of their smallest row.
pub fn cut_labels(dendrogram: &Dendrogram, k: usize) -> Vec<usize> {
    let n = dendrogram.n_leaves;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // representative leaf of every node
    let mut rep: Vec<usize> = (0..n).collect();
    for m in dendrogram.merges.iter().take(n - k) {
        let (a, b) = (find(&mut parent, rep[m.left]), find(&mut parent, rep[m.right]));
        let root = a.min(b);
        parent[a.max(b)] = root;
        rep.push(root);
    }
    let mut label_of_root = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|i| {
            let r = find(&mut parent, i);
            if label_of_root[r] == usize::MAX {
                label_of_root[r] = next;
                next += 1;
            }
            label_of_root[r]
        })
        .collect()
}
