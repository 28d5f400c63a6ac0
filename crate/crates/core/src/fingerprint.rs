//! Response types, per-group fingerprints, and fingerprint similarity.

use serde::{Deserialize, Serialize};

use crate::cluster::{agglomerate, ClusterAssignment};
use crate::data::{Fingerprint, RealMatrix, ResponseTypeSet};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};

/// The centroids of a flat clustering, in cluster-index order.
pub fn extract_response_types(assignment: &ClusterAssignment) -> Result<ResponseTypeSet> {
    ResponseTypeSet::new(assignment.centroids.clone())
}

/// Index of the nearest response type for every row; ties go to the lower
/// index.
pub fn assign(rows: &RealMatrix, types: &ResponseTypeSet) -> Result<Vec<usize>> {
    if rows.n_cols() != types.dim() {
        return Err(Error::DimensionMismatch {
            expected: types.dim(),
            actual: rows.n_cols(),
        });
    }
    Ok(rows
        .rows()
        .map(|r| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in types.centroids.iter().enumerate() {
                let d: f64 = r.iter().zip(c).map(|(x, y)| (x - y) * (x - y)).sum();
                if d < best.1 {
                    best = (j, d);
                }
            }
            best.0
        })
        .collect())
}

/// Share of each group's rows per response type.
pub fn fingerprints(labels: &[usize], group_of_row: &[usize], groups: &[String], n_types: usize) -> Result<Vec<Fingerprint>> {
    if labels.len() != group_of_row.len() {
        return Err(Error::DimensionMismatch {
            expected: group_of_row.len(),
            actual: labels.len(),
        });
    }
    let mut counts = vec![vec![0u64; n_types]; groups.len()];
    for (&l, &g) in labels.iter().zip(group_of_row) {
        if l >= n_types {
            return Err(Error::InvalidArgument(format!("type label {l} >= {n_types}")));
        }
        counts[g][l] += 1;
    }
    counts
        .into_iter()
        .zip(groups)
        .map(|(c, name)| {
            let total: u64 = c.iter().sum();
            if total == 0 {
                return Err(Error::EmptyGroup(name.clone()));
            }
            let weights = c.iter().map(|&x| x as f64 / total as f64).collect();
            Fingerprint::new(name.clone(), weights)
        })
        .collect()
}

/// `-(1 / ln l) * sum f_i ln f_i` with `0 ln 0 = 0`, in `[0, 1]`. A single
/// response type has no spread and yields 0.
pub fn normalized_entropy(f: &Fingerprint) -> f64 {
    let l = f.weights.len();
    if l < 2 {
        return 0.0;
    }
    // exact at the uniform point; the sum below can land one ulp short
    if f.weights.iter().all(|&w| w == f.weights[0]) {
        return 1.0;
    }
    let h: f64 = f.weights.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.ln()).sum();
    (h / (l as f64).ln()).clamp(0.0, 1.0)
}

/// The convex combination of response types weighted by the fingerprint.
pub fn group_mean(f: &Fingerprint, types: &ResponseTypeSet) -> Result<Vec<f64>> {
    if f.len() != types.len() {
        return Err(Error::DimensionMismatch {
            expected: types.len(),
            actual: f.len(),
        });
    }
    let mut m = vec![0.0; types.dim()];
    for (w, r) in f.weights.iter().zip(&types.centroids) {
        for (a, x) in m.iter_mut().zip(r) {
            *a += w * x;
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSimilarity {
    pub groups: Vec<String>,
    /// Euclidean distances between fingerprints.
    pub distances: Vec<Vec<f64>>,
    /// Ward dendrogram over the fingerprints; leaf `i` is `groups[i]`.
    pub dendrogram: Dendrogram,
}

impl GroupSimilarity {
    pub fn newick(&self) -> String {
        self.dendrogram
            .to_newick(&self.groups)
            .expect("one leaf per group")
    }

    /// Merge order as sets of group names, for comparing topologies.
    pub fn merge_order(&self) -> Vec<(Vec<String>, Vec<String>)> {
        let name = |v: Vec<usize>| v.into_iter().map(|i| self.groups[i].clone()).collect();
        self.dendrogram
            .merge_sets()
            .into_iter()
            .map(|(a, b)| (name(a), name(b)))
            .collect()
    }
}

pub fn group_similarity(fps: &[Fingerprint]) -> Result<GroupSimilarity> {
    if fps.len() < 2 {
        return Err(Error::InvalidArgument("need at least two fingerprints".into()));
    }
    let l = fps[0].len();
    if let Some(f) = fps.iter().find(|f| f.len() != l) {
        return Err(Error::DimensionMismatch {
            expected: l,
            actual: f.len(),
        });
    }
    let distances = fps
        .iter()
        .map(|a| {
            fps.iter()
                .map(|b| a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .collect()
        })
        .collect();
    let points = RealMatrix::from_rows(&fps.iter().map(|f| f.weights.clone()).collect::<Vec<_>>())?;
    Ok(GroupSimilarity {
        groups: fps.iter().map(|f| f.group.clone()).collect(),
        distances,
        dendrogram: agglomerate(&points)?,
    })
}
