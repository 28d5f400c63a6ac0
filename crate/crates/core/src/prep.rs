//! Data preparation: nearest-neighbour imputation, oversampling of smaller
//! groups and Gaussian augmentation.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Origin, PreparedMatrix, QuestionnaireMatrix, RealMatrix};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub k_impute: usize,
    pub augment_sd: f64,
    pub seed: u64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            k_impute: 5,
            augment_sd: 0.1,
            seed: 0,
        }
    }
}

impl PrepConfig {
    pub fn check(&self) -> Result<()> {
        if self.k_impute == 0 {
            return Err(Error::InvalidArgument("k_impute must be at least 1".into()));
        }
        if !(self.augment_sd >= 0.0 && self.augment_sd.is_finite()) {
            return Err(Error::InvalidArgument("augment_sd must be >= 0".into()));
        }
        Ok(())
    }
}

/// Imputation produced fewer neighbours than requested for one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputeWarning {
    pub row: usize,
    pub item: usize,
    pub used: usize,
    pub requested: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Imputed {
    pub matrix: QuestionnaireMatrix,
    pub warnings: Vec<ImputeWarning>,
}

/// Fills every missing cell with the mean of that item over the `k` nearest
/// rows.
///
/// For a row with observed items `O` and a missing item `m`, candidates are
/// the other rows observed on all of `O` and on `m`; distance is Euclidean
/// over `O` using original (not previously imputed) values. Ties at the
/// k-th neighbour go to the lower row index.
pub fn knn_impute(matrix: &QuestionnaireMatrix, k: usize) -> Result<Imputed> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let d = matrix.n_items();
    let incomplete: Vec<usize> = (0..matrix.n_rows())
        .filter(|&i| matrix.row(i).iter().any(Option::is_none))
        .collect();
    if incomplete.is_empty() {
        return Ok(Imputed {
            matrix: matrix.clone(),
            warnings: Vec::new(),
        });
    }

    let fills: Vec<Vec<(usize, f64, Option<ImputeWarning>)>> = incomplete
        .par_iter()
        .map(|&i| {
            let row = matrix.row(i);
            let observed: Vec<usize> = (0..d).filter(|&j| row[j].is_some()).collect();
            if observed.is_empty() {
                return Err(Error::EmptyRow { row: i });
            }
            let missing = (0..d).filter(|&j| row[j].is_none());
            missing
                .map(|m| impute_cell(matrix, i, m, &observed, k))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut out = matrix.clone();
    let mut warnings = Vec::new();
    for (&i, cells) in incomplete.iter().zip(fills) {
        for (m, v, w) in cells {
            out.set(i, m, v);
            warnings.extend(w);
        }
    }
    Ok(Imputed { matrix: out, warnings })
}

fn impute_cell(
    matrix: &QuestionnaireMatrix,
    i: usize,
    m: usize,
    observed: &[usize],
    k: usize,
) -> Result<(usize, f64, Option<ImputeWarning>)> {
    let query = matrix.row(i);
    let mut candidates: Vec<(f64, usize, f64)> = (0..matrix.n_rows())
        .filter(|&r| r != i)
        .filter_map(|r| {
            let row = matrix.row(r);
            let target = row[m]?;
            let mut dist = 0.0;
            for &j in observed {
                let diff = row[j]? - query[j].expect("observed");
                dist += diff * diff;
            }
            Some((dist, r, target))
        })
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidates { row: i, item: m });
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let used = candidates.len().min(k);
    let mean = candidates[..used].iter().map(|c| c.2).sum::<f64>() / used as f64;
    let warning = (used < k).then_some(ImputeWarning {
        row: i,
        item: m,
        used,
        requested: k,
    });
    Ok((m, mean, warning))
}

/// A complete matrix whose groups have been topped up to equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct Balanced {
    pub points: RealMatrix,
    pub groups: Vec<String>,
    pub group_of_row: Vec<usize>,
    pub origin: Vec<Origin>,
    pub source_row: Vec<usize>,
}

impl Balanced {
    pub fn n_rows(&self) -> usize {
        self.points.n_rows()
    }

    pub fn duplicates(&self) -> usize {
        self.origin.iter().filter(|o| **o == Origin::Oversampled).count()
    }
}

/// Keeps every original row, then appends, group by group, rows drawn
/// uniformly with replacement from the group's originals until each group
/// has as many rows as the largest one.
pub fn balance_groups(matrix: &QuestionnaireMatrix, seed: u64) -> Result<Balanced> {
    let points = matrix.to_real()?;
    let sizes = matrix.group_sizes();
    if let Some(g) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyGroup(matrix.groups()[g].clone()));
    }
    let target = sizes.iter().copied().max().unwrap_or(0);
    let mut source_row: Vec<usize> = (0..matrix.n_rows()).collect();
    let mut origin = vec![Origin::Original; matrix.n_rows()];
    let mut group_of_row = matrix.group_of_row().to_vec();
    for (g, &size) in sizes.iter().enumerate() {
        if size == target {
            continue;
        }
        let members = matrix.rows_of_group(g);
        let mut rng = rng::stream(seed, g as u64);
        for _ in size..target {
            source_row.push(members[rng.random_range(0..members.len())]);
            origin.push(Origin::Oversampled);
            group_of_row.push(g);
        }
    }
    Ok(Balanced {
        points: points.select_rows(&source_row),
        groups: matrix.groups().to_vec(),
        group_of_row,
        origin,
        source_row,
    })
}

/// Adds i.i.d. `N(0, sd^2)` noise to every cell, without rounding or
/// clamping. Row `i` draws from stream `i`.
pub fn augment(balanced: &Balanced, sd: f64, seed: u64) -> Result<PreparedMatrix> {
    let normal = Normal::new(0.0, sd).map_err(|e| Error::InvalidArgument(format!("augment sd {sd}: {e}")))?;
    let d = balanced.points.n_cols();
    let data: Vec<f64> = (0..balanced.n_rows())
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let row = balanced.points.row(i);
            (0..d).map(move |j| row[j] + normal.sample(&mut rng)).collect::<Vec<_>>()
        })
        .collect();
    Ok(PreparedMatrix {
        points: RealMatrix::new(balanced.n_rows(), d, data)?,
        groups: balanced.groups.clone(),
        group_of_row: balanced.group_of_row.clone(),
        origin: balanced.origin.clone(),
        source_row: balanced.source_row.clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    /// Imputed original matrix, used for assignment and fingerprints.
    pub imputed: QuestionnaireMatrix,
    /// Balanced and augmented matrix, used for clustering only.
    pub prepared: PreparedMatrix,
    pub warnings: Vec<ImputeWarning>,
}

pub fn prepare(matrix: &QuestionnaireMatrix, config: &PrepConfig) -> Result<Prepared> {
    config.check()?;
    let Imputed { matrix: imputed, warnings } = knn_impute(matrix, config.k_impute)?;
    let balanced = balance_groups(&imputed, rng::derive_tagged(config.seed, "balance"))?;
    let prepared = augment(&balanced, config.augment_sd, rng::derive_tagged(config.seed, "augment"))?;
    Ok(Prepared {
        imputed,
        prepared,
        warnings,
    })
}
