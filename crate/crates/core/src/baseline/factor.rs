//! Correlation-matrix diagnostics: Bartlett's sphericity test, KMO, PCA
//! with the Kaiser criterion, and Cronbach's alpha.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::data::RealMatrix;
use crate::error::{Error, Result};

/// Eigenvalues below this fraction of the largest make a correlation matrix
/// singular for our purposes.
const SINGULAR_RATIO: f64 = 1e-12;

/// Eigenvalues must exceed 1 by more than rounding noise to count.
const KAISER_SLACK: f64 = 1e-10;

/// Pearson correlation matrix of the columns.
pub fn correlation(x: &RealMatrix) -> Result<DMatrix<f64>> {
    let (n, d) = (x.n_rows(), x.n_cols());
    if n < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two rows".into()));
    }
    let means = x.column_means();
    let mut cov = DMatrix::<f64>::zeros(d, d);
    for r in x.rows() {
        for i in 0..d {
            let di = r[i] - means[i];
            for j in i..d {
                cov[(i, j)] += di * (r[j] - means[j]);
            }
        }
    }
    let sd: Vec<f64> = (0..d).map(|i| cov[(i, i)].sqrt()).collect();
    if let Some(i) = sd.iter().position(|&s| s == 0.0) {
        return Err(Error::Undefined(format!("item {} has zero variance", i + 1)));
    }
    let mut r = DMatrix::<f64>::identity(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = cov[(i, j)] / (sd[i] * sd[j]);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(r)
}

fn condition(eig: &[f64]) -> f64 {
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_nonsingular(r: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig: Vec<f64> = SymmetricEigen::new(r.clone()).eigenvalues.iter().copied().collect();
    let max = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if eig.iter().any(|&e| e <= SINGULAR_RATIO * max) {
        return Err(Error::SingularCorrelation {
            condition: condition(&eig),
        });
    }
    Ok(eig)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bartlett {
    pub statistic: f64,
    pub df: f64,
    pub p: f64,
}

/// Bartlett's test of sphericity on a correlation matrix from `n` rows.
pub fn bartlett_from_correlation(r: &DMatrix<f64>, n: usize) -> Result<Bartlett> {
    let d = r.nrows();
    if n <= d {
        return Err(Error::InvalidArgument(format!("Bartlett's test needs n > d ({n} <= {d})")));
    }
    let eig = check_nonsingular(r)?;
    let ln_det: f64 = eig.iter().map(|e| e.ln()).sum();
    let factor = n as f64 - 1.0 - (2.0 * d as f64 + 5.0) / 6.0;
    let statistic = (-factor * ln_det).max(0.0);
    let df = (d * (d - 1)) as f64 / 2.0;
    Ok(Bartlett {
        statistic,
        df,
        p: chi2_sf(statistic, df),
    })
}

pub fn bartlett_sphericity(x: &RealMatrix) -> Result<Bartlett> {
    bartlett_from_correlation(&correlation(x)?, x.n_rows())
}

pub(crate) fn chi2_sf(x: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df).map(|c| c.sf(x)).unwrap_or(f64::NAN).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kmo {
    pub overall: f64,
    pub per_item: Vec<f64>,
}

/// Kaiser-Meyer-Olkin sampling adequacy from anti-image partial
/// correlations `p_ij = -S_ij / sqrt(S_ii S_jj)`, `S = R^-1`.
pub fn kmo_from_correlation(r: &DMatrix<f64>) -> Result<Kmo> {
    check_nonsingular(r)?;
    let d = r.nrows();
    let s = r
        .clone()
        .try_inverse()
        .ok_or(Error::SingularCorrelation { condition: f64::INFINITY })?;
    let mut r2 = vec![0.0; d];
    let mut p2 = vec![0.0; d];
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let p = -s[(i, j)] / (s[(i, i)] * s[(j, j)]).sqrt();
                r2[i] += r[(i, j)] * r[(i, j)];
                p2[i] += p * p;
            }
        }
    }
    let (sr, sp): (f64, f64) = (r2.iter().sum(), p2.iter().sum());
    let ratio = |a: f64, b: f64| if a + b > 0.0 { a / (a + b) } else { f64::NAN };
    Ok(Kmo {
        overall: ratio(sr, sp),
        per_item: r2.iter().zip(&p2).map(|(&a, &b)| ratio(a, b)).collect(),
    })
}

pub fn kmo(x: &RealMatrix) -> Result<Kmo> {
    kmo_from_correlation(&correlation(x)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `loadings[item][component]`.
    pub loadings: Vec<Vec<f64>>,
    pub n_kaiser: usize,
}

impl Pca {
    pub fn first_component_loadings(&self) -> Vec<f64> {
        self.loadings.iter().map(|r| r[0]).collect()
    }
}

/// Eigendecomposition of a correlation matrix. Loadings are eigenvectors
/// scaled by the root of their eigenvalue, signed so the largest-magnitude
/// loading of each component is positive.
pub fn pca_from_correlation(r: &DMatrix<f64>) -> Result<Pca> {
    let d = r.nrows();
    let eig = SymmetricEigen::try_new(r.clone(), f64::EPSILON, 10_000).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let eigenvalues: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
    let mut loadings = vec![vec![0.0; d]; d];
    for (k, &c) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(c);
        let scale = eigenvalues[k].max(0.0).sqrt();
        let pivot = (0..d)
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()).then(b.cmp(&a)))
            .unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..d {
            loadings[i][k] = sign * col[i] * scale;
        }
    }
    let n_kaiser = eigenvalues.iter().filter(|&&e| e > 1.0 + KAISER_SLACK).count();
    Ok(Pca {
        eigenvalues,
        loadings,
        n_kaiser,
    })
}

pub fn pca(x: &RealMatrix) -> Result<Pca> {
    pca_from_correlation(&correlation(x)?)
}

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

/// `d / (d - 1) * (1 - sum(item variances) / variance(row sums))`.
pub fn cronbach_alpha(x: &RealMatrix) -> Result<f64> {
    let d = x.n_cols();
    if d < 2 || x.n_rows() < 2 {
        return Err(Error::InvalidArgument("Cronbach's alpha needs at least two items and rows".into()));
    }
    let item_var: f64 = (0..d).map(|j| variance(&x.column(j))).sum();
    let total = variance(&x.rows().map(|r| r.iter().sum::<f64>()).collect::<Vec<_>>());
    if total == 0.0 {
        return Err(Error::Undefined("row sums have zero variance".into()));
    }
    Ok(d as f64 / (d as f64 - 1.0) * (1.0 - item_var / total))
}
