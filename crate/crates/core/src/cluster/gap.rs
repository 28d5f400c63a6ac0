use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agglomerate;
use crate::data::{GapCurve, GapPoint, RealMatrix};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::rng;

pub const UNIFORM_BOX: &str = "uniform-bounding-box";

/// `W_k` for `k = 1..=k_max`: the sum of all merge costs except the last
/// `k - 1`, since each Ward merge adds exactly its cost to the within-cluster
/// sum of squares.
pub fn dispersion_curve(dendrogram: &Dendrogram, k_max: usize) -> Result<Vec<f64>> {
    let n = dendrogram.n_leaves;
    if k_max == 0 || k_max > n {
        return Err(Error::InvalidArgument(format!("k_max {k_max} outside 1..={n}")));
    }
    let costs: Vec<f64> = dendrogram.merges.iter().map(|m| m.cost).collect();
    let mut prefix = Vec::with_capacity(costs.len() + 1);
    let mut acc = 0.0;
    prefix.push(0.0);
    for c in &costs {
        acc += c;
        prefix.push(acc);
    }
    Ok((1..=k_max).map(|k| prefix[n - k]).collect())
}

fn log_dispersions(points: &RealMatrix, k_max: usize) -> Result<Vec<f64>> {
    log_of(&dispersion_curve(&agglomerate(points)?, k_max)?)
}

fn log_of(w: &[f64]) -> Result<Vec<f64>> {
    w.iter()
        .enumerate()
        .map(|(i, &x)| {
            if x > 0.0 {
                Ok(x.ln())
            } else {
                Err(Error::Degenerate(format!("zero within-cluster dispersion at k = {}", i + 1)))
            }
        })
        .collect()
}

fn uniform_box(points: &RealMatrix, seed: u64, b: usize) -> RealMatrix {
    let bb = points.bounding_box();
    let mut rng = rng::stream(seed, b as u64);
    let data = (0..points.n_rows())
        .flat_map(|_| bb.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect::<Vec<_>>())
        .collect();
    RealMatrix::new(points.n_rows(), points.n_cols(), data).expect("shape")
}

/// Gap statistic with `refs` reference sets drawn uniformly from the data's
/// axis-aligned bounding box. Replicate `b` uses stream `b` of `seed`.
pub fn gap_curve(points: &RealMatrix, k_max: usize, refs: usize, seed: u64) -> Result<GapCurve> {
    let mut curve = gap_curve_with_reference(points, k_max, refs, seed, |b| uniform_box(points, seed, b))?;
    curve.reference = UNIFORM_BOX.into();
    Ok(curve)
}

/// Gap statistic with caller-supplied reference sets; `reference(b)` must
/// return an `n x d` matrix for replicate `b`.
pub fn gap_curve_with_reference<F>(
    points: &RealMatrix,
    k_max: usize,
    refs: usize,
    seed: u64,
    reference: F,
) -> Result<GapCurve>
where
    F: Fn(usize) -> RealMatrix + Sync,
{
    gap_curve_impl(points, None, k_max, refs, seed, reference)
}

/// [`gap_curve`] reusing an existing dendrogram of `points`.
pub fn gap_curve_with_dendrogram(
    points: &RealMatrix,
    dendrogram: &Dendrogram,
    k_max: usize,
    refs: usize,
    seed: u64,
) -> Result<GapCurve> {
    if dendrogram.n_leaves != points.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: points.n_rows(),
            actual: dendrogram.n_leaves,
        });
    }
    let mut curve = gap_curve_impl(points, Some(dendrogram), k_max, refs, seed, |b| uniform_box(points, seed, b))?;
    curve.reference = UNIFORM_BOX.into();
    Ok(curve)
}

fn gap_curve_impl<F>(
    points: &RealMatrix,
    dendrogram: Option<&Dendrogram>,
    k_max: usize,
    refs: usize,
    seed: u64,
    reference: F,
) -> Result<GapCurve>
where
    F: Fn(usize) -> RealMatrix + Sync,
{
    let n = points.n_rows();
    if k_max == 0 || k_max >= n {
        return Err(Error::InvalidArgument(format!("k_max {k_max} must be in 1..{n}")));
    }
    if refs == 0 {
        return Err(Error::InvalidArgument("at least one reference set required".into()));
    }
    if points.bounding_box().iter().all(|(lo, hi)| lo == hi) {
        return Err(Error::Degenerate("all points are identical".into()));
    }
    let observed = match dendrogram {
        Some(d) => log_of(&dispersion_curve(d, k_max)?)?,
        None => log_dispersions(points, k_max)?,
    };
    let reference: Vec<Vec<f64>> = (0..refs)
        .into_par_iter()
        .map(|b| {
            let r = reference(b);
            if r.n_rows() != n || r.n_cols() != points.n_cols() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: r.n_rows(),
                });
            }
            log_dispersions(&r, k_max)
        })
        .collect::<Result<_>>()?;

    let b = refs as f64;
    let points = (0..k_max)
        .map(|i| {
            let mean = reference.iter().map(|r| r[i]).sum::<f64>() / b;
            let var = reference.iter().map(|r| (r[i] - mean).powi(2)).sum::<f64>() / b;
            GapPoint {
                k: i + 1,
                log_w: observed[i],
                ref_mean_log_w: mean,
                gap: mean - observed[i],
                s: var.sqrt() * (1.0 + 1.0 / b).sqrt(),
            }
        })
        .collect();
    Ok(GapCurve {
        points,
        refs,
        seed,
        reference: "custom".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectRule {
    /// Smallest interior `k` with `gap(k-1) < gap(k) >= gap(k+1)`.
    #[default]
    FirstLocalMax,
    /// Smallest `k` with `gap(k) >= gap(k+1) - s(k+1)`.
    Tibshirani,
}

impl fmt::Display for SelectRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectRule::FirstLocalMax => "first-local-max",
            SelectRule::Tibshirani => "tibshirani",
        })
    }
}

impl FromStr for SelectRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first-local-max" => Ok(SelectRule::FirstLocalMax),
            "tibshirani" => Ok(SelectRule::Tibshirani),
            other => Err(Error::InvalidArgument(format!("unknown selection rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub k: usize,
    pub rule: SelectRule,
    /// Set when no `k` satisfied the rule and `k_max` was returned instead.
    pub fallback: bool,
    pub warning: Option<String>,
}

pub fn select_num_clusters(curve: &GapCurve, rule: SelectRule) -> Result<Selection> {
    let k_max = curve.k_max();
    if k_max < 2 {
        return Err(Error::InvalidArgument("gap curve needs k_max >= 2".into()));
    }
    let g = |k: usize| curve.gap(k);
    let found = match rule {
        SelectRule::FirstLocalMax => (2..k_max).find(|&k| g(k - 1) < g(k) && g(k) >= g(k + 1)),
        SelectRule::Tibshirani => (1..k_max).find(|&k| g(k) >= g(k + 1) - curve.points[k].s),
    };
    Ok(match found {
        Some(k) => Selection {
            k,
            rule,
            fallback: false,
            warning: None,
        },
        None => Selection {
            k: k_max,
            rule,
            fallback: true,
            warning: Some(format!("no k satisfied the {rule} rule; using k_max = {k_max}")),
        },
    })
}
