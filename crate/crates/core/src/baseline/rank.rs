//! Rank-based tests: Kruskal-Wallis, Dunn's post-hoc comparisons and
//! Spearman correlation, all with mid-ranks for ties.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::factor::chi2_sf;
use crate::error::{Error, Result};

/// Mid-ranks (1-based) of `x`, plus the sizes of tie blocks longer than one.
pub fn mid_ranks(x: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && x[idx[j]] == x[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

fn tie_sum(ties: &[usize]) -> f64 {
    ties.iter().map(|&t| (t * t * t - t) as f64).sum()
}

fn pooled(samples: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    if samples.len() < 2 {
        return Err(Error::InvalidArgument("need at least two groups".into()));
    }
    if samples.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("every group needs at least one observation".into()));
    }
    let all: Vec<f64> = samples.iter().flatten().copied().collect();
    let (ranks, ties) = mid_ranks(&all);
    let mut mean_ranks = Vec::with_capacity(samples.len());
    let mut at = 0;
    for s in samples {
        mean_ranks.push(ranks[at..at + s.len()].iter().sum::<f64>() / s.len() as f64);
        at += s.len();
    }
    Ok((all, mean_ranks, tie_sum(&ties)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KruskalWallis {
    pub h: f64,
    pub df: f64,
    pub p: f64,
    /// All observations tied; H is reported as 0.
    pub degenerate: bool,
}

/// Tie-corrected Kruskal-Wallis H with a chi-square p-value.
pub fn kruskal_wallis(samples: &[Vec<f64>]) -> Result<KruskalWallis> {
    let (all, mean_ranks, ties) = pooled(samples)?;
    let n = all.len() as f64;
    let df = (samples.len() - 1) as f64;
    let correction = 1.0 - ties / (n * n * n - n);
    if n < 2.0 || correction <= 0.0 {
        return Ok(KruskalWallis {
            h: 0.0,
            df,
            p: 1.0,
            degenerate: true,
        });
    }
    let s: f64 = samples
        .iter()
        .zip(&mean_ranks)
        .map(|(g, r)| g.len() as f64 * r * r)
        .sum();
    let h = ((12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction).max(0.0);
    Ok(KruskalWallis {
        h,
        df,
        p: chi2_sf(h, df),
        degenerate: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnPair {
    pub i: usize,
    pub j: usize,
    pub z: f64,
    pub p: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dunn {
    pub pairs: Vec<DunnPair>,
    pub degenerate: bool,
}

impl Dunn {
    pub fn pair(&self, i: usize, j: usize) -> Option<&DunnPair> {
        self.pairs.iter().find(|p| (p.i, p.j) == (i.min(j), i.max(j)))
    }
}

/// Dunn's pairwise z-tests on mean ranks with Bonferroni adjustment over all
/// `g(g-1)/2` pairs.
pub fn dunn_posthoc(samples: &[Vec<f64>]) -> Result<Dunn> {
    let (all, mean_ranks, ties) = pooled(samples)?;
    let n = all.len() as f64;
    let base = n * (n + 1.0) / 12.0 - if n > 1.0 { ties / (12.0 * (n - 1.0)) } else { 0.0 };
    let g = samples.len();
    let m = (g * (g - 1) / 2) as f64;
    let degenerate = base <= 0.0;
    let normal = Normal::standard();
    let mut pairs = Vec::new();
    for i in 0..g {
        for j in i + 1..g {
            let (z, p) = if degenerate {
                (0.0, 1.0)
            } else {
                let se = (base * (1.0 / samples[i].len() as f64 + 1.0 / samples[j].len() as f64)).sqrt();
                let z = (mean_ranks[i] - mean_ranks[j]) / se;
                (z, (2.0 * normal.sf(z.abs())).min(1.0))
            };
            pairs.push(DunnPair {
                i,
                j,
                z,
                p,
                p_adjusted: (p * m).min(1.0),
            });
        }
    }
    Ok(Dunn { pairs, degenerate })
}

/// Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::InvalidArgument("Spearman correlation needs at least 3 pairs".into()));
    }
    let (rx, _) = mid_ranks(x);
    let (ry, _) = mid_ranks(y);
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("Spearman correlation of a constant vector".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}
