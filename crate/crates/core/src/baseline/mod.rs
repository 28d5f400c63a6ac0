//! The classical comparison pipeline: applicability gates, PCA, internal
//! consistency and rank-based group tests on per-row item means.

mod factor;
mod rank;

pub use factor::{
    bartlett_from_correlation, bartlett_sphericity, correlation, cronbach_alpha, kmo, kmo_from_correlation, pca,
    pca_from_correlation, Bartlett, Kmo, Pca,
};
pub use rank::{dunn_posthoc, kruskal_wallis, mid_ranks, spearman, Dunn, DunnPair, KruskalWallis};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{QuestionnaireMatrix, RealMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Bartlett p must be below this.
    pub bartlett_alpha: f64,
    /// Overall KMO must be at least this.
    pub kmo_min: f64,
    /// First-component loadings below this are flagged.
    pub low_loading: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            bartlett_alpha: 0.05,
            kmo_min: 0.7,
            low_loading: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Applicable,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", content = "detail", rename_all = "snake_case")]
pub enum GateFailure {
    /// No significant correlation structure.
    Bartlett,
    /// Sampling adequacy below the threshold.
    Kmo,
    /// The Kaiser criterion does not give exactly one component.
    Kaiser,
    /// A statistic could not be computed.
    Computation(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupBaseline {
    pub group: String,
    pub n: usize,
    pub bartlett: Option<Bartlett>,
    pub kmo: Option<Kmo>,
    pub pca: Option<Pca>,
    pub cronbach_alpha: Option<f64>,
    /// 1-based items whose first-component loading is below the threshold.
    pub low_loading_items: Vec<usize>,
    pub verdict: Verdict,
    pub failures: Vec<GateFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DunnRow {
    pub a: String,
    pub b: String,
    pub z: f64,
    pub p: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub config: BaselineConfig,
    pub groups: Vec<GroupBaseline>,
    pub verdict: Verdict,
    /// Present only when every group passed the gates.
    pub kruskal_wallis: Option<KruskalWallis>,
    pub dunn: Option<Vec<DunnRow>>,
    pub warnings: Vec<String>,
}

impl BaselineReport {
    pub fn dunn_pair(&self, a: &str, b: &str) -> Option<&DunnRow> {
        self.dunn
            .as_ref()?
            .iter()
            .find(|r| (r.a == a && r.b == b) || (r.a == b && r.b == a))
    }
}

fn group_baseline(name: &str, x: &RealMatrix, cfg: &BaselineConfig) -> GroupBaseline {
    let mut out = GroupBaseline {
        group: name.to_owned(),
        n: x.n_rows(),
        bartlett: None,
        kmo: None,
        pca: None,
        cronbach_alpha: None,
        low_loading_items: Vec::new(),
        verdict: Verdict::NotApplicable,
        failures: Vec::new(),
    };
    let r = match correlation(x) {
        Ok(r) => r,
        Err(e) => {
            out.failures.push(GateFailure::Computation(e.to_string()));
            return out;
        }
    };
    match bartlett_from_correlation(&r, x.n_rows()) {
        Ok(b) => {
            if b.p.is_nan() || b.p >= cfg.bartlett_alpha {
                out.failures.push(GateFailure::Bartlett);
            }
            out.bartlett = Some(b);
        }
        Err(e) => out.failures.push(GateFailure::Computation(e.to_string())),
    }
    match kmo_from_correlation(&r) {
        Ok(k) => {
            if k.overall.is_nan() || k.overall < cfg.kmo_min {
                out.failures.push(GateFailure::Kmo);
            }
            out.kmo = Some(k);
        }
        Err(e) => out.failures.push(GateFailure::Computation(e.to_string())),
    }
    match pca_from_correlation(&r) {
        Ok(p) => {
            if p.n_kaiser != 1 {
                out.failures.push(GateFailure::Kaiser);
            }
            out.low_loading_items = p
                .first_component_loadings()
                .iter()
                .enumerate()
                .filter(|(_, l)| **l < cfg.low_loading)
                .map(|(i, _)| i + 1)
                .collect();
            out.pca = Some(p);
        }
        Err(e) => out.failures.push(GateFailure::Computation(e.to_string())),
    }
    out.cronbach_alpha = cronbach_alpha(x).ok();
    if out.failures.is_empty() {
        out.verdict = Verdict::Applicable;
    }
    out
}

/// Per-group gates and PCA; when every group passes, Kruskal-Wallis and
/// Dunn-Bonferroni on per-row item means.
pub fn classical_pipeline(matrix: &QuestionnaireMatrix, cfg: &BaselineConfig) -> Result<BaselineReport> {
    if !matrix.is_complete() {
        return Err(Error::InvalidArgument(format!(
            "{} missing values; impute before running the baseline",
            matrix.missing_count()
        )));
    }
    let real = matrix.to_real()?;
    let groups: Vec<GroupBaseline> = matrix
        .groups()
        .par_iter()
        .enumerate()
        .map(|(g, name)| group_baseline(name, &real.select_rows(&matrix.rows_of_group(g)), cfg))
        .collect();
    let mut warnings = Vec::new();
    for g in &groups {
        if !g.low_loading_items.is_empty() {
            warnings.push(format!("group {}: low first-component loadings on items {:?}", g.group, g.low_loading_items));
        }
        if g.pca.as_ref().is_some_and(|p| p.n_kaiser > 1) {
            warnings.push(format!("group {}: {} components by the Kaiser criterion", g.group, g.pca.as_ref().unwrap().n_kaiser));
        }
    }
    let applicable = groups.iter().all(|g| g.verdict == Verdict::Applicable);
    let mut report = BaselineReport {
        config: *cfg,
        groups,
        verdict: if applicable { Verdict::Applicable } else { Verdict::NotApplicable },
        kruskal_wallis: None,
        dunn: None,
        warnings,
    };
    if applicable {
        let samples = item_mean_samples(matrix, &real);
        let kw = kruskal_wallis(&samples)?;
        let dunn = dunn_posthoc(&samples)?;
        report.dunn = Some(
            dunn.pairs
                .iter()
                .map(|p| DunnRow {
                    a: matrix.groups()[p.i].clone(),
                    b: matrix.groups()[p.j].clone(),
                    z: p.z,
                    p: p.p,
                    p_adjusted: p.p_adjusted,
                })
                .collect(),
        );
        report.kruskal_wallis = Some(kw);
    }
    Ok(report)
}

/// Per-group samples of row means over all items.
pub fn item_mean_samples(matrix: &QuestionnaireMatrix, real: &RealMatrix) -> Vec<Vec<f64>> {
    let mut samples = vec![Vec::new(); matrix.groups().len()];
    for (r, &g) in real.rows().zip(matrix.group_of_row()) {
        samples[g].push(r.iter().sum::<f64>() / r.len() as f64);
    }
    samples
}
