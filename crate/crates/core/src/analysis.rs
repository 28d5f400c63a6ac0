//! End-to-end analysis: prepare, cluster, choose the number of response
//! types, then fingerprint and compare the groups.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cluster::{self, agglomerate, cut, gap_curve_with_dendrogram, select_num_clusters, ClusterAssignment, SelectRule};
use crate::data::{Fingerprint, GapCurve, QuestionnaireMatrix, ResponseTypeSet};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::fingerprint::{self, GroupSimilarity};
use crate::prep::{self, PrepConfig, Prepared};
use crate::report::{AnalysisReport, GroupSummary, Metadata, SelectionSummary, SimilaritySummary, SCHEMA_VERSION};
use crate::rng;

/// Number of response types: chosen from the gap curve or fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterCount {
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for ClusterCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClusterCount::Auto => f.write_str("auto"),
            ClusterCount::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for ClusterCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(ClusterCount::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(ClusterCount::Fixed(n)),
            _ => Err(Error::InvalidArgument(format!("cluster count must be `auto` or a positive integer, got `{s}`"))),
        }
    }
}

impl Serialize for ClusterCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClusterCount {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub seed: u64,
    pub k_impute: usize,
    pub augment_sd: f64,
    pub max_clusters: usize,
    pub gap_refs: usize,
    pub clusters: ClusterCount,
    pub rule: SelectRule,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            seed: 0,
            k_impute: 5,
            augment_sd: 0.1,
            max_clusters: 20,
            gap_refs: 10,
            clusters: ClusterCount::Auto,
            rule: SelectRule::FirstLocalMax,
        }
    }
}

impl AnalysisConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn prep_config(&self) -> PrepConfig {
        PrepConfig {
            k_impute: self.k_impute,
            augment_sd: self.augment_sd,
            seed: rng::derive_tagged(self.seed, "prep"),
        }
    }

    pub fn gap_seed(&self) -> u64 {
        rng::derive_tagged(self.seed, "gap")
    }
}

/// Response types and everything derived from them for one cut.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseAnalysis {
    /// Clustering of the prepared matrix.
    pub clustering: ClusterAssignment,
    pub types: ResponseTypeSet,
    /// Response type of every row of the imputed original matrix.
    pub labels: Vec<usize>,
    pub fingerprints: Vec<Fingerprint>,
    pub entropies: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub similarity: GroupSimilarity,
}

/// Cuts the prepared-data dendrogram into `k` response types, assigns the
/// original rows and builds the group fingerprints.
pub fn response_analysis(prepared: &Prepared, dendrogram: &Dendrogram, k: usize) -> Result<ResponseAnalysis> {
    let clustering = cut(dendrogram, &prepared.prepared.points, k)?;
    let types = fingerprint::extract_response_types(&clustering)?;
    let original = prepared.imputed.to_real()?;
    let labels = fingerprint::assign(&original, &types)?;
    let fingerprints = fingerprint::fingerprints(
        &labels,
        prepared.imputed.group_of_row(),
        prepared.imputed.groups(),
        types.len(),
    )?;
    let entropies = fingerprints.iter().map(fingerprint::normalized_entropy).collect();
    let means = fingerprints
        .iter()
        .map(|f| fingerprint::group_mean(f, &types))
        .collect::<Result<_>>()?;
    let similarity = fingerprint::group_similarity(&fingerprints)?;
    Ok(ResponseAnalysis {
        clustering,
        types,
        labels,
        fingerprints,
        entropies,
        means,
        similarity,
    })
}

/// Intermediate state of a run, kept so callers can re-cut at other `k`.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: AnalysisConfig,
    pub prepared: Prepared,
    pub dendrogram: Dendrogram,
    pub gap: GapCurve,
    pub selection: cluster::Selection,
    pub result: ResponseAnalysis,
    pub warnings: Vec<String>,
}

pub fn run(matrix: &QuestionnaireMatrix, config: &AnalysisConfig) -> Result<Run> {
    if config.gap_refs == 0 {
        return Err(Error::InvalidArgument("gap_refs must be at least 1".into()));
    }
    if matrix.n_rows() < 3 {
        return Err(Error::InvalidArgument("need at least 3 questionnaires".into()));
    }
    if matrix.groups().len() < 2 {
        return Err(Error::InvalidArgument("need at least two groups to compare".into()));
    }
    let prepared = prep::prepare(matrix, &config.prep_config())?;
    let mut warnings: Vec<String> = prepared
        .warnings
        .iter()
        .map(|w| {
            format!(
                "row {}, item {}: imputed from {} of {} requested neighbours",
                w.row + 1,
                w.item + 1,
                w.used,
                w.requested
            )
        })
        .collect();
    let points = &prepared.prepared.points;
    let n = points.n_rows();
    let k_max = config.max_clusters.min(n - 1);
    if k_max < 2 {
        return Err(Error::InvalidArgument("max_clusters must be at least 2".into()));
    }
    if k_max < config.max_clusters {
        warnings.push(format!("max_clusters reduced to {k_max} (only {n} prepared rows)"));
    }
    let dendrogram = agglomerate(points)?;
    let gap = gap_curve_with_dendrogram(points, &dendrogram, k_max, config.gap_refs, config.gap_seed())?;
    let mut selection = select_num_clusters(&gap, config.rule)?;
    if let ClusterCount::Fixed(k) = config.clusters {
        if k > n {
            return Err(Error::InvalidArgument(format!("{k} clusters requested for {n} rows")));
        }
        selection.k = k;
        selection.fallback = false;
        selection.warning = None;
    }
    warnings.extend(selection.warning.clone());
    let result = response_analysis(&prepared, &dendrogram, selection.k)?;
    Ok(Run {
        config: *config,
        prepared,
        dendrogram,
        gap,
        selection,
        result,
        warnings,
    })
}

impl Run {
    pub fn report(&self) -> AnalysisReport {
        let imputed = &self.prepared.imputed;
        let sizes = imputed.group_sizes();
        let r = &self.result;
        AnalysisReport {
            schema_version: SCHEMA_VERSION,
            metadata: Metadata::new(&self.config, imputed, self.prepared.prepared.n_rows()),
            gap_curve: self.gap.clone(),
            selection: SelectionSummary {
                k: self.selection.k,
                rule: self.selection.rule,
                overridden: matches!(self.config.clusters, ClusterCount::Fixed(_)),
                fallback: self.selection.fallback,
            },
            response_types: r.types.clone(),
            groups: r
                .fingerprints
                .iter()
                .zip(&r.entropies)
                .zip(&r.means)
                .zip(&sizes)
                .map(|(((f, &entropy), mean), &n)| GroupSummary {
                    name: f.group.clone(),
                    n,
                    fingerprint: f.weights.clone(),
                    entropy,
                    mean: mean.clone(),
                })
                .collect(),
            similarity: SimilaritySummary {
                groups: r.similarity.groups.clone(),
                distances: r.similarity.distances.clone(),
                dendrogram: r.similarity.dendrogram.clone(),
                newick: r.similarity.newick(),
            },
            warnings: self.warnings.clone(),
        }
    }
}

/// Runs the whole method and packages the outcome.
pub fn analyze(matrix: &QuestionnaireMatrix, config: &AnalysisConfig) -> Result<AnalysisReport> {
    Ok(run(matrix, config)?.report())
}
