//! Clustering-based comparison of questionnaire groups.
//!
//! Questionnaires are imputed, balanced across groups and slightly
//! augmented, then clustered with Ward linkage. Cluster centroids act as
//! *response types*; each group is summarised by its *fingerprint*, the
//! share of its questionnaires closest to each response type, and groups are
//! compared through their fingerprints. A classical PCA-based pipeline and
//! synthetic data generators are included for comparison.

pub mod analysis;
pub mod baseline;
pub mod cluster;
pub mod data;
pub mod dendrogram;
pub mod error;
pub mod fingerprint;
pub mod prep;
pub mod report;
pub mod rng;
pub mod synthgen;

pub use analysis::{analyze, AnalysisConfig, ClusterCount};
pub use cluster::{ClusterAssignment, SelectRule};
pub use data::{
    validate, Fingerprint, GapCurve, GapPoint, NoiseSpec, Origin, PreparedMatrix, QuestionnaireMatrix, RealMatrix,
    ResponseTypeSet, Scale, Violation,
};
pub use dendrogram::{Dendrogram, Merge};
pub use error::{Error, Result};
pub use report::AnalysisReport;
