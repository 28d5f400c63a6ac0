//! Shared domain types: questionnaire matrices, prepared (clustering) matrices,
//! response types, fingerprints, gap curves and noise specifications.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                actual: data.len(),
            });
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != n_cols {
                return Err(Error::DimensionMismatch {
                    expected: n_cols,
                    actual: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n_rows: rows.len(),
            n_cols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on a zero chunk size
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    /// Copies the selected rows, in order, into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> RealMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        RealMatrix {
            n_rows: idx.len(),
            n_cols: self.n_cols,
            data,
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n_cols];
        for r in self.rows() {
            for (a, b) in m.iter_mut().zip(r) {
                *a += b;
            }
        }
        let n = self.n_rows.max(1) as f64;
        m.iter_mut().for_each(|x| *x /= n);
        m
    }

    /// Per-column (min, max).
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bb = vec![(f64::INFINITY, f64::NEG_INFINITY); self.n_cols];
        for r in self.rows() {
            for (b, &x) in bb.iter_mut().zip(r) {
                b.0 = b.0.min(x);
                b.1 = b.1.max(x);
            }
        }
        bb
    }
}

/// Inclusive integer response scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scale {
    pub min: i32,
    pub max: i32,
}

impl Default for Scale {
    fn default() -> Self {
        Scale { min: 1, max: 5 }
    }
}

impl Scale {
    pub fn contains(&self, v: f64) -> bool {
        v >= self.min as f64 && v <= self.max as f64
    }

    /// The sanity band `[min - 1, max + 1]` for augmented and centroid values.
    pub fn widened(&self) -> (f64, f64) {
        (self.min as f64 - 1.0, self.max as f64 + 1.0)
    }
}

/// A single problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    OutOfScale { row: usize, item: usize, value: f64 },
    NonFinite { row: usize, item: usize },
    Ragged { row: usize, expected: usize, actual: usize },
    LabelCount { rows: usize, labels: usize },
    EmptyLabelSet,
    NoItems,
    BadScale { min: i32, max: i32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfScale { row, item, value } => {
                write!(f, "row {row}, item {item}: value {value} outside the response scale")
            }
            Violation::NonFinite { row, item } => write!(f, "row {row}, item {item}: non-finite value"),
            Violation::Ragged { row, expected, actual } => {
                write!(f, "row {row}: {actual} items, expected {expected}")
            }
            Violation::LabelCount { rows, labels } => {
                write!(f, "{rows} rows but {labels} group labels")
            }
            Violation::EmptyLabelSet => write!(f, "no group labels"),
            Violation::NoItems => write!(f, "rows have no items"),
            Violation::BadScale { min, max } => write!(f, "scale [{min}, {max}] is empty"),
        }
    }
}

/// Checks raw rows against the questionnaire invariants. An empty report
/// means the rows can be turned into a [`QuestionnaireMatrix`].
pub fn validate(rows: &[Vec<Option<f64>>], labels: &[String], scale: Scale) -> Vec<Violation> {
    let mut out = Vec::new();
    if scale.min >= scale.max {
        out.push(Violation::BadScale {
            min: scale.min,
            max: scale.max,
        });
    }
    if labels.is_empty() {
        out.push(Violation::EmptyLabelSet);
    }
    if rows.len() != labels.len() {
        out.push(Violation::LabelCount {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    let expected = rows.first().map_or(0, Vec::len);
    if !rows.is_empty() && expected == 0 {
        out.push(Violation::NoItems);
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expected {
            out.push(Violation::Ragged {
                row: i,
                expected,
                actual: row.len(),
            });
        }
        for (j, v) in row.iter().enumerate() {
            match v {
                Some(x) if !x.is_finite() => out.push(Violation::NonFinite { row: i, item: j }),
                Some(x) if !scale.contains(*x) => out.push(Violation::OutOfScale {
                    row: i,
                    item: j,
                    value: *x,
                }),
                _ => {}
            }
        }
    }
    out
}

/// Item responses with optional missing values and one group label per row.
///
/// Groups are indexed in order of first appearance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionnaireMatrix {
    scale: Scale,
    n_items: usize,
    groups: Vec<String>,
    group_of_row: Vec<usize>,
    values: Vec<Option<f64>>,
}

impl QuestionnaireMatrix {
    pub fn from_rows(rows: Vec<Vec<Option<f64>>>, labels: Vec<String>, scale: Scale) -> Result<Self> {
        let report = validate(&rows, &labels, scale);
        if !report.is_empty() {
            return Err(Error::Invalid(report));
        }
        let n_items = rows.first().map_or(0, Vec::len);
        let mut groups: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let group_of_row = labels
            .into_iter()
            .map(|l| {
                *index.entry(l.clone()).or_insert_with(|| {
                    groups.push(l);
                    groups.len() - 1
                })
            })
            .collect();
        Ok(Self {
            scale,
            n_items,
            groups,
            group_of_row,
            values: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a complete matrix from integer rows.
    pub fn from_int_rows(rows: &[Vec<i32>], labels: Vec<String>, scale: Scale) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| Some(v as f64)).collect())
            .collect();
        Self::from_rows(rows, labels, scale)
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn n_rows(&self) -> usize {
        self.group_of_row.len()
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn row(&self, i: usize) -> &[Option<f64>] {
        &self.values[i * self.n_items..(i + 1) * self.n_items]
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.n_items + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.n_items + j] = Some(v);
    }

    /// Group names in index order.
    pub fn groups(&self) -> &[String] {
        &self.groups
    }

    pub fn group_of_row(&self) -> &[usize] {
        &self.group_of_row
    }

    pub fn label(&self, i: usize) -> &str {
        &self.groups[self.group_of_row[i]]
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.groups.len()];
        for &g in &self.group_of_row {
            sizes[g] += 1;
        }
        sizes
    }

    pub fn rows_of_group(&self, g: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.group_of_row[i] == g).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn missing_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Re-checks every invariant, e.g. after deserialization.
    pub fn validate(&self) -> Vec<Violation> {
        let rows: Vec<Vec<Option<f64>>> = (0..self.n_rows()).map(|i| self.row(i).to_vec()).collect();
        let labels: Vec<String> = (0..self.n_rows()).map(|i| self.label(i).to_owned()).collect();
        validate(&rows, &labels, self.scale)
    }

    /// The values as a real matrix; fails if anything is missing.
    pub fn to_real(&self) -> Result<RealMatrix> {
        let data = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| {
                v.ok_or(Error::InvalidArgument(format!(
                    "missing value at row {}, item {}",
                    k / self.n_items,
                    k % self.n_items
                )))
            })
            .collect::<Result<Vec<f64>>>()?;
        RealMatrix::new(self.n_rows(), self.n_items, data)
    }

    /// Restricts the matrix to the rows of a single group.
    pub fn group_matrix(&self, g: usize) -> Result<RealMatrix> {
        let rows = self.rows_of_group(g);
        if rows.is_empty() {
            return Err(Error::EmptyGroup(self.groups.get(g).cloned().unwrap_or_default()));
        }
        Ok(self.to_real()?.select_rows(&rows))
    }
}

/// Whether a prepared row is an original questionnaire or an oversampled copy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Original,
    Oversampled,
}

/// Balanced, augmented real-valued matrix fed to the clustering step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedMatrix {
    pub points: RealMatrix,
    pub groups: Vec<String>,
    pub group_of_row: Vec<usize>,
    pub origin: Vec<Origin>,
    /// Row of the imputed original matrix each prepared row was copied from.
    pub source_row: Vec<usize>,
}

impl PreparedMatrix {
    pub fn n_rows(&self) -> usize {
        self.points.n_rows()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.groups.len()];
        for &g in &self.group_of_row {
            sizes[g] += 1;
        }
        sizes
    }

    /// Checks equal group sizes and the widened scale band.
    pub fn check(&self, scale: Scale) -> Result<()> {
        let sizes = self.group_sizes();
        if sizes.windows(2).any(|w| w[0] != w[1]) {
            return Err(Error::InvalidArgument(format!("unbalanced groups: {sizes:?}")));
        }
        let (lo, hi) = scale.widened();
        if let Some(x) = self.points.as_slice().iter().find(|x| **x < lo || **x > hi) {
            return Err(Error::InvalidArgument(format!("prepared value {x} outside [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// Ordered cluster centroids ("response types").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseTypeSet {
    pub centroids: Vec<Vec<f64>>,
}

impl ResponseTypeSet {
    pub fn new(centroids: Vec<Vec<f64>>) -> Result<Self> {
        let d = centroids
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidArgument("at least one response type required".into()))?;
        if let Some(c) = centroids.iter().find(|c| c.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: c.len(),
            });
        }
        Ok(Self { centroids })
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn get(&self, j: usize) -> &[f64] {
        &self.centroids[j]
    }
}

/// A group's distribution over response types: a point on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub group: String,
    pub weights: Vec<f64>,
}

impl Fingerprint {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(group: impl Into<String>, weights: Vec<f64>) -> Result<Self> {
        let f = Fingerprint {
            group: group.into(),
            weights,
        };
        if !f.on_simplex() {
            return Err(Error::InvalidArgument(format!(
                "fingerprint of `{}` is not a probability vector",
                f.group
            )));
        }
        Ok(f)
    }

    pub fn on_simplex(&self) -> bool {
        !self.weights.is_empty()
            && self.weights.iter().all(|w| *w >= 0.0 && w.is_finite())
            && (self.weights.iter().sum::<f64>() - 1.0).abs() <= Self::SUM_TOLERANCE
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// One row of a gap curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub k: usize,
    pub log_w: f64,
    pub ref_mean_log_w: f64,
    pub gap: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub points: Vec<GapPoint>,
    pub refs: usize,
    pub seed: u64,
    /// Reference distribution, recorded for reproducibility.
    pub reference: String,
}

impl GapCurve {
    pub fn k_max(&self) -> usize {
        self.points.len()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.gap).collect()
    }

    /// Gap value at `k` (1-based).
    pub fn gap(&self, k: usize) -> f64 {
        self.points[k - 1].gap
    }
}

/// Additive Gaussian perturbation followed by rounding and clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sd: f64,
    pub clamp_low: i32,
    pub clamp_high: i32,
    pub round: bool,
}

impl NoiseSpec {
    pub fn new(sd: f64, clamp_low: i32, clamp_high: i32, round: bool) -> Result<Self> {
        let n = NoiseSpec {
            sd,
            clamp_low,
            clamp_high,
            round,
        };
        n.check()?;
        Ok(n)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.sd >= 0.0 && self.sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise sd {} must be >= 0", self.sd)));
        }
        if self.clamp_low >= self.clamp_high {
            return Err(Error::InvalidArgument(format!(
                "clamp bounds [{}, {}] are empty",
                self.clamp_low, self.clamp_high
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn well_formed_matrix_has_no_violations() {
        let rows: Vec<Vec<Option<f64>>> = (0..4)
            .map(|i| (0..7).map(|j| Some(((i + j) % 5 + 1) as f64)).collect())
            .collect();
        assert!(validate(&rows, &labels(&["a", "a", "b", "b"]), Scale::default()).is_empty());
    }

    #[test]
    fn out_of_scale_value_is_reported_once() {
        let rows = vec![vec![Some(1.0), Some(6.0)], vec![Some(2.0), None]];
        let report = validate(&rows, &labels(&["a", "b"]), Scale::default());
        assert_eq!(
            report,
            vec![Violation::OutOfScale {
                row: 0,
                item: 1,
                value: 6.0
            }]
        );
    }

    #[test]
    fn singleton_group_is_valid() {
        let rows = vec![vec![Some(1.0)], vec![Some(2.0)], vec![Some(3.0)]];
        let m = QuestionnaireMatrix::from_rows(rows, labels(&["a", "a", "lonely"]), Scale::default()).unwrap();
        assert_eq!(m.group_sizes(), vec![2, 1]);
        assert!(m.validate().is_empty());
    }

    #[test]
    fn ragged_and_label_problems() {
        let rows = vec![vec![Some(1.0), Some(2.0)], vec![Some(2.0)]];
        let report = validate(&rows, &labels(&["a"]), Scale::default());
        assert!(report.contains(&Violation::LabelCount { rows: 2, labels: 1 }));
        assert!(report.contains(&Violation::Ragged {
            row: 1,
            expected: 2,
            actual: 1
        }));
        assert!(validate(&[], &[], Scale::default()).contains(&Violation::EmptyLabelSet));
        assert!(matches!(
            QuestionnaireMatrix::from_rows(rows, labels(&["a"]), Scale::default()),
            Err(Error::Invalid(_))
        ));
    }

    #[test]
    fn groups_indexed_by_first_appearance() {
        let m = QuestionnaireMatrix::from_int_rows(
            &[vec![1], vec![2], vec![3]],
            labels(&["z", "a", "z"]),
            Scale::default(),
        )
        .unwrap();
        assert_eq!(m.groups(), &["z".to_string(), "a".to_string()]);
        assert_eq!(m.group_of_row(), &[0, 1, 0]);
        assert_eq!(m.rows_of_group(0), vec![0, 2]);
    }

    #[test]
    fn noise_spec_rejects_bad_bounds() {
        assert!(NoiseSpec::new(0.5, 1, 5, true).is_ok());
        assert!(NoiseSpec::new(-0.1, 1, 5, true).is_err());
        assert!(NoiseSpec::new(0.5, 5, 5, true).is_err());
    }

    #[test]
    fn fingerprint_simplex_check() {
        assert!(Fingerprint::new("g", vec![0.5, 0.25, 0.25]).is_ok());
        assert!(Fingerprint::new("g", vec![0.5, 0.6]).is_err());
        assert!(Fingerprint::new("g", vec![-0.1, 1.1]).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let m = QuestionnaireMatrix::from_rows(
            vec![vec![Some(1.0), None], vec![Some(5.0), Some(2.5)]],
            labels(&["x", "y"]),
            Scale::default(),
        )
        .unwrap();
        let back: QuestionnaireMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);

        let rt = ResponseTypeSet::new(vec![vec![0.1 + 0.2, 1.0 / 3.0], vec![4.0, 5.0]]).unwrap();
        let back: ResponseTypeSet = serde_json::from_str(&serde_json::to_string(&rt).unwrap()).unwrap();
        assert_eq!(rt, back);
    }
}
