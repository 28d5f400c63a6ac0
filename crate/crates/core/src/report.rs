//! The analysis report, its canonical JSON encoding, and derived views
//! (Newick, scree and spider data, simple SVG plots).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::AnalysisConfig;
use crate::cluster::{SelectRule, UNIFORM_BOX};
use crate::data::{GapCurve, QuestionnaireMatrix, ResponseTypeSet, Scale};
use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Radial range of the fingerprint spider plots.
pub const SPIDER_AXIS: (f64, f64) = (0.0, 0.7);

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Methods {
    pub imputation: String,
    pub balancing: String,
    pub augmentation: String,
    pub linkage: String,
    pub gap_reference: String,
    pub gap_data: String,
    pub selection: String,
    pub assignment: String,
    pub similarity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub prep_seed: u64,
    pub gap_seed: u64,
    pub config: AnalysisConfig,
    pub methods: Methods,
    pub scale: Scale,
    pub n_rows: usize,
    pub n_items: usize,
    pub n_prepared_rows: usize,
    pub groups: Vec<String>,
}

impl Metadata {
    pub fn new(config: &AnalysisConfig, imputed: &QuestionnaireMatrix, n_prepared_rows: usize) -> Self {
        Metadata {
            tool: "typeprint".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed: config.seed,
            prep_seed: config.prep_config().seed,
            gap_seed: config.gap_seed(),
            config: *config,
            methods: Methods {
                imputation: format!("knn-mean(k={})", config.k_impute),
                balancing: "oversample-with-replacement".into(),
                augmentation: format!("gaussian(sd={})", format_float(config.augment_sd)),
                linkage: "ward-nn-chain".into(),
                gap_reference: UNIFORM_BOX.into(),
                gap_data: "prepared".into(),
                selection: config.rule.to_string(),
                assignment: "nearest-centroid-on-imputed-originals".into(),
                similarity: "euclidean-ward".into(),
            },
            scale: imputed.scale(),
            n_rows: imputed.n_rows(),
            n_items: imputed.n_items(),
            n_prepared_rows,
            groups: imputed.groups().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub k: usize,
    pub rule: SelectRule,
    /// The count was fixed by the caller rather than chosen from the curve.
    pub overridden: bool,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub name: String,
    pub n: usize,
    pub fingerprint: Vec<f64>,
    pub entropy: f64,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySummary {
    pub groups: Vec<String>,
    pub distances: Vec<Vec<f64>>,
    pub dendrogram: Dendrogram,
    pub newick: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub metadata: Metadata,
    pub gap_curve: GapCurve,
    pub selection: SelectionSummary,
    pub response_types: ResponseTypeSet,
    pub groups: Vec<GroupSummary>,
    pub similarity: SimilaritySummary,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: AnalysisReport = serde_json::from_str(s)?;
        if r.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported report schema version {}",
                r.schema_version
            )));
        }
        Ok(r)
    }

    pub fn group(&self, name: &str) -> Option<&GroupSummary> {
        self.groups.iter().find(|g| g.name == name)
    }
}

/// Formats a float with 12 significant digits, using the shortest decimal
/// that reads back to the rounded value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let a = rounded.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

/// Pretty-printed JSON with sorted keys and fixed float formatting.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            // scalar arrays stay on one line
            if a.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in a.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, x, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 2);
                write_value(out, x, indent + 2);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 2);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 2);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreePoint {
    pub k: usize,
    pub gap: f64,
    pub s: f64,
    pub log_w: f64,
    pub ref_mean_log_w: f64,
}

pub fn scree(report: &AnalysisReport) -> Vec<ScreePoint> {
    report
        .gap_curve
        .points
        .iter()
        .map(|p| ScreePoint {
            k: p.k,
            gap: p.gap,
            s: p.s,
            log_w: p.log_w,
            ref_mean_log_w: p.ref_mean_log_w,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpiderSeries {
    pub name: String,
    /// `(axis index starting at 1, radius)` pairs.
    pub values: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spider {
    /// One series per group over the response-type axes.
    pub fingerprints: Vec<SpiderSeries>,
    pub fingerprint_axis: (f64, f64),
    /// One series per response type over the item axes.
    pub response_types: Vec<SpiderSeries>,
    pub response_type_axis: (f64, f64),
}

pub fn spider(report: &AnalysisReport) -> Spider {
    let series = |v: &[f64]| v.iter().enumerate().map(|(i, &x)| (i + 1, x)).collect();
    let scale = report.metadata.scale;
    Spider {
        fingerprints: report
            .groups
            .iter()
            .map(|g| SpiderSeries {
                name: g.name.clone(),
                values: series(&g.fingerprint),
            })
            .collect(),
        fingerprint_axis: SPIDER_AXIS,
        response_types: report
            .response_types
            .centroids
            .iter()
            .enumerate()
            .map(|(j, c)| SpiderSeries {
                name: format!("type {}", j + 1),
                values: series(c),
            })
            .collect(),
        response_type_axis: (scale.min as f64, scale.max as f64),
    }
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 48.0;

fn svg_open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, W / 2.0, xml_escape(title));
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn px(x: f64) -> String {
    format!("{x:.2}")
}

/// Gap value against number of clusters, with the chosen `k` marked.
pub fn scree_svg(report: &AnalysisReport) -> String {
    let pts = &report.gap_curve.points;
    let mut out = String::new();
    svg_open(&mut out, "Gap statistic");
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.gap - p.s), b.max(p.gap + p.s)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let k_max = pts.len().max(2) as f64;
    let x = |k: usize| M + (k as f64 - 1.0) / (k_max - 1.0) * (W - 2.0 * M);
    let y = |g: f64| H - M - (g - lo) / span * (H - 2.0 * M);
    let _ = writeln!(
        out,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = M,
        b = H - M,
        r = W - M,
        t = M
    );
    let line: Vec<String> = pts.iter().map(|p| format!("{},{}", px(x(p.k)), px(y(p.gap)))).collect();
    let _ = writeln!(out, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, line.join(" "));
    for p in pts {
        let _ = writeln!(
            out,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="gray"/><circle cx="{cx}" cy="{}" r="3" fill="{}"/>"#,
            px(y(p.gap - p.s)),
            px(y(p.gap + p.s)),
            px(y(p.gap)),
            if p.k == report.selection.k { "crimson" } else { "steelblue" },
            cx = px(x(p.k)),
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, px(x(p.k)), H - M + 16.0, p.k);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">number of clusters</text>"#, W / 2.0, H - 8.0);
    out.push_str("</svg>\n");
    out
}

/// The group dendrogram with leaves at the bottom and raw merge costs as
/// heights.
pub fn dendrogram_svg(report: &AnalysisReport) -> String {
    let d = &report.similarity.dendrogram;
    let names = &report.similarity.groups;
    let mut out = String::new();
    svg_open(&mut out, "Group similarity");
    let n = d.n_leaves;
    let order = d.leaf_order();
    let mut xpos = vec![0.0; n + d.merges.len()];
    let step = (W - 2.0 * M) / (n.max(2) - 1) as f64;
    for (slot, &leaf) in order.iter().enumerate() {
        xpos[leaf] = M + slot as f64 * step;
    }
    let top = d.merges.last().map_or(1.0, |m| m.cost).max(f64::MIN_POSITIVE);
    let y = |h: f64| H - M - h / top * (H - 2.0 * M);
    for (i, m) in d.merges.iter().enumerate() {
        let (xl, xr) = (xpos[m.left], xpos[m.right]);
        let (yl, yr, ym) = (y(d.node_height(m.left)), y(d.node_height(m.right)), y(m.cost));
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="black" points="{},{} {},{} {},{} {},{}"/>"#,
            px(xl),
            px(yl),
            px(xl),
            px(ym),
            px(xr),
            px(ym),
            px(xr),
            px(yr)
        );
        xpos[n + i] = (xl + xr) / 2.0;
    }
    for &leaf in &order {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(xpos[leaf]),
            H - M + 16.0,
            xml_escape(&names[leaf])
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting() {
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(3.0), "3");
        assert_eq!(format_float(0.1 + 0.2), "0.3");
        assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_float(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_float(1.5e-7), "1.5e-7");
        assert_eq!(format_float(-0.0), "0");
        assert_eq!(format_float(f64::NAN), "null");
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = serde_json::json!({"b": [1, 2.5], "a": {"z": null, "y": "s\"q"}, "c": []});
        let s = to_canonical_json(&v).unwrap();
        assert_eq!(
            s,
            "{\n  \"a\": {\n    \"y\": \"s\\\"q\",\n    \"z\": null\n  },\n  \"b\": [1, 2.5],\n  \"c\": []\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
