use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn typeprint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typeprint")).args(args).output().expect("run binary")
}

fn ok(args: &[&str]) -> Output {
    let out = typeprint(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["generate", "--dataset", "d1", "--seed", "42", "--out", p(&a)]);
    ok(&["generate", "--dataset", "d1", "--seed", "42", "--out", p(&b)]);
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert_eq!(text.lines().count(), 4001);
    assert!(text.starts_with("group,item_1,item_2,item_3,item_4,item_5,item_6,item_7\n"));

    let d3 = ok(&["generate", "--dataset", "d3", "--seed", "1"]);
    let header = String::from_utf8(d3.stdout).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header, "group,item_1,item_2,item_3");
}

#[test]
fn generate_from_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"groups": [
             {"name": "x", "count": 3, "law": {"n_items": 2, "components": [{"weight": 1.0, "kind": "dirac", "values": [2, 4]}]}},
             {"name": "y", "count": 2, "law": {"n_items": 2, "components": [{"weight": 1.0, "kind": "uniform", "low": 1, "high": 5}]}}
           ],
           "noise": {"sd": 0.0, "clamp_low": 1, "clamp_high": 5, "round": true}}"#,
    )
    .unwrap();
    let out = ok(&["generate", "--spec", p(&spec), "--seed", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(&lines[1..4], ["x,2,4"; 3]);
}

#[test]
fn analyze_report_and_views() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d1.csv");
    let (r1, r2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    ok(&["generate", "--dataset", "d1", "--seed", "5", "--out", p(&csv)]);
    let flags = ["--seed", "9", "--max-clusters", "12", "--gap-refs", "4"];
    ok(&[&["analyze", p(&csv), "--out", p(&r1)][..], &flags].concat());
    ok(&[&["analyze", p(&csv), "--out", p(&r2)][..], &flags].concat());
    let json = fs::read_to_string(&r1).unwrap();
    assert_eq!(json, fs::read_to_string(&r2).unwrap());
    let report: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["metadata"]["seed"], 9);
    assert_eq!(report["groups"].as_array().unwrap().len(), 4);

    let newick = String::from_utf8(ok(&["report", p(&r1), "--format", "newick"]).stdout).unwrap();
    assert_eq!(newick.lines().count(), 1);
    assert!(newick.trim_end().ends_with(';'));
    for leaf in ["1:", "2:", "3:", "4:"] {
        assert_eq!(newick.matches(leaf).count(), 1, "{newick}");
    }
    assert_eq!(newick.trim_end(), report["similarity"]["newick"].as_str().unwrap());

    let scree: serde_json::Value =
        serde_json::from_slice(&ok(&["report", p(&r1), "--format", "scree"]).stdout).unwrap();
    let scree = scree.as_array().unwrap();
    assert_eq!(scree.len(), 12);
    for (s, g) in scree.iter().zip(report["gap_curve"]["points"].as_array().unwrap()) {
        assert_eq!(s["gap"], g["gap"]);
    }

    let spider: serde_json::Value =
        serde_json::from_slice(&ok(&["report", p(&r1), "--format", "spider"]).stdout).unwrap();
    assert_eq!(spider["fingerprint_axis"][0].as_f64(), Some(0.0));
    assert_eq!(spider["fingerprint_axis"][1].as_f64(), Some(0.7));
    let first = &spider["fingerprints"][0]["values"];
    for (pair, w) in first.as_array().unwrap().iter().zip(report["groups"][0]["fingerprint"].as_array().unwrap()) {
        assert_eq!(&pair[1], w);
    }

    for fmt in ["svg-scree", "svg-dendrogram"] {
        let svg = String::from_utf8(ok(&["report", p(&r1), "--format", fmt]).stdout).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn fixed_cluster_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d1.csv");
    ok(&["generate", "--dataset", "d1", "--seed", "2", "--out", p(&csv)]);
    let out = ok(&["analyze", p(&csv), "--clusters", "8", "--gap-refs", "2", "--max-clusters", "10"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["selection"]["k"], 8);
    assert_eq!(report["selection"]["overridden"], true);
    assert_eq!(report["response_types"]["centroids"].as_array().unwrap().len(), 8);
}

#[test]
fn baseline_verdicts_and_missing_values() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("d1.csv");
    let d3 = dir.path().join("d3.csv");
    ok(&["generate", "--dataset", "d1", "--seed", "1", "--out", p(&d1)]);
    ok(&["generate", "--dataset", "d3", "--seed", "1", "--out", p(&d3)]);
    let v: serde_json::Value = serde_json::from_slice(&ok(&["baseline", p(&d1)]).stdout).unwrap();
    assert_eq!(v["verdict"], "applicable");
    let v: serde_json::Value = serde_json::from_slice(&ok(&["baseline", p(&d3)]).stdout).unwrap();
    assert_eq!(v["verdict"], "not_applicable");

    let holes = dir.path().join("holes.csv");
    let text = fs::read_to_string(&d1).unwrap();
    // blank the first answer of the first data row
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cells: Vec<&str> = lines[1].split(',').collect();
    cells.truncate(8);
    cells[1] = "";
    lines[1] = cells.join(",");
    fs::write(&holes, lines.join("\n") + "\n").unwrap();
    let out = typeprint(&["baseline", p(&holes)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--impute"));
    ok(&["baseline", p(&holes), "--impute"]);
}

#[test]
fn input_errors_exit_1_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out_path = dir.path().join("out.json");
    let out = typeprint(&["analyze", p(&empty), "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_path.exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "group,item_1,item_2\na,1,2\nb,3,seven\n").unwrap();
    let out = typeprint(&["analyze", p(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3, column 3"));

    assert_eq!(typeprint(&["generate", "--dataset", "d9"]).status.code(), Some(1));
    assert_eq!(typeprint(&["report", p(&bad), "--format", "newick"]).status.code(), Some(1));
}

#[test]
fn degenerate_data_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let same = dir.path().join("same.csv");
    fs::write(&same, "group,item_1,item_2\na,3,3\na,3,3\nb,3,3\nb,3,3\n").unwrap();
    // without augmentation noise every dispersion is zero
    let out = typeprint(&["analyze", p(&same), "--aug-sd", "0"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}
