use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use typeprint::cluster::{agglomerate, gap_curve};
use typeprint::prep::knn_impute;
use typeprint::synthgen::Preset;
use typeprint::QuestionnaireMatrix;

fn subset(n_per_group: usize) -> QuestionnaireMatrix {
    let full = Preset::D1.generate(7);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for g in 0..full.groups().len() {
        for &r in full.rows_of_group(g).iter().take(n_per_group) {
            rows.push(full.row(r).to_vec());
            labels.push(full.groups()[g].clone());
        }
    }
    QuestionnaireMatrix::from_rows(rows, labels, full.scale()).unwrap()
}

fn bench_agglomerate(c: &mut Criterion) {
    let mut group = c.benchmark_group("agglomerate");
    for n in [100, 250, 500] {
        let pts = subset(n).to_real().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(pts.n_rows()), &pts, |b, p| {
            b.iter(|| agglomerate(p).unwrap())
        });
    }
    group.finish();
}

fn bench_gap(c: &mut Criterion) {
    let pts = subset(100).to_real().unwrap();
    c.bench_function("gap_curve_400x10_b10", |b| b.iter(|| gap_curve(&pts, 20, 10, 1).unwrap()));
}

fn bench_impute(c: &mut Criterion) {
    let full = subset(250);
    let mut rows: Vec<Vec<Option<f64>>> = (0..full.n_rows()).map(|r| full.row(r).to_vec()).collect();
    for (i, row) in rows.iter_mut().enumerate().step_by(7) {
        row[i % 10] = None;
    }
    let labels = (0..full.n_rows()).map(|r| full.label(r).to_string()).collect();
    let m = QuestionnaireMatrix::from_rows(rows, labels, full.scale()).unwrap();
    c.bench_function("knn_impute_1000x10", |b| b.iter(|| knn_impute(&m, 5).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_agglomerate, bench_gap, bench_impute
}
criterion_main!(benches);
