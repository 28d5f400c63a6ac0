use proptest::prelude::*;
use typeprint::baseline::{dunn_posthoc, kruskal_wallis, pca, spearman};
use typeprint::cluster::{agglomerate, cut_labels};
use typeprint::fingerprint::{assign, fingerprints, group_similarity, normalized_entropy};
use typeprint::prep::{balance_groups, knn_impute};
use typeprint::report::format_float;
use typeprint::synthgen::{perturb_with_draw, DatasetSpec, Preset};
use typeprint::{Fingerprint, NoiseSpec, QuestionnaireMatrix, RealMatrix, ResponseTypeSet, Scale};

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = RealMatrix> {
    (2..=max_rows, 1..=max_cols).prop_flat_map(|(n, d)| {
        prop::collection::vec(-10.0f64..10.0, n * d).prop_map(move |v| RealMatrix::new(n, d, v).unwrap())
    })
}

fn likert(max_rows: usize, d: usize) -> impl Strategy<Value = (Vec<Vec<i32>>, Vec<String>)> {
    prop::collection::vec((prop::collection::vec(1i32..=5, d), 0usize..3), 3..=max_rows).prop_map(|rows| {
        let labels = rows.iter().map(|(_, g)| format!("g{g}")).collect();
        (rows.into_iter().map(|(r, _)| r).collect(), labels)
    })
}

fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0u32..100, len).prop_filter_map("all zero", |c| {
        let total: u32 = c.iter().sum();
        (total > 0).then(|| c.iter().map(|&x| x as f64 / total as f64).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dendrogram_is_well_formed_and_monotone(p in matrix(40, 5)) {
        let d = agglomerate(&p).unwrap();
        prop_assert!(d.check().is_ok());
        prop_assert!(d.merges.windows(2).all(|w| w[0].cost <= w[1].cost));
        prop_assert_eq!(d.merges.last().unwrap().size, p.n_rows());
    }

    #[test]
    fn cut_gives_exactly_k_clusters(p in matrix(30, 3), k in 1usize..30) {
        let k = k.min(p.n_rows());
        let d = agglomerate(&p).unwrap();
        let labels = cut_labels(&d, k);
        let mut seen = labels.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen, (0..k).collect::<Vec<_>>());
    }

    #[test]
    fn fingerprints_lie_on_simplex(
        labels in prop::collection::vec((0usize..6, 0usize..3), 1..200)
    ) {
        let groups: Vec<String> = (0..3).map(|g| g.to_string()).collect();
        let (l, g): (Vec<usize>, Vec<usize>) = labels.into_iter().unzip();
        match fingerprints(&l, &g, &groups, 6) {
            Ok(fps) => for f in fps { prop_assert!(f.on_simplex()); },
            // a group without rows has no fingerprint
            Err(_) => prop_assert!((0..3).any(|x| !g.contains(&x))),
        }
    }

    #[test]
    fn entropy_in_unit_interval_and_permutation_invariant(w in simplex(6), rot in 0usize..6) {
        let f = Fingerprint::new("g", w.clone()).unwrap();
        let e = normalized_entropy(&f);
        prop_assert!((0.0..=1.0).contains(&e));
        let mut r = w;
        r.rotate_left(rot);
        let g = Fingerprint::new("g", r).unwrap();
        prop_assert!((normalized_entropy(&g) - e).abs() < 1e-12);
    }

    #[test]
    fn entropy_extremes_are_exact(len in 2usize..12, hot in 0usize..12) {
        let mut one_hot = vec![0.0; len];
        one_hot[hot % len] = 1.0;
        prop_assert_eq!(normalized_entropy(&Fingerprint::new("g", one_hot).unwrap()), 0.0);
        let uniform = vec![1.0 / len as f64; len];
        let e = normalized_entropy(&Fingerprint::new("g", uniform).unwrap());
        prop_assert_eq!(e, 1.0);
    }

    #[test]
    fn pca_eigenvalues_descend_and_sum_to_dimension(p in matrix(60, 6)) {
        prop_assume!(p.n_rows() > p.n_cols() + 1 && p.n_cols() >= 2);
        if let Ok(r) = pca(&p) {
            let d = p.n_cols() as f64;
            prop_assert!((r.eigenvalues.iter().sum::<f64>() - d).abs() < 1e-6);
            prop_assert!(r.eigenvalues.windows(2).all(|w| w[0] >= w[1] - 1e-12));
            prop_assert_eq!(r.n_kaiser, r.eigenvalues.iter().filter(|&&e| e > 1.0 + 1e-10).count());
        }
    }

    #[test]
    fn assign_is_idempotent_and_row_order_free(p in matrix(30, 3), k in 1usize..5) {
        let k = k.min(p.n_rows());
        let d = agglomerate(&p).unwrap();
        let c = typeprint::cluster::cut(&d, &p, k).unwrap();
        let types = ResponseTypeSet::new(c.centroids.clone()).unwrap();
        let a = assign(&p, &types).unwrap();
        prop_assert_eq!(&a, &assign(&p, &types).unwrap());
        let rev: Vec<usize> = (0..p.n_rows()).rev().collect();
        let b = assign(&p.select_rows(&rev), &types).unwrap();
        let back: Vec<usize> = b.into_iter().rev().collect();
        prop_assert_eq!(a, back);
    }

    #[test]
    fn group_similarity_ignores_type_relabeling(ws in prop::collection::vec(simplex(4), 3..6), rot in 1usize..4) {
        let fps: Vec<Fingerprint> = ws.iter().enumerate().map(|(i, w)| Fingerprint::new(i.to_string(), w.clone()).unwrap()).collect();
        let rotated: Vec<Fingerprint> = ws.iter().enumerate().map(|(i, w)| {
            let mut r = w.clone();
            r.rotate_left(rot);
            Fingerprint::new(i.to_string(), r).unwrap()
        }).collect();
        let a = group_similarity(&fps).unwrap();
        let b = group_similarity(&rotated).unwrap();
        for (x, y) in a.distances.iter().flatten().zip(b.distances.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_stays_on_scale(x in 1i32..=5, z in -10.0f64..10.0, sd in 0.0f64..3.0) {
        let noise = NoiseSpec::new(sd, 1, 5, true).unwrap();
        let y = perturb_with_draw(x, &noise, z);
        prop_assert!((1..=5).contains(&y));
        if sd == 0.0 { prop_assert_eq!(y, x); }
    }

    #[test]
    fn balancing_keeps_originals_and_equalises_groups((rows, labels) in likert(40, 3), seed in any::<u64>()) {
        let m = QuestionnaireMatrix::from_int_rows(&rows, labels, Scale::default()).unwrap();
        let b = balance_groups(&m, seed).unwrap();
        let max = *m.group_sizes().iter().max().unwrap();
        let mut sizes = vec![0; m.groups().len()];
        for &g in &b.group_of_row { sizes[g] += 1; }
        prop_assert!(sizes.iter().all(|&s| s == max));
        for i in 0..m.n_rows() {
            prop_assert_eq!(b.source_row[i], i);
            for j in 0..3 {
                prop_assert_eq!(Some(b.points.get(i, j)), m.get(i, j));
            }
        }
    }

    #[test]
    fn imputation_fills_only_missing_cells(
        (rows, labels) in likert(30, 4),
        holes in prop::collection::vec((0usize..30, 0usize..4), 0..6)
    ) {
        let n = rows.len();
        let mut cells: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.iter().map(|&x| Some(x as f64)).collect()).collect();
        for &(i, j) in &holes { if i < n && j > 0 { cells[i][j] = None; } }
        let m = QuestionnaireMatrix::from_rows(cells.clone(), labels, Scale::default()).unwrap();
        let out = knn_impute(&m, 3).unwrap();
        prop_assert!(out.matrix.is_complete());
        for (i, row) in cells.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                let v = out.matrix.get(i, j).unwrap();
                match c {
                    Some(x) => prop_assert_eq!(v, *x),
                    None => prop_assert!((1.0..=5.0).contains(&v)),
                }
            }
        }
    }

    #[test]
    fn spearman_is_bounded_and_symmetric(xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let Ok(r) = spearman(&x, &y) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            prop_assert!((spearman(&y, &x).unwrap() - r).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_tests_ignore_monotone_transforms(
        samples in prop::collection::vec(prop::collection::vec(1i32..=5, 1..12), 2..5)
    ) {
        let raw: Vec<Vec<f64>> = samples.iter().map(|g| g.iter().map(|&x| x as f64).collect()).collect();
        let warped: Vec<Vec<f64>> = raw.iter().map(|g| g.iter().map(|x| x.exp() - 7.0).collect()).collect();
        let (a, b) = (kruskal_wallis(&raw).unwrap(), kruskal_wallis(&warped).unwrap());
        prop_assert!((a.h - b.h).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&a.p));
        let dunn = dunn_posthoc(&raw).unwrap();
        for p in &dunn.pairs {
            prop_assert!((0.0..=1.0).contains(&p.p) && p.p_adjusted >= p.p && p.p_adjusted <= 1.0);
        }
    }

    #[test]
    fn spearman_ignores_monotone_transforms(xy in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..40)) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        if let Ok(r) = spearman(&x, &y) {
            let x3: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
            let ye: Vec<f64> = y.iter().map(|v| v.exp()).collect();
            prop_assert!((spearman(&x3, &ye).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn float_format_reads_back_within_twelve_digits(x in -1e20f64..1e20, e in -30i32..30) {
        let v = x * 10f64.powi(e);
        let back: f64 = format_float(v).parse().unwrap();
        prop_assert!((back - v).abs() <= v.abs() * 1e-11);
    }
}

#[test]
fn dataset_spec_json_round_trip() {
    for p in [Preset::D1, Preset::D2, Preset::D3] {
        let spec = p.spec(5);
        let json = serde_json::to_string(&spec).unwrap();
        let back: DatasetSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }
}
