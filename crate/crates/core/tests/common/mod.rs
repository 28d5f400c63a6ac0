#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use typeprint::RealMatrix;

/// One merge of the reference implementation: the two member sets (each
/// sorted, smaller set first by lexicographic order) and the Ward cost.
pub type NaiveMerge = (Vec<usize>, Vec<usize>, f64);

fn centroid(points: &RealMatrix, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; points.n_cols()];
    for &i in members {
        for (a, x) in c.iter_mut().zip(points.row(i)) {
            *a += x;
        }
    }
    c.iter_mut().for_each(|a| *a /= members.len() as f64);
    c
}

/// Textbook greedy Ward: recompute every pairwise cost from the members at
/// every step. Ties go to the pair with the smaller smallest-members.
pub fn naive_ward(points: &RealMatrix) -> Vec<NaiveMerge> {
    let mut clusters: Vec<Vec<usize>> = (0..points.n_rows()).map(|i| vec![i]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        let cents: Vec<Vec<f64>> = clusters.iter().map(|m| centroid(points, m)).collect();
        let mut best: Option<((f64, usize, usize), usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let d2: f64 = cents[a].iter().zip(&cents[b]).map(|(x, y)| (x - y) * (x - y)).sum();
                let cost = na * nb / (na + nb) * d2;
                // clusters are kept sorted by smallest member, so a < b here
                let key = (cost, clusters[a][0], clusters[b][0]);
                if best.is_none_or(|(k, _, _)| key.partial_cmp(&k) == Some(std::cmp::Ordering::Less)) {
                    best = Some((key, a, b));
                }
            }
        }
        let ((cost, _, _), a, b) = best.unwrap();
        let (mut x, mut y) = (clusters[a].clone(), clusters[b].clone());
        if y < x {
            std::mem::swap(&mut x, &mut y);
        }
        let mut joined = x.clone();
        joined.extend_from_slice(&y);
        joined.sort_unstable();
        clusters.remove(b);
        clusters[a] = joined;
        // keep clusters ordered by smallest member
        clusters.sort_by_key(|m| m[0]);
        out.push((x, y, cost));
    }
    out
}

/// Compares a dendrogram against the reference merges; returns a description
/// of the first difference.
pub fn compare_with_naive(points: &RealMatrix, tol: f64) -> Result<(), String> {
    let fast = typeprint::cluster::agglomerate(points).map_err(|e| e.to_string())?;
    let sets = fast.merge_sets();
    let naive = naive_ward(points);
    if sets.len() != naive.len() {
        return Err(format!("{} merges vs {}", sets.len(), naive.len()));
    }
    for (step, ((a, b), (na, nb, cost))) in sets.iter().zip(&naive).enumerate() {
        if a != na || b != nb {
            return Err(format!("step {step}: {a:?}+{b:?} vs {na:?}+{nb:?}"));
        }
        let c = fast.merges[step].cost;
        if (c - cost).abs() > tol {
            return Err(format!("step {step}: cost {c} vs {cost}"));
        }
    }
    Ok(())
}

/// Continuous random point cloud, `n` rows by `d` columns.
pub fn random_points(seed: u64, n: usize, d: usize) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..n * d).map(|_| rng.random_range(-5.0..5.0)).collect();
    RealMatrix::new(n, d, data).unwrap()
}

/// Instance `i` of the oracle panel: size and dimension vary with the seed.
pub fn oracle_instance(i: u64) -> RealMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i);
    let n = rng.random_range(2..=64);
    let d = rng.random_range(1..=7);
    random_points(rng.random(), n, d)
}

/// Exact permutation p-values for Kruskal-Wallis and Dunn on the ranks
/// `1..=N` split into consecutive groups of the given sizes. Returns
/// `(kw_exact, kw_asymptotic, [(pair, exact, asymptotic)])`.
/// `((i, j), exact p, asymptotic p)` for one Dunn pair.
pub type PairPValues = ((usize, usize), f64, f64);

pub fn permutation_pvalues(sizes: &[usize]) -> (f64, f64, Vec<PairPValues>) {
    let mut labels = Vec::new();
    for (g, &s) in sizes.iter().enumerate() {
        labels.extend(std::iter::repeat_n(g, s));
    }
    let samples_of = |lab: &[usize]| {
        let mut s = vec![Vec::new(); sizes.len()];
        for (v, &g) in lab.iter().enumerate() {
            s[g].push((v + 1) as f64);
        }
        s
    };
    let obs = samples_of(&labels);
    let kw_obs = typeprint::baseline::kruskal_wallis(&obs).unwrap();
    let dunn_obs = typeprint::baseline::dunn_posthoc(&obs).unwrap();
    let mut kw_count = 0usize;
    let mut dunn_count = vec![0usize; dunn_obs.pairs.len()];
    let mut total = 0usize;
    // every distinct labelling is a multiset permutation of `labels`
    let mut perm = labels.clone();
    loop {
        let s = samples_of(&perm);
        let kw = typeprint::baseline::kruskal_wallis(&s).unwrap();
        if kw.h >= kw_obs.h - 1e-9 {
            kw_count += 1;
        }
        let dunn = typeprint::baseline::dunn_posthoc(&s).unwrap();
        for (c, (p, q)) in dunn_count.iter_mut().zip(dunn.pairs.iter().zip(&dunn_obs.pairs)) {
            if p.z.abs() >= q.z.abs() - 1e-9 {
                *c += 1;
            }
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let dunn = dunn_obs
        .pairs
        .iter()
        .zip(&dunn_count)
        .map(|(p, &c)| ((p.i, p.j), c as f64 / total as f64, p.p))
        .collect();
    (kw_count as f64 / total as f64, kw_obs.p, dunn)
}

/// Lexicographic next permutation; starts from the sorted arrangement.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Partitions of `n` into at least two positive parts, largest first.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for p in (1..=max.min(left)).rev() {
            cur.push(p);
            rec(left - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}
