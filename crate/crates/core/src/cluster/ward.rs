use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::data::RealMatrix;
use crate::dendrogram::{Dendrogram, Merge};
use crate::error::{Error, Result};

/// Increase in total within-cluster sum of squares caused by merging two
/// clusters: `|A||B| / (|A| + |B|) * ||c_A - c_B||^2`.
pub fn ward_delta(size_a: usize, centroid_a: &[f64], size_b: usize, centroid_b: &[f64]) -> Result<f64> {
    if centroid_a.len() != centroid_b.len() {
        return Err(Error::DimensionMismatch {
            expected: centroid_a.len(),
            actual: centroid_b.len(),
        });
    }
    if size_a == 0 || size_b == 0 {
        return Err(Error::InvalidArgument("cluster sizes must be positive".into()));
    }
    Ok(delta(size_a as f64, centroid_a, size_b as f64, centroid_b))
}

#[inline]
fn delta(na: f64, a: &[f64], nb: f64, b: &[f64]) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    na * nb / (na + nb) * sq
}

/// A merge as found by the chain, addressed by cluster slot. A cluster lives
/// in the slot of its smallest member row, so slots double as tie-break keys.
#[derive(Debug, Clone, Copy)]
struct SlotMerge {
    a: usize,
    b: usize,
    cost: f64,
    deps: [Option<usize>; 2],
}

struct Clusters {
    d: usize,
    centroid: Vec<f64>,
    size: Vec<f64>,
    active: Vec<usize>,
    position: Vec<usize>,
}

impl Clusters {
    fn new(points: &RealMatrix) -> Self {
        let n = points.n_rows();
        Clusters {
            d: points.n_cols(),
            centroid: points.as_slice().to_vec(),
            size: vec![1.0; n],
            active: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    #[inline]
    fn c(&self, i: usize) -> &[f64] {
        &self.centroid[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    fn delta(&self, i: usize, j: usize) -> f64 {
        delta(self.size[i], self.c(i), self.size[j], self.c(j))
    }

    /// Nearest active cluster to `a` by `(delta, slot)`, preferring `prev`
    /// whenever it attains the minimum so the chain terminates.
    fn nearest(&self, a: usize, prev: Option<usize>) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for &j in &self.active {
            if j == a {
                continue;
            }
            let dj = self.delta(a, j);
            if dj < best.1 || (dj == best.1 && j < best.0) {
                best = (j, dj);
            }
        }
        if let Some(p) = prev {
            let dp = self.delta(a, p);
            if dp <= best.1 {
                return (p, dp);
            }
        }
        best
    }

    /// Merges `hi` into `lo` (lo < hi).
    fn merge(&mut self, lo: usize, hi: usize) {
        let (nl, nh) = (self.size[lo], self.size[hi]);
        let total = nl + nh;
        for k in 0..self.d {
            let v = (nl * self.centroid[lo * self.d + k] + nh * self.centroid[hi * self.d + k]) / total;
            self.centroid[lo * self.d + k] = v;
        }
        self.size[lo] = total;
        let pos = self.position[hi];
        self.active.swap_remove(pos);
        if pos < self.active.len() {
            self.position[self.active[pos]] = pos;
        }
    }
}

/// Ward agglomerative clustering by the nearest-neighbour chain.
///
/// Centroids are updated in place and merge costs are computed on demand,
/// so the run takes `O(n^2 d)` time and `O(n)` extra memory. The reciprocal
/// nearest-neighbour merges are then replayed in order of increasing cost
/// (ties by the smallest member rows of the two clusters), which yields the
/// same stepwise dendrogram as the greedy all-pairs procedure.
pub fn agglomerate(points: &RealMatrix) -> Result<Dendrogram> {
    let n = points.n_rows();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 points, got {n}")));
    }
    if points.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("points contain non-finite values".into()));
    }
    let mut cl = Clusters::new(points);
    let mut last_merge: Vec<Option<usize>> = vec![None; n];
    let mut raw: Vec<SlotMerge> = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    while cl.active.len() > 1 {
        if chain.is_empty() {
            chain.push(*cl.active.iter().min().expect("non-empty"));
        }
        let (a, b, cost) = loop {
            let a = *chain.last().expect("non-empty chain");
            let prev = chain.len().checked_sub(2).map(|i| chain[i]);
            let (b, cost) = cl.nearest(a, prev);
            if Some(b) == prev {
                chain.truncate(chain.len() - 2);
                break (a, b, cost);
            }
            chain.push(b);
        };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        raw.push(SlotMerge {
            a: lo,
            b: hi,
            cost,
            deps: [last_merge[lo], last_merge[hi]],
        });
        last_merge[lo] = Some(raw.len() - 1);
        cl.merge(lo, hi);
    }
    Ok(replay(n, &raw))
}

#[derive(PartialEq)]
struct Ready {
    cost: f64,
    a: usize,
    b: usize,
    idx: usize,
}

impl Eq for Ready {}

impl Ord for Ready {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
            .then(self.idx.cmp(&other.idx))
    }
}

impl PartialOrd for Ready {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Topologically sorts the chain merges by `(cost, a, b)` and renumbers
/// them into dendrogram node ids.
fn replay(n: usize, raw: &[SlotMerge]) -> Dendrogram {
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    let mut pending = vec![0u8; raw.len()];
    let mut heap = BinaryHeap::new();
    for (i, m) in raw.iter().enumerate() {
        for d in m.deps.iter().flatten() {
            children[*d].push(i);
            pending[i] += 1;
        }
        if pending[i] == 0 {
            heap.push(Reverse(Ready {
                cost: m.cost,
                a: m.a,
                b: m.b,
                idx: i,
            }));
        }
    }
    let mut node_of_slot: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; 2 * n - 1];
    let mut merges = Vec::with_capacity(raw.len());
    let mut floor = 0.0f64;
    while let Some(Reverse(r)) = heap.pop() {
        let m = &raw[r.idx];
        let (left, right) = (node_of_slot[m.a], node_of_slot[m.b]);
        let id = n + merges.len();
        size[id] = size[left] + size[right];
        // Ward is reducible; this only absorbs last-bit rounding inversions.
        floor = floor.max(m.cost);
        merges.push(Merge {
            left,
            right,
            cost: floor,
            size: size[id],
        });
        node_of_slot[m.a] = id;
        for &c in &children[r.idx] {
            pending[c] -= 1;
            if pending[c] == 0 {
                heap.push(Reverse(Ready {
                    cost: raw[c].cost,
                    a: raw[c].a,
                    b: raw[c].b,
                    idx: c,
                }));
            }
        }
    }
    Dendrogram { n_leaves: n, merges }
}
