//! Stepwise merge trees.
//!
//! Leaves are numbered `0..n`, the cluster created by merge `i` gets id
//! `n + i`. Heights are the raw Ward merge costs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub cost: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_leaves: usize,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn len(&self) -> usize {
        self.merges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merges.is_empty()
    }

    pub fn node_size(&self, id: usize) -> usize {
        if id < self.n_leaves {
            1
        } else {
            self.merges[id - self.n_leaves].size
        }
    }

    pub fn node_height(&self, id: usize) -> f64 {
        if id < self.n_leaves {
            0.0
        } else {
            self.merges[id - self.n_leaves].cost
        }
    }

    /// Verifies the structural invariants: `n - 1` merges, each node used at
    /// most once as a child, children created before parents, sizes add up and
    /// costs never decrease.
    pub fn check(&self) -> Result<()> {
        let n = self.n_leaves;
        if n == 0 || self.merges.len() != n - 1 {
            return Err(Error::InvalidArgument(format!(
                "{} merges for {} leaves",
                self.merges.len(),
                n
            )));
        }
        let mut used = vec![false; 2 * n - 1];
        let mut prev = 0.0f64;
        for (i, m) in self.merges.iter().enumerate() {
            let id = n + i;
            for c in [m.left, m.right] {
                if c >= id || used[c] {
                    return Err(Error::InvalidArgument(format!("merge {i}: bad child {c}")));
                }
                used[c] = true;
            }
            if m.size != self.node_size(m.left) + self.node_size(m.right) {
                return Err(Error::InvalidArgument(format!("merge {i}: size mismatch")));
            }
            if m.cost.is_nan() || m.cost < 0.0 || m.cost < prev {
                return Err(Error::InvalidArgument(format!("merge {i}: cost {} after {prev}", m.cost)));
            }
            prev = m.cost;
        }
        Ok(())
    }

    /// Leaf ids in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<usize> {
        let n = self.n_leaves;
        if self.merges.is_empty() {
            return (0..n).collect();
        }
        let mut out = Vec::with_capacity(n);
        let mut stack = vec![n + self.merges.len() - 1];
        while let Some(id) = stack.pop() {
            if id < n {
                out.push(id);
            } else {
                let m = &self.merges[id - n];
                stack.push(m.right);
                stack.push(m.left);
            }
        }
        out
    }

    /// Merge order expressed as leaf sets, independent of node numbering.
    pub fn merge_sets(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.n_leaves;
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut out = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let mut a = members[m.left].clone();
            let mut b = members[m.right].clone();
            a.sort_unstable();
            b.sort_unstable();
            if b < a {
                std::mem::swap(&mut a, &mut b);
            }
            let mut joined = a.clone();
            joined.extend_from_slice(&b);
            members.push(joined);
            out.push((a, b));
        }
        out
    }

    /// Single-line Newick string. Branch length = parent height minus child
    /// height, with leaves at height 0.
    pub fn to_newick(&self, leaf_names: &[String]) -> Result<String> {
        let n = self.n_leaves;
        if leaf_names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: leaf_names.len(),
            });
        }
        if n == 1 {
            return Ok(format!("{};", escape_newick(&leaf_names[0])));
        }
        let mut text: Vec<Option<String>> = leaf_names.iter().map(|s| Some(escape_newick(s))).collect();
        for (i, m) in self.merges.iter().enumerate() {
            let h = m.cost;
            let l = text[m.left].take().unwrap_or_default();
            let r = text[m.right].take().unwrap_or_default();
            let bl = h - self.node_height(m.left);
            let br = h - self.node_height(m.right);
            text.push(Some(format!("({l}:{},{r}:{})", fmt_len(bl), fmt_len(br))));
            debug_assert_eq!(text.len(), n + i + 1);
        }
        Ok(format!("{};", text.pop().flatten().unwrap_or_default()))
    }
}

fn fmt_len(x: f64) -> String {
    crate::report::format_float(x.max(0.0))
}

fn escape_newick(name: &str) -> String {
    if name.chars().any(|c| "()[]':;, \t\n".contains(c)) {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_owned()
    }
}
