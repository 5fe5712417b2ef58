//! Greedy heavy-edge contraction, a cheap starting partition for refinement.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::coarsening::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy)]
struct Candidate<T> {
    weight: T,
    a: usize,
    b: usize,
}

impl<T: Real> PartialEq for Candidate<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Candidate<T> {}

impl<T: Real> PartialOrd for Candidate<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Candidate<T> {
    /// Heavier first, then the lexicographically smallest endpoint pair.
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .partial_cmp(&other.weight)
            .unwrap_or(Ordering::Equal)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

/// Contracts the heaviest remaining edge between supernodes until `n` remain.
///
/// Parallel edges created by a contraction are summed. A supernode is named
/// by its smallest node. Ties go to the smallest endpoint pair. When no edge
/// is left (disconnected input) the two lightest supernodes are merged
/// instead, by node mass if the graph carries masses and by size otherwise.
pub fn heavy_edge_baseline<T: Real>(g: &Graph<T>, n: usize) -> Result<Partition> {
    let big_n = g.n_nodes();
    if n == 0 || n > big_n {
        return Err(Error::InvalidConfig(format!("target size {n} must lie in [1, {big_n}]")));
    }
    let mut rep: Vec<usize> = (0..big_n).collect();
    let mut active = vec![true; big_n];
    let mut mass: Vec<T> = match g.node_masses() {
        Some(m) => m.to_vec(),
        None => vec![T::one(); big_n],
    };
    let mut adj: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); big_n];
    let mut heap = BinaryHeap::new();
    for &(i, j, w) in g.edges() {
        if w > T::zero() {
            adj[i].insert(j, w);
            adj[j].insert(i, w);
            heap.push(Candidate { weight: w, a: i, b: j });
        }
    }

    let mut remaining = big_n;
    while remaining > n {
        let pair = loop {
            match heap.pop() {
                Some(c) if active[c.a] && active[c.b] && adj[c.a].get(&c.b) == Some(&c.weight) => {
                    break Some((c.a, c.b));
                }
                Some(_) => continue,
                None => break None,
            }
        };
        let (keep, gone) = match pair {
            Some(p) => p,
            None => {
                log::warn!("no edges left to contract; merging the lightest supernodes");
                lightest_pair(&active, &mass)
            }
        };
        // Fold `gone` into `keep`.
        let gone_adj = std::mem::take(&mut adj[gone]);
        adj[keep].remove(&gone);
        for (x, w) in gone_adj {
            if x == keep {
                continue;
            }
            adj[x].remove(&gone);
            let total = *adj[keep].entry(x).and_modify(|v| *v += w).or_insert(w);
            adj[x].insert(keep, total);
            let (a, b) = if keep < x { (keep, x) } else { (x, keep) };
            heap.push(Candidate { weight: total, a, b });
        }
        active[gone] = false;
        mass[keep] = mass[keep] + mass[gone];
        for r in rep.iter_mut() {
            if *r == gone {
                *r = keep;
            }
        }
        remaining -= 1;
    }
    Partition::from_labels(&rep)
}

/// The two active supernodes of least mass; ties by smaller index.
fn lightest_pair<T: Real>(active: &[bool], mass: &[T]) -> (usize, usize) {
    let mut ids: Vec<usize> = (0..active.len()).filter(|&i| active[i]).collect();
    ids.sort_by(|&x, &y| mass[x].partial_cmp(&mass[y]).unwrap_or(Ordering::Equal).then(x.cmp(&y)));
    let (a, b) = (ids[0], ids[1]);
    (a.min(b), a.max(b))
}
