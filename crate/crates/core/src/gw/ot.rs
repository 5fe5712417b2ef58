//! Exact linear optimal transport by the transportation simplex method.
//!
//! The basis is a spanning tree of the bipartite supply/demand graph with
//! `m + n − 1` cells (degenerate cells carry zero flow). Each pivot prices all
//! nonbasic cells against the tree potentials, brings in the most negative
//! reduced cost, and pushes flow around the unique cycle it closes. After a
//! run of degenerate pivots the entering and leaving rules fall back to
//! Bland's smallest-index rule, which cannot cycle.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Real;
use crate::transport::TransportPlan;

/// Largest side handled by the exact solver.
pub const EXACT_OT_SIZE_LIMIT: usize = 512;

/// Optimal plan of `min ⟨C, T⟩` over couplings of `source` and `target`.
pub fn solve_inner_ot<T: Real>(cost: &Mat<T>, source: &[T], target: &[T]) -> Result<TransportPlan<T>> {
    let (m, n) = (cost.rows(), cost.cols());
    if source.len() != m {
        return Err(Error::DimensionMismatch {
            what: "cost rows vs. source marginal",
            expected: m,
            found: source.len(),
        });
    }
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            what: "cost columns vs. target marginal",
            expected: n,
            found: target.len(),
        });
    }
    let size = m.max(n);
    if size > EXACT_OT_SIZE_LIMIT {
        return Err(Error::SizeLimit {
            size,
            limit: EXACT_OT_SIZE_LIMIT,
        });
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidConfig("empty marginal".into()));
    }
    if let Some(index) = source.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::DegenerateMarginal { side: "source", index });
    }
    if let Some(index) = target.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::DegenerateMarginal { side: "target", index });
    }
    if cost.as_slice().iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidConfig("cost matrix has non-finite entries".into()));
    }
    let total_a: T = source.iter().copied().sum();
    let total_b: T = target.iter().copied().sum();
    let imbalance = (total_a - total_b).abs();
    if imbalance > T::tol(1e-8) {
        return Err(Error::InfeasiblePlan {
            residual: imbalance.as_f64(),
        });
    }

    let mut tree = SpanningTree::northwest_corner(source, target);
    tree.optimize(cost)?;
    Ok(TransportPlan::from_matrix_unchecked(tree.to_plan(m, n)))
}

/// Objective `⟨C, T⟩`.
pub fn transport_cost<T: Real>(cost: &Mat<T>, plan: &TransportPlan<T>) -> T {
    cost.dot(plan.matrix())
}

struct SpanningTree<T> {
    m: usize,
    n: usize,
    /// Basic cells `(row, col)`.
    cells: Vec<(usize, usize)>,
    flow: Vec<T>,
    /// For each tree node (rows `0..m`, then columns `m..m+n`) the incident cell ids.
    incident: Vec<Vec<usize>>,
    is_basic: Vec<bool>,
}

impl<T: Real> SpanningTree<T> {
    fn northwest_corner(a: &[T], b: &[T]) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let mut tree = Self {
            m,
            n,
            cells: Vec::with_capacity(m + n - 1),
            flow: Vec::with_capacity(m + n - 1),
            incident: vec![Vec::new(); m + n],
            is_basic: vec![false; m * n],
        };
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(T::zero());
            let row_exhausted = ra[i] < rb[j];
            ra[i] -= x;
            rb[j] -= x;
            tree.push(i, j, x);
            if i == m - 1 && j == n - 1 {
                break;
            }
            if i == m - 1 {
                j += 1;
            } else if j == n - 1 || row_exhausted {
                i += 1;
            } else {
                j += 1;
            }
        }
        debug_assert_eq!(tree.cells.len(), m + n - 1);
        tree
    }

    fn push(&mut self, i: usize, j: usize, x: T) {
        let id = self.cells.len();
        self.cells.push((i, j));
        self.flow.push(x);
        self.incident[i].push(id);
        self.incident[self.m + j].push(id);
        self.is_basic[i * self.n + j] = true;
    }

    fn replace(&mut self, id: usize, i: usize, j: usize, x: T) {
        let (oi, oj) = self.cells[id];
        self.is_basic[oi * self.n + oj] = false;
        self.incident[oi].retain(|&c| c != id);
        let col_node = self.m + oj;
        self.incident[col_node].retain(|&c| c != id);
        self.cells[id] = (i, j);
        self.flow[id] = x;
        self.incident[i].push(id);
        self.incident[self.m + j].push(id);
        self.is_basic[i * self.n + j] = true;
    }

    fn other_end(&self, node: usize, cell: usize) -> usize {
        let (i, j) = self.cells[cell];
        if node == i {
            self.m + j
        } else {
            i
        }
    }

    /// Dual potentials with `u₀ = 0` and `u_i + v_j = c_ij` on basic cells.
    fn potentials(&self, cost: &Mat<T>, u: &mut [T], v: &mut [T], stack: &mut Vec<usize>, seen: &mut [bool]) {
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        u[0] = T::zero();
        seen[0] = true;
        stack.push(0);
        while let Some(node) = stack.pop() {
            for &cell in &self.incident[node] {
                let next = self.other_end(node, cell);
                if seen[next] {
                    continue;
                }
                seen[next] = true;
                let (i, j) = self.cells[cell];
                if next >= self.m {
                    v[j] = cost[(i, j)] - u[i];
                } else {
                    u[i] = cost[(i, j)] - v[j];
                }
                stack.push(next);
            }
        }
    }

    /// Cells on the tree path from row `i` to column `j`, ordered from `i`.
    fn path(&self, i: usize, j: usize, parent: &mut [Option<(usize, usize)>], queue: &mut Vec<usize>) -> Vec<usize> {
        parent.iter_mut().for_each(|p| *p = None);
        let target = self.m + j;
        queue.clear();
        queue.push(i);
        parent[i] = Some((usize::MAX, usize::MAX));
        let mut head = 0;
        while head < queue.len() {
            let node = queue[head];
            head += 1;
            if node == target {
                break;
            }
            for &cell in &self.incident[node] {
                let next = self.other_end(node, cell);
                if parent[next].is_none() {
                    parent[next] = Some((node, cell));
                    queue.push(next);
                }
            }
        }
        let mut cells = Vec::new();
        let mut node = target;
        while node != i {
            let (prev, cell) = parent[node].expect("spanning tree connects every node");
            cells.push(cell);
            node = prev;
        }
        cells.reverse();
        cells
    }

    fn optimize(&mut self, cost: &Mat<T>) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let scale = cost.max_abs().max(T::one());
        let eps = T::tol(1e-13) * scale;
        let flow_eps = T::epsilon() * T::lit(16.0);
        let mut u = vec![T::zero(); m];
        let mut v = vec![T::zero(); n];
        let mut stack = Vec::with_capacity(m + n);
        let mut seen = vec![false; m + n];
        let mut parent = vec![None; m + n];
        let mut queue = Vec::with_capacity(m + n);

        let max_pivots = 50 * (m + n) * (m + n) + 1000;
        let bland_after = 2 * (m + n) + 20;
        let mut degenerate_run = 0usize;

        for _ in 0..max_pivots {
            self.potentials(cost, &mut u, &mut v, &mut stack, &mut seen);
            let bland = degenerate_run > bland_after;

            let mut entering: Option<(usize, usize)> = None;
            let mut best = -eps;
            'scan: for i in 0..m {
                for j in 0..n {
                    if self.is_basic[i * n + j] {
                        continue;
                    }
                    let r = cost[(i, j)] - u[i] - v[j];
                    if r < best {
                        entering = Some((i, j));
                        if bland {
                            break 'scan;
                        }
                        best = r;
                    }
                }
            }
            let Some((ei, ej)) = entering else {
                return Ok(());
            };

            // Path cells alternate −, +, −, … starting next to the entering row.
            let path = self.path(ei, ej, &mut parent, &mut queue);
            let mut theta = T::infinity();
            let mut leaving = usize::MAX;
            for (k, &cell) in path.iter().enumerate() {
                if k % 2 != 0 {
                    continue;
                }
                let f = self.flow[cell].max(T::zero());
                let better = f < theta
                    || (f == theta && bland && leaving != usize::MAX && self.cells[cell] < self.cells[leaving]);
                if better {
                    theta = f;
                    leaving = cell;
                }
            }
            for (k, &cell) in path.iter().enumerate() {
                if cell == leaving {
                    continue;
                }
                if k % 2 == 0 {
                    self.flow[cell] = (self.flow[cell] - theta).max(T::zero());
                } else {
                    self.flow[cell] += theta;
                }
            }
            self.replace(leaving, ei, ej, theta);
            if theta <= flow_eps {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
        }
        log::warn!("transportation simplex hit its pivot cap ({max_pivots})");
        Err(Error::NoConvergence { max_iter: max_pivots })
    }

    fn to_plan(&self, m: usize, n: usize) -> Mat<T> {
        let mut plan = Mat::zeros(m, n);
        for (&(i, j), &x) in self.cells.iter().zip(&self.flow) {
            plan[(i, j)] = x.max(T::zero());
        }
        plan
    }
}
