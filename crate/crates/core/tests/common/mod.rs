//! Seeded instance generators and independent reference computations.
#![allow(dead_code)]

use gwcoarse::linalg::{sym_eigen, Mat};
use gwcoarse::{to_measure_network, Graph, MassScheme, MeasureNetwork, Partition, SimilarityKind, TransportPlan};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random weighted graph with a spanning path, so no node is isolated.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for w in order.windows(2) {
        edges.push((w[0].min(w[1]), w[0].max(w[1]), rng.gen_range(0.5..2.0)));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, rng.gen_range(0.5..2.0)));
            }
        }
    }
    Graph::new(n, edges, None).expect("valid random graph")
}

/// Random partition of `n_nodes` into exactly `n` nonempty clusters.
pub fn random_partition(rng: &mut ChaCha8Rng, n_nodes: usize, n: usize) -> Partition {
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(rng);
    let mut assign = vec![0; n_nodes];
    for (rank, &i) in order.iter().enumerate() {
        assign[i] = if rank < n { rank } else { rng.gen_range(0..n) };
    }
    Partition::new(assign, n).expect("nonempty clusters")
}

pub fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

pub const KINDS: [SimilarityKind; 4] = [
    SimilarityKind::CombinatorialLaplacian,
    SimilarityKind::NormalizedLaplacian,
    SimilarityKind::SignlessLaplacian,
    SimilarityKind::NormalizedSignlessLaplacian,
];

/// Random graph turned into a PSD network with random or uniform masses.
pub fn random_net(rng: &mut ChaCha8Rng, n: usize) -> (Graph, MeasureNetwork) {
    let g = random_graph(rng, n, 0.3);
    let kind = KINDS[rng.gen_range(0..KINDS.len())];
    let net = if rng.gen_bool(0.5) {
        to_measure_network(&g, kind, MassScheme::Uniform).unwrap()
    } else {
        let m = random_masses(rng, n);
        let g2 = g.clone().with_masses(m).unwrap();
        to_measure_network(&g2, kind, MassScheme::Explicit).unwrap()
    };
    (g, net)
}

pub fn k3() -> Graph {
    Graph::unweighted(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
}

pub fn k3_net() -> MeasureNetwork {
    to_measure_network(&k3(), SimilarityKind::SignlessLaplacian, MassScheme::Uniform).unwrap()
}

/// Random coupling of `a` and `b`: a product plan perturbed along random
/// zero-marginal directions while staying nonnegative.
pub fn random_plan(rng: &mut ChaCha8Rng, a: &[f64], b: &[f64]) -> TransportPlan {
    let (m, n) = (a.len(), b.len());
    let mut t = Mat::from_fn(m, n, |i, j| a[i] * b[j]);
    for _ in 0..(4 * m * n) {
        let (i1, i2) = (rng.gen_range(0..m), rng.gen_range(0..m));
        let (j1, j2) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i1 == i2 || j1 == j2 {
            continue;
        }
        let room = t[(i1, j2)].min(t[(i2, j1)]);
        let eps = rng.gen::<f64>() * room;
        t[(i1, j1)] += eps;
        t[(i2, j2)] += eps;
        t[(i1, j2)] -= eps;
        t[(i2, j1)] -= eps;
    }
    TransportPlan::new(t, a.to_vec(), b.to_vec()).expect("feasible by construction")
}

/// `Σ_{i,j,k,l} (s¹_ik − s²_jl)² T_ij T_kl` by four nested loops.
pub fn gw_cost_quadruple(s1: &Mat<f64>, s2: &Mat<f64>, t: &Mat<f64>) -> f64 {
    let (m, n) = (t.rows(), t.cols());
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..n {
            if t[(i, j)] == 0.0 {
                continue;
            }
            for k in 0..m {
                for l in 0..n {
                    let d = s1[(i, k)] - s2[(j, l)];
                    acc += d * d * t[(i, j)] * t[(k, l)];
                }
            }
        }
    }
    acc
}

/// Every set partition of `0..n` as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for k in 0..=max + 1 {
            cur.push(k);
            rec(i + 1, n, cur, if k > max { k } else { max }, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return Vec::new();
    }
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out.into_iter()
        .map(|a| {
            let k = a.iter().max().unwrap() + 1;
            Partition::new(a, k).unwrap()
        })
        .collect()
}

/// Explicit kernel features `φ = Λ^{1/2} Qᵀ`: column `i` is node `i`'s feature.
pub fn kernel_features(s: &Mat<f64>) -> Mat<f64> {
    let eig = sym_eigen(s, true).unwrap();
    let q = eig.vectors.unwrap();
    let n = s.rows();
    Mat::from_fn(n, n, |r, i| eig.values[r].max(0.0).sqrt() * q[(i, r)])
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn power_norm(a: &Mat<f64>, iters: usize) -> f64 {
    let at = a.transpose();
    let ata = at.matmul(a);
    let n = ata.rows();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64) * 0.37 % 1.0).collect();
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ata[(i, j)] * v[j]).sum()).collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = norm;
        v = w.into_iter().map(|x| x / norm).collect();
    }
    lambda.sqrt()
}

/// Minimum of `⟨C, T⟩` over all vertices of the transportation polytope,
/// found by trying every support of size `m + n − 1`.
pub fn ot_vertex_oracle(cost: &Mat<f64>, a: &[f64], b: &[f64]) -> f64 {
    let (m, n) = (a.len(), b.len());
    let cells: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let k = m + n - 1;
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if let Some(x) = solve_support(&idx.iter().map(|&c| cells[c]).collect::<Vec<_>>(), a, b) {
            let val: f64 = idx.iter().zip(&x).map(|(&c, &v)| cost[cells[c]] * v).sum();
            best = best.min(val);
        }
        // next combination
        let mut p = k;
        loop {
            if p == 0 {
                return best;
            }
            p -= 1;
            if idx[p] < cells.len() - k + p {
                idx[p] += 1;
                for q in (p + 1)..k {
                    idx[q] = idx[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Unique nonnegative flow on `support` meeting the marginals, if any.
fn solve_support(support: &[(usize, usize)], a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    let k = support.len();
    // Rows: m source constraints + first n−1 target constraints.
    let rows = m + n - 1;
    let mut aug = vec![vec![0.0; k + 1]; rows];
    for (c, &(i, j)) in support.iter().enumerate() {
        aug[i][c] = 1.0;
        if j < n - 1 {
            aug[m + j][c] = 1.0;
        }
    }
    for i in 0..m {
        aug[i][k] = a[i];
    }
    for j in 0..n - 1 {
        aug[m + j][k] = b[j];
    }
    for col in 0..k {
        let piv = (col..rows).max_by(|&x, &y| aug[x][col].abs().partial_cmp(&aug[y][col].abs()).unwrap())?;
        if aug[piv][col].abs() < 1e-12 {
            return None;
        }
        aug.swap(col, piv);
        for r in 0..rows {
            if r != col && aug[r][col] != 0.0 {
                let f = aug[r][col] / aug[col][col];
                for c in col..=k {
                    aug[r][c] -= f * aug[col][c];
                }
            }
        }
    }
    let x: Vec<f64> = (0..k).map(|c| aug[c][k] / aug[c][c]).collect();
    if x.iter().any(|&v| v < -1e-12) {
        return None;
    }
    Some(x)
}
