//! Seeded random graph generators for tests and offline experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::{Collection, Label};

/// Erdős–Rényi `G(n, p)` with unit weights.
///
/// Isolated nodes are joined to one uniformly chosen other node so that
/// normalized similarities stay defined.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    check_prob(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    attach_isolated(n, &mut edges, &mut rng);
    Graph::new(n, edges, None)
}

/// Stochastic block model with unit weights; block `b` holds `sizes[b]`
/// consecutive nodes. Isolated nodes are attached as in [`erdos_renyi`].
pub fn stochastic_block(sizes: &[usize], p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    check_prob(p_in)?;
    check_prob(p_out)?;
    let block: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat(b).take(s)).collect();
    let n = block.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let p = if block[i] == block[j] { p_in } else { p_out };
            if rng.gen::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    attach_isolated(n, &mut edges, &mut rng);
    Graph::new(n, edges, None)
}

fn check_prob(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("edge probability {p} outside [0, 1]")))
    }
}

fn attach_isolated(n: usize, edges: &mut Vec<(usize, usize, f64)>, rng: &mut ChaCha8Rng) {
    if n < 2 {
        return;
    }
    let mut degree = vec![0usize; n];
    for &(i, j, _) in edges.iter() {
        degree[i] += 1;
        degree[j] += 1;
    }
    for i in 0..n {
        if degree[i] == 0 {
            let mut j = rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            edges.push((i.min(j), i.max(j), 1.0));
            degree[i] += 1;
            degree[j] += 1;
        }
    }
}

/// Parameters of a mixed ER/SBM collection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub count: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// ER edge probability.
    pub p_er: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            count: 20,
            min_nodes: 10,
            max_nodes: 24,
            p_er: 0.3,
            p_in: 0.6,
            p_out: 0.08,
            seed: 0,
        }
    }
}

/// Alternates ER graphs (label 0) and two- or three-block SBM graphs
/// (label 1). Graph `k` depends only on `seed` and `k`.
pub fn synthetic_collection(spec: &SyntheticSpec) -> Result<Collection> {
    if spec.min_nodes < 2 || spec.min_nodes > spec.max_nodes {
        return Err(Error::InvalidConfig(format!(
            "node range [{}, {}] must satisfy 2 ≤ min ≤ max",
            spec.min_nodes, spec.max_nodes
        )));
    }
    let mut graphs = Vec::with_capacity(spec.count);
    let mut labels = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(k as u64);
        let n = rng.gen_range(spec.min_nodes..=spec.max_nodes);
        let graph_seed = rng.gen::<u64>();
        if k % 2 == 0 {
            graphs.push(erdos_renyi(n, spec.p_er, graph_seed)?);
            labels.push(Label::Int(0));
        } else {
            let blocks = if n >= 9 { rng.gen_range(2..=3) } else { 2 };
            let mut sizes = vec![n / blocks; blocks];
            for s in sizes.iter_mut().take(n % blocks) {
                *s += 1;
            }
            graphs.push(stochastic_block(&sizes, spec.p_in, spec.p_out, graph_seed)?);
            labels.push(Label::Int(1));
        }
    }
    Ok(Collection {
        graphs,
        labels: Some(labels),
    })
}
