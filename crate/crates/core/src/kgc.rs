//! Kernel graph coarsening: weighted kernel K-means on the similarity matrix.
//!
//! With `φ_i` the feature of node `i` in the kernel space of `S` and
//! `μ_k` the mass-weighted mean of cluster `k`, the clustering objective
//! `Σ_k Σ_{i∈P_k} m_i ‖φ_i − μ_k‖²` equals `Tr(U) − Tr(C_w U C_wᵀ)`.
//! Distances only need kernel entries:
//!
//! ```text
//! ‖φ_i − μ_j‖² = S_ii − 2 Σ_{k∈P_j} m_k S_ki / c_j + Σ_{k,l∈P_j} m_k m_l S_kl / c_j²
//! ```

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coarsening::{build_operators, Partition};
use crate::error::{Error, Result};
use crate::network::{check_psd, MeasureNetwork};
use crate::scalar::Real;
use crate::spectral::PSD_CLAMP_REL_TOL;

/// Nodes per rayon task when scoring; small problems stay sequential.
const PAR_MIN_NODES: usize = 256;

/// How the first partition of a run is chosen.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KgcInit {
    /// Kernel K-means++ seeding.
    PlusPlus(u64),
    FromPartition(Partition),
    /// Uniform random labels with every cluster nonempty.
    Random(u64),
}

impl KgcInit {
    pub fn seed(&self) -> Option<u64> {
        match self {
            KgcInit::PlusPlus(s) | KgcInit::Random(s) => Some(*s),
            KgcInit::FromPartition(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KgcConfig {
    pub n_clusters: usize,
    /// Upper bound `T` on reassignment passes.
    pub max_iter: usize,
    pub init: KgcInit,
    /// Optional early stop on relative objective decrease; `0` disables it.
    pub objective_tol: f64,
}

impl KgcConfig {
    pub fn new(n_clusters: usize, init: KgcInit) -> Self {
        Self {
            n_clusters,
            max_iter: 100,
            init,
            objective_tol: 0.0,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self, n_nodes: usize) -> Result<()> {
        if self.n_clusters == 0 || self.n_clusters > n_nodes {
            return Err(Error::InvalidConfig(format!(
                "n_clusters = {} must lie in [1, {n_nodes}]",
                self.n_clusters
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.objective_tol >= 0.0) {
            return Err(Error::InvalidConfig("objective_tol must be nonnegative".into()));
        }
        if let KgcInit::FromPartition(p) = &self.init {
            if p.n_nodes() != n_nodes {
                return Err(Error::DimensionMismatch {
                    what: "initial partition",
                    expected: n_nodes,
                    found: p.n_nodes(),
                });
            }
            if p.n_clusters() != self.n_clusters {
                return Err(Error::DimensionMismatch {
                    what: "initial partition clusters",
                    expected: self.n_clusters,
                    found: p.n_clusters(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct KgcResult<T: Real = f64> {
    pub partition: Partition,
    /// Objective of the initial partition, then one entry per accepted pass.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    /// A pass left every label unchanged.
    pub converged: bool,
    pub seed: Option<u64>,
    pub config: KgcConfig,
}

impl<T: Real> KgcResult<T> {
    pub fn objective(&self) -> T {
        *self.objective_trace.last().expect("trace holds the initial value")
    }

    pub fn initial_objective(&self) -> T {
        self.objective_trace[0]
    }
}

/// Per-cluster sums needed by the kernel distance.
struct ClusterStats<T> {
    /// `c_j`.
    mass: Vec<T>,
    /// `g_ij = Σ_{k∈P_j} m_k S_ik`, row-major `N × n`.
    pull: Vec<T>,
    /// `Σ_{k,l∈P_j} m_k m_l S_kl / c_j²`.
    spread: Vec<T>,
}

impl<T: Real> ClusterStats<T> {
    fn new(net: &MeasureNetwork<T>, assign: &[usize], n: usize) -> Result<Self> {
        let s = net.similarity();
        let m = net.masses();
        let big_n = net.size();
        let mut mass = vec![T::zero(); n];
        for (i, &k) in assign.iter().enumerate() {
            mass[k] += m[i];
        }
        if let Some(cluster) = mass.iter().position(|&c| !(c > T::zero())) {
            return Err(Error::EmptyCluster { cluster });
        }
        let mut pull = vec![T::zero(); big_n * n];
        let fill = |(i, row): (usize, &mut [T])| {
            let srow = s.row(i);
            for (k, &a) in assign.iter().enumerate() {
                row[a] += m[k] * srow[k];
            }
        };
        if big_n >= PAR_MIN_NODES {
            pull.par_chunks_mut(n).enumerate().for_each(fill);
        } else {
            pull.chunks_mut(n).enumerate().for_each(fill);
        }
        let mut spread = vec![T::zero(); n];
        for (k, &a) in assign.iter().enumerate() {
            spread[a] += m[k] * pull[k * n + a];
        }
        for (q, &c) in spread.iter_mut().zip(&mass) {
            *q /= c * c;
        }
        Ok(Self { mass, pull, spread })
    }

    fn n(&self) -> usize {
        self.mass.len()
    }

    fn dist2(&self, s_ii: T, i: usize, j: usize) -> T {
        let two = T::lit(2.0);
        (s_ii - two * self.pull[i * self.n() + j] / self.mass[j] + self.spread[j]).max(T::zero())
    }

    fn objective(&self, net: &MeasureNetwork<T>, assign: &[usize]) -> T {
        let s = net.similarity();
        assign
            .iter()
            .enumerate()
            .map(|(i, &a)| net.masses()[i] * self.dist2(s[(i, i)], i, a))
            .sum()
    }
}

fn ensure_psd<T: Real>(net: &MeasureNetwork<T>) -> Result<()> {
    if net.psd_checked() {
        return Ok(());
    }
    let vals = check_psd(net.similarity(), PSD_CLAMP_REL_TOL)?;
    if let Some(&min) = vals.last() {
        if min < T::zero() {
            log::warn!(
                "similarity has a slightly negative eigenvalue {}; kernel distances are clamped at 0",
                min.as_f64()
            );
        }
    }
    Ok(())
}

/// Squared kernel distance from node `i` to the mean of cluster `j`.
pub fn point_cluster_dist2<T: Real>(net: &MeasureNetwork<T>, partition: &Partition, i: usize, j: usize) -> Result<T> {
    check_partition(net, partition)?;
    if i >= net.size() {
        return Err(Error::InvalidConfig(format!("node {i} out of range")));
    }
    if j >= partition.n_clusters() {
        return Err(Error::EmptyCluster { cluster: j });
    }
    let s = net.similarity();
    let m = net.masses();
    let members: Vec<usize> = (0..net.size()).filter(|&k| partition.cluster_of(k) == j).collect();
    let c: T = members.iter().map(|&k| m[k]).sum();
    let cross: T = members.iter().map(|&k| m[k] * s[(k, i)]).sum();
    let mut third = T::zero();
    for &k in &members {
        for &l in &members {
            third += m[k] * m[l] * s[(k, l)];
        }
    }
    Ok((s[(i, i)] - T::lit(2.0) * cross / c + third / (c * c)).max(T::zero()))
}

fn check_partition<T: Real>(net: &MeasureNetwork<T>, partition: &Partition) -> Result<()> {
    if partition.n_nodes() != net.size() {
        return Err(Error::DimensionMismatch {
            what: "partition vs. network size",
            expected: net.size(),
            found: partition.n_nodes(),
        });
    }
    Ok(())
}

/// `Σ_i m_i ‖φ_i − μ_{a(i)}‖²`.
pub fn objective<T: Real>(net: &MeasureNetwork<T>, partition: &Partition) -> Result<T> {
    check_partition(net, partition)?;
    let stats = ClusterStats::new(net, partition.assign(), partition.n_clusters())?;
    Ok(stats.objective(net, partition.assign()))
}

/// `Tr(U) − Tr(C_w U C_wᵀ)`, the trace form of [`objective`].
pub fn objective_trace_form<T: Real>(net: &MeasureNetwork<T>, partition: &Partition) -> Result<T> {
    check_partition(net, partition)?;
    let ops = build_operators(partition, net.masses())?;
    let u = net.weighted_similarity();
    Ok(u.trace() - u.congruence(ops.projection()).trace())
}

/// Batch kernel K-means: every node is scored against the clusters of the
/// previous pass, then all clusters are rebuilt at once.
pub fn run_kgc<T: Real>(net: &MeasureNetwork<T>, cfg: &KgcConfig) -> Result<KgcResult<T>> {
    cfg.validate(net.size())?;
    ensure_psd(net)?;
    let n = cfg.n_clusters;
    let initial = match &cfg.init {
        KgcInit::PlusPlus(seed) => plusplus_unchecked(net, n, *seed),
        KgcInit::Random(seed) => random_partition(net.size(), n, *seed)?,
        KgcInit::FromPartition(p) => p.clone(),
    };
    let s = net.similarity();
    let mut assign = initial.assign().to_vec();
    let mut stats = ClusterStats::new(net, &assign, n)?;
    let mut trace = vec![stats.objective(net, &assign)];
    let mut iterations = 0;
    let mut converged = false;
    let tol = T::lit(cfg.objective_tol);

    while iterations < cfg.max_iter {
        iterations += 1;
        let best = |i: usize| -> (usize, T) {
            let s_ii = s[(i, i)];
            let mut arg = 0;
            let mut val = stats.dist2(s_ii, i, 0);
            for j in 1..n {
                let d = stats.dist2(s_ii, i, j);
                if d < val {
                    arg = j;
                    val = d;
                }
            }
            (arg, val)
        };
        let scored: Vec<(usize, T)> = if net.size() >= PAR_MIN_NODES {
            (0..net.size()).into_par_iter().map(best).collect()
        } else {
            (0..net.size()).map(best).collect()
        };
        let mut next: Vec<usize> = scored.iter().map(|&(a, _)| a).collect();
        repair_empty(&mut next, &scored, n);
        if next == assign {
            converged = true;
            break;
        }
        assign = next;
        stats = ClusterStats::new(net, &assign, n)?;
        let value = stats.objective(net, &assign);
        let previous = *trace.last().expect("nonempty trace");
        trace.push(value);
        if tol > T::zero() && previous - value <= tol * previous.abs() {
            break;
        }
    }
    Ok(KgcResult {
        partition: Partition::new(assign, n)?,
        objective_trace: trace,
        iterations,
        converged,
        seed: cfg.init.seed(),
        config: cfg.clone(),
    })
}

/// Fills every empty cluster with the node farthest from its own new center,
/// drawn from clusters that keep at least one other member.
fn repair_empty<T: Real>(assign: &mut [usize], scored: &[(usize, T)], n: usize) {
    let mut sizes = vec![0usize; n];
    for &a in assign.iter() {
        sizes[a] += 1;
    }
    let mut moved = vec![false; assign.len()];
    for empty in 0..n {
        if sizes[empty] > 0 {
            continue;
        }
        let donor = (0..assign.len())
            .filter(|&i| !moved[i] && sizes[assign[i]] >= 2)
            .fold(None::<usize>, |acc, i| match acc {
                Some(b) if scored[b].1 >= scored[i].1 => Some(b),
                _ => Some(i),
            });
        let Some(i) = donor else {
            // Unreachable while n ≤ N: some cluster then holds two nodes.
            continue;
        };
        log::debug!("cluster {empty} emptied; moving node {i} into it");
        sizes[assign[i]] -= 1;
        assign[i] = empty;
        sizes[empty] = 1;
        moved[i] = true;
    }
}

fn random_partition(n_nodes: usize, n: usize, seed: u64) -> Result<Partition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(&mut rng);
    let mut assign = vec![0; n_nodes];
    for (rank, &i) in order.iter().enumerate() {
        assign[i] = if rank < n { rank } else { rng.gen_range(0..n) };
    }
    Partition::new(assign, n)
}

/// Kernel K-means++ seeding followed by nearest-seed assignment.
///
/// The first seed is drawn with probability `m_i`; each further seed with
/// probability proportional to `m_i D(i)²`, where `D(i)` is the kernel
/// distance to the closest seed so far.
pub fn init_plusplus<T: Real>(net: &MeasureNetwork<T>, n: usize, seed: u64) -> Result<Partition> {
    if n == 0 || n > net.size() {
        return Err(Error::InvalidConfig(format!(
            "n_clusters = {n} must lie in [1, {}]",
            net.size()
        )));
    }
    Ok(plusplus_unchecked(net, n, seed))
}

fn plusplus_unchecked<T: Real>(net: &MeasureNetwork<T>, n: usize, seed: u64) -> Partition {
    let s = net.similarity();
    let m = net.masses();
    let big_n = net.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel_d2 = |i: usize, j: usize| (s[(i, i)] - T::lit(2.0) * s[(i, j)] + s[(j, j)]).max(T::zero());

    let mut chosen = vec![false; big_n];
    let mut seeds = Vec::with_capacity(n);
    let mut nearest = vec![T::infinity(); big_n];
    let mut owner = vec![0usize; big_n];
    while seeds.len() < n {
        let weights: Vec<f64> = (0..big_n)
            .map(|i| {
                if chosen[i] {
                    0.0
                } else if seeds.is_empty() {
                    m[i].as_f64()
                } else {
                    (m[i] * nearest[i]).as_f64()
                }
            })
            .collect();
        let pick = sample(&weights, &mut rng).unwrap_or_else(|| {
            let fallback: Vec<f64> = (0..big_n).map(|i| if chosen[i] { 0.0 } else { m[i].as_f64() }).collect();
            sample(&fallback, &mut rng).expect("an unchosen node remains")
        });
        let id = seeds.len();
        chosen[pick] = true;
        seeds.push(pick);
        for i in 0..big_n {
            let d = kernel_d2(i, pick);
            if d < nearest[i] {
                nearest[i] = d;
                owner[i] = id;
            }
        }
    }
    for (id, &p) in seeds.iter().enumerate() {
        owner[p] = id;
    }
    Partition::new(owner, n).expect("every seed owns itself")
}

fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return None;
    }
    let mut target = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = Some(i);
        if target < w {
            return Some(i);
        }
        target -= w;
    }
    last
}

/// Runs KGC starting from another method's partition.
pub fn refine<T: Real>(net: &MeasureNetwork<T>, initial: &Partition, cfg: &KgcConfig) -> Result<KgcResult<T>> {
    let cfg = KgcConfig {
        n_clusters: initial.n_clusters(),
        init: KgcInit::FromPartition(initial.clone()),
        ..cfg.clone()
    };
    run_kgc(net, &cfg)
}
