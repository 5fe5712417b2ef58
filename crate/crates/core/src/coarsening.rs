//! Partitions, coarsening matrices and the coarsened graph objects they induce.
//!
//! For a partition into `n` clusters of `N` nodes with masses `m`:
//!
//! * accumulation `C_p` is the `n × N` membership matrix,
//! * averaging `C̄_w = diag(c)⁻¹ C_p W`,
//! * projection `C_w = diag(c)^{-1/2} C_p W^{1/2}` (orthonormal rows),
//!
//! where `W = diag(m)` and `c = C_p m` holds the cluster masses.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::Mat;
use crate::network::MeasureNetwork;
use crate::scalar::Real;
use crate::transport::TransportPlan;

/// Assignment of `N` nodes to `n` nonempty clusters with ids `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Partition {
    assign: Vec<usize>,
    n_clusters: usize,
}

impl Partition {
    /// Validates contiguous ids `0..n_clusters` with no empty cluster.
    pub fn new(assign: Vec<usize>, n_clusters: usize) -> Result<Self> {
        if n_clusters == 0 || n_clusters > assign.len() {
            return Err(Error::InvalidConfig(format!(
                "cluster count {n_clusters} must lie in [1, {}]",
                assign.len()
            )));
        }
        let mut seen = vec![false; n_clusters];
        for (node, &k) in assign.iter().enumerate() {
            if k >= n_clusters {
                return Err(Error::InvariantViolation(format!(
                    "node {node} has cluster id {k} outside [0, {n_clusters})"
                )));
            }
            seen[k] = true;
        }
        if let Some(cluster) = seen.iter().position(|&s| !s) {
            return Err(Error::EmptyCluster { cluster });
        }
        Ok(Self { assign, n_clusters })
    }

    /// Re-indexes arbitrary labels to `0..n` in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        let mut map = HashMap::new();
        let assign = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self::new(assign, map.len())
    }

    /// Every node in its own cluster.
    pub fn identity(n_nodes: usize) -> Self {
        Self {
            assign: (0..n_nodes).collect(),
            n_clusters: n_nodes,
        }
    }

    /// All nodes in one cluster.
    pub fn single(n_nodes: usize) -> Self {
        Self {
            assign: vec![0; n_nodes],
            n_clusters: 1,
        }
    }

    #[inline]
    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.assign.len()
    }

    #[inline]
    pub fn n_clusters(&self) -> usize {
        self.n_clusters
    }

    #[inline]
    pub fn cluster_of(&self, node: usize) -> usize {
        self.assign[node]
    }

    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters];
        for (i, &k) in self.assign.iter().enumerate() {
            out[k].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.n_clusters];
        for &k in &self.assign {
            out[k] += 1;
        }
        out
    }

    /// Same grouping up to a relabelling of cluster ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        if self.n_clusters != other.n_clusters || self.assign.len() != other.assign.len() {
            return false;
        }
        let mut map = vec![usize::MAX; self.n_clusters];
        for (&a, &b) in self.assign.iter().zip(&other.assign) {
            if map[a] == usize::MAX {
                map[a] = b;
            } else if map[a] != b {
                return false;
            }
        }
        true
    }

    /// Canonical relabelling by first appearance.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.assign).expect("valid partition stays valid")
    }
}

/// The three coarsening matrices and cluster masses of a partition.
#[derive(Debug, Clone, Serialize)]
pub struct CoarseningOperators<T: Real = f64> {
    partition: Partition,
    masses: Vec<T>,
    cluster_masses: Vec<T>,
    accumulation: Mat<T>,
    averaging: Mat<T>,
    projection: Mat<T>,
}

pub fn build_operators<T: Real>(p: &Partition, masses: &[T]) -> Result<CoarseningOperators<T>> {
    if masses.len() != p.n_nodes() {
        return Err(Error::DimensionMismatch {
            what: "mass vector",
            expected: p.n_nodes(),
            found: masses.len(),
        });
    }
    if let Some(i) = masses.iter().position(|&m| !(m > T::zero())) {
        return Err(Error::InvariantViolation(format!("mass {i} is not positive")));
    }
    let n = p.n_clusters();
    let big_n = p.n_nodes();
    let mut c = vec![T::zero(); n];
    for (i, &k) in p.assign().iter().enumerate() {
        c[k] += masses[i];
    }
    if let Some(cluster) = c.iter().position(|&x| !(x > T::zero())) {
        return Err(Error::EmptyCluster { cluster });
    }
    let mut accumulation = Mat::zeros(n, big_n);
    let mut averaging = Mat::zeros(n, big_n);
    let mut projection = Mat::zeros(n, big_n);
    for (i, &k) in p.assign().iter().enumerate() {
        accumulation[(k, i)] = T::one();
        averaging[(k, i)] = masses[i] / c[k];
        projection[(k, i)] = (masses[i] / c[k]).sqrt();
    }
    Ok(CoarseningOperators {
        partition: p.clone(),
        masses: masses.to_vec(),
        cluster_masses: c,
        accumulation,
        averaging,
        projection,
    })
}

impl<T: Real> CoarseningOperators<T> {
    #[inline]
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Node masses `m` the operators were built from.
    #[inline]
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Cluster masses `c = C_p m`.
    #[inline]
    pub fn cluster_masses(&self) -> &[T] {
        &self.cluster_masses
    }

    /// `C_p`.
    #[inline]
    pub fn accumulation(&self) -> &Mat<T> {
        &self.accumulation
    }

    /// `C̄_w`.
    #[inline]
    pub fn averaging(&self) -> &Mat<T> {
        &self.averaging
    }

    /// `C_w`.
    #[inline]
    pub fn projection(&self) -> &Mat<T> {
        &self.projection
    }

    /// `Π_w = C_wᵀ C_w`.
    pub fn projector(&self) -> Mat<T> {
        self.projection.transpose().matmul(&self.projection)
    }

    pub fn n_nodes(&self) -> usize {
        self.partition.n_nodes()
    }

    pub fn n_clusters(&self) -> usize {
        self.partition.n_clusters()
    }

    fn check_nodes(&self, n: usize) -> Result<()> {
        if n != self.n_nodes() {
            return Err(Error::DimensionMismatch {
                what: "graph size vs. partition",
                expected: self.n_nodes(),
                found: n,
            });
        }
        Ok(())
    }
}

/// `A⁽ᶜ⁾ = C_p A C_pᵀ`; the diagonal carries twice the intra-cluster weight.
pub fn coarsen_adjacency<T: Real>(g: &Graph<T>, ops: &CoarseningOperators<T>) -> Result<Mat<T>> {
    ops.check_nodes(g.n_nodes())?;
    let p = ops.partition();
    let n = p.n_clusters();
    let mut a = Mat::zeros(n, n);
    for &(i, j, w) in g.edges() {
        let (ki, kj) = (p.cluster_of(i), p.cluster_of(j));
        a[(ki, kj)] += w;
        a[(kj, ki)] += w;
    }
    Ok(a)
}

/// Coarsened combinatorial and normalized Laplacians.
#[derive(Debug, Clone, Serialize)]
pub struct CoarsenedLaplacians<T: Real = f64> {
    /// `L⁽ᶜ⁾ = C_p L C_pᵀ = D⁽ᶜ⁾ − A⁽ᶜ⁾`.
    pub combinatorial: Mat<T>,
    /// `(D⁽ᶜ⁾)^{-1/2} L⁽ᶜ⁾ (D⁽ᶜ⁾)^{-1/2}`, the doubly-weighted Laplacian.
    pub normalized: Mat<T>,
    /// `C_w 𝓛 C_wᵀ`; equals `normalized` when the masses are degree-proportional.
    pub normalized_projected: Mat<T>,
}

/// Coarsens `L` and `𝓛`. The operators must be built from degree-proportional masses.
pub fn coarsen_laplacian<T: Real>(
    g: &Graph<T>,
    ops: &CoarseningOperators<T>,
) -> Result<CoarsenedLaplacians<T>> {
    ops.check_nodes(g.n_nodes())?;
    let degree_masses = crate::graph::node_masses(g, crate::graph::MassScheme::DegreeProportional)?;
    let drift = degree_masses
        .iter()
        .zip(ops.masses())
        .fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()));
    if drift > T::tol(1e-12) {
        return Err(Error::InvalidConfig(
            "normalized Laplacian coarsening needs operators built from degree masses".into(),
        ));
    }
    let a_c = coarsen_adjacency(g, ops)?;
    let n = a_c.rows();
    let d_c = a_c.row_sums();
    let combinatorial = Mat::from_fn(n, n, |i, j| if i == j { d_c[i] - a_c[(i, j)] } else { -a_c[(i, j)] });
    let mut inv_sqrt = Vec::with_capacity(n);
    for (node, &d) in d_c.iter().enumerate() {
        if !(d > T::zero()) {
            return Err(Error::ZeroDegreeSupernode { node });
        }
        inv_sqrt.push(T::one() / d.sqrt());
    }
    let normalized = combinatorial.scale_rows_cols(&inv_sqrt, &inv_sqrt);
    let normalized_projected = g.normalized_laplacian()?.congruence(ops.projection());
    Ok(CoarsenedLaplacians {
        combinatorial,
        normalized,
        normalized_projected,
    })
}

/// Entry magnitude used for the coarsened similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    /// `C_p S C_pᵀ`. Wrong scale for GW comparison.
    Accumulation,
    /// `C̄_w S C̄_wᵀ`.
    #[default]
    Averaging,
    /// `C_w S C_wᵀ`.
    Projection,
}

impl Magnitude {
    /// Whether `(S⁽ᶜ⁾, c)` is meant to be compared to `(S, m)` under GW.
    pub fn gw_comparable(self) -> bool {
        !matches!(self, Magnitude::Accumulation)
    }
}

/// Coarsened measure network `(S⁽ᶜ⁾, c)` with `c = C_p m`.
pub fn coarsen_similarity<T: Real>(
    net: &MeasureNetwork<T>,
    ops: &CoarseningOperators<T>,
    magnitude: Magnitude,
) -> Result<MeasureNetwork<T>> {
    ops.check_nodes(net.size())?;
    let s = net.similarity();
    let s_c = match magnitude {
        Magnitude::Accumulation => {
            log::debug!("accumulation magnitude produces a network not comparable under GW");
            s.congruence(ops.accumulation())
        }
        Magnitude::Averaging => s.congruence(ops.averaging()),
        Magnitude::Projection => s.congruence(ops.projection()),
    };
    MeasureNetwork::new(s_c.symmetrized(), ops.cluster_masses().to_vec())
}

/// `T = W C_pᵀ`: each node ships its whole mass to its own cluster.
pub fn membership_transport_plan<T: Real>(ops: &CoarseningOperators<T>) -> TransportPlan<T> {
    let p = ops.partition();
    let mut t = Mat::zeros(p.n_nodes(), p.n_clusters());
    for (i, &k) in p.assign().iter().enumerate() {
        t[(i, k)] = ops.masses()[i];
    }
    TransportPlan::from_matrix_unchecked(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{to_measure_network, MassScheme, SimilarityKind};

    fn k3() -> Graph {
        Graph::unweighted(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn toy_partition() -> Partition {
        Partition::new(vec![0, 1, 1], 2).unwrap()
    }

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn toy_operators() {
        let ops = build_operators(&toy_partition(), &uniform(3)).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(ops.averaging().max_abs_diff(&Mat::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.5, 0.5]])) < 1e-15);
        assert!(ops.projection().max_abs_diff(&Mat::from_rows(&[[1.0, 0.0, 0.0], [0.0, h, h]])) < 1e-15);
        assert!((ops.cluster_masses()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((ops.cluster_masses()[1] - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_and_single_partitions() {
        let m: Vec<f64> = vec![0.1, 0.2, 0.3, 0.4];
        let ops = build_operators(&Partition::identity(4), &m).unwrap();
        let eye = Mat::identity(4);
        assert_eq!(ops.accumulation(), &eye);
        assert!(ops.averaging().max_abs_diff(&eye) < 1e-15);
        assert!(ops.projection().max_abs_diff(&eye) < 1e-15);
        assert_eq!(ops.cluster_masses(), &m[..]);

        let ops = build_operators(&Partition::single(4), &m).unwrap();
        for (i, &mi) in m.iter().enumerate() {
            assert!((ops.projection()[(0, i)] - mi.sqrt()).abs() < 1e-15);
        }
        let cct = ops.projection().matmul(&ops.projection().transpose());
        assert!((cct[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_cluster_is_rejected() {
        assert!(matches!(Partition::new(vec![0, 0, 2], 3), Err(Error::EmptyCluster { cluster: 1 })));
    }

    #[test]
    fn toy_adjacency_and_laplacian() {
        let g = k3();
        let ops = build_operators(&toy_partition(), &uniform(3)).unwrap();
        let a = coarsen_adjacency(&g, &ops).unwrap();
        assert_eq!(a.to_rows(), vec![vec![0.0, 2.0], vec![2.0, 2.0]]);

        let deg = crate::graph::node_masses(&g, MassScheme::DegreeProportional).unwrap();
        let ops = build_operators(&toy_partition(), &deg).unwrap();
        let l = coarsen_laplacian(&g, &ops).unwrap();
        assert_eq!(l.combinatorial.to_rows(), vec![vec![2.0, -2.0], vec![-2.0, 2.0]]);
        assert!(l.normalized.max_abs_diff(&l.normalized_projected) < 1e-12);
    }

    #[test]
    fn whole_graph_cluster_sums_weight() {
        let g: Graph = Graph::new(3, [(0, 1, 1.5), (1, 2, 0.25)], None).unwrap();
        let ops = build_operators(&Partition::single(3), &uniform(3)).unwrap();
        assert_eq!(coarsen_adjacency(&g, &ops).unwrap().to_rows(), vec![vec![3.5]]);
    }

    #[test]
    fn identity_partition_keeps_laplacians() {
        let g: Graph = Graph::new(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 3, 0.5)], None).unwrap();
        let deg = crate::graph::node_masses(&g, MassScheme::DegreeProportional).unwrap();
        let ops = build_operators(&Partition::identity(4), &deg).unwrap();
        let l = coarsen_laplacian(&g, &ops).unwrap();
        assert!(l.combinatorial.max_abs_diff(&g.laplacian()) < 1e-15);
        assert!(l.normalized.max_abs_diff(&g.normalized_laplacian().unwrap()) < 1e-12);
    }

    #[test]
    fn laplacian_coarsening_requires_degree_masses() {
        let ops = build_operators(&toy_partition(), &uniform(3)).unwrap();
        let g: Graph = Graph::new(3, [(0, 1, 1.0), (1, 2, 3.0)], None).unwrap();
        assert!(coarsen_laplacian(&g, &ops).is_err());
    }

    #[test]
    fn toy_similarity_magnitudes() {
        let net = to_measure_network(&k3(), SimilarityKind::SignlessLaplacian, MassScheme::Uniform).unwrap();
        let ops = build_operators(&toy_partition(), net.masses()).unwrap();
        let r2 = 2f64.sqrt();
        let avg = coarsen_similarity(&net, &ops, Magnitude::Averaging).unwrap();
        assert!(avg.similarity().max_abs_diff(&Mat::from_rows(&[[2.0, 1.0], [1.0, 1.5]])) < 1e-12);
        let proj = coarsen_similarity(&net, &ops, Magnitude::Projection).unwrap();
        assert!(proj.similarity().max_abs_diff(&Mat::from_rows(&[[2.0, r2], [r2, 3.0]])) < 1e-12);
        let acc = coarsen_similarity(&net, &ops, Magnitude::Accumulation).unwrap();
        assert!(acc.similarity().max_abs_diff(&Mat::from_rows(&[[2.0, 2.0], [2.0, 6.0]])) < 1e-12);
        assert!(!Magnitude::Accumulation.gw_comparable());
        assert_eq!(avg.masses(), ops.cluster_masses());
    }

    #[test]
    fn membership_plan_examples() {
        let ops = build_operators(&toy_partition(), &uniform(3)).unwrap();
        let t = membership_transport_plan(&ops);
        let third = 1.0 / 3.0;
        assert_eq!(t.matrix().to_rows(), vec![vec![third, 0.0], vec![0.0, third], vec![0.0, third]]);
        t.check_couples(ops.masses(), ops.cluster_masses()).unwrap();

        let m = vec![0.2, 0.3, 0.5];
        let ops = build_operators(&Partition::identity(3), &m).unwrap();
        assert_eq!(membership_transport_plan(&ops).matrix(), &Mat::diag(&m));
        let ops = build_operators(&Partition::single(3), &m).unwrap();
        assert_eq!(membership_transport_plan(&ops).matrix(), &Mat::column(&m));
    }

    #[test]
    fn uniform_mass_pseudoinverse_relation() {
        // C̄_w⁺ = C_pᵀ for uniform masses: C̄_w C_pᵀ = I and C_pᵀ C̄_w is symmetric.
        let p = Partition::new(vec![0, 1, 0, 2, 1, 1], 3).unwrap();
        let ops = build_operators(&p, &uniform(6)).unwrap();
        let cpt = ops.accumulation().transpose();
        assert!(ops.averaging().matmul(&cpt).max_abs_diff(&Mat::identity(3)) < 1e-12);
        let proj = cpt.matmul(ops.averaging());
        assert!(proj.asymmetry() < 1e-12);
        assert!(proj.matmul(&proj).max_abs_diff(&proj) < 1e-12);
    }
}
