//! Undirected weighted graphs and the similarity matrices built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::network::MeasureNetwork;
use crate::scalar::Real;

/// Undirected weighted graph with optional node masses.
///
/// Edges are stored canonically (`i < j`, sorted, duplicates summed).
#[derive(Debug, Clone, PartialEq)]
pub struct Graph<T: Real = f64> {
    n_nodes: usize,
    edges: Vec<(usize, usize, T)>,
    node_masses: Option<Vec<T>>,
}

impl<T: Real> Graph<T> {
    pub fn new(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize, T)>,
        node_masses: Option<Vec<T>>,
    ) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::InvariantViolation("graph must have at least one node".into()));
        }
        let mut merged: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for (k, (i, j, w)) in edges.into_iter().enumerate() {
            if i >= n_nodes || j >= n_nodes {
                return Err(Error::InvariantViolation(format!(
                    "edge {k} ({i}, {j}) has an index outside [0, {n_nodes})"
                )));
            }
            if i == j {
                return Err(Error::InvariantViolation(format!(
                    "edge {k} is a self-loop on node {i}"
                )));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvariantViolation(format!(
                    "edge {k} ({i}, {j}) has negative or non-finite weight {w}"
                )));
            }
            *merged.entry((i.min(j), i.max(j))).or_insert(T::zero()) += w;
        }
        if let Some(m) = &node_masses {
            if m.len() != n_nodes {
                return Err(Error::DimensionMismatch {
                    what: "node masses",
                    expected: n_nodes,
                    found: m.len(),
                });
            }
            if let Some(i) = m.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
                return Err(Error::InvariantViolation(format!(
                    "node mass {i} is not positive"
                )));
            }
        }
        Ok(Self {
            n_nodes,
            edges: merged.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
            node_masses,
        })
    }

    /// Unit-weight graph from an edge list.
    pub fn unweighted(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n_nodes, edges.iter().map(|&(i, j)| (i, j, T::one())), None)
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    #[inline]
    pub fn node_masses(&self) -> Option<&[T]> {
        self.node_masses.as_deref()
    }

    pub fn with_masses(mut self, masses: Vec<T>) -> Result<Self> {
        self = Self::new(self.n_nodes, self.edges, Some(masses))?;
        Ok(self)
    }

    pub fn total_weight(&self) -> T {
        self.edges.iter().map(|e| e.2).sum()
    }

    pub fn degrees(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.n_nodes];
        for &(i, j, w) in &self.edges {
            d[i] += w;
            d[j] += w;
        }
        d
    }

    pub fn adjacency(&self) -> Mat<T> {
        let mut a = Mat::zeros(self.n_nodes, self.n_nodes);
        for &(i, j, w) in &self.edges {
            a[(i, j)] += w;
            a[(j, i)] += w;
        }
        a
    }

    /// Combinatorial Laplacian `L = D − A`.
    pub fn laplacian(&self) -> Mat<T> {
        build_similarity(self, SimilarityKind::CombinatorialLaplacian)
            .expect("combinatorial Laplacian never fails")
    }

    /// Normalized Laplacian `I − D^{-1/2} A D^{-1/2}`.
    pub fn normalized_laplacian(&self) -> Result<Mat<T>> {
        build_similarity(self, SimilarityKind::NormalizedLaplacian)
    }
}

/// Which matrix of the graph plays the role of the similarity `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityKind {
    CombinatorialLaplacian,
    NormalizedLaplacian,
    /// `D + A`; always PSD.
    SignlessLaplacian,
    /// `I + D^{-1/2} A D^{-1/2}`; always PSD.
    NormalizedSignlessLaplacian,
    RawAdjacency,
}

impl SimilarityKind {
    pub fn is_normalized(self) -> bool {
        matches!(self, Self::NormalizedLaplacian | Self::NormalizedSignlessLaplacian)
    }

    /// Kinds that are PSD for every graph.
    pub fn is_psd(self) -> bool {
        !matches!(self, Self::RawAdjacency)
    }

    pub fn is_signless(self) -> bool {
        matches!(self, Self::SignlessLaplacian | Self::NormalizedSignlessLaplacian)
    }
}

/// How node masses are assigned when turning a graph into a measure network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassScheme {
    #[default]
    Uniform,
    DegreeProportional,
    Explicit,
}

pub fn build_similarity<T: Real>(g: &Graph<T>, kind: SimilarityKind) -> Result<Mat<T>> {
    let n = g.n_nodes();
    let d = g.degrees();
    let a = g.adjacency();
    let inv_sqrt = if kind.is_normalized() {
        let mut v = Vec::with_capacity(n);
        for (node, &di) in d.iter().enumerate() {
            if !(di > T::zero()) {
                return Err(Error::ZeroDegreeNode { node });
            }
            v.push(T::one() / di.sqrt());
        }
        v
    } else {
        Vec::new()
    };
    let s = match kind {
        SimilarityKind::RawAdjacency => a,
        SimilarityKind::CombinatorialLaplacian => {
            Mat::from_fn(n, n, |i, j| if i == j { d[i] - a[(i, j)] } else { -a[(i, j)] })
        }
        SimilarityKind::SignlessLaplacian => {
            Mat::from_fn(n, n, |i, j| if i == j { d[i] + a[(i, j)] } else { a[(i, j)] })
        }
        SimilarityKind::NormalizedLaplacian => Mat::from_fn(n, n, |i, j| {
            let off = inv_sqrt[i] * a[(i, j)] * inv_sqrt[j];
            if i == j {
                T::one() - off
            } else {
                -off
            }
        }),
        SimilarityKind::NormalizedSignlessLaplacian => Mat::from_fn(n, n, |i, j| {
            let off = inv_sqrt[i] * a[(i, j)] * inv_sqrt[j];
            if i == j {
                T::one() + off
            } else {
                off
            }
        }),
    };
    Ok(s)
}

/// Node masses on the simplex under the chosen scheme.
pub fn node_masses<T: Real>(g: &Graph<T>, scheme: MassScheme) -> Result<Vec<T>> {
    let raw = match scheme {
        MassScheme::Uniform => vec![T::one(); g.n_nodes()],
        MassScheme::DegreeProportional => {
            if !(g.total_weight() > T::zero()) {
                return Err(Error::ZeroTotalMass);
            }
            let d = g.degrees();
            if let Some(node) = d.iter().position(|&x| !(x > T::zero())) {
                return Err(Error::ZeroDegreeNode { node });
            }
            d
        }
        MassScheme::Explicit => g.node_masses().ok_or(Error::MissingMasses)?.to_vec(),
    };
    crate::network::normalize_masses(raw)
}

/// Builds the measure network `(S, m)` of a graph.
///
/// Signless kinds are certified PSD on construction.
pub fn to_measure_network<T: Real>(
    g: &Graph<T>,
    kind: SimilarityKind,
    scheme: MassScheme,
) -> Result<MeasureNetwork<T>> {
    let s = build_similarity(g, kind)?;
    let m = node_masses(g, scheme)?;
    let net = MeasureNetwork::new(s, m)?;
    if kind.is_signless() {
        net.certify_psd()
    } else if kind.is_psd() {
        Ok(net.assume_psd())
    } else {
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigenvalues;

    fn k3() -> Graph {
        Graph::unweighted(3, &[(0, 1), (0, 2), (1, 2)]).unwrap()
    }

    fn p3() -> Graph {
        Graph::unweighted(3, &[(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn signless_laplacian_of_triangle() {
        let s = build_similarity(&k3(), SimilarityKind::SignlessLaplacian).unwrap();
        assert_eq!(s.to_rows(), vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 2.0]]);
    }

    #[test]
    fn single_node_laplacian_is_zero() {
        let g: Graph = Graph::new(1, [], None).unwrap();
        let l = build_similarity(&g, SimilarityKind::CombinatorialLaplacian).unwrap();
        assert_eq!(l.to_rows(), vec![vec![0.0]]);
    }

    #[test]
    fn path_laplacian() {
        let l = p3().laplacian();
        assert_eq!(
            l.to_rows(),
            vec![vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]
        );
    }

    #[test]
    fn normalized_kinds_reject_isolated_nodes() {
        let g: Graph = Graph::unweighted(3, &[(0, 1)]).unwrap();
        let err = build_similarity(&g, SimilarityKind::NormalizedSignlessLaplacian).unwrap_err();
        assert!(matches!(err, Error::ZeroDegreeNode { node: 2 }));
    }

    #[test]
    fn measure_network_examples() {
        let net = to_measure_network(&k3(), SimilarityKind::SignlessLaplacian, MassScheme::Uniform).unwrap();
        assert!(net.psd_checked());
        for &m in net.masses() {
            assert!((m - 1.0 / 3.0).abs() < 1e-15);
        }

        let single: Graph = Graph::new(1, [], None).unwrap();
        let net = to_measure_network(&single, SimilarityKind::RawAdjacency, MassScheme::Uniform).unwrap();
        assert_eq!(net.similarity().to_rows(), vec![vec![0.0]]);
        assert_eq!(net.masses(), &[1.0]);

        let net = to_measure_network(&p3(), SimilarityKind::CombinatorialLaplacian, MassScheme::DegreeProportional)
            .unwrap();
        assert_eq!(net.masses(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn degree_masses_need_edges() {
        let g: Graph = Graph::new(2, [], None).unwrap();
        assert!(matches!(
            node_masses(&g, MassScheme::DegreeProportional),
            Err(Error::ZeroTotalMass)
        ));
        assert!(matches!(node_masses(&g, MassScheme::Explicit), Err(Error::MissingMasses)));
    }

    #[test]
    fn ingestion_invariants() {
        assert!(Graph::<f64>::new(2, [(0, 0, 1.0)], None).is_err());
        assert!(Graph::<f64>::new(2, [(0, 1, -1.0)], None).is_err());
        assert!(Graph::<f64>::new(2, [(0, 2, 1.0)], None).is_err());
        let g = Graph::<f64>::new(3, [(1, 0, 1.0), (0, 1, 2.0), (2, 1, 0.5)], None).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 3.0), (1, 2, 0.5)]);
    }

    #[test]
    fn normalized_laplacian_spectrum_in_range() {
        let g = Graph::<f64>::new(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (0, 3, 1.5), (0, 2, 1.0)], None).unwrap();
        let vals = sym_eigenvalues(&g.normalized_laplacian().unwrap()).unwrap();
        assert!(vals.iter().all(|&v| (-1e-10..=2.0 + 1e-10).contains(&v)));
    }
}
