//! Evaluation protocols shared by the command-line tool and the test suites:
//! coarsening a collection, bound reports, distance-matrix change and
//! spectrum-preservation error.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::coarsening::{build_operators, coarsen_adjacency, coarsen_similarity, membership_transport_plan, Magnitude, Partition};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::gw::{solve_gw, GwConfig, GwInit};
use crate::heavy_edge::heavy_edge_baseline;
use crate::kgc::{objective, refine, run_kgc, KgcConfig, KgcInit, KgcResult};
use crate::linalg::Mat;
use crate::network::MeasureNetwork;
use crate::spectral::{bound_single, compression_spectra, top_k_relative_error, SingleBoundReport, Spectrum};

/// `n = ⌈c·N⌉`, at least one.
///
/// A slack of `1e-9` keeps products such as `0.7 · 10` from rounding up to 8.
pub fn ratio_to_size(ratio: f64, n_nodes: usize) -> Result<usize> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidConfig(format!("ratio {ratio} must lie in (0, 1]")));
    }
    let n = (ratio * n_nodes as f64 - 1e-9).ceil().max(1.0) as usize;
    Ok(n.min(n_nodes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoarsenMethod {
    /// Kernel K-means from K-means++ seeds.
    Kgc,
    /// Kernel K-means refining the heavy-edge partition.
    KgcA,
    HeavyEdge,
}

/// Result of coarsening one graph.
#[derive(Debug, Clone, Serialize)]
pub struct CoarsenOutcome {
    pub partition: Partition,
    /// Clustering objective `Tr(U) − Tr(C_w U C_wᵀ)` of `partition`.
    pub objective: f64,
    /// Objective of the heavy-edge start, for refinement runs.
    pub baseline_objective: Option<f64>,
    pub kgc: Option<KgcResult>,
    /// Wall time; kept out of JSON so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

/// Coarsens one network to `n` clusters.
pub fn coarsen_network(
    g: &Graph,
    net: &MeasureNetwork,
    method: CoarsenMethod,
    n: usize,
    seed: u64,
    max_iter: usize,
) -> Result<CoarsenOutcome> {
    let start = Instant::now();
    let out = match method {
        CoarsenMethod::HeavyEdge => {
            let partition = heavy_edge_baseline(g, n)?;
            CoarsenOutcome {
                objective: objective(net, &partition)?,
                partition,
                baseline_objective: None,
                kgc: None,
                seconds: 0.0,
            }
        }
        CoarsenMethod::Kgc => {
            let cfg = KgcConfig::new(n, KgcInit::PlusPlus(seed)).with_max_iter(max_iter);
            let res = run_kgc(net, &cfg)?;
            CoarsenOutcome {
                partition: res.partition.clone(),
                objective: res.objective(),
                baseline_objective: None,
                kgc: Some(res),
                seconds: 0.0,
            }
        }
        CoarsenMethod::KgcA => {
            let initial = heavy_edge_baseline(g, n)?;
            let cfg = KgcConfig::new(n, KgcInit::FromPartition(initial.clone())).with_max_iter(max_iter);
            let res = refine(net, &initial, &cfg)?;
            CoarsenOutcome {
                partition: res.partition.clone(),
                objective: res.objective(),
                baseline_objective: Some(res.initial_objective()),
                kgc: Some(res),
                seconds: 0.0,
            }
        }
    };
    Ok(CoarsenOutcome {
        seconds: start.elapsed().as_secs_f64(),
        ..out
    })
}

/// Coarsened graph with adjacency `C_p A C_pᵀ` and cluster masses.
///
/// Edges inside a cluster become supernode self-weights, which the graph
/// format cannot hold, so they are dropped here. Similarities for distance
/// computations are always rebuilt from the original graph and partition.
pub fn coarsened_graph(g: &Graph, net: &MeasureNetwork, partition: &Partition) -> Result<Graph> {
    let ops = build_operators(partition, net.masses())?;
    let a = coarsen_adjacency(g, &ops)?;
    let n = partition.n_clusters();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if a[(i, j)] > 0.0 {
                edges.push((i, j, a[(i, j)]));
            }
        }
    }
    Graph::new(n, edges, Some(ops.cluster_masses().to_vec()))
}

/// Coarsened network `(S⁽ᶜ⁾, c)` of a partition.
pub fn coarsened_network(net: &MeasureNetwork, partition: &Partition, magnitude: Magnitude) -> Result<MeasureNetwork> {
    let ops = build_operators(partition, net.masses())?;
    coarsen_similarity(net, &ops, magnitude)
}

/// Single-graph bound with the solver value of `GW₂²(G, G⁽ᶜ⁾)` attached.
///
/// The coarse network uses averaging, and the solver starts from the
/// membership plan so its value never exceeds the membership cost.
pub fn bound_with_solver(net: &MeasureNetwork, partition: &Partition, gw: &GwConfig) -> Result<SingleBoundReport> {
    let ops = build_operators(partition, net.masses())?;
    let report = bound_single(net, &ops)?;
    let coarse = coarsen_similarity(net, &ops, Magnitude::Averaging)?;
    let cfg = gw.clone().with_init(GwInit::Membership(membership_transport_plan(&ops)));
    let res = solve_gw(net, &coarse, &cfg)?;
    Ok(report.with_solver_cost(res.value))
}

/// Mean of the finite entries, `None` when there are none.
pub fn finite_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Spectrum-preservation error of one partition plus the spectra behind it.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumRow {
    pub error: f64,
    pub lambda: Spectrum,
    pub lambda_c: Spectrum,
}

pub fn spectrum_row(net: &MeasureNetwork, partition: &Partition, k: usize) -> Result<SpectrumRow> {
    let ops = build_operators(partition, net.masses())?;
    let spectra = compression_spectra(net, &ops)?;
    Ok(SpectrumRow {
        error: top_k_relative_error(&spectra.lambda, &spectra.lambda_c, k)?,
        lambda: spectra.lambda,
        lambda_c: spectra.lambda_c,
    })
}

/// Square matrix as CSV with the ids as header row and first column.
pub fn matrix_csv(ids: &[String], m: &Mat<f64>) -> String {
    let mut out = String::from("id");
    for id in ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for (i, id) in ids.iter().enumerate() {
        out.push_str(id);
        for j in 0..m.cols() {
            let _ = write!(out, ",{}", m[(i, j)]);
        }
        out.push('\n');
    }
    out
}

/// Long-format CSV `graph,index,lambda,lambda_c` of per-graph spectra.
pub fn spectra_csv(rows: &[(String, &Spectrum, &Spectrum)]) -> String {
    let mut out = String::from("graph,index,lambda,lambda_c\n");
    for (id, lambda, lambda_c) in rows {
        for i in 1..=lambda.len() {
            let coarse = if i <= lambda_c.len() {
                lambda_c.nth(i).to_string()
            } else {
                String::new()
            };
            let _ = writeln!(out, "{id},{i},{},{coarse}", lambda.nth(i));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{to_measure_network, MassScheme, SimilarityKind};

    #[test]
    fn ratio_rounding() {
        assert_eq!(ratio_to_size(0.5, 7).unwrap(), 4);
        assert_eq!(ratio_to_size(0.7, 10).unwrap(), 7);
        assert_eq!(ratio_to_size(1.0, 9).unwrap(), 9);
        assert_eq!(ratio_to_size(0.01, 9).unwrap(), 1);
        assert!(ratio_to_size(0.0, 9).is_err());
        assert!(ratio_to_size(1.2, 9).is_err());
    }

    #[test]
    fn toy_bound_report() {
        let g: Graph = Graph::unweighted(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let net = to_measure_network(&g, SimilarityKind::SignlessLaplacian, MassScheme::Uniform).unwrap();
        let p = Partition::new(vec![0, 1, 1], 2).unwrap();
        let r = bound_with_solver(&net, &p, &GwConfig::default()).unwrap();
        assert!((r.bound_rhs - 13.0 / 9.0).abs() < 1e-9);
        assert!(r.solver_cost.unwrap() <= 1.0 / 9.0 + 1e-9);
        assert!(r.gap >= 13.0 / 9.0 - 1.0 / 9.0 - 1e-9);
    }

    #[test]
    fn coarse_graph_drops_internal_edges() {
        let g: Graph = Graph::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let net = to_measure_network(&g, SimilarityKind::CombinatorialLaplacian, MassScheme::Uniform).unwrap();
        let p = Partition::new(vec![0, 0, 1, 1], 2).unwrap();
        let c = coarsened_graph(&g, &net, &p).unwrap();
        assert_eq!(c.edges(), &[(0, 1, 1.0)]);
        assert_eq!(c.node_masses().unwrap(), &[0.5, 0.5]);
    }

    #[test]
    fn csv_layout() {
        let ids = vec!["a".to_string(), "b".to_string()];
        let m = Mat::from_rows(&[[0.0, 1.5], [1.5, 0.0]]);
        assert_eq!(matrix_csv(&ids, &m), "id,a,b\na,0,1.5\nb,1.5,0\n");
    }
}
