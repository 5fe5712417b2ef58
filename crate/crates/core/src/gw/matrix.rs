//! Pairwise GW distance matrices over collections of measure networks.

use rayon::prelude::*;
use serde::Serialize;

use super::solver::{solve_gw, GwConfig, GwInit};
use crate::linalg::Mat;
use crate::network::MeasureNetwork;
use crate::scalar::Real;

#[derive(Debug, Clone, Serialize)]
pub struct PairMeta {
    pub i: usize,
    pub j: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Squared GW₂ values for every pair; square roots are taken on demand.
#[derive(Debug, Clone, Serialize)]
pub struct GwMatrix<T: Real = f64> {
    pub squared: Mat<T>,
    pub pairs: Vec<PairMeta>,
}

impl<T: Real> GwMatrix<T> {
    /// `Z_ij = GW₂(net_i, net_j)`.
    pub fn distances(&self) -> Mat<T> {
        self.squared.map(|v| v.max(T::zero()).sqrt())
    }

    pub fn failures(&self) -> impl Iterator<Item = &PairMeta> {
        self.pairs.iter().filter(|p| p.error.is_some())
    }

    pub fn all_converged(&self) -> bool {
        self.pairs.iter().all(|p| p.converged)
    }
}

/// Solves every unordered pair once, in parallel on the current rayon pool.
///
/// A failing pair leaves `NaN` in the matrix and its error in the metadata.
pub fn gw_matrix<T: Real>(nets: &[MeasureNetwork<T>], cfg: &GwConfig<T>) -> GwMatrix<T> {
    let k = nets.len();
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| ((i + 1)..k).map(move |j| (i, j))).collect();
    // Plans from a membership start do not carry over between pairs.
    let cfg = match cfg.init {
        GwInit::Membership(_) => GwConfig {
            init: GwInit::Product,
            ..cfg.clone()
        },
        _ => cfg.clone(),
    };
    let solved: Vec<(PairMeta, T)> = pairs
        .par_iter()
        .map(|&(i, j)| match solve_gw(&nets[i], &nets[j], &cfg) {
            Ok(res) => (
                PairMeta {
                    i,
                    j,
                    iterations: res.iterations,
                    restarts: res.restarts_used,
                    converged: res.converged,
                    error: None,
                },
                res.value.max(T::zero()),
            ),
            Err(e) => (
                PairMeta {
                    i,
                    j,
                    iterations: 0,
                    restarts: 0,
                    converged: false,
                    error: Some(e.to_string()),
                },
                T::nan(),
            ),
        })
        .collect();
    let mut squared = Mat::zeros(k, k);
    let mut metas = Vec::with_capacity(solved.len());
    for (meta, value) in solved {
        squared[(meta.i, meta.j)] = value;
        squared[(meta.j, meta.i)] = value;
        metas.push(meta);
    }
    GwMatrix { squared, pairs: metas }
}

/// `‖Z − Z⁽ᶜ⁾‖_F` between two distance matrices.
pub fn frobenius_change<T: Real>(z: &Mat<T>, z_c: &Mat<T>) -> T {
    (z - z_c).frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_graph_collection() {
        let nets = vec![MeasureNetwork::singleton(1.0)];
        let z = gw_matrix(&nets, &GwConfig::default());
        assert_eq!(z.distances().to_rows(), vec![vec![0.0]]);
        assert!(z.pairs.is_empty());
    }

    #[test]
    fn singleton_pair_distance() {
        let nets = vec![MeasureNetwork::singleton(1.0), MeasureNetwork::singleton(4.0)];
        let z = gw_matrix(&nets, &GwConfig::default());
        assert_eq!(z.squared[(0, 1)], 9.0);
        assert_eq!(z.distances()[(1, 0)], 3.0);
        assert!(z.all_converged());
    }
}
