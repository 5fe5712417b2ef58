//! Spectrum-preserving graph coarsening and Gromov–Wasserstein distances.
//!
//! Graphs become measure networks `(S, m)`, partitions become coarsening
//! matrices, and the crate checks how well the coarsened networks keep
//! pairwise GW₂ distances. The numerical core is generic over [`Real`]
//! (`f32`, `f64`); the aliases at the crate root fix it to `f64`.

pub mod coarsening;
pub mod error;
pub mod eval;
pub mod graph;
pub mod gw;
pub mod heavy_edge;
pub mod io;
pub mod kgc;
pub mod linalg;
pub mod network;
pub mod scalar;
pub mod spectral;
pub mod synth;
pub mod transport;

pub use coarsening::{
    build_operators, coarsen_adjacency, coarsen_laplacian, coarsen_similarity, membership_transport_plan,
    CoarsenedLaplacians, CoarseningOperators, Magnitude, Partition,
};
pub use error::{Error, Result};
pub use heavy_edge::heavy_edge_baseline;
pub use kgc::{init_plusplus, refine, run_kgc, KgcConfig, KgcInit, KgcResult};
pub use graph::{build_similarity, node_masses, to_measure_network, Graph, MassScheme, SimilarityKind};
pub use linalg::{sym_eigen, Mat, SymEigen};
pub use network::MeasureNetwork;
pub use scalar::Real;
pub use spectral::Spectrum;
pub use transport::TransportPlan;

/// Dense `f64` matrix.
pub type Matrix = Mat<f64>;
/// Dense `f32` matrix.
pub type Matrix32 = Mat<f32>;
/// `f64` measure network.
pub type Network = MeasureNetwork<f64>;
/// `f32` measure network.
pub type Network32 = MeasureNetwork<f32>;
/// `f64` transport plan.
pub type Plan = TransportPlan<f64>;
/// `f32` transport plan.
pub type Plan32 = TransportPlan<f32>;
