//! `gwcoarse`: coarsen graph collections and measure how well GW distances survive.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gwcoarse::eval::CoarsenMethod;
use gwcoarse::{Magnitude, MassScheme, SimilarityKind};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "gwcoarse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coarsen every graph of a collection.
    Coarsen(CoarsenArgs),
    /// Check the single-graph distance bound for each graph.
    BoundReport(ReportArgs),
    /// Pairwise GW distances before and after coarsening.
    GwMatrix(GwMatrixArgs),
    /// Relative error of the leading eigenvalues after coarsening.
    SpectrumReport(SpectrumArgs),
    /// Write a seeded collection of Erdős–Rényi and block-model graphs.
    GenSynthetic(SyntheticArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Collection (or single graph) JSON file.
    #[arg(long)]
    pub input: PathBuf,
    /// Run directory; created if missing.
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coarsened size ratio c; each graph keeps ⌈c·N⌉ nodes.
    #[arg(long, default_value_t = 0.5)]
    pub ratio: f64,
    #[arg(long, value_enum, default_value_t = SimilarityArg::Signless)]
    pub similarity: SimilarityArg,
    #[arg(long, value_enum, default_value_t = MassArg::Uniform)]
    pub mass: MassArg,
    #[arg(long, value_enum, default_value_t = MagnitudeArg::Averaging)]
    pub magnitude: MagnitudeArg,
    /// GW solver starts per pair.
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    /// Iteration cap for the GW solver and for kernel K-means.
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CoarsenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = MethodArg::Kgc)]
    pub method: MethodArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// Partitions file; when absent the graphs are coarsened with `--method`.
    #[arg(long)]
    pub partitions: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodArg::Kgc)]
    pub method: MethodArg,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GwMatrixArgs {
    #[command(flatten)]
    pub report: ReportArgs,
    /// Only compute the distance matrix of the input collection.
    #[arg(long)]
    pub no_coarsen: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Partitions file; when absent every coarsening method is timed and compared.
    #[arg(long)]
    pub partitions: Option<PathBuf>,
    /// Number of leading eigenvalues compared.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SyntheticArgs {
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 20)]
    pub count: usize,
    #[arg(long, default_value_t = 10)]
    pub min_nodes: usize,
    #[arg(long, default_value_t = 24)]
    pub max_nodes: usize,
    #[arg(long, default_value_t = 0.3)]
    pub p_er: f64,
    #[arg(long, default_value_t = 0.6)]
    pub p_in: f64,
    #[arg(long, default_value_t = 0.08)]
    pub p_out: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityArg {
    Laplacian,
    NormLaplacian,
    Signless,
    NormSignless,
}

impl From<SimilarityArg> for SimilarityKind {
    fn from(a: SimilarityArg) -> Self {
        match a {
            SimilarityArg::Laplacian => SimilarityKind::CombinatorialLaplacian,
            SimilarityArg::NormLaplacian => SimilarityKind::NormalizedLaplacian,
            SimilarityArg::Signless => SimilarityKind::SignlessLaplacian,
            SimilarityArg::NormSignless => SimilarityKind::NormalizedSignlessLaplacian,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassArg {
    Uniform,
    Degree,
}

impl From<MassArg> for MassScheme {
    fn from(a: MassArg) -> Self {
        match a {
            MassArg::Uniform => MassScheme::Uniform,
            MassArg::Degree => MassScheme::DegreeProportional,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MagnitudeArg {
    Averaging,
    Projection,
    Accumulation,
}

impl From<MagnitudeArg> for Magnitude {
    fn from(a: MagnitudeArg) -> Self {
        match a {
            MagnitudeArg::Averaging => Magnitude::Averaging,
            MagnitudeArg::Projection => Magnitude::Projection,
            MagnitudeArg::Accumulation => Magnitude::Accumulation,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Kgc,
    KgcA,
    HeavyEdge,
}

impl From<MethodArg> for CoarsenMethod {
    fn from(a: MethodArg) -> Self {
        match a {
            MethodArg::Kgc => CoarsenMethod::Kgc,
            MethodArg::KgcA => CoarsenMethod::KgcA,
            MethodArg::HeavyEdge => CoarsenMethod::HeavyEdge,
        }
    }
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Some graphs or pairs failed; see `errors.json`.
    Partial,
    /// The input could not be used at all.
    Invalid,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Success => 0,
            Status::Partial => 1,
            Status::Invalid => 2,
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let workers = match &cli.command {
        Command::Coarsen(a) => a.common.workers,
        Command::BoundReport(a) => a.common.workers,
        Command::GwMatrix(a) => a.report.common.workers,
        Command::SpectrumReport(a) => a.common.workers,
        Command::GenSynthetic(_) => None,
    };
    if let Some(w) = workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Coarsen(a) => commands::coarsen(&a),
        Command::BoundReport(a) => commands::bound_report(&a),
        Command::GwMatrix(a) => commands::gw_matrix(&a),
        Command::SpectrumReport(a) => commands::spectrum_report(&a),
        Command::GenSynthetic(a) => commands::gen_synthetic(&a),
    };
    match result {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            Status::Invalid.into()
        }
    }
}
