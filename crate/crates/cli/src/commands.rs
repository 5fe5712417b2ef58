//! Subcommand implementations.

use std::path::Path;

use anyhow::{bail, Context, Result};
use gwcoarse::eval::{
    bound_with_solver, coarsen_network, coarsened_graph, coarsened_network, finite_mean, matrix_csv, ratio_to_size,
    spectra_csv, spectrum_row, CoarsenMethod, CoarsenOutcome,
};
use gwcoarse::gw::{frobenius_change, gw_matrix as solve_matrix, GwConfig};
use gwcoarse::io::{collection_to_json, load_collection, load_partitions, partitions_to_json, Collection};
use gwcoarse::spectral::{spectral_difference, SingleBoundReport};
use gwcoarse::synth::{synthetic_collection, SyntheticSpec};
use gwcoarse::{build_operators, to_measure_network, Magnitude, Network, Partition};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::output::{Failure, RunDir};
use crate::{Common, CoarsenArgs, GwMatrixArgs, MethodArg, ReportArgs, SpectrumArgs, Status, SyntheticArgs};

type Item<T> = std::result::Result<T, String>;

fn graph_id(k: usize) -> String {
    format!("g{k}")
}

fn status(failures: &[Failure]) -> Status {
    if failures.is_empty() {
        Status::Success
    } else {
        Status::Partial
    }
}

fn check_common(c: &Common) -> Result<()> {
    if !(c.ratio > 0.0 && c.ratio <= 1.0) {
        bail!("--ratio must lie in (0, 1], got {}", c.ratio);
    }
    if c.restarts == 0 || c.max_iter == 0 {
        bail!("--restarts and --max-iter must be positive");
    }
    Ok(())
}

fn load(c: &Common) -> Result<Collection> {
    check_common(c)?;
    let col = load_collection(&c.input).with_context(|| format!("reading {}", c.input.display()))?;
    if col.graphs.is_empty() {
        bail!("{} holds no graphs", c.input.display());
    }
    Ok(col)
}

fn networks(c: &Common, col: &Collection) -> Vec<Item<Network>> {
    col.graphs
        .par_iter()
        .map(|g| to_measure_network(g, c.similarity.into(), c.mass.into()).map_err(|e| e.to_string()))
        .collect()
}

fn gw_config(c: &Common) -> GwConfig {
    GwConfig {
        max_iter: c.max_iter,
        restarts: c.restarts,
        seed: c.seed,
        ..GwConfig::default()
    }
}

fn graph_seed(c: &Common, k: usize) -> u64 {
    c.seed.wrapping_add(k as u64)
}

fn coarsen_all(c: &Common, col: &Collection, nets: &[Item<Network>], method: CoarsenMethod) -> Vec<Item<CoarsenOutcome>> {
    (0..nets.len())
        .into_par_iter()
        .map(|k| {
            let net = nets[k].as_ref().map_err(Clone::clone)?;
            let g = &col.graphs[k];
            let n = ratio_to_size(c.ratio, g.n_nodes()).map_err(|e| e.to_string())?;
            coarsen_network(g, net, method, n, graph_seed(c, k), c.max_iter).map_err(|e| e.to_string())
        })
        .collect()
}

/// Partitions from a file, or freshly computed with `method` at `--ratio`.
fn partitions(
    c: &Common,
    col: &Collection,
    nets: &[Item<Network>],
    file: Option<&Path>,
    method: MethodArg,
) -> Result<Vec<Item<Partition>>> {
    match file {
        Some(path) => {
            let parts = load_partitions(path).with_context(|| format!("reading {}", path.display()))?;
            if parts.len() != col.graphs.len() {
                bail!(
                    "{} holds {} partitions for {} graphs",
                    path.display(),
                    parts.len(),
                    col.graphs.len()
                );
            }
            Ok(parts
                .into_iter()
                .zip(&col.graphs)
                .map(|(p, g)| {
                    if p.n_nodes() == g.n_nodes() {
                        Ok(p)
                    } else {
                        Err(format!("partition covers {} nodes, graph has {}", p.n_nodes(), g.n_nodes()))
                    }
                })
                .collect())
        }
        None => Ok(coarsen_all(c, col, nets, method.into())
            .into_iter()
            .map(|o| o.map(|o| o.partition))
            .collect()),
    }
}

fn echo<A: Serialize>(dir: &RunDir, command: &str, args: &A) -> Result<()> {
    dir.write_json("config.json", &json!({ "command": command, "args": args }))
}

#[derive(Serialize)]
struct CoarsenRow {
    graph: String,
    n_nodes: usize,
    n_clusters: usize,
    objective: f64,
    baseline_objective: Option<f64>,
    delta: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
}

pub fn coarsen(a: &CoarsenArgs) -> Result<Status> {
    let c = &a.common;
    let col = load(c)?;
    let dir = RunDir::create(&c.output_dir)?;
    echo(&dir, "coarsen", a)?;
    let nets = networks(c, &col);
    let outcomes = coarsen_all(c, &col, &nets, a.method.into());

    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut graphs = Vec::new();
    let mut parts = Vec::new();
    let mut timings = Vec::new();
    for (k, outcome) in outcomes.into_iter().enumerate() {
        let id = graph_id(k);
        let built = outcome.and_then(|o| {
            let net = nets[k].as_ref().map_err(Clone::clone)?;
            let coarse = coarsened_graph(&col.graphs[k], net, &o.partition).map_err(|e| e.to_string())?;
            let ops = build_operators(&o.partition, net.masses()).map_err(|e| e.to_string())?;
            let delta = spectral_difference(net, &ops).ok().map(|d| d.delta);
            Ok((o, coarse, delta))
        });
        match built {
            Ok((o, coarse, delta)) => {
                if let Some(res) = &o.kgc {
                    dir.write_json(&format!("kgc/{id}.json"), res)?;
                }
                rows.push(CoarsenRow {
                    graph: id.clone(),
                    n_nodes: o.partition.n_nodes(),
                    n_clusters: o.partition.n_clusters(),
                    objective: o.objective,
                    baseline_objective: o.baseline_objective,
                    delta,
                    iterations: o.kgc.as_ref().map(|r| r.iterations),
                    converged: o.kgc.as_ref().map(|r| r.converged),
                });
                timings.push(json!({ "graph": id, "seconds": o.seconds }));
                graphs.push(coarse);
                parts.push(o.partition);
            }
            Err(error) => failures.push(Failure { item: id, error }),
        }
    }
    if parts.is_empty() {
        dir.write_failures(&failures)?;
        bail!("every graph failed to coarsen");
    }
    dir.write_text("coarsened.json", &collection_to_json(&graphs, None)?)?;
    dir.write_text("partitions.json", &partitions_to_json(&parts)?)?;
    dir.write_json(
        "report.json",
        &json!({
            "graphs": rows,
            "mean_objective": finite_mean(rows.iter().map(|r| r.objective)),
            "failed": failures.len(),
        }),
    )?;
    dir.write_json("timings.json", &timings)?;
    dir.write_failures(&failures)?;
    Ok(status(&failures))
}

#[derive(Serialize)]
struct BoundRow {
    graph: String,
    n_nodes: usize,
    n_clusters: usize,
    delta: f64,
    c_un: f64,
    bound_rhs: f64,
    membership_cost: f64,
    solver_cost: f64,
    gap: f64,
}

pub fn bound_report(a: &ReportArgs) -> Result<Status> {
    let c = &a.common;
    let col = load(c)?;
    let dir = RunDir::create(&c.output_dir)?;
    echo(&dir, "bound-report", a)?;
    let nets = networks(c, &col);
    let parts = partitions(c, &col, &nets, a.partitions.as_deref(), a.method)?;
    let cfg = gw_config(c);
    let reports: Vec<Item<SingleBoundReport>> = (0..nets.len())
        .into_par_iter()
        .map(|k| {
            let net = nets[k].as_ref().map_err(Clone::clone)?;
            let p = parts[k].as_ref().map_err(Clone::clone)?;
            bound_with_solver(net, p, &cfg).map_err(|e| e.to_string())
        })
        .collect();

    let mut failures = Vec::new();
    let mut rows = Vec::new();
    let mut full = Vec::new();
    for (k, r) in reports.into_iter().enumerate() {
        match r {
            Ok(r) => {
                rows.push(BoundRow {
                    graph: graph_id(k),
                    n_nodes: r.lambda.len(),
                    n_clusters: r.lambda_c.len(),
                    delta: r.delta,
                    c_un: r.c_un,
                    bound_rhs: r.bound_rhs,
                    membership_cost: r.membership_cost,
                    solver_cost: r.realized_cost(),
                    gap: r.gap,
                });
                full.push(json!({ "graph": graph_id(k), "report": r }));
            }
            Err(error) => failures.push(Failure { item: graph_id(k), error }),
        }
    }
    let mut csv = String::from("graph,n_nodes,n_clusters,delta,c_un,bound_rhs,membership_cost,solver_cost,gap\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.graph, r.n_nodes, r.n_clusters, r.delta, r.c_un, r.bound_rhs, r.membership_cost, r.solver_cost, r.gap
        ));
    }
    dir.write_text("bound_report.csv", &csv)?;
    dir.write_json("bounds.json", &full)?;
    dir.write_json(
        "report.json",
        &json!({
            "graphs": rows,
            "mean_gw2": finite_mean(rows.iter().map(|r| r.solver_cost)),
            "mean_bound_rhs": finite_mean(rows.iter().map(|r| r.bound_rhs)),
            "mean_gap": finite_mean(rows.iter().map(|r| r.gap)),
            "violations": rows.iter().filter(|r| r.gap < -1e-8).count(),
            "failed": failures.len(),
        }),
    )?;
    dir.write_failures(&failures)?;
    if rows.is_empty() {
        bail!("no graph produced a bound report");
    }
    Ok(status(&failures))
}

pub fn gw_matrix(a: &GwMatrixArgs) -> Result<Status> {
    let c = &a.report.common;
    let col = load(c)?;
    let dir = RunDir::create(&c.output_dir)?;
    echo(&dir, "gw-matrix", a)?;
    let magnitude: Magnitude = c.magnitude.into();
    if !magnitude.gw_comparable() {
        log::warn!("accumulation magnitude changes the scale of S; the distance change is not meaningful");
    }
    let nets = networks(c, &col);
    let mut failures = Vec::new();

    let coarse: Vec<Item<Network>> = if a.no_coarsen {
        Vec::new()
    } else {
        let parts = partitions(c, &col, &nets, a.report.partitions.as_deref(), a.report.method)?;
        (0..nets.len())
            .map(|k| {
                let net = nets[k].as_ref().map_err(Clone::clone)?;
                let p = parts[k].as_ref().map_err(Clone::clone)?;
                coarsened_network(net, p, magnitude).map_err(|e| e.to_string())
            })
            .collect()
    };

    // Graphs usable on both sides keep their original ids.
    let keep: Vec<usize> = (0..nets.len())
        .filter(|&k| {
            let err = nets[k].as_ref().err().or_else(|| coarse.get(k).and_then(|r| r.as_ref().err()));
            if let Some(e) = err {
                failures.push(Failure {
                    item: graph_id(k),
                    error: e.clone(),
                });
                false
            } else {
                true
            }
        })
        .collect();
    if keep.is_empty() {
        dir.write_failures(&failures)?;
        bail!("no usable graph in the collection");
    }
    let ids: Vec<String> = keep.iter().map(|&k| graph_id(k)).collect();
    let cfg = gw_config(c);
    let originals: Vec<Network> = keep.iter().map(|&k| nets[k].clone().expect("kept")).collect();
    let z = solve_matrix(&originals, &cfg);
    record_pair_failures(&z.pairs, &ids, &mut failures);
    dir.write_text("Z.csv", &matrix_csv(&ids, &z.distances()))?;

    let mut summary = json!({
        "graphs": ids,
        "magnitude": magnitude,
        "original": { "pairs": z.pairs, "all_converged": z.all_converged() },
    });
    if !a.no_coarsen {
        let coarsened: Vec<Network> = keep.iter().map(|&k| coarse[k].clone().expect("kept")).collect();
        let zc = solve_matrix(&coarsened, &cfg);
        record_pair_failures(&zc.pairs, &ids, &mut failures);
        dir.write_text("Zc.csv", &matrix_csv(&ids, &zc.distances()))?;
        let change = frobenius_change(&z.distances(), &zc.distances());
        summary["coarsened"] = json!({ "pairs": zc.pairs, "all_converged": zc.all_converged() });
        summary["frobenius_change"] = json!(change);
    }
    dir.write_json("report.json", &summary)?;
    dir.write_failures(&failures)?;
    Ok(status(&failures))
}

fn record_pair_failures(pairs: &[gwcoarse::gw::PairMeta], ids: &[String], failures: &mut Vec<Failure>) {
    for p in pairs {
        if let Some(e) = &p.error {
            failures.push(Failure {
                item: format!("{}:{}", ids[p.i], ids[p.j]),
                error: e.clone(),
            });
        }
    }
}

#[derive(Serialize)]
struct SpectrumEntry {
    graph: String,
    method: String,
    n_nodes: usize,
    n_clusters: usize,
    error: f64,
}

pub fn spectrum_report(a: &SpectrumArgs) -> Result<Status> {
    let c = &a.common;
    let col = load(c)?;
    if a.k == 0 {
        bail!("--k must be positive");
    }
    let dir = RunDir::create(&c.output_dir)?;
    echo(&dir, "spectrum-report", a)?;
    let nets = networks(c, &col);

    // (method name, per-graph partitions with wall time)
    let runs: Vec<(String, Vec<Item<(Partition, f64)>>)> = match &a.partitions {
        Some(path) => {
            let parts = partitions(c, &col, &nets, Some(path), MethodArg::Kgc)?;
            vec![("given".into(), parts.into_iter().map(|p| p.map(|p| (p, 0.0))).collect())]
        }
        None => [MethodArg::HeavyEdge, MethodArg::Kgc, MethodArg::KgcA]
            .into_iter()
            .map(|m| {
                let name = serde_json::to_value(m).expect("enum").as_str().unwrap_or_default().to_string();
                let outs = coarsen_all(c, &col, &nets, m.into())
                    .into_iter()
                    .map(|o| o.map(|o| (o.partition, o.seconds)))
                    .collect();
                (name, outs)
            })
            .collect(),
    };

    let mut failures = Vec::new();
    let mut entries = Vec::new();
    let mut timing_csv = String::from("graph,method,seconds\n");
    let mut error_csv = String::from("graph,method,n_nodes,n_clusters,error\n");
    let mut spectra = Vec::new();
    let mut means = serde_json::Map::new();
    for (method, outs) in &runs {
        let mut errs = Vec::new();
        for (k, out) in outs.iter().enumerate() {
            let id = graph_id(k);
            let row = out.as_ref().map_err(Clone::clone).and_then(|(p, secs)| {
                let net = nets[k].as_ref().map_err(Clone::clone)?;
                let row = spectrum_row(net, p, a.k).map_err(|e| e.to_string())?;
                Ok((row, *secs, p.n_nodes(), p.n_clusters()))
            });
            match row {
                Ok((row, secs, n_nodes, n_clusters)) => {
                    error_csv.push_str(&format!("{id},{method},{n_nodes},{n_clusters},{}\n", row.error));
                    timing_csv.push_str(&format!("{id},{method},{secs}\n"));
                    errs.push(row.error);
                    entries.push(SpectrumEntry {
                        graph: id.clone(),
                        method: method.clone(),
                        n_nodes,
                        n_clusters,
                        error: row.error,
                    });
                    spectra.push((format!("{id}:{method}"), row.lambda, row.lambda_c));
                }
                Err(error) => failures.push(Failure {
                    item: format!("{id}:{method}"),
                    error,
                }),
            }
        }
        means.insert(method.clone(), json!(finite_mean(errs)));
    }
    let spectra_refs: Vec<_> = spectra.iter().map(|(id, l, lc)| (id.clone(), l, lc)).collect();
    dir.write_text("spectrum_errors.csv", &error_csv)?;
    dir.write_text("timings.csv", &timing_csv)?;
    dir.write_text("spectra.csv", &spectra_csv(&spectra_refs))?;
    dir.write_json(
        "report.json",
        &json!({ "k": a.k, "rows": entries, "mean_error": means, "failed": failures.len() }),
    )?;
    dir.write_failures(&failures)?;
    if entries.is_empty() {
        bail!("no graph produced a spectrum report");
    }
    Ok(status(&failures))
}

pub fn gen_synthetic(a: &SyntheticArgs) -> Result<Status> {
    let spec = SyntheticSpec {
        count: a.count,
        min_nodes: a.min_nodes,
        max_nodes: a.max_nodes,
        p_er: a.p_er,
        p_in: a.p_in,
        p_out: a.p_out,
        seed: a.seed,
    };
    let col = synthetic_collection(&spec)?;
    let dir = RunDir::create(&a.output_dir)?;
    echo(&dir, "gen-synthetic", a)?;
    dir.write_text("collection.json", &collection_to_json(&col.graphs, col.labels.as_deref())?)?;
    Ok(Status::Success)
}
