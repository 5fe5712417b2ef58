//! JSON file formats for graphs, collections and partitions.
//!
//! ```text
//! Graph       {"n": 3, "edges": [[0, 1, 1.0], [1, 2, 0.5]], "masses": [..]?}
//! Collection  {"graphs": [Graph, ...], "labels": [..]?}
//! Partition   {"assign": [0, 1, 1]}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::coarsening::Partition;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Float(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CollectionRecord {
    pub graphs: Vec<GraphRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionRecord {
    pub assign: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionListRecord {
    pub partitions: Vec<PartitionRecord>,
}

/// A loaded collection: graphs in file order plus optional labels.
#[derive(Debug, Clone)]
pub struct Collection {
    pub graphs: Vec<Graph>,
    pub labels: Option<Vec<Label>>,
}

impl GraphRecord {
    pub fn into_graph(self) -> Result<Graph> {
        Graph::new(self.n, self.edges, self.masses)
    }

    pub fn from_graph(g: &Graph) -> Self {
        Self {
            n: g.n_nodes(),
            edges: g.edges().to_vec(),
            masses: g.node_masses().map(<[f64]>::to_vec),
        }
    }
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    serde_json::from_str::<GraphRecord>(text)?.into_graph()
}

pub fn parse_collection(text: &str) -> Result<Collection> {
    let rec: CollectionRecord = serde_json::from_str(text)?;
    if let Some(labels) = &rec.labels {
        if labels.len() != rec.graphs.len() {
            return Err(Error::DimensionMismatch {
                what: "collection labels",
                expected: rec.graphs.len(),
                found: labels.len(),
            });
        }
    }
    let graphs = rec
        .graphs
        .into_iter()
        .enumerate()
        .map(|(k, g)| {
            g.into_graph().map_err(|e| match e {
                Error::InvariantViolation(msg) => Error::InvariantViolation(format!("graph {k}: {msg}")),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Collection {
        graphs,
        labels: rec.labels,
    })
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    parse_graph(&fs::read_to_string(path)?)
}

/// Loads a collection file; a bare graph file is accepted as a one-graph collection.
pub fn load_collection(path: impl AsRef<Path>) -> Result<Collection> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    if value.get("graphs").is_none() && value.get("n").is_some() {
        return Ok(Collection {
            graphs: vec![parse_graph(&text)?],
            labels: None,
        });
    }
    parse_collection(&text)
}

pub fn collection_to_json(graphs: &[Graph], labels: Option<&[Label]>) -> Result<String> {
    let rec = CollectionRecord {
        graphs: graphs.iter().map(GraphRecord::from_graph).collect(),
        labels: labels.map(<[Label]>::to_vec),
    };
    Ok(serde_json::to_string_pretty(&rec)?)
}

pub fn parse_partition(text: &str) -> Result<Partition> {
    let rec: PartitionRecord = serde_json::from_str(text)?;
    Partition::from_labels(&rec.assign)
}

/// Parses either `{"partitions": [...]}` or a single `{"assign": [...]}`.
pub fn parse_partitions(text: &str) -> Result<Vec<Partition>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("assign").is_some() {
        return Ok(vec![parse_partition(text)?]);
    }
    let rec: PartitionListRecord = serde_json::from_value(value)?;
    rec.partitions
        .iter()
        .map(|p| Partition::from_labels(&p.assign))
        .collect()
}

pub fn load_partitions(path: impl AsRef<Path>) -> Result<Vec<Partition>> {
    parse_partitions(&fs::read_to_string(path)?)
}

pub fn partitions_to_json(partitions: &[Partition]) -> Result<String> {
    let rec = PartitionListRecord {
        partitions: partitions
            .iter()
            .map(|p| PartitionRecord {
                assign: p.assign().to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&rec)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_graph_collection() {
        let text = r#"{"graphs": [
            {"n": 3, "edges": [[0, 1, 1.0], [1, 2, 2.0]]},
            {"n": 2, "edges": [[0, 1, 0.5]], "masses": [1.0, 3.0]}
        ], "labels": [0, 1.5]}"#;
        let c = parse_collection(text).unwrap();
        assert_eq!(c.graphs.len(), 2);
        assert_eq!(c.graphs[0].n_nodes(), 3);
        assert_eq!(c.graphs[1].node_masses(), Some(&[1.0, 3.0][..]));
    }

    #[test]
    fn self_loop_is_invariant_violation() {
        let err = parse_graph(r#"{"n": 2, "edges": [[0, 0, 1.0]]}"#).unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(msg) if msg.contains("self-loop")));
    }

    #[test]
    fn missing_n_is_parse_error() {
        let err = parse_graph(r#"{"edges": [[0, 1, 1.0]]}"#).unwrap_err();
        match err {
            Error::Parse { message, line, .. } => {
                assert!(message.contains("`n`"));
                assert_eq!(line, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn partitions_reindex_labels() {
        let ps = parse_partitions(r#"{"partitions": [{"assign": [7, 3, 7]}]}"#).unwrap();
        assert_eq!(ps[0].assign(), &[0, 1, 0]);
        let single = parse_partitions(r#"{"assign": [0, 0, 1]}"#).unwrap();
        assert_eq!(single[0].n_clusters(), 2);
    }
}
