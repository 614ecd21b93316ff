//! JSON graph files: one object or an array of objects with fields `id`,
//! `class`, `n`, `weights` (dense, row-major), `vertex_labels` and
//! `edge_labels` (`[u, v, "token"]` triples, 0-based).

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use qwk_core::{GraphDataset, WeightedGraph};
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    pub n: usize,
    pub weights: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex_labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_labels: Vec<(usize, usize, String)>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<GraphRecord>),
    One(GraphRecord),
}

impl GraphRecord {
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let n = g.n();
        GraphRecord {
            id: g.graph_id().map(String::from),
            class: g.class_label().map(String::from),
            n,
            weights: (0..n).map(|u| (0..n).map(|v| g.weight(u, v)).collect()).collect(),
            vertex_labels: Some(g.vertex_labels().to_vec()),
            edge_labels: g.edge_labels().iter().map(|(&(u, v), t)| (u, v, t.clone())).collect(),
        }
    }

    pub fn to_graph(&self) -> qwk_core::Result<WeightedGraph> {
        let n = self.n;
        if self.weights.len() != n || self.weights.iter().any(|r| r.len() != n) {
            return Err(qwk_core::Error::Validation(format!("weights are not {n}x{n}")));
        }
        let w = DMatrix::from_fn(n, n, |u, v| self.weights[u][v]);
        let mut g = WeightedGraph::new(w, self.vertex_labels.clone())?;
        if !self.edge_labels.is_empty() {
            g = g.with_edge_labels(self.edge_labels.iter().map(|(u, v, t)| ((*u, *v), t.clone())).collect())?;
        }
        if let Some(id) = &self.id {
            g = g.with_id(id.clone());
        }
        if let Some(c) = &self.class {
            g = g.with_class(c.clone());
        }
        Ok(g)
    }
}

/// Parses JSON text holding one graph or an array of graphs.
pub fn parse_graphs(text: &str, path: &Path) -> Result<Vec<WeightedGraph>> {
    let parsed: OneOrMany = serde_json::from_str(text)
        .map_err(|e| DataError::format(path, Some(e.line()), e.to_string()))?;
    let records = match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(r) => vec![r],
    };
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            r.to_graph().map_err(|e| DataError::Core(e.for_graph(r.id.clone().unwrap_or_else(|| i.to_string()))))
        })
        .collect()
}

pub fn load_weighted_json(path: &Path) -> Result<GraphDataset> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    Ok(GraphDataset::new(parse_graphs(&text, path)?)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer(&mut out, value).map_err(|e| DataError::io(path, e.into()))?;
    out.write_all(b"\n").and_then(|_| out.flush()).map_err(|e| DataError::io(path, e))
}

/// Writes the graphs as a JSON array.
pub fn save_weighted_json(graphs: &[WeightedGraph], path: &Path) -> Result<()> {
    let records: Vec<GraphRecord> = graphs.iter().map(GraphRecord::from_graph).collect();
    write_json(path, &records)
}

/// Writes a single graph as a JSON object.
pub fn save_graph_json(g: &WeightedGraph, path: &Path) -> Result<()> {
    write_json(path, &GraphRecord::from_graph(g))
}
