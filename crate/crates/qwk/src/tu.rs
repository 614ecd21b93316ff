//! Loader for the community graph-classification directory layout:
//! `<NAME>_A.txt`, `<NAME>_graph_indicator.txt` and the optional
//! `<NAME>_node_labels.txt`, `<NAME>_edge_labels.txt`,
//! `<NAME>_graph_labels.txt`. Vertex indices are 1-based.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use qwk_core::{GraphDataset, Token, WeightedGraph};

use crate::error::{DataError, Result};

/// Normalizes an integer label to its shortest decimal form (`"+01"` becomes
/// `"1"`). Other tokens are kept as written, minus surrounding whitespace.
pub fn canonical_token(raw: &str) -> Token {
    let t = raw.trim();
    match t.parse::<i64>() {
        Ok(v) => v.to_string(),
        Err(_) => t.to_string(),
    }
}

/// Dataset name of a directory: the prefix of its `*_A.txt` file.
pub fn dataset_prefix(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| DataError::io(dir, e))?;
    let mut found: Vec<String> = entries
        .filter_map(|e| e.ok())
        .filter_map(|e| e.file_name().to_str().and_then(|s| s.strip_suffix("_A.txt")).map(String::from))
        .collect();
    found.sort();
    match found.len() {
        1 => Ok(found.remove(0)),
        0 => Err(DataError::format(dir, None, "no *_A.txt edge list found")),
        _ => Err(DataError::format(dir, None, format!("several edge lists found: {found:?}"))),
    }
}

fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    if !path.exists() {
        return Err(DataError::format(path, None, "required file is missing"));
    }
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

fn optional_lines(path: &Path) -> Result<Option<Vec<(usize, String)>>> {
    if path.exists() {
        lines(path).map(Some)
    } else {
        Ok(None)
    }
}

fn parse_index(path: &Path, line: usize, s: &str) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(DataError::format(path, Some(line), format!("expected a positive integer, got {s:?}"))),
    }
}

/// Loads every graph of a dataset directory. Edges get weight 1.0. Without
/// node labels, vertices are labeled by degree. Graph ids are the 1-based
/// graph numbers.
pub fn load_tu_dataset(dir: &Path) -> Result<GraphDataset> {
    let prefix = dataset_prefix(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{prefix}_{suffix}.txt")) };

    let indicator_path = file("graph_indicator");
    let indicator: Vec<usize> = lines(&indicator_path)?
        .iter()
        .map(|(no, l)| parse_index(&indicator_path, *no, l))
        .collect::<Result<_>>()?;
    if indicator.is_empty() {
        return Err(DataError::format(&indicator_path, None, "graph indicator is empty"));
    }
    let graph_count = *indicator.iter().max().expect("nonempty");
    if indicator.windows(2).any(|w| w[1] < w[0]) {
        return Err(DataError::integrity(&indicator_path, "vertices are not grouped by graph"));
    }

    // Global vertex -> (graph, local index).
    let mut local = Vec::with_capacity(indicator.len());
    let mut sizes = vec![0usize; graph_count];
    for &g in &indicator {
        local.push((g - 1, sizes[g - 1]));
        sizes[g - 1] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(DataError::integrity(&indicator_path, format!("graph {} has no vertices", empty + 1)));
    }

    let node_path = file("node_labels");
    let node_labels = optional_lines(&node_path)?;
    if let Some(nl) = &node_labels {
        if nl.len() != indicator.len() {
            return Err(DataError::integrity(
                &node_path,
                format!("{} node labels for {} vertices", nl.len(), indicator.len()),
            ));
        }
    }

    let edge_path = file("A");
    let edge_lines = lines(&edge_path)?;
    let edge_label_path = file("edge_labels");
    let edge_labels = optional_lines(&edge_label_path)?;
    if let Some(el) = &edge_labels {
        if el.len() != edge_lines.len() {
            return Err(DataError::integrity(
                &edge_label_path,
                format!("{} edge labels for {} edges", el.len(), edge_lines.len()),
            ));
        }
    }

    let mut edges: Vec<BTreeMap<(usize, usize), Option<Token>>> = vec![BTreeMap::new(); graph_count];
    for (k, (no, l)) in edge_lines.iter().enumerate() {
        let parts: Vec<&str> = l.split(',').collect();
        if parts.len() != 2 {
            return Err(DataError::format(&edge_path, Some(*no), format!("expected 'i, j', got {l:?}")));
        }
        let a = parse_index(&edge_path, *no, parts[0])?;
        let b = parse_index(&edge_path, *no, parts[1])?;
        let (Some(&(ga, ua)), Some(&(gb, ub))) = (local.get(a - 1), local.get(b - 1)) else {
            return Err(DataError::integrity(&edge_path, format!("line {no}: vertex out of range in {l:?}")));
        };
        if ga != gb {
            return Err(DataError::integrity(&edge_path, format!("line {no}: edge joins graphs {} and {}", ga + 1, gb + 1)));
        }
        if ua == ub {
            return Err(DataError::integrity(&edge_path, format!("line {no}: self-loop on vertex {a}")));
        }
        let key = (ua.min(ub), ua.max(ub));
        let tok = edge_labels.as_ref().map(|el| canonical_token(&el[k].1));
        match edges[ga].get(&key) {
            Some(prev) if *prev != tok => {
                return Err(DataError::integrity(
                    &edge_label_path,
                    format!("line {no}: the two directions of edge ({a}, {b}) carry different labels"),
                ));
            }
            _ => {
                edges[ga].insert(key, tok);
            }
        }
    }

    let class_path = file("graph_labels");
    let classes = optional_lines(&class_path)?;
    if let Some(c) = &classes {
        if c.len() != graph_count {
            return Err(DataError::integrity(&class_path, format!("{} labels for {graph_count} graphs", c.len())));
        }
    }

    let mut first_vertex = vec![0usize; graph_count];
    for g in 1..graph_count {
        first_vertex[g] = first_vertex[g - 1] + sizes[g - 1];
    }
    let mut graphs = Vec::with_capacity(graph_count);
    for g in 0..graph_count {
        let list: Vec<(usize, usize, f64)> = edges[g].keys().map(|&(u, v)| (u, v, 1.0)).collect();
        let labels = node_labels
            .as_ref()
            .map(|nl| nl[first_vertex[g]..first_vertex[g] + sizes[g]].iter().map(|(_, l)| canonical_token(l)).collect());
        let mut graph = WeightedGraph::from_edges(sizes[g], &list, labels)
            .map_err(|e| e.for_graph((g + 1).to_string()))?
            .with_id((g + 1).to_string());
        if edge_labels.is_some() {
            let el = edges[g].iter().filter_map(|(&k, t)| t.clone().map(|t| (k, t))).collect();
            graph = graph.with_edge_labels(el)?;
        }
        if let Some(c) = &classes {
            graph = graph.with_class(canonical_token(&c[g].1));
        }
        graphs.push(graph);
    }
    Ok(GraphDataset::new(graphs)?)
}
