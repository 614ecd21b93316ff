//! Weighted, labeled undirected graphs and graph collections.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Discrete vertex or edge label. Opaque after ingestion.
pub type Token = String;

/// Undirected graph with a symmetric nonnegative weight matrix.
///
/// `weights[(u, v)] > 0` means `{u, v}` is an edge. Edge labels are keyed by
/// the ordered pair `(min(u, v), max(u, v))`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    weights: DMatrix<f64>,
    vertex_labels: Vec<Token>,
    edge_labels: BTreeMap<(usize, usize), Token>,
    graph_id: Option<String>,
    class_label: Option<String>,
}

impl WeightedGraph {
    /// Builds a graph from a dense weight matrix.
    ///
    /// When `vertex_labels` is `None` every vertex is labeled with its
    /// unweighted degree.
    pub fn new(weights: DMatrix<f64>, vertex_labels: Option<Vec<Token>>) -> Result<Self> {
        validate_weights(&weights)?;
        let n = weights.nrows();
        let vertex_labels = match vertex_labels {
            Some(labels) => {
                if labels.len() != n {
                    return Err(Error::validation(format!(
                        "{} vertex labels for {} vertices",
                        labels.len(),
                        n
                    )));
                }
                labels
            }
            None => degree_tokens(&weights),
        };
        Ok(WeightedGraph {
            weights,
            vertex_labels,
            edge_labels: BTreeMap::new(),
            graph_id: None,
            class_label: None,
        })
    }

    /// Builds a graph from an edge list over `n` vertices.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, f64)],
        vertex_labels: Option<Vec<Token>>,
    ) -> Result<Self> {
        let mut w = DMatrix::zeros(n, n);
        for &(u, v, x) in edges {
            if u >= n || v >= n {
                return Err(Error::integrity(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            w[(u, v)] = x;
            w[(v, u)] = x;
        }
        Self::new(w, vertex_labels)
    }

    /// Attaches edge labels. Every key must name an existing edge.
    pub fn with_edge_labels(mut self, labels: BTreeMap<(usize, usize), Token>) -> Result<Self> {
        let mut normalized = BTreeMap::new();
        for ((u, v), tok) in labels {
            let key = (u.min(v), u.max(v));
            if key.1 >= self.n() || self.weights[key] <= 0.0 {
                return Err(Error::validation(format!(
                    "edge label on ({u}, {v}) which is not an edge"
                )));
            }
            normalized.insert(key, tok);
        }
        self.edge_labels = normalized;
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.graph_id = Some(id.into());
        self
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.class_label = Some(class.into());
        self
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.weights[(u, v)]
    }

    pub fn vertex_labels(&self) -> &[Token] {
        &self.vertex_labels
    }

    pub fn edge_labels(&self) -> &BTreeMap<(usize, usize), Token> {
        &self.edge_labels
    }

    pub fn edge_label(&self, u: usize, v: usize) -> Option<&Token> {
        self.edge_labels.get(&(u.min(v), u.max(v)))
    }

    pub fn has_edge_labels(&self) -> bool {
        !self.edge_labels.is_empty()
    }

    pub fn graph_id(&self) -> Option<&str> {
        self.graph_id.as_deref()
    }

    pub fn class_label(&self) -> Option<&str> {
        self.class_label.as_deref()
    }

    /// Vertices joined to `u` by a positive weight, ascending.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&v| v != u && self.weights[(u, v)] > 0.0)
    }

    /// Unweighted degree.
    pub fn degree(&self, u: usize) -> usize {
        self.neighbors(u).count()
    }

    /// Edges as `(u, v, w)` with `u < v`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                let w = self.weights[(u, v)];
                if w > 0.0 {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Connected components of the positive-weight support, each sorted,
    /// ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            let mut comp = Vec::new();
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for v in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.n() > 0 && self.components().len() == 1
    }

    /// Relabels vertices so that new vertex `i` is old vertex `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        let n = self.n();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&o| o >= n || core::mem::replace(&mut seen[o], true)) {
            return Err(Error::integrity("permutation does not match vertex count"));
        }
        self.induced(order)
    }

    /// Subgraph induced by `vertices`, in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let n = self.n();
        if vertices.iter().any(|&v| v >= n) {
            return Err(Error::integrity("induced vertex out of range"));
        }
        let k = vertices.len();
        let weights = DMatrix::from_fn(k, k, |i, j| self.weights[(vertices[i], vertices[j])]);
        let mut position = vec![usize::MAX; n];
        for (i, &v) in vertices.iter().enumerate() {
            position[v] = i;
        }
        let edge_labels = self
            .edge_labels
            .iter()
            .filter_map(|(&(u, v), tok)| {
                let (a, b) = (position[u], position[v]);
                (a != usize::MAX && b != usize::MAX).then(|| ((a.min(b), a.max(b)), tok.clone()))
            })
            .collect();
        Ok(WeightedGraph {
            weights,
            vertex_labels: vertices.iter().map(|&v| self.vertex_labels[v].clone()).collect(),
            edge_labels,
            graph_id: self.graph_id.clone(),
            class_label: self.class_label.clone(),
        })
    }

    /// Raises every off-diagonal weight to at least `floor`, making the
    /// graph complete.
    pub fn with_weight_floor(&self, floor: f64) -> Self {
        let mut g = self.clone();
        let n = g.n();
        for u in 0..n {
            for v in 0..n {
                if u != v && g.weights[(u, v)] < floor {
                    g.weights[(u, v)] = floor;
                }
            }
        }
        g
    }

    /// Replaces vertex labels with unweighted degree tokens.
    pub fn degree_labels(&self) -> Self {
        let mut g = self.clone();
        g.vertex_labels = degree_tokens(&g.weights);
        g
    }

    /// Every vertex and edge label token used by this graph.
    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.vertex_labels.iter().chain(self.edge_labels.values())
    }
}

/// Replaces vertex labels with tokens of the unweighted degree.
pub fn degree_labels(g: &WeightedGraph) -> WeightedGraph {
    g.degree_labels()
}

fn degree_tokens(w: &DMatrix<f64>) -> Vec<Token> {
    let n = w.nrows();
    (0..n)
        .map(|u| (0..n).filter(|&v| v != u && w[(u, v)] > 0.0).count().to_string())
        .collect()
}

fn validate_weights(w: &DMatrix<f64>) -> Result<()> {
    let n = w.nrows();
    if n == 0 || w.ncols() != n {
        return Err(Error::validation(format!(
            "weight matrix must be square and nonempty, got {}x{}",
            w.nrows(),
            w.ncols()
        )));
    }
    for u in 0..n {
        if w[(u, u)] != 0.0 {
            return Err(Error::validation(format!("nonzero diagonal weight at vertex {u}")));
        }
        for v in 0..n {
            let x = w[(u, v)];
            if !x.is_finite() || x < 0.0 {
                return Err(Error::validation(format!("weight ({u}, {v}) = {x} is not a nonnegative number")));
            }
            if x.to_bits() != w[(v, u)].to_bits() {
                return Err(Error::validation(format!(
                    "asymmetric weights: ({u}, {v}) = {x} but ({v}, {u}) = {}",
                    w[(v, u)]
                )));
            }
        }
    }
    Ok(())
}

/// An ordered collection of graphs with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphDataset {
    graphs: Vec<WeightedGraph>,
    label_alphabet: BTreeSet<Token>,
}

impl GraphDataset {
    /// Graphs without an id get their position as id.
    pub fn new(graphs: Vec<WeightedGraph>) -> Result<Self> {
        let mut ids = BTreeSet::new();
        let mut out = Vec::with_capacity(graphs.len());
        for (i, g) in graphs.into_iter().enumerate() {
            let g = if g.graph_id.is_none() { g.with_id(i.to_string()) } else { g };
            let id = g.graph_id.clone().unwrap_or_default();
            if !ids.insert(id.clone()) {
                return Err(Error::validation(format!("duplicate graph id {id:?}")));
            }
            out.push(g);
        }
        let label_alphabet = out.iter().flat_map(|g| g.tokens().cloned()).collect();
        Ok(GraphDataset { graphs: out, label_alphabet })
    }

    pub fn graphs(&self) -> &[WeightedGraph] {
        &self.graphs
    }

    pub fn into_graphs(self) -> Vec<WeightedGraph> {
        self.graphs
    }

    pub fn label_alphabet(&self) -> &BTreeSet<Token> {
        &self.label_alphabet
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.graphs.iter().map(|g| g.graph_id().unwrap_or_default().to_string()).collect()
    }

    /// Distinct class labels present in the collection.
    pub fn classes(&self) -> BTreeSet<String> {
        self.graphs.iter().filter_map(|g| g.class_label().map(String::from)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(leaves: usize) -> WeightedGraph {
        let edges: Vec<_> = (1..=leaves).map(|l| (0, l, 1.0)).collect();
        WeightedGraph::from_edges(leaves + 1, &edges, None).unwrap()
    }

    #[test]
    fn degree_labels_on_star() {
        let g = star(3).degree_labels();
        assert_eq!(g.vertex_labels(), ["3", "1", "1", "1"]);
    }

    #[test]
    fn degree_labels_on_complete_graph() {
        let w = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 0.5 });
        let g = WeightedGraph::new(w, Some(vec!["x".into(); 4])).unwrap();
        assert!(degree_labels(&g).vertex_labels().iter().all(|l| l == "3"));
    }

    #[test]
    fn degree_labels_on_edgeless_graph() {
        let g = WeightedGraph::new(DMatrix::zeros(3, 3), None).unwrap();
        assert!(g.vertex_labels().iter().all(|l| l == "0"));
        assert_eq!(g.components().len(), 3);
    }

    #[test]
    fn rejects_asymmetric_and_negative_weights() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = 1.0;
        w[(1, 0)] = 2.0;
        assert!(matches!(WeightedGraph::new(w, None), Err(Error::Validation(_))));
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = -1.0;
        w[(1, 0)] = -1.0;
        assert!(matches!(WeightedGraph::new(w, None), Err(Error::Validation(_))));
    }

    #[test]
    fn edge_labels_must_reference_edges() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 1.0)], None).unwrap();
        let bad = BTreeMap::from([((1, 2), "e".to_string())]);
        assert!(g.clone().with_edge_labels(bad).is_err());
        let ok = BTreeMap::from([((1, 0), "e".to_string())]);
        let g = g.with_edge_labels(ok).unwrap();
        assert_eq!(g.edge_label(0, 1).map(String::as_str), Some("e"));
    }

    #[test]
    fn permutation_moves_labels_and_weights() {
        let g = WeightedGraph::from_edges(3, &[(0, 1, 2.0), (1, 2, 3.0)], Some(vec!["a".into(), "b".into(), "c".into()]))
            .unwrap()
            .with_edge_labels(BTreeMap::from([((1, 2), "e".to_string())]))
            .unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.vertex_labels(), ["c", "a", "b"]);
        assert_eq!(p.weight(1, 2), 2.0);
        assert_eq!(p.weight(0, 2), 3.0);
        assert_eq!(p.edge_label(2, 0).map(String::as_str), Some("e"));
        assert!(g.permuted(&[0, 0, 1]).is_err());
    }

    #[test]
    fn dataset_ids_must_be_unique() {
        let g = star(2);
        assert!(GraphDataset::new(vec![g.clone().with_id("a"), g.clone().with_id("a")]).is_err());
        let ds = GraphDataset::new(vec![g.clone(), g.with_id("x")]).unwrap();
        assert_eq!(ds.ids(), ["0", "x"]);
        assert_eq!(ds.label_alphabet().iter().collect::<Vec<_>>(), ["1", "2"]);
    }
}
