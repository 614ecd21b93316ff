//! Commute time minimum spanning trees and the density-based sparsification
//! policy.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{Token, WeightedGraph};
use crate::spectral::{commute_time_matrix, modified_commute_matrix};

/// Graphs with more than this many edges per vertex are reduced to their
/// commute time spanning tree.
pub const DENSE_EDGE_VERTEX_RATIO: f64 = 1.5;

/// Disjoint-set forest with union by rank and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the sets of `a` and `b`; false if they were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            core::cmp::Ordering::Less => self.parent[ra] = rb,
            core::cmp::Ordering::Greater => self.parent[rb] = ra,
            core::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Which branch of the sparsification policy produced a [`WalkGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SparsifyBranch {
    /// Minimum spanning tree over the modified commute times; edges carry `Q`.
    SpanningTree,
    /// Original edge set re-weighted with commute times `C`.
    CommuteWeighted,
}

/// The sparse weighted structure a quantum walk runs on.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
    vertex_labels: Vec<Token>,
    edge_labels: BTreeMap<(usize, usize), Token>,
    branch: SparsifyBranch,
}

impl WalkGraph {
    /// Edge endpoints are normalized to `u < v`; weights must be positive.
    /// Edge labels on pairs that are not edges are dropped.
    pub fn new(
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        vertex_labels: Vec<Token>,
        edge_labels: &BTreeMap<(usize, usize), Token>,
        branch: SparsifyBranch,
    ) -> Result<Self> {
        if vertex_labels.len() != n {
            return Err(Error::validation(format!("{} labels for {n} vertices", vertex_labels.len())));
        }
        let mut edges: Vec<_> = edges.into_iter().map(|(u, v, w)| (u.min(v), u.max(v), w)).collect();
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut adjacency = vec![Vec::new(); n];
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            if v >= n || u == v {
                return Err(Error::integrity(format!("invalid edge ({u}, {v}) for n = {n}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::validation(format!("edge ({u}, {v}) has non-positive weight {w}")));
            }
            if i > 0 && (edges[i - 1].0, edges[i - 1].1) == (u, v) {
                return Err(Error::validation(format!("duplicate edge ({u}, {v})")));
            }
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        if branch == SparsifyBranch::SpanningTree {
            let mut uf = UnionFind::new(n);
            if edges.len() + 1 != n || !edges.iter().all(|&(u, v, _)| uf.union(u, v)) {
                return Err(Error::validation("spanning tree edge set is not a tree"));
            }
        }
        let edge_labels = edge_labels
            .iter()
            .filter(|(k, _)| edges.binary_search_by(|e| (e.0, e.1).cmp(k)).is_ok())
            .map(|(k, t)| (*k, t.clone()))
            .collect();
        Ok(WalkGraph { n, edges, adjacency, vertex_labels, edge_labels, branch })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(u, v, w)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `u` with edge weights, ascending by neighbor.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency[u].binary_search_by_key(&v, |&(x, _)| x).ok().map(|i| self.adjacency[u][i].1)
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

    pub fn branch(&self) -> SparsifyBranch {
        self.branch
    }

    pub fn is_tree(&self) -> bool {
        self.branch == SparsifyBranch::SpanningTree
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// Dense weighted graph with the same edges and labels.
    pub fn to_weighted_graph(&self) -> Result<WeightedGraph> {
        WeightedGraph::from_edges(self.n, &self.edges, Some(self.vertex_labels.clone()))?
            .with_edge_labels(self.edge_labels.clone())
    }
}

/// Kruskal minimum spanning tree of `g`'s support weighted by `q`.
///
/// Ties are broken by `(q, min(u, v), max(u, v))`.
pub fn mst_over_q(g: &WeightedGraph, q: &DMatrix<f64>) -> Result<WalkGraph> {
    let n = g.n();
    if q.shape() != (n, n) {
        return Err(Error::integrity(format!("Q is {:?} for a graph on {n} vertices", q.shape())));
    }
    let mut candidates = Vec::new();
    for (u, v, _) in g.edges() {
        let w = q[(u, v)];
        if w.to_bits() != q[(v, u)].to_bits() {
            return Err(Error::validation(format!("Q is not symmetric at ({u}, {v})")));
        }
        if !(w > 0.0) {
            return Err(Error::validation(format!("Q({u}, {v}) = {w} is not positive on an edge")));
        }
        candidates.push((u, v, w));
    }
    candidates.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));

    let mut uf = UnionFind::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for (u, v, w) in candidates {
        if uf.union(u, v) {
            tree.push((u, v, w));
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    if tree.len() + 1 != n {
        return Err(Error::Disconnected { components: g.components() });
    }
    WalkGraph::new(n, tree, g.vertex_labels().to_vec(), g.edge_labels(), SparsifyBranch::SpanningTree)
}

/// Sparse walk substrate for `g`: the spanning tree over `Q` when the graph
/// is dense, otherwise the original edges re-weighted with commute times.
pub fn sparsification_policy(g: &WeightedGraph) -> Result<WalkGraph> {
    let ct = commute_time_matrix(g)?;
    let edges = g.edges();
    let ratio = edges.len() as f64 / g.n() as f64;
    if ratio > DENSE_EDGE_VERTEX_RATIO {
        let q = modified_commute_matrix(g, &ct)?;
        mst_over_q(g, &q)
    } else {
        let reweighted = edges.iter().map(|&(u, v, _)| (u, v, ct.commute[(u, v)])).collect();
        WalkGraph::new(g.n(), reweighted, g.vertex_labels().to_vec(), g.edge_labels(), SparsifyBranch::CommuteWeighted)
    }
}
