//! Canonical vertex ordering by color refinement and individualization.
//!
//! Running the numerical pipeline on the canonically ordered graph makes its
//! output independent of the input vertex numbering, down to the last bit:
//! isomorphic inputs reach the eigensolver as identical matrices.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::graph::WeightedGraph;

/// Search leaves explored before settling for the best ordering found so far.
pub const DEFAULT_LEAF_BUDGET: usize = 2048;

/// Result of [`canonical_order`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalOrder {
    /// `order[i]` is the input vertex placed at position `i`.
    pub order: Vec<usize>,
    /// Leaves of the individualization tree that were visited.
    pub leaves: usize,
    /// False when the leaf budget ran out, in which case the ordering may
    /// depend on the input numbering.
    pub complete: bool,
}

struct Refiner<'a> {
    n: usize,
    // Per vertex: (neighbor, weight bits, edge label rank), neighbor ascending.
    adjacency: Vec<Vec<(usize, u64, u32)>>,
    g: &'a WeightedGraph,
    label_rank: Vec<u64>,
    edge_rank: BTreeMap<(usize, usize), u32>,
}

impl Refiner<'_> {
    /// Refines `colors` to the coarsest equitable partition below it.
    /// Colors are dense ranks; their order is invariant under relabeling.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut classes = count_classes(&colors);
        loop {
            let signatures: Vec<(u32, Vec<(u64, u32, u32)>)> = (0..self.n)
                .map(|v| {
                    let mut nbrs: Vec<(u64, u32, u32)> =
                        self.adjacency[v].iter().map(|&(u, w, e)| (w, e, colors[u])).collect();
                    nbrs.sort_unstable();
                    (colors[v], nbrs)
                })
                .collect();
            colors = dense_ranks(&signatures);
            let next = count_classes(&colors);
            if next == classes {
                return colors;
            }
            classes = next;
        }
    }

    /// Comparable description of the graph under `order`.
    fn certificate(&self, order: &[usize]) -> Vec<u64> {
        let n = self.n;
        let mut cert = Vec::with_capacity(n + 2 * n * n);
        cert.extend(order.iter().map(|&v| self.label_rank[v]));
        for &u in order {
            for &v in order {
                cert.push(self.g.weight(u, v).to_bits());
            }
        }
        for (i, &u) in order.iter().enumerate() {
            for &v in &order[i + 1..] {
                let key = (u.min(v), u.max(v));
                cert.push(self.edge_rank.get(&key).map_or(0, |&r| u64::from(r) + 1));
            }
        }
        cert
    }
}

fn count_classes(colors: &[u32]) -> usize {
    colors.iter().max().map_or(0, |&m| m as usize + 1)
}

fn dense_ranks<T: Ord>(keys: &[T]) -> Vec<u32> {
    let mut sorted: Vec<&T> = keys.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).expect("key present") as u32).collect()
}

struct Search<'a, 'g> {
    refiner: &'a Refiner<'g>,
    budget: usize,
    leaves: usize,
    best: Option<(Vec<u64>, Vec<usize>)>,
}

impl Search<'_, '_> {
    fn explore(&mut self, colors: Vec<u32>) {
        if self.leaves >= self.budget {
            return;
        }
        let n = self.refiner.n;
        let classes = count_classes(&colors);
        if classes == n {
            self.leaves += 1;
            let mut order = alloc::vec![0; n];
            for (v, &c) in colors.iter().enumerate() {
                order[c as usize] = v;
            }
            let cert = self.refiner.certificate(&order);
            if self.best.as_ref().is_none_or(|(b, _)| cert < *b) {
                self.best = Some((cert, order));
            }
            return;
        }
        // First color class with more than one member.
        let mut sizes = alloc::vec![0usize; classes];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("non-discrete partition") as u32;
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        for &pick in &cell {
            let split: Vec<(u32, bool)> = (0..n).map(|v| (colors[v], !(v == pick))).collect();
            let next = self.refiner.refine(dense_ranks(&split));
            self.explore(next);
            if self.leaves >= self.budget {
                return;
            }
        }
    }
}

/// Orders vertices so that isomorphic graphs (respecting vertex labels, edge
/// labels and exact weights) get identical permuted forms.
pub fn canonical_order(g: &WeightedGraph, leaf_budget: usize) -> CanonicalOrder {
    let n = g.n();
    let label_rank: Vec<u64> = dense_ranks(g.vertex_labels()).into_iter().map(u64::from).collect();
    let edge_tokens: Vec<&alloc::string::String> = g.edge_labels().values().collect();
    let edge_token_rank = dense_ranks(&edge_tokens);
    let edge_rank: BTreeMap<(usize, usize), u32> =
        g.edge_labels().keys().copied().zip(edge_token_rank).collect();
    let adjacency = (0..n)
        .map(|v| {
            g.neighbors(v)
                .map(|u| {
                    let e = edge_rank.get(&(u.min(v), u.max(v))).map_or(0, |&r| r + 1);
                    (u, g.weight(v, u).to_bits(), e)
                })
                .collect()
        })
        .collect();
    let refiner = Refiner { n, adjacency, g, label_rank, edge_rank };
    let initial: Vec<u32> = refiner.label_rank.iter().map(|&r| r as u32).collect();
    let colors = refiner.refine(initial);
    let mut search = Search { refiner: &refiner, budget: leaf_budget.max(1), leaves: 0, best: None };
    search.explore(colors);
    let complete = search.leaves < search.budget;
    let (_, order) = search.best.expect("at least one leaf");
    CanonicalOrder { order, leaves: search.leaves, complete }
}
