//! Weisfeiler-Lehman label refinement, directed edge labels and the label
//! distributions that serve as graph features.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dtqw::VisitDistribution;
use crate::error::{Error, Result};
use crate::graph::{Token, WeightedGraph};
use crate::numeric::ordered_sum;
use crate::sparsify::WalkGraph;

/// Vertex adjacency and labels, as seen by label refinement.
pub trait LabeledStructure {
    fn vertex_count(&self) -> usize;
    fn labels(&self) -> &[Token];
    fn neighbor_ids(&self, u: usize) -> Vec<usize>;
}

impl LabeledStructure for WeightedGraph {
    fn vertex_count(&self) -> usize {
        self.n()
    }

    fn labels(&self) -> &[Token] {
        self.vertex_labels()
    }

    fn neighbor_ids(&self, u: usize) -> Vec<usize> {
        self.neighbors(u).collect()
    }
}

impl LabeledStructure for WalkGraph {
    fn vertex_count(&self) -> usize {
        self.n()
    }

    fn labels(&self) -> &[Token] {
        self.vertex_labels()
    }

    fn neighbor_ids(&self, u: usize) -> Vec<usize> {
        self.neighbors(u).iter().map(|&(v, _)| v).collect()
    }
}

impl<S: LabeledStructure> LabeledStructure for &S {
    fn vertex_count(&self) -> usize {
        (*self).vertex_count()
    }

    fn labels(&self) -> &[Token] {
        (*self).labels()
    }

    fn neighbor_ids(&self, u: usize) -> Vec<usize> {
        (*self).neighbor_ids(u)
    }
}

/// Refined labels for a whole collection.
#[derive(Debug, Clone, PartialEq)]
pub struct WlLabels {
    /// `labels[g][h][v]`: label of vertex `v` of graph `g` after `h` rounds.
    pub labels: Vec<Vec<Vec<Token>>>,
    /// One identifier per round, derived from that round's alphabet.
    pub label_space_ids: Vec<String>,
}

/// Weisfeiler-Lehman refinement over a collection, `h_max` rounds.
///
/// Every round compresses `(own label, sorted neighbor labels)` into a new
/// label through one table shared by all graphs. Table entries are numbered in
/// sorted signature order, so the numbering depends only on the set of
/// signatures present, not on graph or vertex order.
pub fn wl_refine_dataset<S: LabeledStructure>(graphs: &[S], h_max: usize) -> WlLabels {
    let mut alphabet: Vec<&Token> = graphs.iter().flat_map(|g| g.labels()).collect();
    alphabet.sort_unstable();
    alphabet.dedup();
    let mut ids: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| g.labels().iter().map(|t| alphabet.binary_search(&t).expect("token in alphabet") as u32).collect())
        .collect();
    let mut labels: Vec<Vec<Vec<Token>>> = graphs.iter().map(|g| alloc::vec![g.labels().to_vec()]).collect();
    let mut label_space_ids = alloc::vec![space_id(0, alphabet.iter().map(|t| t.as_bytes()))];

    let neighbors: Vec<Vec<Vec<usize>>> =
        graphs.iter().map(|g| (0..g.vertex_count()).map(|u| g.neighbor_ids(u)).collect()).collect();

    for round in 1..=h_max {
        let signatures: Vec<Vec<(u32, Vec<u32>)>> = ids
            .iter()
            .zip(&neighbors)
            .map(|(gid, nbrs)| {
                (0..gid.len())
                    .map(|v| {
                        let mut ns: Vec<u32> = nbrs[v].iter().map(|&u| gid[u]).collect();
                        ns.sort_unstable();
                        (gid[v], ns)
                    })
                    .collect()
            })
            .collect();
        let mut table: Vec<&(u32, Vec<u32>)> = signatures.iter().flatten().collect();
        table.sort_unstable();
        table.dedup();
        ids = signatures
            .iter()
            .map(|sig| sig.iter().map(|s| table.binary_search(&s).expect("signature in table") as u32).collect())
            .collect();
        for (g, gid) in ids.iter().enumerate() {
            labels[g].push(gid.iter().map(|id| format!("wl{round}:{id}")).collect());
        }
        let table_bytes: Vec<Vec<u8>> = table
            .iter()
            .map(|(own, ns)| {
                let mut b = own.to_le_bytes().to_vec();
                ns.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
                b
            })
            .collect();
        label_space_ids.push(space_id(round, table_bytes.iter().map(Vec::as_slice)));
    }
    WlLabels { labels, label_space_ids }
}

/// Labels of `g` after `h` refinement rounds, using a table built from `g`
/// alone.
pub fn wl_refine<S: LabeledStructure>(g: &S, h: usize) -> Vec<Token> {
    let mut out = wl_refine_dataset(core::slice::from_ref(g), h);
    out.labels.swap_remove(0).swap_remove(h)
}

fn space_id<'a>(round: usize, entries: impl Iterator<Item = &'a [u8]>) -> String {
    // FNV-1a over length-prefixed entries.
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for e in entries {
        feed(&(e.len() as u64).to_le_bytes());
        feed(e);
    }
    format!("h{round}-{hash:016x}")
}

/// Canonical key of a directed edge label: length-prefixed tokens for the
/// tail label, the optional edge label and the head label, in that order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeLabelKey(String);

impl EdgeLabelKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EdgeLabelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered composite label of an arc.
pub fn directed_edge_label(tail: &str, head: &str, edge: Option<&str>) -> EdgeLabelKey {
    let mut key = String::new();
    for tok in [Some(tail), edge, Some(head)].into_iter().flatten() {
        key.push_str(&format!("{}:{}", tok.len(), tok));
    }
    EdgeLabelKey(key)
}

/// Probability mass per directed edge label. Absent keys have mass zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelDistribution {
    pub masses: BTreeMap<EdgeLabelKey, f64>,
    /// Refinement round the vertex labels came from.
    pub h: usize,
    /// Identifies the label alphabet the keys were drawn from.
    pub label_space_id: String,
}

impl LabelDistribution {
    pub fn get(&self, key: &EdgeLabelKey) -> f64 {
        self.masses.get(key).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.masses.values().sum()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Builds a distribution directly from masses.
    pub fn from_masses(masses: BTreeMap<EdgeLabelKey, f64>, h: usize, label_space_id: impl Into<String>) -> Self {
        LabelDistribution { masses, h, label_space_id: label_space_id.into() }
    }
}

/// Sums arc visit probabilities over arcs sharing a directed edge label.
pub fn label_distribution(
    vd: &VisitDistribution,
    walk: &WalkGraph,
    labels: &[Token],
    h: usize,
    label_space_id: &str,
) -> Result<LabelDistribution> {
    if labels.len() != walk.n() {
        return Err(Error::integrity(format!("{} labels for {} vertices", labels.len(), walk.n())));
    }
    let mut groups: BTreeMap<EdgeLabelKey, Vec<f64>> = BTreeMap::new();
    for (&(u, v), &p) in vd.arcs.iter().zip(&vd.p) {
        if u >= walk.n() || v >= walk.n() || walk.weight(u, v).is_none() {
            return Err(Error::integrity(format!("arc ({u}, {v}) is not an edge of the walk graph")));
        }
        let key = directed_edge_label(&labels[u], &labels[v], walk.edge_label(u, v).map(String::as_str));
        groups.entry(key).or_default().push(p);
    }
    let masses = groups.into_iter().map(|(k, mut ps)| (k, ordered_sum(&mut ps))).collect();
    Ok(LabelDistribution { masses, h, label_space_id: label_space_id.into() })
}
