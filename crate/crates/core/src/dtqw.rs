//! Grover-coined discrete-time quantum walks on the arcs of a sparse graph.
//!
//! The state space is the set of arcs (directed edges) of a [`WalkGraph`].
//! Amplitudes are real, so states are plain `f64` vectors indexed by arc
//! position in [`DirectedEdgeSpace::arcs`].
//!
//! All reductions go through [`ordered_sum`], which makes the walk exactly
//! equivariant under vertex relabeling: permuting the input graph permutes
//! the visit distribution bit for bit.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::numeric::{ordered_sum, ordered_sum_iter, sqrt};
use crate::sparsify::WalkGraph;

/// Arcs of a graph and the non-backtracking transitions between them.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedEdgeSpace {
    arcs: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    transitions: Vec<(usize, usize)>,
}

impl DirectedEdgeSpace {
    /// Arcs `(tail, head)` sorted lexicographically.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Position of arc `(u, v)`.
    pub fn index(&self, u: usize, v: usize) -> Option<usize> {
        let lo = *self.offsets.get(u)?;
        let hi = self.offsets[u + 1];
        self.arcs[lo..hi].binary_search_by_key(&v, |a| a.1).ok().map(|i| lo + i)
    }

    /// Arcs leaving `u`, as a range of positions.
    pub fn outgoing(&self, u: usize) -> core::ops::Range<usize> {
        self.offsets[u]..self.offsets[u + 1]
    }

    /// Position of the reversed arc.
    pub fn reverse(&self, a: usize) -> usize {
        let (u, v) = self.arcs[a];
        self.index(v, u).expect("arc space is closed under reversal")
    }

    /// Line-graph transitions `(a, b)` with `head(a) = tail(b)` and `b` not
    /// the reversal of `a`.
    pub fn transitions(&self) -> &[(usize, usize)] {
        &self.transitions
    }
}

/// Replaces every edge by its two arcs and links consecutive,
/// non-backtracking arcs.
pub fn build_edge_space(t: &WalkGraph) -> DirectedEdgeSpace {
    let n = t.n();
    let mut arcs = Vec::with_capacity(2 * t.edges().len());
    let mut offsets = Vec::with_capacity(n + 1);
    for u in 0..n {
        offsets.push(arcs.len());
        arcs.extend(t.neighbors(u).iter().map(|&(v, _)| (u, v)));
    }
    offsets.push(arcs.len());
    let mut transitions = Vec::new();
    for (a, &(u, v)) in arcs.iter().enumerate() {
        for b in offsets[v]..offsets[v + 1] {
            if arcs[b].1 != u {
                transitions.push((a, b));
            }
        }
    }
    DirectedEdgeSpace { arcs, offsets, transitions }
}

/// Square sparse matrix stored as rows of `(column, value)`, columns ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.rows[r].binary_search_by_key(&c, |e| e.0).map_or(0.0, |i| self.rows[r][i].1)
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// `M x`, each entry reduced with [`ordered_sum`].
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut buf = Vec::new();
        self.rows
            .iter()
            .map(|row| {
                buf.clear();
                buf.extend(row.iter().map(|&(c, v)| v * x[c]));
                ordered_sum(&mut buf)
            })
            .collect()
    }

    /// Sum of each row and each column, per index.
    fn in_out_mass(&self) -> Vec<f64> {
        let n = self.dim();
        let mut terms: Vec<Vec<f64>> = vec![Vec::new(); n];
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, v) in row {
                terms[r].push(v);
                terms[c].push(v);
            }
        }
        terms.iter_mut().map(|t| ordered_sum(t)).collect()
    }
}

/// Grover evolution operator. Row is the destination arc, column the source,
/// so that `psi_{t+1} = U psi_t`. The transition `(u, v) -> (v, x)` has
/// amplitude `2 / d_v - [u == x]`.
pub fn grover_operator(space: &DirectedEdgeSpace, t: &WalkGraph) -> SparseMatrix {
    let rows = space
        .arcs()
        .iter()
        .map(|&(v, x)| {
            let coin = 2.0 / t.degree(v) as f64;
            let mut row: Vec<(usize, f64)> = t
                .neighbors(v)
                .iter()
                .map(|&(u, _)| {
                    let src = space.index(u, v).expect("reverse arc exists");
                    (src, if u == x { coin - 1.0 } else { coin })
                })
                .collect();
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    SparseMatrix { rows }
}

/// Weighted Perron-Frobenius operator: the entry for `((u, v), (v, x))` is
/// `w(u, v) + w(v, x)`, reversal pairs (`x == u`) included.
pub fn weighted_pf_operator(space: &DirectedEdgeSpace, t: &WalkGraph) -> SparseMatrix {
    let rows = space
        .arcs()
        .iter()
        .map(|&(u, v)| {
            let w_uv = t.weight(u, v).expect("arc is an edge");
            space.outgoing(v).zip(t.neighbors(v)).map(|(b, &(_, w_vx))| (b, w_uv + w_vx)).collect()
        })
        .collect();
    SparseMatrix { rows }
}

/// Initial amplitudes: the square root of each arc's share of total in-plus-out
/// mass of `tw`. Falls back to the uniform state when `tw` carries no mass.
pub fn initial_state(space: &DirectedEdgeSpace, tw: &SparseMatrix) -> Vec<f64> {
    let m = space.len();
    let mass = tw.in_out_mass();
    let total = ordered_sum_iter(mass.iter().copied());
    if !(total > 0.0) {
        log::warn!("weighted Perron-Frobenius operator is zero; using a uniform initial state");
        return vec![1.0 / sqrt(m as f64); m];
    }
    mass.iter().map(|&x| sqrt(x / total)).collect()
}

/// Entry-wise indicator of `m > 0`.
pub fn positive_support(m: &DMatrix<f64>) -> DMatrix<u8> {
    m.map(|x| u8::from(x > 0.0))
}

/// 0/1 adjacency of the directed line graph: `T[(a, b)] = 1` for every
/// non-backtracking transition `a -> b`.
pub fn line_graph_adjacency(space: &DirectedEdgeSpace) -> DMatrix<u8> {
    let mut m = DMatrix::zeros(space.len(), space.len());
    for &(a, b) in space.transitions() {
        m[(a, b)] = 1;
    }
    m
}

/// Everything needed to evolve a walk on one graph.
#[derive(Debug, Clone)]
pub struct WalkSystem {
    pub space: DirectedEdgeSpace,
    pub evolution: SparseMatrix,
    pub weighted_pf: SparseMatrix,
    pub psi0: Vec<f64>,
}

impl WalkSystem {
    pub fn new(t: &WalkGraph) -> Self {
        let space = build_edge_space(t);
        let evolution = grover_operator(&space, t);
        let weighted_pf = weighted_pf_operator(&space, t);
        let psi0 = initial_state(&space, &weighted_pf);
        WalkSystem { space, evolution, weighted_pf, psi0 }
    }

    /// States `psi_0, ..., psi_horizon`.
    pub fn states(&self, horizon: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(horizon + 1);
        out.push(self.psi0.clone());
        for t in 0..horizon {
            let next = self.evolution.apply(&out[t]);
            out.push(next);
        }
        out
    }
}

/// Time-averaged probability of the walk sitting on each arc.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitDistribution {
    pub arcs: Vec<(usize, usize)>,
    pub p: Vec<f64>,
    pub horizon: usize,
}

impl VisitDistribution {
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.arcs.binary_search(&(u, v)).ok().map(|i| self.p[i])
    }

    pub fn total(&self) -> f64 {
        ordered_sum_iter(self.p.iter().copied())
    }
}

/// `p(a) = (1 / (T + 1)) sum_{t=0..T} psi_t(a)^2` with `psi_t = U^t psi_0`;
/// the diagonal of the time-averaged density matrix, computed without
/// forming it.
pub fn visit_distribution(sys: &WalkSystem, horizon: usize) -> VisitDistribution {
    let mut psi = sys.psi0.clone();
    let mut acc: Vec<f64> = psi.iter().map(|x| x * x).collect();
    for _ in 0..horizon {
        psi = sys.evolution.apply(&psi);
        for (a, x) in acc.iter_mut().zip(&psi) {
            *a += x * x;
        }
    }
    let scale = 1.0 / (horizon as f64 + 1.0);
    VisitDistribution {
        arcs: sys.space.arcs().to_vec(),
        p: acc.into_iter().map(|a| a * scale).collect(),
        horizon,
    }
}
