//! Graph kernels from time-averaged quantum walk visits.
//!
//! A graph is reduced to its commute-time minimum spanning tree (or kept with
//! commute-time weights when sparse), a Grover walk is run on its arcs from a
//! weighted Perron-Frobenius initial state, and the time-averaged arc visit
//! probabilities are pooled by directed edge label. Graphs are compared
//! through these label distributions.
#![no_std]

extern crate alloc;

pub mod canonical;
pub mod dtqw;
pub mod embed;
pub mod error;
pub mod finance;
pub mod graph;
pub mod kernels;
pub mod labels;
pub mod numeric;
pub mod pipeline;
pub mod sparsify;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{GraphDataset, Token, WeightedGraph};
pub use kernels::{gram, k_dp, k_js, js_divergence, shannon_entropy, GramMatrix, KernelKind};
pub use labels::{EdgeLabelKey, LabelDistribution};
pub use pipeline::{extract_features, GraphFeatures, PipelineConfig};
pub use sparsify::{SparsifyBranch, WalkGraph};
