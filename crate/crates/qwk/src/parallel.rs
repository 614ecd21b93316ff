//! Rayon-backed versions of the per-graph pipeline and Gram assembly.
//!
//! Every Gram cell is a pure function of two feature sets, so the result does
//! not depend on the worker count.

use nalgebra::DMatrix;
use qwk_core::kernels::{pair_kernel, GramMeta, PolicyRecord};
use qwk_core::pipeline::{label_features, prepare_graph, PreparedGraph};
use qwk_core::{GraphFeatures, GramMatrix, KernelKind, PipelineConfig, WeightedGraph};
use rayon::prelude::*;

/// Runs `f` on a pool with `workers` threads, or rayon's default pool size
/// when `workers` is zero.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(e) => {
            log::warn!("could not build a {workers}-thread pool ({e}); using the global pool");
            f()
        }
    }
}

pub fn prepare_all(graphs: &[WeightedGraph], cfg: &PipelineConfig) -> qwk_core::Result<Vec<PreparedGraph>> {
    graphs.par_iter().map(|g| prepare_graph(g, cfg)).collect()
}

/// Parallel counterpart of [`qwk_core::extract_features`].
pub fn extract_features(graphs: &[WeightedGraph], cfg: &PipelineConfig) -> qwk_core::Result<Vec<GraphFeatures>> {
    cfg.validate()?;
    let prepared = prepare_all(graphs, cfg)?;
    label_features(&prepared, cfg)
}

/// Parallel counterpart of [`qwk_core::gram`].
pub fn gram(features: &[GraphFeatures], kind: KernelKind, cfg: &PipelineConfig) -> qwk_core::Result<GramMatrix> {
    let n = features.len();
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| pair_kernel(&features[i], &features[j], kind))
        .collect::<qwk_core::Result<_>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (&(i, j), &k) in cells.iter().zip(&values) {
        m[(i, j)] = k;
        m[(j, i)] = k;
    }
    Ok(GramMatrix {
        values: m,
        graph_ids: features.iter().map(|f| f.id.clone()).collect(),
        meta: GramMeta {
            kernel: kind,
            horizon: cfg.horizon,
            h_min: cfg.h_min,
            h_max: cfg.h_max,
            policy: PolicyRecord::from_features(features),
        },
    })
}
