//! Per-graph pipeline from a weighted graph to its label distributions.
//!
//! `prepare_graph` does everything that depends on one graph only (component
//! reduction, canonical ordering, commute times, sparsification, the walk).
//! `label_features` then refines labels over the whole collection so every
//! graph shares one key space.

use alloc::string::String;
use alloc::vec::Vec;

use crate::canonical::{canonical_order, DEFAULT_LEAF_BUDGET};
use crate::dtqw::{visit_distribution, VisitDistribution, WalkSystem};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::labels::{label_distribution, wl_refine_dataset, LabelDistribution};
use crate::sparsify::{sparsification_policy, SparsifyBranch, WalkGraph};

/// Default walk horizon.
pub const DEFAULT_HORIZON: usize = 25;
/// Default largest refinement round.
pub const DEFAULT_H_MAX: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub horizon: usize,
    pub h_min: usize,
    pub h_max: usize,
    /// When set, every off-diagonal weight is raised to at least this value
    /// before anything else (complete-graph inputs with zero distances).
    pub weight_floor: Option<f64>,
    pub leaf_budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            horizon: DEFAULT_HORIZON,
            h_min: 0,
            h_max: DEFAULT_H_MAX,
            weight_floor: None,
            leaf_budget: DEFAULT_LEAF_BUDGET,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.h_min > self.h_max {
            return Err(Error::validation(alloc::format!(
                "refinement range {}:{} is empty",
                self.h_min,
                self.h_max
            )));
        }
        if let Some(f) = self.weight_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::validation(alloc::format!("weight floor {f} must be positive")));
            }
        }
        Ok(())
    }
}

/// Record of a graph reduced to its largest connected component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentReduction {
    pub original_n: usize,
    pub kept_n: usize,
    pub components: usize,
}

/// A graph after every per-graph stage.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub id: String,
    pub class_label: Option<String>,
    pub walk: WalkGraph,
    pub visit: VisitDistribution,
    pub reduction: Option<ComponentReduction>,
    /// False when the canonical ordering search hit its budget.
    pub canonical: bool,
}

/// Keeps the largest connected component. Equal-sized components are told
/// apart by their label and weight multisets before falling back to the
/// smallest vertex index.
pub fn largest_component(g: &WeightedGraph) -> Result<(WeightedGraph, Option<ComponentReduction>)> {
    let comps = g.components();
    if comps.len() == 1 {
        return Ok((g.clone(), None));
    }
    let key = |c: &Vec<usize>| {
        let mut labels: Vec<&str> = c.iter().map(|&v| g.vertex_labels()[v].as_str()).collect();
        labels.sort_unstable();
        let mut weights: Vec<u64> = c
            .iter()
            .flat_map(|&u| c.iter().filter(move |&&v| v > u).map(move |&v| g.weight(u, v).to_bits()))
            .collect();
        weights.sort_unstable();
        (c.len(), labels, weights)
    };
    let best = comps
        .iter()
        .enumerate()
        .max_by(|(i, a), (j, b)| key(a).cmp(&key(b)).then(j.cmp(i)))
        .map(|(_, c)| c)
        .expect("at least one component");
    let reduced = g.induced(best)?;
    let rec = ComponentReduction { original_n: g.n(), kept_n: best.len(), components: comps.len() };
    Ok((reduced, Some(rec)))
}

/// Runs every per-graph stage on `g`.
pub fn prepare_graph(g: &WeightedGraph, cfg: &PipelineConfig) -> Result<PreparedGraph> {
    let id = String::from(g.graph_id().unwrap_or_default());
    let wrap = |e: Error| e.for_graph(id.clone());
    let floored;
    let g = match cfg.weight_floor {
        Some(f) => {
            floored = g.with_weight_floor(f);
            &floored
        }
        None => g,
    };
    let (g, reduction) = largest_component(g).map_err(wrap)?;
    let order = canonical_order(&g, cfg.leaf_budget);
    if !order.complete {
        log::warn!("graph {id}: canonical ordering stopped after {} leaves", order.leaves);
    }
    let g = g.permuted(&order.order).map_err(wrap)?;
    let walk = sparsification_policy(&g).map_err(wrap)?;
    let system = WalkSystem::new(&walk);
    let visit = visit_distribution(&system, cfg.horizon);
    Ok(PreparedGraph {
        id: id.clone(),
        class_label: g.class_label().map(String::from),
        walk,
        visit,
        reduction,
        canonical: order.complete,
    })
}

/// Feature representation of one graph: a label distribution per refinement
/// round in the configured range.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatures {
    pub id: String,
    pub class_label: Option<String>,
    pub branch: SparsifyBranch,
    pub reduction: Option<ComponentReduction>,
    pub canonical: bool,
    pub distributions: Vec<LabelDistribution>,
}

impl GraphFeatures {
    /// Features assembled from ready-made distributions.
    pub fn from_distributions(id: impl Into<String>, class_label: Option<String>, distributions: Vec<LabelDistribution>) -> Self {
        GraphFeatures {
            id: id.into(),
            class_label,
            branch: SparsifyBranch::SpanningTree,
            reduction: None,
            canonical: true,
            distributions,
        }
    }
}

/// Refines labels across all prepared graphs and aggregates each graph's
/// visit distribution per round.
pub fn label_features(prepared: &[PreparedGraph], cfg: &PipelineConfig) -> Result<Vec<GraphFeatures>> {
    cfg.validate()?;
    let walks: Vec<&WalkGraph> = prepared.iter().map(|p| &p.walk).collect();
    let wl = wl_refine_dataset(&walks, cfg.h_max);
    prepared
        .iter()
        .zip(&wl.labels)
        .map(|(p, rounds)| {
            let distributions = (cfg.h_min..=cfg.h_max)
                .map(|h| label_distribution(&p.visit, &p.walk, &rounds[h], h, &wl.label_space_ids[h]))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.for_graph(p.id.clone()))?;
            Ok(GraphFeatures {
                id: p.id.clone(),
                class_label: p.class_label.clone(),
                branch: p.walk.branch(),
                reduction: p.reduction.clone(),
                canonical: p.canonical,
                distributions,
            })
        })
        .collect()
}

/// Sequential feature extraction for a collection.
pub fn extract_features(graphs: &[WeightedGraph], cfg: &PipelineConfig) -> Result<Vec<GraphFeatures>> {
    cfg.validate()?;
    let prepared = graphs.iter().map(|g| prepare_graph(g, cfg)).collect::<Result<Vec<_>>>()?;
    label_features(&prepared, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn labeled_path(n: usize) -> WeightedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        let labels = (0..n).map(|i| (i % 2).to_string()).collect();
        WeightedGraph::from_edges(n, &edges, Some(labels)).unwrap()
    }

    #[test]
    fn largest_component_is_kept_and_recorded() {
        let g = WeightedGraph::from_edges(6, &[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)], None).unwrap().with_id("g");
        let p = prepare_graph(&g, &PipelineConfig::default()).unwrap();
        assert_eq!(p.walk.n(), 3);
        assert_eq!(p.reduction, Some(ComponentReduction { original_n: 6, kept_n: 3, components: 3 }));
    }

    #[test]
    fn features_cover_the_configured_rounds() {
        let graphs = vec![labeled_path(4).with_id("a"), labeled_path(5).with_id("b")];
        let cfg = PipelineConfig { h_min: 1, h_max: 3, ..PipelineConfig::default() };
        let f = extract_features(&graphs, &cfg).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[0].distributions.iter().map(|d| d.h).collect::<Vec<_>>(), [1, 2, 3]);
        for d in f.iter().flat_map(|x| &x.distributions) {
            assert!((d.total() - 1.0).abs() < 1e-10);
        }
        assert_eq!(f[0].distributions[0].label_space_id, f[1].distributions[0].label_space_id);
    }

    #[test]
    fn failures_name_the_graph() {
        let lone = WeightedGraph::new(nalgebra::DMatrix::zeros(1, 1), None).unwrap().with_id("lonely");
        match extract_features(&[lone], &PipelineConfig::default()) {
            Err(Error::Graph { graph_id, .. }) => assert_eq!(graph_id, "lonely"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_refinement_range_is_rejected() {
        let cfg = PipelineConfig { h_min: 2, h_max: 1, ..PipelineConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
