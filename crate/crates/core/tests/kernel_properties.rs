use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qwk_core::graph::WeightedGraph;
use qwk_core::kernels::{gram, js_divergence, k_dp, k_js, KernelKind};
use qwk_core::labels::{directed_edge_label, LabelDistribution};
use qwk_core::pipeline::{extract_features, PipelineConfig};
use qwk_core::spectral::sorted_symmetric_eigen;
use qwk_testkit::{Edge, GraphGen};

fn distribution(weights: &[f64]) -> LabelDistribution {
    let total: f64 = weights.iter().sum();
    let masses: BTreeMap<_, _> = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, &w)| (directed_edge_label(&i.to_string(), "x", None), w / total))
        .collect();
    LabelDistribution::from_masses(masses, 0, "test")
}

fn arb_distribution() -> impl Strategy<Value = LabelDistribution> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..10.0], 1..12)
        .prop_filter("some mass", |w| w.iter().any(|&x| x > 0.0))
        .prop_map(|w| distribution(&w))
}

fn labeled_graph(gen: &mut GraphGen, n: usize, p: f64, alphabet: usize) -> WeightedGraph {
    let edges = gen.connected_graph(n, p);
    let labels = gen.labels(n, alphabet);
    WeightedGraph::from_edges(n, &edges, Some(labels)).unwrap()
}

fn min_eigen_ratio(k: &DMatrix<f64>) -> f64 {
    let (values, _) = sorted_symmetric_eigen(k.clone());
    values[0] / values[values.len() - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_bounds(p in arb_distribution(), q in arb_distribution()) {
        let dp = k_dp(&p, &q);
        prop_assert!((0.0..=1.0).contains(&dp));
        let d = js_divergence(&p, &q).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        let js = k_js(&p, &q).unwrap();
        prop_assert!(js >= (-1.0f64).exp() && js <= 1.0);
        prop_assert_eq!(js.to_bits(), k_js(&q, &p).unwrap().to_bits());
    }

    #[test]
    fn dot_product_cauchy_schwarz(p in arb_distribution(), q in arb_distribution()) {
        let lhs = k_dp(&p, &q).powi(2);
        let rhs = k_dp(&p, &p) * k_dp(&q, &q);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn gram_of_random_distributions_is_psd(ds in prop::collection::vec(arb_distribution(), 2..15)) {
        let features: Vec<_> = ds
            .into_iter()
            .enumerate()
            .map(|(i, d)| qwk_core::GraphFeatures::from_distributions(i.to_string(), None, vec![d]))
            .collect();
        for kind in [KernelKind::DotProduct, KernelKind::JensenShannon] {
            let g = gram(&features, kind, 0, 0, 0).unwrap();
            prop_assert!(min_eigen_ratio(&g.values) >= -1e-8, "{}", kind);
        }
    }
}

#[test]
fn label_distributions_conserve_mass() {
    let mut gen = GraphGen::new(41);
    let graphs: Vec<_> = (0..12).map(|i| labeled_graph(&mut gen, 4 + i, 0.15 + 0.05 * i as f64, 3)).collect();
    for f in extract_features(&graphs, &PipelineConfig::default()).unwrap() {
        for d in &f.distributions {
            assert!((d.total() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn gram_matrices_of_pipeline_features_are_psd() {
    let mut gen = GraphGen::new(42);
    let graphs: Vec<_> = (0..30).map(|i| labeled_graph(&mut gen, 5 + i % 9, 0.3, 2)).collect();
    let features = extract_features(&graphs, &PipelineConfig::default()).unwrap();
    for kind in [KernelKind::DotProduct, KernelKind::JensenShannon] {
        let g = gram(&features, kind, 25, 0, 3).unwrap();
        assert!(min_eigen_ratio(&g.values) >= -1e-8);
        if kind == KernelKind::JensenShannon {
            assert!((0..g.len()).all(|i| g.values[(i, i)] == 1.0));
        }
    }
}

fn permute(g: &WeightedGraph, perm: &[usize]) -> WeightedGraph {
    // perm[old] = new, expressed through `permuted`, which takes order[new] = old.
    let mut order = vec![0; perm.len()];
    for (old, &new) in perm.iter().enumerate() {
        order[new] = old;
    }
    g.permuted(&order).unwrap()
}

fn check_permutation_invariance(graphs: Vec<WeightedGraph>, gen: &mut GraphGen) {
    let cfg = PipelineConfig::default();
    let base = extract_features(&graphs, &cfg).unwrap();
    for (i, g) in graphs.iter().enumerate() {
        let perm = gen.permutation(g.n());
        let mut swapped = graphs.clone();
        swapped[i] = permute(g, &perm).with_id(g.graph_id().unwrap());
        let moved = extract_features(&swapped, &cfg).unwrap();
        assert_eq!(moved[i].distributions, base[i].distributions, "graph {i}");
        for kind in [KernelKind::DotProduct, KernelKind::JensenShannon] {
            let a = gram(&base, kind, 25, 0, 3).unwrap();
            let b = gram(&moved, kind, 25, 0, 3).unwrap();
            for j in 0..graphs.len() {
                assert_eq!(a.values[(i, j)].to_bits(), b.values[(i, j)].to_bits());
            }
        }
    }
}

#[test]
fn gram_entries_survive_relabeling_bit_for_bit() {
    let mut gen = GraphGen::new(43);
    let graphs: Vec<_> = (0..8)
        .map(|i| labeled_graph(&mut gen, 6 + i, if i % 2 == 0 { 0.2 } else { 0.6 }, 2).with_id(format!("g{i}")))
        .collect();
    check_permutation_invariance(graphs, &mut gen);
}

#[test]
fn symmetric_unweighted_graphs_survive_relabeling() {
    let mut gen = GraphGen::new(44);
    let cycle = |n: usize| -> Vec<Edge> { (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect() };
    let mut wheel = cycle(7);
    wheel.extend((0..7).map(|i| (i, 7, 1.0)));
    let mut prism = cycle(5);
    prism.extend((0..5).map(|i| (5 + i, 5 + (i + 1) % 5, 1.0)));
    prism.extend((0..5).map(|i| (i, i + 5, 1.0)));
    let graphs = vec![
        WeightedGraph::from_edges(8, &cycle(8), Some(vec!["c".into(); 8])).unwrap().with_id("cycle"),
        WeightedGraph::from_edges(8, &wheel, None).unwrap().with_id("wheel"),
        WeightedGraph::from_edges(10, &prism, None).unwrap().with_id("prism"),
    ];
    check_permutation_invariance(graphs, &mut gen);
}
