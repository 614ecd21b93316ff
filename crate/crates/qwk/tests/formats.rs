use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use qwk::export::{self, NetworkEntry, NetworkManifest};
use qwk::json::{load_weighted_json, save_weighted_json};
use qwk::prices::{load_prices, parse_date, save_prices, DateSpan};
use qwk::tu::{canonical_token, load_tu_dataset};
use qwk::DataError;
use qwk_core::embed::Embedding;
use qwk_core::WeightedGraph;
use qwk_testkit::GraphGen;

fn mutag() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

fn write_tu(dir: &Path, files: &[(&str, &str)]) {
    for (suffix, body) in files {
        fs::write(dir.join(format!("TOY_{suffix}.txt")), body).unwrap();
    }
}

#[test]
fn mutag_loads_with_expected_shape() {
    let ds = load_tu_dataset(&mutag()).unwrap();
    assert_eq!(ds.len(), 188);
    assert_eq!(ds.classes().into_iter().collect::<Vec<_>>(), vec!["-1".to_string(), "1".to_string()]);
    assert_eq!(ds.graphs().iter().map(WeightedGraph::n).max(), Some(28));
    assert!(ds.graphs().iter().all(|g| g.has_edge_labels()));
    assert_eq!(ds.graphs()[0].graph_id(), Some("1"));
}

#[test]
fn minimal_dataset_loads() {
    let dir = tempfile::tempdir().unwrap();
    write_tu(
        dir.path(),
        &[
            ("A", "1, 2\n2, 1\n2, 3\n3, 2\n4, 5\n5, 4\n"),
            ("graph_indicator", "1\n1\n1\n2\n2\n"),
            ("graph_labels", "+1\n-1\n"),
            ("node_labels", "0\n1\n0\n2\n2\n"),
        ],
    );
    let ds = load_tu_dataset(dir.path()).unwrap();
    assert_eq!(ds.len(), 2);
    let g = &ds.graphs()[0];
    assert_eq!(g.n(), 3);
    assert_eq!(g.weight(0, 1), 1.0);
    assert_eq!(g.weight(0, 2), 0.0);
    assert_eq!(g.vertex_labels(), ["0", "1", "0"]);
    assert_eq!(g.class_label(), Some("1"));
    assert_eq!(ds.graphs()[1].class_label(), Some("-1"));
}

#[test]
fn missing_node_labels_fall_back_to_degrees() {
    let dir = tempfile::tempdir().unwrap();
    write_tu(dir.path(), &[("A", "1,2\n2,1\n2,3\n3,2\n"), ("graph_indicator", "1\n1\n1\n")]);
    let ds = load_tu_dataset(dir.path()).unwrap();
    assert_eq!(ds.graphs()[0].vertex_labels(), ["1", "2", "1"]);
}

#[test]
fn empty_indicator_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    write_tu(dir.path(), &[("A", ""), ("graph_indicator", "")]);
    assert!(matches!(load_tu_dataset(dir.path()), Err(DataError::Format { .. })));
}

#[test]
fn dangling_edge_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    write_tu(dir.path(), &[("A", "1,2\n2,1\n2,9\n9,2\n"), ("graph_indicator", "1\n1\n")]);
    assert!(matches!(load_tu_dataset(dir.path()), Err(DataError::Integrity { .. })));
}

#[test]
fn cross_graph_edge_is_an_integrity_error() {
    let dir = tempfile::tempdir().unwrap();
    write_tu(dir.path(), &[("A", "1,3\n3,1\n"), ("graph_indicator", "1\n1\n2\n")]);
    assert!(matches!(load_tu_dataset(dir.path()), Err(DataError::Integrity { .. })));
}

#[test]
fn integer_tokens_are_canonical() {
    assert_eq!(canonical_token(" +007 "), "7");
    assert_eq!(canonical_token("-0"), "0");
    assert_eq!(canonical_token("C"), "C");
}

#[test]
fn json_round_trip_is_bit_exact() {
    let mut gen = GraphGen::new(3);
    let n = 347;
    let edges = gen.complete_graph(n);
    let labels = gen.labels(n, 5);
    let g = WeightedGraph::from_edges(n, &edges, Some(labels)).unwrap().with_id("big").with_class("a");
    let small = WeightedGraph::from_edges(3, &[(0, 1, 0.1 + 0.2), (1, 2, 1e-300)], None).unwrap().with_id("small");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("graphs.json");
    save_weighted_json(&[g.clone(), small.clone()], &path).unwrap();
    let back = load_weighted_json(&path).unwrap().into_graphs();
    for (a, b) in [g, small].iter().zip(&back) {
        assert_eq!(a.graph_id(), b.graph_id());
        assert_eq!(a.class_label(), b.class_label());
        assert_eq!(a.vertex_labels(), b.vertex_labels());
        assert_eq!(a.edge_labels(), b.edge_labels());
        assert!(a.weights().iter().zip(b.weights().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

#[test]
fn single_object_json_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    fs::write(&path, r#"{"id":"x","n":2,"weights":[[0,2.5],[2.5,0]],"vertex_labels":["a","b"],"edge_labels":[[0,1,"s"]]}"#)
        .unwrap();
    let g = &load_weighted_json(&path).unwrap().into_graphs()[0];
    assert_eq!(g.weight(0, 1), 2.5);
    assert_eq!(g.edge_label(1, 0).map(String::as_str), Some("s"));
}

#[test]
fn invalid_weights_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [
        ("asym", r#"{"n":2,"weights":[[0,1],[2,0]]}"#),
        ("neg", r#"{"n":2,"weights":[[0,-1],[-1,0]]}"#),
        ("shape", r#"{"n":3,"weights":[[0,1],[1,0]]}"#),
        ("syntax", r#"{"n":2,"weights":"#),
    ] {
        let path = dir.path().join(format!("{name}.json"));
        fs::write(&path, body).unwrap();
        assert!(load_weighted_json(&path).is_err(), "{name}");
    }
}

fn price_csv(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("prices.csv");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn complete_price_table_loads() {
    let dir = tempfile::tempdir().unwrap();
    let tickers: Vec<String> = ["A", "B", "C"].map(String::from).to_vec();
    let dates: Vec<String> = (0..100).map(qwk_testkit::chrono_free_date).collect();
    let closes: Vec<Vec<f64>> = (0..100).map(|d| vec![10.0 + d as f64, 20.0, 30.0 / (1.0 + d as f64)]).collect();
    let path = dir.path().join("p.csv");
    save_prices(&tickers, &dates, &closes, &path).unwrap();
    let loaded = load_prices(&path, DateSpan::default()).unwrap();
    assert_eq!(loaded.table.dates().len(), 100);
    assert_eq!(loaded.table.tickers(), tickers.as_slice());
    assert!(loaded.dropped.is_empty());
    assert_eq!(loaded.table.close(99, 2), Some(0.3));
}

#[test]
fn ticker_with_a_gap_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let path = price_csv(dir.path(), "date,A,B,C\n2020-01-01,1,2,3\n2020-01-02,1.1,NA,3.1\n2020-01-03,1.2,2.2,3.2\n");
    let loaded = load_prices(&path, DateSpan::default()).unwrap();
    assert_eq!(loaded.table.tickers(), ["A", "C"]);
    assert_eq!(loaded.dropped, ["B"]);

    // Outside the requested span the gap does not matter.
    let span = DateSpan { from: parse_date("2020-01-03"), to: None };
    let loaded = load_prices(&path, span).unwrap();
    assert_eq!(loaded.table.tickers(), ["A", "B", "C"]);
    assert_eq!(loaded.table.dates().len(), 1);
}

#[test]
fn bad_price_files_are_format_errors() {
    let dir = tempfile::tempdir().unwrap();
    for body in ["", "date,A\n2020-13-01,1\n", "date,A\n2020-01-01,abc\n", "date,A\n2020-01-01,-3\n"] {
        let path = price_csv(dir.path(), body);
        assert!(matches!(load_prices(&path, DateSpan::default()), Err(DataError::Format { .. })), "{body:?}");
    }
}

#[test]
fn gram_csv_round_trips_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let ids: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
    let values = DMatrix::from_row_slice(3, 3, &[1.0, 0.1 + 0.2, 1e-17, 0.1 + 0.2, 1.0, 0.5, 1e-17, 0.5, 1.0]);
    let header = vec!["qwk test".to_string(), "kernel=js".to_string()];
    export::write_gram_csv(&path, &header, &ids, &values).unwrap();
    let back = export::read_gram_csv(&path).unwrap();
    assert_eq!(back.header, header);
    assert_eq!(back.ids, ids);
    assert!(back.values.iter().zip(values.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn precomputed_kernel_lines_have_serial_and_all_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.svm");
    let values = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 1.0]);
    export::write_precomputed_kernel(&path, &["1".into(), "-1".into()], &values).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text, "1 0:1 1:1 2:0.25\n-1 0:2 1:0.25 2:1\n");
}

#[test]
fn embedding_and_entropy_use_twelve_digits() {
    let dir = tempfile::tempdir().unwrap();
    let emb = Embedding {
        coordinates: DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 0.0, -2.0, 5e-7]),
        explained: vec![0.9, 0.1],
        graph_ids: vec!["x".into(), "y".into()],
        clamped_magnitude: 0.0,
    };
    let path = dir.path().join("e.csv");
    export::write_embedding_csv(&path, &emb).unwrap();
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        "id,x1,x2\nx,3.33333333333e-1,0.00000000000e0\ny,-2.00000000000e0,5.00000000000e-7\n"
    );
    let path = dir.path().join("h.csv");
    export::write_entropy_csv(&path, &[("2020-01-02".into(), 6.5)]).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), "date,entropy\n2020-01-02,6.50000000000e0\n");
}

#[test]
fn network_directory_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut gen = GraphGen::new(9);
    let graphs: Vec<WeightedGraph> = ["2020-01-02", "2020-01-03"]
        .iter()
        .map(|d| WeightedGraph::from_edges(4, &gen.complete_graph(4), None).unwrap().with_id(*d))
        .collect();
    let manifest = NetworkManifest {
        source: "p.csv".into(),
        window: 2,
        mode: "euclidean".into(),
        weight_floor: qwk::NETWORK_WEIGHT_FLOOR,
        tickers: vec![],
        dropped: vec![],
        networks: graphs
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let ts = g.graph_id().unwrap().to_string();
                NetworkEntry { file: export::network_file_name(i, &ts), graph_id: ts.clone(), timestamp: ts }
            })
            .collect(),
    };
    export::save_networks(dir.path(), &manifest, &graphs).unwrap();
    let (m, back) = export::load_networks(dir.path()).unwrap();
    assert_eq!(m, manifest);
    assert_eq!(back, graphs);
    let input = qwk::load_input(dir.path(), qwk::InputFormat::Auto).unwrap();
    assert_eq!(input.timestamps.unwrap(), ["2020-01-02", "2020-01-03"]);
    assert_eq!(input.weight_floor, Some(qwk::NETWORK_WEIGHT_FLOOR));
}
