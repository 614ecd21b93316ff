//! Output files: Gram CSV, precomputed-kernel SVM input, embeddings, entropy
//! series, class label lists and network manifests.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use qwk_core::embed::Embedding;
use qwk_core::WeightedGraph;
use serde::{Deserialize, Serialize};

use crate::error::{DataError, Result};
use crate::json::{load_weighted_json, save_graph_json};

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    fs::File::create(path).map(BufWriter::new).map_err(|e| DataError::io(path, e))
}

/// Twelve significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Gram values with their graph ids, as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct GramTable {
    pub header: Vec<String>,
    pub ids: Vec<String>,
    pub values: DMatrix<f64>,
}

/// Writes `# <header>` lines, a `graph_id,<ids...>` row and one row per
/// graph. Values use the shortest representation that parses back to the
/// same bits.
pub fn write_gram_csv(path: &Path, header: &[String], ids: &[String], values: &DMatrix<f64>) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| DataError::io(path, e);
    for h in header {
        writeln!(out, "# {h}").map_err(io)?;
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| DataError::format(path, None, e.to_string());
        let mut row = vec!["graph_id".to_string()];
        row.extend(ids.iter().cloned());
        w.write_record(&row).map_err(csv_err)?;
        for (i, id) in ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend((0..ids.len()).map(|j| values[(i, j)].to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_gram_csv(path: &Path) -> Result<GramTable> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let header: Vec<String> =
        text.lines().take_while(|l| l.starts_with('#')).map(|l| l.trim_start_matches('#').trim().to_string()).collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let first = rows
        .next()
        .ok_or_else(|| DataError::format(path, None, "no header row"))?
        .map_err(|e| DataError::format(path, None, e.to_string()))?;
    if first.get(0) != Some("graph_id") {
        return Err(DataError::format(path, None, "header row must start with graph_id"));
    }
    let ids: Vec<String> = first.iter().skip(1).map(String::from).collect();
    let n = ids.len();
    let mut values = DMatrix::zeros(n, n);
    let mut count = 0;
    for (i, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| DataError::format(path, None, e.to_string()))?;
        if i >= n || rec.len() != n + 1 || rec.get(0) != Some(ids[i].as_str()) {
            return Err(DataError::format(path, None, format!("row {} does not match the header", i + 1)));
        }
        for j in 0..n {
            let cell = &rec[j + 1];
            values[(i, j)] = cell
                .parse()
                .map_err(|_| DataError::format(path, None, format!("row {}: bad value {cell:?}", i + 1)))?;
        }
        count += 1;
    }
    if count != n {
        return Err(DataError::format(path, None, format!("{count} rows for {n} columns")));
    }
    Ok(GramTable { header, ids, values })
}

/// Precomputed-kernel format read by common SVM tools: one line per graph,
/// `<label> 0:<i> 1:<k(i,1)> ... N:<k(i,N)>`, with 1-based serial numbers.
pub fn write_precomputed_kernel(path: &Path, labels: &[String], values: &DMatrix<f64>) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| DataError::io(path, e);
    for (i, label) in labels.iter().enumerate() {
        write!(out, "{label} 0:{}", i + 1).map_err(io)?;
        for j in 0..labels.len() {
            write!(out, " {}:{}", j + 1, values[(i, j)]).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// One class label per line, in graph order.
pub fn write_labels(path: &Path, labels: &[String]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| DataError::io(path, e);
    for l in labels {
        writeln!(out, "{l}").map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn read_labels(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// `id,x1,...,xd` rows with twelve significant digits.
pub fn write_embedding_csv(path: &Path, emb: &Embedding) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| DataError::io(path, e);
    let d = emb.coordinates.ncols();
    let cols: Vec<String> = (1..=d).map(|c| format!("x{c}")).collect();
    writeln!(out, "id,{}", cols.join(",")).map_err(io)?;
    for (i, id) in emb.graph_ids.iter().enumerate() {
        let row: Vec<String> = (0..d).map(|c| sig12(emb.coordinates[(i, c)])).collect();
        writeln!(out, "{id},{}", row.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// `date,entropy` rows with twelve significant digits.
pub fn write_entropy_csv(path: &Path, series: &[(String, f64)]) -> Result<()> {
    let mut out = create(path)?;
    let io = |e| DataError::io(path, e);
    writeln!(out, "date,entropy").map_err(io)?;
    for (date, h) in series {
        writeln!(out, "{date},{}", sig12(*h)).map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Index of a directory of sliding-window networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkManifest {
    pub source: String,
    pub window: usize,
    pub mode: String,
    /// Smallest off-diagonal weight to use before the spectral stage.
    pub weight_floor: f64,
    pub tickers: Vec<String>,
    pub dropped: Vec<String>,
    pub networks: Vec<NetworkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkEntry {
    pub timestamp: String,
    pub graph_id: String,
    pub file: String,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// File name for the `index`-th network.
pub fn network_file_name(index: usize, timestamp: &str) -> String {
    format!("net_{index:06}_{timestamp}.json")
}

pub fn save_networks(dir: &Path, manifest: &NetworkManifest, graphs: &[WeightedGraph]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    for (entry, g) in manifest.networks.iter().zip(graphs) {
        save_graph_json(g, &dir.join(&entry.file))?;
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(manifest).map_err(|e| DataError::io(&path, e.into()))?;
    fs::write(&path, text + "\n").map_err(|e| DataError::io(&path, e))
}

pub fn load_manifest(dir: &Path) -> Result<NetworkManifest> {
    let path: PathBuf = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| DataError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| DataError::format(&path, Some(e.line()), e.to_string()))
}

/// Networks listed in a manifest, in manifest order.
pub fn load_networks(dir: &Path) -> Result<(NetworkManifest, Vec<WeightedGraph>)> {
    let manifest = load_manifest(dir)?;
    let mut graphs = Vec::with_capacity(manifest.networks.len());
    for entry in &manifest.networks {
        let path = dir.join(&entry.file);
        let mut ds = load_weighted_json(&path)?.into_graphs();
        if ds.len() != 1 || ds[0].graph_id() != Some(entry.graph_id.as_str()) {
            return Err(DataError::integrity(&path, format!("expected the single graph {}", entry.graph_id)));
        }
        graphs.push(ds.remove(0));
    }
    Ok((manifest, graphs))
}
