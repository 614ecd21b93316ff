//! File formats, parallel Gram assembly and the `qwk` command line on top of
//! [`qwk_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod json;
pub mod parallel;
pub mod prices;
pub mod tu;

use std::path::Path;
use std::str::FromStr;

use qwk_core::WeightedGraph;

pub use error::DataError;

/// Smallest edge weight given to sliding-window networks, so that identical
/// return series still yield a connected graph.
pub const NETWORK_WEIGHT_FLOOR: f64 = 1e-12;

/// How to read an input path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputFormat {
    /// Directory with a manifest: networks; other directory: dataset
    /// layout; file: JSON graphs.
    #[default]
    Auto,
    Tu,
    Json,
    Networks,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(InputFormat::Auto),
            "tu" => Ok(InputFormat::Tu),
            "json" => Ok(InputFormat::Json),
            "nets" => Ok(InputFormat::Networks),
            other => Err(format!("unknown input format {other:?}, expected auto, tu, json or nets")),
        }
    }
}

/// Graphs read from an input path.
#[derive(Debug, Clone)]
pub struct LoadedInput {
    pub graphs: Vec<WeightedGraph>,
    /// Timestamps of sliding-window networks.
    pub timestamps: Option<Vec<String>>,
    /// Weight floor recorded alongside the graphs, if any.
    pub weight_floor: Option<f64>,
}

pub fn load_input(path: &Path, format: InputFormat) -> Result<LoadedInput, DataError> {
    let format = match format {
        InputFormat::Auto if path.is_dir() && path.join(export::MANIFEST_FILE).exists() => InputFormat::Networks,
        InputFormat::Auto if path.is_dir() => InputFormat::Tu,
        InputFormat::Auto => InputFormat::Json,
        f => f,
    };
    match format {
        InputFormat::Tu => Ok(LoadedInput {
            graphs: tu::load_tu_dataset(path)?.into_graphs(),
            timestamps: None,
            weight_floor: None,
        }),
        InputFormat::Json => Ok(LoadedInput {
            graphs: json::load_weighted_json(path)?.into_graphs(),
            timestamps: None,
            weight_floor: None,
        }),
        InputFormat::Networks => {
            let (manifest, graphs) = export::load_networks(path)?;
            Ok(LoadedInput {
                graphs,
                timestamps: Some(manifest.networks.iter().map(|e| e.timestamp.clone()).collect()),
                weight_floor: Some(manifest.weight_floor),
            })
        }
        InputFormat::Auto => unreachable!("resolved above"),
    }
}
