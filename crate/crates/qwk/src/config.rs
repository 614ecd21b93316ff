//! Run configuration. Each setting comes from, in order of precedence: a
//! command-line flag, a `QWK_*` environment variable, the TOML file given by
//! `--config`, the built-in default.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context};
use qwk_core::finance::WeightMode;
use qwk_core::pipeline::{DEFAULT_H_MAX, DEFAULT_HORIZON};
use qwk_core::{KernelKind, PipelineConfig};
use serde::Deserialize;

/// Refinement rounds `h_min..=h_max`, written `h_min:h_max` (or a single `h`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WlRange {
    pub min: usize,
    pub max: usize,
}

impl FromStr for WlRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad refinement round {x:?}"));
        let (min, max) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let h = parse(s)?;
                (h, h)
            }
        };
        if min > max {
            return Err(format!("empty refinement range {s:?}"));
        }
        Ok(WlRange { min, max })
    }
}

impl fmt::Display for WlRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min, self.max)
    }
}

/// Settings that may appear in a config file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub kernel: Option<String>,
    pub horizon: Option<usize>,
    pub wl: Option<String>,
    pub mode: Option<String>,
    pub window: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub dims: Option<usize>,
    pub weight_floor: Option<f64>,
}

impl Settings {
    pub fn from_toml_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills every unset field from `lower`.
    pub fn or(self, lower: Settings) -> Settings {
        Settings {
            kernel: self.kernel.or(lower.kernel),
            horizon: self.horizon.or(lower.horizon),
            wl: self.wl.or(lower.wl),
            mode: self.mode.or(lower.mode),
            window: self.window.or(lower.window),
            workers: self.workers.or(lower.workers),
            seed: self.seed.or(lower.seed),
            folds: self.folds.or(lower.folds),
            dims: self.dims.or(lower.dims),
            weight_floor: self.weight_floor.or(lower.weight_floor),
        }
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kernel: KernelKind,
    pub horizon: usize,
    pub wl: WlRange,
    pub mode: WeightMode,
    pub window: usize,
    /// Zero lets the thread pool pick.
    pub workers: usize,
    pub seed: u64,
    pub folds: usize,
    pub dims: usize,
    pub weight_floor: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            kernel: KernelKind::JensenShannon,
            horizon: DEFAULT_HORIZON,
            wl: WlRange { min: 0, max: DEFAULT_H_MAX },
            mode: WeightMode::Euclidean,
            window: 28,
            workers: 0,
            seed: 7,
            folds: 10,
            dims: 3,
            weight_floor: None,
        }
    }
}

impl RunConfig {
    pub fn resolve(s: Settings) -> anyhow::Result<RunConfig> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            kernel: match s.kernel {
                Some(k) => k.parse().map_err(|e: qwk_core::Error| anyhow::anyhow!("{e}"))?,
                None => d.kernel,
            },
            horizon: s.horizon.unwrap_or(d.horizon),
            wl: match s.wl {
                Some(w) => w.parse().map_err(anyhow::Error::msg)?,
                None => d.wl,
            },
            mode: match s.mode {
                Some(m) => m.parse().map_err(|e: qwk_core::Error| anyhow::anyhow!("{e}"))?,
                None => d.mode,
            },
            window: s.window.unwrap_or(d.window),
            workers: s.workers.unwrap_or(d.workers),
            seed: s.seed.unwrap_or(d.seed),
            folds: s.folds.unwrap_or(d.folds),
            dims: s.dims.unwrap_or(d.dims),
            weight_floor: s.weight_floor,
        };
        if let Some(f) = cfg.weight_floor {
            if !(f > 0.0 && f.is_finite()) {
                bail!("weight floor must be positive, got {f}");
            }
        }
        Ok(cfg)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            horizon: self.horizon,
            h_min: self.wl.min,
            h_max: self.wl.max,
            weight_floor: self.weight_floor,
            ..PipelineConfig::default()
        }
    }

    /// One-line summary echoed into output headers.
    pub fn describe(&self) -> String {
        format!(
            "kernel={} horizon={} wl={} weight_floor={}",
            self.kernel,
            self.horizon,
            self.wl,
            self.weight_floor.map_or("none".to_string(), |f| f.to_string())
        )
    }
}
