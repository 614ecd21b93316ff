//! Sliding-window stock networks built from closing prices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numeric::{ln, ordered_sum_iter, sqrt};

/// Closing prices, one row per date and one column per ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceTable {
    tickers: Vec<String>,
    dates: Vec<String>,
    closes: Vec<Vec<Option<f64>>>,
}

impl PriceTable {
    /// Dates must be strictly increasing under string order (ISO-8601 dates
    /// sort chronologically). Present prices must be positive and finite.
    pub fn new(tickers: Vec<String>, dates: Vec<String>, closes: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let unique: BTreeSet<&String> = tickers.iter().collect();
        if unique.len() != tickers.len() {
            return Err(Error::validation("duplicate ticker"));
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::validation(format!("dates not strictly increasing at {} -> {}", w[0], w[1])));
        }
        if closes.len() != dates.len() {
            return Err(Error::integrity(format!("{} price rows for {} dates", closes.len(), dates.len())));
        }
        for (row, date) in closes.iter().zip(&dates) {
            if row.len() != tickers.len() {
                return Err(Error::integrity(format!("{date}: {} prices for {} tickers", row.len(), tickers.len())));
            }
            if let Some(p) = row.iter().flatten().find(|p| !(p.is_finite() && **p > 0.0)) {
                return Err(Error::validation(format!("{date}: price {p} is not positive")));
            }
        }
        Ok(PriceTable { tickers, dates, closes })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[String] {
        &self.dates
    }

    pub fn close(&self, date: usize, ticker: usize) -> Option<f64> {
        self.closes[date][ticker]
    }

    pub fn is_complete(&self) -> bool {
        self.closes.iter().flatten().all(Option::is_some)
    }

    /// Drops every ticker with a missing price. Returns the reduced table and
    /// the dropped tickers.
    pub fn retain_complete(self) -> (PriceTable, Vec<String>) {
        let keep: Vec<bool> = (0..self.tickers.len()).map(|t| self.closes.iter().all(|r| r[t].is_some())).collect();
        let mut dropped = Vec::new();
        let mut tickers = Vec::new();
        for (t, name) in self.tickers.into_iter().enumerate() {
            if keep[t] {
                tickers.push(name);
            } else {
                dropped.push(name);
            }
        }
        let closes = self
            .closes
            .into_iter()
            .map(|r| r.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| p).collect())
            .collect();
        (PriceTable { tickers, dates: self.dates, closes }, dropped)
    }
}

/// How return series are turned into edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightMode {
    /// Euclidean distance between return vectors.
    #[default]
    Euclidean,
    /// Correlation distance `sqrt(2 (1 - rho))`; constant series count as
    /// uncorrelated.
    Correlation,
}

impl WeightMode {
    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Euclidean => "euclidean",
            WeightMode::Correlation => "correlation",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(WeightMode::Euclidean),
            "correlation" => Ok(WeightMode::Correlation),
            other => Err(Error::validation(format!("unknown weight mode {other:?}"))),
        }
    }
}

/// Number of networks produced for `dates` rows and the given window.
pub fn window_count(dates: usize, window: usize) -> usize {
    (dates + 1).saturating_sub(window)
}

fn check_window(pt: &PriceTable, window: usize) -> Result<()> {
    if window < 2 {
        return Err(Error::validation(format!("window {window} must be at least 2")));
    }
    if pt.dates.len() < window {
        return Err(Error::validation(format!("{} dates are fewer than the window {window}", pt.dates.len())));
    }
    if pt.tickers.len() < 2 {
        return Err(Error::validation("at least two tickers are needed"));
    }
    if !pt.is_complete() {
        return Err(Error::validation("price table has missing values"));
    }
    Ok(())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    (cov / sqrt(va * vb)).clamp(-1.0, 1.0)
}

/// The network whose window ends at row `end` (inclusive). Returns use the
/// `window` price rows ending there.
pub fn network_at(pt: &PriceTable, end: usize, window: usize, mode: WeightMode) -> Result<WeightedGraph> {
    check_window(pt, window)?;
    if end + 1 < window || end >= pt.dates.len() {
        return Err(Error::validation(format!("no full window ends at row {end}")));
    }
    build_network(pt, end, window, mode)
}

fn build_network(pt: &PriceTable, end: usize, window: usize, mode: WeightMode) -> Result<WeightedGraph> {
    let start = end + 1 - window;
    let k = pt.tickers.len();
    let returns: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            (start + 1..=end)
                .map(|d| {
                    let (prev, cur) = (pt.closes[d - 1][t].unwrap_or(f64::NAN), pt.closes[d][t].unwrap_or(f64::NAN));
                    ln(cur / prev)
                })
                .collect()
        })
        .collect();
    let mut w = DMatrix::zeros(k, k);
    for u in 0..k {
        for v in u + 1..k {
            let x = match mode {
                WeightMode::Euclidean => {
                    sqrt(ordered_sum_iter(returns[u].iter().zip(&returns[v]).map(|(a, b)| (a - b) * (a - b))))
                }
                WeightMode::Correlation => sqrt((2.0 * (1.0 - pearson(&returns[u], &returns[v]))).max(0.0)),
            };
            w[(u, v)] = x;
            w[(v, u)] = x;
        }
    }
    Ok(WeightedGraph::new(w, Some(pt.tickers.clone()))?.with_id(pt.dates[end].clone()))
}

/// One complete network per window end-date, in date order. Graph ids are
/// the end dates.
pub fn sliding_networks(pt: &PriceTable, window: usize, mode: WeightMode) -> Result<Vec<WeightedGraph>> {
    check_window(pt, window)?;
    (window - 1..pt.dates.len()).map(|end| build_network(pt, end, window, mode)).collect()
}
