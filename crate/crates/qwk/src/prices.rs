//! Closing-price CSV files with header `date,TICK1,TICK2,...`.

use std::path::Path;

use chrono::NaiveDate;
use qwk_core::finance::PriceTable;

use crate::error::{DataError, Result};

const MISSING: [&str; 5] = ["", "NA", "NaN", "nan", "null"];

/// Inclusive date range to keep while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DateSpan {
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl DateSpan {
    fn contains(&self, d: NaiveDate) -> bool {
        self.from.is_none_or(|f| d >= f) && self.to.is_none_or(|t| d <= t)
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

/// Prices read from a CSV file, with tickers that have a missing value inside
/// `span` already removed.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPrices {
    pub table: PriceTable,
    pub dropped: Vec<String>,
}

pub fn load_prices(path: &Path, span: DateSpan) -> Result<LoadedPrices> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| DataError::format(path, None, e.to_string()))?;
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(DataError::format(path, Some(1), e.to_string())),
        None => return Err(DataError::format(path, None, "file is empty")),
    };
    if header.get(0).map(str::trim) != Some("date") {
        return Err(DataError::format(path, Some(1), "first column must be 'date'"));
    }
    let tickers: Vec<String> = header.iter().skip(1).map(|t| t.trim().to_string()).collect();
    if tickers.is_empty() {
        return Err(DataError::format(path, Some(1), "no ticker columns"));
    }

    let mut dates = Vec::new();
    let mut closes = Vec::new();
    for (i, rec) in records.enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| DataError::format(path, Some(line), e.to_string()))?;
        if rec.len() != tickers.len() + 1 {
            return Err(DataError::format(
                path,
                Some(line),
                format!("{} fields, expected {}", rec.len(), tickers.len() + 1),
            ));
        }
        let raw_date = rec.get(0).unwrap_or_default();
        let date = parse_date(raw_date)
            .ok_or_else(|| DataError::format(path, Some(line), format!("unparseable date {raw_date:?}")))?;
        if !span.contains(date) {
            continue;
        }
        let row = rec
            .iter()
            .skip(1)
            .zip(&tickers)
            .map(|(cell, t)| {
                let cell = cell.trim();
                if MISSING.contains(&cell) {
                    return Ok(None);
                }
                match cell.parse::<f64>() {
                    Ok(p) if p.is_finite() && p > 0.0 => Ok(Some(p)),
                    _ => Err(DataError::format(path, Some(line), format!("price {cell:?} for {t} is not a positive number"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        dates.push(date.format("%Y-%m-%d").to_string());
        closes.push(row);
    }
    if dates.is_empty() {
        return Err(DataError::format(path, None, "no price rows in the requested span"));
    }
    let table = PriceTable::new(tickers, dates, closes).map_err(|e| DataError::format(path, None, e.to_string()))?;
    let (table, dropped) = table.retain_complete();
    Ok(LoadedPrices { table, dropped })
}

/// Writes a complete price table in the same CSV layout.
pub fn save_prices(tickers: &[String], dates: &[String], closes: &[Vec<f64>], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| DataError::format(path, None, e.to_string()))?;
    let io = |e: csv::Error| DataError::format(path, None, e.to_string());
    let mut header = vec!["date".to_string()];
    header.extend(tickers.iter().cloned());
    w.write_record(&header).map_err(io)?;
    for (d, row) in dates.iter().zip(closes) {
        let mut rec = vec![d.clone()];
        rec.extend(row.iter().map(|p| p.to_string()));
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| DataError::io(path, e))
}
