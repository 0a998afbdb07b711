//! Post-hoc analysis of run logs: OHLC bars, return statistics, stability
//! diagnostics, value-chain comparison and wealth stratification.
//!
//! Everything here is a pure function over parsed logs, so the same input
//! file always produces the same report.

pub mod ohlc;
pub mod stats;
pub mod stratify;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ohlc::{build_ohlc, chain_comparison, ChainComparison, OhlcBar};
pub use stats::{
    acf_abs, ljung_box, log_returns, moments, stability_diagnostics, LjungBox, Moments, ReturnSeries, Stability,
};
pub use stratify::{stratification_report, SnapshotRow, StratificationReport};

pub const REPORT_SCHEMA: &str = "agora-report/1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("transaction log is not sorted by time at row {row}")]
    UnsortedLog { row: usize },
    #[error("no trades for {0}")]
    EmptyLog(String),
    #[error("interval must be positive")]
    BadInterval,
    #[error("need at least {need} observations, got {have}")]
    InsufficientData { need: usize, have: usize },
    #[error("non-positive price {0}")]
    NonPositivePrice(f64),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("no bars to analyse")]
    EmptyInput,
    #[error("commodity {commodity} has no trade at or before {at}s")]
    MissingCommodity { commodity: String, at: u64 },
    #[error("no agents to stratify")]
    EmptyPopulation,
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed row in {path}: {message}")]
    Parse { path: String, message: String },
}

impl AnalyticsError {
    pub fn is_io(&self) -> bool {
        matches!(self, AnalyticsError::Io { .. } | AnalyticsError::Parse { .. })
    }
}

/// One row of `transactions.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransactionRow {
    pub tick: u64,
    pub in_game_seconds: u64,
    pub commodity: String,
    pub side: String,
    pub quantity: u64,
    pub currency_delta: String,
    pub effective_price: f64,
    pub marginal_price_pre: f64,
    pub marginal_price_post: f64,
    pub agent_id: u32,
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, AnalyticsError> {
    let p = path.display().to_string();
    let mut reader =
        csv::Reader::from_path(path).map_err(|e| AnalyticsError::Io { path: p.clone(), message: e.to_string() })?;
    reader
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| AnalyticsError::Parse { path: p, message: e.to_string() })
}

pub fn read_transactions(path: &Path) -> Result<Vec<TransactionRow>, AnalyticsError> {
    read_csv(path)
}

/// Reads a snapshot file and keeps only the rows of the last tick present.
pub fn read_final_snapshots(path: &Path) -> Result<Vec<SnapshotRow>, AnalyticsError> {
    let rows: Vec<SnapshotRow> = read_csv(path)?;
    let last = rows.iter().map(|r| r.tick).max();
    Ok(rows.into_iter().filter(|r| Some(r.tick) == last).collect())
}

#[derive(Deserialize)]
struct QuoteRow {
    commodity: String,
    quote: f64,
}

/// Final marginal quotes by commodity name, from a `quotes.csv` file.
pub fn read_quotes(path: &Path) -> Result<std::collections::BTreeMap<String, f64>, AnalyticsError> {
    let rows: Vec<QuoteRow> = read_csv(path)?;
    Ok(rows.into_iter().map(|r| (r.commodity, r.quote)).collect())
}

/// Commodities ordered by trade count, most traded first, ties by name.
pub fn trade_counts(log: &[TransactionRow]) -> Vec<(String, usize)> {
    let mut counts = std::collections::BTreeMap::<&str, usize>::new();
    for r in log {
        *counts.entry(&r.commodity).or_default() += 1;
    }
    let mut out: Vec<(String, usize)> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StylizedFactsReport {
    pub commodity: String,
    pub trades: usize,
    pub bars: usize,
    pub volume: u64,
    pub moments: Moments,
    pub acf_abs: Vec<f64>,
    pub ljung_box: LjungBox,
    pub log_price_range: f64,
    pub max_drawdown: f64,
}

/// Bars, returns and every per-commodity statistic in one pass.
pub fn stylized_facts(
    log: &[TransactionRow],
    commodity: &str,
    interval: u64,
    lags: usize,
) -> Result<StylizedFactsReport, AnalyticsError> {
    let bars = build_ohlc(log, interval, commodity)?;
    let returns = log_returns(&bars)?;
    let stab = stability_diagnostics(&bars)?;
    Ok(StylizedFactsReport {
        commodity: commodity.to_string(),
        trades: bars.iter().map(|b| b.trade_count).sum(),
        bars: bars.len(),
        volume: bars.iter().map(|b| b.volume).sum(),
        moments: moments(&returns.values)?,
        acf_abs: acf_abs(&returns.values, lags)?,
        ljung_box: ljung_box(&returns.values, lags)?,
        log_price_range: stab.log_price_range,
        max_drawdown: stab.max_drawdown,
    })
}
