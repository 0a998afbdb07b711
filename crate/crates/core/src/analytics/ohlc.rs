use std::collections::BTreeSet;

use serde::Serialize;

use super::{AnalyticsError, TransactionRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OhlcBar {
    pub commodity: String,
    /// In-game seconds.
    pub interval_start: u64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
    pub trade_count: usize,
}

fn check_sorted(log: &[TransactionRow]) -> Result<(), AnalyticsError> {
    match log.windows(2).position(|w| w[1].in_game_seconds < w[0].in_game_seconds) {
        Some(i) => Err(AnalyticsError::UnsortedLog { row: i + 1 }),
        None => Ok(()),
    }
}

/// Bars of effective trade prices per `interval` seconds. Intervals without
/// trades produce no bar.
pub fn build_ohlc(log: &[TransactionRow], interval: u64, commodity: &str) -> Result<Vec<OhlcBar>, AnalyticsError> {
    if interval == 0 {
        return Err(AnalyticsError::BadInterval);
    }
    check_sorted(log)?;
    let mut bars: Vec<OhlcBar> = Vec::new();
    for r in log.iter().filter(|r| r.commodity == commodity) {
        let start = r.in_game_seconds / interval * interval;
        let p = r.effective_price;
        match bars.last_mut() {
            Some(b) if b.interval_start == start => {
                b.high = b.high.max(p);
                b.low = b.low.min(p);
                b.close = p;
                b.volume += r.quantity;
                b.trade_count += 1;
            }
            _ => bars.push(OhlcBar {
                commodity: commodity.to_string(),
                interval_start: start,
                open: p,
                high: p,
                low: p,
                close: p,
                volume: r.quantity,
                trade_count: 1,
            }),
        }
    }
    if bars.is_empty() {
        return Err(AnalyticsError::EmptyLog(commodity.to_string()));
    }
    Ok(bars)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainComparison {
    pub normalize_at: u64,
    /// Union of bar starts from `normalize_at` on.
    pub grid: Vec<u64>,
    /// Close divided by the close in force at `normalize_at`, carried
    /// forward over grid points where the commodity did not trade.
    pub series: Vec<(String, Vec<f64>)>,
}

pub fn chain_comparison(
    log: &[TransactionRow],
    chain: &[&str],
    interval: u64,
    normalize_at: u64,
) -> Result<ChainComparison, AnalyticsError> {
    let mut all = Vec::with_capacity(chain.len());
    for &c in chain {
        let bars = build_ohlc(log, interval, c).map_err(|e| match e {
            AnalyticsError::EmptyLog(_) => {
                AnalyticsError::MissingCommodity { commodity: c.to_string(), at: normalize_at }
            }
            other => other,
        })?;
        all.push(bars);
    }
    let base_bar = normalize_at / interval * interval;
    let grid: Vec<u64> = all
        .iter()
        .flatten()
        .map(|b| b.interval_start)
        .filter(|&s| s >= base_bar)
        .chain(std::iter::once(base_bar))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut series = Vec::with_capacity(chain.len());
    for (&name, bars) in chain.iter().zip(&all) {
        let close_at = |t: u64| bars.iter().take_while(|b| b.interval_start <= t).last().map(|b| b.close);
        let base = close_at(base_bar)
            .ok_or(AnalyticsError::MissingCommodity { commodity: name.to_string(), at: normalize_at })?;
        let values = grid.iter().map(|&t| close_at(t).unwrap_or(base) / base).collect();
        series.push((name.to_string(), values));
    }
    Ok(ChainComparison { normalize_at, grid, series })
}
