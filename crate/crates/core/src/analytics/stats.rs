//! Return statistics.
//!
//! Moments use the biased (population) central moments:
//! `m_j = (1/n) Σ (r_t - mean)^j`, skewness `m3 / m2^1.5`, excess kurtosis
//! `m4 / m2^2 - 3`, and `std = sqrt(m2)`.
//!
//! The ACF of absolute returns at lag `k` is
//! `Σ_{t>k} (x_t - x̄)(x_{t-k} - x̄) / Σ_t (x_t - x̄)^2` with `x_t = |r_t|`.
//! The Ljung-Box statistic over lags `1..=h` is
//! `Q = n(n+2) Σ_k ρ(k)^2 / (n-k)`, compared against a chi-squared
//! distribution with `h` degrees of freedom.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{AnalyticsError, OhlcBar};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnSeries {
    pub commodity: String,
    pub values: Vec<f64>,
}

pub fn log_returns(bars: &[OhlcBar]) -> Result<ReturnSeries, AnalyticsError> {
    if bars.len() < 2 {
        return Err(AnalyticsError::InsufficientData { need: 2, have: bars.len() });
    }
    if let Some(b) = bars.iter().find(|b| !(b.close > 0.0)) {
        return Err(AnalyticsError::NonPositivePrice(b.close));
    }
    let values = bars.windows(2).map(|w| w[1].close.ln() - w[0].close.ln()).collect();
    Ok(ReturnSeries { commodity: bars[0].commodity.clone(), values })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn moments(x: &[f64]) -> Result<Moments, AnalyticsError> {
    let n = x.len();
    if n < 4 {
        return Err(AnalyticsError::InsufficientData { need: 4, have: n });
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 <= 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok(Moments { n, mean, std: m2.sqrt(), skewness: m3 / m2.powf(1.5), excess_kurtosis: m4 / (m2 * m2) - 3.0 })
}

/// `ρ(1..=max_lag)` of absolute returns.
pub fn acf_abs(returns: &[f64], max_lag: usize) -> Result<Vec<f64>, AnalyticsError> {
    let n = returns.len();
    if max_lag == 0 || n <= max_lag {
        return Err(AnalyticsError::InsufficientData { need: max_lag.max(1) + 1, have: n });
    }
    let x: Vec<f64> = returns.iter().map(|r| r.abs()).collect();
    let mean = x.iter().sum::<f64>() / n as f64;
    let d: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = d.iter().map(|v| v * v).sum();
    if denom <= 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    Ok((1..=max_lag).map(|k| d[k..].iter().zip(&d[..n - k]).map(|(a, b)| a * b).sum::<f64>() / denom).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LjungBox {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Ljung-Box test on absolute returns.
pub fn ljung_box(returns: &[f64], lags: usize) -> Result<LjungBox, AnalyticsError> {
    let rho = acf_abs(returns, lags)?;
    let n = returns.len() as f64;
    let q = n * (n + 2.0) * rho.iter().enumerate().map(|(i, r)| r * r / (n - (i + 1) as f64)).sum::<f64>();
    let chi = ChiSquared::new(lags as f64).expect("positive degrees of freedom");
    Ok(LjungBox { statistic: q, dof: lags, p_value: chi.sf(q).clamp(0.0, 1.0) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Stability {
    pub log_price_range: f64,
    pub max_drawdown: f64,
}

/// Log-price range and maximum drawdown over bar closes.
pub fn stability_diagnostics(bars: &[OhlcBar]) -> Result<Stability, AnalyticsError> {
    let closes: Vec<f64> = bars.iter().map(|b| b.close).collect();
    stability_from_closes(&closes)
}

pub fn stability_from_closes(closes: &[f64]) -> Result<Stability, AnalyticsError> {
    if closes.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if let Some(&p) = closes.iter().find(|&&p| !(p > 0.0)) {
        return Err(AnalyticsError::NonPositivePrice(p));
    }
    let (lo, hi) = closes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    let mut peak = closes[0];
    let mut mdd: f64 = 0.0;
    for &p in closes {
        peak = peak.max(p);
        mdd = mdd.max(1.0 - p / peak);
    }
    Ok(Stability { log_price_range: hi.ln() - lo.ln(), max_drawdown: mdd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn bars(closes: &[f64]) -> Vec<OhlcBar> {
        closes
            .iter()
            .enumerate()
            .map(|(i, &c)| OhlcBar {
                commodity: "X".into(),
                interval_start: i as u64 * 300,
                open: c,
                high: c,
                low: c,
                close: c,
                volume: 1,
                trade_count: 1,
            })
            .collect()
    }

    #[test]
    fn log_return_identities() {
        assert_eq!(log_returns(&bars(&[100.0, 100.0])).unwrap().values, vec![0.0]);
        let r = log_returns(&bars(&[100.0, 100.0 * E])).unwrap().values;
        assert!((r[0] - 1.0).abs() < 1e-12);
        let r = log_returns(&bars(&[E, E * E, E])).unwrap().values;
        assert!((r[0] - 1.0).abs() < 1e-12 && (r[1] + 1.0).abs() < 1e-12);
        assert!(matches!(log_returns(&bars(&[1.0])), Err(AnalyticsError::InsufficientData { .. })));
        assert_eq!(log_returns(&bars(&[1.0, 0.0])), Err(AnalyticsError::NonPositivePrice(0.0)));
    }

    #[test]
    fn two_point_series_is_symmetric() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let m = moments(&x).unwrap();
        assert_eq!(m.skewness, 0.0);
        assert!((m.excess_kurtosis + 2.0).abs() < 1e-12);
        assert_eq!(moments(&[1.0; 8]), Err(AnalyticsError::ZeroVariance));
        assert!(matches!(moments(&[1.0, 2.0, 3.0]), Err(AnalyticsError::InsufficientData { .. })));
    }

    #[test]
    fn acf_edge_cases() {
        assert_eq!(acf_abs(&[0.5, -0.5, 0.5, -0.5], 1), Err(AnalyticsError::ZeroVariance));
        assert!(matches!(acf_abs(&[0.1, 0.2], 2), Err(AnalyticsError::InsufficientData { .. })));
        assert!(matches!(ljung_box(&[0.1, 0.2, 0.3], 3), Err(AnalyticsError::InsufficientData { .. })));
    }

    #[test]
    fn drawdown_and_range() {
        let s = stability_from_closes(&[100.0, 120.0, 90.0, 110.0]).unwrap();
        assert_eq!(s.max_drawdown, 0.25);
        let s = stability_from_closes(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.max_drawdown, 0.0);
        let s = stability_from_closes(&[304.398, 304.808]).unwrap();
        assert!((s.log_price_range - 0.001346).abs() < 1e-5);
        assert_eq!(stability_from_closes(&[]), Err(AnalyticsError::EmptyInput));
        let c = stability_from_closes(&[5.0; 4]).unwrap();
        assert_eq!((c.log_price_range, c.max_drawdown), (0.0, 0.0));
    }
}
