//! Education and occupation stratification of final net worth.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::AnalyticsError;

pub const BIN_WIDTH: f64 = 50.0;
pub const EDUCATION_MAX: f64 = 1500.0;

/// The subset of a `snapshots.csv` row used here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub tick: u64,
    pub agent_id: u32,
    pub policy: String,
    #[serde(default)]
    pub tag: String,
    pub balance: f64,
    pub education: f64,
    pub residential_tier: u8,
    #[serde(default)]
    pub job: String,
    pub job_tier: Option<u8>,
    pub net_worth: f64,
    #[serde(default)]
    pub inventory: String,
}

impl SnapshotRow {
    /// Units held per commodity name, parsed from `Name:qty;...`.
    pub fn holdings(&self) -> Vec<(&str, u64)> {
        self.inventory
            .split(';')
            .filter_map(|kv| kv.rsplit_once(':'))
            .filter_map(|(k, v)| Some((k, v.parse().ok()?)))
            .collect()
    }

    /// Net worth re-priced at the given quotes; unquoted holdings count zero.
    pub fn revalue(&self, quotes: &BTreeMap<String, f64>) -> f64 {
        self.balance
            + self.holdings().iter().map(|(k, q)| *q as f64 * quotes.get(*k).copied().unwrap_or(0.0)).sum::<f64>()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EducationBin {
    pub lo: f64,
    pub hi: f64,
    pub agents: usize,
    pub median_net_worth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationRank {
    pub occupation: String,
    pub tier: Option<u8>,
    pub agents: usize,
    pub median_net_worth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StratificationReport {
    pub bins: Vec<EducationBin>,
    /// `[c0, c1, c2]` of `c0 + c1 H + c2 H^2` fitted to bin midpoints and
    /// medians; absent with fewer than three bins.
    pub quadratic: Option<[f64; 3]>,
    /// Descending by median net worth; unemployed agents excluded.
    pub occupations: Vec<OccupationRank>,
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Least-squares quadratic through `(x, y)`. Abscissae are rescaled to
/// unit range before solving to keep the system well conditioned.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Option<[f64; 3]> {
    if x.len() < 3 || x.len() != y.len() {
        return None;
    }
    let s = x.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let a = DMatrix::from_fn(x.len(), 3, |i, j| (x[i] / s).powi(j as i32));
    let b = DVector::from_column_slice(y);
    let sol = a.svd(true, true).solve(&b, 1e-14).ok()?;
    Some([sol[0], sol[1] / s, sol[2] / (s * s)])
}

pub fn stratification_report(rows: &[SnapshotRow]) -> Result<StratificationReport, AnalyticsError> {
    if rows.is_empty() {
        return Err(AnalyticsError::EmptyPopulation);
    }
    let nbins = (EDUCATION_MAX / BIN_WIDTH) as usize;
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); nbins];
    for r in rows.iter().filter(|r| (0.0..=EDUCATION_MAX).contains(&r.education)) {
        let i = ((r.education / BIN_WIDTH) as usize).min(nbins - 1);
        buckets[i].push(r.net_worth);
    }
    let bins: Vec<EducationBin> = buckets
        .iter_mut()
        .enumerate()
        .filter(|(_, b)| !b.is_empty())
        .map(|(i, b)| EducationBin {
            lo: i as f64 * BIN_WIDTH,
            hi: (i + 1) as f64 * BIN_WIDTH,
            agents: b.len(),
            median_net_worth: median(b),
        })
        .collect();
    let mid: Vec<f64> = bins.iter().map(|b| 0.5 * (b.lo + b.hi)).collect();
    let med: Vec<f64> = bins.iter().map(|b| b.median_net_worth).collect();

    let mut by_job: BTreeMap<&str, (Option<u8>, Vec<f64>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| !r.job.is_empty()) {
        let e = by_job.entry(&r.job).or_insert((r.job_tier, Vec::new()));
        e.1.push(r.net_worth);
    }
    let mut occupations: Vec<OccupationRank> = by_job
        .into_iter()
        .map(|(name, (tier, mut w))| OccupationRank {
            occupation: name.to_string(),
            tier,
            agents: w.len(),
            median_net_worth: median(&mut w),
        })
        .collect();
    occupations.sort_by(|a, b| b.median_net_worth.total_cmp(&a.median_net_worth).then(a.occupation.cmp(&b.occupation)));
    Ok(StratificationReport { bins, quadratic: quadratic_fit(&mid, &med), occupations })
}
