use std::fmt::Write as _;
use std::path::Path;

use agora_core::analytics::{OhlcBar, StratificationReport, StylizedFactsReport, REPORT_SCHEMA};
use agora_core::engine::RunSummary;
use serde::Serialize;

use crate::{write_json, CliError};

pub const RUN_DIR: &str = "run";
pub const FACTS_JSON: &str = "stylized_facts.json";
pub const FACTS_CSV: &str = "stylized_facts.csv";
pub const BARS_CSV: &str = "bars.csv";
pub const STRAT_JSON: &str = "stratification.json";
pub const BINS_CSV: &str = "education_bins.csv";
pub const OCCUPATIONS_CSV: &str = "occupations.csv";
pub const BUNDLE_FILES: [&str; 5] = [FACTS_JSON, FACTS_CSV, STRAT_JSON, BINS_CSV, OCCUPATIONS_CSV];

#[derive(Serialize)]
pub struct Skipped {
    pub commodity: String,
    pub reason: String,
}

#[derive(Serialize)]
pub struct FactsDocument {
    pub schema: &'static str,
    pub interval: u64,
    pub lags: usize,
    pub commodities: Vec<StylizedFactsReport>,
    pub skipped: Vec<Skipped>,
}

impl FactsDocument {
    pub fn new(interval: u64, lags: usize, commodities: Vec<StylizedFactsReport>, skipped: Vec<Skipped>) -> Self {
        FactsDocument { schema: REPORT_SCHEMA, interval, lags, commodities, skipped }
    }
}

#[derive(Serialize)]
pub struct StratDocument {
    pub schema: &'static str,
    pub stratification: StratificationReport,
}

impl StratDocument {
    pub fn new(stratification: StratificationReport) -> Self {
        StratDocument { schema: REPORT_SCHEMA, stratification }
    }
}

#[derive(Serialize)]
pub struct Bundle<'a> {
    pub summary: &'a RunSummary,
    pub facts: &'a FactsDocument,
    pub stratification: &'a StratDocument,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

/// One row per commodity: the descriptive statistics and volatility
/// dependence columns.
pub fn write_facts_table(path: &Path, facts: &[StylizedFactsReport]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record([
        "commodity",
        "trades",
        "bars",
        "volume",
        "mean",
        "std",
        "skewness",
        "excess_kurtosis",
        "acf1_abs",
        "ljung_box_q",
        "ljung_box_dof",
        "ljung_box_p",
        "log_price_range",
        "max_drawdown",
    ])
    .map_err(csv_err(path))?;
    for f in facts {
        w.write_record([
            f.commodity.clone(),
            f.trades.to_string(),
            f.bars.to_string(),
            f.volume.to_string(),
            format!("{:.6e}", f.moments.mean),
            format!("{:.6e}", f.moments.std),
            format!("{:.6}", f.moments.skewness),
            format!("{:.6}", f.moments.excess_kurtosis),
            format!("{:.6}", f.acf_abs.first().copied().unwrap_or(f64::NAN)),
            format!("{:.6}", f.ljung_box.statistic),
            f.ljung_box.dof.to_string(),
            format!("{:.6e}", f.ljung_box.p_value),
            format!("{:.6}", f.log_price_range),
            format!("{:.6}", f.max_drawdown),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_bars(path: &Path, bars: &[OhlcBar]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    for b in bars {
        w.serialize(b).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_strat(dir: &Path, doc: &StratDocument) -> Result<(), CliError> {
    write_json(&dir.join(STRAT_JSON), doc)?;
    let path = dir.join(BINS_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for b in &doc.stratification.bins {
        w.serialize(b).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;
    let path = dir.join(OCCUPATIONS_CSV);
    let mut w = csv::Writer::from_path(&path).map_err(csv_err(&path))?;
    for o in &doc.stratification.occupations {
        w.serialize(o).map_err(csv_err(&path))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))
}

pub fn facts_text(facts: &[StylizedFactsReport]) -> String {
    let mut s = format!(
        "{:<20} {:>7} {:>6} {:>11} {:>10} {:>9} {:>9} {:>8} {:>10} {:>9}\n",
        "commodity", "trades", "bars", "mean", "std", "skew", "ex.kurt", "acf1|r|", "LB Q", "LB p"
    );
    for f in facts {
        let _ = writeln!(
            s,
            "{:<20} {:>7} {:>6} {:>11.3e} {:>10.3e} {:>9.3} {:>9.3} {:>8.3} {:>10.2} {:>9.2e}",
            f.commodity,
            f.trades,
            f.bars,
            f.moments.mean,
            f.moments.std,
            f.moments.skewness,
            f.moments.excess_kurtosis,
            f.acf_abs.first().copied().unwrap_or(f64::NAN),
            f.ljung_box.statistic,
            f.ljung_box.p_value
        );
    }
    s
}

pub fn strat_text(r: &StratificationReport) -> String {
    let mut s = String::from("education bin      agents  median net worth\n");
    for b in &r.bins {
        let _ = writeln!(s, "[{:>5.0}, {:>5.0})  {:>8}  {:>16.2}", b.lo, b.hi, b.agents, b.median_net_worth);
    }
    if let Some([c0, c1, c2]) = r.quadratic {
        let _ = writeln!(s, "quadratic fit: {c0:.3} + {c1:.5} H + {c2:.7} H^2");
    }
    s.push_str("occupation               tier  agents  median net worth\n");
    for o in &r.occupations {
        let tier = o.tier.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:<24} {:>4}  {:>6}  {:>16.2}", o.occupation, tier, o.agents, o.median_net_worth);
    }
    s
}
