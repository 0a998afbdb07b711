//! Browser bindings for three small views of the simulator: the AMM
//! slippage curve, the labor-market threshold and a short price series.
//!
//! Each export returns a JSON string; the plain functions behind them are
//! usable (and tested) natively.

use agora_core::engine::World;
use agora_core::labor::dynamic_threshold;
use agora_core::{CommodityId, LiquidityPool, WorldConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_SIM_TICKS: u32 = 5000;

#[derive(Debug, PartialEq, Serialize)]
pub struct SlippagePoint {
    pub qty: u64,
    pub buy_avg: Option<f64>,
    pub sell_avg: Option<f64>,
    /// Relative distance of the average fill from the pre-trade quote.
    pub buy_slippage: Option<f64>,
    pub sell_slippage: Option<f64>,
}

#[derive(Debug, PartialEq, Serialize)]
pub struct SlippageCurve {
    pub quote: f64,
    pub inventory: u64,
    pub points: Vec<SlippagePoint>,
}

pub fn slippage(price: f64, inventory: u64, max_qty: u64, points: u32) -> Result<SlippageCurve, String> {
    if !(price.is_finite() && price > 0.0) || inventory == 0 || max_qty == 0 || points == 0 {
        return Err("price, inventory, max_qty and points must be positive".into());
    }
    let pool = LiquidityPool::new(CommodityId(0), price, inventory);
    let quote = pool.quote();
    let mut out = Vec::new();
    let mut last = 0;
    for i in 1..=points as u64 {
        let qty = (max_qty * i / points as u64).max(1);
        if qty == last {
            continue;
        }
        last = qty;
        let buy_avg = pool.buy_cost(qty).ok().map(|m| m.to_f64() / qty as f64);
        let sell_avg = pool.sell_proceeds(qty).ok().map(|m| m.to_f64() / qty as f64);
        out.push(SlippagePoint {
            qty,
            buy_avg,
            sell_avg,
            buy_slippage: buy_avg.map(|p| p / quote - 1.0),
            sell_slippage: sell_avg.map(|p| 1.0 - p / quote),
        });
    }
    Ok(SlippageCurve { quote, inventory, points: out })
}

#[derive(Debug, PartialEq, Serialize)]
pub struct ThresholdView {
    pub threshold: f64,
    pub eligible: usize,
    pub population: usize,
    /// Sorted scores, for drawing the empirical CDF.
    pub scores: Vec<f64>,
}

/// Scores from a comma or whitespace separated list; an empty list uses
/// the initial education of the shipped default population.
pub fn threshold(scores: &str, share: f64, floor: f64) -> Result<ThresholdView, String> {
    if !(share > 0.0 && share <= 1.0) {
        return Err("share must lie in (0, 1]".into());
    }
    let cfg = WorldConfig::shipped("default").map_err(|e| e.to_string())?;
    let mut values: Vec<f64> = if scores.trim().is_empty() {
        World::new(cfg.clone()).agents.iter().map(|a| a.education).collect()
    } else {
        scores
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| format!("not a number: {t}")))
            .collect::<Result<_, _>>()?
    };
    values.sort_by(f64::total_cmp);
    let mut occ = cfg.occupations[0].clone();
    occ.eligibility_share = share;
    occ.h_floor = floor;
    let t = dynamic_threshold(&occ, &values).map_err(|e| e.to_string())?;
    Ok(ThresholdView {
        threshold: t,
        eligible: values.iter().filter(|&&s| s >= t).count(),
        population: values.len(),
        scores: values,
    })
}

#[derive(Debug, PartialEq, Serialize)]
pub struct PriceSeries {
    pub commodity: String,
    pub commodities: Vec<String>,
    pub quote: Vec<f64>,
    pub price_index: Vec<f64>,
    pub trades: u64,
}

pub fn simulate(scenario: &str, seed: u64, ticks: u32, commodity: &str) -> Result<PriceSeries, String> {
    if ticks > MAX_SIM_TICKS {
        return Err(format!("at most {MAX_SIM_TICKS} ticks in the browser"));
    }
    let cfg = WorldConfig::shipped(scenario).map_err(|e| e.to_string())?.with_seed(seed);
    let id = cfg.commodity_id(commodity).ok_or_else(|| format!("unknown commodity {commodity}"))?;
    let commodities = cfg.pooled_ids().map(|c| cfg.name_of(c).to_string()).collect();
    let mut world = World::new(cfg);
    let first = world.market.quote(id).ok_or_else(|| format!("{commodity} has no pool"))?;
    let (mut quote, mut price_index) = (vec![first], vec![world.price_index().pcr_overall]);
    let mut trades = 0;
    for _ in 0..ticks {
        let report = world.run_tick().map_err(|e| e.to_string())?;
        trades += report.receipts.len() as u64;
        quote.push(world.market.quote(id).expect("pool persists"));
        price_index.push(world.price_index().pcr_overall);
    }
    Ok(PriceSeries { commodity: commodity.to_string(), commodities, quote, price_index, trades })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.map(|v| serde_json::to_string(&v).expect("serializes")).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn slippage_curve(price: f64, inventory: f64, max_qty: f64, points: u32) -> Result<String, JsError> {
    to_js(slippage(price, inventory as u64, max_qty as u64, points))
}

#[wasm_bindgen]
pub fn threshold_explorer(scores: &str, share: f64, floor: f64) -> Result<String, JsError> {
    to_js(threshold(scores, share, floor))
}

#[wasm_bindgen]
pub fn price_series(scenario: &str, seed: u32, ticks: u32, commodity: &str) -> Result<String, JsError> {
    to_js(simulate(scenario, seed as u64, ticks, commodity))
}
