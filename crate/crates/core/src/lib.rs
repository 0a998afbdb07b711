//! Deterministic agent-based economy simulator.
//!
//! Agents eat, sleep, study, work and craft along a Leontief supply chain,
//! trading every commodity against a constant-product liquidity pool whose
//! reserves mint and burn currency. Occupations are gated by residential
//! tier and by knowledge thresholds tied to quantiles of the population's
//! education scores. The `analytics` module rebuilds OHLC bars and return
//! statistics from the transaction log.

pub mod agent;
pub mod amm;
pub mod analytics;
pub mod config;
pub mod engine;
pub mod labor;
pub mod production;
pub mod units;

pub use agent::{AgentId, AgentState};
pub use amm::{LiquidityPool, Market, Side, TradeReceipt};
pub use config::{load_scenario, validate_catalog, CommodityId, OccupationId, WorldConfig};
pub use units::{Level, Money};
