//! Constant-product liquidity pools with an elastic money supply.
//!
//! Each pool keeps an integer inventory `IS` and an invariant `k` in
//! nano-unit-units. The currency reserve is always `ceil(k / IS)`, so the
//! reserve is a function of inventory alone: split trades and round trips
//! are exact, and `IS * CR - k` stays in `[0, IS)`.

use serde::Serialize;
use thiserror::Error;

use crate::agent::{AgentId, AgentState};
use crate::config::{CommodityId, WorldConfig};
use crate::units::{Money, MONEY_SCALE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TradeError {
    #[error("quantity must be positive")]
    NonPositiveQuantity,
    #[error("pool holds {available} units, cannot sell {requested}")]
    InsufficientLiquidity { requested: u64, available: u64 },
    #[error("insufficient funds: need {need}, have {have}")]
    InsufficientFunds { need: Money, have: Money },
    #[error("insufficient inventory: need {need}, have {have}")]
    InsufficientInventory { need: u64, have: u64 },
    #[error("commodity {0:?} has no pool")]
    NoPool(CommodityId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiquidityPool {
    pub commodity: CommodityId,
    inventory: u64,
    k: u128,
}

impl LiquidityPool {
    /// Opens a pool whose reserve is `price * inventory`, with the price
    /// rounded to a whole nano-unit.
    pub fn new(commodity: CommodityId, price: f64, inventory: u64) -> Self {
        assert!(inventory > 0 && price > 0.0, "pool needs positive reserves");
        let unit = Money::from_f64(price).nanos().max(1) as u128;
        let reserve = unit * inventory as u128;
        LiquidityPool { commodity, inventory, k: reserve * inventory as u128 }
    }

    /// Opens a pool from explicit reserves.
    pub fn from_reserves(commodity: CommodityId, inventory: u64, currency: Money) -> Self {
        assert!(inventory > 0 && currency.nanos() > 0, "pool needs positive reserves");
        LiquidityPool { commodity, inventory, k: currency.nanos() as u128 * inventory as u128 }
    }

    pub fn inventory(&self) -> u64 {
        self.inventory
    }

    pub fn k(&self) -> u128 {
        self.k
    }

    pub fn currency(&self) -> Money {
        Money::from_nanos(reserve_at(self.k, self.inventory) as i128)
    }

    /// Marginal price `CR / IS`.
    pub fn quote(&self) -> f64 {
        reserve_at(self.k, self.inventory) as f64 / MONEY_SCALE as f64 / self.inventory as f64
    }

    /// `|IS * CR - k| / k`.
    pub fn invariant_error(&self) -> f64 {
        let product = reserve_at(self.k, self.inventory) * self.inventory as u128;
        product.abs_diff(self.k) as f64 / self.k as f64
    }

    /// Currency a buyer must pay for `qty` units.
    pub fn buy_cost(&self, qty: u64) -> Result<Money, TradeError> {
        if qty == 0 {
            return Err(TradeError::NonPositiveQuantity);
        }
        if qty >= self.inventory {
            return Err(TradeError::InsufficientLiquidity { requested: qty, available: self.inventory });
        }
        let after = reserve_at(self.k, self.inventory - qty);
        Ok(Money::from_nanos((after - reserve_at(self.k, self.inventory)) as i128))
    }

    /// Currency a seller receives for `qty` units.
    pub fn sell_proceeds(&self, qty: u64) -> Result<Money, TradeError> {
        if qty == 0 {
            return Err(TradeError::NonPositiveQuantity);
        }
        let Some(total) = self.inventory.checked_add(qty) else {
            return Err(TradeError::InsufficientLiquidity { requested: qty, available: u64::MAX - self.inventory });
        };
        let after = reserve_at(self.k, total);
        Ok(Money::from_nanos((reserve_at(self.k, self.inventory) - after) as i128))
    }

    /// Largest quantity purchasable with `budget`, by bisection on the
    /// monotone cost curve.
    pub fn affordable(&self, budget: Money) -> u64 {
        let (mut lo, mut hi) = (0u64, self.inventory.saturating_sub(1));
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            match self.buy_cost(mid) {
                Ok(c) if c <= budget => lo = mid,
                _ => hi = mid - 1,
            }
        }
        lo
    }

    /// Takes `qty` units out of the pool and returns the currency paid in.
    pub fn buy(&mut self, qty: u64) -> Result<Money, TradeError> {
        let cost = self.buy_cost(qty)?;
        self.apply(Side::Buy, qty);
        Ok(cost)
    }

    /// Puts `qty` units into the pool and returns the currency paid out.
    pub fn sell(&mut self, qty: u64) -> Result<Money, TradeError> {
        let proceeds = self.sell_proceeds(qty)?;
        self.apply(Side::Sell, qty);
        Ok(proceeds)
    }

    fn apply(&mut self, side: Side, qty: u64) {
        match side {
            Side::Buy => self.inventory -= qty,
            Side::Sell => self.inventory += qty,
        }
    }
}

fn reserve_at(k: u128, inventory: u64) -> u128 {
    k.div_ceil(inventory as u128)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeReceipt {
    pub commodity: CommodityId,
    pub side: Side,
    pub quantity: u64,
    /// Currency moved between agent and pool, excluding fees.
    pub currency_delta: Money,
    pub fee: Money,
    pub effective_price: f64,
    pub marginal_price_pre: f64,
    pub marginal_price_post: f64,
    pub tick: u64,
    pub timestamp: u64,
    pub agent_id: AgentId,
}

/// Simulation-level record of currency entering and leaving circulation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SupplyLedger {
    /// Paid to sellers out of pool reserves.
    pub minted_by_sales: Money,
    /// Paid by buyers into pool reserves.
    pub burned_by_purchases: Money,
    pub wages_minted: Money,
    /// Trade fees plus service fees (doctor visits, paid learning).
    pub fees_burned: Money,
}

impl SupplyLedger {
    /// Net change of currency held by agents since the start.
    pub fn circulating_change(&self) -> Money {
        self.minted_by_sales - self.burned_by_purchases + self.wages_minted - self.fees_burned
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct TradeStamp {
    pub tick: u64,
    pub in_game_seconds: u64,
}

/// All pools of a world, indexed by commodity.
#[derive(Clone, Debug, PartialEq)]
pub struct Market {
    pools: Vec<Option<LiquidityPool>>,
    initial_prices: Vec<Option<f64>>,
    initial_reserves: Money,
    pub fee_rate: f64,
    pub ledger: SupplyLedger,
}

impl Market {
    pub fn new(cfg: &WorldConfig) -> Self {
        let pools: Vec<Option<LiquidityPool>> = cfg
            .commodities
            .iter()
            .map(|c| match (c.initial_price, c.pool_inventory) {
                (Some(p), Some(q)) => Some(LiquidityPool::new(c.id, p, q)),
                _ => None,
            })
            .collect();
        let initial_prices = pools.iter().map(|p| p.as_ref().map(LiquidityPool::quote)).collect();
        let initial_reserves = pools.iter().flatten().map(LiquidityPool::currency).sum();
        Market {
            pools,
            initial_prices,
            initial_reserves,
            fee_rate: cfg.params.trade_fee,
            ledger: SupplyLedger::default(),
        }
    }

    pub fn pool(&self, id: CommodityId) -> Option<&LiquidityPool> {
        self.pools.get(id.index()).and_then(Option::as_ref)
    }

    pub fn pools(&self) -> impl Iterator<Item = &LiquidityPool> {
        self.pools.iter().flatten()
    }

    /// Marginal quote per commodity; `None` for unpooled ones.
    pub fn quotes(&self) -> Vec<Option<f64>> {
        self.pools.iter().map(|p| p.as_ref().map(LiquidityPool::quote)).collect()
    }

    pub fn quote(&self, id: CommodityId) -> Option<f64> {
        self.pool(id).map(LiquidityPool::quote)
    }

    pub fn initial_price(&self, id: CommodityId) -> Option<f64> {
        self.initial_prices.get(id.index()).copied().flatten()
    }

    pub fn total_reserves(&self) -> Money {
        self.pools().map(LiquidityPool::currency).sum()
    }

    pub fn initial_reserves(&self) -> Money {
        self.initial_reserves
    }

    /// Total the buyer pays for `qty` units, fee included.
    pub fn buy_total(&self, id: CommodityId, qty: u64) -> Result<Money, TradeError> {
        let pool = self.pool(id).ok_or(TradeError::NoPool(id))?;
        let cost = pool.buy_cost(qty)?;
        Ok(cost + fee_on(cost, self.fee_rate))
    }

    pub fn execute_buy(
        &mut self,
        id: CommodityId,
        qty: u64,
        buyer: &mut AgentState,
        stamp: TradeStamp,
    ) -> Result<TradeReceipt, TradeError> {
        let fee_rate = self.fee_rate;
        let pool = self.pools.get_mut(id.index()).and_then(Option::as_mut).ok_or(TradeError::NoPool(id))?;
        let cost = pool.buy_cost(qty)?;
        let fee = fee_on(cost, fee_rate);
        let total = cost + fee;
        if buyer.balance < total {
            return Err(TradeError::InsufficientFunds { need: total, have: buyer.balance });
        }
        let pre = pool.quote();
        pool.apply(Side::Buy, qty);
        let post = pool.quote();
        buyer.balance -= total;
        buyer.give(id, qty);
        self.ledger.burned_by_purchases += cost;
        self.ledger.fees_burned += fee;
        Ok(receipt(id, Side::Buy, qty, cost, fee, pre, post, buyer.id, stamp))
    }

    pub fn execute_sell(
        &mut self,
        id: CommodityId,
        qty: u64,
        seller: &mut AgentState,
        stamp: TradeStamp,
    ) -> Result<TradeReceipt, TradeError> {
        let fee_rate = self.fee_rate;
        let pool = self.pools.get_mut(id.index()).and_then(Option::as_mut).ok_or(TradeError::NoPool(id))?;
        if qty == 0 {
            return Err(TradeError::NonPositiveQuantity);
        }
        let have = seller.holding(id);
        if have < qty {
            return Err(TradeError::InsufficientInventory { need: qty, have });
        }
        let proceeds = pool.sell_proceeds(qty)?;
        let fee = fee_on(proceeds, fee_rate);
        let pre = pool.quote();
        pool.apply(Side::Sell, qty);
        let post = pool.quote();
        seller.inventory[id.index()] -= qty;
        seller.balance += proceeds - fee;
        self.ledger.minted_by_sales += proceeds;
        self.ledger.fees_burned += fee;
        Ok(receipt(id, Side::Sell, qty, proceeds, fee, pre, post, seller.id, stamp))
    }

    pub fn price_index(&self, cfg: &WorldConfig) -> PriceIndexSnapshot {
        compute_price_index(self, cfg)
    }
}

fn fee_on(amount: Money, rate: f64) -> Money {
    if rate == 0.0 {
        Money::ZERO
    } else {
        Money::from_nanos((amount.nanos() as f64 * rate).round() as i128)
    }
}

#[allow(clippy::too_many_arguments)]
fn receipt(
    commodity: CommodityId,
    side: Side,
    quantity: u64,
    delta: Money,
    fee: Money,
    pre: f64,
    post: f64,
    agent_id: AgentId,
    stamp: TradeStamp,
) -> TradeReceipt {
    TradeReceipt {
        commodity,
        side,
        quantity,
        currency_delta: delta,
        fee,
        effective_price: delta.to_f64() / quantity as f64,
        marginal_price_pre: pre,
        marginal_price_post: post,
        tick: stamp.tick,
        timestamp: stamp.in_game_seconds,
        agent_id,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriceIndexSnapshot {
    /// Current over initial price, per pooled commodity.
    pub pcr: Vec<(CommodityId, f64)>,
    pub pcr_food: f64,
    pub pcr_nonfood: f64,
    pub pcr_overall: f64,
    pub n_food: usize,
    pub n_nonfood: usize,
}

/// Geometric means per category, weighted arithmetic mean overall.
pub fn compute_price_index(market: &Market, cfg: &WorldConfig) -> PriceIndexSnapshot {
    let mut pcr = Vec::new();
    let (mut log_food, mut log_non) = (0.0, 0.0);
    let (mut n_food, mut n_non) = (0usize, 0usize);
    for pool in market.pools() {
        let id = pool.commodity;
        let Some(p0) = market.initial_price(id) else { continue };
        let ratio = pool.quote() / p0;
        pcr.push((id, ratio));
        if cfg.commodity(id).is_food {
            log_food += ratio.ln();
            n_food += 1;
        } else {
            log_non += ratio.ln();
            n_non += 1;
        }
    }
    let pcr_food = if n_food > 0 { (log_food / n_food as f64).exp() } else { 1.0 };
    let pcr_nonfood = if n_non > 0 { (log_non / n_non as f64).exp() } else { 1.0 };
    let n = (n_food + n_non).max(1) as f64;
    let pcr_overall = n_food as f64 / n * pcr_food + n_non as f64 / n * pcr_nonfood;
    PriceIndexSnapshot { pcr, pcr_food, pcr_nonfood, pcr_overall, n_food, n_nonfood: n_non }
}

/// Index from explicit per-commodity ratios, for callers outside a market.
pub fn index_from_ratios(food: &[f64], nonfood: &[f64]) -> (f64, f64, f64) {
    let geo = |xs: &[f64]| {
        if xs.is_empty() {
            1.0
        } else {
            (xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64).exp()
        }
    };
    let (f, nf) = (geo(food), geo(nonfood));
    let n = (food.len() + nonfood.len()).max(1) as f64;
    (f, nf, food.len() as f64 / n * f + nonfood.len() as f64 / n * nf)
}
