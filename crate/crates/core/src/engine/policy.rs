//! Scripted decision policies. A policy sees a read-only snapshot of its
//! agent and the world and returns the actions for this tick plus, at
//! recruitment time, an ordered list of job applications.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::action::Action;
use super::validate::{eat_from_stock, sleep_to_full};
use crate::agent::AgentState;
use crate::amm::Market;
use crate::config::{CommodityId, OccupationId, PolicyKind, Sector, WorldConfig};
use crate::labor::{StudyKind, WageSchedule};
use crate::units::{Level, Money};

const HOUR: u64 = 3600;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clock {
    pub tick: u64,
    pub in_game_seconds: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FailureNote {
    pub tick: u64,
    pub action: Action,
    pub reason: String,
}

pub struct AgentView<'a> {
    pub agent: &'a AgentState,
    pub market: &'a Market,
    pub cfg: &'a WorldConfig,
    pub wages: &'a WageSchedule,
    /// Effective knowledge thresholds from the latest recruitment cycle.
    pub thresholds: &'a [f64],
    pub clock: Clock,
    pub recent_failures: &'a [FailureNote],
}

impl AgentView<'_> {
    fn cap(&self) -> Level {
        self.agent.cap(self.cfg)
    }

    fn frac(&self, x: Level) -> f64 {
        x.to_f64() / self.cap().to_f64()
    }

    fn recently_failed(&self, item: CommodityId) -> bool {
        self.recent_failures.iter().any(|f| {
            self.clock.tick.saturating_sub(f.tick) < 24
                && matches!(f.action, Action::Craft { item: i, .. } | Action::Buy { item: i, .. } if i == item)
        })
    }

    /// Occupations the agent currently qualifies for, best wage first.
    fn reachable_jobs(&self) -> Vec<OccupationId> {
        let a = self.agent;
        let mut jobs: Vec<(f64, OccupationId)> = self
            .cfg
            .occupations
            .iter()
            .filter(|o| o.r_min <= a.residential_tier)
            .filter(|o| a.education >= self.thresholds.get(o.id.index()).copied().unwrap_or(o.h_floor))
            .filter(|o| o.prereq_commodity.is_none_or(|c| a.consumed[c.index()] || a.holding(c) > 0))
            .map(|o| (self.wages.wage(o.id).max(o.base_wage), o.id))
            .collect();
        jobs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        let current = a.job.map_or(0.0, |j| self.wages.wage(j).max(self.cfg.occupation(j).base_wage));
        jobs.into_iter().filter(|&(w, id)| Some(id) != a.job && w > current).map(|(_, id)| id).collect()
    }
}

pub trait Policy: Send + Sync {
    fn decide(&self, view: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<Action>;
    fn applications(&self, view: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<OccupationId>;
}

pub fn policy_for(kind: PolicyKind) -> &'static dyn Policy {
    match kind {
        PolicyKind::SubsistenceWorker => &SubsistenceWorker,
        PolicyKind::StudentInvestor => &StudentInvestor,
        PolicyKind::ProducerTrader => &ProducerTrader,
        PolicyKind::RandomExplorer => &RandomExplorer,
    }
}

/// Urgent physiological upkeep shared by every policy: doctor, food, sleep.
fn upkeep(v: &AgentView<'_>) -> Option<Vec<Action>> {
    let a = v.agent;
    let cfg = v.cfg;
    let fee = Money::from_f64(cfg.params.physiology.doctor_fee);
    if v.frac(a.health) < 0.4 && a.balance >= fee {
        return Some(vec![Action::SeeDoctor]);
    }
    if v.frac(a.satiety) < 0.4 {
        if let Some(eat) = eat_from_stock(a, cfg) {
            return Some(vec![eat]);
        }
        if let Some(plan) = buy_meal(v) {
            return Some(plan);
        }
    }
    let awake_limit = (cfg.params.physiology.sleep_deprivation_hours * 0.8 * HOUR as f64) as u64;
    if v.frac(a.energy) < 0.3 || a.awake_secs > awake_limit {
        return Some(vec![sleep_to_full(a, cfg)]);
    }
    None
}

/// Buys the food with the most satiety per unit of currency and eats it.
fn buy_meal(v: &AgentView<'_>) -> Option<Vec<Action>> {
    let a = v.agent;
    let room = (v.cap() - a.satiety).to_f64() * 0.9;
    let mut best: Option<(f64, CommodityId, u64)> = None;
    for c in v.cfg.commodities.iter().filter(|c| c.is_food) {
        let (Some(per), Some(price)) = (c.satiety_value, v.market.quote(c.id)) else { continue };
        let qty = ((room / per.to_f64()).ceil() as u64).max(1);
        let Ok(cost) = v.market.buy_total(c.id, qty) else { continue };
        if cost > a.balance {
            continue;
        }
        // Agents with savings pay up for more filling food.
        let score = if a.balance.to_f64() > 3000.0 && cost.to_f64() < 0.05 * a.balance.to_f64() {
            per.to_f64()
        } else {
            per.to_f64() / price
        };
        if best.is_none_or(|(s, _, _)| score > s) {
            best = Some((score, c.id, qty));
        }
    }
    if best.is_none() {
        // Fall back to whatever single unit is affordable.
        for c in v.cfg.commodities.iter().filter(|c| c.is_food) {
            if v.market.buy_total(c.id, 1).is_ok_and(|cost| cost <= a.balance) {
                best = Some((0.0, c.id, 1));
                break;
            }
        }
    }
    let (_, item, qty) = best?;
    Some(vec![Action::Buy { item, qty }, Action::Eat { item, qty }])
}

fn work_shift(v: &AgentView<'_>, hours: u64) -> Option<Action> {
    let job = v.agent.job?;
    if v.agent.incapacitated {
        return None;
    }
    let e_rate = v.cfg.occupation(job).energy_per_hour.to_f64().max(1e-9);
    let spare = (v.agent.energy.to_f64() - 0.3 * v.cap().to_f64()) / e_rate;
    let h = (spare.floor() as u64).min(hours);
    (h >= 1).then_some(Action::Work { secs: h * HOUR })
}

/// Craft `item` with purchases for missing inputs, then optionally sell.
fn craft_plan(v: &AgentView<'_>, item: CommodityId, energy_share: f64, spend_share: f64) -> Option<Vec<Action>> {
    let a = v.agent;
    let cfg = v.cfg;
    let recipe = cfg.recipe(item)?;
    if cfg.commodity(item).r_min? > a.residential_tier {
        return None;
    }
    let mut n = 40u64;
    if let Some(k) = Level::from_f64(a.energy.to_f64() * energy_share).whole_units(recipe.energy_cost) {
        n = n.min(k);
    }
    if let Some(k) = Level::from_f64(a.satiety.to_f64() * energy_share).whole_units(recipe.satiety_cost) {
        n = n.min(k);
    }
    let budget = a.balance.to_f64() * spend_share;
    let unit_input: f64 =
        recipe.inputs.iter().map(|&(c, per)| per as f64 * v.market.quote(c).unwrap_or(f64::INFINITY)).sum();
    if unit_input > 0.0 {
        n = n.min((budget / (unit_input * 1.2)).floor() as u64);
    }
    if n == 0 {
        return None;
    }
    let mut plan = Vec::new();
    for &(input, per) in &recipe.inputs {
        let need = (per * n).saturating_sub(a.holding(input));
        if need > 0 {
            plan.push(Action::Buy { item: input, qty: need });
        }
    }
    plan.push(Action::Craft { item, units: n, labor_secs: HOUR });
    Some(plan)
}

/// Margin per unit of energy at current quotes.
fn margin_per_energy(v: &AgentView<'_>, item: CommodityId) -> Option<f64> {
    let recipe = v.cfg.recipe(item)?;
    let out = v.market.quote(item)?;
    let mut cost = 0.0;
    for &(c, per) in &recipe.inputs {
        let held = v.agent.holding(c) >= per;
        cost += if held { 0.0 } else { per as f64 * v.market.quote(c)? };
    }
    Some((out - cost) / recipe.energy_cost.to_f64().max(1.0))
}

fn craftable(v: &AgentView<'_>) -> Vec<CommodityId> {
    v.cfg
        .commodities
        .iter()
        .filter(|c| c.sector != Sector::SpecialReward)
        .filter(|c| c.r_min.is_some_and(|r| r <= v.agent.residential_tier))
        .filter(|c| v.cfg.recipe(c.id).is_some() && !v.recently_failed(c.id))
        .map(|c| c.id)
        .collect()
}

/// Sells held units of `item` if the quote is at least `floor` times the
/// opening price.
/// Quote relative to the opening price.
fn price_ratio(v: &AgentView<'_>, item: CommodityId) -> Option<f64> {
    Some(v.market.quote(item)? / v.market.initial_price(item)?)
}

fn sell_if_priced(v: &AgentView<'_>, item: CommodityId, floor: f64, keep: u64) -> Option<Action> {
    let held = v.agent.holding(item).saturating_sub(keep);
    let q = v.market.quote(item)?;
    let p0 = v.market.initial_price(item)?;
    (held > 0 && q >= floor * p0).then_some(Action::Sell { item, qty: held })
}

pub struct SubsistenceWorker;

impl Policy for SubsistenceWorker {
    fn decide(&self, v: &AgentView<'_>, _rng: &mut ChaCha8Rng) -> Vec<Action> {
        if let Some(plan) = upkeep(v) {
            return plan;
        }
        if let Some(w) = work_shift(v, 4) {
            return vec![w];
        }
        if v.agent.job.is_none() && !v.agent.incapacitated {
            // Scrape a living from raw produce until a job comes through.
            let best = craftable(v)
                .into_iter()
                .filter(|&c| v.cfg.recipe(c).is_some_and(|r| r.inputs.is_empty()))
                .filter(|&c| price_ratio(v, c).is_some_and(|r| r >= 0.6))
                .filter_map(|c| margin_per_energy(v, c).map(|m| (m, c)))
                .max_by(|a, b| a.0.total_cmp(&b.0));
            if let Some((_, item)) = best {
                if let Some(mut plan) = craft_plan(v, item, 0.25, 0.0) {
                    let n = match plan.last() {
                        Some(Action::Craft { units, .. }) => *units,
                        _ => 0,
                    };
                    plan.push(Action::Sell { item, qty: n });
                    plan.push(Action::Idle { secs: HOUR });
                    return plan;
                }
            }
        }
        vec![Action::Idle { secs: HOUR }]
    }

    fn applications(&self, v: &AgentView<'_>, _rng: &mut ChaCha8Rng) -> Vec<OccupationId> {
        v.reachable_jobs()
    }
}

pub struct StudentInvestor;

impl StudentInvestor {
    const RESERVE: f64 = 600.0;

    fn study(v: &AgentView<'_>) -> Vec<Action> {
        let a = v.agent;
        let cfg = v.cfg;
        let secs = 2 * HOUR;
        let paid = cfg.params.study.paid_learning.fee_per_hour * 2.0;
        if a.balance.to_f64() > Self::RESERVE + paid {
            return vec![Action::Study { study: StudyKind::PaidLearning, secs }];
        }
        let reading = &cfg.params.study.reading;
        if let Some(book) = reading.material.as_deref().and_then(|n| cfg.commodity_id(n)) {
            if a.holding(book) >= reading.material_units {
                return vec![Action::Study { study: StudyKind::Reading, secs }];
            }
        }
        vec![Action::Study { study: StudyKind::SelfStudy, secs }]
    }

    fn invest(v: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Option<Vec<Action>> {
        let a = v.agent;
        let bal = a.balance.to_f64();
        if bal > 4.0 * Self::RESERVE {
            // Buy the pooled non-food commodity that is cheapest relative to its opening price.
            let mut picks: Vec<(f64, CommodityId)> = v
                .market
                .pools()
                .filter(|p| !v.cfg.commodity(p.commodity).is_food)
                .filter_map(|p| Some((p.quote() / v.market.initial_price(p.commodity)?, p.commodity)))
                .collect();
            picks.sort_by(|x, y| x.0.total_cmp(&y.0));
            let &(_, item) = picks.get(rng.random_range(0..picks.len().min(3)))?;
            let budget = Money::from_f64((bal - 2.0 * Self::RESERVE) * 0.3);
            let qty = v.market.pool(item)?.affordable(budget);
            return (qty > 0).then(|| vec![Action::Buy { item, qty }]);
        }
        if bal < Self::RESERVE {
            let held = v
                .cfg
                .commodities
                .iter()
                .filter(|c| !c.is_food && v.market.quote(c.id).is_some() && a.holding(c.id) > 0)
                .map(|c| c.id)
                .next()?;
            return Some(vec![Action::Sell { item: held, qty: a.holding(held).div_ceil(2) }]);
        }
        None
    }
}

impl Policy for StudentInvestor {
    fn decide(&self, v: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<Action> {
        if let Some(plan) = upkeep(v) {
            return plan;
        }
        let a = v.agent;
        let target = a.target_education.unwrap_or(200.0);
        if a.balance.to_f64() < Self::RESERVE / 2.0 {
            if let Some(w) = work_shift(v, 4) {
                return vec![w];
            }
        }
        if a.education < target && v.frac(a.energy) > 0.45 {
            return Self::study(v);
        }
        // Line up the prerequisite of the best job within reach.
        for o in v.cfg.occupations.iter().rev() {
            if o.r_min > a.residential_tier || o.h_floor > a.education {
                continue;
            }
            if let Some(c) = o.prereq_commodity {
                if !a.consumed[c.index()]
                    && a.holding(c) == 0
                    && !v.recently_failed(c)
                    && v.market.buy_total(c, 1).is_ok_and(|cost| cost <= a.balance)
                {
                    return vec![Action::Buy { item: c, qty: 1 }];
                }
            }
            break;
        }
        if let Some(w) = work_shift(v, 4) {
            return vec![w];
        }
        if let Some(plan) = Self::invest(v, rng) {
            return plan;
        }
        if a.education < target {
            return Self::study(v);
        }
        vec![Action::Idle { secs: HOUR }]
    }

    fn applications(&self, v: &AgentView<'_>, _rng: &mut ChaCha8Rng) -> Vec<OccupationId> {
        v.reachable_jobs()
    }
}

pub struct ProducerTrader;

impl Policy for ProducerTrader {
    fn decide(&self, v: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<Action> {
        if let Some(plan) = upkeep(v) {
            return plan;
        }
        let a = v.agent;
        let floor = if a.balance.to_f64() < 300.0 { 0.5 } else { 0.95 };
        // Take profits on anything held above its opening price.
        let mut sells: Vec<Action> = v
            .cfg
            .commodities
            .iter()
            .filter(|c| !c.is_food || a.holding(c.id) > 6)
            .filter_map(|c| sell_if_priced(v, c.id, floor, if c.is_food { 6 } else { 0 }))
            .collect();
        if sells.len() > 3 {
            sells.truncate(3);
        }
        if a.incapacitated {
            return if sells.is_empty() { vec![Action::Idle { secs: HOUR }] } else { sells };
        }
        let mut ranked: Vec<(f64, CommodityId)> = craftable(v)
            .into_iter()
            .filter_map(|c| margin_per_energy(v, c).map(|m| (m, c)))
            .filter(|&(m, c)| m > 0.0 && price_ratio(v, c).is_some_and(|r| r >= 0.6))
            .collect();
        ranked.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        ranked.truncate(3);
        if let Some(&(_, item)) = ranked.choose(rng) {
            if let Some(mut plan) = craft_plan(v, item, 0.35, 0.5) {
                plan.extend(sells);
                plan.push(Action::Idle { secs: HOUR });
                return plan;
            }
        }
        if let Some(w) = work_shift(v, 4) {
            sells.push(w);
            return sells;
        }
        sells.push(Action::Idle { secs: HOUR });
        sells
    }

    fn applications(&self, v: &AgentView<'_>, _rng: &mut ChaCha8Rng) -> Vec<OccupationId> {
        if v.agent.job.is_some() {
            return Vec::new();
        }
        v.reachable_jobs()
    }
}

pub struct RandomExplorer;

impl Policy for RandomExplorer {
    fn decide(&self, v: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<Action> {
        if let Some(plan) = upkeep(v) {
            return plan;
        }
        let a = v.agent;
        let pooled: Vec<CommodityId> = v.market.pools().map(|p| p.commodity).collect();
        match rng.random_range(0..6u8) {
            0 | 1 => {
                let &item = pooled.choose(rng).expect("at least one pool");
                // Heavy-tailed order size: Pareto with tail index 1.5.
                let u: f64 = rng.random_range(1e-6..1.0);
                let size = u.powf(-1.0 / 1.5);
                let budget = Money::from_f64((a.balance.to_f64() * 0.04 * size).min(a.balance.to_f64() * 0.6));
                let qty = v.market.pool(item).map_or(0, |p| p.affordable(budget));
                if qty > 0 {
                    return vec![Action::Buy { item, qty }];
                }
            }
            2 => {
                let held: Vec<CommodityId> = pooled.iter().copied().filter(|&c| a.holding(c) > 0).collect();
                if let Some(&item) = held.choose(rng) {
                    let qty = rng.random_range(1..=a.holding(item));
                    return vec![Action::Sell { item, qty }];
                }
            }
            3 => {
                if let Some(&item) = craftable(v).choose(rng) {
                    if let Some(plan) = craft_plan(v, item, 0.2, 0.2) {
                        return plan;
                    }
                }
            }
            4 => {
                return vec![Action::Study { study: StudyKind::SelfStudy, secs: HOUR }];
            }
            _ => {
                if let Some(w) = work_shift(v, 2) {
                    return vec![w];
                }
            }
        }
        vec![Action::Idle { secs: HOUR / 2 }]
    }

    fn applications(&self, v: &AgentView<'_>, rng: &mut ChaCha8Rng) -> Vec<OccupationId> {
        let mut jobs = v.reachable_jobs();
        if jobs.len() > 1 {
            let k = rng.random_range(1..=jobs.len());
            jobs.truncate(k);
        }
        jobs
    }
}
