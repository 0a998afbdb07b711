//! Per-agent dynamic state: balance, inventory, physiology, education,
//! residence and job; net worth, efficiency, recovery actions, passive
//! depletion and the safety net.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::config::{CommodityId, EfficiencyParams, OccupationId, PolicyKind, WorldConfig};
use crate::units::{Level, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentState {
    pub id: AgentId,
    pub balance: Money,
    /// Units held, indexed by commodity.
    pub inventory: Vec<u64>,
    pub satiety: Level,
    pub energy: Level,
    pub health: Level,
    pub education: f64,
    pub residential_tier: u8,
    pub job: Option<OccupationId>,
    pub incapacitated: bool,
    pub low_satiety_streak: u32,
    /// In-game seconds since the agent last slept.
    pub awake_secs: u64,
    /// Lifetime "has consumed" flags, indexed by commodity.
    pub consumed: Vec<bool>,
    pub policy: PolicyKind,
    pub policy_tag: Option<String>,
    pub target_education: Option<f64>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AgentError {
    #[error("insufficient inventory of commodity {commodity:?}: need {need}, have {have}")]
    InsufficientInventory { commodity: CommodityId, need: u64, have: u64 },
    #[error("insufficient funds: need {need}, have {have}")]
    InsufficientFunds { need: Money, have: Money },
    #[error("commodity {0:?} is not edible")]
    NotEdible(CommodityId),
    #[error("agent is incapacitated")]
    Incapacitated,
    #[error("quantity or duration must be positive")]
    NonPositive,
    #[error("no price for held commodity {0:?}")]
    MissingPrice(CommodityId),
}

/// The change actually applied to an agent, after clamping.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateDelta {
    pub balance: Money,
    pub satiety: Level,
    pub energy: Level,
    pub health: Level,
    pub education: f64,
    pub inventory: Vec<(CommodityId, i64)>,
}

impl StateDelta {
    pub fn is_zero(&self) -> bool {
        self.balance == Money::ZERO
            && self.satiety.is_zero()
            && self.energy.is_zero()
            && self.health.is_zero()
            && self.education == 0.0
            && self.inventory.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RecoveryAction {
    Eat { item: CommodityId, qty: u64 },
    Sleep { secs: u64 },
    SeeDoctor,
}

impl AgentState {
    pub fn new(id: AgentId, cfg: &WorldConfig, policy: PolicyKind) -> Self {
        let n = cfg.commodities.len();
        let cap = cfg.params.cap(1);
        AgentState {
            id,
            balance: Money::ZERO,
            inventory: vec![0; n],
            satiety: cap,
            energy: cap,
            health: cap,
            education: 0.0,
            residential_tier: 1,
            job: None,
            incapacitated: false,
            low_satiety_streak: 0,
            awake_secs: 0,
            consumed: vec![false; n],
            policy,
            policy_tag: None,
            target_education: None,
        }
    }

    pub fn holding(&self, id: CommodityId) -> u64 {
        self.inventory[id.index()]
    }

    pub fn cap(&self, cfg: &WorldConfig) -> Level {
        cfg.params.cap(self.residential_tier)
    }

    pub fn take(&mut self, id: CommodityId, qty: u64) -> Result<(), AgentError> {
        let have = self.inventory[id.index()];
        if have < qty {
            return Err(AgentError::InsufficientInventory { commodity: id, need: qty, have });
        }
        self.inventory[id.index()] = have - qty;
        Ok(())
    }

    pub fn give(&mut self, id: CommodityId, qty: u64) {
        self.inventory[id.index()] += qty;
    }

    pub fn debit(&mut self, amount: Money) -> Result<(), AgentError> {
        if self.balance < amount {
            return Err(AgentError::InsufficientFunds { need: amount, have: self.balance });
        }
        self.balance -= amount;
        Ok(())
    }

    /// Applies additive changes to the three vitals, clamped to `[0, cap]`;
    /// returns the change actually applied.
    pub fn adjust_vitals(&mut self, cap: Level, satiety: Level, energy: Level, health: Level) -> (Level, Level, Level) {
        let before = (self.satiety, self.energy, self.health);
        self.satiety = (self.satiety + satiety).clamp_to(Level::ZERO, cap);
        self.energy = (self.energy + energy).clamp_to(Level::ZERO, cap);
        self.health = (self.health + health).clamp_to(Level::ZERO, cap);
        (self.satiety - before.0, self.energy - before.1, self.health - before.2)
    }

    pub fn refresh_incapacity(&mut self, cfg: &WorldConfig) {
        let t = &cfg.params.incapacity;
        self.incapacitated = self.energy < Level::from_f64(t.energy_min) || self.health < Level::from_f64(t.health_min);
    }
}

/// Value of the inventory at the given prices, each holding rounded to a
/// whole nano-unit. Unpooled commodities without a price count as zero.
pub fn inventory_value(agent: &AgentState, prices: &[Option<f64>], cfg: &WorldConfig) -> Result<Money, AgentError> {
    let mut total = Money::ZERO;
    for (i, &qty) in agent.inventory.iter().enumerate() {
        if qty == 0 {
            continue;
        }
        let id = CommodityId(i as u16);
        let price = match prices.get(i).copied().flatten() {
            Some(p) => p,
            None if !cfg.commodity(id).is_pooled() => 0.0,
            None => return Err(AgentError::MissingPrice(id)),
        };
        total += Money::from_f64(price * qty as f64);
    }
    Ok(total)
}

/// Balance plus inventory marked at the given prices.
pub fn net_worth(agent: &AgentState, prices: &[Option<f64>], cfg: &WorldConfig) -> Result<Money, AgentError> {
    Ok(agent.balance + inventory_value(agent, prices, cfg)?)
}

/// Productive efficiency in `[g_min, 1]`.
pub fn efficiency(agent: &AgentState, cap: Level, params: &EfficiencyParams) -> f64 {
    let frac = |x: Level| (x.to_f64() / cap.to_f64()).clamp(0.0, 1.0);
    let r_idx = (agent.residential_tier.max(1) as usize - 1).min(params.residential_factor.len().saturating_sub(1));
    let r = params.residential_factor.get(r_idx).copied().unwrap_or(1.0);
    let h = params.education_floor
        + (1.0 - params.education_floor) * (agent.education / params.education_saturation).clamp(0.0, 1.0);
    let g = frac(agent.satiety).powf(params.satiety_exponent)
        * frac(agent.energy).powf(params.energy_exponent)
        * frac(agent.health).powf(params.health_exponent)
        * r
        * h;
    g.clamp(params.g_min, 1.0)
}

pub fn apply_recovery_action(
    agent: &mut AgentState,
    action: RecoveryAction,
    cfg: &WorldConfig,
) -> Result<StateDelta, AgentError> {
    let cap = agent.cap(cfg);
    let phys = &cfg.params.physiology;
    match action {
        RecoveryAction::Eat { item, qty } => {
            if qty == 0 {
                return Err(AgentError::NonPositive);
            }
            let per_unit = cfg.commodity(item).satiety_value.ok_or(AgentError::NotEdible(item))?;
            agent.take(item, qty)?;
            agent.consumed[item.index()] = true;
            let (ds, _, _) = agent.adjust_vitals(cap, per_unit.times(qty), Level::ZERO, Level::ZERO);
            Ok(StateDelta { satiety: ds, inventory: vec![(item, -(qty as i64))], ..Default::default() })
        }
        RecoveryAction::Sleep { secs } => {
            if secs == 0 {
                return Err(AgentError::NonPositive);
            }
            let hours = secs as f64 / 3600.0;
            let (_, de, dh) = agent.adjust_vitals(
                cap,
                Level::ZERO,
                Level::from_f64(phys.sleep_energy_per_hour * hours),
                Level::from_f64(phys.sleep_health_per_hour * hours),
            );
            agent.awake_secs = 0;
            Ok(StateDelta { energy: de, health: dh, ..Default::default() })
        }
        RecoveryAction::SeeDoctor => {
            let fee = Money::from_f64(phys.doctor_fee);
            agent.debit(fee)?;
            let (_, _, dh) =
                agent.adjust_vitals(cap, Level::ZERO, Level::ZERO, Level::from_f64(phys.doctor_health_restore));
            Ok(StateDelta { balance: -fee, health: dh, ..Default::default() })
        }
    }
}

/// Passive dynamics over `elapsed` in-game seconds: satiety decay, awake
/// energy decay, illness draws, sleep-deprivation and starvation damage;
/// then the low-satiety streak and the incapacity flag are refreshed.
pub fn tick_physiology<R: Rng + ?Sized>(
    agent: &mut AgentState,
    elapsed: u64,
    asleep: bool,
    rng: &mut R,
    cfg: &WorldConfig,
) -> StateDelta {
    let phys = &cfg.params.physiology;
    let cap = agent.cap(cfg);
    let hours = elapsed as f64 / 3600.0;

    let satiety = -Level::from_f64(phys.satiety_decay_per_hour * hours);
    let energy = if asleep { Level::ZERO } else { -Level::from_f64(phys.energy_decay_per_hour * hours) };
    let mut health = Level::ZERO;
    // Always draw so the stream position does not depend on the probability.
    let u: f64 = rng.random();
    if u < phys.illness_prob_per_tick {
        health -= Level::from_f64(phys.illness_damage);
    }
    if !asleep {
        agent.awake_secs += elapsed;
        let threshold = (phys.sleep_deprivation_hours * 3600.0) as u64;
        if agent.awake_secs > threshold {
            let over = (agent.awake_secs - threshold).min(elapsed) as f64 / 3600.0;
            health -= Level::from_f64(phys.deprivation_health_per_hour * over);
        }
    }
    if agent.satiety.is_zero() {
        health -= Level::from_f64(phys.starvation_health_per_hour * hours);
    }
    let (ds, de, dh) = agent.adjust_vitals(cap, satiety, energy, health);

    if agent.satiety < Level::from_f64(cfg.params.safety_net.satiety_threshold) {
        agent.low_satiety_streak += 1;
    } else {
        agent.low_satiety_streak = 0;
    }
    agent.refresh_incapacity(cfg);
    StateDelta { satiety: ds, energy: de, health: dh, ..Default::default() }
}

/// Grants the subsidy when the low-satiety streak has persisted long
/// enough. With `feed_on_grant` the units are eaten on the spot.
pub fn apply_safety_net(agent: &mut AgentState, cfg: &WorldConfig) -> Option<StateDelta> {
    let net = &cfg.params.safety_net;
    if !net.enabled || agent.low_satiety_streak < net.persistence_ticks {
        return None;
    }
    let item = cfg.safety_net_item()?;
    agent.give(item, net.subsidy_amount);
    agent.low_satiety_streak = 0;
    let mut delta = StateDelta { inventory: vec![(item, net.subsidy_amount as i64)], ..Default::default() };
    if net.feed_on_grant && net.subsidy_amount > 0 {
        if let Ok(eat) = apply_recovery_action(agent, RecoveryAction::Eat { item, qty: net.subsidy_amount }, cfg) {
            delta.satiety = eat.satiety;
            delta.inventory.clear();
        }
    }
    Some(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> WorldConfig {
        WorldConfig::shipped("default").unwrap()
    }

    fn agent(cfg: &WorldConfig) -> AgentState {
        AgentState::new(AgentId(0), cfg, PolicyKind::SubsistenceWorker)
    }

    fn prices(cfg: &WorldConfig, pairs: &[(&str, f64)]) -> Vec<Option<f64>> {
        let mut p = vec![None; cfg.commodities.len()];
        for (name, price) in pairs {
            p[cfg.commodity_id(name).unwrap().index()] = Some(*price);
        }
        p
    }

    #[test]
    fn net_worth_examples() {
        let cfg = cfg();
        let mut a = agent(&cfg);
        a.balance = Money::from_units(100);
        a.give(cfg.commodity_id("Fish").unwrap(), 2);
        assert_eq!(net_worth(&a, &prices(&cfg, &[("Fish", 304.5)]), &cfg).unwrap(), Money::from_units(709));

        let mut b = agent(&cfg);
        b.balance = Money::from_units(50);
        assert_eq!(net_worth(&b, &prices(&cfg, &[]), &cfg).unwrap(), Money::from_units(50));

        let mut c = agent(&cfg);
        c.give(cfg.commodity_id("Wood").unwrap(), 3);
        c.give(cfg.commodity_id("Book").unwrap(), 1);
        let p = prices(&cfg, &[("Wood", 10.0), ("Book", 40.0)]);
        assert_eq!(net_worth(&c, &p, &cfg).unwrap(), Money::from_units(3 * 10 + 40));
    }

    #[test]
    fn gold_apple_counts_zero_and_missing_pooled_price_errors() {
        let cfg = cfg();
        let mut a = agent(&cfg);
        a.give(cfg.commodity_id("Gold Apple").unwrap(), 5);
        assert_eq!(net_worth(&a, &prices(&cfg, &[]), &cfg).unwrap(), Money::ZERO);
        a.give(cfg.commodity_id("Chip").unwrap(), 1);
        assert!(matches!(net_worth(&a, &prices(&cfg, &[]), &cfg), Err(AgentError::MissingPrice(_))));
    }

    #[test]
    fn efficiency_bounds() {
        let cfg = cfg();
        let params = &cfg.params.efficiency;
        let mut a = agent(&cfg);
        a.residential_tier = 6;
        let cap = a.cap(&cfg);
        a.satiety = cap;
        a.energy = cap;
        a.health = cap;
        a.education = params.education_saturation;
        assert_eq!(efficiency(&a, cap, params), 1.0);

        let mut z = agent(&cfg);
        z.satiety = Level::ZERO;
        z.energy = Level::ZERO;
        z.health = Level::ZERO;
        assert_eq!(efficiency(&z, z.cap(&cfg), params), params.g_min);
    }

    #[test]
    fn eat_bread_adds_table_value() {
        let mut cfg = cfg();
        let bread = cfg.commodity_id("Bread").unwrap();
        cfg.commodities[bread.index()].satiety_value = Some(Level::from_units(60));
        cfg.params.state_caps = vec![500.0];
        let mut a = agent(&cfg);
        a.satiety = Level::from_units(290);
        a.give(bread, 1);
        let d = apply_recovery_action(&mut a, RecoveryAction::Eat { item: bread, qty: 1 }, &cfg).unwrap();
        assert_eq!(a.satiety, Level::from_units(350));
        assert_eq!(d.satiety, Level::from_units(60));
        assert!(a.consumed[bread.index()]);
    }

    #[test]
    fn sleep_at_cap_is_clamped() {
        let cfg = cfg();
        let mut a = agent(&cfg);
        let d = apply_recovery_action(&mut a, RecoveryAction::Sleep { secs: 8 * 3600 }, &cfg).unwrap();
        assert_eq!(a.energy, a.cap(&cfg));
        assert!(d.energy.is_zero());
    }

    #[test]
    fn doctor_needs_fee() {
        let cfg = cfg();
        let mut a = agent(&cfg);
        a.balance = Money::from_units(1);
        assert!(matches!(
            apply_recovery_action(&mut a, RecoveryAction::SeeDoctor, &cfg),
            Err(AgentError::InsufficientFunds { .. })
        ));
    }

    #[test]
    fn zero_dynamics_identity() {
        let mut cfg = cfg();
        let p = &mut cfg.params.physiology;
        p.satiety_decay_per_hour = 0.0;
        p.energy_decay_per_hour = 0.0;
        p.illness_prob_per_tick = 0.0;
        p.deprivation_health_per_hour = 0.0;
        let mut a = agent(&cfg);
        let before = a.clone();
        let d = tick_physiology(&mut a, 300, false, &mut ChaCha8Rng::seed_from_u64(1), &cfg);
        assert!(d.is_zero());
        assert_eq!((a.satiety, a.energy, a.health), (before.satiety, before.energy, before.health));
    }

    #[test]
    fn forced_illness_costs_exact_damage() {
        let mut cfg = cfg();
        let p = &mut cfg.params.physiology;
        p.satiety_decay_per_hour = 0.0;
        p.energy_decay_per_hour = 0.0;
        p.illness_prob_per_tick = 1.0;
        p.illness_damage = 17.0;
        let mut a = agent(&cfg);
        let h0 = a.health;
        tick_physiology(&mut a, 300, false, &mut ChaCha8Rng::seed_from_u64(9), &cfg);
        assert_eq!(h0 - a.health, Level::from_units(17));
    }

    #[test]
    fn low_energy_incapacitates() {
        let cfg = cfg();
        let mut a = agent(&cfg);
        a.energy = Level::from_f64(cfg.params.incapacity.energy_min + 0.2);
        tick_physiology(&mut a, 300, false, &mut ChaCha8Rng::seed_from_u64(3), &cfg);
        assert!(a.incapacitated);
    }

    #[test]
    fn safety_net_fires_at_persistence() {
        let mut cfg = cfg();
        cfg.params.safety_net.feed_on_grant = false;
        let n = cfg.params.safety_net.persistence_ticks;
        let apple = cfg.commodity_id("Apple").unwrap();
        let mut a = agent(&cfg);
        a.low_satiety_streak = n - 1;
        assert!(apply_safety_net(&mut a, &cfg).is_none());
        a.low_satiety_streak = n;
        let d = apply_safety_net(&mut a, &cfg).unwrap();
        assert_eq!(d.inventory, vec![(apple, cfg.params.safety_net.subsidy_amount as i64)]);
        assert_eq!(a.low_satiety_streak, 0);
        assert_eq!(a.holding(apple), cfg.params.safety_net.subsidy_amount);
    }

    #[test]
    fn well_fed_agent_never_subsidised() {
        let mut cfg = cfg();
        cfg.params.physiology.satiety_decay_per_hour = 0.0;
        let mut a = agent(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5000 {
            tick_physiology(&mut a, 300, false, &mut rng, &cfg);
            assert!(apply_safety_net(&mut a, &cfg).is_none());
        }
    }
}
