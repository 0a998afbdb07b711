//! Leontief production: output is bounded by the scarcest input, the
//! agent's energy and satiety, and the labor time available, behind a
//! residential gate.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{efficiency, AgentId, AgentState};
use crate::config::{CommodityId, Recipe, WorldConfig};
use crate::units::Level;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Binding {
    ResidentialGate,
    Material(CommodityId),
    Energy,
    Satiety,
    Labor,
    Requested,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductionRequest {
    pub agent_id: AgentId,
    pub commodity: CommodityId,
    pub desired_units: u64,
    /// In-game seconds the agent allocates.
    pub labor_budget: Level,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductionOutcome {
    pub commodity: CommodityId,
    pub produced_units: u64,
    pub binding_constraint: Binding,
    pub consumed: Vec<(CommodityId, u64)>,
    pub energy_spent: Level,
    pub satiety_spent: Level,
    /// In-game seconds of labor used, after efficiency scaling.
    pub labor_spent: Level,
    pub reward_granted: Option<CommodityId>,
    pub reward_units: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProductionError {
    #[error("agent is incapacitated")]
    Incapacitated,
    #[error("commodity {0:?} has no recipe")]
    NoRecipe(CommodityId),
}

/// Whole units the agent could make right now and the constraint that
/// binds. Zero-coefficient terms are left out of the minimum; ties go to
/// the earliest of gate, materials (catalog order), energy, satiety, labor.
pub fn max_output(agent: &AgentState, recipe: &Recipe, r_min: u8, labor_budget: Level) -> (u64, Binding) {
    if agent.residential_tier < r_min {
        return (0, Binding::ResidentialGate);
    }
    let mut best = (u64::MAX, Binding::Requested);
    let mut consider = |units: u64, why: Binding| {
        if units < best.0 {
            best = (units, why);
        }
    };
    for &(id, per) in &recipe.inputs {
        consider(agent.holding(id) / per, Binding::Material(id));
    }
    if let Some(n) = agent.energy.whole_units(recipe.energy_cost) {
        consider(n, Binding::Energy);
    }
    if let Some(n) = agent.satiety.whole_units(recipe.satiety_cost) {
        consider(n, Binding::Satiety);
    }
    if let Some(n) = labor_budget.whole_units(recipe.time_cost) {
        consider(n, Binding::Labor);
    }
    best
}

/// Labor budget in recipe-time after efficiency: a unit costing `tau`
/// seconds takes `tau / eff` real seconds.
pub fn effective_labor(labor_budget: Level, eff: f64) -> Level {
    Level::from_millis((labor_budget.millis() as f64 * eff).floor() as i64)
}

pub fn execute_production<R: Rng + ?Sized>(
    agent: &mut AgentState,
    request: &ProductionRequest,
    rng: &mut R,
    cfg: &WorldConfig,
) -> Result<ProductionOutcome, ProductionError> {
    if agent.incapacitated {
        return Err(ProductionError::Incapacitated);
    }
    let recipe = cfg.recipe(request.commodity).ok_or(ProductionError::NoRecipe(request.commodity))?;
    let r_min = cfg.commodity(request.commodity).r_min.unwrap_or(u8::MAX);
    let eff = efficiency(agent, agent.cap(cfg), &cfg.params.efficiency);
    let (cap_units, mut binding) = max_output(agent, recipe, r_min, effective_labor(request.labor_budget, eff));
    let units = if request.desired_units < cap_units {
        binding = Binding::Requested;
        request.desired_units
    } else {
        cap_units
    };

    let mut consumed = Vec::with_capacity(recipe.inputs.len());
    for &(id, per) in &recipe.inputs {
        let used = per * units;
        agent.inventory[id.index()] -= used;
        if used > 0 {
            agent.consumed[id.index()] = true;
        }
        consumed.push((id, used));
    }
    let energy_spent = recipe.energy_cost.times(units);
    let satiety_spent = recipe.satiety_cost.times(units);
    agent.energy -= energy_spent;
    agent.satiety -= satiety_spent;
    agent.give(request.commodity, units);

    let mut reward_units = 0;
    if recipe.reward_prob > 0.0 {
        for _ in 0..units {
            if rng.random::<f64>() < recipe.reward_prob {
                reward_units += 1;
            }
        }
    }
    let reward_granted = match recipe.reward_item {
        Some(item) if reward_units > 0 => {
            agent.give(item, reward_units);
            Some(item)
        }
        _ => None,
    };
    Ok(ProductionOutcome {
        commodity: request.commodity,
        produced_units: units,
        binding_constraint: binding,
        consumed,
        energy_spent,
        satiety_spent,
        labor_spent: Level::from_f64(recipe.time_cost.to_f64() * units as f64 / eff),
        reward_granted,
        reward_units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PolicyKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (WorldConfig, AgentState) {
        let mut cfg = WorldConfig::shipped("default").unwrap();
        cfg.params.state_caps = vec![1000.0];
        let a = AgentState::new(AgentId(0), &cfg, PolicyKind::ProducerTrader);
        (cfg, a)
    }

    #[test]
    fn chip_binds_on_circuit_board() {
        let (cfg, mut a) = setup();
        let chip = cfg.commodity_id("Chip").unwrap();
        let board = cfg.commodity_id("Circuit Board").unwrap();
        a.residential_tier = 5;
        a.give(cfg.commodity_id("Transistor").unwrap(), 12);
        a.give(board, 3);
        a.energy = Level::from_units(500);
        a.satiety = Level::from_units(200);
        let out = max_output(&a, cfg.recipe(chip).unwrap(), 5, Level::from_units(100));
        assert_eq!(out, (3, Binding::Material(board)));
    }

    #[test]
    fn gate_blocks() {
        let (cfg, mut a) = setup();
        let chip = cfg.commodity_id("Chip").unwrap();
        a.residential_tier = 4;
        assert_eq!(max_output(&a, cfg.recipe(chip).unwrap(), 5, Level::from_units(100)), (0, Binding::ResidentialGate));
    }

    #[test]
    fn apple_skips_zero_satiety_term() {
        let (cfg, mut a) = setup();
        let apple = cfg.commodity_id("Apple").unwrap();
        a.energy = Level::from_units(20);
        a.satiety = Level::ZERO;
        let (n, why) = max_output(&a, cfg.recipe(apple).unwrap(), 1, Level::from_units(1));
        assert_eq!(n, 10);
        // Energy and labor tie at 10; energy comes first.
        assert_eq!(why, Binding::Energy);
    }

    #[test]
    fn execution_debits_exactly() {
        let (cfg, mut a) = setup();
        let book = cfg.commodity_id("Book").unwrap();
        let wood = cfg.commodity_id("Wood").unwrap();
        a.give(wood, 4);
        let e0 = a.energy;
        let req = ProductionRequest {
            agent_id: a.id,
            commodity: book,
            desired_units: 3,
            labor_budget: Level::from_units(300),
        };
        let out = execute_production(&mut a, &req, &mut ChaCha8Rng::seed_from_u64(0), &cfg).unwrap();
        assert_eq!(out.produced_units, 3);
        assert_eq!(out.binding_constraint, Binding::Requested);
        assert_eq!(out.consumed, vec![(wood, 3)]);
        assert_eq!(a.holding(wood), 1);
        assert_eq!(a.holding(book), 3);
        assert_eq!(e0 - a.energy, Level::from_units(96));
        assert_eq!(out.reward_granted, None);
    }

    #[test]
    fn forced_reward() {
        let (mut cfg, mut a) = setup();
        let wheat = cfg.commodity_id("Wheat").unwrap();
        let gold = cfg.commodity_id("Gold Apple").unwrap();
        let r = cfg.recipes[wheat.index()].as_mut().unwrap();
        r.reward_prob = 1.0;
        r.reward_item = Some(gold);
        let req = ProductionRequest {
            agent_id: a.id,
            commodity: wheat,
            desired_units: 1,
            labor_budget: Level::from_units(60),
        };
        let out = execute_production(&mut a, &req, &mut ChaCha8Rng::seed_from_u64(0), &cfg).unwrap();
        assert_eq!(out.reward_granted, Some(gold));
        assert_eq!(a.holding(gold), 1);
    }

    #[test]
    fn incapacitated_cannot_produce() {
        let (cfg, mut a) = setup();
        a.incapacitated = true;
        let req = ProductionRequest {
            agent_id: a.id,
            commodity: cfg.commodity_id("Apple").unwrap(),
            desired_units: 1,
            labor_budget: Level::from_units(60),
        };
        assert_eq!(
            execute_production(&mut a, &req, &mut ChaCha8Rng::seed_from_u64(0), &cfg),
            Err(ProductionError::Incapacitated)
        );
    }
}
