//! Pre-execution dry run of an action sequence with bounded repairs.
//!
//! The validator runs the real executor against copies of the agent, the
//! market and the agent's random stream, so a sequence it reports as all-Ok
//! runs without error against the same live state. A failing action gets
//! at most one repair from a fixed rule table; the repaired sequence is
//! then checked once more from scratch.

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::action::{execute, Action, ActionError, ExecCtx};
use crate::agent::{AgentError, AgentState};
use crate::amm::{Market, TradeStamp};
use crate::config::{CommodityId, WorldConfig};
use crate::labor::WageSchedule;
use crate::production::Binding;
use crate::units::Level;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Verdict {
    Ok,
    Violation(String),
    Repaired { original: Action, replacement: Vec<Action> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// One verdict per submitted action.
    pub verdicts: Vec<Verdict>,
    /// The sequence to execute: repairs spliced in, violations removed.
    pub sequence: Vec<Action>,
    pub projected: AgentState,
}

impl ValidationReport {
    pub fn all_ok(&self) -> bool {
        self.verdicts.iter().all(|v| matches!(v, Verdict::Ok))
    }
}

/// Read-only world view used for the dry run.
pub struct DryRunWorld<'a> {
    pub cfg: &'a WorldConfig,
    pub market: &'a Market,
    pub wages: &'a WageSchedule,
    pub stamp: TradeStamp,
}

pub fn simulate_actions(
    state: &AgentState,
    actions: &[Action],
    world: &DryRunWorld<'_>,
    rng: &ChaCha8Rng,
) -> ValidationReport {
    let mut agent = state.clone();
    let mut market = world.market.clone();
    let mut stream = rng.clone();
    let mut verdicts = Vec::with_capacity(actions.len());
    let mut sequence = Vec::with_capacity(actions.len());

    for action in actions {
        match try_run(std::slice::from_ref(action), &agent, &market, &stream, world) {
            Ok(next) => {
                (agent, market, stream) = next;
                verdicts.push(Verdict::Ok);
                sequence.push(*action);
            }
            Err(err) => {
                let repaired = repair(action, &err, &agent, &market, world.cfg).and_then(|mut fix| {
                    fix.push(*action);
                    try_run(&fix, &agent, &market, &stream, world).ok().map(|next| (fix, next))
                });
                match repaired {
                    Some((fix, next)) => {
                        (agent, market, stream) = next;
                        sequence.extend_from_slice(&fix);
                        verdicts.push(Verdict::Repaired { original: *action, replacement: fix });
                    }
                    None => verdicts.push(Verdict::Violation(err.reason(world.cfg))),
                }
            }
        }
    }

    // Second and final check of the spliced sequence from the original state.
    let mut agent = state.clone();
    let mut market = world.market.clone();
    let mut stream = rng.clone();
    for (i, action) in sequence.iter().enumerate() {
        match try_run(std::slice::from_ref(action), &agent, &market, &stream, world) {
            Ok(next) => (agent, market, stream) = next,
            Err(err) => {
                verdicts.push(Verdict::Violation(format!("revalidation: {}", err.reason(world.cfg))));
                sequence.truncate(i);
                break;
            }
        }
    }
    ValidationReport { verdicts, sequence, projected: agent }
}

type Projection = (AgentState, Market, ChaCha8Rng);

fn try_run(
    actions: &[Action],
    agent: &AgentState,
    market: &Market,
    rng: &ChaCha8Rng,
    world: &DryRunWorld<'_>,
) -> Result<Projection, ActionError> {
    let mut agent = agent.clone();
    let mut market = market.clone();
    let mut rng = rng.clone();
    for action in actions {
        let mut ctx = ExecCtx { cfg: world.cfg, wages: world.wages, stamp: world.stamp, rng: &mut rng };
        execute(action, &mut agent, &mut market, &mut ctx)?;
    }
    Ok((agent, market, rng))
}

/// Rule table: missing input that is affordable gets a Buy; missing energy
/// gets a Sleep; missing satiety with food on hand gets an Eat.
fn repair(
    action: &Action,
    err: &ActionError,
    agent: &AgentState,
    market: &Market,
    cfg: &WorldConfig,
) -> Option<Vec<Action>> {
    match (action, err) {
        (Action::Craft { item, units, .. }, ActionError::ZeroOutput(Binding::Material(_))) => {
            let recipe = cfg.recipe(*item)?;
            let mut buys = Vec::new();
            let mut cost = crate::units::Money::ZERO;
            for &(input, per) in &recipe.inputs {
                let need = (per * units).saturating_sub(agent.holding(input));
                if need > 0 {
                    cost += market.buy_total(input, need).ok()?;
                    buys.push(Action::Buy { item: input, qty: need });
                }
            }
            (cost <= agent.balance && !buys.is_empty()).then_some(buys)
        }
        (Action::Eat { item, qty }, ActionError::Agent(AgentError::InsufficientInventory { .. })) => {
            let need = qty.saturating_sub(agent.holding(*item));
            let cost = market.buy_total(*item, need).ok()?;
            (need > 0 && cost <= agent.balance).then_some(vec![Action::Buy { item: *item, qty: need }])
        }
        (Action::Craft { .. }, ActionError::ZeroOutput(Binding::Energy)) => Some(vec![sleep_to_full(agent, cfg)]),
        (Action::Work { .. }, ActionError::Exhausted) if agent.energy < agent.satiety => {
            Some(vec![sleep_to_full(agent, cfg)])
        }
        (Action::Work { .. } | Action::Craft { .. }, ActionError::Agent(AgentError::Incapacitated))
            if agent.energy < Level::from_f64(cfg.params.incapacity.energy_min) =>
        {
            Some(vec![sleep_to_full(agent, cfg)])
        }
        (Action::Craft { .. }, ActionError::ZeroOutput(Binding::Satiety))
        | (Action::Work { .. }, ActionError::Exhausted) => eat_from_stock(agent, cfg).map(|a| vec![a]),
        _ => None,
    }
}

pub fn sleep_to_full(agent: &AgentState, cfg: &WorldConfig) -> Action {
    let rate = cfg.params.physiology.sleep_energy_per_hour.max(1e-9);
    let missing = (agent.cap(cfg) - agent.energy).to_f64().max(0.0);
    let tick = cfg.params.tick_length_secs.max(1);
    let secs = ((missing / rate * 3600.0) as u64).clamp(3600, 10 * 3600);
    Action::Sleep { secs: secs.div_ceil(tick) * tick }
}

/// Eats the most filling food held, enough to approach the cap.
pub fn eat_from_stock(agent: &AgentState, cfg: &WorldConfig) -> Option<Action> {
    let (item, per) = best_held_food(agent, cfg)?;
    let room = (agent.cap(cfg) - agent.satiety).millis().max(per.millis());
    let qty = ((room / per.millis()) as u64).clamp(1, agent.holding(item));
    Some(Action::Eat { item, qty })
}

fn best_held_food(agent: &AgentState, cfg: &WorldConfig) -> Option<(CommodityId, Level)> {
    cfg.commodities
        .iter()
        .filter(|c| agent.holding(c.id) > 0)
        .filter_map(|c| c.satiety_value.map(|v| (c.id, v)))
        .max_by_key(|&(id, v)| (v, std::cmp::Reverse(id)))
}
