//! Agent actions and the executor shared by live execution and the
//! pre-execution validator.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agent::efficiency;
use crate::agent::{apply_recovery_action, AgentError, AgentState, RecoveryAction};
use crate::amm::{Market, TradeError, TradeReceipt, TradeStamp};
use crate::config::{CommodityId, WorldConfig};
use crate::labor::{pay_and_deplete, study, LaborError, StudyKind, WageSchedule};
use crate::production::{
    effective_labor, execute_production, max_output, Binding, ProductionError, ProductionOutcome, ProductionRequest,
};
use crate::units::{Level, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind")]
pub enum Action {
    Eat { item: CommodityId, qty: u64 },
    Sleep { secs: u64 },
    SeeDoctor,
    Study { study: StudyKind, secs: u64 },
    Work { secs: u64 },
    Craft { item: CommodityId, units: u64, labor_secs: u64 },
    Buy { item: CommodityId, qty: u64 },
    Sell { item: CommodityId, qty: u64 },
    Idle { secs: u64 },
}

impl Action {
    pub fn name(&self) -> &'static str {
        match self {
            Action::Eat { .. } => "eat",
            Action::Sleep { .. } => "sleep",
            Action::SeeDoctor => "see_doctor",
            Action::Study { .. } => "study",
            Action::Work { .. } => "work",
            Action::Craft { .. } => "craft",
            Action::Buy { .. } => "buy",
            Action::Sell { .. } => "sell",
            Action::Idle { .. } => "idle",
        }
    }

    pub fn describe(&self, cfg: &WorldConfig) -> String {
        match *self {
            Action::Eat { item, qty } => format!("eat {} x{qty}", cfg.name_of(item)),
            Action::Sleep { secs } => format!("sleep {secs}s"),
            Action::SeeDoctor => "see doctor".into(),
            Action::Study { study, secs } => format!("study {study:?} {secs}s"),
            Action::Work { secs } => format!("work {secs}s"),
            Action::Craft { item, units, .. } => format!("craft {} x{units}", cfg.name_of(item)),
            Action::Buy { item, qty } => format!("buy {} x{qty}", cfg.name_of(item)),
            Action::Sell { item, qty } => format!("sell {} x{qty}", cfg.name_of(item)),
            Action::Idle { secs } => format!("idle {secs}s"),
        }
    }

    /// Payload sanity: quantities and durations must be positive.
    pub fn well_formed(&self) -> bool {
        match *self {
            Action::SeeDoctor => true,
            Action::Eat { qty, .. } | Action::Buy { qty, .. } | Action::Sell { qty, .. } => qty > 0,
            Action::Sleep { secs } | Action::Study { secs, .. } | Action::Work { secs } | Action::Idle { secs } => {
                secs > 0
            }
            Action::Craft { units, labor_secs, .. } => units > 0 && labor_secs > 0,
        }
    }

    pub fn is_sleep(&self) -> bool {
        matches!(self, Action::Sleep { .. })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ActionError {
    #[error("malformed action payload")]
    Malformed,
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Trade(#[from] TradeError),
    #[error(transparent)]
    Production(#[from] ProductionError),
    #[error("no output: {0:?} binds at zero")]
    ZeroOutput(Binding),
    #[error("agent has no job")]
    NotEmployed,
    #[error("too exhausted to work")]
    Exhausted,
}

impl From<LaborError> for ActionError {
    fn from(e: LaborError) -> Self {
        match e {
            LaborError::Agent(a) => ActionError::Agent(a),
            LaborError::EmptyPopulation => ActionError::Malformed,
        }
    }
}

impl ActionError {
    /// Human-readable reason with commodity names resolved.
    pub fn reason(&self, cfg: &WorldConfig) -> String {
        match self {
            ActionError::ZeroOutput(Binding::Material(m)) => format!("missing input {}", cfg.name_of(*m)),
            ActionError::ZeroOutput(Binding::ResidentialGate) => "residential tier too low".into(),
            ActionError::ZeroOutput(Binding::Energy) => "insufficient energy".into(),
            ActionError::ZeroOutput(Binding::Satiety) => "insufficient satiety".into(),
            ActionError::ZeroOutput(Binding::Labor) => "insufficient labor time".into(),
            ActionError::Agent(AgentError::InsufficientInventory { commodity, need, have }) => {
                format!("needs {need} {} but holds {have}", cfg.name_of(*commodity))
            }
            ActionError::Trade(TradeError::InsufficientInventory { need, have }) => {
                format!("needs {need} units to sell but holds {have}")
            }
            other => other.to_string(),
        }
    }
}

/// What executing one action did, for the logs.
#[derive(Clone, Debug, PartialEq)]
pub enum Effect {
    None,
    Trade(TradeReceipt),
    Production(ProductionOutcome),
    Worked { hours: f64, pay: Money },
    Fee(Money),
}

pub struct ExecCtx<'a, R: Rng + ?Sized> {
    pub cfg: &'a WorldConfig,
    pub wages: &'a WageSchedule,
    pub stamp: TradeStamp,
    pub rng: &'a mut R,
}

/// Executes one action against the agent and the market, updating the
/// market's supply ledger for wages and fees. Returns in-game seconds used.
pub fn execute<R: Rng + ?Sized>(
    action: &Action,
    agent: &mut AgentState,
    market: &mut Market,
    ctx: &mut ExecCtx<'_, R>,
) -> Result<(u64, Effect), ActionError> {
    if !action.well_formed() {
        return Err(ActionError::Malformed);
    }
    let cfg = ctx.cfg;
    let phys = &cfg.params.physiology;
    match *action {
        Action::Eat { item, qty } => {
            apply_recovery_action(agent, RecoveryAction::Eat { item, qty }, cfg)?;
            Ok((phys.eat_secs, Effect::None))
        }
        Action::Sleep { secs } => {
            apply_recovery_action(agent, RecoveryAction::Sleep { secs }, cfg)?;
            agent.refresh_incapacity(cfg);
            Ok((secs, Effect::None))
        }
        Action::SeeDoctor => {
            let d = apply_recovery_action(agent, RecoveryAction::SeeDoctor, cfg)?;
            market.ledger.fees_burned += -d.balance;
            agent.refresh_incapacity(cfg);
            Ok((phys.doctor_secs, Effect::Fee(-d.balance)))
        }
        Action::Study { study: kind, secs } => {
            let d = study(agent, kind, secs, cfg)?;
            market.ledger.fees_burned += -d.balance;
            Ok((secs, Effect::Fee(-d.balance)))
        }
        Action::Work { secs } => {
            if agent.incapacitated {
                return Err(AgentError::Incapacitated.into());
            }
            let job = agent.job.ok_or(ActionError::NotEmployed)?;
            let occ = cfg.occupation(job);
            let (d, hours) = pay_and_deplete(agent, occ, secs as f64 / 3600.0, ctx.wages.wage(job), cfg)?;
            if hours <= 0.0 {
                return Err(ActionError::Exhausted);
            }
            market.ledger.wages_minted += d.balance;
            Ok(((hours * 3600.0).round() as u64, Effect::Worked { hours, pay: d.balance }))
        }
        Action::Craft { item, units, labor_secs } => {
            if agent.incapacitated {
                return Err(AgentError::Incapacitated.into());
            }
            let recipe = cfg.recipe(item).ok_or(ProductionError::NoRecipe(item))?;
            let r_min = cfg.commodity(item).r_min.unwrap_or(u8::MAX);
            let eff = efficiency(agent, agent.cap(cfg), &cfg.params.efficiency);
            let budget = Level::from_units(labor_secs as i64);
            let (n, why) = max_output(agent, recipe, r_min, effective_labor(budget, eff));
            if n == 0 {
                return Err(ActionError::ZeroOutput(why));
            }
            let req =
                ProductionRequest { agent_id: agent.id, commodity: item, desired_units: units, labor_budget: budget };
            let out = execute_production(agent, &req, ctx.rng, cfg)?;
            let secs = (out.labor_spent.to_f64().ceil() as u64).max(1);
            Ok((secs, Effect::Production(out)))
        }
        Action::Buy { item, qty } => {
            let r = market.execute_buy(item, qty, agent, ctx.stamp)?;
            Ok((phys.trade_secs, Effect::Trade(r)))
        }
        Action::Sell { item, qty } => {
            let r = market.execute_sell(item, qty, agent, ctx.stamp)?;
            Ok((phys.trade_secs, Effect::Trade(r)))
        }
        Action::Idle { secs } => Ok((secs, Effect::None)),
    }
}
