//! The discrete-time simulation loop.
//!
//! Each tick runs a fixed phase order: physiology and safety net for every
//! agent, policy invocation for idle agents, validation, execution (agent
//! id order unless shuffling is enabled), a recruitment and payroll phase
//! at cycle boundaries, and a global accounting check.

pub mod action;
pub mod log;
pub mod policy;
pub mod validate;

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{apply_safety_net, net_worth, tick_physiology, AgentId, AgentState};
use crate::amm::{Market, PriceIndexSnapshot, SupplyLedger, TradeReceipt, TradeStamp};
use crate::config::{ConfigError, WageRegime, WorldConfig};
use crate::labor::{
    compute_wages, dynamic_threshold, run_recruitment_cycle, sorted_scores, RecruitmentState, WageSchedule,
};
use crate::units::Money;
use action::{execute, Action, Effect, ExecCtx};
use policy::{policy_for, AgentView, Clock, FailureNote};
use validate::{simulate_actions, DryRunWorld, Verdict};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("accounting mismatch at tick {tick}: holdings {holdings}, expected {expected}")]
    Accounting { tick: u64, holdings: Money, expected: Money },
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdRow {
    pub occupation: String,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Production {
        tick: u64,
        agent: AgentId,
        commodity: String,
        units: u64,
        binding: String,
        reward: Option<String>,
        reward_units: u64,
    },
    Recruitment {
        tick: u64,
        cycle: u64,
        applications: usize,
        dropped: usize,
        assignments: usize,
        thresholds: Vec<ThresholdRow>,
    },
    Assignment {
        tick: u64,
        agent: AgentId,
        occupation: String,
        tier: u8,
        education: f64,
        residential_tier: u8,
        threshold: f64,
        previous: Option<String>,
    },
    Prerequisite {
        tick: u64,
        agent: AgentId,
        occupation: String,
        commodity: String,
    },
    Wage {
        tick: u64,
        occupation: String,
        regime: WageRegime,
        base: f64,
        phi: f64,
        index: f64,
        shock: f64,
        wage: f64,
    },
    Subsidy {
        tick: u64,
        agent: AgentId,
        item: String,
        qty: u64,
        eaten: bool,
    },
    Incapacitation {
        tick: u64,
        agent: AgentId,
        incapacitated: bool,
    },
    Repair {
        tick: u64,
        agent: AgentId,
        original: String,
        replacement: Vec<String>,
    },
    ActionFailed {
        tick: u64,
        agent: AgentId,
        action: String,
        reason: String,
        stage: &'static str,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AccountingCheck {
    /// Agent balances plus pool reserves.
    pub holdings: Money,
    /// Opening total plus wages minted minus fees burned.
    pub expected: Money,
}

impl AccountingCheck {
    pub fn balanced(&self) -> bool {
        self.holdings == self.expected
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TickReport {
    pub tick: u64,
    pub receipts: Vec<TradeReceipt>,
    pub events: Vec<Event>,
    pub accounting: AccountingCheck,
}

/// Mutable simulation state.
pub struct World {
    pub cfg: WorldConfig,
    pub agents: Vec<AgentState>,
    pub market: Market,
    pub tick: u64,
    pub recruitment: RecruitmentState,
    pub wages: WageSchedule,
    pub subsidy_units: u64,
    agent_rngs: Vec<ChaCha8Rng>,
    global_rng: ChaCha8Rng,
    busy_until: Vec<u64>,
    sleeping_until: Vec<u64>,
    failures: Vec<VecDeque<FailureNote>>,
    opening_total: Money,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Independent stream for one agent, keyed by world seed and agent id.
pub fn agent_rng(seed: u64, id: AgentId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(u64::from(id.0) + 1)))
}

impl World {
    pub fn new(cfg: WorldConfig) -> Self {
        let mut agents = Vec::with_capacity(cfg.population_size());
        for cohort in &cfg.population {
            for _ in 0..cohort.count {
                let id = AgentId(agents.len() as u32);
                let mut a = AgentState::new(id, &cfg, cohort.policy);
                a.balance = cohort.balance;
                a.residential_tier = cohort.residential_tier;
                a.education = cohort.education;
                let cap = cfg.params.cap(cohort.residential_tier);
                let v = cap * cohort.vitals;
                (a.satiety, a.energy, a.health) = (v, v, v);
                for &(item, qty) in &cohort.inventory {
                    a.give(item, qty);
                }
                a.job = cohort.job;
                a.policy_tag = cohort.tag.clone();
                a.target_education = cohort.target_education;
                agents.push(a);
            }
        }
        let seed = cfg.params.rng_seed;
        let market = Market::new(&cfg);
        let mut global_rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0xA5A5_A5A5_A5A5_A5A5));
        let scores = sorted_scores(&agents);
        let thresholds: Vec<f64> =
            cfg.occupations.iter().map(|o| dynamic_threshold(o, &scores).unwrap_or(o.h_floor)).collect();
        let wages = compute_wages(&cfg.occupations, &thresholds, 1.0, &mut global_rng, &cfg.params);
        let recruitment = RecruitmentState { thresholds, ..Default::default() };
        let opening_total = agents.iter().map(|a| a.balance).sum::<Money>() + market.total_reserves();
        let n = agents.len();
        World {
            agent_rngs: agents.iter().map(|a| agent_rng(seed, a.id)).collect(),
            cfg,
            agents,
            market,
            tick: 0,
            recruitment,
            wages,
            subsidy_units: 0,
            global_rng,
            busy_until: vec![0; n],
            sleeping_until: vec![0; n],
            failures: vec![VecDeque::new(); n],
            opening_total,
        }
    }

    pub fn clock(&self) -> Clock {
        Clock { tick: self.tick, in_game_seconds: self.tick * self.cfg.params.tick_length_secs }
    }

    /// In-game seconds elapsed divided by the time scale.
    pub fn real_seconds(&self) -> f64 {
        self.clock().in_game_seconds as f64 / self.cfg.params.time_scale
    }

    pub fn ledger(&self) -> &SupplyLedger {
        &self.market.ledger
    }

    pub fn price_index(&self) -> PriceIndexSnapshot {
        self.market.price_index(&self.cfg)
    }

    pub fn accounting(&self) -> AccountingCheck {
        let holdings = self.agents.iter().map(|a| a.balance).sum::<Money>() + self.market.total_reserves();
        let l = &self.market.ledger;
        AccountingCheck { holdings, expected: self.opening_total + l.wages_minted - l.fees_burned }
    }

    pub fn net_worths(&self) -> Vec<Money> {
        let quotes = self.market.quotes();
        self.agents
            .iter()
            .map(|a| net_worth(a, &quotes, &self.cfg).expect("every pooled commodity has a quote"))
            .collect()
    }

    pub fn recent_failures(&self, id: AgentId) -> impl Iterator<Item = &FailureNote> {
        self.failures[id.0 as usize].iter()
    }

    fn note_failure(&mut self, idx: usize, action: Action, reason: String) {
        let cap = self.cfg.params.recent_failures;
        let q = &mut self.failures[idx];
        q.push_back(FailureNote { tick: self.tick, action, reason });
        while q.len() > cap {
            q.pop_front();
        }
    }

    pub fn run_tick(&mut self) -> Result<TickReport, EngineError> {
        let tick = self.tick;
        let len = self.cfg.params.tick_length_secs;
        let now = tick * len;
        let stamp = TradeStamp { tick, in_game_seconds: now };
        let mut events = Vec::new();
        let mut receipts = Vec::new();

        // Phase 1: passive physiology and the safety net.
        for i in 0..self.agents.len() {
            let asleep = self.sleeping_until[i] > now;
            let agent = &mut self.agents[i];
            let was = agent.incapacitated;
            tick_physiology(agent, len, asleep, &mut self.agent_rngs[i], &self.cfg);
            if let Some(delta) = apply_safety_net(agent, &self.cfg) {
                let item = self.cfg.safety_net_item().expect("subsidy item");
                let qty = self.cfg.params.safety_net.subsidy_amount;
                self.subsidy_units += qty;
                events.push(Event::Subsidy {
                    tick,
                    agent: agent.id,
                    item: self.cfg.name_of(item).to_string(),
                    qty,
                    eaten: delta.inventory.is_empty(),
                });
                agent.refresh_incapacity(&self.cfg);
            }
            if agent.incapacitated != was {
                events.push(Event::Incapacitation { tick, agent: agent.id, incapacitated: agent.incapacitated });
            }
        }

        // Phases 2 and 3: policies on start-of-tick snapshots, then validation.
        let clock = self.clock();
        let mut plans = Vec::new();
        for i in 0..self.agents.len() {
            if self.busy_until[i] > now {
                continue;
            }
            let agent = &self.agents[i];
            let failures: Vec<FailureNote> = self.failures[i].iter().cloned().collect();
            let view = AgentView {
                agent,
                market: &self.market,
                cfg: &self.cfg,
                wages: &self.wages,
                thresholds: &self.recruitment.thresholds,
                clock,
                recent_failures: &failures,
            };
            let actions = policy_for(agent.policy).decide(&view, &mut self.agent_rngs[i]);
            let world = DryRunWorld { cfg: &self.cfg, market: &self.market, wages: &self.wages, stamp };
            let report = simulate_actions(agent, &actions, &world, &self.agent_rngs[i]);
            plans.push((i, actions, report));
        }

        // Phase 4: execution.
        if self.cfg.params.shuffle_order {
            plans.shuffle(&mut self.global_rng);
        }
        for (i, actions, report) in plans {
            let id = self.agents[i].id;
            for (action, verdict) in actions.iter().zip(&report.verdicts) {
                match verdict {
                    Verdict::Ok => {}
                    Verdict::Repaired { original, replacement } => events.push(Event::Repair {
                        tick,
                        agent: id,
                        original: original.describe(&self.cfg),
                        replacement: replacement.iter().map(|a| a.describe(&self.cfg)).collect(),
                    }),
                    Verdict::Violation(reason) => {
                        events.push(Event::ActionFailed {
                            tick,
                            agent: id,
                            action: action.describe(&self.cfg),
                            reason: reason.clone(),
                            stage: "validation",
                        });
                        self.note_failure(i, *action, reason.clone());
                    }
                }
            }
            let mut elapsed = 0u64;
            for action in &report.sequence {
                let mut ctx = ExecCtx { cfg: &self.cfg, wages: &self.wages, stamp, rng: &mut self.agent_rngs[i] };
                match execute(action, &mut self.agents[i], &mut self.market, &mut ctx) {
                    Ok((secs, effect)) => {
                        elapsed += secs;
                        if action.is_sleep() {
                            self.sleeping_until[i] = now + elapsed;
                        }
                        match effect {
                            Effect::Trade(r) => receipts.push(r),
                            Effect::Production(p) => events.push(Event::Production {
                                tick,
                                agent: id,
                                commodity: self.cfg.name_of(p.commodity).to_string(),
                                units: p.produced_units,
                                binding: format!("{:?}", p.binding_constraint),
                                reward: p.reward_granted.map(|r| self.cfg.name_of(r).to_string()),
                                reward_units: p.reward_units,
                            }),
                            _ => {}
                        }
                    }
                    Err(err) => {
                        let reason = err.reason(&self.cfg);
                        events.push(Event::ActionFailed {
                            tick,
                            agent: id,
                            action: action.describe(&self.cfg),
                            reason: reason.clone(),
                            stage: "execution",
                        });
                        self.note_failure(i, *action, reason);
                        break;
                    }
                }
            }
            self.busy_until[i] = now + elapsed.max(1);
        }

        // Phase 5: recruitment and payroll at cycle boundaries.
        if (tick + 1).is_multiple_of(self.cfg.params.recruitment_period) {
            self.recruit(tick, &mut events);
        }

        self.tick += 1;
        let accounting = self.accounting();
        if !accounting.balanced() {
            return Err(EngineError::Accounting { tick, holdings: accounting.holdings, expected: accounting.expected });
        }
        Ok(TickReport { tick, receipts, events, accounting })
    }

    fn recruit(&mut self, tick: u64, events: &mut Vec<Event>) {
        let clock = self.clock();
        let mut applications = Vec::new();
        for i in 0..self.agents.len() {
            let agent = &self.agents[i];
            let failures: Vec<FailureNote> = self.failures[i].iter().cloned().collect();
            let view = AgentView {
                agent,
                market: &self.market,
                cfg: &self.cfg,
                wages: &self.wages,
                thresholds: &self.recruitment.thresholds,
                clock,
                recent_failures: &failures,
            };
            let apps = policy_for(agent.policy).applications(&view, &mut self.agent_rngs[i]);
            if !apps.is_empty() {
                applications.push((agent.id, apps));
            }
        }
        let n_apps: usize = applications.iter().map(|(_, a)| a.len()).sum();
        let out = run_recruitment_cycle(&mut self.agents, &self.cfg, &mut self.recruitment, applications);
        let name = |o: crate::config::OccupationId| self.cfg.occupation(o).name.clone();
        events.push(Event::Recruitment {
            tick,
            cycle: self.recruitment.cycle_index,
            applications: n_apps,
            dropped: out.dropped,
            assignments: out.assignments.len(),
            thresholds: self
                .cfg
                .occupations
                .iter()
                .map(|o| ThresholdRow {
                    occupation: o.name.clone(),
                    threshold: self.recruitment.thresholds[o.id.index()],
                })
                .collect(),
        });
        for p in &out.prerequisites {
            events.push(Event::Prerequisite {
                tick,
                agent: p.agent,
                occupation: name(p.occupation),
                commodity: self.cfg.name_of(p.commodity).to_string(),
            });
        }
        for a in &out.assignments {
            events.push(Event::Assignment {
                tick,
                agent: a.agent,
                occupation: name(a.occupation),
                tier: a.tier,
                education: a.education,
                residential_tier: a.residential_tier,
                threshold: a.threshold,
                previous: a.previous.map(name),
            });
        }
        let index = self.market.price_index(&self.cfg).pcr_overall;
        self.wages = compute_wages(
            &self.cfg.occupations,
            &self.recruitment.thresholds,
            index,
            &mut self.global_rng,
            &self.cfg.params,
        );
        for line in &self.wages.lines {
            let occ = self.cfg.occupation(line.occupation);
            events.push(Event::Wage {
                tick,
                occupation: occ.name.clone(),
                regime: occ.regime,
                base: line.base,
                phi: line.phi,
                index: line.index,
                shock: line.shock,
                wage: line.wage,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub ticks: u64,
    pub agents: usize,
    pub trades: u64,
    pub trades_by_commodity: BTreeMap<String, u64>,
    pub price_index: f64,
    pub ledger: SupplyLedger,
    pub subsidy_units: u64,
    pub employed: usize,
    pub median_net_worth: Money,
    pub outputs: Vec<String>,
}

pub const TRANSACTIONS_FILE: &str = "transactions.csv";
pub const EVENTS_FILE: &str = "events.jsonl";
pub const SNAPSHOTS_FILE: &str = "snapshots.csv";
pub const QUOTES_FILE: &str = "quotes.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Runs `ticks` ticks and writes the transaction log, event log, agent
/// snapshots, final quotes and a summary into `out_dir`.
pub fn run_scenario(cfg: WorldConfig, ticks: u64, out_dir: &Path) -> Result<RunSummary, EngineError> {
    let io = |path: &Path| {
        let p = path.display().to_string();
        move |source| EngineError::Io { path: p, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut world = World::new(cfg);
    let mut writer = log::RunWriter::create(out_dir, &world.cfg)?;
    let every = world.cfg.params.snapshot_every;
    let mut trades_by_commodity: BTreeMap<String, u64> = BTreeMap::new();
    let mut trades = 0u64;
    for _ in 0..ticks {
        let report = world.run_tick()?;
        for r in &report.receipts {
            *trades_by_commodity.entry(world.cfg.name_of(r.commodity).to_string()).or_default() += 1;
        }
        trades += report.receipts.len() as u64;
        writer.write_tick(&report, &world.cfg)?;
        if every > 0 && world.tick.is_multiple_of(every) && world.tick < ticks {
            writer.write_snapshot(&world)?;
        }
    }
    writer.write_snapshot(&world)?;
    writer.finish()?;
    log::write_quotes(&out_dir.join(QUOTES_FILE), &world)?;

    let mut worths = world.net_worths();
    worths.sort();
    let median_net_worth = if worths.is_empty() {
        Money::ZERO
    } else if worths.len() % 2 == 1 {
        worths[worths.len() / 2]
    } else {
        Money::from_nanos((worths[worths.len() / 2 - 1].nanos() + worths[worths.len() / 2].nanos()) / 2)
    };
    let summary = RunSummary {
        scenario: world.cfg.name.clone(),
        seed: world.cfg.params.rng_seed,
        ticks,
        agents: world.agents.len(),
        trades,
        trades_by_commodity,
        price_index: world.price_index().pcr_overall,
        ledger: world.market.ledger.clone(),
        subsidy_units: world.subsidy_units,
        employed: world.agents.iter().filter(|a| a.job.is_some()).count(),
        median_net_worth,
        outputs: [TRANSACTIONS_FILE, EVENTS_FILE, SNAPSHOTS_FILE, QUOTES_FILE, SUMMARY_FILE]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    let path = out_dir.join(SUMMARY_FILE);
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&path, text + "\n").map_err(io(&path))?;
    Ok(summary)
}
