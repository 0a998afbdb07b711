//! Education, occupation eligibility behind population-quantile knowledge
//! thresholds, application quotas, recruitment and the two wage regimes.

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::agent::{AgentError, AgentId, AgentState, StateDelta};
use crate::config::{OccupationId, OccupationSpec, StudyKindParams, WageRegime, WorldConfig, WorldParams};
use crate::units::{Level, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum StudyKind {
    PaidLearning,
    Reading,
    SelfStudy,
}

impl StudyKind {
    pub fn params(self, cfg: &WorldConfig) -> &StudyKindParams {
        let s = &cfg.params.study;
        match self {
            StudyKind::PaidLearning => &s.paid_learning,
            StudyKind::Reading => &s.reading,
            StudyKind::SelfStudy => &s.self_study,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LaborError {
    #[error("population is empty")]
    EmptyPopulation,
    #[error(transparent)]
    Agent(#[from] AgentError),
}

/// Knowledge gain `eta * hours`; fee, material and physiological costs are
/// charged up front.
pub fn study(agent: &mut AgentState, kind: StudyKind, secs: u64, cfg: &WorldConfig) -> Result<StateDelta, LaborError> {
    if secs == 0 {
        return Err(AgentError::NonPositive.into());
    }
    let p = kind.params(cfg);
    let hours = secs as f64 / 3600.0;
    let fee = Money::from_f64(p.fee_per_hour * hours);
    if agent.balance < fee {
        return Err(AgentError::InsufficientFunds { need: fee, have: agent.balance }.into());
    }
    let material = match &p.material {
        Some(name) if p.material_units > 0 => {
            let id = cfg.commodity_id(name).expect("validated study material");
            let have = agent.holding(id);
            if have < p.material_units {
                return Err(AgentError::InsufficientInventory { commodity: id, need: p.material_units, have }.into());
            }
            Some(id)
        }
        _ => None,
    };
    let mut delta = StateDelta::default();
    if let Some(id) = material {
        agent.take(id, p.material_units)?;
        agent.consumed[id.index()] = true;
        delta.inventory.push((id, -(p.material_units as i64)));
    }
    agent.balance -= fee;
    delta.balance = -fee;
    let gain = cfg.params.eta_per_hour * hours;
    agent.education += gain;
    delta.education = gain;
    let cap = agent.cap(cfg);
    let (ds, de, _) = agent.adjust_vitals(
        cap,
        -Level::from_f64(p.satiety_per_hour * hours),
        -Level::from_f64(p.energy_per_hour * hours),
        Level::ZERO,
    );
    delta.satiety = ds;
    delta.energy = de;
    Ok(delta)
}

/// `inf { h : F(h) >= p }` over the empirical distribution of `sorted`
/// (ascending). The comparison `k / n >= p` is done in floating point.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let nf = n as f64;
    let reaches = |k: usize| k as f64 / nf >= p;
    let guess = ((p * nf).ceil().max(1.0) as usize).min(n);
    let mut k = guess;
    while k > 1 && reaches(k - 1) {
        k -= 1;
    }
    while k < n && !reaches(k) {
        k += 1;
    }
    Some(sorted[k - 1])
}

/// Effective knowledge requirement `max(H_floor, q_{1 - pi})`.
pub fn dynamic_threshold(occupation: &OccupationSpec, sorted_scores: &[f64]) -> Result<f64, LaborError> {
    let q = empirical_quantile(sorted_scores, 1.0 - occupation.eligibility_share).ok_or(LaborError::EmptyPopulation)?;
    Ok(q.max(occupation.h_floor))
}

pub fn sorted_scores(agents: &[AgentState]) -> Vec<f64> {
    let mut s: Vec<f64> = agents.iter().map(|a| a.education).collect();
    s.sort_by(f64::total_cmp);
    s
}

pub fn eligibility(agent: &AgentState, occupation: &OccupationSpec, threshold: f64) -> bool {
    agent.education >= threshold
        && agent.residential_tier >= occupation.r_min
        && occupation.prereq_commodity.is_none_or(|c| agent.consumed[c.index()])
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RecruitmentState {
    pub cycle_index: u64,
    /// Per occupation, from the latest cycle.
    pub thresholds: Vec<f64>,
    pub applications: Vec<(AgentId, Vec<OccupationId>)>,
    pub assignments: Vec<Assignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    pub agent: AgentId,
    pub occupation: OccupationId,
    pub previous: Option<OccupationId>,
    pub tier: u8,
    pub education: f64,
    pub residential_tier: u8,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrerequisiteUse {
    pub agent: AgentId,
    pub occupation: OccupationId,
    pub commodity: crate::config::CommodityId,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleOutcome {
    pub assignments: Vec<Assignment>,
    pub prerequisites: Vec<PrerequisiteUse>,
    /// Applications dropped for exceeding the quota.
    pub dropped: usize,
}

/// One recruitment cycle. `agents` must be indexed by agent id.
/// Applications beyond `N^max(R)` are dropped in submission order. Upper
/// tiers fill first; within an occupation applicants rank by knowledge
/// descending, then agent id. An agent is placed at most once per cycle.
pub fn run_recruitment_cycle(
    agents: &mut [AgentState],
    cfg: &WorldConfig,
    state: &mut RecruitmentState,
    mut applications: Vec<(AgentId, Vec<OccupationId>)>,
) -> CycleOutcome {
    let mut out = CycleOutcome::default();
    state.cycle_index += 1;
    let scores = sorted_scores(agents);
    state.thresholds = cfg.occupations.iter().map(|o| dynamic_threshold(o, &scores).unwrap_or(o.h_floor)).collect();

    applications.sort_by_key(|(id, _)| *id);
    for (id, apps) in applications.iter_mut() {
        let quota = cfg.params.quota(agents[id.0 as usize].residential_tier) as usize;
        if apps.len() > quota {
            out.dropped += apps.len() - quota;
            apps.truncate(quota);
        }
    }

    let mut filled = vec![0u32; cfg.occupations.len()];
    for a in agents.iter() {
        if let Some(j) = a.job {
            filled[j.index()] += 1;
        }
    }
    let mut order: Vec<&OccupationSpec> = cfg.occupations.iter().collect();
    order.sort_by(|a, b| b.tier.cmp(&a.tier).then(a.id.cmp(&b.id)));
    let mut placed = vec![false; agents.len()];

    for occ in order {
        let threshold = state.thresholds[occ.id.index()];
        let mut pool: Vec<AgentId> = Vec::new();
        for (id, apps) in &applications {
            let idx = id.0 as usize;
            if placed[idx] || !apps.contains(&occ.id) || agents[idx].job == Some(occ.id) {
                continue;
            }
            let agent = &mut agents[idx];
            if agent.education < threshold || agent.residential_tier < occ.r_min {
                continue;
            }
            if let Some(c) = occ.prereq_commodity {
                if !agent.consumed[c.index()] && agent.holding(c) > 0 {
                    agent.inventory[c.index()] -= 1;
                    agent.consumed[c.index()] = true;
                    out.prerequisites.push(PrerequisiteUse { agent: *id, occupation: occ.id, commodity: c });
                }
            }
            if eligibility(agent, occ, threshold) {
                pool.push(*id);
            }
        }
        let open = occ.vacancies.saturating_sub(filled[occ.id.index()]) as usize;
        if open == 0 || pool.is_empty() {
            continue;
        }
        pool.sort_by(|a, b| agents[b.0 as usize].education.total_cmp(&agents[a.0 as usize].education).then(a.cmp(b)));
        for id in pool.into_iter().take(open) {
            let agent = &mut agents[id.0 as usize];
            let previous = agent.job;
            if let Some(p) = previous {
                filled[p.index()] -= 1;
            }
            agent.job = Some(occ.id);
            filled[occ.id.index()] += 1;
            placed[id.0 as usize] = true;
            out.assignments.push(Assignment {
                agent: id,
                occupation: occ.id,
                previous,
                tier: occ.tier,
                education: agent.education,
                residential_tier: agent.residential_tier,
                threshold,
            });
        }
    }
    state.applications = applications;
    state.assignments = out.assignments.clone();
    out
}

/// Knowledge premium `1 + beta * max(0, H - ref) / ref`.
pub fn phi(occupation: &OccupationSpec, threshold: f64) -> f64 {
    1.0 + occupation.phi_beta * (threshold - occupation.phi_ref).max(0.0) / occupation.phi_ref
}

/// Per-period wage from its components.
pub fn wage_for(occupation: &OccupationSpec, phi: f64, index: f64, shock: f64) -> f64 {
    match occupation.regime {
        WageRegime::Static => occupation.base_wage * index,
        WageRegime::Dynamic => occupation.base_wage * phi * index * (1.0 + shock),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WageLine {
    pub occupation: OccupationId,
    pub base: f64,
    pub phi: f64,
    pub index: f64,
    pub shock: f64,
    pub wage: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct WageSchedule {
    pub lines: Vec<WageLine>,
}

impl WageSchedule {
    pub fn wage(&self, id: OccupationId) -> f64 {
        self.lines.get(id.index()).map_or(0.0, |l| l.wage)
    }
}

/// One uniform shock on `[-delta_bar, delta_bar]` is drawn per dynamic
/// occupation, in catalog order.
pub fn compute_wages<R: Rng + ?Sized>(
    occupations: &[OccupationSpec],
    thresholds: &[f64],
    index: f64,
    rng: &mut R,
    params: &WorldParams,
) -> WageSchedule {
    let lines = occupations
        .iter()
        .map(|o| {
            let h = thresholds.get(o.id.index()).copied().unwrap_or(o.h_floor);
            let (p, shock) = match o.regime {
                WageRegime::Static => (1.0, 0.0),
                WageRegime::Dynamic => {
                    let u: f64 = rng.random();
                    (phi(o, h), params.delta_bar * (2.0 * u - 1.0))
                }
            };
            WageLine { occupation: o.id, base: o.base_wage, phi: p, index, shock, wage: wage_for(o, p, index, shock) }
        })
        .collect();
    WageSchedule { lines }
}

/// Works up to `hours`, stopping early when energy or satiety would run
/// out; the wage is pro-rated over the hours actually worked.
pub fn pay_and_deplete(
    agent: &mut AgentState,
    occupation: &OccupationSpec,
    hours: f64,
    wage_per_period: f64,
    cfg: &WorldConfig,
) -> Result<(StateDelta, f64), AgentError> {
    if agent.incapacitated {
        return Err(AgentError::Incapacitated);
    }
    let e_rate = occupation.energy_per_hour.to_f64();
    let s_rate = occupation.satiety_per_hour.to_f64();
    let mut worked = hours.max(0.0);
    if e_rate > 0.0 {
        worked = worked.min(agent.energy.to_f64() / e_rate);
    }
    if s_rate > 0.0 {
        worked = worked.min(agent.satiety.to_f64() / s_rate);
    }
    if worked <= 0.0 {
        return Ok((StateDelta::default(), 0.0));
    }
    let pay = Money::from_f64(wage_per_period / cfg.params.work_hours_per_period * worked);
    agent.balance += pay;
    let cap = agent.cap(cfg);
    let (ds, de, _) =
        agent.adjust_vitals(cap, -Level::from_f64(s_rate * worked), -Level::from_f64(e_rate * worked), Level::ZERO);
    Ok((StateDelta { balance: pay, satiety: ds, energy: de, ..Default::default() }, worked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PolicyKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> WorldConfig {
        WorldConfig::shipped("default").unwrap()
    }

    fn occ<'a>(cfg: &'a WorldConfig, name: &str) -> &'a OccupationSpec {
        cfg.occupation(cfg.occupation_id(name).unwrap())
    }

    #[test]
    fn study_accumulates_linearly() {
        let cfg = cfg();
        let mut a = AgentState::new(AgentId(0), &cfg, PolicyKind::StudentInvestor);
        a.education = 10.0;
        study(&mut a, StudyKind::SelfStudy, 5 * 3600, &cfg).unwrap();
        assert_eq!(a.education, 15.0);
        assert!(study(&mut a, StudyKind::SelfStudy, 0, &cfg).is_err());
    }

    #[test]
    fn paid_learning_needs_fee() {
        let cfg = cfg();
        let mut a = AgentState::new(AgentId(0), &cfg, PolicyKind::StudentInvestor);
        assert!(matches!(
            study(&mut a, StudyKind::PaidLearning, 3600, &cfg),
            Err(LaborError::Agent(AgentError::InsufficientFunds { .. }))
        ));
    }

    #[test]
    fn quantile_examples() {
        let cfg = cfg();
        let scores: Vec<f64> = (0..10).map(|i| i as f64 * 10.0).collect();
        let mut o = occ(&cfg, "Doctor").clone();
        o.h_floor = 0.0;
        o.eligibility_share = 0.28;
        assert_eq!(dynamic_threshold(&o, &scores).unwrap(), 70.0);
        o.eligibility_share = 1.0;
        assert_eq!(dynamic_threshold(&o, &scores).unwrap(), 0.0);
        assert_eq!(dynamic_threshold(occ(&cfg, "CEO"), &scores).unwrap(), 604.0);
        assert_eq!(dynamic_threshold(&o, &[]), Err(LaborError::EmptyPopulation));
    }

    #[test]
    fn eligibility_rules() {
        let cfg = cfg();
        let principal = occ(&cfg, "Principal");
        let mut a = AgentState::new(AgentId(0), &cfg, PolicyKind::StudentInvestor);
        a.education = 320.0;
        a.residential_tier = 6;
        a.consumed[principal.prereq_commodity.unwrap().index()] = true;
        assert!(eligibility(&a, principal, 320.0));
        a.education = 319.0;
        assert!(!eligibility(&a, principal, 320.0));
        a.education = 1000.0;
        a.residential_tier = 3;
        assert!(!eligibility(&a, occ(&cfg, "Chef"), 0.0));
    }

    fn population(cfg: &WorldConfig, scores: &[f64]) -> Vec<AgentState> {
        scores
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let mut a = AgentState::new(AgentId(i as u32), cfg, PolicyKind::StudentInvestor);
                a.education = h;
                a
            })
            .collect()
    }

    #[test]
    fn best_applicant_wins_single_vacancy() {
        let mut cfg = cfg();
        let waiter = cfg.occupation_id("Waiter").unwrap();
        cfg.occupations[waiter.index()].vacancies = 1;
        let mut agents = population(&cfg, &[150.0, 200.0]);
        let mut st = RecruitmentState::default();
        let out = run_recruitment_cycle(
            &mut agents,
            &cfg,
            &mut st,
            vec![(AgentId(0), vec![waiter]), (AgentId(1), vec![waiter])],
        );
        assert_eq!(out.assignments.len(), 1);
        assert_eq!(out.assignments[0].agent, AgentId(1));
        assert_eq!(agents[1].job, Some(waiter));
        assert_eq!(agents[0].job, None);
    }

    #[test]
    fn quota_drops_excess_in_submission_order() {
        let cfg = cfg();
        let cleaner = cfg.occupation_id("Cleaner").unwrap();
        let waiter = cfg.occupation_id("Waiter").unwrap();
        let mut agents = population(&cfg, &[50.0]);
        let mut st = RecruitmentState::default();
        let out = run_recruitment_cycle(&mut agents, &cfg, &mut st, vec![(AgentId(0), vec![cleaner, waiter])]);
        assert_eq!(out.dropped, 1);
        assert_eq!(st.applications[0].1, vec![cleaner]);
        assert_eq!(agents[0].job, Some(cleaner));
    }

    #[test]
    fn no_eligible_applicants_leaves_vacancy() {
        let cfg = cfg();
        let ceo = cfg.occupation_id("CEO").unwrap();
        let mut agents = population(&cfg, &[100.0, 200.0]);
        let mut st = RecruitmentState::default();
        let out = run_recruitment_cycle(&mut agents, &cfg, &mut st, vec![(AgentId(1), vec![ceo])]);
        assert!(out.assignments.is_empty());
    }

    #[test]
    fn prerequisite_consumed_on_application() {
        let cfg = cfg();
        let clerk = cfg.occupation_id("Stock Clerk").unwrap();
        let beef = cfg.commodity_id("Beef").unwrap();
        let mut agents = population(&cfg, &[30.0]);
        agents[0].residential_tier = 2;
        agents[0].give(beef, 2);
        let mut st = RecruitmentState::default();
        let out = run_recruitment_cycle(&mut agents, &cfg, &mut st, vec![(AgentId(0), vec![clerk])]);
        assert_eq!(out.prerequisites.len(), 1);
        assert_eq!(agents[0].holding(beef), 1);
        assert_eq!(agents[0].job, Some(clerk));
    }

    #[test]
    fn wage_examples() {
        let cfg = cfg();
        let cleaner = occ(&cfg, "Cleaner");
        assert_eq!(wage_for(cleaner, 1.0, 1.0, 0.0), 250.0);
        assert_eq!(wage_for(cleaner, 1.0, 2.0, 0.0), 500.0);
        let ceo = occ(&cfg, "CEO");
        assert!((wage_for(ceo, 1.2, 1.0, 0.0) - 1693.2).abs() < 1e-9);
    }

    #[test]
    fn shocks_stay_bounded() {
        let cfg = cfg();
        let thresholds: Vec<f64> = cfg.occupations.iter().map(|o| o.h_floor).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let w = compute_wages(&cfg.occupations, &thresholds, 1.0, &mut rng, &cfg.params);
            for l in &w.lines {
                assert!(l.shock.abs() <= cfg.params.delta_bar);
            }
        }
    }

    #[test]
    fn pay_scales_and_clamps() {
        let cfg = cfg();
        let cleaner = occ(&cfg, "Cleaner");
        let mut a = AgentState::new(AgentId(0), &cfg, PolicyKind::SubsistenceWorker);
        let (d0, h0) = pay_and_deplete(&mut a.clone(), cleaner, 0.0, 250.0, &cfg).unwrap();
        assert!(d0.is_zero() && h0 == 0.0);
        let (d1, _) = pay_and_deplete(&mut a.clone(), cleaner, 1.0, 250.0, &cfg).unwrap();
        let (d2, _) = pay_and_deplete(&mut a.clone(), cleaner, 2.0, 250.0, &cfg).unwrap();
        assert_eq!(d2.balance, d1.balance + d1.balance);
        assert_eq!(d2.energy, d1.energy + d1.energy);

        a.energy = Level::from_units(25);
        let (d, worked) = pay_and_deplete(&mut a, cleaner, 8.0, 250.0, &cfg).unwrap();
        assert_eq!(worked, 2.5);
        assert_eq!(a.energy, Level::ZERO);
        assert_eq!(d.balance, Money::from_f64(250.0 / 8.0 * 2.5));
    }
}
