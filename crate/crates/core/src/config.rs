//! Static world definition: commodity catalog, recipes, job tiers,
//! occupations, physiology/wage/index parameters and the starting
//! population.
//!
//! Scenarios are TOML files with a `format = "agora/1"` header. A scenario
//! may `include` other files (typically `catalog.toml`); included tables are
//! merged before the including file's own rows. Unknown keys are rejected.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::{Level, Money};

pub const FORMAT_HEADER: &str = "agora/1";
const MAX_INCLUDE_DEPTH: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommodityId(pub u16);

impl CommodityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupationId(pub u16);

impl OccupationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Primary,
    SecondaryFood,
    SecondaryRefining,
    TertiaryHighTech,
    SpecialReward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WageRegime {
    Static,
    Dynamic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    SubsistenceWorker,
    StudentInvestor,
    ProducerTrader,
    RandomExplorer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommoditySpec {
    pub id: CommodityId,
    pub name: String,
    pub sector: Sector,
    /// Minimal residential tier for producing it; `None` for special rewards.
    pub r_min: Option<u8>,
    pub is_food: bool,
    /// `None` means the commodity has no liquidity pool.
    pub initial_price: Option<f64>,
    pub pool_inventory: Option<u64>,
    /// Satiety restored per unit eaten; `None` when not edible.
    pub satiety_value: Option<Level>,
}

impl CommoditySpec {
    pub fn is_pooled(&self) -> bool {
        self.initial_price.is_some() && self.pool_inventory.is_some()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub output: CommodityId,
    /// Input commodity and units required per output unit, in catalog order.
    pub inputs: Vec<(CommodityId, u64)>,
    pub energy_cost: Level,
    pub satiety_cost: Level,
    /// In-game seconds per unit.
    pub time_cost: Level,
    pub reward_prob: f64,
    pub reward_item: Option<CommodityId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JobTier {
    pub tier: u8,
    pub name: String,
    pub min_r: u8,
    pub min_h: f64,
    pub prerequisite: Option<CommodityId>,
    pub regime: WageRegime,
    pub energy_per_hour: Level,
    pub satiety_per_hour: Level,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationSpec {
    pub id: OccupationId,
    pub name: String,
    pub tier: u8,
    pub r_min: u8,
    pub h_floor: f64,
    pub eligibility_share: f64,
    /// Currency per pay period.
    pub base_wage: f64,
    pub regime: WageRegime,
    pub prereq_commodity: Option<CommodityId>,
    pub energy_per_hour: Level,
    pub satiety_per_hour: Level,
    pub vacancies: u32,
    /// Premium slope and reference level of the knowledge-threshold wage
    /// factor `1 + beta * max(0, H - ref) / ref`.
    pub phi_beta: f64,
    pub phi_ref: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EfficiencyParams {
    pub satiety_exponent: f64,
    pub energy_exponent: f64,
    pub health_exponent: f64,
    /// Floor of the efficiency function, in (0, 1].
    pub g_min: f64,
    /// Factor per residential tier (index 0 = tier 1), non-decreasing, in (0, 1].
    pub residential_factor: Vec<f64>,
    /// Education factor is `h_min + (1 - h_min) * min(1, H / h_saturation)`.
    pub education_floor: f64,
    pub education_saturation: f64,
}

impl Default for EfficiencyParams {
    fn default() -> Self {
        EfficiencyParams {
            satiety_exponent: 0.3,
            energy_exponent: 0.5,
            health_exponent: 0.3,
            g_min: 0.1,
            residential_factor: vec![0.8, 0.85, 0.9, 0.95, 1.0, 1.0],
            education_floor: 0.7,
            education_saturation: 600.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyNetParams {
    pub enabled: bool,
    pub satiety_threshold: f64,
    pub persistence_ticks: u32,
    pub subsidy_item: String,
    pub subsidy_amount: u64,
    /// Eat the granted units immediately instead of leaving them in inventory.
    pub feed_on_grant: bool,
}

impl Default for SafetyNetParams {
    fn default() -> Self {
        SafetyNetParams {
            enabled: true,
            satiety_threshold: 30.0,
            persistence_ticks: 12,
            subsidy_item: "Apple".into(),
            subsidy_amount: 4,
            feed_on_grant: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncapacityThresholds {
    pub energy_min: f64,
    pub health_min: f64,
}

impl Default for IncapacityThresholds {
    fn default() -> Self {
        IncapacityThresholds { energy_min: 10.0, health_min: 20.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysiologyParams {
    pub satiety_decay_per_hour: f64,
    pub energy_decay_per_hour: f64,
    pub illness_prob_per_tick: f64,
    pub illness_damage: f64,
    /// Awake hours after which health starts to decay.
    pub sleep_deprivation_hours: f64,
    pub deprivation_health_per_hour: f64,
    pub sleep_energy_per_hour: f64,
    pub sleep_health_per_hour: f64,
    /// Health lost per hour while satiety is at zero.
    pub starvation_health_per_hour: f64,
    pub doctor_fee: f64,
    pub doctor_health_restore: f64,
    pub eat_secs: u64,
    pub trade_secs: u64,
    pub doctor_secs: u64,
}

impl Default for PhysiologyParams {
    fn default() -> Self {
        PhysiologyParams {
            satiety_decay_per_hour: 8.0,
            energy_decay_per_hour: 3.0,
            illness_prob_per_tick: 0.0005,
            illness_damage: 40.0,
            sleep_deprivation_hours: 20.0,
            deprivation_health_per_hour: 5.0,
            sleep_energy_per_hour: 40.0,
            sleep_health_per_hour: 2.0,
            starvation_health_per_hour: 5.0,
            doctor_fee: 60.0,
            doctor_health_restore: 300.0,
            eat_secs: 300,
            trade_secs: 60,
            doctor_secs: 1800,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyKindParams {
    pub fee_per_hour: f64,
    pub energy_per_hour: f64,
    pub satiety_per_hour: f64,
    /// Units of the named commodity used up per study session.
    pub material: Option<String>,
    pub material_units: u64,
}

impl Default for StudyKindParams {
    fn default() -> Self {
        StudyKindParams {
            fee_per_hour: 0.0,
            energy_per_hour: 6.0,
            satiety_per_hour: 4.0,
            material: None,
            material_units: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyParams {
    pub paid_learning: StudyKindParams,
    pub reading: StudyKindParams,
    pub self_study: StudyKindParams,
}

impl Default for StudyParams {
    fn default() -> Self {
        StudyParams {
            paid_learning: StudyKindParams {
                fee_per_hour: 25.0,
                energy_per_hour: 4.0,
                satiety_per_hour: 3.0,
                ..Default::default()
            },
            reading: StudyKindParams {
                fee_per_hour: 0.0,
                energy_per_hour: 6.0,
                satiety_per_hour: 4.0,
                material: Some("Book".into()),
                material_units: 1,
            },
            self_study: StudyKindParams {
                fee_per_hour: 0.0,
                energy_per_hour: 12.0,
                satiety_per_hour: 8.0,
                material: None,
                material_units: 0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldParams {
    /// In-game seconds per real second.
    pub time_scale: f64,
    /// In-game seconds per tick.
    pub tick_length_secs: u64,
    /// Knowledge score gained per in-game hour of study.
    pub eta_per_hour: f64,
    pub efficiency: EfficiencyParams,
    /// Default premium slope of the dynamic-wage knowledge factor.
    pub phi_beta: f64,
    /// Bound of the uniform dynamic-wage shock.
    pub delta_bar: f64,
    /// Ticks between recruitment cycles (also the pay period).
    pub recruitment_period: u64,
    /// Working hours that earn one full period wage.
    pub work_hours_per_period: f64,
    /// Application quota per residential tier (index 0 = tier 1).
    pub quota_table: Vec<u32>,
    /// Upper bound of satiety, energy and health per residential tier.
    pub state_caps: Vec<f64>,
    pub safety_net: SafetyNetParams,
    pub incapacity: IncapacityThresholds,
    pub physiology: PhysiologyParams,
    pub study: StudyParams,
    /// Proportional AMM fee; zero keeps trades lossless.
    pub trade_fee: f64,
    pub rng_seed: u64,
    /// Seeded shuffle of the execution order each tick.
    pub shuffle_order: bool,
    /// Ticks between agent snapshots; 0 writes only the final snapshot.
    pub snapshot_every: u64,
    pub recent_failures: usize,
    pub default_vacancies: u32,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            time_scale: 7.0,
            tick_length_secs: 300,
            eta_per_hour: 1.0,
            efficiency: EfficiencyParams::default(),
            phi_beta: 0.5,
            delta_bar: 0.05,
            recruitment_period: 96,
            work_hours_per_period: 8.0,
            quota_table: vec![1, 2, 3, 4, 5, 6],
            state_caps: vec![300.0, 350.0, 400.0, 450.0, 500.0, 600.0],
            safety_net: SafetyNetParams::default(),
            incapacity: IncapacityThresholds::default(),
            physiology: PhysiologyParams::default(),
            study: StudyParams::default(),
            trade_fee: 0.0,
            rng_seed: 42,
            shuffle_order: false,
            snapshot_every: 0,
            recent_failures: 8,
            default_vacancies: 10,
        }
    }
}

impl WorldParams {
    /// Cap for satiety/energy/health at residential tier `r` (1-based).
    pub fn cap(&self, r: u8) -> Level {
        Level::from_f64(tier_lookup(&self.state_caps, r).unwrap_or(100.0))
    }

    /// Application quota `N^max(R)`.
    pub fn quota(&self, r: u8) -> u32 {
        tier_lookup(&self.quota_table, r).unwrap_or(0)
    }

    pub fn tick_hours(&self) -> f64 {
        self.tick_length_secs as f64 / 3600.0
    }
}

/// Looks up a 1-based tier table, saturating at the last entry.
fn tier_lookup<T: Copy>(table: &[T], tier: u8) -> Option<T> {
    if table.is_empty() {
        return None;
    }
    let idx = (tier.max(1) as usize - 1).min(table.len() - 1);
    Some(table[idx])
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cohort {
    pub policy: PolicyKind,
    pub count: u32,
    pub balance: Money,
    pub residential_tier: u8,
    pub education: f64,
    /// Starting satiety/energy/health as a fraction of the tier cap.
    pub vitals: f64,
    pub inventory: Vec<(CommodityId, u64)>,
    pub job: Option<OccupationId>,
    pub target_education: Option<f64>,
    pub tag: Option<String>,
}

/// A fully resolved, immutable world definition.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldConfig {
    pub name: String,
    pub commodities: Vec<CommoditySpec>,
    /// Indexed by output commodity.
    pub recipes: Vec<Option<Recipe>>,
    pub job_tiers: Vec<JobTier>,
    pub occupations: Vec<OccupationSpec>,
    pub params: WorldParams,
    pub population: Vec<Cohort>,
    by_name: HashMap<String, CommodityId>,
    occupation_by_name: HashMap<String, OccupationId>,
}

impl WorldConfig {
    pub fn commodity(&self, id: CommodityId) -> &CommoditySpec {
        &self.commodities[id.index()]
    }

    pub fn commodity_id(&self, name: &str) -> Option<CommodityId> {
        self.by_name.get(name).copied()
    }

    pub fn name_of(&self, id: CommodityId) -> &str {
        &self.commodities[id.index()].name
    }

    pub fn recipe(&self, id: CommodityId) -> Option<&Recipe> {
        self.recipes.get(id.index()).and_then(Option::as_ref)
    }

    pub fn occupation(&self, id: OccupationId) -> &OccupationSpec {
        &self.occupations[id.index()]
    }

    pub fn occupation_id(&self, name: &str) -> Option<OccupationId> {
        self.occupation_by_name.get(name).copied()
    }

    pub fn commodity_ids(&self) -> impl Iterator<Item = CommodityId> + '_ {
        (0..self.commodities.len()).map(|i| CommodityId(i as u16))
    }

    pub fn pooled_ids(&self) -> impl Iterator<Item = CommodityId> + '_ {
        self.commodities.iter().filter(|c| c.is_pooled()).map(|c| c.id)
    }

    pub fn population_size(&self) -> usize {
        self.population.iter().map(|c| c.count as usize).sum()
    }

    pub fn safety_net_item(&self) -> Option<CommodityId> {
        self.commodity_id(&self.params.safety_net.subsidy_item)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.params.rng_seed = seed;
        self
    }

    /// A self-contained scenario file (no includes) that loads back to an
    /// equal configuration.
    pub fn to_scenario_toml(&self) -> String {
        let raw = RawFile::from_config(self);
        toml::to_string(&raw).expect("scenario serialization")
    }

    /// Loads one of the scenarios bundled with the crate
    /// (`default`, `market-life`, `stratify`).
    pub fn shipped(name: &str) -> Result<WorldConfig, ConfigError> {
        let text = shipped_file(&format!("{name}.toml"))
            .ok_or_else(|| ConfigError::Io { path: name.to_string(), message: "no such shipped scenario".into() })?;
        load_scenario_str(text, name, &|inc: &str| {
            shipped_file(inc)
                .map(str::to_string)
                .ok_or_else(|| ConfigError::Io { path: inc.to_string(), message: "no such shipped file".into() })
        })
    }
}

pub fn shipped_file(name: &str) -> Option<&'static str> {
    match name {
        "catalog.toml" => Some(include_str!("../scenarios/catalog.toml")),
        "default.toml" => Some(include_str!("../scenarios/default.toml")),
        "market-life.toml" => Some(include_str!("../scenarios/market-life.toml")),
        "stratify.toml" => Some(include_str!("../scenarios/stratify.toml")),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: &'static str,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic { code, path: path.into(), message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("invalid scenario: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
    #[error("{context} references unknown {kind} '{name}'")]
    DanglingReference { context: String, kind: &'static str, name: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

/// Reads, resolves and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<WorldConfig, ConfigError> {
    let config = parse_scenario(path)?;
    let diagnostics = validate_catalog(&config);
    if diagnostics.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Validation(diagnostics))
    }
}

/// Reads and resolves a scenario without running the invariant checks.
pub fn parse_scenario(path: impl AsRef<Path>) -> Result<WorldConfig, ConfigError> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolver = move |inc: &str| read_file(&base.join(inc));
    parse_scenario_str(&text, &path.display().to_string(), &resolver)
}

pub fn load_scenario_str(
    text: &str,
    origin: &str,
    resolver: &dyn Fn(&str) -> Result<String, ConfigError>,
) -> Result<WorldConfig, ConfigError> {
    let config = parse_scenario_str(text, origin, resolver)?;
    let diagnostics = validate_catalog(&config);
    if diagnostics.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError::Validation(diagnostics))
    }
}

pub fn parse_scenario_str(
    text: &str,
    origin: &str,
    resolver: &dyn Fn(&str) -> Result<String, ConfigError>,
) -> Result<WorldConfig, ConfigError> {
    let mut merged = RawFile::default();
    let mut seen = HashSet::new();
    collect(text, origin, resolver, &mut merged, &mut seen, 0)?;
    merged.resolve()
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn collect(
    text: &str,
    origin: &str,
    resolver: &dyn Fn(&str) -> Result<String, ConfigError>,
    merged: &mut RawFile,
    seen: &mut HashSet<String>,
    depth: usize,
) -> Result<(), ConfigError> {
    if depth > MAX_INCLUDE_DEPTH || !seen.insert(origin.to_string()) {
        return Err(ConfigError::Parse {
            path: origin.into(),
            line: 1,
            message: "include cycle or nesting too deep".into(),
        });
    }
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(1);
        ConfigError::Parse { path: origin.into(), line, message: e.message().to_string() }
    })?;
    if raw.format != FORMAT_HEADER {
        return Err(ConfigError::Parse {
            path: origin.into(),
            line: 1,
            message: format!("unsupported format '{}', expected '{FORMAT_HEADER}'", raw.format),
        });
    }
    for inc in &raw.include {
        let inc_text = resolver(inc)?;
        collect(&inc_text, inc, resolver, merged, seen, depth + 1)?;
    }
    merged.absorb(raw, origin)
}

// ---------------------------------------------------------------------------
// On-disk schema

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    format: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    include: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<WorldParams>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    vacancies: BTreeMap<String, u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    commodity: Vec<RawCommodity>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    recipe: Vec<RawRecipe>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    job_tier: Vec<RawJobTier>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    occupation: Vec<RawOccupation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cohort: Vec<RawCohort>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCommodity {
    name: String,
    sector: Sector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_min: Option<u8>,
    #[serde(default)]
    food: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_price: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pool_inventory: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    satiety: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecipe {
    output: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inputs: Vec<RawInput>,
    energy: f64,
    satiety: f64,
    time: f64,
    #[serde(default)]
    reward_prob: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reward_item: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInput {
    item: String,
    qty: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJobTier {
    tier: u8,
    name: String,
    min_r: u8,
    min_h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prerequisite: Option<String>,
    regime: WageRegime,
    energy_per_hour: f64,
    satiety_per_hour: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOccupation {
    name: String,
    tier: u8,
    r_min: u8,
    h_floor: f64,
    eligibility_share: f64,
    base_wage: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    regime: Option<WageRegime>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prerequisite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    energy_per_hour: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    satiety_per_hour: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vacancies: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi_beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phi_ref: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCohort {
    policy: PolicyKind,
    count: u32,
    #[serde(default)]
    balance: f64,
    #[serde(default = "one_u8")]
    residential_tier: u8,
    #[serde(default)]
    education: f64,
    #[serde(default = "default_vitals")]
    vitals: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inventory: Vec<RawInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    job: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_education: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tag: Option<String>,
}

fn one_u8() -> u8 {
    1
}

fn default_vitals() -> f64 {
    0.8
}

impl RawFile {
    fn absorb(&mut self, other: RawFile, origin: &str) -> Result<(), ConfigError> {
        if self.format.is_empty() {
            self.format = other.format;
        }
        if other.name.is_some() {
            self.name = other.name;
        }
        if let Some(p) = other.params {
            if self.params.is_some() {
                return Err(ConfigError::Parse {
                    path: origin.into(),
                    line: 1,
                    message: "[params] defined in more than one file".into(),
                });
            }
            self.params = Some(p);
        }
        self.vacancies.extend(other.vacancies);
        self.commodity.extend(other.commodity);
        self.recipe.extend(other.recipe);
        self.job_tier.extend(other.job_tier);
        self.occupation.extend(other.occupation);
        self.cohort.extend(other.cohort);
        Ok(())
    }

    fn resolve(self) -> Result<WorldConfig, ConfigError> {
        let params = self.params.unwrap_or_default();
        let mut dup = Vec::new();

        let mut by_name = HashMap::new();
        let mut commodities = Vec::with_capacity(self.commodity.len());
        for (i, c) in self.commodity.into_iter().enumerate() {
            let id = CommodityId(i as u16);
            if by_name.insert(c.name.clone(), id).is_some() {
                dup.push(Diagnostic::new(
                    "DUPLICATE_NAME",
                    format!("commodity[{}]", c.name),
                    "commodity defined twice",
                ));
            }
            commodities.push(CommoditySpec {
                id,
                name: c.name,
                sector: c.sector,
                r_min: c.r_min,
                is_food: c.food,
                initial_price: c.initial_price,
                pool_inventory: c.pool_inventory,
                satiety_value: c.satiety.map(Level::from_f64),
            });
        }
        let lookup = |context: &str, name: &str| {
            by_name.get(name).copied().ok_or_else(|| ConfigError::DanglingReference {
                context: context.to_string(),
                kind: "commodity",
                name: name.to_string(),
            })
        };

        let mut recipes: Vec<Option<Recipe>> = vec![None; commodities.len()];
        for r in &self.recipe {
            let ctx = format!("recipe[{}]", r.output);
            let output = lookup(&ctx, &r.output)?;
            let mut inputs = Vec::with_capacity(r.inputs.len());
            for inp in &r.inputs {
                inputs.push((lookup(&ctx, &inp.item)?, inp.qty));
            }
            inputs.sort_by_key(|(id, _)| *id);
            let reward_item = match &r.reward_item {
                Some(n) => Some(lookup(&ctx, n)?),
                None => None,
            };
            if recipes[output.index()].is_some() {
                dup.push(Diagnostic::new("DUPLICATE_NAME", ctx.clone(), "recipe defined twice"));
            }
            recipes[output.index()] = Some(Recipe {
                output,
                inputs,
                energy_cost: Level::from_f64(r.energy),
                satiety_cost: Level::from_f64(r.satiety),
                time_cost: Level::from_f64(r.time),
                reward_prob: r.reward_prob,
                reward_item,
            });
        }

        let mut job_tiers = Vec::with_capacity(self.job_tier.len());
        for t in &self.job_tier {
            let ctx = format!("job_tier[{}]", t.tier);
            let prerequisite = match &t.prerequisite {
                Some(n) => Some(lookup(&ctx, n)?),
                None => None,
            };
            job_tiers.push(JobTier {
                tier: t.tier,
                name: t.name.clone(),
                min_r: t.min_r,
                min_h: t.min_h,
                prerequisite,
                regime: t.regime,
                energy_per_hour: Level::from_f64(t.energy_per_hour),
                satiety_per_hour: Level::from_f64(t.satiety_per_hour),
            });
        }

        let mut occupation_by_name = HashMap::new();
        let mut occupations = Vec::with_capacity(self.occupation.len());
        for (i, o) in self.occupation.iter().enumerate() {
            let ctx = format!("occupation[{}]", o.name);
            let id = OccupationId(i as u16);
            if occupation_by_name.insert(o.name.clone(), id).is_some() {
                dup.push(Diagnostic::new("DUPLICATE_NAME", ctx.clone(), "occupation defined twice"));
            }
            let tier = job_tiers.iter().find(|t| t.tier == o.tier);
            let prereq_commodity = match &o.prerequisite {
                Some(n) => Some(lookup(&ctx, n)?),
                None => tier.and_then(|t| t.prerequisite),
            };
            let regime = o.regime.or(tier.map(|t| t.regime)).unwrap_or(if o.tier <= 3 {
                WageRegime::Static
            } else {
                WageRegime::Dynamic
            });
            let energy_per_hour = o
                .energy_per_hour
                .map(Level::from_f64)
                .or(tier.map(|t| t.energy_per_hour))
                .unwrap_or(Level::from_units(10));
            let satiety_per_hour = o
                .satiety_per_hour
                .map(Level::from_f64)
                .or(tier.map(|t| t.satiety_per_hour))
                .unwrap_or(Level::from_units(8));
            let vacancies = self.vacancies.get(&o.name).copied().or(o.vacancies).unwrap_or(params.default_vacancies);
            occupations.push(OccupationSpec {
                id,
                name: o.name.clone(),
                tier: o.tier,
                r_min: o.r_min,
                h_floor: o.h_floor,
                eligibility_share: o.eligibility_share,
                base_wage: o.base_wage,
                regime,
                prereq_commodity,
                energy_per_hour,
                satiety_per_hour,
                vacancies,
                phi_beta: o.phi_beta.unwrap_or(params.phi_beta),
                phi_ref: o.phi_ref.unwrap_or(o.h_floor.max(1.0)),
            });
        }
        for name in self.vacancies.keys() {
            if !occupation_by_name.contains_key(name) {
                return Err(ConfigError::DanglingReference {
                    context: "vacancies".into(),
                    kind: "occupation",
                    name: name.clone(),
                });
            }
        }
        if !params.safety_net.subsidy_item.is_empty() {
            lookup("params.safety_net", &params.safety_net.subsidy_item)?;
        }
        for kind in [&params.study.paid_learning, &params.study.reading, &params.study.self_study] {
            if let Some(m) = &kind.material {
                lookup("params.study", m)?;
            }
        }

        let mut population = Vec::with_capacity(self.cohort.len());
        for (i, c) in self.cohort.iter().enumerate() {
            let ctx = format!("cohort[{i}]");
            let mut inventory = Vec::new();
            for inp in &c.inventory {
                inventory.push((lookup(&ctx, &inp.item)?, inp.qty));
            }
            let job =
                match &c.job {
                    Some(n) => Some(occupation_by_name.get(n).copied().ok_or_else(|| {
                        ConfigError::DanglingReference { context: ctx.clone(), kind: "occupation", name: n.clone() }
                    })?),
                    None => None,
                };
            population.push(Cohort {
                policy: c.policy,
                count: c.count,
                balance: Money::from_f64(c.balance),
                residential_tier: c.residential_tier,
                education: c.education,
                vitals: c.vitals,
                inventory,
                job,
                target_education: c.target_education,
                tag: c.tag.clone(),
            });
        }

        if !dup.is_empty() {
            return Err(ConfigError::Validation(dup));
        }
        Ok(WorldConfig {
            name: self.name.unwrap_or_else(|| "unnamed".into()),
            commodities,
            recipes,
            job_tiers,
            occupations,
            params,
            population,
            by_name,
            occupation_by_name,
        })
    }

    fn from_config(cfg: &WorldConfig) -> RawFile {
        let name = |id: CommodityId| cfg.name_of(id).to_string();
        RawFile {
            format: FORMAT_HEADER.into(),
            name: Some(cfg.name.clone()),
            include: vec![],
            params: Some(cfg.params.clone()),
            vacancies: BTreeMap::new(),
            commodity: cfg
                .commodities
                .iter()
                .map(|c| RawCommodity {
                    name: c.name.clone(),
                    sector: c.sector,
                    r_min: c.r_min,
                    food: c.is_food,
                    initial_price: c.initial_price,
                    pool_inventory: c.pool_inventory,
                    satiety: c.satiety_value.map(Level::to_f64),
                })
                .collect(),
            recipe: cfg
                .recipes
                .iter()
                .flatten()
                .map(|r| RawRecipe {
                    output: name(r.output),
                    inputs: r.inputs.iter().map(|&(id, qty)| RawInput { item: name(id), qty }).collect(),
                    energy: r.energy_cost.to_f64(),
                    satiety: r.satiety_cost.to_f64(),
                    time: r.time_cost.to_f64(),
                    reward_prob: r.reward_prob,
                    reward_item: r.reward_item.map(name),
                })
                .collect(),
            job_tier: cfg
                .job_tiers
                .iter()
                .map(|t| RawJobTier {
                    tier: t.tier,
                    name: t.name.clone(),
                    min_r: t.min_r,
                    min_h: t.min_h,
                    prerequisite: t.prerequisite.map(name),
                    regime: t.regime,
                    energy_per_hour: t.energy_per_hour.to_f64(),
                    satiety_per_hour: t.satiety_per_hour.to_f64(),
                })
                .collect(),
            occupation: cfg
                .occupations
                .iter()
                .map(|o| RawOccupation {
                    name: o.name.clone(),
                    tier: o.tier,
                    r_min: o.r_min,
                    h_floor: o.h_floor,
                    eligibility_share: o.eligibility_share,
                    base_wage: o.base_wage,
                    regime: Some(o.regime),
                    prerequisite: o.prereq_commodity.map(name),
                    energy_per_hour: Some(o.energy_per_hour.to_f64()),
                    satiety_per_hour: Some(o.satiety_per_hour.to_f64()),
                    vacancies: Some(o.vacancies),
                    phi_beta: Some(o.phi_beta),
                    phi_ref: Some(o.phi_ref),
                })
                .collect(),
            cohort: cfg
                .population
                .iter()
                .map(|c| RawCohort {
                    policy: c.policy,
                    count: c.count,
                    balance: c.balance.to_f64(),
                    residential_tier: c.residential_tier,
                    education: c.education,
                    vitals: c.vitals,
                    inventory: c.inventory.iter().map(|&(id, qty)| RawInput { item: name(id), qty }).collect(),
                    job: c.job.map(|j| cfg.occupation(j).name.clone()),
                    target_education: c.target_education,
                    tag: c.tag.clone(),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Invariant checks

/// Returns one diagnostic per violated invariant; empty when the
/// configuration is consistent.
pub fn validate_catalog(cfg: &WorldConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let p = &cfg.params;

    for c in &cfg.commodities {
        let path = format!("commodity[{}]", c.name);
        match c.sector {
            Sector::SpecialReward => {
                if cfg.recipe(c.id).is_some() {
                    out.push(Diagnostic::new(
                        "SPECIAL_REWARD_HAS_RECIPE",
                        &path,
                        "special reward items cannot be crafted",
                    ));
                }
                if c.is_food {
                    out.push(Diagnostic::new(
                        "SPECIAL_REWARD_IS_FOOD",
                        &path,
                        "special reward items are outside the food/non-food index",
                    ));
                }
            }
            _ => {
                if c.r_min.is_none_or(|r| r < 1) {
                    out.push(Diagnostic::new("R_MIN_RANGE", &path, "tradable commodities need r_min >= 1"));
                }
                if !c.is_pooled() {
                    out.push(Diagnostic::new(
                        "POOL_MISSING",
                        &path,
                        "tradable commodities need initial_price and pool_inventory",
                    ));
                }
            }
        }
        if let Some(price) = c.initial_price {
            if !(price > 0.0 && price.is_finite()) {
                out.push(Diagnostic::new("INITIAL_PRICE_RANGE", format!("{path}.initial_price"), "must be > 0"));
            }
        }
        if c.pool_inventory == Some(0) {
            out.push(Diagnostic::new("POOL_INVENTORY_RANGE", format!("{path}.pool_inventory"), "must be > 0"));
        }
        if let Some(s) = c.satiety_value {
            if s.millis() <= 0 {
                out.push(Diagnostic::new("SATIETY_VALUE_RANGE", format!("{path}.satiety"), "must be > 0"));
            }
        }
    }
    let tradable: Vec<_> = cfg.commodities.iter().filter(|c| c.sector != Sector::SpecialReward).collect();
    if !tradable.is_empty() && (tradable.iter().all(|c| c.is_food) || tradable.iter().all(|c| !c.is_food)) {
        out.push(Diagnostic::new(
            "FOOD_PARTITION",
            "commodity",
            "price index needs at least one food and one non-food commodity",
        ));
    }

    for r in cfg.recipes.iter().flatten() {
        let path = format!("recipe[{}]", cfg.name_of(r.output));
        if r.reward_prob > 0.0 && r.reward_item.is_none() {
            out.push(Diagnostic::new("REWARD_ITEM_MISSING", &path, "reward_prob > 0 requires reward_item"));
        }
        if !(0.0..=1.0).contains(&r.reward_prob) {
            out.push(Diagnostic::new("REWARD_PROB_RANGE", format!("{path}.reward_prob"), "must lie in [0, 1]"));
        }
        if r.energy_cost.millis() < 0 || r.satiety_cost.millis() < 0 || r.time_cost.millis() < 0 {
            out.push(Diagnostic::new("NEGATIVE_COST", &path, "energy, satiety and time costs must be >= 0"));
        }
        let any_cost = r.energy_cost.millis() > 0 || r.satiety_cost.millis() > 0 || r.time_cost.millis() > 0;
        if r.inputs.is_empty() && !any_cost {
            out.push(Diagnostic::new("EMPTY_RECIPE", &path, "recipe needs inputs or a positive cost"));
        }
        if r.inputs.iter().any(|&(_, q)| q == 0) {
            out.push(Diagnostic::new("INPUT_QTY_RANGE", &path, "input quantities must be positive integers"));
        }
        if r.inputs.iter().any(|&(id, _)| id == r.output) {
            out.push(Diagnostic::new("SELF_INPUT", &path, "recipe consumes its own output"));
        }
    }

    for o in &cfg.occupations {
        let path = format!("occupation[{}]", o.name);
        if !(o.eligibility_share > 0.0 && o.eligibility_share <= 1.0) {
            out.push(Diagnostic::new(
                "ELIGIBILITY_SHARE_RANGE",
                format!("{path}.eligibility_share"),
                "must lie in (0, 1]",
            ));
        }
        if !(1..=6).contains(&o.tier) {
            out.push(Diagnostic::new("TIER_RANGE", format!("{path}.tier"), "job tier must be 1..=6"));
        }
        if o.r_min < 1 {
            out.push(Diagnostic::new("R_MIN_RANGE", format!("{path}.r_min"), "must be >= 1"));
        }
        if o.base_wage < 0.0 || o.h_floor < 0.0 {
            out.push(Diagnostic::new("OCCUPATION_VALUE_RANGE", &path, "base_wage and h_floor must be >= 0"));
        }
        if o.phi_ref <= 0.0 || o.phi_beta < 0.0 {
            out.push(Diagnostic::new("PHI_RANGE", &path, "phi_ref must be > 0 and phi_beta >= 0"));
        }
        if o.energy_per_hour.millis() < 0 || o.satiety_per_hour.millis() < 0 {
            out.push(Diagnostic::new("NEGATIVE_COST", &path, "per-hour costs must be >= 0"));
        }
    }

    if !(p.time_scale > 0.0) {
        out.push(Diagnostic::new("TIME_SCALE_RANGE", "params.time_scale", "must be > 0"));
    }
    if p.tick_length_secs == 0 {
        out.push(Diagnostic::new("TICK_LENGTH_RANGE", "params.tick_length_secs", "must be > 0"));
    }
    if p.recruitment_period == 0 {
        out.push(Diagnostic::new("RECRUITMENT_PERIOD_RANGE", "params.recruitment_period", "must be > 0"));
    }
    if !(p.delta_bar >= 0.0) {
        out.push(Diagnostic::new("DELTA_BAR_RANGE", "params.delta_bar", "must be >= 0"));
    }
    if p.eta_per_hour < 0.0 {
        out.push(Diagnostic::new("ETA_RANGE", "params.eta_per_hour", "must be >= 0"));
    }
    if p.quota_table.is_empty() || p.quota_table.windows(2).any(|w| w[0] > w[1]) {
        out.push(Diagnostic::new("QUOTA_NOT_MONOTONE", "params.quota_table", "must be non-empty and non-decreasing"));
    }
    if p.state_caps.is_empty()
        || p.state_caps.iter().any(|&c| !(c > 0.0))
        || p.state_caps.windows(2).any(|w| w[0] > w[1])
    {
        out.push(Diagnostic::new("CAPS_NOT_MONOTONE", "params.state_caps", "must be positive and non-decreasing"));
    }
    let e = &p.efficiency;
    if !(e.g_min > 0.0 && e.g_min <= 1.0)
        || e.satiety_exponent < 0.0
        || e.energy_exponent < 0.0
        || e.health_exponent < 0.0
        || !(0.0..=1.0).contains(&e.education_floor)
        || e.education_floor == 0.0
        || e.education_saturation <= 0.0
    {
        out.push(Diagnostic::new(
            "EFFICIENCY_RANGE",
            "params.efficiency",
            "g_min in (0,1], exponents >= 0, education factor in (0,1]",
        ));
    }
    if e.residential_factor.is_empty()
        || e.residential_factor.iter().any(|&f| !(f > 0.0 && f <= 1.0))
        || e.residential_factor.windows(2).any(|w| w[0] > w[1])
    {
        out.push(Diagnostic::new(
            "EFFICIENCY_RANGE",
            "params.efficiency.residential_factor",
            "must be non-decreasing in (0,1]",
        ));
    }
    if p.trade_fee < 0.0 || p.trade_fee >= 1.0 {
        out.push(Diagnostic::new("TRADE_FEE_RANGE", "params.trade_fee", "must lie in [0, 1)"));
    }
    if !(0.0..=1.0).contains(&p.physiology.illness_prob_per_tick) {
        out.push(Diagnostic::new(
            "ILLNESS_PROB_RANGE",
            "params.physiology.illness_prob_per_tick",
            "must lie in [0, 1]",
        ));
    }
    if p.work_hours_per_period <= 0.0 {
        out.push(Diagnostic::new("WORK_HOURS_RANGE", "params.work_hours_per_period", "must be > 0"));
    }
    if let Some(id) = cfg.safety_net_item() {
        if cfg.commodity(id).satiety_value.is_none() {
            out.push(Diagnostic::new(
                "SUBSIDY_NOT_FOOD",
                "params.safety_net.subsidy_item",
                "subsidy item must be edible",
            ));
        }
    }

    for (i, c) in cfg.population.iter().enumerate() {
        let path = format!("cohort[{i}]");
        if c.residential_tier < 1 {
            out.push(Diagnostic::new("R_MIN_RANGE", format!("{path}.residential_tier"), "must be >= 1"));
        }
        if c.balance.is_negative() || c.education < 0.0 || !(0.0..=1.0).contains(&c.vitals) {
            out.push(Diagnostic::new("COHORT_VALUE_RANGE", &path, "balance and education >= 0, vitals in [0, 1]"));
        }
    }
    out
}

/// Convenience for tests and the CLI: path of a shipped scenario inside the
/// source tree.
pub fn shipped_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.toml"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_cfg() -> WorldConfig {
        WorldConfig::shipped("default").unwrap()
    }

    fn mutate(edit: impl Fn(&mut String)) -> Result<WorldConfig, ConfigError> {
        let mut catalog = shipped_file("catalog.toml").unwrap().to_string();
        edit(&mut catalog);
        let scenario = shipped_file("default.toml").unwrap();
        parse_scenario_str(scenario, "default.toml", &|inc: &str| {
            if inc == "catalog.toml" {
                Ok(catalog.clone())
            } else {
                Err(ConfigError::Io { path: inc.into(), message: "missing".into() })
            }
        })
    }

    #[test]
    fn shipped_catalog_matches_tables() {
        let cfg = default_cfg();
        assert_eq!(cfg.commodities.len(), 25);
        let count = |s: Sector| cfg.commodities.iter().filter(|c| c.sector == s).count();
        assert_eq!(count(Sector::Primary), 8);
        assert_eq!(count(Sector::SecondaryFood), 9);
        assert_eq!(count(Sector::SecondaryRefining), 4);
        assert_eq!(count(Sector::TertiaryHighTech), 3);
        assert_eq!(count(Sector::SpecialReward), 1);
        assert_eq!(cfg.commodity(cfg.commodity_id("Gold Apple").unwrap()).sector, Sector::SpecialReward);
        assert_eq!(cfg.occupations.len(), 17);
        let tiers: HashSet<u8> = cfg.occupations.iter().map(|o| o.tier).collect();
        assert_eq!(tiers.len(), 6);
    }

    #[test]
    fn ceo_entry_parameters() {
        let cfg = default_cfg();
        let ceo = cfg.occupation(cfg.occupation_id("CEO").unwrap());
        assert_eq!((ceo.tier, ceo.r_min), (6, 6));
        assert_eq!(ceo.h_floor, 604.0);
        assert_eq!(ceo.eligibility_share, 0.065);
        assert_eq!(ceo.base_wage, 1411.0);
        assert_eq!(ceo.regime, WageRegime::Dynamic);
        assert_eq!(ceo.prereq_commodity, cfg.commodity_id("Circuit Board"));
    }

    #[test]
    fn chip_recipe() {
        let cfg = default_cfg();
        let chip = cfg.recipe(cfg.commodity_id("Chip").unwrap()).unwrap();
        let names: Vec<_> = chip.inputs.iter().map(|&(id, q)| (cfg.name_of(id), q)).collect();
        assert_eq!(names, vec![("Transistor", 1), ("Circuit Board", 1)]);
        assert_eq!(chip.energy_cost, Level::from_units(100));
        assert_eq!(chip.satiety_cost, Level::from_units(25));
        assert_eq!(chip.time_cost, Level::from_units(5));
        assert_eq!(chip.reward_prob, 0.05);
        assert_eq!(chip.reward_item, cfg.commodity_id("Gold Apple"));
    }

    #[test]
    fn default_scenario_self_validates() {
        assert_eq!(validate_catalog(&default_cfg()), vec![]);
        for name in ["market-life", "stratify"] {
            let cfg = WorldConfig::shipped(name).unwrap();
            assert_eq!(validate_catalog(&cfg), vec![], "{name}");
        }
    }

    #[test]
    fn regimes_follow_tiers() {
        for o in &default_cfg().occupations {
            let expect = if o.tier <= 3 { WageRegime::Static } else { WageRegime::Dynamic };
            assert_eq!(o.regime, expect, "{}", o.name);
        }
    }

    #[test]
    fn dangling_recipe_input() {
        let err = mutate(|c| {
            *c = c.replacen(
                "item = \"Wood\", qty = 1 }]\nenergy = 32",
                "item = \"Unobtainium\", qty = 1 }]\nenergy = 32",
                1,
            )
        })
        .unwrap_err();
        match err {
            ConfigError::DanglingReference { name, .. } => assert_eq!(name, "Unobtainium"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reward_item_missing_is_diagnosed() {
        let mut cfg = default_cfg();
        let bread = cfg.commodity_id("Bread").unwrap();
        let r = cfg.recipes[bread.index()].as_mut().unwrap();
        r.reward_prob = 0.05;
        r.reward_item = None;
        let diags = validate_catalog(&cfg);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "REWARD_ITEM_MISSING");
    }

    #[test]
    fn zero_eligibility_share_is_diagnosed() {
        let mut cfg = default_cfg();
        cfg.occupations[3].eligibility_share = 0.0;
        let codes: Vec<_> = validate_catalog(&cfg).iter().map(|d| d.code).collect();
        assert_eq!(codes, vec!["ELIGIBILITY_SHARE_RANGE"]);
    }

    #[test]
    fn unknown_field_is_parse_error_with_line() {
        let err = mutate(|c| c.push_str("\n[[commodity]]\nname = \"X\"\nsector = \"primary\"\ncolour = \"red\"\n"))
            .unwrap_err();
        match err {
            ConfigError::Parse { line, message, .. } => {
                assert!(line > 1);
                assert!(message.contains("colour"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_format_header_rejected() {
        let err = parse_scenario_str("format = \"agora/9\"\n", "x.toml", &|_: &str| unreachable!()).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn include_cycle_rejected() {
        let text = "format = \"agora/1\"\ninclude = [\"self.toml\"]\n";
        let err = parse_scenario_str(text, "self.toml", &|_: &str| Ok(text.to_string())).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
    }

    #[test]
    fn serialization_round_trips() {
        for name in ["default", "market-life", "stratify"] {
            let cfg = WorldConfig::shipped(name).unwrap();
            let text = cfg.to_scenario_toml();
            let again = load_scenario_str(&text, "roundtrip", &|_: &str| unreachable!()).unwrap();
            assert_eq!(cfg, again, "{name}");
        }
    }

    #[test]
    fn identical_bytes_identical_config() {
        let a = load_scenario(shipped_path("default")).unwrap();
        let b = load_scenario(shipped_path("default")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, default_cfg());
    }

    #[test]
    fn missing_file_is_io() {
        assert!(load_scenario("/nonexistent/scenario.toml").unwrap_err().is_io());
    }
}
