//! `agora`: validate scenarios, run simulations and analyse their logs.
//!
//! Exit codes: 0 success, 1 domain error (invalid scenario, failed
//! analysis, manifest mismatch), 2 io or usage error.

mod manifest;
mod report;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use agora_core::analytics::{self, AnalyticsError};
use agora_core::config::{self, ConfigError};
use agora_core::engine::{self, EngineError};
use agora_core::WorldConfig;
use clap::{Parser, Subcommand};

use manifest::RunManifest;

#[derive(Parser)]
#[command(name = "agora", version, about = "Agent-based economy simulator with AMM-priced markets")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and report every diagnostic.
    Validate {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a scenario and write transaction, event and snapshot logs.
    Run {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Number of ticks to simulate.
        #[arg(long)]
        ticks: u64,
        /// Overrides the scenario seed.
        #[arg(long, env = "AGORA_SEED")]
        seed: Option<u64>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Stylized facts for one commodity from a transaction log.
    Analyze {
        /// Transaction log (transactions.csv).
        #[arg(long)]
        log: PathBuf,
        /// Commodity name as it appears in the log.
        #[arg(long)]
        commodity: String,
        /// Bar length in in-game seconds.
        #[arg(long, default_value_t = 300)]
        interval: u64,
        /// Ljung-Box lags.
        #[arg(long, default_value_t = 20)]
        lags: usize,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Net worth by education bin and by occupation from a snapshot file.
    Stratify {
        /// Snapshot file (snapshots.csv); the last tick present is used.
        #[arg(long)]
        snapshots: PathBuf,
        /// Re-price inventories at these quotes instead of the logged net worth.
        #[arg(long)]
        quotes: Option<PathBuf>,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run, then analyse every actively traded commodity and stratify.
    Replicate {
        /// Scenario file (TOML).
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long, env = "AGORA_SEED")]
        seed: Option<u64>,
        /// Number of ticks to simulate.
        #[arg(long, default_value_t = 20_000)]
        ticks: u64,
        /// Bar length in in-game seconds.
        #[arg(long, default_value_t = 300)]
        interval: u64,
        /// Ljung-Box lags.
        #[arg(long, default_value_t = 20)]
        lags: usize,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn domain(message: impl Into<String>) -> Self {
        CliError { code: 1, message: message.into() }
    }

    pub fn io(path: &Path, e: impl fmt::Display) -> Self {
        CliError { code: 2, message: format!("{}: {e}", path.display()) }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError { code: if e.is_io() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::Accounting { .. } => 1,
            EngineError::Config(c) if !c.is_io() => 1,
            _ => 2,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        CliError { code: if e.is_io() { 2 } else { 1 }, message: e.to_string() }
    }
}

struct Loaded {
    cfg: WorldConfig,
    bytes: Vec<u8>,
    resolved: String,
}

fn load(path: &Path, seed: Option<u64>) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let cfg = config::load_scenario(path)?;
    let resolved = cfg.to_scenario_toml();
    let cfg = match seed {
        Some(s) => cfg.with_seed(s),
        None => cfg,
    };
    Ok(Loaded { cfg, bytes, resolved })
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn print(json: bool, value: &impl serde::Serialize, text: impl FnOnce() -> String) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    } else {
        print!("{}", text());
    }
}

fn validate(scenario: &Path, json: bool) -> Result<(), CliError> {
    let diagnostics = match config::parse_scenario(scenario) {
        Ok(cfg) => config::validate_catalog(&cfg),
        Err(ConfigError::Validation(d)) => d,
        Err(e) => return Err(e.into()),
    };
    if diagnostics.is_empty() {
        print(json, &serde_json::json!({ "scenario": scenario, "diagnostics": [] }), || {
            format!("{}: ok\n", scenario.display())
        });
        return Ok(());
    }
    if json {
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&serde_json::json!({ "scenario": scenario, "diagnostics": diagnostics }))
                .unwrap()
        );
    } else {
        for d in &diagnostics {
            eprintln!("{d}");
        }
    }
    Err(CliError::domain(format!("{} diagnostic(s)", diagnostics.len())))
}

fn run(scenario: &Path, ticks: u64, seed: Option<u64>, out: &Path, json: bool) -> Result<(), CliError> {
    let Loaded { cfg, bytes, resolved } = load(scenario, seed)?;
    let seed = cfg.params.rng_seed;
    create_dir(out)?;
    let summary = engine::run_scenario(cfg, ticks, out)?;
    RunManifest::new(scenario, &bytes, &resolved, seed, ticks, summary.outputs.clone()).write(out)?;
    print(json, &summary, || {
        format!(
            "{} seed {} ticks {}: {} trades, price index {:.3}, {} employed, median net worth {}\n",
            summary.scenario,
            summary.seed,
            summary.ticks,
            summary.trades,
            summary.price_index,
            summary.employed,
            summary.median_net_worth
        )
    });
    Ok(())
}

fn analyze(log: &Path, commodity: &str, interval: u64, lags: usize, out: &Path, json: bool) -> Result<(), CliError> {
    let rows = analytics::read_transactions(log)?;
    let facts = analytics::stylized_facts(&rows, commodity, interval, lags)?;
    let bars = analytics::build_ohlc(&rows, interval, commodity)?;
    create_dir(out)?;
    let doc = report::FactsDocument::new(interval, lags, vec![facts], Vec::new());
    write_json(&out.join(report::FACTS_JSON), &doc)?;
    report::write_facts_table(&out.join(report::FACTS_CSV), &doc.commodities)?;
    report::write_bars(&out.join(report::BARS_CSV), &bars)?;
    print(json, &doc, || report::facts_text(&doc.commodities));
    Ok(())
}

fn stratify(snapshots: &Path, quotes: Option<&Path>, out: &Path, json: bool) -> Result<(), CliError> {
    let mut rows = analytics::read_final_snapshots(snapshots)?;
    if let Some(q) = quotes {
        let quotes = analytics::read_quotes(q)?;
        for r in &mut rows {
            r.net_worth = r.revalue(&quotes);
        }
    }
    let strat = analytics::stratification_report(&rows)?;
    create_dir(out)?;
    let doc = report::StratDocument::new(strat);
    report::write_strat(out, &doc)?;
    print(json, &doc, || report::strat_text(&doc.stratification));
    Ok(())
}

fn replicate(
    scenario: &Path,
    seed: Option<u64>,
    ticks: u64,
    interval: u64,
    lags: usize,
    out: &Path,
    json: bool,
) -> Result<(), CliError> {
    let Loaded { cfg, bytes, resolved } = load(scenario, seed)?;
    let seed = cfg.params.rng_seed;
    let fresh = RunManifest::new(scenario, &bytes, &resolved, seed, ticks, Vec::new());
    if let Some(prev) = RunManifest::read(out)? {
        if (&prev.scenario_sha256, &prev.resolved_sha256) != (&fresh.scenario_sha256, &fresh.resolved_sha256) {
            return Err(CliError::domain(format!(
                "{} holds logs from scenario {} (sha256 {}); refusing to mix with {} (sha256 {})",
                out.display(),
                prev.scenario,
                prev.scenario_sha256,
                scenario.display(),
                fresh.scenario_sha256
            )));
        }
    }
    create_dir(out)?;
    let run_dir = out.join(report::RUN_DIR);
    let summary = engine::run_scenario(cfg, ticks, &run_dir)?;

    let rows = analytics::read_transactions(&run_dir.join(engine::TRANSACTIONS_FILE))?;
    let mut facts = Vec::new();
    let mut skipped = Vec::new();
    for (name, _) in analytics::trade_counts(&rows) {
        match analytics::stylized_facts(&rows, &name, interval, lags) {
            Ok(f) => facts.push(f),
            Err(e) if !e.is_io() => skipped.push(report::Skipped { commodity: name, reason: e.to_string() }),
            Err(e) => return Err(e.into()),
        }
    }
    facts.sort_by(|a, b| a.commodity.cmp(&b.commodity));
    let snaps = analytics::read_final_snapshots(&run_dir.join(engine::SNAPSHOTS_FILE))?;
    let strat = analytics::stratification_report(&snaps)?;

    let doc = report::FactsDocument::new(interval, lags, facts, skipped);
    write_json(&out.join(report::FACTS_JSON), &doc)?;
    report::write_facts_table(&out.join(report::FACTS_CSV), &doc.commodities)?;
    let strat_doc = report::StratDocument::new(strat);
    report::write_strat(out, &strat_doc)?;

    let mut outputs: Vec<String> = summary.outputs.iter().map(|f| format!("{}/{f}", report::RUN_DIR)).collect();
    outputs.extend(report::BUNDLE_FILES.iter().map(|s| s.to_string()));
    RunManifest { outputs, ..fresh }.write(out)?;
    let bundle = report::Bundle { summary: &summary, facts: &doc, stratification: &strat_doc };
    print(json, &bundle, || {
        format!("{}{}", report::facts_text(&doc.commodities), report::strat_text(&strat_doc.stratification))
    });
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let json = cli.json;
    let result = match &cli.command {
        Command::Validate { scenario } => validate(scenario, json),
        Command::Run { scenario, ticks, seed, out } => run(scenario, *ticks, *seed, out, json),
        Command::Analyze { log, commodity, interval, lags, out } => {
            analyze(log, commodity, *interval, *lags, out, json)
        }
        Command::Stratify { snapshots, quotes, out } => stratify(snapshots, quotes.as_deref(), out, json),
        Command::Replicate { scenario, seed, ticks, interval, lags, out } => {
            replicate(scenario, *seed, *ticks, *interval, *lags, out, json)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!("{}", serde_json::json!({ "error": e.message, "exit_code": e.code }));
            } else {
                eprintln!("agora: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
