//! Output writers for a run directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{EngineError, TickReport, World, EVENTS_FILE, SNAPSHOTS_FILE, TRANSACTIONS_FILE};
use crate::agent::net_worth;
use crate::amm::TradeReceipt;
use crate::config::WorldConfig;

pub const TRANSACTION_HEADER: [&str; 10] = [
    "tick",
    "in_game_seconds",
    "commodity",
    "side",
    "quantity",
    "currency_delta",
    "effective_price",
    "marginal_price_pre",
    "marginal_price_post",
    "agent_id",
];

pub const SNAPSHOT_HEADER: [&str; 16] = [
    "tick",
    "agent_id",
    "policy",
    "tag",
    "balance",
    "satiety",
    "energy",
    "health",
    "education",
    "residential_tier",
    "job",
    "job_tier",
    "incapacitated",
    "low_satiety_streak",
    "net_worth",
    "inventory",
];

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> EngineError + '_ {
    move |source| EngineError::Io { path: path.display().to_string(), source }
}

pub fn transaction_record(r: &TradeReceipt, cfg: &WorldConfig) -> [String; 10] {
    [
        r.tick.to_string(),
        r.timestamp.to_string(),
        cfg.name_of(r.commodity).to_string(),
        r.side.as_str().to_string(),
        r.quantity.to_string(),
        r.currency_delta.to_string(),
        format!("{:.9}", r.effective_price),
        format!("{:.9}", r.marginal_price_pre),
        format!("{:.9}", r.marginal_price_post),
        r.agent_id.0.to_string(),
    ]
}

pub struct RunWriter {
    transactions: csv::Writer<BufWriter<File>>,
    events: BufWriter<File>,
    snapshots: csv::Writer<BufWriter<File>>,
    events_path: std::path::PathBuf,
}

impl RunWriter {
    pub fn create(dir: &Path, _cfg: &WorldConfig) -> Result<Self, EngineError> {
        let open = |name: &str| {
            let path = dir.join(name);
            File::create(&path).map(BufWriter::new).map_err(io_err(&path))
        };
        let mut transactions = csv::Writer::from_writer(open(TRANSACTIONS_FILE)?);
        transactions.write_record(TRANSACTION_HEADER)?;
        let mut snapshots = csv::Writer::from_writer(open(SNAPSHOTS_FILE)?);
        snapshots.write_record(SNAPSHOT_HEADER)?;
        Ok(RunWriter { transactions, events: open(EVENTS_FILE)?, snapshots, events_path: dir.join(EVENTS_FILE) })
    }

    pub fn write_tick(&mut self, report: &TickReport, cfg: &WorldConfig) -> Result<(), EngineError> {
        for r in &report.receipts {
            self.transactions.write_record(transaction_record(r, cfg))?;
        }
        for e in &report.events {
            let line = serde_json::to_string(e).expect("events serialize");
            writeln!(self.events, "{line}").map_err(io_err(&self.events_path))?;
        }
        Ok(())
    }

    pub fn write_snapshot(&mut self, world: &World) -> Result<(), EngineError> {
        let quotes = world.market.quotes();
        let cfg = &world.cfg;
        for a in &world.agents {
            let worth = net_worth(a, &quotes, cfg).expect("every pooled commodity has a quote");
            let inventory: Vec<String> = cfg
                .commodities
                .iter()
                .filter(|c| a.holding(c.id) > 0)
                .map(|c| format!("{}:{}", c.name, a.holding(c.id)))
                .collect();
            let job = a.job.map(|j| cfg.occupation(j));
            self.snapshots.write_record([
                world.tick.to_string(),
                a.id.0.to_string(),
                format!("{:?}", a.policy),
                a.policy_tag.clone().unwrap_or_default(),
                a.balance.to_string(),
                format!("{:.3}", a.satiety.to_f64()),
                format!("{:.3}", a.energy.to_f64()),
                format!("{:.3}", a.health.to_f64()),
                format!("{:.6}", a.education),
                a.residential_tier.to_string(),
                job.map(|o| o.name.clone()).unwrap_or_default(),
                job.map(|o| o.tier.to_string()).unwrap_or_default(),
                a.incapacitated.to_string(),
                a.low_satiety_streak.to_string(),
                worth.to_string(),
                inventory.join(";"),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), EngineError> {
        self.transactions.flush().map_err(io_err(Path::new(TRANSACTIONS_FILE)))?;
        self.snapshots.flush().map_err(io_err(Path::new(SNAPSHOTS_FILE)))?;
        self.events.flush().map_err(io_err(&self.events_path))?;
        Ok(())
    }
}

pub fn write_quotes(path: &Path, world: &World) -> Result<(), EngineError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(["commodity", "inventory", "currency_reserve", "quote", "opening_price", "ratio"])?;
    for pool in world.market.pools() {
        let opening = world.market.initial_price(pool.commodity).unwrap_or(f64::NAN);
        w.write_record([
            world.cfg.name_of(pool.commodity).to_string(),
            pool.inventory().to_string(),
            pool.currency().to_string(),
            format!("{:.9}", pool.quote()),
            format!("{:.9}", opening),
            format!("{:.6}", pool.quote() / opening),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
