//! Cells of the experiment matrix and their execution.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::adversary::AttackConfig;
use crate::defense::DefenseConfig;
use crate::expctl::scenario::{seconds, Scenario, Variant};
use crate::metrics::{self, PowerModel, RunMetrics};
use crate::network::{DataTraffic, LinkModel, NetworkConfig, NetworkError, World};
use crate::rpl::node::NodeConfig;
use crate::sim::mobility::RandomWaypoint;
use crate::sim::radio::{MacParams, RadioModel};
use crate::sim::rng::{stream, Stream};
use crate::sim::topology::{generate, TopologyError};

pub const METRICS: [&str; 5] = ["pdr", "ae2ed", "apc", "plr", "fpr"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub variant: Variant,
    pub mobile: bool,
    /// Absent for the attack-free reference.
    pub replay_interval: Option<f64>,
}

impl Cell {
    pub fn mobility_label(&self) -> &'static str {
        if self.mobile {
            "mobile"
        } else {
            "static"
        }
    }

    pub fn id(&self) -> String {
        match self.replay_interval {
            Some(r) => format!("{}-{}-{}s", self.variant, self.mobility_label(), r),
            None => format!("{}-{}", self.variant, self.mobility_label()),
        }
    }

    /// Parses `variant,mobility[,interval]`, e.g. `limsd,static,1s`.
    pub fn parse(spec: &str) -> Result<Cell, String> {
        let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
        if parts.len() < 2 || parts.len() > 3 {
            return Err(format!("cell '{spec}' must look like variant,static|mobile[,interval]"));
        }
        let variant: Variant = parts[0].parse()?;
        let mobile = match parts[1] {
            "static" => false,
            "mobile" => true,
            o => return Err(format!("mobility '{o}' is not static or mobile")),
        };
        let replay_interval = match (variant, parts.get(2)) {
            (Variant::Rpl, _) => None,
            (_, Some(r)) => Some(seconds(r)?),
            (_, None) => return Err(format!("cell '{spec}' needs a replay interval")),
        };
        Ok(Cell { variant, mobile, replay_interval })
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// The attack-free reference plus every attacked variant at every replay interval.
pub fn cells(s: &Scenario) -> Vec<Cell> {
    let mut out = Vec::new();
    for &mobile in &s.mobility_modes {
        for &variant in &s.variants {
            if variant.attacked() {
                for &r in &s.replay_intervals {
                    out.push(Cell { variant, mobile, replay_interval: Some(r) });
                }
            } else {
                out.push(Cell { variant, mobile, replay_interval: None });
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cell {cell}, seed {seed}: {source}")]
    Network { cell: String, seed: u64, source: NetworkError },
    #[error("cell {cell}, seed {seed}: {source}")]
    Topology { cell: String, seed: u64, source: TopologyError },
}

pub fn seed_for(s: &Scenario, replication: usize) -> u64 {
    s.base_seed.wrapping_add(replication as u64)
}

/// Network configuration of one replication of one cell.
pub fn build(s: &Scenario, cell: &Cell, seed: u64) -> Result<NetworkConfig, RunError> {
    let topo = generate(s.nodes(), s.attackers, s.arena, s.tx_range, &mut stream(seed, Stream::Topology))
        .map_err(|source| RunError::Topology { cell: cell.id(), seed, source })?;
    let mut cfg = NetworkConfig::new(topo.positions, seed);
    if cell.variant.attacked() {
        cfg.attackers = topo.attackers;
    }
    cfg.attack = AttackConfig {
        replay_interval: cell.replay_interval.unwrap_or(s.replay_interval),
        attack_start: s.attack_start,
        attacker_count: s.attackers,
    };
    cfg.node = NodeConfig {
        mop: s.mop,
        defense: DefenseConfig {
            mode: cell.variant.defense(),
            beta: s.beta,
            activate_at: s.activate_at,
            reinit_period: s.reinit_period,
            secrpl_threshold: s.secrpl_threshold,
            node_max: s.node_max,
        },
        track_etx: s.rx_success < 1.0,
        ..NodeConfig::default()
    };
    cfg.radio = RadioModel { tx_range: s.tx_range, interference_range: s.interference_range, rx_success: s.rx_success };
    cfg.mac = MacParams { wakeup_interval: s.wakeup_interval, queue_capacity: s.queue_capacity, ..MacParams::default() };
    cfg.link = LinkModel::Csma;
    cfg.data = Some(DataTraffic { interval: s.data_interval, payload: s.data_size });
    cfg.mobility = cell
        .mobile
        .then_some(RandomWaypoint { arena: s.arena, speed_min: s.speed_min, speed_max: s.speed_max });
    cfg.duration = s.duration;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub cell: Cell,
    pub replication: usize,
    pub seed: u64,
    /// Metric name to value; `None` when undefined for the run.
    pub values: BTreeMap<&'static str, Option<f64>>,
}

pub fn summarize(s: &Scenario, m: &RunMetrics) -> BTreeMap<&'static str, Option<f64>> {
    let power = PowerModel::default();
    let mut v = BTreeMap::new();
    v.insert("pdr", metrics::pdr(m));
    v.insert("ae2ed", metrics::ae2ed(m));
    v.insert("apc", Some(metrics::apc(m, &power)));
    v.insert("plr", metrics::plr(m));
    v.insert("fpr", metrics::fpr(m, s.fpr_granularity));
    v
}

pub fn run_one(s: &Scenario, cell: &Cell, replication: usize, trace: bool) -> Result<(RunRecord, RunMetrics, Vec<String>), RunError> {
    let seed = seed_for(s, replication);
    let mut cfg = build(s, cell, seed)?;
    cfg.trace = trace;
    let out = World::new(cfg)
        .and_then(World::run)
        .map_err(|source| RunError::Network { cell: cell.id(), seed, source })?;
    let values = summarize(s, &out.metrics);
    Ok((RunRecord { cell: *cell, replication, seed, values }, out.metrics, out.trace))
}

/// Runs every replication of every cell in parallel. Results come back in
/// cell order, then replication order.
pub fn run_cells(s: &Scenario, cells: &[Cell]) -> Result<Vec<RunRecord>, RunError> {
    let jobs: Vec<(Cell, usize)> =
        cells.iter().flat_map(|c| (0..s.replications).map(move |r| (*c, r))).collect();
    jobs.par_iter()
        .map(|(c, r)| run_one(s, c, *r, false).map(|(rec, _, _)| rec))
        .collect()
}
