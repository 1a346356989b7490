//! Parent-side DAO admission control.

pub mod limsd;
pub mod secrpl;

use std::fmt;
use std::str::FromStr;

use crate::rpl::address::{GlobalPrefix, LinkLocal};

pub use limsd::{LiMsd, NeighborEntry};
pub use secrpl::SecRpl;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DaoVerdict {
    /// Process normally; the sender's counter was incremented.
    Forward,
    /// Process normally; the sender is forwarding on behalf of a descendant.
    ForwardUncounted,
    Discard,
    /// The sender has just been added to the blacklist (or blocked).
    BlacklistAndDiscard,
}

impl DaoVerdict {
    pub fn admits(&self) -> bool {
        matches!(self, DaoVerdict::Forward | DaoVerdict::ForwardUncounted)
    }
}

/// Outcome of one defense invocation with its work accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub verdict: DaoVerdict,
    /// Address comparisons against both tables.
    pub comparisons: usize,
    pub blacklist_comparisons: usize,
    /// Blacklist length plus neighbor table length at call time.
    pub bound: usize,
    pub dao_count: u32,
}

impl Decision {
    pub(crate) fn pass() -> Self {
        Decision { verdict: DaoVerdict::Forward, comparisons: 0, blacklist_comparisons: 0, bound: 0, dao_count: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefenseMode {
    None,
    LiMsd,
    SecRpl,
}

impl FromStr for DefenseMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(DefenseMode::None),
            "limsd" | "li-msd" => Ok(DefenseMode::LiMsd),
            "secrpl" => Ok(DefenseMode::SecRpl),
            other => Err(format!("unknown defense '{other}' (expected none, limsd or secrpl)")),
        }
    }
}

impl fmt::Display for DefenseMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefenseMode::None => "none",
            DefenseMode::LiMsd => "limsd",
            DefenseMode::SecRpl => "secrpl",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefenseConfig {
    pub mode: DefenseMode,
    pub beta: u32,
    pub activate_at: f64,
    pub reinit_period: f64,
    pub secrpl_threshold: u32,
    /// Capacity of each table.
    pub node_max: usize,
}

impl Default for DefenseConfig {
    fn default() -> Self {
        Self {
            mode: DefenseMode::None,
            beta: 10,
            activate_at: 120.0,
            reinit_period: 1800.0,
            secrpl_threshold: 10,
            node_max: 32,
        }
    }
}

/// Per-node defense state.
#[derive(Debug, Clone)]
pub enum Defense {
    None,
    LiMsd(LiMsd),
    SecRpl(SecRpl),
}

impl Defense {
    pub fn new(cfg: &DefenseConfig) -> Self {
        match cfg.mode {
            DefenseMode::None => Defense::None,
            DefenseMode::LiMsd => Defense::LiMsd(LiMsd::new(cfg)),
            DefenseMode::SecRpl => Defense::SecRpl(SecRpl::new(cfg.secrpl_threshold).active_from(cfg.activate_at)),
        }
    }

    pub fn on_dao(&mut self, now: f64, sender: LinkLocal, prefix: GlobalPrefix) -> Decision {
        match self {
            Defense::None => Decision::pass(),
            Defense::LiMsd(d) => d.on_dao(now, sender, prefix),
            Defense::SecRpl(d) => d.on_dao(now, sender),
        }
    }

    pub fn on_dio_sent(&mut self) {
        if let Defense::SecRpl(d) = self {
            d.on_dio_sent();
        }
    }

    /// Bytes held in the defense tables right now.
    pub fn table_bytes(&self) -> usize {
        match self {
            Defense::None => 0,
            Defense::LiMsd(d) => d.table_bytes(),
            Defense::SecRpl(d) => d.table_bytes(),
        }
    }
}
