//! DAO insider attacker: a legitimate node that replays its own captured DAO
//! to its current preferred parent at a fixed interval.

use thiserror::Error;

use crate::rpl::message::Dao;
use crate::sim::topology::ROOT;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    pub replay_interval: f64,
    pub attack_start: f64,
    pub attacker_count: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self { replay_interval: 1.0, attack_start: 90.0, attacker_count: 4 }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("the root cannot be an attacker")]
    RootSelected,
    #[error("replay interval must be positive, got {0}")]
    Interval(f64),
    #[error("attack start {start} is not before the end of the run at {end}")]
    StartsTooLate { start: f64, end: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Attacker {
    /// Last DAO this node originated, kept verbatim.
    pub captured: Option<Dao>,
}

impl Attacker {
    pub fn capture(&mut self, dao: &Dao) {
        self.captured = Some(dao.clone());
    }

    /// The message to replay, sequence number included.
    pub fn replay(&self) -> Option<Dao> {
        self.captured.clone()
    }
}

/// Validates the attacker choice and returns the fresh attacker state.
pub fn arm(node: NodeId, cfg: &AttackConfig, run_end: f64) -> Result<Attacker, AttackError> {
    if node == ROOT {
        return Err(AttackError::RootSelected);
    }
    if !(cfg.replay_interval > 0.0 && cfg.replay_interval.is_finite()) {
        return Err(AttackError::Interval(cfg.replay_interval));
    }
    if cfg.attack_start >= run_end {
        return Err(AttackError::StartsTooLate { start: cfg.attack_start, end: run_end });
    }
    Ok(Attacker::default())
}

/// Replay instants in `[attack_start, end)`.
pub fn replay_times(cfg: &AttackConfig, end: f64) -> impl Iterator<Item = f64> + '_ {
    (0u64..)
        .map(move |i| cfg.attack_start + i as f64 * cfg.replay_interval)
        .take_while(move |&t| t < end)
}
