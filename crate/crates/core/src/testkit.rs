//! Small deterministic networks for exact protocol checks: straight chains
//! with preset parents, a lossless link and no DIO or data traffic.

use crate::defense::DefenseMode;
use crate::network::{LinkModel, NetworkConfig, NetworkError, RunOutput, World};
use crate::{NodeId, Position};

pub const CHAIN_SPACING: f64 = 40.0;
pub const CHAIN_LATENCY: f64 = 0.005;

/// Root plus `depth` nodes in a line; node `i` hangs below node `i - 1`.
pub fn chain(depth: usize, seed: u64) -> NetworkConfig {
    let positions: Vec<Position> = (0..=depth).map(|i| Position::new(i as f64 * CHAIN_SPACING, 0.0)).collect();
    let mut cfg = NetworkConfig::new(positions, seed);
    cfg.preset_parents = (0..=depth).map(|i| i.checked_sub(1)).collect();
    cfg.link = LinkModel::Ideal { latency: CHAIN_LATENCY };
    cfg.node.dio_enabled = false;
    cfg.data = None;
    cfg
}

/// Chain whose leaf floods its captured DAO every `interval` seconds from
/// `start` on, under `mode` with the defense active from time zero.
pub fn flooded_chain(depth: usize, mode: DefenseMode, interval: f64, start: f64, duration: f64) -> NetworkConfig {
    let mut cfg = chain(depth, 1);
    cfg.attackers = vec![depth];
    cfg.attack.replay_interval = interval;
    cfg.attack.attack_start = start;
    cfg.node.defense.mode = mode;
    cfg.node.defense.activate_at = 0.0;
    cfg.duration = duration;
    cfg
}

pub fn run(cfg: NetworkConfig) -> Result<RunOutput, NetworkError> {
    World::new(cfg)?.run()
}

/// Distinct nodes named as target of any block or blacklist event.
pub fn blocked(out: &RunOutput) -> Vec<NodeId> {
    out.metrics.blocked_nodes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_is_a_line_within_range() {
        let cfg = chain(4, 0);
        assert_eq!(cfg.positions.len(), 5);
        assert_eq!(cfg.preset_parents, vec![None, Some(0), Some(1), Some(2), Some(3)]);
        let out = run(cfg).unwrap();
        assert!(out.nodes.iter().skip(1).all(|n| n.parents.preferred.is_some()));
    }
}
