//! Random connected placement with the root at the arena center.

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

use crate::{NodeId, Position};

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("no connected placement found after {0} attempts")]
    Disconnected(usize),
    #[error("need at least one non-root node, got {0} nodes")]
    TooFew(usize),
    #[error("{attackers} attackers requested but only {candidates} non-root nodes")]
    TooManyAttackers { attackers: usize, candidates: usize },
}

pub const ROOT: NodeId = 0;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub positions: Vec<Position>,
    /// Sorted ascending.
    pub attackers: Vec<NodeId>,
}

impl Topology {
    pub fn nodes(&self) -> usize {
        self.positions.len()
    }

    pub fn is_attacker(&self, n: NodeId) -> bool {
        self.attackers.binary_search(&n).is_ok()
    }
}

/// True if every node reaches node 0 through links no longer than `range`.
pub fn connected(positions: &[Position], range: f64) -> bool {
    if positions.is_empty() {
        return true;
    }
    let mut seen = vec![false; positions.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for v in 0..positions.len() {
            if !seen[v] && positions[u].distance(&positions[v]) <= range {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Places `nodes` nodes (node 0 is the root, at the center) uniformly in a
/// square of side `arena`, redrawing until connected, then picks
/// `attackers` distinct non-root nodes.
pub fn generate<R: Rng + ?Sized>(
    nodes: usize,
    attackers: usize,
    arena: f64,
    range: f64,
    rng: &mut R,
) -> Result<Topology, TopologyError> {
    if nodes < 2 {
        return Err(TopologyError::TooFew(nodes));
    }
    if attackers > nodes - 1 {
        return Err(TopologyError::TooManyAttackers { attackers, candidates: nodes - 1 });
    }
    let center = Position::new(arena / 2.0, arena / 2.0);
    for _ in 0..MAX_ATTEMPTS {
        let mut positions = Vec::with_capacity(nodes);
        positions.push(center);
        for _ in 1..nodes {
            positions.push(Position::new(rng.gen_range(0.0..=arena), rng.gen_range(0.0..=arena)));
        }
        if connected(&positions, range) {
            let mut picked: Vec<NodeId> = sample(rng, nodes - 1, attackers).into_iter().map(|i| i + 1).collect();
            picked.sort_unstable();
            return Ok(Topology { positions, attackers: picked });
        }
    }
    Err(TopologyError::Disconnected(MAX_ATTEMPTS))
}
