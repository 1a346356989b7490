//! Candidate parents and preferred parent selection.

use std::collections::BTreeMap;

use crate::rpl::rank::{Mrhof, Rank};
use crate::NodeId;

/// Consecutive link-layer failures after which a candidate is dropped.
pub const MAX_LINK_FAILURES: u32 = 2;
const ETX_ALPHA: f64 = 0.1;
const ETX_MAX: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub rank: Rank,
    pub etx: f64,
    pub failures: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParentSet {
    pub candidates: BTreeMap<NodeId, Candidate>,
    pub preferred: Option<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Unchanged,
    Switched { from: Option<NodeId>, to: NodeId },
    Lost,
}

impl ParentSet {
    pub fn upsert(&mut self, n: NodeId, rank: Rank) {
        self.candidates
            .entry(n)
            .and_modify(|c| c.rank = rank)
            .or_insert(Candidate { rank, etx: 1.0, failures: 0 });
    }

    pub fn remove(&mut self, n: NodeId) {
        self.candidates.remove(&n);
    }

    pub fn cost(&self, of: &Mrhof, n: NodeId) -> Option<Rank> {
        self.candidates.get(&n).map(|c| of.path_cost(c.rank, c.etx))
    }

    fn best(&self, of: &Mrhof) -> Option<(NodeId, Rank)> {
        self.candidates
            .iter()
            .filter(|(_, c)| !c.rank.is_infinite())
            .map(|(&n, c)| (n, of.path_cost(c.rank, c.etx)))
            .min_by_key(|&(n, cost)| (cost, n))
    }

    /// Re-evaluates the preferred parent.
    pub fn select(&mut self, of: &Mrhof) -> Selection {
        let best = self.best(of);
        let current = self.preferred.and_then(|p| self.cost(of, p).map(|c| (p, c)));
        let choice = match (current, best) {
            (_, None) => None,
            (None, Some(b)) => Some(b.0),
            (Some((p, pc)), Some((b, bc))) => {
                if pc.is_infinite() || of.better_enough(pc, bc) {
                    Some(b)
                } else {
                    Some(p)
                }
            }
        };
        let before = self.preferred;
        self.preferred = choice;
        match (before, choice) {
            (_, None) if before.is_some() => Selection::Lost,
            (_, None) => Selection::Unchanged,
            (b, Some(c)) if b == Some(c) => Selection::Unchanged,
            (b, Some(c)) => Selection::Switched { from: b, to: c },
        }
    }

    /// Rank this node would advertise through its preferred parent.
    pub fn own_rank(&self, of: &Mrhof) -> Rank {
        self.preferred.and_then(|p| self.cost(of, p)).unwrap_or(Rank::INFINITE)
    }

    /// Records a link-layer result. Returns true if the candidate was dropped.
    pub fn link_result(&mut self, n: NodeId, ok: bool, track_etx: bool) -> bool {
        let Some(c) = self.candidates.get_mut(&n) else { return false };
        if track_etx {
            let sample = if ok { 1.0 } else { ETX_MAX };
            c.etx = ((1.0 - ETX_ALPHA) * c.etx + ETX_ALPHA * sample).clamp(1.0, ETX_MAX);
        }
        if ok {
            c.failures = 0;
            false
        } else {
            c.failures += 1;
            if c.failures >= MAX_LINK_FAILURES {
                self.candidates.remove(&n);
                true
            } else {
                false
            }
        }
    }
}
