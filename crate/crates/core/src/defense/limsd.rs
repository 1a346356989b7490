//! Per-originator DAO counting with a persistent blacklist.
//!
//! A parent counts only the DAOs a child originates itself (the DAO prefix
//! equals the child's global address). DAOs a child relays for its
//! descendants pass uncounted, so a relay is never punished for an
//! attacker further down. Once a child reaches `beta` originated DAOs its
//! next one blacklists it; from then on its DAOs are dropped after a
//! blacklist lookup alone.

use crate::defense::{DaoVerdict, Decision, DefenseConfig};
use crate::rpl::address::{GlobalPrefix, LinkLocal};

/// Bytes per neighbor entry: two addresses and a counter.
pub const NEIGHBOR_ENTRY_BYTES: usize = 34;
/// Bytes per blacklist entry: one address.
pub const BLACKLIST_ENTRY_BYTES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborEntry {
    pub from: LinkLocal,
    pub global_id: GlobalPrefix,
    pub dao_count: u32,
}

#[derive(Debug, Clone)]
pub struct LiMsd {
    pub beta: u32,
    pub node_max: usize,
    pub activate_at: f64,
    pub reinit_period: f64,
    neighbors: Vec<NeighborEntry>,
    blacklist: Vec<LinkLocal>,
    initialized_at: Option<f64>,
    pub init_calls: u32,
    pub evictions: u64,
}

impl LiMsd {
    pub fn new(cfg: &DefenseConfig) -> Self {
        assert!(cfg.beta >= 1, "beta must be at least 1");
        Self {
            beta: cfg.beta,
            node_max: cfg.node_max.max(1),
            activate_at: cfg.activate_at,
            reinit_period: cfg.reinit_period,
            neighbors: Vec::new(),
            blacklist: Vec::new(),
            initialized_at: None,
            init_calls: 0,
            evictions: 0,
        }
    }

    pub fn initialize(&mut self, now: f64) {
        self.neighbors = Vec::with_capacity(self.node_max);
        self.blacklist = Vec::with_capacity(self.node_max);
        self.initialized_at = Some(now);
        self.init_calls += 1;
    }

    pub fn n_blacklist(&self) -> usize {
        self.blacklist.len()
    }

    pub fn t_child(&self) -> usize {
        self.neighbors.len()
    }

    pub fn blacklist(&self) -> &[LinkLocal] {
        &self.blacklist
    }

    pub fn neighbors(&self) -> &[NeighborEntry] {
        &self.neighbors
    }

    pub fn table_bytes(&self) -> usize {
        self.neighbors.len() * NEIGHBOR_ENTRY_BYTES + self.blacklist.len() * BLACKLIST_ENTRY_BYTES
    }

    /// Linear blacklist scan. Returns membership and the comparisons made.
    pub fn search_blacklist(&self, sender: LinkLocal) -> (bool, usize) {
        let mut comparisons = 0;
        for bl in &self.blacklist {
            comparisons += 1;
            if *bl == sender {
                return (true, comparisons);
            }
        }
        (false, comparisons)
    }

    fn add_neighbor(&mut self, sender: LinkLocal) -> usize {
        if self.neighbors.len() >= self.node_max {
            let victim = self
                .neighbors
                .iter()
                .enumerate()
                .min_by_key(|(i, e)| (e.dao_count, *i))
                .map(|(i, _)| i)
                .expect("table is non-empty");
            self.neighbors.remove(victim);
            self.evictions += 1;
        }
        self.neighbors.push(NeighborEntry { from: sender, global_id: sender.global(), dao_count: 0 });
        self.neighbors.len() - 1
    }

    fn add_blacklist(&mut self, sender: LinkLocal) {
        if self.blacklist.len() >= self.node_max {
            self.blacklist.remove(0);
        }
        self.blacklist.push(sender);
    }

    pub fn on_dao(&mut self, now: f64, sender: LinkLocal, prefix: GlobalPrefix) -> Decision {
        // before activation DAOs are counted but never refused
        let warming = now < self.activate_at;
        match self.initialized_at {
            Some(t) if now < t + self.reinit_period => {}
            _ => self.initialize(now),
        }
        let bound = self.blacklist.len() + self.neighbors.len();

        let (listed, blacklist_comparisons) = self.search_blacklist(sender);
        if listed {
            return Decision {
                verdict: DaoVerdict::Discard,
                comparisons: blacklist_comparisons,
                blacklist_comparisons,
                bound,
                dao_count: 0,
            };
        }

        let mut comparisons = blacklist_comparisons;
        let mut found = None;
        for (i, e) in self.neighbors.iter().enumerate() {
            comparisons += 1;
            if e.from == sender {
                found = Some(i);
                break;
            }
        }
        let idx = match found {
            Some(i) => i,
            None => self.add_neighbor(sender),
        };

        let entry = &mut self.neighbors[idx];
        let verdict = if prefix == entry.global_id {
            if warming || entry.dao_count < self.beta {
                entry.dao_count += 1;
                DaoVerdict::Forward
            } else {
                DaoVerdict::BlacklistAndDiscard
            }
        } else {
            DaoVerdict::ForwardUncounted
        };
        let dao_count = entry.dao_count;
        if verdict == DaoVerdict::BlacklistAndDiscard {
            self.add_blacklist(sender);
        }
        Decision { verdict, comparisons, blacklist_comparisons, bound, dao_count }
    }
}
