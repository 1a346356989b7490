//! Per-child DAO rate limiting, reset whenever the parent sends a DIO.

use std::collections::{BTreeMap, BTreeSet};

use crate::defense::{DaoVerdict, Decision};
use crate::rpl::address::LinkLocal;

const COUNTER_ENTRY_BYTES: usize = 18;

#[derive(Debug, Clone)]
pub struct SecRpl {
    pub threshold: u32,
    /// DAOs before this time are counted but never refused.
    pub activate_at: f64,
    counters: BTreeMap<LinkLocal, u32>,
    blocked: BTreeSet<LinkLocal>,
    pub resets: u64,
}

impl SecRpl {
    pub fn new(threshold: u32) -> Self {
        Self { threshold, activate_at: 0.0, counters: BTreeMap::new(), blocked: BTreeSet::new(), resets: 0 }
    }

    pub fn active_from(mut self, t: f64) -> Self {
        self.activate_at = t;
        self
    }

    pub fn is_blocked(&self, child: LinkLocal) -> bool {
        self.blocked.contains(&child)
    }

    pub fn count(&self, child: LinkLocal) -> u32 {
        self.counters.get(&child).copied().unwrap_or(0)
    }

    pub fn table_bytes(&self) -> usize {
        self.counters.len() * COUNTER_ENTRY_BYTES
    }

    /// Every DAO from the child counts, whoever originated it.
    pub fn on_dao(&mut self, now: f64, sender: LinkLocal) -> Decision {
        let bound = self.counters.len();
        let mut d = Decision { verdict: DaoVerdict::Forward, comparisons: 1, blacklist_comparisons: 0, bound, dao_count: 0 };
        if self.blocked.contains(&sender) {
            d.verdict = DaoVerdict::Discard;
            d.dao_count = self.count(sender);
            return d;
        }
        let c = self.counters.entry(sender).or_insert(0);
        if now >= self.activate_at && *c >= self.threshold {
            self.blocked.insert(sender);
            d.verdict = DaoVerdict::BlacklistAndDiscard;
        } else {
            *c += 1;
        }
        d.dao_count = *c;
        d.bound = d.bound.max(1);
        d
    }

    pub fn on_dio_sent(&mut self) {
        self.counters.clear();
        self.blocked.clear();
        self.resets += 1;
    }
}
