//! Downward routes learned from DAOs.

use std::collections::BTreeMap;

use crate::rpl::address::{GlobalPrefix, LinkLocal};

pub const ROUTE_LIFETIME: f64 = 900.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub next_hop: LinkLocal,
    /// Non-storing root only: hops from the root toward the target, target excluded.
    pub source_route: Vec<LinkLocal>,
    pub expires: f64,
    pub sequence: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteUpdate {
    Added,
    NextHopChanged,
    Refreshed,
}

#[derive(Debug, Clone, Default)]
pub struct RouteTable {
    entries: BTreeMap<GlobalPrefix, Route>,
    pub capacity: usize,
}

impl RouteTable {
    pub fn new(capacity: usize) -> Self {
        Self { entries: BTreeMap::new(), capacity }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, target: &GlobalPrefix, now: f64) -> Option<&Route> {
        self.entries.get(target).filter(|r| r.expires > now)
    }

    /// Installs or refreshes a route. When full, the entry closest to
    /// expiry is evicted and returned.
    pub fn install(
        &mut self,
        target: GlobalPrefix,
        next_hop: LinkLocal,
        source_route: Vec<LinkLocal>,
        sequence: u8,
        now: f64,
    ) -> (RouteUpdate, Option<GlobalPrefix>) {
        self.entries.retain(|_, r| r.expires > now);
        let expires = now + ROUTE_LIFETIME;
        if let Some(r) = self.entries.get_mut(&target) {
            let changed = r.next_hop != next_hop || r.source_route != source_route;
            *r = Route { next_hop, source_route, expires, sequence };
            return (if changed { RouteUpdate::NextHopChanged } else { RouteUpdate::Refreshed }, None);
        }
        let mut evicted = None;
        if self.capacity > 0 && self.entries.len() >= self.capacity {
            let victim = self
                .entries
                .iter()
                .min_by(|a, b| a.1.expires.total_cmp(&b.1.expires).then(a.0.cmp(b.0)))
                .map(|(k, _)| *k);
            if let Some(v) = victim {
                self.entries.remove(&v);
                evicted = Some(v);
            }
        }
        self.entries.insert(target, Route { next_hop, source_route, expires, sequence });
        (RouteUpdate::Added, evicted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_child_refresh_is_idempotent() {
        let mut t = RouteTable::new(4);
        let p = GlobalPrefix::of(8);
        assert_eq!(t.install(p, LinkLocal::of(8), vec![], 1, 0.0).0, RouteUpdate::Added);
        assert_eq!(t.install(p, LinkLocal::of(8), vec![], 1, 5.0).0, RouteUpdate::Refreshed);
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(&p, 10.0).unwrap().expires, 905.0);
        assert_eq!(t.install(p, LinkLocal::of(3), vec![], 2, 6.0).0, RouteUpdate::NextHopChanged);
    }

    #[test]
    fn full_table_evicts_oldest() {
        let mut t = RouteTable::new(2);
        t.install(GlobalPrefix::of(1), LinkLocal::of(1), vec![], 0, 0.0);
        t.install(GlobalPrefix::of(2), LinkLocal::of(2), vec![], 0, 1.0);
        let (_, ev) = t.install(GlobalPrefix::of(3), LinkLocal::of(3), vec![], 0, 2.0);
        assert_eq!(ev, Some(GlobalPrefix::of(1)));
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn expired_routes_vanish() {
        let mut t = RouteTable::new(2);
        let p = GlobalPrefix::of(1);
        t.install(p, LinkLocal::of(1), vec![], 0, 0.0);
        assert!(t.get(&p, 899.0).is_some());
        assert!(t.get(&p, 900.0).is_none());
    }
}
