//! Rank arithmetic and the minimum-rank-with-hysteresis objective function.

pub const MIN_HOP_RANK_INCREASE: u16 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rank(pub u16);

impl Rank {
    pub const ROOT: Rank = Rank(MIN_HOP_RANK_INCREASE);
    pub const INFINITE: Rank = Rank(0xFFFF);

    pub fn is_infinite(&self) -> bool {
        *self == Rank::INFINITE
    }

    pub fn plus(self, inc: u16) -> Rank {
        Rank(self.0.saturating_add(inc))
    }

    /// Integer part, i.e. hops from the root when every link costs one.
    pub fn dag_rank(&self) -> u16 {
        self.0 / MIN_HOP_RANK_INCREASE
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mrhof {
    /// Required improvement in path cost before switching parent.
    pub hysteresis: u16,
}

impl Default for Mrhof {
    fn default() -> Self {
        Self { hysteresis: 192 }
    }
}

impl Mrhof {
    pub fn rank_increment(&self, etx: f64) -> u16 {
        (etx * MIN_HOP_RANK_INCREASE as f64).round().clamp(0.0, u16::MAX as f64) as u16
    }

    pub fn path_cost(&self, parent_rank: Rank, etx: f64) -> Rank {
        parent_rank.plus(self.rank_increment(etx))
    }

    /// True if a candidate with `candidate` cost should replace the current parent.
    pub fn better_enough(&self, current: Rank, candidate: Rank) -> bool {
        candidate.0 as u32 + self.hysteresis as u32 <= current.0 as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hop_below_root() {
        let of = Mrhof::default();
        assert_eq!(of.path_cost(Rank::ROOT, 1.0), Rank(512));
        assert_eq!(of.path_cost(Rank::ROOT, 1.5), Rank(640));
        assert_eq!(Rank(512).dag_rank(), 2);
    }

    #[test]
    fn hysteresis_threshold() {
        let of = Mrhof::default();
        assert!(!of.better_enough(Rank(768), Rank(600)));
        assert!(of.better_enough(Rank(768), Rank(576)));
        assert!(of.better_enough(Rank(768), Rank(512)));
    }

    #[test]
    fn saturates_at_infinite() {
        assert_eq!(Rank(0xFF00).plus(512), Rank::INFINITE);
    }
}
