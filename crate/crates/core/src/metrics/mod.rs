//! Per-run counters and the derived performance metrics.

pub mod stats;

use crate::rpl::message::MessageClass;
use crate::sim::radio::DropReason;
use crate::NodeId;

pub use stats::{aggregate, Summary};

/// Seconds of CPU activity charged per processed message.
pub const CPU_PER_MESSAGE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyLedger {
    pub tx_s: f64,
    pub rx_s: f64,
    pub cpu_s: f64,
    pub lpm_s: f64,
}

impl EnergyLedger {
    pub fn total(&self) -> f64 {
        self.tx_s + self.rx_s + self.cpu_s + self.lpm_s
    }
}

/// Current draw per state, in milliamperes, at a supply voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerModel {
    pub voltage: f64,
    pub tx_ma: f64,
    pub rx_ma: f64,
    pub cpu_ma: f64,
    pub lpm_ma: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { voltage: 3.0, tx_ma: 17.4, rx_ma: 18.8, cpu_ma: 1.8, lpm_ma: 0.0545 }
    }
}

impl PowerModel {
    /// Average power in milliwatts over `duration` seconds.
    pub fn average_mw(&self, e: &EnergyLedger, duration: f64) -> f64 {
        let mj = self.voltage
            * (e.tx_s * self.tx_ma + e.rx_s * self.rx_ma + e.cpu_s * self.cpu_ma + e.lpm_s * self.lpm_ma);
        mj / duration
    }
}

/// Frames handed to the link layer versus their fate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tally {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: std::collections::BTreeMap<DropReason, u64>,
}

impl Tally {
    pub fn dropped_total(&self) -> u64 {
        self.dropped.values().sum()
    }

    pub fn balanced(&self) -> bool {
        self.sent == self.delivered + self.dropped_total()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassCounters {
    pub sent: u64,
    pub received: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEvent {
    pub time: f64,
    pub parent: NodeId,
    pub target: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DefenseWork {
    pub invocations: u64,
    pub comparisons: u64,
    pub max_comparisons: usize,
    /// Calls whose comparisons exceeded blacklist length plus neighbor count.
    pub bound_violations: u64,
    pub discards: u64,
    pub blacklistings: u64,
    /// Verdicts on DAOs sent by legitimate nodes, and how many of those refused them.
    pub legit_verdicts: u64,
    pub legit_refusals: u64,
    pub peak_table_bytes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DaoCounters {
    /// Self-originated DAOs, first transmissions only.
    pub originated: u64,
    pub retransmitted: u64,
    /// New DAOs emitted by storing parents on behalf of a child.
    pub aggregated: u64,
    /// Non-storing DAOs relayed with an appended stack entry.
    pub relayed: u64,
    pub acks_sent: u64,
    pub replays: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FprGranularity {
    Node,
    Event,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub duration: f64,
    /// Whether the node's data counts toward delivery ratios.
    pub counted: Vec<bool>,
    pub ground_truth_attackers: Vec<NodeId>,
    pub data_sent: u64,
    pub data_received: u64,
    pub data_lost_at_source: u64,
    pub delays: Vec<f64>,
    pub energy: Vec<EnergyLedger>,
    pub tallies: [Tally; 5],
    pub control: [ClassCounters; 5],
    pub dio_suppressed: u64,
    pub dao: Vec<DaoCounters>,
    pub parent_changes: u64,
    pub block_events: Vec<BlockEvent>,
    pub defense: DefenseWork,
    pub replays_attempted: u64,
    pub events: u64,
}

impl RunMetrics {
    pub fn new(nodes: usize, duration: f64, attackers: &[NodeId], counted: Vec<bool>) -> Self {
        assert_eq!(counted.len(), nodes);
        Self {
            duration,
            counted,
            ground_truth_attackers: attackers.to_vec(),
            data_sent: 0,
            data_received: 0,
            data_lost_at_source: 0,
            delays: Vec::new(),
            energy: vec![EnergyLedger::default(); nodes],
            tallies: Default::default(),
            control: [ClassCounters::default(); 5],
            dio_suppressed: 0,
            dao: vec![DaoCounters::default(); nodes],
            parent_changes: 0,
            block_events: Vec::new(),
            defense: DefenseWork::default(),
            replays_attempted: 0,
            events: 0,
        }
    }

    pub fn nodes(&self) -> usize {
        self.energy.len()
    }

    pub fn is_attacker(&self, n: NodeId) -> bool {
        self.ground_truth_attackers.contains(&n)
    }

    pub fn data_generated(&mut self, origin: NodeId) {
        if self.counted[origin] {
            self.data_sent += 1;
        }
    }

    pub fn data_lost_at_source(&mut self, origin: NodeId) {
        if self.counted[origin] {
            self.data_lost_at_source += 1;
        }
    }

    pub fn data_delivered(&mut self, origin: NodeId, delay: f64) {
        if self.counted[origin] {
            self.data_received += 1;
            self.delays.push(delay);
        }
    }

    pub fn tally(&mut self, class: MessageClass) -> &mut Tally {
        &mut self.tallies[class.index()]
    }

    pub fn charge_cpu(&mut self, n: NodeId) {
        self.energy[n].cpu_s += CPU_PER_MESSAGE;
    }

    /// Assigns the remaining time of every node to low-power mode.
    pub fn close_energy(&mut self) {
        for e in &mut self.energy {
            e.lpm_s = (self.duration - e.tx_s - e.rx_s - e.cpu_s).max(0.0);
        }
    }

    pub fn total_replays(&self) -> u64 {
        self.dao.iter().map(|d| d.replays).sum()
    }

    pub fn total_aggregated(&self) -> u64 {
        self.dao.iter().map(|d| d.aggregated).sum()
    }

    /// Distinct nodes that were blacklisted or blocked at least once.
    pub fn blocked_nodes(&self) -> Vec<NodeId> {
        let mut v: Vec<NodeId> = self.block_events.iter().map(|e| e.target).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn pdr(m: &RunMetrics) -> Option<f64> {
    (m.data_sent > 0).then(|| m.data_received as f64 / m.data_sent as f64)
}

pub fn plr(m: &RunMetrics) -> Option<f64> {
    (m.data_sent > 0).then(|| (m.data_sent - m.data_received) as f64 / m.data_sent as f64)
}

pub fn ae2ed(m: &RunMetrics) -> Option<f64> {
    (!m.delays.is_empty()).then(|| m.delays.iter().sum::<f64>() / m.delays.len() as f64)
}

/// Mean power over non-root nodes, milliwatts.
pub fn apc(m: &RunMetrics, power: &PowerModel) -> f64 {
    let nodes = &m.energy[1..];
    if nodes.is_empty() {
        return 0.0;
    }
    nodes.iter().map(|e| power.average_mw(e, m.duration)).sum::<f64>() / nodes.len() as f64
}

/// False positive rate. Node-level: share of legitimate non-root nodes ever
/// blocked. Event-level: share of defense verdicts on legitimate senders that
/// refused the DAO.
pub fn fpr(m: &RunMetrics, granularity: FprGranularity) -> Option<f64> {
    match granularity {
        FprGranularity::Node => {
            let legit: Vec<NodeId> = (1..m.nodes()).filter(|&n| !m.is_attacker(n)).collect();
            if legit.is_empty() {
                return None;
            }
            let blocked = m.blocked_nodes();
            let fp = legit.iter().filter(|n| blocked.binary_search(n).is_ok()).count();
            Some(fp as f64 / legit.len() as f64)
        }
        FprGranularity::Event => {
            if m.defense.legit_verdicts == 0 {
                Some(0.0)
            } else {
                Some(m.defense.legit_refusals as f64 / m.defense.legit_verdicts as f64)
            }
        }
    }
}
