//! Time-ordered event queue with insertion-order tie breaking and cancellation.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use thiserror::Error;

use crate::NodeId;

/// Simulated time in seconds.
pub type SimTime = f64;

/// Handle returned by [`EventQueue::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventId(u64);

/// Index into the medium's transmission log.
pub type TxId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// End of an over-the-air transmission; receivers get the frame now.
    MessageDelivery { tx: TxId },
    /// Backoff expired, the MAC performs a channel assessment.
    MacAttempt { node: NodeId },
    TrickleFire { node: NodeId },
    /// DAO-ACK timeout for the node's outstanding DAO.
    DaoTimer { node: NodeId },
    DataGeneration { node: NodeId },
    MobilityStep { node: NodeId },
    AttackReplay { node: NodeId },
    /// Periodic solicitation while detached.
    DisTimer { node: NodeId },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::MessageDelivery { .. } => "delivery",
            EventKind::MacAttempt { .. } => "mac",
            EventKind::TrickleFire { .. } => "trickle",
            EventKind::DaoTimer { .. } => "dao-timer",
            EventKind::DataGeneration { .. } => "data",
            EventKind::MobilityStep { .. } => "mobility",
            EventKind::AttackReplay { .. } => "replay",
            EventKind::DisTimer { .. } => "dis",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub fire_at: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .fire_at
            .total_cmp(&self.fire_at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("event {kind:?} scheduled at {fire_at} before current time {now}")]
    InThePast { kind: EventKind, fire_at: SimTime, now: SimTime },
    #[error("event {kind:?} has non-finite fire time")]
    NotFinite { kind: EventKind },
}

/// Simulation clock plus pending events.
#[derive(Debug, Default)]
pub struct EventQueue {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Event>,
    live: HashSet<u64>,
    cancelled: HashSet<u64>,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn schedule(&mut self, fire_at: SimTime, kind: EventKind) -> Result<EventId, ScheduleError> {
        if !fire_at.is_finite() {
            return Err(ScheduleError::NotFinite { kind });
        }
        if fire_at < self.now {
            return Err(ScheduleError::InThePast { kind, fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { fire_at, seq, kind });
        self.live.insert(seq);
        Ok(EventId(seq))
    }

    /// Cancels a pending event. Cancelling an already-fired event is a no-op.
    pub fn cancel(&mut self, id: EventId) {
        if self.live.remove(&id.0) {
            self.cancelled.insert(id.0);
        }
    }

    pub fn peek_time(&mut self) -> Option<SimTime> {
        self.skip_cancelled();
        self.heap.peek().map(|e| e.fire_at)
    }

    /// Pops the next event and advances the clock to its fire time.
    pub fn pop(&mut self) -> Option<Event> {
        self.skip_cancelled();
        let ev = self.heap.pop()?;
        self.live.remove(&ev.seq);
        debug_assert!(ev.fire_at >= self.now, "causality violated");
        self.now = ev.fire_at;
        Some(ev)
    }

    fn skip_cancelled(&mut self) {
        while let Some(top) = self.heap.peek() {
            if self.cancelled.remove(&top.seq) {
                self.heap.pop();
            } else {
                break;
            }
        }
    }
}
