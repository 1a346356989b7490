//! Unit-disk radio medium with a CSMA link layer.
//!
//! A transmission occupies the sender's radio from its clear-channel
//! assessment until the end of the frame. The on-air portion is a turnaround,
//! an optional rendezvous period (the sender waiting for a duty-cycled
//! receiver to wake up), and finally the frame itself. Receivers only decode
//! the final frame; two frames that overlap at a receiver within the
//! interference range corrupt the later one.

use rand::Rng;
use thiserror::Error;

use crate::sim::event::{SimTime, TxId};
use crate::{NodeId, Position};

#[derive(Debug, Error, PartialEq)]
pub enum RadioError {
    #[error("tx_range must satisfy 0 < tx_range <= interference_range (got {tx_range}, {interference_range})")]
    Ranges { tx_range: f64, interference_range: f64 },
    #[error("rx_success must lie in [0, 1] (got {0})")]
    RxSuccess(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioModel {
    pub tx_range: f64,
    pub interference_range: f64,
    pub rx_success: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self { tx_range: 50.0, interference_range: 100.0, rx_success: 1.0 }
    }
}

impl RadioModel {
    pub fn new(tx_range: f64, interference_range: f64, rx_success: f64) -> Result<Self, RadioError> {
        if !(tx_range > 0.0 && tx_range <= interference_range) {
            return Err(RadioError::Ranges { tx_range, interference_range });
        }
        if !(0.0..=1.0).contains(&rx_success) {
            return Err(RadioError::RxSuccess(rx_success));
        }
        Ok(Self { tx_range, interference_range, rx_success })
    }

    pub fn in_range(&self, a: &Position, b: &Position) -> bool {
        a.distance(b) <= self.tx_range
    }

    pub fn interferes(&self, a: &Position, b: &Position) -> bool {
        a.distance(b) <= self.interference_range
    }
}

/// Link-layer timing parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacParams {
    pub bitrate_bps: f64,
    /// Initial random backoff is uniform in `[0, backoff_max]` seconds.
    pub backoff_max: f64,
    pub turnaround: f64,
    /// Receiver wake-up period. A unicast waits a uniform fraction of it,
    /// a broadcast the whole period. Zero disables rendezvous.
    pub wakeup_interval: f64,
    pub phy_overhead_bytes: usize,
    pub queue_capacity: usize,
    /// Clear-channel assessments before a frame is abandoned.
    pub max_cca_attempts: u32,
    /// Transmissions of an unacknowledged unicast frame, the first included.
    pub max_transmissions: u32,
}

impl Default for MacParams {
    fn default() -> Self {
        Self {
            bitrate_bps: 250_000.0,
            backoff_max: 0.008,
            turnaround: 0.002,
            wakeup_interval: 0.125,
            phy_overhead_bytes: 6,
            queue_capacity: 8,
            max_cca_attempts: 5,
            max_transmissions: 3,
        }
    }
}

impl MacParams {
    pub fn serialization(&self, bytes: usize) -> f64 {
        ((bytes + self.phy_overhead_bytes) * 8) as f64 / self.bitrate_bps
    }

    pub fn initial_backoff<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen_range(0.0..=self.backoff_max)
    }

    /// Idle-channel delay of one frame: backoff, turnaround and serialization.
    pub fn mac_delay<R: Rng + ?Sized>(&self, bytes: usize, rng: &mut R) -> f64 {
        self.initial_backoff(rng) + self.turnaround + self.serialization(bytes)
    }

    pub fn rendezvous<R: Rng + ?Sized>(&self, broadcast: bool, rng: &mut R) -> f64 {
        if self.wakeup_interval <= 0.0 {
            0.0
        } else if broadcast {
            self.wakeup_interval
        } else {
            rng.gen_range(0.0..self.wakeup_interval)
        }
    }

    /// Deferral after the `attempt`-th busy assessment (1-based).
    pub fn busy_backoff<R: Rng + ?Sized>(&self, attempt: u32, rng: &mut R) -> f64 {
        let base = self.wakeup_interval.max(self.backoff_max);
        let k = attempt.clamp(1, 3) as f64;
        base + rng.gen_range(0.0..k * base)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    OutOfRange,
    Collision,
    ReceiverBusy,
    RxFailure,
    QueueFull,
    ChannelBusy,
    RunEnded,
}

impl DropReason {
    pub fn label(&self) -> &'static str {
        match self {
            DropReason::OutOfRange => "out-of-range",
            DropReason::Collision => "collision",
            DropReason::ReceiverBusy => "receiver-busy",
            DropReason::RxFailure => "rx-failure",
            DropReason::QueueFull => "queue-full",
            DropReason::ChannelBusy => "channel-busy",
            DropReason::RunEnded => "run-ended",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeliveryOutcome {
    Delivered { at: SimTime },
    Dropped(DropReason),
}

impl DeliveryOutcome {
    pub fn is_delivered(&self) -> bool {
        matches!(self, DeliveryOutcome::Delivered { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub src: NodeId,
    /// `None` for broadcast.
    pub dst: Option<NodeId>,
    /// Instant of the clear-channel assessment; the sender's radio is busy from here.
    pub cca_at: SimTime,
    pub on_air_from: SimTime,
    pub frame_from: SimTime,
    pub on_air_to: SimTime,
    pub bytes: usize,
}

impl Transmission {
    pub fn tx_time(&self) -> f64 {
        self.on_air_to - self.cca_at
    }

    pub fn frame_time(&self) -> f64 {
        self.on_air_to - self.frame_from
    }
}

/// Seconds after which a finished transmission can no longer interact with new ones.
const HORIZON: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct Medium {
    pub radio: RadioModel,
    pub mac: MacParams,
    log: Vec<Transmission>,
    window_start: usize,
}

impl Medium {
    pub fn new(radio: RadioModel, mac: MacParams) -> Self {
        Self { radio, mac, log: Vec::new(), window_start: 0 }
    }

    pub fn transmission(&self, id: TxId) -> &Transmission {
        &self.log[id]
    }

    pub fn transmissions(&self) -> usize {
        self.log.len()
    }

    fn recent(&self) -> impl Iterator<Item = (TxId, &Transmission)> {
        self.log[self.window_start..]
            .iter()
            .enumerate()
            .map(move |(i, t)| (i + self.window_start, t))
    }

    fn prune(&mut self, now: SimTime) {
        while self.window_start < self.log.len() && self.log[self.window_start].cca_at < now - HORIZON {
            self.window_start += 1;
        }
    }

    /// Carrier sense at `node`: true if the node itself or anyone within
    /// interference range is on the air.
    pub fn channel_busy(&self, node: NodeId, positions: &[Position], now: SimTime) -> bool {
        let here = &positions[node];
        self.recent().any(|(_, t)| {
            let active = if t.src == node {
                t.cca_at <= now && now < t.on_air_to
            } else {
                t.on_air_from <= now && now < t.on_air_to
            };
            active && (t.src == node || self.radio.interferes(&positions[t.src], here))
        })
    }

    pub fn start<R: Rng + ?Sized>(
        &mut self,
        src: NodeId,
        dst: Option<NodeId>,
        bytes: usize,
        now: SimTime,
        rng: &mut R,
    ) -> TxId {
        self.prune(now);
        let on_air_from = now + self.mac.turnaround;
        let frame_from = on_air_from + self.mac.rendezvous(dst.is_none(), rng);
        let on_air_to = frame_from + self.mac.serialization(bytes);
        self.log.push(Transmission { src, dst, cca_at: now, on_air_from, frame_from, on_air_to, bytes });
        self.log.len() - 1
    }

    /// Nodes other than `src` inside the unit disk of `src`.
    pub fn neighbors(&self, src: NodeId, positions: &[Position]) -> Vec<NodeId> {
        (0..positions.len())
            .filter(|&n| n != src && self.radio.in_range(&positions[src], &positions[n]))
            .collect()
    }

    /// Decides reception of transmission `id` at `rx`, evaluated at the end of the frame.
    pub fn try_deliver<R: Rng + ?Sized>(
        &self,
        id: TxId,
        rx: NodeId,
        positions: &[Position],
        rng: &mut R,
    ) -> DeliveryOutcome {
        let f = &self.log[id];
        let here = &positions[rx];
        if !self.radio.in_range(&positions[f.src], here) {
            return DeliveryOutcome::Dropped(DropReason::OutOfRange);
        }
        for (gid, g) in self.recent() {
            if gid == id {
                continue;
            }
            if g.src == rx {
                if g.cca_at < f.on_air_to && f.frame_from < g.on_air_to {
                    return DeliveryOutcome::Dropped(DropReason::ReceiverBusy);
                }
                continue;
            }
            let overlap = g.frame_from < f.on_air_to && f.frame_from < g.on_air_to;
            let earlier = (g.frame_from, gid) < (f.frame_from, id);
            if overlap && earlier && self.radio.interferes(&positions[g.src], here) {
                return DeliveryOutcome::Dropped(DropReason::Collision);
            }
        }
        if self.radio.rx_success < 1.0 && !rng.gen_bool(self.radio.rx_success) {
            return DeliveryOutcome::Dropped(DropReason::RxFailure);
        }
        DeliveryOutcome::Delivered { at: f.on_air_to }
    }

    /// Outcomes for every in-range receiver of broadcast `id`.
    pub fn broadcast<R: Rng + ?Sized>(
        &self,
        id: TxId,
        positions: &[Position],
        rng: &mut R,
    ) -> Vec<(NodeId, DeliveryOutcome)> {
        let src = self.log[id].src;
        self.neighbors(src, positions)
            .into_iter()
            .map(|n| (n, self.try_deliver(id, n, positions, rng)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Stream};

    fn medium(rx_success: f64) -> Medium {
        let mac = MacParams { wakeup_interval: 0.0, ..MacParams::default() };
        Medium::new(RadioModel::new(50.0, 100.0, rx_success).unwrap(), mac)
    }

    fn two_at(d: f64) -> Vec<Position> {
        vec![Position::new(0.0, 0.0), Position::new(d, 0.0)]
    }

    #[test]
    fn radio_model_validation() {
        assert!(RadioModel::new(60.0, 50.0, 1.0).is_err());
        assert!(RadioModel::new(0.0, 50.0, 1.0).is_err());
        assert!(RadioModel::new(50.0, 100.0, 1.1).is_err());
        assert!(RadioModel::new(50.0, 50.0, 0.0).is_ok());
    }

    #[test]
    fn outside_unit_disk_is_dropped() {
        let mut m = medium(1.0);
        let mut rng = stream(1, Stream::Radio);
        let pos = two_at(60.0);
        let id = m.start(0, Some(1), 40, 0.0, &mut rng);
        assert_eq!(m.try_deliver(id, 1, &pos, &mut rng), DeliveryOutcome::Dropped(DropReason::OutOfRange));
    }

    #[test]
    fn inside_unit_disk_is_delivered_at_frame_end() {
        let mut m = medium(1.0);
        let mut rng = stream(1, Stream::Radio);
        let pos = two_at(10.0);
        let id = m.start(0, Some(1), 40, 1.0, &mut rng);
        let end = m.transmission(id).on_air_to;
        assert_eq!(m.try_deliver(id, 1, &pos, &mut rng), DeliveryOutcome::Delivered { at: end });
        // 2 ms turnaround + (40 + 6) bytes at 250 kbit/s
        assert!((end - 1.0 - 0.002 - 46.0 * 8.0 / 250_000.0).abs() < 1e-12);
    }

    #[test]
    fn lossy_link_matches_configured_probability() {
        let mut m = medium(0.9);
        let mut rng = stream(99, Stream::Radio);
        let pos = two_at(10.0);
        let mut ok = 0;
        for i in 0..1000 {
            let id = m.start(0, Some(1), 40, i as f64, &mut rng);
            if m.try_deliver(id, 1, &pos, &mut rng).is_delivered() {
                ok += 1;
            }
        }
        let mean = ok as f64 / 1000.0;
        assert!((0.88..=0.92).contains(&mean), "mean {mean}");
    }

    #[test]
    fn broadcast_reaches_in_range_subset() {
        let mut m = medium(1.0);
        let mut rng = stream(3, Stream::Radio);
        // sender on the arena edge, half the nodes within 50 m
        let pos = vec![
            Position::new(0.0, 75.0),
            Position::new(20.0, 75.0),
            Position::new(0.0, 110.0),
            Position::new(30.0, 60.0),
            Position::new(120.0, 75.0),
            Position::new(75.0, 75.0),
            Position::new(149.0, 149.0),
        ];
        let id = m.start(0, None, 60, 0.0, &mut rng);
        let out = m.broadcast(id, &pos, &mut rng);
        let got: Vec<_> = out.iter().map(|(n, _)| *n).collect();
        assert_eq!(got, vec![1, 2, 3]);
        assert!(out.iter().all(|(_, o)| o.is_delivered()));
    }

    #[test]
    fn no_neighbors_no_outcomes() {
        let mut m = medium(1.0);
        let mut rng = stream(3, Stream::Radio);
        let pos = two_at(80.0);
        let id = m.start(0, None, 60, 0.0, &mut rng);
        assert!(m.broadcast(id, &pos, &mut rng).is_empty());
    }

    #[test]
    fn overlapping_frames_drop_the_later_one() {
        let mut m = medium(1.0);
        let mut rng = stream(3, Stream::Radio);
        // 0 and 2 are hidden from each other, both reach 1
        let pos = vec![Position::new(0.0, 0.0), Position::new(45.0, 0.0), Position::new(90.0, 0.0)];
        let a = m.start(0, Some(1), 60, 0.0, &mut rng);
        let b = m.start(2, Some(1), 60, 0.0005, &mut rng);
        assert!(m.try_deliver(a, 1, &pos, &mut rng).is_delivered());
        assert_eq!(m.try_deliver(b, 1, &pos, &mut rng), DeliveryOutcome::Dropped(DropReason::Collision));
    }

    #[test]
    fn carrier_sense_sees_nodes_in_interference_range() {
        let mut m = medium(1.0);
        let mut rng = stream(3, Stream::Radio);
        let pos = vec![Position::new(0.0, 0.0), Position::new(90.0, 0.0), Position::new(140.0, 0.0)];
        m.start(0, None, 60, 0.0, &mut rng);
        assert!(m.channel_busy(0, &pos, 0.001));
        assert!(!m.channel_busy(1, &pos, 0.001), "energy not on air during turnaround");
        assert!(m.channel_busy(1, &pos, 0.003));
        assert!(!m.channel_busy(2, &pos, 0.003));
        assert!(!m.channel_busy(1, &pos, 1.0));
    }

    #[test]
    fn distance_symmetry_gives_symmetric_eligibility() {
        let r = RadioModel::default();
        let a = Position::new(10.0, 20.0);
        let b = Position::new(50.0, 45.0);
        assert_eq!(r.in_range(&a, &b), r.in_range(&b, &a));
    }
}
