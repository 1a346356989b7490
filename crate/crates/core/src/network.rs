//! The simulated network: nodes, link layer and event loop.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::adversary::{arm, AttackConfig, AttackError};
use crate::metrics::RunMetrics;
use crate::rpl::message::{Message, MessageClass};
use crate::rpl::node::{Action, Ctx, Node, NodeConfig, Timer};
use crate::sim::event::{EventId, EventKind, EventQueue, ScheduleError, TxId};
use crate::sim::mobility::{MobilityState, RandomWaypoint};
use crate::sim::radio::{DeliveryOutcome, DropReason, MacParams, Medium, RadioModel};
use crate::sim::rng::RngStreams;
use crate::sim::topology::ROOT;
use crate::{NodeId, Position};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkModel {
    /// Carrier-sense link layer over the shared unit-disk medium.
    Csma,
    /// Every in-range frame arrives after a fixed latency; no contention.
    Ideal { latency: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataTraffic {
    pub interval: f64,
    /// Application payload bytes.
    pub payload: usize,
}

impl Default for DataTraffic {
    fn default() -> Self {
        Self { interval: 60.0, payload: 30 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Node 0 is the root.
    pub positions: Vec<Position>,
    /// Armed attackers; empty for an attack-free run.
    pub attackers: Vec<NodeId>,
    pub attack: AttackConfig,
    pub node: NodeConfig,
    pub radio: RadioModel,
    pub mac: MacParams,
    pub link: LinkModel,
    pub data: Option<DataTraffic>,
    pub mobility: Option<RandomWaypoint<f64>>,
    pub mobility_step: f64,
    pub duration: f64,
    pub seed: u64,
    pub trace: bool,
    /// Parents installed before the run, indexed by node. Parents must
    /// precede their children.
    pub preset_parents: Vec<Option<NodeId>>,
}

impl NetworkConfig {
    pub fn new(positions: Vec<Position>, seed: u64) -> Self {
        Self {
            positions,
            attackers: Vec::new(),
            attack: AttackConfig::default(),
            node: NodeConfig::default(),
            radio: RadioModel::default(),
            mac: MacParams::default(),
            link: LinkModel::Csma,
            data: Some(DataTraffic::default()),
            mobility: None,
            mobility_step: 1.0,
            duration: 1800.0,
            seed,
            trace: false,
            preset_parents: Vec::new(),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum NetworkError {
    #[error("network needs at least one node")]
    Empty,
    #[error("attacker {node}: {source}")]
    Attack { node: NodeId, source: AttackError },
    #[error("node {0} out of range")]
    UnknownNode(NodeId),
    #[error("preset parent of {child} is {parent}, which does not precede it")]
    PresetOrder { child: NodeId, parent: NodeId },
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

#[derive(Debug, Clone)]
struct Frame {
    src: NodeId,
    dst: Option<NodeId>,
    msg: Message,
    attempts: u32,
    transmissions: u32,
}

#[derive(Debug, Default)]
struct MacQueue {
    frames: VecDeque<Frame>,
    busy: bool,
}

pub struct World {
    cfg: NetworkConfig,
    queue: EventQueue,
    medium: Medium,
    nodes: Vec<Node>,
    positions: Vec<Position>,
    moving: Vec<Option<MobilityState<f64>>>,
    rng: RngStreams,
    mac: Vec<MacQueue>,
    timers: Vec<[Option<EventId>; 3]>,
    in_flight: HashMap<TxId, Frame>,
    ideal: Vec<Option<Frame>>,
    metrics: RunMetrics,
    next_data_id: u64,
    trace: Vec<String>,
    actions: Vec<Action>,
}

/// Everything a finished run leaves behind.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub trace: Vec<String>,
    pub nodes: Vec<Node>,
    pub positions: Vec<Position>,
}

fn timer_event(timer: Timer, node: NodeId) -> EventKind {
    match timer {
        Timer::Trickle => EventKind::TrickleFire { node },
        Timer::DaoAck => EventKind::DaoTimer { node },
        Timer::Dis => EventKind::DisTimer { node },
    }
}

impl World {
    pub fn new(cfg: NetworkConfig) -> Result<Self, NetworkError> {
        let n = cfg.positions.len();
        if n == 0 {
            return Err(NetworkError::Empty);
        }
        let mut nodes: Vec<Node> = (0..n).map(|i| Node::new(i, i == ROOT, &cfg.node)).collect();
        for &a in &cfg.attackers {
            if a >= n {
                return Err(NetworkError::UnknownNode(a));
            }
            let st = arm(a, &cfg.attack, cfg.duration).map_err(|source| NetworkError::Attack { node: a, source })?;
            nodes[a].attacker = Some(st);
        }
        for (child, p) in cfg.preset_parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= child {
                    return Err(NetworkError::PresetOrder { child, parent: p });
                }
                let rank = nodes[p].rank;
                nodes[child].preset_parent(p, rank, &cfg.node);
            }
        }
        let counted = (0..n).map(|i| i != ROOT && !cfg.attackers.contains(&i)).collect();
        let metrics = RunMetrics::new(n, cfg.duration, &cfg.attackers, counted);
        Ok(Self {
            queue: EventQueue::new(),
            medium: Medium::new(cfg.radio, cfg.mac),
            positions: cfg.positions.clone(),
            moving: vec![None; n],
            rng: RngStreams::new(cfg.seed),
            mac: (0..n).map(|_| MacQueue::default()).collect(),
            timers: vec![[None; 3]; n],
            in_flight: HashMap::new(),
            ideal: Vec::new(),
            metrics,
            next_data_id: 0,
            trace: Vec::new(),
            actions: Vec::new(),
            nodes,
            cfg,
        })
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    fn schedule(&mut self, at: f64, kind: EventKind) -> Result<EventId, NetworkError> {
        Ok(self.queue.schedule(at, kind)?)
    }

    fn log(&mut self, line: impl FnOnce() -> String) {
        if self.cfg.trace {
            let l = line();
            self.trace.push(format!("{:.6} {}", self.queue.now(), l));
        }
    }

    /// Runs the handler `f` on node `n` and applies the actions it emits.
    fn dispatch<F>(&mut self, n: NodeId, f: F) -> Result<(), NetworkError>
    where
        F: FnOnce(&mut Node, &mut Ctx),
    {
        let now = self.queue.now();
        let mut out = std::mem::take(&mut self.actions);
        {
            let mut ctx =
                Ctx { now, cfg: &self.cfg.node, rng: &mut self.rng.jitter, out: &mut out, m: &mut self.metrics };
            f(&mut self.nodes[n], &mut ctx);
        }
        let mut result = Ok(());
        for a in out.drain(..) {
            if let Err(e) = self.apply(n, a) {
                result = Err(e);
                break;
            }
        }
        out.clear();
        self.actions = out;
        result
    }

    fn apply(&mut self, n: NodeId, a: Action) -> Result<(), NetworkError> {
        match a {
            Action::Send { dst, msg } => self.transmit(n, dst, msg),
            Action::SetTimer { timer, after } => {
                if let Some(id) = self.timers[n][timer.index()].take() {
                    self.queue.cancel(id);
                }
                let at = self.queue.now() + after;
                let id = self.schedule(at, timer_event(timer, n))?;
                self.timers[n][timer.index()] = Some(id);
                Ok(())
            }
            Action::ClearTimer(timer) => {
                if let Some(id) = self.timers[n][timer.index()].take() {
                    self.queue.cancel(id);
                }
                Ok(())
            }
        }
    }

    fn transmit(&mut self, src: NodeId, dst: Option<NodeId>, msg: Message) -> Result<(), NetworkError> {
        let class = msg.class();
        self.metrics.control[class.index()].sent += 1;
        self.metrics.charge_cpu(src);
        self.log(|| format!("send {src} {} {}", dst.map_or("*".into(), |d| d.to_string()), class.label()));
        let frame = Frame { src, dst, msg, attempts: 0, transmissions: 0 };
        match self.cfg.link {
            LinkModel::Ideal { latency } => {
                self.ideal.push(Some(frame));
                let id = self.ideal.len() - 1;
                self.schedule(self.queue.now() + latency, EventKind::MessageDelivery { tx: id })?;
            }
            LinkModel::Csma => {
                let q = &mut self.mac[src];
                if q.frames.len() >= self.cfg.mac.queue_capacity {
                    self.drop_before_air(&frame, DropReason::QueueFull);
                    return Ok(());
                }
                q.frames.push_back(frame);
                if !q.busy {
                    q.busy = true;
                    let at = self.queue.now() + self.cfg.mac.initial_backoff(&mut self.rng.mac);
                    self.schedule(at, EventKind::MacAttempt { node: src })?;
                }
            }
        }
        Ok(())
    }

    fn drop_before_air(&mut self, frame: &Frame, reason: DropReason) {
        let t = self.metrics.tally(frame.msg.class());
        t.sent += 1;
        *t.dropped.entry(reason).or_insert(0) += 1;
        self.log(|| format!("drop {} {} {}", frame.src, frame.msg.class().label(), reason.label()));
    }

    fn record(&mut self, class: MessageClass, src: NodeId, dst: NodeId, outcome: DeliveryOutcome) {
        let t = self.metrics.tally(class);
        t.sent += 1;
        match outcome {
            DeliveryOutcome::Delivered { .. } => t.delivered += 1,
            DeliveryOutcome::Dropped(r) => *t.dropped.entry(r).or_insert(0) += 1,
        }
        self.log(|| {
            let o = match outcome {
                DeliveryOutcome::Delivered { .. } => "delivered",
                DeliveryOutcome::Dropped(r) => r.label(),
            };
            format!("recv {src} {dst} {} {o}", class.label())
        });
    }

    fn mac_attempt(&mut self, n: NodeId) -> Result<(), NetworkError> {
        let now = self.queue.now();
        let Some(front) = self.mac[n].frames.front_mut() else {
            self.mac[n].busy = false;
            return Ok(());
        };
        if self.medium.channel_busy(n, &self.positions, now) {
            front.attempts += 1;
            let attempts = front.attempts;
            if attempts >= self.cfg.mac.max_cca_attempts {
                let f = self.mac[n].frames.pop_front().expect("front exists");
                self.drop_before_air(&f, DropReason::ChannelBusy);
                return self.start_next(n);
            }
            let at = now + self.cfg.mac.busy_backoff(attempts, &mut self.rng.mac);
            self.schedule(at, EventKind::MacAttempt { node: n })?;
            return Ok(());
        }
        let mut f = self.mac[n].frames.pop_front().expect("front exists");
        f.transmissions += 1;
        let bytes = f.msg.size(self.cfg.data.map_or(0, |d| d.payload));
        let tx = self.medium.start(n, f.dst, bytes, now, &mut self.rng.mac);
        let end = self.medium.transmission(tx).on_air_to;
        self.in_flight.insert(tx, f);
        self.schedule(end, EventKind::MessageDelivery { tx })?;
        Ok(())
    }

    fn start_next(&mut self, n: NodeId) -> Result<(), NetworkError> {
        if self.mac[n].frames.is_empty() {
            self.mac[n].busy = false;
            Ok(())
        } else {
            let at = self.queue.now() + self.cfg.mac.initial_backoff(&mut self.rng.mac);
            self.schedule(at, EventKind::MacAttempt { node: n })?;
            Ok(())
        }
    }

    fn deliver(&mut self, to: NodeId, from: NodeId, msg: Message) -> Result<(), NetworkError> {
        self.metrics.control[msg.class().index()].received += 1;
        self.metrics.charge_cpu(to);
        self.dispatch(to, |node, ctx| node.on_message(ctx, from, msg))
    }

    fn link_result(&mut self, src: NodeId, dst: NodeId, ok: bool) -> Result<(), NetworkError> {
        self.dispatch(src, |node, ctx| node.on_link_result(ctx, dst, ok))
    }

    fn on_air_done(&mut self, tx: TxId) -> Result<(), NetworkError> {
        let Some(f) = self.in_flight.remove(&tx) else { return Ok(()) };
        let t = *self.medium.transmission(tx);
        self.metrics.energy[f.src].tx_s += t.tx_time();
        let class = f.msg.class();
        match f.dst {
            Some(d) => {
                let outcome = self.medium.try_deliver(tx, d, &self.positions, &mut self.rng.radio);
                self.record(class, f.src, d, outcome);
                if !matches!(
                    outcome,
                    DeliveryOutcome::Dropped(DropReason::OutOfRange | DropReason::ReceiverBusy)
                ) {
                    self.metrics.energy[d].rx_s += t.frame_time();
                }
                if outcome.is_delivered() {
                    self.start_next(f.src)?;
                    self.link_result(f.src, d, true)?;
                    self.deliver(d, f.src, f.msg)?;
                } else if f.transmissions < self.cfg.mac.max_transmissions {
                    let src = f.src;
                    let retry = Frame { attempts: 0, ..f };
                    self.mac[src].frames.push_front(retry);
                    let at = self.queue.now() + self.cfg.mac.busy_backoff(1, &mut self.rng.mac);
                    self.schedule(at, EventKind::MacAttempt { node: src })?;
                } else {
                    self.start_next(f.src)?;
                    self.link_result(f.src, d, false)?;
                }
            }
            None => {
                self.start_next(f.src)?;
                let outcomes = self.medium.broadcast(tx, &self.positions, &mut self.rng.radio);
                let mut got = Vec::new();
                for (r, o) in outcomes {
                    self.record(class, f.src, r, o);
                    if !matches!(o, DeliveryOutcome::Dropped(DropReason::ReceiverBusy)) {
                        self.metrics.energy[r].rx_s += t.frame_time();
                    }
                    if o.is_delivered() {
                        got.push(r);
                    }
                }
                for r in got {
                    self.deliver(r, f.src, f.msg.clone())?;
                }
            }
        }
        Ok(())
    }

    fn ideal_done(&mut self, id: usize) -> Result<(), NetworkError> {
        let Some(f) = self.ideal.get_mut(id).and_then(Option::take) else { return Ok(()) };
        let class = f.msg.class();
        let air = self.cfg.mac.serialization(f.msg.size(self.cfg.data.map_or(0, |d| d.payload)));
        self.metrics.energy[f.src].tx_s += air;
        let at = self.queue.now();
        let receivers = match f.dst {
            Some(d) => vec![d],
            None => self.medium.neighbors(f.src, &self.positions),
        };
        for r in receivers {
            let ok = self.cfg.radio.in_range(&self.positions[f.src], &self.positions[r]);
            let outcome =
                if ok { DeliveryOutcome::Delivered { at } } else { DeliveryOutcome::Dropped(DropReason::OutOfRange) };
            self.record(class, f.src, r, outcome);
            if f.dst.is_some() {
                self.link_result(f.src, r, ok)?;
            }
            if ok {
                self.metrics.energy[r].rx_s += air;
                self.deliver(r, f.src, f.msg.clone())?;
            }
        }
        Ok(())
    }

    fn seed_events(&mut self) -> Result<(), NetworkError> {
        let n = self.nodes.len();
        for i in 0..n {
            self.dispatch(i, |node, ctx| node.boot(ctx))?;
        }
        if let Some(d) = self.cfg.data {
            for i in 1..n {
                let at = rand::Rng::gen_range(&mut self.rng.jitter, 0.0..d.interval);
                self.schedule(at, EventKind::DataGeneration { node: i })?;
            }
        }
        if let Some(rwp) = self.cfg.mobility {
            for i in 1..n {
                self.moving[i] = Some(rwp.initial_state(&mut self.rng.mobility));
                self.schedule(self.cfg.mobility_step, EventKind::MobilityStep { node: i })?;
            }
        }
        for a in self.cfg.attackers.clone() {
            self.schedule(self.cfg.attack.attack_start, EventKind::AttackReplay { node: a })?;
        }
        Ok(())
    }

    fn handle(&mut self, kind: EventKind) -> Result<(), NetworkError> {
        let now = self.queue.now();
        match kind {
            EventKind::MessageDelivery { tx } => match self.cfg.link {
                LinkModel::Csma => self.on_air_done(tx),
                LinkModel::Ideal { .. } => self.ideal_done(tx),
            },
            EventKind::MacAttempt { node } => self.mac_attempt(node),
            EventKind::TrickleFire { node } => {
                self.timers[node][Timer::Trickle.index()] = None;
                self.dispatch(node, |n, ctx| n.on_trickle(ctx))
            }
            EventKind::DaoTimer { node } => {
                self.timers[node][Timer::DaoAck.index()] = None;
                self.dispatch(node, |n, ctx| n.on_dao_timer(ctx))
            }
            EventKind::DisTimer { node } => {
                self.timers[node][Timer::Dis.index()] = None;
                self.dispatch(node, |n, ctx| n.on_dis_timer(ctx))
            }
            EventKind::DataGeneration { node } => {
                let id = self.next_data_id;
                self.next_data_id += 1;
                self.dispatch(node, |n, ctx| n.generate_data(ctx, id))?;
                let every = self.cfg.data.map_or(f64::INFINITY, |d| d.interval);
                if every.is_finite() {
                    self.schedule(now + every, EventKind::DataGeneration { node })?;
                }
                Ok(())
            }
            EventKind::MobilityStep { node } => {
                if let (Some(rwp), Some(st)) = (self.cfg.mobility, self.moving[node].as_mut()) {
                    let dt = self.cfg.mobility_step;
                    self.positions[node] = rwp.step(self.positions[node], st, dt, &mut self.rng.mobility);
                    self.schedule(now + dt, EventKind::MobilityStep { node })?;
                }
                Ok(())
            }
            EventKind::AttackReplay { node } => {
                self.log(|| format!("replay {node}"));
                self.dispatch(node, |n, ctx| {
                    n.on_replay(ctx);
                })?;
                self.schedule(now + self.cfg.attack.replay_interval, EventKind::AttackReplay { node })?;
                Ok(())
            }
        }
    }

    /// Frames still queued or on the air when the run ends.
    fn flush(&mut self) {
        let mut left: Vec<Frame> = Vec::new();
        for q in &mut self.mac {
            left.extend(q.frames.drain(..));
        }
        let mut tx: Vec<TxId> = self.in_flight.keys().copied().collect();
        tx.sort_unstable();
        for t in tx {
            left.push(self.in_flight.remove(&t).expect("key exists"));
        }
        left.extend(self.ideal.iter_mut().filter_map(Option::take));
        for f in &left {
            self.drop_before_air(f, DropReason::RunEnded);
        }
    }

    /// Processes every event strictly before `t_end`.
    pub fn run_until(mut self, t_end: f64) -> Result<RunOutput, NetworkError> {
        self.seed_events()?;
        while let Some(t) = self.queue.peek_time() {
            if t >= t_end {
                break;
            }
            let ev = self.queue.pop().expect("peeked");
            self.metrics.events += 1;
            self.handle(ev.kind)?;
        }
        self.flush();
        self.metrics.duration = t_end;
        self.metrics.close_energy();
        Ok(RunOutput { metrics: self.metrics, trace: self.trace, nodes: self.nodes, positions: self.positions })
    }

    pub fn run(self) -> Result<RunOutput, NetworkError> {
        let end = self.cfg.duration;
        self.run_until(end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{pdr, plr};
    use crate::sim::rng::{stream, Stream};
    use crate::sim::topology::generate;

    fn random_cfg(seed: u64) -> NetworkConfig {
        let topo = generate(20, 4, 150.0, 50.0, &mut stream(seed, Stream::Topology)).unwrap();
        NetworkConfig::new(topo.positions, seed)
    }

    #[test]
    fn single_client_generates_thirty_packets() {
        let mut cfg = NetworkConfig::new(vec![Position::new(75.0, 75.0), Position::new(100.0, 75.0)], 3);
        cfg.duration = 1800.0;
        let out = World::new(cfg).unwrap().run().unwrap();
        assert_eq!(out.metrics.data_sent, 1800 / 60);
    }

    #[test]
    fn lone_root_runs_to_completion() {
        let mut cfg = NetworkConfig::new(vec![Position::new(75.0, 75.0)], 1);
        cfg.data = None;
        let out = World::new(cfg).unwrap().run().unwrap();
        assert_eq!(out.metrics.data_sent, 0);
        assert_eq!(out.metrics.delays.len(), 0);
    }

    #[test]
    fn attack_free_network_delivers() {
        let out = World::new(random_cfg(1)).unwrap().run().unwrap();
        let m = &out.metrics;
        let p = pdr(m).unwrap();
        assert!(p > 0.9, "pdr {p}");
        assert!((p + plr(m).unwrap() - 1.0).abs() < 1e-12);
        assert!(m.tallies.iter().all(|t| t.balanced()));
        assert!(m.block_events.is_empty());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let mut cfg = random_cfg(4);
        cfg.trace = true;
        cfg.attackers = vec![3, 7];
        let a = World::new(cfg.clone()).unwrap().run().unwrap();
        let b = World::new(cfg).unwrap().run().unwrap();
        assert_eq!(a.metrics, b.metrics);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn root_cannot_attack() {
        let mut cfg = random_cfg(1);
        cfg.attackers = vec![ROOT];
        assert!(matches!(World::new(cfg), Err(NetworkError::Attack { .. })));
    }
}
