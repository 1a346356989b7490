//! Per-node RPL state machine.
//!
//! Handlers never touch the radio or the clock directly. They push
//! [`Action`]s into the context and the network applies them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::adversary::Attacker;
use crate::defense::{DaoVerdict, Defense, DefenseConfig, DefenseMode};
use crate::metrics::{BlockEvent, RunMetrics};
use crate::rpl::address::{LinkLocal, NodeAddress};
use crate::rpl::message::{Dao, DaoAck, Data, Dio, Message, Mop};
use crate::rpl::parent::{ParentSet, Selection};
use crate::rpl::rank::{Mrhof, Rank};
use crate::rpl::route::RouteTable;
use crate::rpl::trickle::{Trickle, TrickleParams};
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Timer {
    Trickle,
    /// DAO-ACK wait for the node's own DAO.
    DaoAck,
    Dis,
}

impl Timer {
    pub const ALL: [Timer; 3] = [Timer::Trickle, Timer::DaoAck, Timer::Dis];

    pub fn index(&self) -> usize {
        *self as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    /// `None` destination broadcasts.
    Send { dst: Option<NodeId>, msg: Message },
    SetTimer { timer: Timer, after: f64 },
    ClearTimer(Timer),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DaoReason {
    Join,
    DioRefresh,
    ParentChange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConfig {
    pub mop: Mop,
    pub trickle: TrickleParams,
    pub mrhof: Mrhof,
    pub defense: DefenseConfig,
    /// When false no DIOs are emitted; parents must be preset.
    pub dio_enabled: bool,
    pub dao_ack_timeout: f64,
    pub dao_retries: u8,
    /// Minimum spacing of DIO-triggered DAO refreshes.
    pub dao_refresh_holdoff: f64,
    pub dis_interval: f64,
    pub hop_limit: u8,
    pub route_capacity: usize,
    /// Learn link ETX from link-layer acknowledgements.
    pub track_etx: bool,
    pub version: u8,
    pub instance: u8,
}

impl Default for NodeConfig {
    fn default() -> Self {
        Self {
            mop: Mop::Storing,
            trickle: TrickleParams::default(),
            mrhof: Mrhof::default(),
            defense: DefenseConfig::default(),
            dio_enabled: true,
            dao_ack_timeout: 4.0,
            dao_retries: 2,
            dao_refresh_holdoff: 300.0,
            dis_interval: 10.0,
            hop_limit: 16,
            route_capacity: 32,
            track_etx: false,
            version: 0,
            instance: 0,
        }
    }
}

pub struct Ctx<'a> {
    pub now: f64,
    pub cfg: &'a NodeConfig,
    pub rng: &'a mut ChaCha8Rng,
    pub out: &'a mut Vec<Action>,
    pub m: &'a mut RunMetrics,
}

impl Ctx<'_> {
    fn send(&mut self, dst: Option<NodeId>, msg: Message) {
        self.out.push(Action::Send { dst, msg });
    }

    fn timer(&mut self, timer: Timer, after: f64) {
        self.out.push(Action::SetTimer { timer, after });
    }

    fn clear(&mut self, timer: Timer) {
        self.out.push(Action::ClearTimer(timer));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PendingDao {
    pub dao: Dao,
    pub retries_left: u8,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub addr: NodeAddress,
    pub is_root: bool,
    pub rank: Rank,
    pub parents: ParentSet,
    pub trickle: Trickle,
    pub routes: RouteTable,
    pub defense: Defense,
    pub dao_sequence: u8,
    pub pending: Option<PendingDao>,
    pub last_dao_sent: Option<f64>,
    pub attacker: Option<Attacker>,
}

impl Node {
    pub fn new(id: NodeId, is_root: bool, cfg: &NodeConfig) -> Self {
        Self {
            addr: NodeAddress::new(id),
            is_root,
            rank: if is_root { Rank::ROOT } else { Rank::INFINITE },
            parents: ParentSet::default(),
            trickle: Trickle::new(cfg.trickle),
            routes: RouteTable::new(cfg.route_capacity),
            defense: Defense::new(&cfg.defense),
            dao_sequence: 0,
            pending: None,
            last_dao_sent: None,
            attacker: None,
        }
    }

    pub fn id(&self) -> NodeId {
        self.addr.node_id
    }

    pub fn joined(&self) -> bool {
        self.is_root || self.parents.preferred.is_some()
    }

    pub fn preferred(&self) -> Option<NodeId> {
        self.parents.preferred
    }

    pub fn boot(&mut self, ctx: &mut Ctx) {
        if self.is_root {
            if ctx.cfg.dio_enabled {
                let d = self.trickle.start(ctx.now, ctx.rng);
                ctx.timer(Timer::Trickle, d);
            }
        } else if self.joined() {
            if ctx.cfg.dio_enabled {
                let d = self.trickle.start(ctx.now, ctx.rng);
                ctx.timer(Timer::Trickle, d);
            }
            self.send_dao(ctx, DaoReason::Join);
        } else {
            let d = ctx.rng.gen_range(0.5 * ctx.cfg.dis_interval..ctx.cfg.dis_interval);
            ctx.timer(Timer::Dis, d);
        }
    }

    /// Installs `parent` as preferred parent without any DIO exchange.
    pub fn preset_parent(&mut self, parent: NodeId, parent_rank: Rank, cfg: &NodeConfig) {
        self.parents.upsert(parent, parent_rank);
        self.parents.select(&cfg.mrhof);
        self.rank = self.parents.own_rank(&cfg.mrhof);
    }

    pub fn on_message(&mut self, ctx: &mut Ctx, from: NodeId, msg: Message) {
        match msg {
            Message::Dis => self.on_dis(ctx),
            Message::Dio(dio) => self.on_dio(ctx, from, dio),
            Message::Dao(dao) => self.on_dao(ctx, from, dao),
            Message::DaoAck(ack) => self.on_dao_ack(ctx, ack),
            Message::Data(d) => self.on_data(ctx, d),
        }
    }

    fn on_dis(&mut self, ctx: &mut Ctx) {
        if self.joined() && ctx.cfg.dio_enabled {
            if let Some(d) = self.trickle.reset(ctx.now, ctx.rng) {
                ctx.timer(Timer::Trickle, d);
            }
        }
    }

    fn on_dio(&mut self, ctx: &mut Ctx, from: NodeId, dio: Dio) {
        if self.is_root {
            self.trickle.hear_consistent(ctx.now);
            return;
        }
        if dio.rank.is_infinite() {
            if self.parents.candidates.contains_key(&from) {
                self.parents.remove(from);
                let sel = self.parents.select(&ctx.cfg.mrhof);
                self.after_selection(ctx, sel);
            }
            return;
        }
        let from_preferred = self.parents.preferred == Some(from);
        if !from_preferred && self.joined() && dio.rank >= self.rank {
            // would not lower our rank: never a parent candidate
            self.parents.remove(from);
            self.trickle.hear_consistent(ctx.now);
            return;
        }
        self.parents.upsert(from, dio.rank);
        let before = self.rank;
        let sel = self.parents.select(&ctx.cfg.mrhof);
        let consistent = sel == Selection::Unchanged && self.parents.own_rank(&ctx.cfg.mrhof) == before;
        self.after_selection(ctx, sel);
        if consistent {
            self.trickle.hear_consistent(ctx.now);
            if from_preferred {
                self.send_dao(ctx, DaoReason::DioRefresh);
            }
        }
    }

    fn after_selection(&mut self, ctx: &mut Ctx, sel: Selection) {
        let new_rank = self.parents.own_rank(&ctx.cfg.mrhof);
        match sel {
            Selection::Switched { from, .. } => {
                self.rank = new_rank;
                if from.is_none() {
                    ctx.clear(Timer::Dis);
                    if ctx.cfg.dio_enabled {
                        let d = self.trickle.start(ctx.now, ctx.rng);
                        ctx.timer(Timer::Trickle, d);
                    }
                    self.send_dao(ctx, DaoReason::Join);
                } else {
                    ctx.m.parent_changes += 1;
                    self.reset_trickle(ctx);
                    self.send_dao(ctx, DaoReason::ParentChange);
                }
            }
            Selection::Lost => self.detach(ctx),
            Selection::Unchanged => {
                if self.joined() && new_rank != self.rank {
                    self.rank = new_rank;
                    self.reset_trickle(ctx);
                }
            }
        }
    }

    fn reset_trickle(&mut self, ctx: &mut Ctx) {
        if ctx.cfg.dio_enabled {
            if let Some(d) = self.trickle.reset(ctx.now, ctx.rng) {
                ctx.timer(Timer::Trickle, d);
            }
        }
    }

    /// Lost every parent: poison the subtree and start soliciting.
    fn detach(&mut self, ctx: &mut Ctx) {
        self.rank = Rank::INFINITE;
        self.parents.preferred = None;
        self.pending = None;
        ctx.clear(Timer::DaoAck);
        if ctx.cfg.dio_enabled {
            self.trickle.stop();
            ctx.clear(Timer::Trickle);
            let dio = Dio { rank: Rank::INFINITE, version: ctx.cfg.version, instance: ctx.cfg.instance };
            ctx.send(None, Message::Dio(dio));
        }
        ctx.send(None, Message::Dis);
        ctx.timer(Timer::Dis, ctx.cfg.dis_interval);
    }

    pub fn on_trickle(&mut self, ctx: &mut Ctx) {
        if !self.joined() || !self.trickle.running {
            return;
        }
        let (transmit, next) = self.trickle.fire(ctx.now, ctx.rng);
        if transmit {
            let dio = Dio { rank: self.rank, version: ctx.cfg.version, instance: ctx.cfg.instance };
            ctx.send(None, Message::Dio(dio));
            self.defense.on_dio_sent();
        } else {
            ctx.m.dio_suppressed += 1;
        }
        ctx.timer(Timer::Trickle, next);
    }

    pub fn on_dis_timer(&mut self, ctx: &mut Ctx) {
        if !self.joined() {
            ctx.send(None, Message::Dis);
            ctx.timer(Timer::Dis, ctx.cfg.dis_interval);
        }
    }

    pub fn send_dao(&mut self, ctx: &mut Ctx, reason: DaoReason) {
        if self.is_root || !ctx.cfg.mop.daos_enabled() {
            return;
        }
        let Some(parent) = self.parents.preferred else { return };
        if reason == DaoReason::DioRefresh {
            if let Some(t) = self.last_dao_sent {
                if ctx.now - t < ctx.cfg.dao_refresh_holdoff {
                    return;
                }
            }
        }
        self.dao_sequence = self.dao_sequence.wrapping_add(1);
        let dao = Dao { prefix: self.addr.global, sequence: self.dao_sequence, reverse_route_stack: Vec::new() };
        if let Some(a) = self.attacker.as_mut() {
            a.capture(&dao);
        }
        self.pending = Some(PendingDao { dao: dao.clone(), retries_left: ctx.cfg.dao_retries });
        self.last_dao_sent = Some(ctx.now);
        ctx.m.dao[self.id()].originated += 1;
        ctx.send(Some(parent), Message::Dao(dao));
        ctx.timer(Timer::DaoAck, ctx.cfg.dao_ack_timeout);
    }

    pub fn on_dao_timer(&mut self, ctx: &mut Ctx) {
        let Some(p) = self.pending.as_mut() else { return };
        let Some(parent) = self.parents.preferred else {
            self.pending = None;
            return;
        };
        if p.retries_left == 0 {
            self.pending = None;
            return;
        }
        p.retries_left -= 1;
        let dao = p.dao.clone();
        ctx.m.dao[self.addr.node_id].retransmitted += 1;
        ctx.send(Some(parent), Message::Dao(dao));
        ctx.timer(Timer::DaoAck, ctx.cfg.dao_ack_timeout);
    }

    fn on_dao(&mut self, ctx: &mut Ctx, from: NodeId, mut dao: Dao) {
        if !ctx.cfg.mop.daos_enabled() || !self.joined() {
            return;
        }
        let sender = LinkLocal::of(from);
        let decision = self.defense.on_dao(ctx.now, sender, dao.prefix);
        if ctx.cfg.defense.mode != DefenseMode::None {
            let legit = !ctx.m.is_attacker(from);
            let w = &mut ctx.m.defense;
            w.invocations += 1;
            w.comparisons += decision.comparisons as u64;
            w.max_comparisons = w.max_comparisons.max(decision.comparisons);
            if decision.comparisons > decision.bound {
                w.bound_violations += 1;
            }
            w.peak_table_bytes = w.peak_table_bytes.max(self.defense.table_bytes());
            if legit {
                w.legit_verdicts += 1;
            }
            match decision.verdict {
                DaoVerdict::Forward | DaoVerdict::ForwardUncounted => {}
                DaoVerdict::Discard | DaoVerdict::BlacklistAndDiscard => {
                    ctx.m.defense.discards += 1;
                    if legit {
                        ctx.m.defense.legit_refusals += 1;
                    }
                }
            }
            if decision.verdict == DaoVerdict::BlacklistAndDiscard {
                ctx.m.defense.blacklistings += 1;
                ctx.m.block_events.push(BlockEvent { time: ctx.now, parent: self.id(), target: from });
            }
        }
        if !decision.verdict.admits() {
            return;
        }

        if ctx.cfg.mop.storing() {
            self.routes.install(dao.prefix, sender, Vec::new(), dao.sequence, ctx.now);
            if !self.is_root {
                if let Some(parent) = self.parents.preferred {
                    let fresh = Dao { prefix: dao.prefix, sequence: dao.sequence, reverse_route_stack: Vec::new() };
                    ctx.m.dao[self.id()].aggregated += 1;
                    ctx.send(Some(parent), Message::Dao(fresh));
                }
            }
            let ack = DaoAck { acked_sequence: dao.sequence, target: dao.prefix, source_route: Vec::new() };
            ctx.m.dao[self.id()].acks_sent += 1;
            ctx.send(Some(from), Message::DaoAck(ack));
        } else if self.is_root {
            let mut hops: Vec<LinkLocal> = dao.reverse_route_stack.iter().rev().copied().collect();
            hops.push(LinkLocal(dao.prefix.iid));
            let first = hops.remove(0);
            self.routes.install(dao.prefix, first, hops.clone(), dao.sequence, ctx.now);
            let ack = DaoAck { acked_sequence: dao.sequence, target: dao.prefix, source_route: hops };
            ctx.m.dao[self.id()].acks_sent += 1;
            ctx.send(Some(first.node()), Message::DaoAck(ack));
        } else {
            let me = self.addr.link_local;
            if dao.reverse_route_stack.contains(&me) {
                return;
            }
            let Some(parent) = self.parents.preferred else { return };
            dao.reverse_route_stack.push(me);
            ctx.m.dao[self.id()].relayed += 1;
            ctx.send(Some(parent), Message::Dao(dao));
        }
    }

    fn on_dao_ack(&mut self, ctx: &mut Ctx, mut ack: DaoAck) {
        if ack.target == self.addr.global {
            if self.pending.as_ref().is_some_and(|p| p.dao.sequence == ack.acked_sequence) {
                self.pending = None;
                ctx.clear(Timer::DaoAck);
            }
            return;
        }
        if !ack.source_route.is_empty() {
            let next = ack.source_route.remove(0);
            ctx.send(Some(next.node()), Message::DaoAck(ack));
        }
    }

    pub fn generate_data(&mut self, ctx: &mut Ctx, id: u64) {
        ctx.m.data_generated(self.id());
        let Some(parent) = self.parents.preferred else {
            ctx.m.data_lost_at_source(self.id());
            return;
        };
        let d = Data { id, origin: self.id(), created: ctx.now, hops: 0 };
        ctx.send(Some(parent), Message::Data(d));
    }

    fn on_data(&mut self, ctx: &mut Ctx, mut d: Data) {
        if self.is_root {
            ctx.m.data_delivered(d.origin, ctx.now - d.created);
            return;
        }
        d.hops += 1;
        if d.hops >= ctx.cfg.hop_limit {
            return;
        }
        if let Some(parent) = self.parents.preferred {
            ctx.send(Some(parent), Message::Data(d));
        }
    }

    /// Link-layer acknowledgement outcome for a unicast to `dst`.
    pub fn on_link_result(&mut self, ctx: &mut Ctx, dst: NodeId, ok: bool) {
        if self.is_root {
            return;
        }
        let was_preferred = self.parents.preferred == Some(dst);
        let dropped = self.parents.link_result(dst, ok, ctx.cfg.track_etx);
        if was_preferred && (dropped || ctx.cfg.track_etx) {
            let sel = self.parents.select(&ctx.cfg.mrhof);
            self.after_selection(ctx, sel);
        }
    }

    /// Attack timer. Returns true if a replay was transmitted.
    pub fn on_replay(&mut self, ctx: &mut Ctx) -> bool {
        ctx.m.replays_attempted += 1;
        let Some(dao) = self.attacker.as_ref().and_then(|a| a.replay()) else { return false };
        let Some(parent) = self.parents.preferred else { return false };
        ctx.m.dao[self.id()].replays += 1;
        ctx.send(Some(parent), Message::Dao(dao));
        true
    }
}
