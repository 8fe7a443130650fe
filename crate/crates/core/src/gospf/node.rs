use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use log::{debug, warn};

use super::matrix::SwitchedOffMatrix;
use super::message::{ControlMessage, EventKind, Payload, ProtocolEvent, Transmission};
use crate::energy::{InterfaceState, LoadClass, OperState, Thresholds, TreeRole, UtilizationSample};
use crate::graph::{
    bfs_hops, link_distance, shortest_paths, spanning_forest, ActiveLinkSet, RoutingTable,
    SpanningTree, Topology,
};
use crate::types::{LinkId, NodeId, SimTime};

/// Per-node protocol parameters. Every node of a simulation shares one copy.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub thresholds: Thresholds,
    pub safeguard_interval: SimTime,
    pub mcst_reset_timer: SimTime,
    pub reference_bandwidth: u64,
    /// When false the node behaves as plain OSPF: it never cuts or grafts and only
    /// advertises failures.
    pub green: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            thresholds: Thresholds::default(),
            safeguard_interval: SimTime::from_secs(2.0),
            mcst_reset_timer: SimTime::from_secs(5.0),
            reference_bandwidth: crate::graph::DEFAULT_REFERENCE_BANDWIDTH,
            green: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Timer {
    /// End of the reset hold-down started by a failure of the given link.
    ResetComplete(LinkId),
}

/// A local interface changed power state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub link: LinkId,
    pub from: OperState,
    pub to: OperState,
}

/// Everything a node wants the outside world to do after one call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Effects {
    pub transmissions: Vec<Transmission>,
    pub transitions: Vec<Transition>,
    pub events: Vec<ProtocolEvent>,
    pub timers: Vec<(SimTime, Timer)>,
    /// Congested local links for which no sleeping link was left to restore.
    pub unresolved: Vec<LinkId>,
    /// Set when a received message was a duplicate and got dropped.
    pub duplicate: bool,
    /// Set when a received message passed duplicate suppression and was handled.
    pub accepted: bool,
}

impl Effects {
    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
            && self.transitions.is_empty()
            && self.events.is_empty()
            && self.timers.is_empty()
            && self.unresolved.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interface {
    pub link: LinkId,
    pub peer: NodeId,
    pub state: InterfaceState,
    /// Physically down. A failed interface draws sleep power and never wakes.
    pub failed: bool,
    reported: bool,
}

#[derive(Debug, Clone)]
pub struct GospfNode {
    id: NodeId,
    topology: Arc<Topology>,
    config: ProtocolConfig,
    mcst: SpanningTree,
    interfaces: BTreeMap<LinkId, Interface>,
    asleep: BTreeSet<LinkId>,
    failed: BTreeSet<LinkId>,
    hops: BTreeMap<NodeId, u32>,
    matrix: SwitchedOffMatrix,
    safeguard: BTreeMap<LinkId, SimTime>,
    seen: BTreeSet<(NodeId, u64)>,
    next_seq: u64,
    escalation: Option<u32>,
    reset_until: Option<SimTime>,
    handled_resets: BTreeSet<LinkId>,
    routing: Option<RoutingTable>,
}

impl GospfNode {
    /// Builds a node with every interface awake and the spanning tree of the full topology.
    pub fn new(id: NodeId, topology: Arc<Topology>, config: ProtocolConfig) -> GospfNode {
        let mcst = spanning_forest(&topology, &ActiveLinkSet::all(&topology));
        let interfaces = topology
            .neighbors(id)
            .iter()
            .map(|&(peer, link)| {
                let role = if mcst.contains(link) {
                    TreeRole::McstTree
                } else {
                    TreeRole::McstUncut
                };
                (
                    link,
                    Interface {
                        link,
                        peer,
                        state: InterfaceState {
                            oper: OperState::Idle,
                            role,
                        },
                        failed: false,
                        reported: false,
                    },
                )
            })
            .collect();
        let hops = bfs_hops(&topology, id, |_| true);
        GospfNode {
            id,
            topology,
            config,
            mcst,
            interfaces,
            asleep: BTreeSet::new(),
            failed: BTreeSet::new(),
            hops,
            matrix: SwitchedOffMatrix::default(),
            safeguard: BTreeMap::new(),
            seen: BTreeSet::new(),
            next_seq: 0,
            escalation: None,
            reset_until: None,
            handled_resets: BTreeSet::new(),
            routing: None,
        }
    }

    pub fn id(&self) -> NodeId {
        self.id
    }

    pub fn mcst(&self) -> &SpanningTree {
        &self.mcst
    }

    pub fn matrix(&self) -> &SwitchedOffMatrix {
        &self.matrix
    }

    pub fn interfaces(&self) -> impl Iterator<Item = &Interface> {
        self.interfaces.values()
    }

    pub fn interface(&self, link: LinkId) -> Option<&Interface> {
        self.interfaces.get(&link)
    }

    pub fn safeguard_expiry(&self, link: LinkId) -> Option<SimTime> {
        self.safeguard.get(&link).copied()
    }

    pub fn is_resetting(&self) -> bool {
        self.reset_until.is_some()
    }

    /// Row of the switched-off matrix used last in the current congestion episode.
    pub fn escalation_row(&self) -> Option<u32> {
        self.escalation
    }

    /// Links this node believes are usable: not cut and not failed.
    pub fn view(&self) -> ActiveLinkSet {
        self.topology
            .link_ids()
            .filter(|l| !self.asleep.contains(l) && !self.failed.contains(l))
            .collect()
    }

    /// The routing table if it is up to date with the current view.
    pub fn cached_routing_table(&self) -> Option<&RoutingTable> {
        self.routing.as_ref()
    }

    /// Routing table over [`GospfNode::view`], recomputed lazily after view changes.
    pub fn routing_table(&mut self) -> &RoutingTable {
        if self.routing.is_none() {
            let view = self.view();
            self.routing = Some(shortest_paths(
                &self.topology,
                &view,
                self.id,
                self.config.reference_bandwidth,
            ));
        }
        self.routing.as_ref().unwrap()
    }

    fn next_message(&mut self, now: SimTime, payload: Payload) -> ControlMessage {
        self.next_seq += 1;
        let msg = ControlMessage {
            origin: self.id,
            seq: self.next_seq,
            sent: now,
            payload,
        };
        self.seen.insert(msg.id());
        msg
    }

    fn event(&self, fx: &mut Effects, now: SimTime, kind: EventKind, link: LinkId, seq: u64) {
        fx.events.push(ProtocolEvent {
            time: now,
            node: self.id,
            kind,
            link,
            seq,
        });
    }

    fn row_of(&self, link: LinkId) -> u32 {
        self.topology
            .link(link)
            .map_or(u32::MAX, |l| link_distance(&self.hops, l))
    }

    fn refresh_hops(&mut self) {
        let failed = &self.failed;
        self.hops = bfs_hops(&self.topology, self.id, |l| !failed.contains(&l));
        let filed: Vec<LinkId> = self.matrix.rows().flat_map(|(_, s)| s.iter().copied()).collect();
        for l in filed {
            let row = self.row_of(l);
            self.matrix.insert(l, row);
        }
    }

    fn set_oper(&mut self, fx: &mut Effects, link: LinkId, to: OperState) {
        let iface = self.interfaces.get_mut(&link).expect("local interface");
        let from = iface.state.oper;
        if from.is_awake() != to.is_awake() {
            fx.transitions.push(Transition { link, from, to });
        }
        iface.state.oper = to;
    }

    /// Transmissions of `msg` on every awake local interface except `arrival`.
    pub fn flood(&self, msg: &ControlMessage, arrival: Option<LinkId>) -> Vec<Transmission> {
        self.interfaces
            .values()
            .filter(|i| Some(i.link) != arrival && !i.failed && i.state.oper.is_awake())
            .map(|i| Transmission {
                link: i.link,
                to: i.peer,
                msg: msg.clone(),
            })
            .collect()
    }

    fn flood_into(&self, fx: &mut Effects, now: SimTime, msg: &ControlMessage, arrival: Option<LinkId>) {
        let copies = self.flood(msg, arrival);
        if !copies.is_empty() {
            for &l in msg.payload.links() {
                self.event(fx, now, EventKind::Flood, l, msg.seq);
            }
        }
        fx.transmissions.extend(copies);
    }

    /// Marks a local interface as physically down and runs the tree integrity check: a failed
    /// tree link starts a reset, any other failure is advertised with an LSA.
    pub fn interface_down(&mut self, now: SimTime, link: LinkId) -> Effects {
        let mut fx = Effects::default();
        if self.interfaces.contains_key(&link) {
            self.set_oper(&mut fx, link, OperState::Sleep);
            self.interfaces.get_mut(&link).unwrap().failed = true;
            self.check_integrity(now, &mut fx);
        }
        fx
    }

    /// Periodic check of the local interfaces against the previous window's samples.
    pub fn sample_tick(
        &mut self,
        now: SimTime,
        samples: &BTreeMap<LinkId, UtilizationSample>,
    ) -> Effects {
        let mut fx = Effects::default();
        self.check_integrity(now, &mut fx);
        if !self.config.green || self.reset_until.is_some() {
            return fx;
        }

        let mut over: Option<(f64, LinkId)> = None;
        let mut under = Vec::new();
        for iface in self.interfaces.values() {
            if iface.failed || !iface.state.oper.is_awake() {
                continue;
            }
            let u = samples
                .get(&iface.link)
                .and_then(|s| s.rate().ok())
                .unwrap_or(0.0);
            match self.config.thresholds.classify(u) {
                LoadClass::Overutilized => {
                    if over.map_or(true, |(best, _)| u > best) {
                        over = Some((u, iface.link));
                    }
                }
                LoadClass::Underutilized => under.push(iface.link),
                LoadClass::Normal => {}
            }
        }
        for iface in self.interfaces.values_mut() {
            if iface.state.oper.is_awake() && !iface.failed {
                let busy = samples.get(&iface.link).is_some_and(|s| s.bits > 0.0);
                iface.state.oper = if busy { OperState::Active } else { OperState::Idle };
            }
        }

        if let Some((_, congested)) = over {
            let more = self.graft_step(now, congested);
            merge(&mut fx, more);
            return fx;
        }
        self.escalation = None;
        for link in under {
            let guarded = self.safeguard.get(&link).is_some_and(|&t| now < t);
            if !self.mcst.contains(link) && !guarded {
                self.cut(now, link, &mut fx);
            }
        }
        fx
    }

    fn cut(&mut self, now: SimTime, link: LinkId, fx: &mut Effects) {
        self.set_oper(fx, link, OperState::Sleep);
        self.interfaces.get_mut(&link).unwrap().state.role = TreeRole::McstCut;
        self.asleep.insert(link);
        self.safeguard.remove(&link);
        self.matrix.insert(link, self.row_of(link));
        self.routing = None;
        let msg = self.next_message(now, Payload::Cut(link));
        debug!("node {} cuts link {}", self.id, link);
        self.event(fx, now, EventKind::Cut, link, msg.seq);
        self.event(fx, now, EventKind::Sleep, link, msg.seq);
        self.flood_into(fx, now, &msg, None);
    }

    /// Restores the next non-empty row of the switched-off matrix on behalf of the congested
    /// local interface `congested`.
    pub fn graft_step(&mut self, now: SimTime, congested: LinkId) -> Effects {
        let mut fx = Effects::default();
        let start = self.escalation.map_or(0, |r| r.saturating_add(1));
        let Some(row) = self.matrix.first_non_empty_from(start) else {
            debug!("node {} cannot relieve link {}", self.id, congested);
            self.event(&mut fx, now, EventKind::CongestionUnresolved, congested, self.next_seq);
            fx.unresolved.push(congested);
            self.escalation = None;
            return fx;
        };
        let links: Vec<LinkId> = self.matrix.row(row).collect();
        self.escalation = Some(row);
        let msg = self.next_message(now, Payload::Graft(links.clone()));
        for &l in &links {
            self.event(&mut fx, now, EventKind::Graft, l, msg.seq);
        }
        self.restore(now, now, &links, msg.seq, &mut fx);
        self.flood_into(&mut fx, now, &msg, None);
        fx
    }

    /// Wakes `links` under a safeguard that runs from the graft's origination, so every node
    /// lifts it at the same instant.
    fn restore(&mut self, now: SimTime, sent: SimTime, links: &[LinkId], seq: u64, fx: &mut Effects) {
        let expiry = sent + self.config.safeguard_interval;
        for &l in links {
            if self.failed.contains(&l) {
                continue;
            }
            self.asleep.remove(&l);
            self.matrix.remove(l);
            self.safeguard.insert(l, expiry);
            if let Some(iface) = self.interfaces.get(&l) {
                if !iface.failed && !iface.state.oper.is_awake() {
                    self.set_oper(fx, l, OperState::Idle);
                    self.interfaces.get_mut(&l).unwrap().state.role = TreeRole::McstGraft;
                    self.event(fx, now, EventKind::Wake, l, seq);
                }
            }
        }
        self.routing = None;
    }

    /// Handles one received copy of a flooded message.
    pub fn receive(&mut self, now: SimTime, arrival: Option<LinkId>, msg: &ControlMessage) -> Effects {
        if let Some(l) = arrival {
            if self.interfaces.get(&l).is_some_and(|i| i.failed || !i.state.oper.is_awake()) {
                // copy reached an interface that went down while it was in flight
                return Effects::default();
            }
        }
        if !self.seen.insert(msg.id()) {
            return Effects {
                duplicate: true,
                ..Effects::default()
            };
        }
        for &l in msg.payload.links() {
            if self.topology.link(l).is_none() {
                warn!("node {} drops message {:?}: unknown link {}", self.id, msg.id(), l);
                return Effects::default();
            }
        }
        let mut fx = match &msg.payload {
            Payload::Cut(l) => self.handle_lscup(now, arrival, msg, *l),
            Payload::Graft(ls) => self.handle_lsgup(now, arrival, msg, ls),
            Payload::LinkDown(l) => self.handle_lsa(now, arrival, msg, *l),
            Payload::Reset(l) => self.handle_reset(now, arrival, msg, *l),
        };
        fx.accepted = true;
        fx
    }

    fn handle_lscup(
        &mut self,
        now: SimTime,
        arrival: Option<LinkId>,
        msg: &ControlMessage,
        link: LinkId,
    ) -> Effects {
        let mut fx = Effects::default();
        if !self.config.green {
            self.flood_into(&mut fx, now, msg, arrival);
            return fx;
        }
        let guarded = self.safeguard.get(&link).is_some_and(|&t| now < t);
        if self.mcst.contains(link) {
            warn!("node {} refuses cut of tree link {}", self.id, link);
        } else if guarded {
            // a graft of this link was processed first; the graft wins
            debug!("node {} ignores cut of safeguarded link {}", self.id, link);
        } else if !self.failed.contains(&link) {
            if let Some(iface) = self.interfaces.get(&link) {
                if !iface.failed && iface.state.oper.is_awake() {
                    self.set_oper(&mut fx, link, OperState::Sleep);
                    self.event(&mut fx, now, EventKind::Sleep, link, msg.seq);
                }
                self.interfaces.get_mut(&link).unwrap().state.role = TreeRole::McstCut;
            }
            self.asleep.insert(link);
            self.safeguard.remove(&link);
            self.matrix.insert(link, self.row_of(link));
            self.routing = None;
        }
        self.flood_into(&mut fx, now, msg, arrival);
        fx
    }

    fn handle_lsgup(
        &mut self,
        now: SimTime,
        arrival: Option<LinkId>,
        msg: &ControlMessage,
        links: &[LinkId],
    ) -> Effects {
        let mut fx = Effects::default();
        self.restore(now, msg.sent, links, msg.seq, &mut fx);
        self.flood_into(&mut fx, now, msg, arrival);
        fx
    }

    fn handle_lsa(
        &mut self,
        now: SimTime,
        arrival: Option<LinkId>,
        msg: &ControlMessage,
        link: LinkId,
    ) -> Effects {
        let mut fx = Effects::default();
        self.forget_failed(link);
        self.flood_into(&mut fx, now, msg, arrival);
        fx
    }

    fn forget_failed(&mut self, link: LinkId) {
        if self.failed.insert(link) {
            self.asleep.remove(&link);
            self.matrix.remove(link);
            self.safeguard.remove(&link);
            self.refresh_hops();
            self.routing = None;
        }
    }

    fn handle_reset(
        &mut self,
        now: SimTime,
        arrival: Option<LinkId>,
        msg: &ControlMessage,
        link: LinkId,
    ) -> Effects {
        let mut fx = Effects::default();
        self.enter_reset(now, link, msg.seq, &mut fx);
        self.flood_into(&mut fx, now, msg, arrival);
        fx
    }

    fn enter_reset(&mut self, now: SimTime, link: LinkId, seq: u64, fx: &mut Effects) {
        if !self.handled_resets.insert(link) {
            return;
        }
        self.forget_failed(link);
        self.event(fx, now, EventKind::Reset, link, seq);
        let sleeping: Vec<LinkId> = self
            .interfaces
            .values()
            .filter(|i| !i.failed && !i.state.oper.is_awake())
            .map(|i| i.link)
            .collect();
        for l in sleeping {
            self.set_oper(fx, l, OperState::Idle);
            self.event(fx, now, EventKind::Wake, l, seq);
        }
        for iface in self.interfaces.values_mut() {
            if !iface.failed && iface.state.role != TreeRole::McstTree {
                iface.state.role = TreeRole::McstUncut;
            }
        }
        self.asleep.clear();
        self.matrix.clear();
        self.safeguard.clear();
        self.escalation = None;
        self.routing = None;
        let until = now + self.config.mcst_reset_timer;
        self.reset_until = Some(until);
        fx.timers.push((until, Timer::ResetComplete(link)));
    }

    fn check_integrity(&mut self, now: SimTime, fx: &mut Effects) {
        let fresh: Vec<LinkId> = self
            .interfaces
            .values()
            .filter(|i| i.failed && !i.reported)
            .map(|i| i.link)
            .collect();
        for link in fresh {
            self.interfaces.get_mut(&link).unwrap().reported = true;
            if self.config.green && self.mcst.contains(link) {
                if self.handled_resets.contains(&link) {
                    continue;
                }
                let msg = self.next_message(now, Payload::Reset(link));
                self.enter_reset(now, link, msg.seq, fx);
                self.flood_into(fx, now, &msg, None);
            } else if !self.failed.contains(&link) {
                self.forget_failed(link);
                let msg = self.next_message(now, Payload::LinkDown(link));
                self.flood_into(fx, now, &msg, None);
            }
        }
    }

    /// Fires a timer previously returned in [`Effects::timers`].
    pub fn on_timer(&mut self, now: SimTime, timer: Timer) -> Effects {
        let mut fx = Effects::default();
        let Timer::ResetComplete(_) = timer;
        match self.reset_until {
            Some(until) if now >= until => {}
            _ => return fx,
        }
        self.reset_until = None;
        let surviving: ActiveLinkSet = self
            .topology
            .link_ids()
            .filter(|l| !self.failed.contains(l))
            .collect();
        self.mcst = spanning_forest(&self.topology, &surviving);
        let mcst = &self.mcst;
        for iface in self.interfaces.values_mut() {
            if iface.failed {
                continue;
            }
            if mcst.contains(iface.link) {
                iface.state.role = TreeRole::McstTree;
            } else if iface.state.role == TreeRole::McstTree {
                iface.state.role = TreeRole::McstUncut;
            }
        }
        // a node that resumed earlier may have cut a link that belongs to the new tree
        let stale: Vec<LinkId> = self
            .asleep
            .iter()
            .copied()
            .filter(|l| self.mcst.contains(*l))
            .collect();
        if !stale.is_empty() {
            let msg = self.next_message(now, Payload::Graft(stale.clone()));
            self.restore(now, now, &stale, msg.seq, &mut fx);
            for &l in &stale {
                if let Some(iface) = self.interfaces.get_mut(&l) {
                    iface.state.role = TreeRole::McstTree;
                }
                self.event(&mut fx, now, EventKind::Graft, l, msg.seq);
            }
            self.flood_into(&mut fx, now, &msg, None);
        }
        self.routing = None;
        fx
    }
}

fn merge(into: &mut Effects, from: Effects) {
    into.transmissions.extend(from.transmissions);
    into.transitions.extend(from.transitions);
    into.events.extend(from.events);
    into.timers.extend(from.timers);
    into.unresolved.extend(from.unresolved);
}
