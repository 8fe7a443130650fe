//! Deterministic window-stepped simulation of a network of GOSPF nodes.
//!
//! Time advances in sample windows. At the start of every window but the first, each node checks
//! the previous window's utilization (ascending node id). Control messages, timers and link
//! failures are then processed in `(time, origin, sequence)` order up to the window end. Traffic
//! is routed on the resulting tables and allocated with the fluid model, and every interface
//! accrues energy for the part of the window it spent awake or asleep.

mod config;
mod metrics;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use log::warn;
use thiserror::Error;

pub use config::{parse_config, write_config, EngineConfig, LinkFailure, Mode, DAY_LENGTH};
pub use metrics::{
    compare, parse_comparison, parse_event_log, parse_metrics_csv, parse_summary, write_comparison,
    write_event_log, write_metrics_csv, write_summary, MetricsRow, MetricsSeries, SavingReport,
    Summary, METRICS_HEADER,
};

use crate::energy::{EnergyAccount, Thresholds, UtilizationSample};
use crate::gospf::{ControlMessage, Effects, GospfNode, ProtocolConfig, ProtocolEvent, Timer};
use crate::graph::{is_connected, write_topology, ActiveLinkSet, SpanningTree, Topology};
use crate::traffic::{
    allocate, route_flows, write_traffic, DirectedHop, Flow, FlowDemand, FlowId, TcpBurst,
    TrafficError, TrafficMatrix,
};
use crate::types::{fnv1a, CompensatedSum, LinkId, NodeId, SimTime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("runs are not comparable: {0}")]
    MismatchedScenarios(String),
}

/// Topology, traffic and settings of one run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub topology: Arc<Topology>,
    pub traffic: TrafficMatrix,
    pub config: EngineConfig,
}

impl Scenario {
    /// Validates the configuration against the topology and fixes the horizon.
    pub fn new(topology: Topology, flows: Vec<Flow>, config: EngineConfig) -> Result<Scenario, EngineError> {
        config.validate().map_err(EngineError::Config)?;
        for f in &config.failures {
            if topology.link(f.link).is_none() {
                return Err(EngineError::Config(format!("fail_link names unknown link {}", f.link)));
            }
        }
        let horizon = config.horizon.unwrap_or_else(|| {
            let last = flows
                .iter()
                .filter_map(|f| f.schedule.last().map(|s| s.0))
                .fold(0.0, f64::max);
            ((last / DAY_LENGTH).floor() + 1.0).max(1.0) * DAY_LENGTH
        });
        let traffic = TrafficMatrix::new(flows, horizon)?.with_tcp_burst(TcpBurst {
            fraction: config.tcp_burst_fraction,
            duration: config.t_sample,
        });
        traffic.validate_against(&topology)?;
        Ok(Scenario {
            topology: Arc::new(topology),
            traffic,
            config,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.traffic.horizon()
    }

    /// Stable hash of topology, traffic and horizon.
    pub fn fingerprint(&self) -> u64 {
        let mut text = write_topology(&self.topology);
        text.push_str(&write_traffic(self.traffic.flows()));
        text.push_str(&format!("horizon={}\n", self.horizon()));
        fnv1a(text.as_bytes())
    }

    pub fn with_mode(mut self, mode: Mode) -> Scenario {
        self.config.mode = mode;
        self
    }
}

/// Extra detail collected on request, mostly for tests and the gap analysis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub record_windows: bool,
    pub record_deliveries: bool,
}

/// State at the end of one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub index: usize,
    pub start: SimTime,
    pub end: SimTime,
    /// Links with at least one powered interface.
    pub active: ActiveLinkSet,
    /// Links with both interfaces powered, i.e. able to carry data.
    pub usable: ActiveLinkSet,
    pub failed: BTreeSet<LinkId>,
    /// Usable links connect every node the surviving physical links connect.
    pub connected: bool,
    /// Every node holds the same link view.
    pub views_agree: bool,
    /// Some node is inside a reset hold-down.
    pub resetting: bool,
    /// No protocol activity in this window or at the following check, nothing in flight, and no
    /// drops.
    pub quiesced: bool,
    pub unresolved: usize,
    pub demands: Vec<FlowDemand>,
    pub paths: BTreeMap<FlowId, Option<Vec<DirectedHop>>>,
    pub dropped_bits: f64,
}

/// A control message copy that reached a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub time: SimTime,
    pub node: NodeId,
    pub origin: NodeId,
    pub seq: u64,
    /// Passed duplicate suppression and was acted upon.
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: MetricsSeries,
    pub events: Vec<ProtocolEvent>,
    pub windows: Vec<WindowRecord>,
    pub deliveries: Vec<Delivery>,
    /// Per-interface energy accounts keyed by `(link, node)`.
    pub accounts: BTreeMap<(LinkId, NodeId), EnergyAccount>,
    /// Spanning tree each node holds at the end of the run.
    pub trees: BTreeMap<NodeId, SpanningTree>,
}

pub fn run(scenario: &Scenario) -> Result<RunOutput, EngineError> {
    run_with(scenario, RunOptions::default())
}

pub fn run_with(scenario: &Scenario, options: RunOptions) -> Result<RunOutput, EngineError> {
    let mut sim = Sim::new(scenario, options)?;
    let t = SimTime::from_secs(scenario.config.t_sample);
    let horizon = SimTime::from_secs(scenario.horizon());
    let windows = horizon.0.div_ceil(t.0) as usize;
    for k in 0..windows {
        let start = SimTime(t.0 * k as u64);
        let end = SimTime((t.0 * (k as u64 + 1)).min(horizon.0));
        sim.step(k, start, end)?;
    }
    Ok(sim.finish(scenario))
}

struct Track {
    account: EnergyAccount,
    awake: bool,
    since: SimTime,
    awake_ns: u64,
    asleep_ns: u64,
}

impl Track {
    fn advance(&mut self, now: SimTime) {
        let d = now.saturating_sub(self.since).0;
        if self.awake {
            self.awake_ns += d;
        } else {
            self.asleep_ns += d;
        }
        self.since = self.since.max(now);
    }
}

enum Pending {
    Failure(LinkId),
    Deliver { link: LinkId, to: NodeId, msg: ControlMessage },
    Timer { node: NodeId, timer: Timer },
}

/// `(time, class, origin or node, sequence, destination, insertion counter)`.
type QueueKey = (SimTime, u8, u32, u64, u32, u64);

struct Sim<'a> {
    topology: &'a Topology,
    traffic: &'a TrafficMatrix,
    config: &'a EngineConfig,
    options: RunOptions,
    nodes: BTreeMap<NodeId, GospfNode>,
    tracks: BTreeMap<(LinkId, NodeId), Track>,
    queue: BTreeMap<QueueKey, Pending>,
    counter: u64,
    latency: SimTime,
    failed: BTreeSet<LinkId>,
    ctrl_bits: BTreeMap<LinkId, f64>,
    window_ctrl_bytes: u64,
    window_unresolved: usize,
    last_bits: BTreeMap<LinkId, f64>,
    last_window: f64,
    events: Vec<ProtocolEvent>,
    deliveries: Vec<Delivery>,
    records: Vec<WindowRecord>,
    rows: Vec<MetricsRow>,
    pending_quiet: Option<usize>,
    quiet: Vec<bool>,
    offered: CompensatedSum,
    delivered: CompensatedSum,
    dropped: CompensatedSum,
    ctrl_bytes: u64,
    unresolved: usize,
    energy: CompensatedSum,
}

impl<'a> Sim<'a> {
    fn new(scenario: &'a Scenario, options: RunOptions) -> Result<Sim<'a>, EngineError> {
        let cfg = &scenario.config;
        let topology = &*scenario.topology;
        let protocol = ProtocolConfig {
            thresholds: Thresholds::new(cfg.gamma_l, cfg.gamma_u)
                .map_err(|e| EngineError::Config(e.to_string()))?,
            safeguard_interval: SimTime::from_secs(cfg.safeguard()),
            mcst_reset_timer: SimTime::from_secs(cfg.mcst_reset_timer),
            reference_bandwidth: cfg.reference_bandwidth,
            green: cfg.mode == Mode::Gospf,
        };
        let nodes = topology
            .node_ids()
            .map(|n| (n, GospfNode::new(n, scenario.topology.clone(), protocol.clone())))
            .collect();
        let mut tracks = BTreeMap::new();
        for l in topology.links() {
            for n in [l.a, l.b] {
                tracks.insert(
                    (l.id, n),
                    Track {
                        account: EnergyAccount::new(l.power.unwrap_or(cfg.power)),
                        awake: true,
                        since: SimTime::ZERO,
                        awake_ns: 0,
                        asleep_ns: 0,
                    },
                );
            }
        }
        let mut queue = BTreeMap::new();
        let mut counter = 0;
        for f in &cfg.failures {
            queue.insert(
                (SimTime::from_secs(f.at), 0, 0, 0, 0, counter),
                Pending::Failure(f.link),
            );
            counter += 1;
        }
        Ok(Sim {
            topology,
            traffic: &scenario.traffic,
            config: cfg,
            options,
            nodes,
            tracks,
            queue,
            counter,
            latency: SimTime::from_secs(cfg.control_latency),
            failed: BTreeSet::new(),
            ctrl_bits: BTreeMap::new(),
            window_ctrl_bytes: 0,
            window_unresolved: 0,
            last_bits: BTreeMap::new(),
            last_window: cfg.t_sample,
            events: Vec::new(),
            deliveries: Vec::new(),
            records: Vec::new(),
            rows: Vec::new(),
            pending_quiet: None,
            quiet: Vec::new(),
            offered: CompensatedSum::default(),
            delivered: CompensatedSum::default(),
            dropped: CompensatedSum::default(),
            ctrl_bytes: 0,
            unresolved: 0,
            energy: CompensatedSum::default(),
        })
    }

    fn apply(&mut self, node: NodeId, now: SimTime, fx: Effects) -> Result<(), EngineError> {
        self.events.extend(fx.events);
        let bytes = self.config.ctrl_msg_bytes;
        for tx in fx.transmissions {
            *self.ctrl_bits.entry(tx.link).or_insert(0.0) += (bytes * 8) as f64;
            self.window_ctrl_bytes += bytes;
            self.ctrl_bytes += bytes;
            let key = (now + self.latency, 1, tx.msg.origin.0, tx.msg.seq, tx.to.0, self.counter);
            self.counter += 1;
            self.queue.insert(
                key,
                Pending::Deliver {
                    link: tx.link,
                    to: tx.to,
                    msg: tx.msg,
                },
            );
        }
        for tr in fx.transitions {
            let track = self.tracks.get_mut(&(tr.link, node)).expect("interface track");
            track.advance(now);
            let awake = tr.to.is_awake();
            if awake && !track.awake {
                track
                    .account
                    .record_wakeup(tr.from)
                    .map_err(|e| EngineError::Config(e.to_string()))?;
            }
            track.awake = awake;
        }
        for (at, timer) in fx.timers {
            self.queue.insert((at, 2, node.0, 0, node.0, self.counter), Pending::Timer { node, timer });
            self.counter += 1;
        }
        self.window_unresolved += fx.unresolved.len();
        self.unresolved += fx.unresolved.len();
        Ok(())
    }

    fn usable(&self, link: LinkId) -> bool {
        if self.failed.contains(&link) {
            return false;
        }
        let l = self.topology.link(link).expect("known link");
        self.tracks[&(link, l.a)].awake && self.tracks[&(link, l.b)].awake
    }

    fn step(&mut self, k: usize, start: SimTime, end: SimTime) -> Result<(), EngineError> {
        let window = (end - start).as_secs();

        // periodic utilization check on the previous window
        let mut tick_quiet = true;
        if k > 0 {
            let ids: Vec<NodeId> = self.nodes.keys().copied().collect();
            for id in ids {
                let samples: BTreeMap<LinkId, UtilizationSample> = self
                    .topology
                    .neighbors(id)
                    .iter()
                    .map(|&(_, l)| {
                        let capacity = self.topology.link(l).unwrap().capacity as f64;
                        (
                            l,
                            UtilizationSample {
                                bits: self.last_bits.get(&l).copied().unwrap_or(0.0),
                                line_rate: capacity,
                                window: self.last_window,
                            },
                        )
                    })
                    .collect();
                let fx = self.nodes.get_mut(&id).unwrap().sample_tick(start, &samples);
                tick_quiet &= fx.is_empty();
                self.apply(id, start, fx)?;
            }
        }
        if let Some(prev) = self.pending_quiet.take() {
            self.quiet[prev] &= tick_quiet;
            if let Some(r) = self.records.get_mut(prev) {
                r.quiesced = self.quiet[prev];
            }
        }

        // protocol events inside the window
        let mut activity = false;
        while let Some(entry) = self.queue.first_entry() {
            let &(time, ..) = entry.key();
            if time >= end {
                break;
            }
            let item = entry.remove();
            activity = true;
            match item {
                Pending::Failure(link) => {
                    if !self.failed.insert(link) {
                        continue;
                    }
                    let l = self.topology.link(link).unwrap().clone();
                    for n in [l.a, l.b] {
                        let fx = self.nodes.get_mut(&n).unwrap().interface_down(time, link);
                        self.apply(n, time, fx)?;
                    }
                }
                Pending::Deliver { link, to, msg } => {
                    let fx = self.nodes.get_mut(&to).unwrap().receive(time, Some(link), &msg);
                    if self.options.record_deliveries && (fx.accepted || fx.duplicate) {
                        self.deliveries.push(Delivery {
                            time,
                            node: to,
                            origin: msg.origin,
                            seq: msg.seq,
                            accepted: fx.accepted,
                        });
                    }
                    self.apply(to, time, fx)?;
                }
                Pending::Timer { node, timer } => {
                    let fx = self.nodes.get_mut(&node).unwrap().on_timer(time, timer);
                    self.apply(node, time, fx)?;
                }
            }
        }

        // traffic on the converged tables
        let demands = self.traffic.demand_at(start.as_secs())?;
        for n in self.nodes.values_mut() {
            n.routing_table();
        }
        let nodes = &self.nodes;
        let paths = route_flows(
            self.topology,
            &demands,
            |n, d| nodes[&n].cached_routing_table().and_then(|t| t.next_hop(d)),
            |l| self.usable(l),
        );
        let alloc = allocate(self.topology, &demands, &paths, window);
        self.offered.add(alloc.offered());
        self.delivered.add(alloc.delivered());
        self.dropped.add(alloc.dropped());

        // energy
        let mut window_energy = 0.0;
        self.last_bits.clear();
        for l in self.topology.links() {
            let bits = alloc.link_bits(l.id) + self.ctrl_bits.get(&l.id).copied().unwrap_or(0.0);
            self.last_bits.insert(l.id, bits);
            for n in [l.a, l.b] {
                let track = self.tracks.get_mut(&(l.id, n)).unwrap();
                track.advance(end);
                let before = track.account.energy();
                track
                    .account
                    .accrue_window(
                        track.awake_ns as f64 / 1e9,
                        track.asleep_ns as f64 / 1e9,
                        bits,
                        l.capacity as f64,
                    )
                    .map_err(|e| EngineError::Config(e.to_string()))?;
                track.awake_ns = 0;
                track.asleep_ns = 0;
                window_energy += track.account.energy() - before;
            }
        }
        self.energy.add(window_energy);
        self.ctrl_bits.clear();
        self.last_window = window;

        // audit
        let surviving: ActiveLinkSet = self
            .topology
            .link_ids()
            .filter(|l| !self.failed.contains(l))
            .collect();
        let usable: ActiveLinkSet = self.topology.link_ids().filter(|&l| self.usable(l)).collect();
        let connected = !is_connected(self.topology, &surviving) || is_connected(self.topology, &usable);
        if !connected {
            warn!("window {k}: powered links do not connect the network");
        }
        let active: ActiveLinkSet = self
            .topology
            .links()
            .iter()
            .filter(|l| {
                !self.failed.contains(&l.id)
                    && (self.tracks[&(l.id, l.a)].awake || self.tracks[&(l.id, l.b)].awake)
            })
            .map(|l| l.id)
            .collect();
        let resetting = self.nodes.values().any(GospfNode::is_resetting);

        let quiet = !activity && self.queue.is_empty() && alloc.dropped() == 0.0 && !resetting;
        self.quiet.push(quiet);
        self.pending_quiet = Some(k);

        self.rows.push(MetricsRow {
            t: start.as_secs(),
            active_links: active.len(),
            power_w: window_energy / window,
            throughput_bps: alloc.delivered() / window,
            energy_j: self.energy.value(),
            ctrl_bytes: self.window_ctrl_bytes,
            dropped_bits: alloc.dropped(),
        });
        if self.options.record_windows {
            let first = self.nodes.values().next().map(GospfNode::view);
            let views_agree = self.nodes.values().all(|n| Some(n.view()) == first);
            self.records.push(WindowRecord {
                index: k,
                start,
                end,
                active,
                usable,
                failed: self.failed.clone(),
                connected,
                views_agree,
                resetting,
                // settled by the next window's check
                quiesced: false,
                unresolved: self.window_unresolved,
                demands,
                paths,
                dropped_bits: alloc.dropped(),
            });
        }
        self.window_ctrl_bytes = 0;
        self.window_unresolved = 0;
        Ok(())
    }

    fn finish(self, scenario: &Scenario) -> RunOutput {
        let windows = self.rows.len();
        let avg_active_links = if windows > 0 {
            self.rows.iter().map(|r| r.active_links as f64).sum::<f64>() / windows as f64
        } else {
            0.0
        };
        let summary = Summary {
            mode: self.config.mode,
            fingerprint: scenario.fingerprint(),
            t_sample: self.config.t_sample,
            horizon: scenario.horizon(),
            windows,
            total_energy_j: self.energy.value(),
            avg_active_links,
            offered_bits: self.offered.value(),
            delivered_bits: self.delivered.value(),
            dropped_bits: self.dropped.value(),
            ctrl_bytes: self.ctrl_bytes,
            congestion_unresolved: self.unresolved,
        };
        RunOutput {
            metrics: MetricsSeries {
                rows: self.rows,
                summary,
            },
            events: self.events,
            windows: self.records,
            deliveries: self.deliveries,
            accounts: self.tracks.into_iter().map(|(k, t)| (k, t.account)).collect(),
            trees: self.nodes.iter().map(|(id, n)| (*id, n.mcst().clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_util::topo;
    use crate::traffic::Protocol;

    fn ring() -> Topology {
        topo(
            4,
            &[
                (0, 0, 1, 100_000_000),
                (1, 1, 2, 100_000_000),
                (2, 2, 3, 100_000_000),
                (3, 3, 0, 10_000_000),
            ],
        )
    }

    fn quiet_config() -> EngineConfig {
        EngineConfig {
            horizon: Some(2.0),
            ..EngineConfig::default()
        }
    }

    #[test]
    fn zero_traffic_cuts_to_the_tree_after_first_check() {
        let s = Scenario::new(ring(), vec![], quiet_config()).unwrap();
        let out = run(&s).unwrap();
        let counts: Vec<usize> = out.metrics.rows.iter().map(|r| r.active_links).collect();
        assert_eq!(counts[0], 4);
        assert!(counts[1..].iter().all(|&c| c == 3), "{counts:?}");
        let base = run(&s.clone().with_mode(Mode::Baseline)).unwrap();
        assert!(base.metrics.rows.iter().all(|r| r.active_links == 4));
        assert!(base.metrics.summary.total_energy_j > out.metrics.summary.total_energy_j);
        assert_eq!(base.metrics.summary.ctrl_bytes, 0);
    }

    #[test]
    fn time_buckets_cover_the_horizon() {
        let s = Scenario::new(ring(), vec![], quiet_config()).unwrap();
        let out = run(&s).unwrap();
        for acc in out.accounts.values() {
            assert!((acc.elapsed() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_runs_are_identical() {
        let flow = Flow {
            id: FlowId(0),
            src: NodeId(0),
            dst: NodeId(2),
            protocol: Protocol::Tcp,
            schedule: vec![(0.0, 1e6), (1.0, 9e7)],
        };
        let s = Scenario::new(ring(), vec![flow], quiet_config()).unwrap();
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(write_metrics_csv(&a.metrics.rows), write_metrics_csv(&b.metrics.rows));
        assert_eq!(write_event_log(&a.events), write_event_log(&b.events));
    }

    #[test]
    fn default_horizon_is_whole_days() {
        let flow = Flow {
            id: FlowId(0),
            src: NodeId(0),
            dst: NodeId(2),
            protocol: Protocol::Udp,
            schedule: vec![(0.0, 1.0), (2000.0, 2.0)],
        };
        let s = Scenario::new(ring(), vec![flow], EngineConfig::default()).unwrap();
        assert_eq!(s.horizon(), 2.0 * DAY_LENGTH);
        let bad = EngineConfig {
            failures: vec![LinkFailure { link: LinkId(9), at: 1.0 }],
            ..EngineConfig::default()
        };
        assert!(matches!(Scenario::new(ring(), vec![], bad), Err(EngineError::Config(_))));
    }
}
