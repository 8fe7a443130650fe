use std::collections::BTreeMap;

use super::{FlowDemand, FlowId};
use crate::graph::Topology;
use crate::types::{LinkId, NodeId};

/// One direction of a link, identified by the transmitting end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkDirection {
    pub link: LinkId,
    pub from: NodeId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectedHop {
    pub link: LinkId,
    pub from: NodeId,
    pub to: NodeId,
}

impl DirectedHop {
    pub fn direction(&self) -> LinkDirection {
        LinkDirection {
            link: self.link,
            from: self.from,
        }
    }
}

/// Bits offered to, carried by, and dropped at one link direction in one window.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkLoad {
    pub offered: f64,
    pub delivered: f64,
    pub dropped: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlowOutcome {
    /// Bits the source emitted in the window.
    pub offered: f64,
    /// Bits that reached the destination.
    pub delivered: f64,
    pub dropped: f64,
    pub no_route: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Allocation {
    pub links: BTreeMap<LinkDirection, LinkLoad>,
    pub flows: BTreeMap<FlowId, FlowOutcome>,
}

impl Allocation {
    /// Delivered bits over both directions of `link`.
    pub fn link_bits(&self, link: LinkId) -> f64 {
        self.links
            .range(
                LinkDirection {
                    link,
                    from: NodeId(0),
                }..=LinkDirection {
                    link,
                    from: NodeId(u32::MAX),
                },
            )
            .fold(0.0, |acc, (_, l)| acc + l.delivered)
    }

    pub fn offered(&self) -> f64 {
        self.flows.values().fold(0.0, |acc, f| acc + f.offered)
    }

    pub fn delivered(&self) -> f64 {
        self.flows.values().fold(0.0, |acc, f| acc + f.delivered)
    }

    pub fn dropped(&self) -> f64 {
        self.flows.values().fold(0.0, |acc, f| acc + f.dropped)
    }

    pub fn no_route_flows(&self) -> impl Iterator<Item = FlowId> + '_ {
        self.flows.iter().filter(|(_, o)| o.no_route).map(|(f, _)| *f)
    }
}

/// Follows per-node next hops from each flow's source to its destination.
///
/// `usable` says whether a link can carry data right now. A missing next hop, an unusable link,
/// or a forwarding loop yields `None` (no route) for that flow.
pub fn route_flows(
    topology: &Topology,
    demands: &[FlowDemand],
    next_hop: impl Fn(NodeId, NodeId) -> Option<(NodeId, LinkId)>,
    usable: impl Fn(LinkId) -> bool,
) -> BTreeMap<FlowId, Option<Vec<DirectedHop>>> {
    demands
        .iter()
        .map(|d| {
            let mut hops = Vec::new();
            let mut at = d.src;
            let path = loop {
                if at == d.dst {
                    break Some(hops);
                }
                if hops.len() > topology.node_count() {
                    break None;
                }
                match next_hop(at, d.dst) {
                    Some((to, link)) if usable(link) => {
                        hops.push(DirectedHop { link, from: at, to });
                        at = to;
                    }
                    _ => break None,
                }
            };
            (d.flow, path)
        })
        .collect()
}

const MAX_ROUNDS: usize = 256;

/// Fluid allocation of one window.
///
/// Every flow places `rate * window` bits on its path. Where a link direction is offered more
/// than `capacity * window`, all flows crossing it lose the same fraction, and links further
/// along a flow's path only see what survived. Pass-through ratios are found by fixed-point
/// iteration, which is exact after path-length rounds when the link dependencies are acyclic.
pub fn allocate(
    topology: &Topology,
    demands: &[FlowDemand],
    paths: &BTreeMap<FlowId, Option<Vec<DirectedHop>>>,
    window: f64,
) -> Allocation {
    let mut demands: Vec<&FlowDemand> = demands.iter().collect();
    demands.sort_by_key(|d| d.flow);
    let routed: Vec<(&FlowDemand, &[DirectedHop])> = demands
        .iter()
        .filter_map(|d| match paths.get(&d.flow) {
            Some(Some(p)) => Some((*d, p.as_slice())),
            _ => None,
        })
        .collect();

    let budget = |dir: &LinkDirection| {
        topology.link(dir.link).map_or(0.0, |l| l.capacity as f64) * window
    };
    let mut ratio: BTreeMap<LinkDirection, f64> = routed
        .iter()
        .flat_map(|(_, p)| p.iter().map(DirectedHop::direction))
        .map(|dir| (dir, 1.0))
        .collect();

    let offered_with = |ratio: &BTreeMap<LinkDirection, f64>| {
        let mut offered: BTreeMap<LinkDirection, f64> = ratio.keys().map(|k| (*k, 0.0)).collect();
        for (d, path) in &routed {
            let mut bits = d.rate * window;
            for hop in *path {
                let dir = hop.direction();
                *offered.get_mut(&dir).unwrap() += bits;
                bits *= ratio[&dir];
            }
        }
        offered
    };

    let longest = routed.iter().map(|(_, p)| p.len()).max().unwrap_or(0);
    for round in 0..MAX_ROUNDS {
        let offered = offered_with(&ratio);
        let mut change: f64 = 0.0;
        for (dir, r) in ratio.iter_mut() {
            let cap = budget(dir);
            let target = if offered[dir] > cap { cap / offered[dir] } else { 1.0 };
            // undamped rounds settle acyclic dependencies exactly; damping only matters for cycles
            let next = if round <= longest { target } else { 0.5 * (*r + target) };
            change = change.max((next - *r).abs());
            *r = next;
        }
        if change < 1e-13 {
            break;
        }
    }

    let mut out = Allocation::default();
    for (dir, _) in ratio.iter() {
        out.links.insert(*dir, LinkLoad::default());
    }
    for d in &demands {
        let offered = d.rate * window;
        let outcome = match paths.get(&d.flow) {
            Some(Some(path)) => {
                let mut bits = offered;
                let mut dropped = 0.0;
                for hop in path {
                    let dir = hop.direction();
                    let pass = bits * ratio[&dir];
                    let load = out.links.get_mut(&dir).unwrap();
                    load.offered += bits;
                    load.delivered += pass;
                    load.dropped += bits - pass;
                    dropped += bits - pass;
                    bits = pass;
                }
                FlowOutcome {
                    offered,
                    delivered: bits,
                    dropped,
                    no_route: false,
                }
            }
            _ => FlowOutcome {
                offered,
                delivered: 0.0,
                dropped: offered,
                no_route: true,
            },
        };
        out.flows.insert(d.flow, outcome);
    }
    out
}
