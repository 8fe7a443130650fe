use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use super::{ActiveLinkSet, Topology};
use crate::types::{LinkId, NodeId};

/// 100 Mbit/s, the customary OSPF auto-cost reference.
pub const DEFAULT_REFERENCE_BANDWIDTH: u64 = 100_000_000;

/// OSPF-style integer link cost: `reference / capacity`, rounded, never below 1.
pub fn ospf_cost(capacity: u64, reference_bandwidth: u64) -> u64 {
    let q = (reference_bandwidth as u128 * 2 + capacity as u128) / (capacity as u128 * 2);
    (q as u64).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    pub cost: u64,
    /// First hop and the link leading to it; `None` for the source itself.
    pub next_hop: Option<(NodeId, LinkId)>,
    /// Predecessor of the destination on the selected path.
    pub predecessor: Option<(NodeId, LinkId)>,
}

/// Single-path shortest-path tree rooted at `source`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoutingTable {
    pub source: Option<NodeId>,
    routes: BTreeMap<NodeId, Route>,
    /// Destinations the active set cannot reach.
    pub unreachable: Vec<NodeId>,
}

impl RoutingTable {
    pub fn route(&self, dest: NodeId) -> Option<&Route> {
        self.routes.get(&dest)
    }

    pub fn next_hop(&self, dest: NodeId) -> Option<(NodeId, LinkId)> {
        self.routes.get(&dest).and_then(|r| r.next_hop)
    }

    pub fn cost(&self, dest: NodeId) -> Option<u64> {
        self.routes.get(&dest).map(|r| r.cost)
    }

    pub fn routes(&self) -> impl Iterator<Item = (NodeId, &Route)> {
        self.routes.iter().map(|(n, r)| (*n, r))
    }

    /// Node sequence from the source to `dest`, both inclusive.
    pub fn path_to(&self, dest: NodeId) -> Option<Vec<NodeId>> {
        let mut path = vec![dest];
        let mut at = dest;
        while let Some((prev, _)) = self.routes.get(&at)?.predecessor {
            path.push(prev);
            at = prev;
        }
        path.reverse();
        Some(path)
    }
}

/// Dijkstra over the active links with cost `reference_bandwidth / capacity`.
///
/// Among equal-cost paths the one whose predecessor chain has the smallest node ids wins, which
/// makes the result independent of heap ordering.
pub fn shortest_paths(
    topology: &Topology,
    active: &ActiveLinkSet,
    source: NodeId,
    reference_bandwidth: u64,
) -> RoutingTable {
    let mut routes: BTreeMap<NodeId, Route> = BTreeMap::new();
    if topology.node(source).is_none() {
        return RoutingTable {
            source: None,
            routes,
            unreachable: topology.node_ids().collect(),
        };
    }
    let mut tentative: BTreeMap<NodeId, (u64, Option<(NodeId, LinkId)>)> = BTreeMap::new();
    tentative.insert(source, (0, None));
    let mut heap = BinaryHeap::from([Reverse((0u64, source))]);

    while let Some(Reverse((d, n))) = heap.pop() {
        if routes.contains_key(&n) || tentative[&n].0 != d {
            continue;
        }
        let predecessor = tentative[&n].1;
        let next_hop = match predecessor {
            None => None,
            Some((p, l)) if p == source => Some((n, l)),
            Some((p, _)) => routes[&p].next_hop,
        };
        routes.insert(
            n,
            Route {
                cost: d,
                next_hop,
                predecessor,
            },
        );
        for &(m, l) in topology.neighbors(n) {
            if !active.contains(l) || routes.contains_key(&m) {
                continue;
            }
            let capacity = topology.link(l).expect("adjacency is consistent").capacity;
            let nd = d + ospf_cost(capacity, reference_bandwidth);
            match tentative.get(&m).copied() {
                Some((known, _)) if nd > known => {}
                Some((known, pred)) if nd == known => {
                    if pred.map_or(true, |(p, _)| n < p) {
                        tentative.insert(m, (nd, Some((n, l))));
                    }
                }
                _ => {
                    tentative.insert(m, (nd, Some((n, l))));
                    heap.push(Reverse((nd, m)));
                }
            }
        }
    }

    let unreachable = topology
        .node_ids()
        .filter(|n| !routes.contains_key(n))
        .collect();
    RoutingTable {
        source: Some(source),
        routes,
        unreachable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_util::topo;

    #[test]
    fn cost_rounds_and_floors_at_one() {
        assert_eq!(ospf_cost(100_000_000, DEFAULT_REFERENCE_BANDWIDTH), 1);
        assert_eq!(ospf_cost(10_000_000_000, DEFAULT_REFERENCE_BANDWIDTH), 1);
        assert_eq!(ospf_cost(40_000_000, DEFAULT_REFERENCE_BANDWIDTH), 3);
        assert_eq!(ospf_cost(10_000_000, DEFAULT_REFERENCE_BANDWIDTH), 10);
    }

    #[test]
    fn source_route_is_empty() {
        let t = topo(2, &[(0, 0, 1, 10_000_000)]);
        let table = shortest_paths(&t, &ActiveLinkSet::all(&t), NodeId(0), DEFAULT_REFERENCE_BANDWIDTH);
        let own = table.route(NodeId(0)).unwrap();
        assert_eq!(own.cost, 0);
        assert_eq!(own.next_hop, None);
        assert_eq!(table.path_to(NodeId(0)).unwrap(), vec![NodeId(0)]);
        assert_eq!(table.next_hop(NodeId(1)), Some((NodeId(1), LinkId(0))));
    }

    #[test]
    fn equal_cost_tie_prefers_smaller_predecessor() {
        // square 0-1-3 and 0-2-3, all equal cost
        let t = topo(
            4,
            &[(0, 0, 1, 10_000_000), (1, 1, 3, 10_000_000), (2, 0, 2, 10_000_000), (3, 2, 3, 10_000_000)],
        );
        let from_zero = shortest_paths(&t, &ActiveLinkSet::all(&t), NodeId(0), DEFAULT_REFERENCE_BANDWIDTH);
        assert_eq!(from_zero.path_to(NodeId(3)).unwrap(), vec![NodeId(0), NodeId(1), NodeId(3)]);
    }

    #[test]
    fn inactive_links_make_nodes_unreachable() {
        let t = topo(3, &[(0, 0, 1, 10), (1, 1, 2, 10)]);
        let active: ActiveLinkSet = [LinkId(0)].into_iter().collect();
        let table = shortest_paths(&t, &active, NodeId(0), DEFAULT_REFERENCE_BANDWIDTH);
        assert_eq!(table.unreachable, vec![NodeId(2)]);
        assert!(table.route(NodeId(2)).is_none());
    }
}
