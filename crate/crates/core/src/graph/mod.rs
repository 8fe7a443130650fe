//! Physical topology, the maximum capacity spanning tree, hop distances and OSPF routing.
//!
//! Everything here is a pure function of its inputs. The protocol nodes and the exact solver both
//! build on these primitives, so determinism matters: Kruskal breaks capacity ties by link id and
//! Dijkstra breaks cost ties by the smallest predecessor node id.

mod io;
mod routing;
mod tree;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::types::{LinkId, NodeId};

pub use io::{parse_topology, write_topology};
pub(crate) use io::parse_topology_with;
pub use routing::{ospf_cost, shortest_paths, Route, RoutingTable, DEFAULT_REFERENCE_BANDWIDTH};
pub use tree::{compute_mcst, compute_mcst_over, SpanningTree};
pub(crate) use tree::spanning_forest;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("topology is not connected")]
    DisconnectedTopology,
    #[error("duplicate node id {0}")]
    DuplicateNode(NodeId),
    #[error("duplicate link id {0}")]
    DuplicateLink(LinkId),
    #[error("link {link} references unknown node {node}")]
    UnknownEndpoint { link: LinkId, node: NodeId },
    #[error("link {0} is a self-loop")]
    SelfLoop(LinkId),
    #[error("link {link} duplicates link {existing} between the same nodes")]
    ParallelLink { link: LinkId, existing: LinkId },
    #[error("link {0} has non-positive capacity")]
    NonPositiveCapacity(LinkId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("topology has no nodes")]
    Empty,
}

/// Per-interface power ratings: watts in each operational state and the joules spent on a
/// sleep-to-idle transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerRating {
    pub p_active: f64,
    pub p_idle: f64,
    pub p_sleep: f64,
    pub e_c: f64,
}

impl Default for PowerRating {
    fn default() -> Self {
        PowerRating {
            p_active: 1.0,
            p_idle: 0.8,
            p_sleep: 0.016,
            e_c: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    /// Line rate in bits per second, per direction.
    pub capacity: u64,
    /// Per-link override; `None` means the scenario's global defaults apply.
    pub power: Option<PowerRating>,
}

impl Link {
    pub fn touches(&self, node: NodeId) -> bool {
        self.a == node || self.b == node
    }

    /// The far end of the link as seen from `node`.
    pub fn peer(&self, node: NodeId) -> Option<NodeId> {
        if node == self.a {
            Some(self.b)
        } else if node == self.b {
            Some(self.a)
        } else {
            None
        }
    }
}

/// An undirected, simple, connected graph of routers and capacitated links.
///
/// Nodes and links are stored sorted by id, so every derived computation is independent of the
/// order in which they were supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    nodes: Vec<Node>,
    links: Vec<Link>,
    node_index: BTreeMap<NodeId, usize>,
    link_index: BTreeMap<LinkId, usize>,
    adjacency: BTreeMap<NodeId, Vec<(NodeId, LinkId)>>,
}

impl Topology {
    pub fn new(mut nodes: Vec<Node>, mut links: Vec<Link>) -> Result<Topology, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        nodes.sort_by_key(|n| n.id);
        links.sort_by_key(|l| l.id);

        let mut node_index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id, i).is_some() {
                return Err(GraphError::DuplicateNode(n.id));
            }
        }
        let mut link_index = BTreeMap::new();
        let mut pairs: BTreeMap<(NodeId, NodeId), LinkId> = BTreeMap::new();
        let mut adjacency: BTreeMap<NodeId, Vec<(NodeId, LinkId)>> =
            nodes.iter().map(|n| (n.id, Vec::new())).collect();
        for (i, l) in links.iter().enumerate() {
            if link_index.insert(l.id, i).is_some() {
                return Err(GraphError::DuplicateLink(l.id));
            }
            for end in [l.a, l.b] {
                if !node_index.contains_key(&end) {
                    return Err(GraphError::UnknownEndpoint {
                        link: l.id,
                        node: end,
                    });
                }
            }
            if l.a == l.b {
                return Err(GraphError::SelfLoop(l.id));
            }
            if l.capacity == 0 {
                return Err(GraphError::NonPositiveCapacity(l.id));
            }
            let key = (l.a.min(l.b), l.a.max(l.b));
            if let Some(existing) = pairs.insert(key, l.id) {
                return Err(GraphError::ParallelLink {
                    link: l.id,
                    existing,
                });
            }
            adjacency.get_mut(&l.a).unwrap().push((l.b, l.id));
            adjacency.get_mut(&l.b).unwrap().push((l.a, l.id));
        }
        for neighbors in adjacency.values_mut() {
            neighbors.sort();
        }

        let topology = Topology {
            nodes,
            links,
            node_index,
            link_index,
            adjacency,
        };
        if !is_connected(&topology, &ActiveLinkSet::all(&topology)) {
            return Err(GraphError::DisconnectedTopology);
        }
        Ok(topology)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.node_index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn link(&self, id: LinkId) -> Option<&Link> {
        self.link_index.get(&id).map(|&i| &self.links[i])
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.links.iter().map(|l| l.id)
    }

    /// Neighbors of `node` with the connecting link, sorted by neighbor id.
    pub fn neighbors(&self, node: NodeId) -> &[(NodeId, LinkId)] {
        self.adjacency.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn link_between(&self, a: NodeId, b: NodeId) -> Option<LinkId> {
        self.neighbors(a)
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, l)| l)
    }

    pub fn find_node(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }
}

/// The set of powered-on links, the `x_ij = 1` entries of a design.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActiveLinkSet(BTreeSet<LinkId>);

impl ActiveLinkSet {
    pub fn all(topology: &Topology) -> Self {
        ActiveLinkSet(topology.link_ids().collect())
    }

    pub fn empty() -> Self {
        ActiveLinkSet(BTreeSet::new())
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.0.contains(&link)
    }

    pub fn insert(&mut self, link: LinkId) -> bool {
        self.0.insert(link)
    }

    pub fn remove(&mut self, link: LinkId) -> bool {
        self.0.remove(&link)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = LinkId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_set(&self) -> &BTreeSet<LinkId> {
        &self.0
    }
}

impl FromIterator<LinkId> for ActiveLinkSet {
    fn from_iter<I: IntoIterator<Item = LinkId>>(iter: I) -> Self {
        ActiveLinkSet(iter.into_iter().collect())
    }
}

impl From<BTreeSet<LinkId>> for ActiveLinkSet {
    fn from(set: BTreeSet<LinkId>) -> Self {
        ActiveLinkSet(set)
    }
}

/// True iff the active links connect every node of the topology.
pub fn is_connected(topology: &Topology, active: &ActiveLinkSet) -> bool {
    let Some(start) = topology.node_ids().next() else {
        return true;
    };
    let reached = bfs_hops(topology, start, |l| active.contains(l));
    reached.len() == topology.node_count()
}

/// Unit-weight BFS over the links accepted by `usable`; returns hop counts of reachable nodes.
pub(crate) fn bfs_hops(
    topology: &Topology,
    from: NodeId,
    usable: impl Fn(LinkId) -> bool,
) -> BTreeMap<NodeId, u32> {
    let mut dist = BTreeMap::new();
    dist.insert(from, 0u32);
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        let d = dist[&n];
        for &(m, l) in topology.neighbors(n) {
            if usable(l) && !dist.contains_key(&m) {
                dist.insert(m, d + 1);
                queue.push_back(m);
            }
        }
    }
    dist
}

/// Hop distances from `from` to every node over the links accepted by `usable`.
pub fn node_hop_distances(
    topology: &Topology,
    from: NodeId,
    usable: impl Fn(LinkId) -> bool,
) -> BTreeMap<NodeId, u32> {
    bfs_hops(topology, from, usable)
}

/// Hops from `from` to the nearer endpoint of `link`, over the full physical graph. A link
/// incident to `from` is at distance 0.
pub fn hop_distance(topology: &Topology, from: NodeId, link: LinkId) -> Result<u32, GraphError> {
    if topology.node(from).is_none() {
        return Err(GraphError::UnknownNode(from));
    }
    let l = topology.link(link).ok_or(GraphError::UnknownLink(link))?;
    let dist = bfs_hops(topology, from, |_| true);
    Ok(link_distance(&dist, l))
}

/// Distance of a link given a node's hop map; `u32::MAX` when neither endpoint is reachable.
pub(crate) fn link_distance(dist: &BTreeMap<NodeId, u32>, link: &Link) -> u32 {
    let da = dist.get(&link.a).copied().unwrap_or(u32::MAX);
    let db = dist.get(&link.b).copied().unwrap_or(u32::MAX);
    da.min(db)
}
