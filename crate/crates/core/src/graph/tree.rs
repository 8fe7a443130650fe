use std::collections::BTreeSet;

use super::{ActiveLinkSet, GraphError, Topology};
use crate::types::{LinkId, NodeId};

/// A spanning tree (or forest, when built over a disconnected link subset) selected by Kruskal
/// under the inverse-capacity weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    links: BTreeSet<LinkId>,
    total_inverse_capacity: f64,
}

impl SpanningTree {
    pub fn links(&self) -> &BTreeSet<LinkId> {
        &self.links
    }

    pub fn contains(&self, link: LinkId) -> bool {
        self.links.contains(&link)
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Sum of `1/u` over the tree links, for reporting. Selection never compares these floats.
    pub fn total_inverse_capacity(&self) -> f64 {
        self.total_inverse_capacity
    }

    pub fn to_active_set(&self) -> ActiveLinkSet {
        self.links.iter().copied().collect()
    }
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Maximum capacity spanning tree of the whole topology.
pub fn compute_mcst(topology: &Topology) -> Result<SpanningTree, GraphError> {
    compute_mcst_over(topology, &ActiveLinkSet::all(topology))
}

/// Maximum capacity spanning tree restricted to `available` links.
///
/// Weight `1/u` is minimized by taking links in descending capacity, so the ordering is a plain
/// integer comparison; equal capacities go by ascending link id. Returns
/// [`GraphError::DisconnectedTopology`] if `available` does not span every node.
pub fn compute_mcst_over(
    topology: &Topology,
    available: &ActiveLinkSet,
) -> Result<SpanningTree, GraphError> {
    let forest = spanning_forest(topology, available);
    if forest.len() + 1 != topology.node_count() {
        return Err(GraphError::DisconnectedTopology);
    }
    Ok(forest)
}

/// Kruskal over `available`, tolerating disconnection.
pub(crate) fn spanning_forest(topology: &Topology, available: &ActiveLinkSet) -> SpanningTree {
    let index_of = |n: NodeId| {
        topology
            .nodes()
            .binary_search_by_key(&n, |node| node.id)
            .expect("link endpoints are validated at construction")
    };
    let mut candidates: Vec<_> = topology
        .links()
        .iter()
        .filter(|l| available.contains(l.id))
        .collect();
    candidates.sort_by(|x, y| y.capacity.cmp(&x.capacity).then(x.id.cmp(&y.id)));

    let mut sets = DisjointSets::new(topology.node_count());
    let mut links = BTreeSet::new();
    let mut total = 0.0;
    for l in candidates {
        if sets.union(index_of(l.a), index_of(l.b)) {
            links.insert(l.id);
            total += 1.0 / l.capacity as f64;
        }
    }
    SpanningTree {
        links,
        total_inverse_capacity: total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_util::topo;

    #[test]
    fn two_nodes_single_link() {
        let t = topo(2, &[(7, 0, 1, 100)]);
        let tree = compute_mcst(&t).unwrap();
        assert_eq!(tree.links().iter().copied().collect::<Vec<_>>(), vec![LinkId(7)]);
    }

    #[test]
    fn four_node_example_keeps_high_capacity_links() {
        // A=0 B=1 C=2 D=3; AB:10 BC:10 CA:1 CD:5
        let t = topo(
            4,
            &[(0, 0, 1, 10), (1, 1, 2, 10), (2, 2, 0, 1), (3, 2, 3, 5)],
        );
        let tree = compute_mcst(&t).unwrap();
        let ids: Vec<u32> = tree.links().iter().map(|l| l.0).collect();
        assert_eq!(ids, vec![0, 1, 3]);
        assert!((tree.total_inverse_capacity() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn equal_capacity_ties_go_to_lower_link_id() {
        let t = topo(3, &[(5, 0, 1, 10), (3, 1, 2, 10), (4, 2, 0, 10)]);
        let ids: Vec<u32> = compute_mcst(&t).unwrap().links().iter().map(|l| l.0).collect();
        assert_eq!(ids, vec![3, 4]);
    }

    #[test]
    fn restricted_to_disconnecting_subset_fails() {
        let t = topo(3, &[(0, 0, 1, 10), (1, 1, 2, 10)]);
        let only_first: ActiveLinkSet = [LinkId(0)].into_iter().collect();
        assert_eq!(
            compute_mcst_over(&t, &only_first),
            Err(GraphError::DisconnectedTopology)
        );
        assert_eq!(spanning_forest(&t, &only_first).len(), 1);
    }
}
