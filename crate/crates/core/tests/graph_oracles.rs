mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use common::{build, random_topology, reachable};
use gospf::graph::{
    compute_mcst, hop_distance, is_connected, ospf_cost, shortest_paths, ActiveLinkSet, Topology,
};
use gospf::scenarios::garr48;
use gospf::{LinkId, NodeId};
use proptest::prelude::*;

const CAPS: [u64; 5] = [10_000_000, 20_000_000, 40_000_000, 50_000_000, 100_000_000];
const LCM: u128 = 200_000_000;

/// Total inverse capacity scaled by a common multiple, so comparisons are exact.
fn weight(t: &Topology, links: &BTreeSet<LinkId>) -> u128 {
    links.iter().map(|l| LCM / t.link(*l).unwrap().capacity as u128).sum()
}

fn is_spanning_tree(t: &Topology, links: &BTreeSet<LinkId>) -> bool {
    links.len() + 1 == t.node_count()
        && reachable(t, NodeId(0), |l| links.contains(&l)).len() == t.node_count()
}

fn subsets_of_size(items: &[LinkId], k: usize) -> Vec<BTreeSet<LinkId>> {
    if k == 0 {
        return vec![BTreeSet::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut with: Vec<BTreeSet<LinkId>> = subsets_of_size(&items[1..], k - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(items[0]);
            s
        })
        .collect();
    with.extend(subsets_of_size(&items[1..], k));
    with
}

fn bfs(t: &Topology, from: NodeId) -> BTreeMap<NodeId, u32> {
    let mut dist = BTreeMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(n) = queue.pop_front() {
        for l in t.links() {
            if let Some(m) = l.peer(n) {
                if !dist.contains_key(&m) {
                    dist.insert(m, dist[&n] + 1);
                    queue.push_back(m);
                }
            }
        }
    }
    dist
}

/// Minimum path cost to every node by enumerating all simple paths.
fn brute_force_costs(t: &Topology, active: &ActiveLinkSet, source: NodeId, reference: u64) -> BTreeMap<NodeId, u64> {
    fn walk(t: &Topology, active: &ActiveLinkSet, at: NodeId, cost: u64, seen: &mut Vec<NodeId>, reference: u64, best: &mut BTreeMap<NodeId, u64>) {
        let e = best.entry(at).or_insert(u64::MAX);
        *e = (*e).min(cost);
        for l in t.links().iter().filter(|l| active.contains(l.id)) {
            if let Some(m) = l.peer(at) {
                if !seen.contains(&m) {
                    seen.push(m);
                    walk(t, active, m, cost + ospf_cost(l.capacity, reference), seen, reference, best);
                    seen.pop();
                }
            }
        }
    }
    let mut best = BTreeMap::new();
    walk(t, active, source, 0, &mut vec![source], reference, &mut best);
    best
}

#[test]
fn four_node_example_matches_enumeration() {
    // A-B 10, B-C 10, C-A 1, C-D 5
    let t = build(4, &[(0, 1, 10), (1, 2, 10), (2, 0, 1), (2, 3, 5)]);
    let tree = compute_mcst(&t).unwrap();
    let expected: BTreeSet<LinkId> = [LinkId(0), LinkId(1), LinkId(3)].into();
    assert_eq!(tree.links(), &expected);
    let all: Vec<LinkId> = t.link_ids().collect();
    let inv = |s: &BTreeSet<LinkId>| s.iter().map(|l| 10 / t.link(*l).unwrap().capacity).sum::<u64>();
    let best = subsets_of_size(&all, 3)
        .into_iter()
        .filter(|s| is_spanning_tree(&t, s))
        .min_by_key(inv)
        .unwrap();
    assert_eq!(best, expected);
}

#[test]
fn garr48_hop_distances_match_bfs() {
    let t = garr48();
    for n in t.node_ids() {
        let dist = bfs(&t, n);
        for l in t.links() {
            let expected = dist[&l.a].min(dist[&l.b]);
            assert_eq!(hop_distance(&t, n, l.id).unwrap(), expected, "node {n} link {}", l.id);
            assert_eq!(expected == 0, l.touches(n));
        }
    }
}

#[test]
fn garr48_tree_has_47_links() {
    let t = garr48();
    assert_eq!((t.node_count(), t.link_count()), (48, 78));
    let tree = compute_mcst(&t).unwrap();
    assert_eq!(tree.len(), 47);
    assert!(is_connected(&t, &tree.to_active_set()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mcst_weight_is_minimal(seed in any::<u64>()) {
        let t = random_topology(seed, 8, 5, &CAPS);
        let tree = compute_mcst(&t).unwrap();
        prop_assert_eq!(tree.len() + 1, t.node_count());
        prop_assert!(is_connected(&t, &tree.to_active_set()));
        let all: Vec<LinkId> = t.link_ids().collect();
        let best = subsets_of_size(&all, t.node_count() - 1)
            .iter()
            .filter(|s| is_spanning_tree(&t, s))
            .map(|s| weight(&t, s))
            .min()
            .unwrap();
        prop_assert_eq!(weight(&t, tree.links()), best);
    }

    #[test]
    fn mcst_ignores_input_order(seed in any::<u64>()) {
        let t = random_topology(seed, 10, 8, &CAPS);
        let mut nodes = t.nodes().to_vec();
        let mut links = t.links().to_vec();
        nodes.reverse();
        let half = links.len() / 2;
        links.rotate_left(half);
        let shuffled = Topology::new(nodes, links).unwrap();
        prop_assert_eq!(compute_mcst(&t).unwrap(), compute_mcst(&shuffled).unwrap());
    }

    #[test]
    fn shortest_paths_match_enumeration(seed in any::<u64>(), drop in any::<u64>()) {
        let t = random_topology(seed, 6, 6, &CAPS);
        let reference = 100_000_000;
        // knock out some links, which may leave destinations unreachable
        let active: ActiveLinkSet = t.link_ids().filter(|l| (drop >> (l.0 % 64)) & 3 != 0).collect();
        for s in t.node_ids() {
            let table = shortest_paths(&t, &active, s, reference);
            let best = brute_force_costs(&t, &active, s, reference);
            for d in t.node_ids() {
                prop_assert_eq!(table.cost(d), best.get(&d).copied());
                let Some(path) = table.path_to(d) else { continue };
                // the chosen path realizes the minimum, and every predecessor is the smallest
                // node id that does
                let mut cost = 0;
                for w in path.windows(2) {
                    let l = t.link_between(w[0], w[1]).unwrap();
                    prop_assert!(active.contains(l));
                    cost += ospf_cost(t.link(l).unwrap().capacity, reference);
                    let on_best: Vec<NodeId> = t.neighbors(w[1]).iter()
                        .filter(|(p, l)| active.contains(*l) && best.get(p).is_some_and(|c| c + ospf_cost(t.link(*l).unwrap().capacity, reference) == best[&w[1]]))
                        .map(|(p, _)| *p)
                        .collect();
                    prop_assert_eq!(Some(&w[0]), on_best.iter().min());
                }
                prop_assert_eq!(cost, best[&d]);
            }
        }
    }

    #[test]
    fn connectivity_matches_search(seed in any::<u64>(), keep in any::<u64>()) {
        let t = random_topology(seed, 12, 10, &CAPS);
        let active: ActiveLinkSet = t.link_ids().filter(|l| (keep >> (l.0 % 64)) & 1 == 1).collect();
        let expected = reachable(&t, NodeId(0), |l| active.contains(l)).len() == t.node_count();
        prop_assert_eq!(is_connected(&t, &active), expected);
    }
}
