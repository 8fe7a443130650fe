#![allow(dead_code)]

use gospf::graph::{Link, Node, Topology};
use gospf::{LinkId, NodeId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn build(n: u32, links: &[(u32, u32, u64)]) -> Topology {
    let nodes = (0..n).map(|i| Node { id: NodeId(i), name: format!("n{i}") }).collect();
    let links = links
        .iter()
        .enumerate()
        .map(|(i, &(a, b, capacity))| Link {
            id: LinkId(i as u32),
            a: NodeId(a),
            b: NodeId(b),
            capacity,
            power: None,
        })
        .collect();
    Topology::new(nodes, links).unwrap()
}

/// Connected simple graph: a random tree plus up to `extra` further links, capacities drawn
/// from `caps`.
pub fn random_edges(rng: &mut impl Rng, n: u32, extra: usize, caps: &[u64]) -> Vec<(u32, u32, u64)> {
    let mut edges = Vec::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edges.push((j, i, *caps.choose(rng).unwrap()));
    }
    let mut absent: Vec<(u32, u32)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .filter(|&(a, b)| !edges.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)))
        .collect();
    absent.shuffle(rng);
    for (a, b) in absent.into_iter().take(extra) {
        edges.push((a, b, *caps.choose(rng).unwrap()));
    }
    edges.shuffle(rng);
    edges
}

pub fn random_topology(seed: u64, max_nodes: u32, max_extra: usize, caps: &[u64]) -> Topology {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_nodes);
    let extra = r.gen_range(0..=max_extra);
    build(n, &random_edges(&mut r, n, extra, caps))
}

/// Connected components by depth-first search over the given links.
pub fn reachable(topology: &Topology, from: NodeId, usable: impl Fn(LinkId) -> bool) -> Vec<NodeId> {
    let mut seen = vec![from];
    let mut stack = vec![from];
    while let Some(n) = stack.pop() {
        for l in topology.links() {
            if !usable(l.id) {
                continue;
            }
            if let Some(m) = l.peer(n) {
                if !seen.contains(&m) {
                    seen.push(m);
                    stack.push(m);
                }
            }
        }
    }
    seen.sort();
    seen
}

pub mod invariants {
    use std::collections::{BTreeMap, BTreeSet};

    use gospf::engine::{
        run_with, write_event_log, write_metrics_csv, EngineConfig, LinkFailure, RunOptions,
        Scenario,
    };
    use gospf::gospf::EventKind;
    use gospf::graph::{compute_mcst, compute_mcst_over, is_connected, ActiveLinkSet, Topology};
    use gospf::traffic::{Flow, FlowId, Protocol};
    use gospf::{LinkId, NodeId, SimTime};
    use rand::Rng;

    pub const CAPS: [u64; 4] = [10_000_000, 20_000_000, 50_000_000, 100_000_000];

    /// A random topology of up to `max_nodes` routers carrying stepped random flows, optionally
    /// losing one spanning-tree link whose removal keeps the network connected.
    pub fn random_scenario(seed: u64, max_nodes: u32, with_failure: bool) -> (Scenario, Option<LinkId>) {
        let mut r = super::rng(seed);
        let n = r.gen_range(3..=max_nodes);
        let extra = r.gen_range(1..=n as usize);
        let topology = super::build(n, &super::random_edges(&mut r, n, extra, &CAPS));
        let flows = (0..r.gen_range(1..=6))
            .map(|i| {
                let src = r.gen_range(0..n);
                let dst = (src + r.gen_range(1..n)) % n;
                Flow {
                    id: FlowId(i),
                    src: NodeId(src),
                    dst: NodeId(dst),
                    protocol: if r.gen_bool(0.5) { Protocol::Udp } else { Protocol::Tcp },
                    schedule: (0..6).map(|k| (5.0 * k as f64, r.gen_range(0.0..12e6f64).round())).collect(),
                }
            })
            .collect();
        let mut failed = None;
        if with_failure {
            let tree = compute_mcst(&topology).unwrap();
            let candidates: Vec<LinkId> = tree
                .links()
                .iter()
                .copied()
                .filter(|l| {
                    let rest: ActiveLinkSet = topology.link_ids().filter(|x| x != l).collect();
                    is_connected(&topology, &rest)
                })
                .collect();
            if !candidates.is_empty() {
                failed = Some(candidates[r.gen_range(0..candidates.len())]);
            }
        }
        let config = EngineConfig {
            horizon: Some(20.0),
            failures: failed.iter().map(|&link| LinkFailure { link, at: 4.1 }).collect(),
            ..EngineConfig::default()
        };
        (Scenario::new(topology, flows, config).unwrap(), failed)
    }

    fn tree_after(topology: &Topology, failed: &BTreeSet<LinkId>) -> BTreeSet<LinkId> {
        let surviving: ActiveLinkSet = topology.link_ids().filter(|l| !failed.contains(l)).collect();
        compute_mcst_over(topology, &surviving).unwrap().links().clone()
    }

    /// Checks every protocol invariant on one scenario; the error names the first violation.
    pub fn check(scenario: &Scenario) -> Result<(), String> {
        let options = RunOptions { record_windows: true, record_deliveries: true };
        let out = run_with(scenario, options).map_err(|e| e.to_string())?;
        let again = run_with(scenario, options).map_err(|e| e.to_string())?;
        let topology = scenario.topology.as_ref();
        let failures: BTreeSet<LinkId> = scenario.config.failures.iter().map(|f| f.link).collect();

        // determinism
        if write_metrics_csv(&out.metrics.rows) != write_metrics_csv(&again.metrics.rows)
            || write_event_log(&out.events) != write_event_log(&again.events)
        {
            return Err("two runs differ".into());
        }

        let original = compute_mcst(topology).unwrap().links().clone();
        let replacement = tree_after(topology, &failures);
        for w in &out.windows {
            // connectivity over the links that survive
            if !w.connected {
                return Err(format!("window {} is disconnected", w.index));
            }
            // tree links stay powered outside resets
            if !w.resetting {
                let tree = if w.failed.is_empty() { &original } else { &replacement };
                if let Some(l) = tree.iter().find(|l| !w.usable.contains(**l)) {
                    return Err(format!("tree link {l} is down in window {}", w.index));
                }
            }
            if w.quiesced && !w.views_agree {
                return Err(format!("views disagree in quiesced window {}", w.index));
            }
        }

        // a cut never follows a graft of the same link within the safeguard interval
        let safeguard = SimTime::from_secs(scenario.config.safeguard());
        let mut last_graft: BTreeMap<LinkId, SimTime> = BTreeMap::new();
        for e in &out.events {
            match e.kind {
                EventKind::Graft => {
                    last_graft.insert(e.link, e.time);
                }
                EventKind::Cut => {
                    if let Some(&g) = last_graft.get(&e.link) {
                        if e.time.0 < g.0 + safeguard.0 {
                            return Err(format!("link {} cut at {} after graft at {}", e.link, e.time, g));
                        }
                    }
                }
                _ => {}
            }
        }

        // each node acts on each flooded message once; without failures every node is reached
        let mut accepted: BTreeMap<(NodeId, u64), BTreeMap<NodeId, usize>> = BTreeMap::new();
        let mut copies: BTreeMap<(NodeId, u64), usize> = BTreeMap::new();
        for d in &out.deliveries {
            *copies.entry((d.origin, d.seq)).or_default() += 1;
            let per_node = accepted.entry((d.origin, d.seq)).or_default();
            *per_node.entry(d.node).or_default() += usize::from(d.accepted);
        }
        for (&(origin, seq), per_node) in &accepted {
            if per_node.get(&origin).copied().unwrap_or(0) != 0 {
                return Err(format!("origin {origin} accepted its own message {seq}"));
            }
            for n in topology.node_ids().filter(|&n| n != origin) {
                let count = per_node.get(&n).copied().unwrap_or(0);
                if count > 1 || (failures.is_empty() && count != 1) {
                    return Err(format!("node {n} accepted ({origin}, {seq}) {count} times"));
                }
            }
            if copies[&(origin, seq)] > 2 * topology.link_count() {
                return Err(format!("flood ({origin}, {seq}) sent {} copies", copies[&(origin, seq)]));
            }
        }

        // after a tree link fails every node settles on the tree of the surviving links
        if !failures.is_empty() {
            for (n, tree) in &out.trees {
                if tree.links() != &replacement || tree.len() + 1 != topology.node_count() {
                    return Err(format!("node {n} holds tree {:?}", tree.links()));
                }
            }
            if replacement.iter().any(|l| failures.contains(l)) {
                return Err("replacement tree uses the failed link".into());
            }
        }
        Ok(())
    }
}

/// Exhaustive reference for the network design problem.
pub mod cmnd {
    use std::collections::{BTreeMap, BTreeSet};

    use gospf::graph::{PowerRating, Topology};
    use gospf::oracle::{CmndInstance, Demand};
    use gospf::traffic::DirectedHop;
    use gospf::{LinkId, NodeId};
    use rand::Rng;

    use super::{build, random_edges, rng};

    pub fn all_paths(t: &Topology, s: NodeId, d: NodeId) -> Vec<Vec<DirectedHop>> {
        fn go(t: &Topology, at: NodeId, d: NodeId, seen: &mut Vec<NodeId>, path: &mut Vec<DirectedHop>, out: &mut Vec<Vec<DirectedHop>>) {
            if at == d {
                out.push(path.clone());
                return;
            }
            for l in t.links() {
                if let Some(m) = l.peer(at) {
                    if !seen.contains(&m) {
                        seen.push(m);
                        path.push(DirectedHop { link: l.id, from: at, to: m });
                        go(t, m, d, seen, path, out);
                        path.pop();
                        seen.pop();
                    }
                }
            }
        }
        let mut out = Vec::new();
        go(t, s, d, &mut vec![s], &mut Vec::new(), &mut out);
        out
    }

    /// Every combination of simple paths, powering exactly the links used; capacity checked as
    /// `load * 5 <= 4 * capacity` for alpha 0.8.
    pub fn brute_force(inst: &CmndInstance) -> Option<f64> {
        let options: Vec<Vec<Vec<DirectedHop>>> = inst
            .demands
            .iter()
            .map(|d| if d.bps == 0 { vec![Vec::new()] } else { all_paths(&inst.topology, d.src, d.dst) })
            .collect();
        let mut best: Option<f64> = None;
        let mut pick = vec![0usize; options.len()];
        if options.iter().any(|o| o.is_empty()) {
            return None;
        }
        loop {
            let mut load: BTreeMap<(LinkId, NodeId), u128> = BTreeMap::new();
            let mut used = BTreeSet::new();
            let mut routing = 0u128;
            for (k, d) in inst.demands.iter().enumerate() {
                for h in &options[k][pick[k]] {
                    *load.entry((h.link, h.from)).or_default() += d.bps as u128;
                    used.insert(h.link);
                    routing += inst.cost[&h.link] as u128 * d.bps as u128;
                }
            }
            let fits = load
                .iter()
                .all(|((l, _), v)| v * 5 <= 4 * inst.topology.link(*l).unwrap().capacity as u128);
            if fits {
                let power = used.iter().fold(0.0, |acc, l| acc + inst.power[l]);
                let total = power + routing as f64;
                if best.is_none_or(|b| total < b) {
                    best = Some(total);
                }
            }
            // next combination
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return best;
                }
                pick[k] += 1;
                if pick[k] < options[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    /// Small capacities and costs so that power, routing and capacity all bind.
    pub fn random_instance(seed: u64, max_nodes: u32, max_links: usize, max_demands: usize, periods: u32) -> CmndInstance {
        let mut r = rng(seed);
        let n = r.gen_range(2..=max_nodes);
        let max_extra = max_links.saturating_sub(n as usize - 1);
        let extra = r.gen_range(0..=max_extra);
        let t = build(n, &random_edges(&mut r, n, extra, &[20, 40, 100]));
        let demands = (0..r.gen_range(1..=max_demands))
            .map(|_| {
                let src = r.gen_range(0..n);
                let dst = (src + r.gen_range(1..n)) % n;
                Demand { src: NodeId(src), dst: NodeId(dst), bps: r.gen_range(0..=30), period: r.gen_range(0..periods) }
            })
            .collect();
        let mut inst = CmndInstance::new(t, demands, 0.8, PowerRating::default(), 100).unwrap();
        for p in inst.power.values_mut() {
            *p = r.gen_range(0..200) as f64;
        }
        inst
    }
}
