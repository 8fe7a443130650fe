use std::collections::{BTreeMap, BTreeSet};

use super::{CmndInstance, CmndSolution, Guardrail, OracleError};
use crate::traffic::DirectedHop;
use crate::types::{LinkId, NodeId};

/// A simple path with its link mask and cost per bit/s.
struct Candidate {
    mask: u64,
    hops: Vec<DirectedHop>,
    unit_cost: u128,
}

/// Every simple path from `src` to `dst`, cheapest first.
fn simple_paths(instance: &CmndInstance, index: &BTreeMap<LinkId, usize>, src: NodeId, dst: NodeId) -> Vec<Candidate> {
    fn walk(
        instance: &CmndInstance,
        index: &BTreeMap<LinkId, usize>,
        at: NodeId,
        dst: NodeId,
        visited: &mut BTreeSet<NodeId>,
        hops: &mut Vec<DirectedHop>,
        out: &mut Vec<Candidate>,
    ) {
        if at == dst {
            out.push(Candidate {
                mask: hops.iter().fold(0, |m, h| m | 1 << index[&h.link]),
                unit_cost: hops.iter().map(|h| instance.cost[&h.link] as u128).sum(),
                hops: hops.clone(),
            });
            return;
        }
        for &(next, link) in instance.topology.neighbors(at) {
            if visited.insert(next) {
                hops.push(DirectedHop { link, from: at, to: next });
                walk(instance, index, next, dst, visited, hops, out);
                hops.pop();
                visited.remove(&next);
            }
        }
    }
    let mut out = Vec::new();
    walk(instance, index, src, dst, &mut BTreeSet::from([src]), &mut Vec::new(), &mut out);
    out.sort_by_key(|c| c.unit_cost);
    out
}

struct Search<'a> {
    instance: &'a CmndInstance,
    /// Demands with positive rate, by position in the instance.
    demands: Vec<usize>,
    options: Vec<Vec<&'a Candidate>>,
    capacity: Vec<u64>,
    load: Vec<u128>,
    chosen: Vec<usize>,
    best: Option<(u128, Vec<usize>)>,
}

impl Search<'_> {
    fn direction(&self, h: &DirectedHop, index: &BTreeMap<LinkId, usize>) -> usize {
        let link = self.instance.topology.link(h.link).unwrap();
        2 * index[&h.link] + usize::from(h.from != link.a)
    }

    fn fits(&mut self, c: &Candidate, bps: u128, index: &BTreeMap<LinkId, usize>) -> bool {
        let dirs: Vec<usize> = c.hops.iter().map(|h| self.direction(h, index)).collect();
        if dirs.iter().all(|&d| self.instance.alpha.admits(self.load[d] + bps, self.capacity[d / 2])) {
            for d in dirs {
                self.load[d] += bps;
            }
            true
        } else {
            false
        }
    }

    fn release(&mut self, c: &Candidate, bps: u128, index: &BTreeMap<LinkId, usize>) {
        for h in &c.hops {
            let d = self.direction(h, index);
            self.load[d] -= bps;
        }
    }

    /// Branch and bound over path choices; `floor[k]` is the cheapest cost of demands `k..`.
    fn explore(&mut self, k: usize, cost: u128, floor: &[u128], index: &BTreeMap<LinkId, usize>) {
        if self.best.as_ref().is_some_and(|(b, _)| cost + floor[k] >= *b) {
            return;
        }
        if k == self.demands.len() {
            self.best = Some((cost, self.chosen.clone()));
            return;
        }
        let bps = self.instance.demands[self.demands[k]].bps as u128;
        for i in 0..self.options[k].len() {
            let c = self.options[k][i];
            let step = c.unit_cost * bps;
            if self.best.as_ref().is_some_and(|(b, _)| cost + step + floor[k + 1] >= *b) {
                break;
            }
            if self.fits(c, bps, index) {
                self.chosen.push(i);
                self.explore(k + 1, cost + step, floor, index);
                self.chosen.pop();
                self.release(c, bps, index);
            }
        }
    }
}

/// Global optimum over all link subsets with one path per demand.
///
/// Subsets are visited in increasing bitmask order, so every subset of a mask comes before it;
/// subsets whose power alone reaches the incumbent are skipped. For each remaining subset the
/// demands first take their cheapest paths; if that overloads a link, paths are enumerated with
/// branch and bound.
pub fn solve_static(instance: &CmndInstance, guardrail: Guardrail) -> Result<CmndSolution, OracleError> {
    let links: Vec<LinkId> = instance.topology.link_ids().collect();
    let demands: Vec<usize> = (0..instance.demands.len())
        .filter(|&i| instance.demands[i].bps > 0)
        .collect();
    guardrail.check(links.len(), demands.len())?;
    let index: BTreeMap<LinkId, usize> = links.iter().enumerate().map(|(i, l)| (*l, i)).collect();
    let capacity: Vec<u64> = links.iter().map(|l| instance.topology.link(*l).unwrap().capacity).collect();
    let power: Vec<f64> = links.iter().map(|l| instance.power[l]).collect();
    let candidates: Vec<Vec<Candidate>> = demands
        .iter()
        .map(|&i| simple_paths(instance, &index, instance.demands[i].src, instance.demands[i].dst))
        .collect();

    let mut best: Option<(f64, u64, Vec<usize>, u128)> = None;
    for mask in 0u64..1 << links.len() {
        let p = (0..links.len()).filter(|b| mask >> b & 1 == 1).fold(0.0, |acc, b| acc + power[b]);
        if best.as_ref().is_some_and(|b| p >= b.0) {
            continue;
        }
        let options: Vec<Vec<&Candidate>> = candidates
            .iter()
            .map(|cs| cs.iter().filter(|c| c.mask & !mask == 0).collect())
            .collect();
        if options.iter().any(|o| o.is_empty()) {
            continue;
        }
        let mut search = Search {
            instance,
            demands: demands.clone(),
            options,
            capacity: capacity.clone(),
            load: vec![0; 2 * links.len()],
            chosen: Vec::new(),
            best: None,
        };

        let greedy: Vec<&Candidate> = search.options.iter().map(|o| o[0]).collect();
        let mut fits = true;
        for (k, c) in greedy.iter().enumerate() {
            let bps = instance.demands[demands[k]].bps as u128;
            if !search.fits(c, bps, &index) {
                fits = false;
                break;
            }
        }
        let routed = if fits {
            let cost = greedy
                .iter()
                .zip(&demands)
                .map(|(c, &i)| c.unit_cost * instance.demands[i].bps as u128)
                .sum();
            Some((cost, vec![0; demands.len()]))
        } else {
            search.load.iter_mut().for_each(|l| *l = 0);
            let mut floor = vec![0u128; demands.len() + 1];
            for k in (0..demands.len()).rev() {
                floor[k] = floor[k + 1] + search.options[k][0].unit_cost * instance.demands[demands[k]].bps as u128;
            }
            search.explore(0, 0, &floor, &index);
            search.best.take()
        };
        let Some((routing, choice)) = routed else {
            continue;
        };
        let total = p + routing as f64;
        if best.as_ref().is_none_or(|b| total < b.0) {
            let picks = choice
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let c = search.options[k][i];
                    candidates[k].iter().position(|x| std::ptr::eq(x, c)).unwrap()
                })
                .collect();
            best = Some((total, mask, picks, routing));
        }
    }

    let (_, mask, picks, routing) = best.ok_or(OracleError::Infeasible)?;
    let active: BTreeSet<LinkId> = (0..links.len()).filter(|b| mask >> b & 1 == 1).map(|b| links[b]).collect();
    let mut paths = vec![Vec::new(); instance.demands.len()];
    for (k, &i) in demands.iter().enumerate() {
        paths[i] = candidates[k][picks[k]].hops.clone();
    }
    Ok(CmndSolution {
        power: instance.power_of(&active),
        active,
        paths,
        routing,
    })
}

/// Per-period optima of the time-expanded problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeExpandedSolution {
    pub periods: Vec<CmndSolution>,
}

impl TimeExpandedSolution {
    pub fn objective(&self) -> f64 {
        self.periods.iter().fold(0.0, |acc, p| acc + p.objective())
    }
}

/// Periods share no constraint, so the optimum is each period solved on its own.
pub fn solve_time_expanded(
    instance: &CmndInstance,
    guardrail: Guardrail,
) -> Result<TimeExpandedSolution, OracleError> {
    let periods = (0..instance.periods())
        .map(|t| solve_static(&instance.period(t), guardrail))
        .collect::<Result<_, _>>()?;
    Ok(TimeExpandedSolution { periods })
}
