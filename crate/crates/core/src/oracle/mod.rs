//! Exact capacitated multicommodity network design on small instances.
//!
//! The solver picks the set of powered links and one path per demand that minimize link power
//! plus routing cost, subject to every direction of every powered link carrying at most
//! `alpha` of its capacity. Capacity comparisons use integer arithmetic.

mod gap;
mod solve;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::engine::{EngineConfig, EngineError};
use crate::error::{content_lines, parse_field, ParseError};
use crate::graph::{ospf_cost, parse_topology_with, write_topology, PowerRating, Topology};
use crate::traffic::DirectedHop;
use crate::types::{LinkId, NodeId};

pub use gap::{heuristic_gap, parse_gap_csv, write_gap_csv, GapRow, GAP_HEADER};
pub use solve::{solve_static, solve_time_expanded, TimeExpandedSolution};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("no link subset can carry the demands")]
    Infeasible,
    #[error(
        "instance too large for exact search: {links} links and {demands} demands \
         (limits {max_links} links, {max_demands} demands)"
    )]
    InstanceTooLarge {
        links: usize,
        demands: usize,
        max_links: usize,
        max_demands: usize,
    },
    #[error("alpha must be a decimal in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("demand {0} references an unknown node or has identical endpoints")]
    BadDemand(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Guardrail {
    pub max_links: usize,
    pub max_demands: usize,
}

impl Default for Guardrail {
    fn default() -> Self {
        Guardrail {
            max_links: 20,
            max_demands: 8,
        }
    }
}

impl Guardrail {
    pub fn check(&self, links: usize, demands: usize) -> Result<(), OracleError> {
        if links > self.max_links || demands > self.max_demands {
            return Err(OracleError::InstanceTooLarge {
                links,
                demands,
                max_links: self.max_links,
                max_demands: self.max_demands,
            });
        }
        Ok(())
    }
}

/// Maximum tolerated utilization as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alpha {
    num: u64,
    den: u64,
}

impl Alpha {
    pub fn new(num: u64, den: u64) -> Result<Alpha, OracleError> {
        if num == 0 || den == 0 || num > den {
            return Err(OracleError::BadAlpha(num as f64 / den.max(1) as f64));
        }
        Ok(Alpha { num, den })
    }

    /// Converts the shortest decimal form of `value` exactly, so `0.8` becomes `4/5`.
    pub fn from_f64(value: f64) -> Result<Alpha, OracleError> {
        if !(value > 0.0 && value <= 1.0) {
            return Err(OracleError::BadAlpha(value));
        }
        let text = value.to_string();
        let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
        if frac.len() > 18 {
            return Err(OracleError::BadAlpha(value));
        }
        let den = 10u64.pow(frac.len() as u32);
        let num = int.parse::<u64>().unwrap() * den + frac.parse::<u64>().unwrap_or(0);
        let g = gcd(num, den);
        Alpha::new(num / g, den / g)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Whether `load` bit/s fits in `alpha * capacity`.
    pub fn admits(&self, load: u128, capacity: u64) -> bool {
        load * self.den as u128 <= self.num as u128 * capacity as u128
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One demand `w_sd` in bit/s, assigned to a period of the time-expanded problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Demand {
    pub src: NodeId,
    pub dst: NodeId,
    pub bps: u64,
    pub period: u32,
}

/// Rounds a fluid rate up to whole bits per second.
pub fn demand_bps(rate: f64) -> u64 {
    rate.max(0.0).ceil() as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmndInstance {
    pub topology: Topology,
    pub demands: Vec<Demand>,
    pub alpha: Alpha,
    /// Routing cost per bit/s on each link.
    pub cost: BTreeMap<LinkId, u64>,
    /// Power drawn by a powered link, both interfaces included.
    pub power: BTreeMap<LinkId, f64>,
}

impl CmndInstance {
    /// Costs are the OSPF link costs and link power is twice the active interface power.
    pub fn new(
        topology: Topology,
        demands: Vec<Demand>,
        alpha: f64,
        default_power: PowerRating,
        reference_bandwidth: u64,
    ) -> Result<CmndInstance, OracleError> {
        let alpha = Alpha::from_f64(alpha)?;
        for (i, d) in demands.iter().enumerate() {
            if d.src == d.dst || topology.node(d.src).is_none() || topology.node(d.dst).is_none() {
                return Err(OracleError::BadDemand(i));
            }
        }
        let cost = topology
            .links()
            .iter()
            .map(|l| (l.id, ospf_cost(l.capacity, reference_bandwidth)))
            .collect();
        let power = topology
            .links()
            .iter()
            .map(|l| (l.id, 2.0 * l.power.unwrap_or(default_power).p_active))
            .collect();
        Ok(CmndInstance {
            topology,
            demands,
            alpha,
            cost,
            power,
        })
    }

    /// Number of periods: one more than the largest period index, or zero without demands.
    pub fn periods(&self) -> u32 {
        self.demands.iter().map(|d| d.period + 1).max().unwrap_or(0)
    }

    /// The demands of one period as a static instance.
    pub fn period(&self, period: u32) -> CmndInstance {
        CmndInstance {
            demands: self
                .demands
                .iter()
                .filter(|d| d.period == period)
                .map(|d| Demand { period: 0, ..*d })
                .collect(),
            ..self.clone()
        }
    }

    /// Power of a link set, summed in link id order.
    pub fn power_of(&self, links: &BTreeSet<LinkId>) -> f64 {
        links.iter().fold(0.0, |acc, l| acc + self.power[l])
    }
}

/// Active links and one path per demand (empty for zero demands), in demand order.
#[derive(Debug, Clone, PartialEq)]
pub struct CmndSolution {
    pub active: BTreeSet<LinkId>,
    pub paths: Vec<Vec<DirectedHop>>,
    pub power: f64,
    pub routing: u128,
}

impl CmndSolution {
    pub fn objective(&self) -> f64 {
        self.power + self.routing as f64
    }
}

/// Why a set of links and paths violates the model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("demand {0} has no path")]
    Missing(usize),
    #[error("path of demand {0} does not lead from its source to its destination")]
    Broken(usize),
    #[error("demand {demand} uses unpowered link {link}")]
    Inactive { demand: usize, link: LinkId },
    #[error("link {link} from node {from} carries {load} bit/s over the allowed share")]
    OverCapacity { link: LinkId, from: NodeId, load: u128 },
}

/// Checks flow conservation along each path, that paths use powered links only, and the
/// per-direction capacity bound.
pub fn check_feasibility(
    instance: &CmndInstance,
    active: &BTreeSet<LinkId>,
    paths: &[Vec<DirectedHop>],
) -> Result<(), Violation> {
    let mut load: BTreeMap<(LinkId, NodeId), u128> = BTreeMap::new();
    for (i, d) in instance.demands.iter().enumerate() {
        if d.bps == 0 {
            continue;
        }
        let path = paths.get(i).ok_or(Violation::Missing(i))?;
        if path.is_empty() {
            return Err(Violation::Missing(i));
        }
        let mut at = d.src;
        let mut seen = BTreeSet::from([at]);
        for hop in path {
            let link = instance.topology.link(hop.link).ok_or(Violation::Broken(i))?;
            if hop.from != at || link.peer(at) != Some(hop.to) || !seen.insert(hop.to) {
                return Err(Violation::Broken(i));
            }
            if !active.contains(&hop.link) {
                return Err(Violation::Inactive { demand: i, link: hop.link });
            }
            *load.entry((hop.link, hop.from)).or_insert(0) += d.bps as u128;
            at = hop.to;
        }
        if at != d.dst {
            return Err(Violation::Broken(i));
        }
    }
    for ((link, from), l) in load {
        let capacity = instance.topology.link(link).unwrap().capacity;
        if !instance.alpha.admits(l, capacity) {
            return Err(Violation::OverCapacity { link, from, load: l });
        }
    }
    Ok(())
}

/// Reads a topology file extended with `demand <src> <dst> <bps> [<period>]` lines. Alpha, power
/// defaults and the cost reference come from `config`.
pub fn parse_instance(text: &str, config: &EngineConfig) -> Result<CmndInstance, ParseError> {
    let topology = parse_topology_with(text, &["demand"])?;
    let mut demands = Vec::new();
    let mut lines = Vec::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields[0] != "demand" {
            continue;
        }
        if fields.len() != 4 && fields.len() != 5 {
            return Err(ParseError::new(line, "expected `demand <src> <dst> <bps> [<period>]`"));
        }
        let bps: f64 = parse_field(line, "rate", fields[3])?;
        if !(bps >= 0.0 && bps.is_finite()) {
            return Err(ParseError::new(line, format!("invalid rate '{}'", fields[3])));
        }
        demands.push(Demand {
            src: NodeId(parse_field(line, "node id", fields[1])?),
            dst: NodeId(parse_field(line, "node id", fields[2])?),
            bps: demand_bps(bps),
            period: match fields.get(4) {
                Some(p) => parse_field(line, "period", p)?,
                None => 0,
            },
        });
        lines.push(line);
    }
    CmndInstance::new(topology, demands, config.alpha, config.power, config.reference_bandwidth)
        .map_err(|e| match e {
            OracleError::BadDemand(i) => ParseError::new(lines[i], e.to_string()),
            other => ParseError::new(0, other.to_string()),
        })
}

pub fn write_instance(instance: &CmndInstance) -> String {
    let mut out = write_topology(&instance.topology);
    for d in &instance.demands {
        writeln!(out, "demand {} {} {} {}", d.src, d.dst, d.bps, d.period).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_util::topo;

    fn hop(link: u32, from: u32, to: u32) -> DirectedHop {
        DirectedHop {
            link: LinkId(link),
            from: NodeId(from),
            to: NodeId(to),
        }
    }

    #[test]
    fn alpha_is_exact() {
        let a = Alpha::from_f64(0.8).unwrap();
        assert_eq!(a.to_string(), "4/5");
        assert!(a.admits(80, 100));
        assert!(!a.admits(81, 100));
        assert_eq!(Alpha::from_f64(1.0).unwrap().to_string(), "1/1");
        assert!(Alpha::from_f64(0.0).is_err());
        assert!(Alpha::from_f64(1.5).is_err());
    }

    #[test]
    fn feasibility_violations() {
        let t = topo(3, &[(0, 0, 1, 100), (1, 1, 2, 100)]);
        let d = |bps| Demand { src: NodeId(0), dst: NodeId(2), bps, period: 0 };
        let inst = CmndInstance::new(t, vec![d(80)], 0.8, PowerRating::default(), 100).unwrap();
        let all: BTreeSet<LinkId> = [LinkId(0), LinkId(1)].into();
        let path = vec![vec![hop(0, 0, 1), hop(1, 1, 2)]];
        assert_eq!(check_feasibility(&inst, &all, &path), Ok(()));
        assert_eq!(
            check_feasibility(&inst, &[LinkId(0)].into(), &path),
            Err(Violation::Inactive { demand: 0, link: LinkId(1) })
        );
        assert_eq!(check_feasibility(&inst, &all, &[vec![hop(0, 0, 1)]]), Err(Violation::Broken(0)));
        assert_eq!(check_feasibility(&inst, &all, &[]), Err(Violation::Missing(0)));
        let heavy = CmndInstance { demands: vec![d(81)], ..inst };
        assert!(matches!(
            check_feasibility(&heavy, &all, &path),
            Err(Violation::OverCapacity { load: 81, .. })
        ));
    }

    #[test]
    fn instance_round_trip() {
        let text = "node 0 a\nnode 1 b\nlink 0 0 1 1000\ndemand 0 1 250.5 3\ndemand 1 0 10\n";
        let inst = parse_instance(text, &EngineConfig::default()).unwrap();
        assert_eq!(inst.demands[0].bps, 251);
        assert_eq!(inst.periods(), 4);
        assert_eq!(inst.power[&LinkId(0)], 2.0);
        assert_eq!(parse_instance(&write_instance(&inst), &EngineConfig::default()).unwrap(), inst);
        let err = parse_instance("node 0 a\nnode 1 b\nlink 0 0 1 10\ndemand 0 0 5\n", &EngineConfig::default());
        assert_eq!(err.unwrap_err().line, 4);
    }
}
