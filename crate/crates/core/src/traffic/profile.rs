//! Synthetic daily and weekly demand profiles.
//!
//! A simulated day is compressed into `day_length` seconds. The daily shape sits at a night
//! floor around 04:00, rises along a half cosine to a plateau between 12:00 and 15:00, and
//! decays back over the evening and night. The weekly profile repeats the day seven times and
//! attenuates Saturday and Sunday.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Flow, FlowId, Protocol};
use crate::graph::{shortest_paths, ActiveLinkSet, Topology};
use crate::types::{LinkId, NodeId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("flow count must be at least 1")]
    NoFlows,
    #[error("peak utilization must be in (0, 1], got {0}")]
    BadPeak(f64),
    #[error("day length must be positive")]
    BadDayLength,
    #[error("steps per day must be at least 1")]
    BadSteps,
    #[error("fluctuation must be in [0, 1) with a positive period")]
    BadFluctuation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Daily,
    Weekly,
}

impl FromStr for ProfileKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "daily" => Ok(ProfileKind::Daily),
            "weekly" => Ok(ProfileKind::Weekly),
            other => Err(format!("unknown profile kind '{other}' (expected daily|weekly)")),
        }
    }
}

/// Which transport flavor generated flows get.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolMix {
    Udp,
    Tcp,
    /// Even flow indices UDP, odd ones TCP.
    Mixed,
}

impl FromStr for ProtocolMix {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "udp" => Ok(ProtocolMix::Udp),
            "tcp" => Ok(ProtocolMix::Tcp),
            "mixed" => Ok(ProtocolMix::Mixed),
            other => Err(format!("unknown protocol mix '{other}' (expected udp|tcp|mixed)")),
        }
    }
}

pub const NIGHT_FLOOR: f64 = 0.15;
const WEEKEND_FACTORS: [f64; 7] = [1.0, 1.0, 1.0, 1.0, 1.0, 0.55, 0.45];

/// Relative demand at `hour` in `[0, 24)`, between [`NIGHT_FLOOR`] and 1.
pub fn daily_shape(hour: f64) -> f64 {
    let h = hour.rem_euclid(24.0);
    let s = if (4.0..12.0).contains(&h) {
        0.5 * (1.0 - (std::f64::consts::PI * (h - 4.0) / 8.0).cos())
    } else if (12.0..=15.0).contains(&h) {
        1.0
    } else {
        let since_peak = if h > 15.0 { h - 15.0 } else { h + 9.0 };
        0.5 * (1.0 + (std::f64::consts::PI * since_peak / 13.0).cos())
    };
    NIGHT_FLOOR + (1.0 - NIGHT_FLOOR) * s
}

/// Day-of-week factor, Monday = 0.
pub fn weekday_factor(day: usize) -> f64 {
    WEEKEND_FACTORS[day % 7]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub kind: ProfileKind,
    pub flows: usize,
    /// Mean utilization of the links that carry traffic at the daily peak, with every link
    /// powered.
    pub peak_util: f64,
    pub protocol: ProtocolMix,
    /// Simulated seconds per day.
    pub day_length: f64,
    pub steps_per_day: usize,
    pub reference_bandwidth: u64,
    /// Relative amplitude of the seeded uniform noise multiplied onto every rate. Zero gives the
    /// smooth step profile. The default redraws faster than the sampling period, so a coarse
    /// sample averages the noise out while a fine one sees it.
    pub fluctuation: f64,
    /// Seconds between noise draws.
    pub fluctuation_period: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            kind: ProfileKind::Daily,
            flows: 17,
            peak_util: 0.4,
            protocol: ProtocolMix::Udp,
            day_length: 1440.0,
            steps_per_day: 96,
            reference_bandwidth: crate::graph::DEFAULT_REFERENCE_BANDWIDTH,
            fluctuation: 0.1,
            fluctuation_period: 0.05,
            seed: 1,
        }
    }
}

impl GeneratorConfig {
    pub fn horizon(&self) -> f64 {
        match self.kind {
            ProfileKind::Daily => self.day_length,
            ProfileKind::Weekly => 7.0 * self.day_length,
        }
    }
}

/// Picks `(src, dst)` pairs greedily so each new flow's full-topology route covers as many
/// not-yet-covered links as possible; once coverage stops growing, the least-loaded long routes
/// are used. Returns the chosen pairs with their routes.
pub fn place_flows(
    topology: &Topology,
    count: usize,
    reference_bandwidth: u64,
) -> Vec<((NodeId, NodeId), Vec<(LinkId, NodeId)>)> {
    let active = ActiveLinkSet::all(topology);
    let tables: BTreeMap<NodeId, _> = topology
        .node_ids()
        .map(|n| (n, shortest_paths(topology, &active, n, reference_bandwidth)))
        .collect();
    let mut candidates = Vec::new();
    for s in topology.node_ids() {
        for d in topology.node_ids() {
            if s == d {
                continue;
            }
            let nodes = tables[&s].path_to(d).expect("full topology is connected");
            let hops: Vec<(LinkId, NodeId)> = nodes
                .windows(2)
                .map(|w| (topology.link_between(w[0], w[1]).unwrap(), w[0]))
                .collect();
            candidates.push(((s, d), hops));
        }
    }

    let mut covered: BTreeSet<LinkId> = BTreeSet::new();
    let mut used: BTreeMap<(LinkId, NodeId), usize> = BTreeMap::new();
    let mut taken: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut chosen = Vec::new();
    for _ in 0..count {
        let best = candidates
            .iter()
            .filter(|(pair, _)| !taken.contains(pair))
            .max_by(|(pa, ha), (pb, hb)| {
                let gain = |h: &Vec<(LinkId, NodeId)>| h.iter().filter(|(l, _)| !covered.contains(l)).count();
                let crowd = |h: &Vec<(LinkId, NodeId)>| h.iter().map(|k| used.get(k).copied().unwrap_or(0)).max().unwrap_or(0);
                gain(ha)
                    .cmp(&gain(hb))
                    .then(crowd(hb).cmp(&crowd(ha)))
                    .then(ha.len().cmp(&hb.len()))
                    .then(pb.cmp(pa))
            });
        let Some((pair, hops)) = best.cloned() else {
            break;
        };
        taken.insert(pair);
        for &(l, from) in &hops {
            covered.insert(l);
            *used.entry((l, from)).or_insert(0) += 1;
        }
        chosen.push((pair, hops));
    }
    chosen
}

/// Generates flows with the configured profile shape.
///
/// Each flow first gets the tightest per-flow share of capacity along its route. All flows are
/// then scaled by one factor so that, at the daily peak with every link powered, the loaded links
/// average `peak_util` utilization (both directions counted).
pub fn generate(topology: &Topology, cfg: &GeneratorConfig) -> Result<Vec<Flow>, ProfileError> {
    if cfg.flows == 0 {
        return Err(ProfileError::NoFlows);
    }
    if !(cfg.peak_util > 0.0 && cfg.peak_util <= 1.0) {
        return Err(ProfileError::BadPeak(cfg.peak_util));
    }
    if !(cfg.day_length > 0.0) {
        return Err(ProfileError::BadDayLength);
    }
    if cfg.steps_per_day == 0 {
        return Err(ProfileError::BadSteps);
    }
    if !(0.0..1.0).contains(&cfg.fluctuation) || !(cfg.fluctuation_period > 0.0) {
        return Err(ProfileError::BadFluctuation);
    }

    let placed = place_flows(topology, cfg.flows, cfg.reference_bandwidth);
    let mut sharing: BTreeMap<(LinkId, NodeId), usize> = BTreeMap::new();
    for (_, hops) in &placed {
        for h in hops {
            *sharing.entry(*h).or_insert(0) += 1;
        }
    }

    let shares: Vec<f64> = placed
        .iter()
        .map(|(_, hops)| {
            hops.iter()
                .map(|h| topology.link(h.0).unwrap().capacity as f64 / sharing[h] as f64)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut load: BTreeMap<LinkId, f64> = BTreeMap::new();
    for ((_, hops), share) in placed.iter().zip(&shares) {
        for (l, _) in hops {
            *load.entry(*l).or_insert(0.0) += share;
        }
    }
    let mean = load
        .iter()
        .map(|(l, bits)| bits / topology.link(*l).unwrap().capacity as f64)
        .sum::<f64>()
        / load.len() as f64;
    let scale = cfg.peak_util / mean;

    let days = match cfg.kind {
        ProfileKind::Daily => 1,
        ProfileKind::Weekly => 7,
    };
    let step = cfg.day_length / cfg.steps_per_day as f64;
    let base_at = |t: f64| {
        let k = ((t / step).floor() as usize).min(days * cfg.steps_per_day - 1);
        let hour = 24.0 * (k % cfg.steps_per_day) as f64 / cfg.steps_per_day as f64;
        daily_shape(hour) * weekday_factor(k / cfg.steps_per_day)
    };
    let times: Vec<f64> = if cfg.fluctuation > 0.0 {
        let n = (days as f64 * cfg.day_length / cfg.fluctuation_period).ceil() as usize;
        (0..n).map(|k| k as f64 * cfg.fluctuation_period).collect()
    } else {
        (0..days * cfg.steps_per_day).map(|k| k as f64 * step).collect()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut flows = Vec::with_capacity(placed.len());
    for (i, ((src, dst), _)) in placed.iter().enumerate() {
        let peak = shares[i] * scale;
        let mut schedule: Vec<(f64, f64)> = Vec::with_capacity(times.len());
        for &t in &times {
            let noise = if cfg.fluctuation > 0.0 {
                1.0 + cfg.fluctuation * rng.gen_range(-1.0..=1.0)
            } else {
                1.0
            };
            let rate = (peak * base_at(t) * noise).round();
            if schedule.last().is_some_and(|&(_, r)| r == rate) {
                continue;
            }
            schedule.push((t, rate));
        }
        let protocol = match cfg.protocol {
            ProtocolMix::Udp => Protocol::Udp,
            ProtocolMix::Tcp => Protocol::Tcp,
            ProtocolMix::Mixed if i % 2 == 0 => Protocol::Udp,
            ProtocolMix::Mixed => Protocol::Tcp,
        };
        flows.push(Flow {
            id: FlowId(i as u32),
            src: *src,
            dst: *dst,
            protocol,
            schedule,
        });
    }
    Ok(flows)
}
