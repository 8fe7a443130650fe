//! Time-varying demands, fluid allocation onto routed paths, and synthetic traffic profiles.

mod allocate;
mod io;
pub mod profile;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::Topology;
use crate::types::NodeId;

pub use allocate::{
    allocate, route_flows, Allocation, DirectedHop, FlowOutcome, LinkDirection, LinkLoad,
};
pub use io::{parse_traffic, write_traffic};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("time {t} is outside the horizon [0, {horizon}]")]
    OutOfHorizon { t: f64, horizon: f64 },
    #[error("flow {0} has identical source and destination")]
    SelfFlow(FlowId),
    #[error("flow {0} has a negative or non-finite rate")]
    BadRate(FlowId),
    #[error("flow {0} has breakpoints that are not strictly increasing")]
    UnorderedBreakpoints(FlowId),
    #[error("duplicate flow id {0}")]
    DuplicateFlow(FlowId),
    #[error("flow {flow} references unknown node {node}")]
    UnknownNode { flow: FlowId, node: NodeId },
    #[error("horizon must be positive")]
    BadHorizon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowId(pub u32);

impl fmt::Display for FlowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Transport flavor. TCP flows add a connection-setup burst whenever their rate steps up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Udp,
    Tcp,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Udp => "udp",
            Protocol::Tcp => "tcp",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "udp" => Ok(Protocol::Udp),
            "tcp" => Ok(Protocol::Tcp),
            other => Err(format!("unknown protocol '{other}'")),
        }
    }
}

/// One demand `w_sd(t)`: a piecewise-constant rate schedule between two nodes. The rate is zero
/// before the first breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub id: FlowId,
    pub src: NodeId,
    pub dst: NodeId,
    pub protocol: Protocol,
    /// `(time_s, bits_per_second)` step changes, strictly increasing in time.
    pub schedule: Vec<(f64, f64)>,
}

impl Flow {
    pub fn validate(&self) -> Result<(), TrafficError> {
        if self.src == self.dst {
            return Err(TrafficError::SelfFlow(self.id));
        }
        if self
            .schedule
            .iter()
            .any(|&(t, r)| !(r >= 0.0) || !r.is_finite() || !t.is_finite())
        {
            return Err(TrafficError::BadRate(self.id));
        }
        if self.schedule.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TrafficError::UnorderedBreakpoints(self.id));
        }
        Ok(())
    }

    /// Base rate of the schedule at `t`.
    pub fn rate_at(&self, t: f64) -> f64 {
        match self.schedule.partition_point(|&(bt, _)| bt <= t) {
            0 => 0.0,
            i => self.schedule[i - 1].1,
        }
    }

    /// Breakpoint whose step is in force at `t`, and the rate before it.
    fn step_at(&self, t: f64) -> Option<(f64, f64, f64)> {
        let i = self.schedule.partition_point(|&(bt, _)| bt <= t);
        if i == 0 {
            return None;
        }
        let (bt, rate) = self.schedule[i - 1];
        let before = if i >= 2 { self.schedule[i - 2].1 } else { 0.0 };
        Some((bt, before, rate))
    }
}

/// Connection-setup overhead applied to TCP flows at every rate increase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TcpBurst {
    /// Extra rate as a fraction of the new rate.
    pub fraction: f64,
    /// Seconds the extra rate lasts.
    pub duration: f64,
}

impl Default for TcpBurst {
    fn default() -> Self {
        TcpBurst {
            fraction: 0.01,
            duration: 0.2,
        }
    }
}

/// Rate requested by one flow at an instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowDemand {
    pub flow: FlowId,
    pub src: NodeId,
    pub dst: NodeId,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrafficMatrix {
    flows: Vec<Flow>,
    horizon: f64,
    pub tcp_burst: TcpBurst,
}

impl TrafficMatrix {
    pub fn new(mut flows: Vec<Flow>, horizon: f64) -> Result<Self, TrafficError> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(TrafficError::BadHorizon);
        }
        flows.sort_by_key(|f| f.id);
        for w in flows.windows(2) {
            if w[0].id == w[1].id {
                return Err(TrafficError::DuplicateFlow(w[0].id));
            }
        }
        for f in &flows {
            f.validate()?;
        }
        Ok(TrafficMatrix {
            flows,
            horizon,
            tcp_burst: TcpBurst::default(),
        })
    }

    pub fn with_tcp_burst(mut self, burst: TcpBurst) -> Self {
        self.tcp_burst = burst;
        self
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Checks every endpoint exists in `topology`.
    pub fn validate_against(&self, topology: &Topology) -> Result<(), TrafficError> {
        for f in &self.flows {
            for node in [f.src, f.dst] {
                if topology.node(node).is_none() {
                    return Err(TrafficError::UnknownNode { flow: f.id, node });
                }
            }
        }
        Ok(())
    }

    /// Every flow's requested rate at `t`, in flow-id order.
    pub fn demand_at(&self, t: f64) -> Result<Vec<FlowDemand>, TrafficError> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(TrafficError::OutOfHorizon {
                t,
                horizon: self.horizon,
            });
        }
        Ok(self
            .flows
            .iter()
            .map(|f| {
                let mut rate = f.rate_at(t);
                if f.protocol == Protocol::Tcp {
                    if let Some((bt, before, after)) = f.step_at(t) {
                        if after > before && t < bt + self.tcp_burst.duration {
                            rate += self.tcp_burst.fraction * after;
                        }
                    }
                }
                FlowDemand {
                    flow: f.id,
                    src: f.src,
                    dst: f.dst,
                    rate,
                }
            })
            .collect())
    }

    /// Demands aggregated per `(source, destination)` pair.
    pub fn pair_demand_at(&self, t: f64) -> Result<BTreeMap<(NodeId, NodeId), f64>, TrafficError> {
        let mut out = BTreeMap::new();
        for d in self.demand_at(t)? {
            *out.entry((d.src, d.dst)).or_insert(0.0) += d.rate;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(id: u32, protocol: Protocol, schedule: Vec<(f64, f64)>) -> Flow {
        Flow {
            id: FlowId(id),
            src: NodeId(0),
            dst: NodeId(1),
            protocol,
            schedule,
        }
    }

    #[test]
    fn piecewise_constant_evaluation() {
        let m = TrafficMatrix::new(
            vec![
                flow(0, Protocol::Udp, vec![(0.0, 3e6), (10.0, 5e6)]),
                flow(1, Protocol::Udp, vec![(10.0, 1e6)]),
            ],
            100.0,
        )
        .unwrap();
        let d = m.demand_at(5.0).unwrap();
        assert_eq!(d[0].rate, 3e6);
        assert_eq!(d[1].rate, 0.0);
        let d = m.demand_at(10.0).unwrap();
        assert_eq!((d[0].rate, d[1].rate), (5e6, 1e6));
        assert!(matches!(
            m.demand_at(100.5),
            Err(TrafficError::OutOfHorizon { .. })
        ));
    }

    #[test]
    fn constant_flow() {
        let m = TrafficMatrix::new(vec![flow(0, Protocol::Udp, vec![(0.0, 3e6)])], 50.0).unwrap();
        for t in [0.0, 1.3, 49.9, 50.0] {
            assert_eq!(m.demand_at(t).unwrap()[0].rate, 3e6);
        }
    }

    #[test]
    fn tcp_bursts_only_on_increase() {
        let m = TrafficMatrix::new(
            vec![flow(0, Protocol::Tcp, vec![(0.0, 1e6), (10.0, 2e6), (20.0, 1e6)])],
            30.0,
        )
        .unwrap()
        .with_tcp_burst(TcpBurst {
            fraction: 0.1,
            duration: 0.5,
        });
        let at = |t| m.demand_at(t).unwrap()[0].rate;
        assert!((at(0.0) - 1.1e6).abs() < 1e-6);
        assert_eq!(at(0.5), 1e6);
        assert!((at(10.2) - 2.2e6).abs() < 1e-6);
        assert_eq!(at(20.0), 1e6);
    }

    #[test]
    fn validation() {
        let mut f = flow(0, Protocol::Udp, vec![(0.0, 1.0)]);
        f.dst = f.src;
        assert_eq!(f.validate(), Err(TrafficError::SelfFlow(FlowId(0))));
        let f = flow(0, Protocol::Udp, vec![(1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(f.validate(), Err(TrafficError::UnorderedBreakpoints(FlowId(0))));
        let f = flow(0, Protocol::Udp, vec![(1.0, -1.0)]);
        assert_eq!(f.validate(), Err(TrafficError::BadRate(FlowId(0))));
    }
}
