//! Bundled scenarios: the 48-node research backbone and the six-node graft example.

use crate::engine::{parse_config, EngineConfig, EngineError, Mode, Scenario};
use crate::graph::{parse_topology, Topology};
use crate::traffic::profile::{generate, GeneratorConfig, ProfileKind, ProtocolMix};
use crate::traffic::{Flow, FlowId, Protocol};
use crate::types::{LinkId, NodeId};

pub const GARR48_TOPOLOGY: &str = include_str!("../data/garr48.topo");
pub const GARR48_CONFIG: &str = include_str!("../data/garr48.conf");

pub fn garr48() -> Topology {
    parse_topology(GARR48_TOPOLOGY).expect("bundled topology parses")
}

pub fn garr48_config() -> EngineConfig {
    parse_config(GARR48_CONFIG).expect("bundled config parses")
}

/// Seventeen generated flows peaking at 40% utilization.
pub fn garr48_traffic(kind: ProfileKind, protocol: ProtocolMix) -> Vec<Flow> {
    let cfg = GeneratorConfig {
        kind,
        protocol,
        reference_bandwidth: garr48_config().reference_bandwidth,
        ..GeneratorConfig::default()
    };
    generate(&garr48(), &cfg).expect("default generator settings are valid")
}

pub fn garr48_scenario(kind: ProfileKind, protocol: ProtocolMix, mode: Mode) -> Scenario {
    let config = EngineConfig {
        mode,
        ..garr48_config()
    };
    Scenario::new(garr48(), garr48_traffic(kind, protocol), config)
        .expect("bundled scenario is valid")
}

pub const SIX_ROUTER_TOPOLOGY: &str = include_str!("../data/six_router.topo");
pub const SIX_ROUTER_TRAFFIC: &str = include_str!("../data/six_router.traffic");

/// Node ids of the six-node example.
pub mod six_router_nodes {
    use crate::types::NodeId;
    pub const A: NodeId = NodeId(0);
    pub const B: NodeId = NodeId(1);
    pub const C: NodeId = NodeId(2);
    pub const D: NodeId = NodeId(3);
    pub const E: NodeId = NodeId(4);
    pub const F: NodeId = NodeId(5);
}

/// Six routers whose spanning tree funnels two flows through B-C until C-A is restored.
pub fn six_router(mode: Mode) -> Result<Scenario, EngineError> {
    let topology = parse_topology(SIX_ROUTER_TOPOLOGY).expect("bundled topology parses");
    let flows = crate::traffic::parse_traffic(SIX_ROUTER_TRAFFIC).expect("bundled traffic parses");
    let config = EngineConfig {
        mode,
        horizon: Some(20.0),
        ..EngineConfig::default()
    };
    Scenario::new(topology, flows, config)
}

/// A single constant-rate flow.
pub fn constant_flow(id: u32, src: NodeId, dst: NodeId, bps: f64) -> Flow {
    Flow {
        id: FlowId(id),
        src,
        dst,
        protocol: Protocol::Udp,
        schedule: vec![(0.0, bps)],
    }
}

pub fn link_named(topology: &Topology, a: &str, b: &str) -> Option<LinkId> {
    topology.link_between(topology.find_node(a)?, topology.find_node(b)?)
}
