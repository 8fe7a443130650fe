//! Energy-aware OSPF: spanning-tree constrained link sleeping, a deterministic fluid simulator
//! to evaluate it, and an exact solver for small network design instances.

pub mod cli;
pub mod energy;
pub mod engine;
pub mod error;
pub mod gospf;
pub mod graph;
pub mod oracle;
pub mod scenarios;
pub mod traffic;
pub mod types;

pub use error::ParseError;
pub use types::{LinkId, NodeId, SimTime};
