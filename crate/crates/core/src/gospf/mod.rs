//! The distributed cut/graft state machine run by every router.
//!
//! A node cuts an underutilized off-tree interface and floods an LSCUP; a node with an
//! overloaded interface floods an LSGUP restoring the nearest row of previously cut links,
//! escalating one row further on each congested tick. Failure of a spanning-tree link floods a
//! RESET that wakes everything until a new tree is computed.

mod matrix;
mod message;
mod node;

pub use matrix::SwitchedOffMatrix;
pub use message::{ControlMessage, EventKind, MessageKind, Payload, ProtocolEvent, Transmission};
pub use node::{Effects, GospfNode, Interface, ProtocolConfig, Timer, Transition};
