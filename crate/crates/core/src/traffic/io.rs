use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{Flow, FlowId, Protocol};
use crate::error::{content_lines, parse_field, ParseError};
use crate::types::NodeId;

/// Parses the traffic format:
///
/// ```text
/// flow <id> <src> <dst> <udp|tcp>
/// rate <flow_id> <t_seconds> <bps>
/// ```
///
/// A `rate` line must follow its flow's declaration; rates of one flow must be in strictly
/// increasing time order.
pub fn parse_traffic(text: &str) -> Result<Vec<Flow>, ParseError> {
    let mut flows: BTreeMap<FlowId, Flow> = BTreeMap::new();
    for (line, content) in content_lines(text) {
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "flow" => {
                if fields.len() != 5 {
                    return Err(ParseError::new(line, "expected `flow <id> <src> <dst> <udp|tcp>`"));
                }
                let id = FlowId(parse_field(line, "flow id", fields[1])?);
                let src = NodeId(parse_field(line, "node id", fields[2])?);
                let dst = NodeId(parse_field(line, "node id", fields[3])?);
                let protocol: Protocol = fields[4]
                    .parse()
                    .map_err(|e: String| ParseError::new(line, e))?;
                if src == dst {
                    return Err(ParseError::new(line, format!("flow {id} has src == dst")));
                }
                if flows.contains_key(&id) {
                    return Err(ParseError::new(line, format!("duplicate flow id {id}")));
                }
                flows.insert(
                    id,
                    Flow {
                        id,
                        src,
                        dst,
                        protocol,
                        schedule: Vec::new(),
                    },
                );
            }
            "rate" => {
                if fields.len() != 4 {
                    return Err(ParseError::new(line, "expected `rate <flow_id> <t_seconds> <bps>`"));
                }
                let id = FlowId(parse_field(line, "flow id", fields[1])?);
                let t: f64 = parse_field(line, "time", fields[2])?;
                let bps: f64 = parse_field(line, "rate", fields[3])?;
                if !t.is_finite() || t < 0.0 {
                    return Err(ParseError::new(line, "time must be finite and >= 0"));
                }
                if !bps.is_finite() || bps < 0.0 {
                    return Err(ParseError::new(line, "rate must be finite and >= 0"));
                }
                let flow = flows
                    .get_mut(&id)
                    .ok_or_else(|| ParseError::new(line, format!("rate for undeclared flow {id}")))?;
                if flow.schedule.last().is_some_and(|&(prev, _)| prev >= t) {
                    return Err(ParseError::new(
                        line,
                        format!("breakpoints of flow {id} must be strictly increasing"),
                    ));
                }
                flow.schedule.push((t, bps));
            }
            other => return Err(ParseError::new(line, format!("unknown line kind '{other}'"))),
        }
    }
    Ok(flows.into_values().collect())
}

/// Writes flows in the format read by [`parse_traffic`]: all declarations first, then rates.
pub fn write_traffic(flows: &[Flow]) -> String {
    let mut out = String::new();
    for f in flows {
        writeln!(out, "flow {} {} {} {}", f.id, f.src, f.dst, f.protocol).unwrap();
    }
    for f in flows {
        for &(t, bps) in &f.schedule {
            writeln!(out, "rate {} {} {}", f.id, t, bps).unwrap();
        }
    }
    out
}
