use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{Link, Node, PowerRating, Topology};
use crate::error::{content_lines, parse_field, ParseError};
use crate::types::{LinkId, NodeId};

/// Parses the topology format:
///
/// ```text
/// node <id> <name>
/// link <id> <nodeA> <nodeB> <capacity_bps> [<P_active> <P_idle> <P_sleep> <E_c>]
/// ```
///
/// The four power fields are optional as a group; when absent the scenario defaults apply.
pub fn parse_topology(text: &str) -> Result<Topology, ParseError> {
    parse_topology_with(text, &[])
}

/// Like [`parse_topology`] but skips lines whose keyword is in `other_kinds`, so formats that
/// embed a topology (oracle instances) can share the parser.
pub(crate) fn parse_topology_with(text: &str, other_kinds: &[&str]) -> Result<Topology, ParseError> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut node_ids = BTreeSet::new();
    let mut link_ids = BTreeSet::new();
    let mut last_line = 0;

    for (line, content) in content_lines(text) {
        last_line = line;
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields[0] {
            "node" => {
                if fields.len() != 3 {
                    return Err(ParseError::new(line, "expected `node <id> <name>`"));
                }
                let id = NodeId(parse_field(line, "node id", fields[1])?);
                if !node_ids.insert(id) {
                    return Err(ParseError::new(line, format!("duplicate node id {id}")));
                }
                nodes.push(Node {
                    id,
                    name: fields[2].to_string(),
                });
            }
            "link" => {
                if fields.len() != 5 && fields.len() != 9 {
                    return Err(ParseError::new(
                        line,
                        "expected `link <id> <a> <b> <capacity_bps> [<P_active> <P_idle> <P_sleep> <E_c>]`",
                    ));
                }
                let id = LinkId(parse_field(line, "link id", fields[1])?);
                if !link_ids.insert(id) {
                    return Err(ParseError::new(line, format!("duplicate link id {id}")));
                }
                let a = NodeId(parse_field(line, "node id", fields[2])?);
                let b = NodeId(parse_field(line, "node id", fields[3])?);
                for end in [a, b] {
                    if !node_ids.contains(&end) {
                        return Err(ParseError::new(
                            line,
                            format!("link {id} references unknown node {end}"),
                        ));
                    }
                }
                let capacity: i128 = parse_field(line, "capacity", fields[4])?;
                if capacity <= 0 {
                    return Err(ParseError::new(
                        line,
                        format!("link {id} has non-positive capacity {capacity}"),
                    ));
                }
                let capacity = u64::try_from(capacity)
                    .map_err(|_| ParseError::new(line, "capacity out of range"))?;
                let power = if fields.len() == 9 {
                    let p: Vec<f64> = fields[5..9]
                        .iter()
                        .map(|f| parse_field::<f64>(line, "power value", f))
                        .collect::<Result<_, _>>()?;
                    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                        return Err(ParseError::new(line, "power values must be finite and >= 0"));
                    }
                    Some(PowerRating {
                        p_active: p[0],
                        p_idle: p[1],
                        p_sleep: p[2],
                        e_c: p[3],
                    })
                } else {
                    None
                };
                links.push(Link {
                    id,
                    a,
                    b,
                    capacity,
                    power,
                });
            }
            kind if other_kinds.contains(&kind) => {}
            kind => return Err(ParseError::new(line, format!("unknown line kind '{kind}'"))),
        }
    }
    Topology::new(nodes, links).map_err(|e| ParseError::new(last_line, e.to_string()))
}

/// Writes a topology in the format read by [`parse_topology`].
pub fn write_topology(topology: &Topology) -> String {
    let mut out = String::new();
    for n in topology.nodes() {
        writeln!(out, "node {} {}", n.id, n.name).unwrap();
    }
    for l in topology.links() {
        write!(out, "link {} {} {} {}", l.id, l.a, l.b, l.capacity).unwrap();
        if let Some(p) = l.power {
            write!(out, " {} {} {} {}", p.p_active, p.p_idle, p.p_sleep, p.e_c).unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "# two routers\nnode 0 A\nnode 1 B  # trailing comment\n\nlink 0 0 1 1000 1 0.8 0.016 0.5\n";

    #[test]
    fn parses_and_round_trips() {
        let t = parse_topology(SMALL).unwrap();
        assert_eq!(t.node_count(), 2);
        let l = t.link(LinkId(0)).unwrap();
        assert_eq!(l.capacity, 1000);
        assert_eq!(l.power.unwrap().e_c, 0.5);
        assert_eq!(parse_topology(&write_topology(&t)).unwrap(), t);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_topology("node 0 A\nnode 1 B\nlink 0 0 1 fast\n").unwrap_err();
        assert_eq!(err.line, 3);
        let err = parse_topology("node 0 A\nnode 0 B\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_topology("node 0 A\nnode 1 B\nlink 0 0 7 10\n").unwrap_err();
        assert!(err.message.contains("unknown node 7"));
        let err = parse_topology("node 0 A\nnode 1 B\nlink 0 0 1 0\n").unwrap_err();
        assert!(err.message.contains("non-positive"));
        let err = parse_topology("node 0 A\nnode 1 B\nlink 0 0 1 -5\n").unwrap_err();
        assert!(err.message.contains("non-positive"));
    }

    #[test]
    fn rejects_disconnected() {
        let err = parse_topology("node 0 A\nnode 1 B\nnode 2 C\nlink 0 0 1 10\n").unwrap_err();
        assert!(err.message.contains("not connected"));
    }
}
