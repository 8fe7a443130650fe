use std::fmt;

use crate::types::{LinkId, NodeId, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MessageKind {
    /// Link State Cut Update Packet.
    Lscup,
    /// Link State Graft Update Packet.
    Lsgup,
    /// Plain link-state advertisement; here only used to announce a failed link.
    Lsa,
    Reset,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Payload {
    /// The link to put to sleep.
    Cut(LinkId),
    /// The links to restore.
    Graft(Vec<LinkId>),
    LinkDown(LinkId),
    /// The failed spanning-tree link that triggered the reset.
    Reset(LinkId),
}

impl Payload {
    pub fn links(&self) -> &[LinkId] {
        match self {
            Payload::Cut(l) | Payload::LinkDown(l) | Payload::Reset(l) => std::slice::from_ref(l),
            Payload::Graft(ls) => ls,
        }
    }
}

/// A flooded control message. `(origin, seq)` is unique network-wide.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ControlMessage {
    pub origin: NodeId,
    pub seq: u64,
    /// Origination time, carried like an LSA age so every receiver can date the message.
    pub sent: SimTime,
    pub payload: Payload,
}

impl ControlMessage {
    pub fn kind(&self) -> MessageKind {
        match self.payload {
            Payload::Cut(_) => MessageKind::Lscup,
            Payload::Graft(_) => MessageKind::Lsgup,
            Payload::LinkDown(_) => MessageKind::Lsa,
            Payload::Reset(_) => MessageKind::Reset,
        }
    }

    pub fn id(&self) -> (NodeId, u64) {
        (self.origin, self.seq)
    }
}

/// One copy of a message put on a link.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub link: LinkId,
    pub to: NodeId,
    pub msg: ControlMessage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Cut,
    Graft,
    Reset,
    Wake,
    Sleep,
    Flood,
    CongestionUnresolved,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Cut => "CUT",
            EventKind::Graft => "GRAFT",
            EventKind::Reset => "RESET",
            EventKind::Wake => "WAKE",
            EventKind::Sleep => "SLEEP",
            EventKind::Flood => "FLOOD",
            EventKind::CongestionUnresolved => "CONGESTION_UNRESOLVED",
        }
    }

    pub fn parse(s: &str) -> Option<EventKind> {
        Some(match s {
            "CUT" => EventKind::Cut,
            "GRAFT" => EventKind::Graft,
            "RESET" => EventKind::Reset,
            "WAKE" => EventKind::Wake,
            "SLEEP" => EventKind::Sleep,
            "FLOOD" => EventKind::Flood,
            "CONGESTION_UNRESOLVED" => EventKind::CongestionUnresolved,
            _ => return None,
        })
    }
}

/// One line of the protocol event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProtocolEvent {
    pub time: SimTime,
    pub node: NodeId,
    pub kind: EventKind,
    pub link: LinkId,
    pub seq: u64,
}

impl fmt::Display for ProtocolEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={} node={} event={} link={} seq={}",
            self.time,
            self.node,
            self.kind.as_str(),
            self.link,
            self.seq
        )
    }
}

impl ProtocolEvent {
    /// Parses one log line as written by `Display`.
    pub fn parse(line: &str) -> Option<ProtocolEvent> {
        let mut fields = line.split_whitespace();
        let mut next = |key: &str| fields.next()?.strip_prefix(key)?.strip_prefix('=');
        let t = next("t")?;
        let (secs, nanos) = t.split_once('.')?;
        if nanos.len() != 9 {
            return None;
        }
        let time = SimTime(secs.parse::<u64>().ok()? * 1_000_000_000 + nanos.parse::<u64>().ok()?);
        let node = NodeId(next("node")?.parse().ok()?);
        let kind = EventKind::parse(next("event")?)?;
        let link = LinkId(next("link")?.parse().ok()?);
        let seq = next("seq")?.parse().ok()?;
        Some(ProtocolEvent {
            time,
            node,
            kind,
            link,
            seq,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn event_line_format_round_trips() {
        let e = ProtocolEvent {
            time: SimTime(1_200_000_000),
            node: NodeId(3),
            kind: EventKind::CongestionUnresolved,
            link: LinkId(12),
            seq: 7,
        };
        let line = e.to_string();
        assert_eq!(line, "t=1.200000000 node=3 event=CONGESTION_UNRESOLVED link=12 seq=7");
        assert_eq!(ProtocolEvent::parse(&line), Some(e));
        assert_eq!(ProtocolEvent::parse("t=1.2 node=3 event=CUT link=1 seq=1"), None);
    }
}
