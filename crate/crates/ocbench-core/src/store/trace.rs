use serde::{Deserialize, Serialize};

use super::tally::{OpTally, RestOpKind};

/// One store API call, as observed by the meter.
///
/// `length` carries the payload size for PUT/GET/COPY (the bytes the tally
/// charged for that call), the object length for HEAD hits, and the number of
/// entries returned for container listings. `src` is set only for copies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub tick: u64,
    pub kind: RestOpKind,
    pub container: String,
    pub name: String,
    pub length: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub src: Option<String>,
}

impl TraceEvent {
    /// Wire-style rendering, `PUT /res/data.txt/_SUCCESS`.
    pub fn render(&self) -> String {
        format!("{} /{}/{}", self.kind.verb(), self.container, self.name)
    }
}

/// Rebuild the REST-derived tally columns from a trace.
///
/// Replays counts for every kind and byte totals for PUT/GET/COPY.
/// `peak_staged` is client-side state and cannot be recovered from REST
/// traffic, so it is left at zero.
pub fn replay_tally(events: &[TraceEvent]) -> OpTally {
    let mut tally = OpTally::new();
    for ev in events {
        tally.record(ev.kind);
        match ev.kind {
            RestOpKind::PutObject => tally.bytes_put += ev.length,
            RestOpKind::GetObject => tally.bytes_got += ev.length,
            RestOpKind::CopyObject => tally.bytes_copied += ev.length,
            _ => {}
        }
    }
    tally
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_matches_wire_form() {
        let ev = TraceEvent {
            tick: 3,
            kind: RestOpKind::PutObject,
            container: "res".into(),
            name: "data.txt/_SUCCESS".into(),
            length: 0,
            src: None,
        };
        assert_eq!(ev.render(), "PUT /res/data.txt/_SUCCESS");
    }

    #[test]
    fn serde_round_trip_preserves_fields() {
        let ev = TraceEvent {
            tick: 7,
            kind: RestOpKind::CopyObject,
            container: "res".into(),
            name: "data.txt/part-00000".into(),
            length: 42,
            src: Some("data.txt/_temporary/0/x".into()),
        };
        let line = serde_json::to_string(&ev).unwrap();
        let back: TraceEvent = serde_json::from_str(&line).unwrap();
        assert_eq!(back, ev);
    }
}
