use serde::{Deserialize, Serialize};

use super::{Check, DetectionReport, Evidence, Mode, Verdict};
use crate::error::{Error, Result};
use crate::simulator::PacketTrace;
use crate::time::Time;
use crate::twig::{Goal, Twig};

/// How a relay's part of the followed path is judged.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalRule {
    /// Each relay's own hop plus the cheapest continuation from where the
    /// packet landed, against the cheapest path it had to the destination.
    #[default]
    PerHop,
    /// Each relay's stretch up to the most recently flagged node, against
    /// the cheapest path to that node. A flagged node becomes the new
    /// anchor.
    Anchored,
}

/// [`detect_global_with`] using [`GlobalRule::PerHop`].
pub fn detect_global(g: &Twig, trace: &PacketTrace) -> Result<DetectionReport> {
    detect_global_with(g, trace, GlobalRule::PerHop)
}

/// Flags relays whose part of the followed path is heavier than the
/// cheapest alternative they had at the time they held the packet.
///
/// If the whole followed path is as cheap as the best path from the
/// source, nothing is flagged. Otherwise nodes are examined from the last
/// relay back to the source.
pub fn detect_global_with(g: &Twig, trace: &PacketTrace, rule: GlobalRule) -> Result<DetectionReport> {
    if !trace.delivered {
        return Err(Error::Undelivered);
    }
    let fp = g.embed(trace)?;
    let last = trace.hops.len() - 1;
    // Cheapest usable weight to the destination from each reception.
    let to_go_from = |i: usize| {
        if i == last {
            return Some(Time::ZERO);
        }
        g.timed_route(
            fp.receive_vertex(i),
            trace.hops[i].reception_time,
            Goal::Node(trace.destination),
        )
        .map(|r| r.weight)
    };

    let mut report = DetectionReport::new(Mode::Global, None);
    report.followed_weight = Some(fp.weight());
    report.shortest_weight = to_go_from(0);
    if report.shortest_weight == Some(fp.weight()) {
        return Ok(report);
    }
    let to_go: Vec<_> = (0..=last).map(to_go_from).collect();

    let mut anchor_node = trace.destination;
    let mut anchor_goal = Goal::Node(trace.destination);
    let mut anchor_pos = fp.positions[last];
    for i in (0..last).rev() {
        let hop = &trace.hops[i];
        let pos = fp.positions[i];
        let (followed, shortest) = match rule {
            GlobalRule::PerHop => {
                let next = fp.positions[i + 1];
                match to_go[i + 1] {
                    Some(rest) => (fp.segment_weight(pos, next) + rest, to_go[i]),
                    None => (fp.segment_weight(pos, next), None),
                }
            }
            GlobalRule::Anchored => {
                let shortest = if anchor_node == trace.destination {
                    to_go[i]
                } else {
                    g.timed_route(fp.vertices[pos], hop.reception_time, anchor_goal)
                        .map(|r| r.weight)
                };
                (fp.segment_weight(pos, anchor_pos), shortest)
            }
        };
        let verdict = match shortest {
            None => Verdict::Inconclusive,
            Some(w) if followed > w => Verdict::Malicious,
            Some(_) => Verdict::Benign,
        };
        report.record(Check {
            node: hop.node,
            observer: None,
            verdict,
            evidence: Evidence::PathWeight {
                anchor: anchor_node,
                followed,
                shortest,
            },
        });
        if rule == GlobalRule::Anchored && verdict == Verdict::Malicious {
            anchor_node = hop.node;
            anchor_goal = Goal::Vertex {
                index: fp.vertices[pos],
                deadline: Some(hop.reception_time),
            };
            anchor_pos = pos;
        }
    }
    Ok(report)
}
