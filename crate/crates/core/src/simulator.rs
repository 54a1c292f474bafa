//! Single-copy store-carry-forward replay of one message.

use crate::scenario::{NodeId, Scenario, WindowId};
use crate::time::Time;
use crate::twig::{Goal, SplitId, Twig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopRecord {
    pub node: NodeId,
    pub reception_time: Time,
    /// Split window that carried the packet to `node`; `None` for the source.
    pub window: Option<SplitId>,
    pub send_time_of_prev: Option<Time>,
}

/// What a malicious holder did with the packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelayEvent {
    pub node: NodeId,
    /// Index in `PacketTrace::hops` of the holder's own record.
    pub hop_index: usize,
    pub delay: Time,
    /// When a benign holder would have sent.
    pub planned_send: Time,
    pub actual_send: Time,
    /// The planned window closed before the delayed transmission could finish.
    pub missed_window: bool,
    /// Graph weight from the holder's vertex to the destination had it
    /// forwarded benignly.
    pub planned_weight: Time,
    /// Graph weight from the same vertex along the delayed transmission and
    /// the best continuation afterwards; `None` if the destination is no
    /// longer reachable.
    pub realized_weight: Option<Time>,
}

impl DelayEvent {
    /// The delay made the followed path heavier than the benign one.
    pub fn forced_miss(&self) -> bool {
        self.realized_weight.is_none_or(|w| w > self.planned_weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PacketTrace {
    pub source: NodeId,
    pub destination: NodeId,
    pub hops: Vec<HopRecord>,
    pub delivered: bool,
    pub physical_arrival: Option<Time>,
    pub delays: Vec<DelayEvent>,
}

impl PacketTrace {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.hops.iter().map(|h| h.node).collect()
    }

    pub fn reception_time(&self, node: NodeId) -> Option<Time> {
        self.hops.iter().find(|h| h.node == node).map(|h| h.reception_time)
    }

    /// Malicious nodes that actually held the message.
    pub fn engaged(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.delays.iter().map(|d| d.node).collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Next transmission a benign node holding the message at `now` would
/// make: the first hop of the cheapest route that is still usable.
pub fn benign_next_hop(s: &Scenario, g: &Twig, holder: NodeId, now: Time) -> Option<(NodeId, SplitId)> {
    if holder == s.destination {
        return None;
    }
    let start = g.start_vertex(holder)?;
    let plan = g.timed_route(start, now, Goal::Node(s.destination))?;
    let (_, to) = g.first_hop(&plan.vertices)?;
    let v = g.vertices()[to];
    Some((v.node, v.window))
}

struct Send {
    from_vertex: usize,
    piece: SplitId,
    at: Time,
}

/// Replays the message from the source at its creation time.
///
/// Each holder plans the cheapest usable route to the destination from
/// the vertex it received on. Benign holders send in the route's first
/// window as soon as it is open. A holder with delay `ε > 0` sends `ε`
/// later; if that no longer fits in the window it falls back to its next
/// window with anyone that opens no earlier than the planned one and can
/// still fit the delayed transmission. The run ends on delivery or when
/// the holder has nothing usable left.
pub fn simulate(s: &Scenario, g: &Twig) -> PacketTrace {
    let t_tr = s.t_tr;
    let mut trace = PacketTrace {
        source: s.source,
        destination: s.destination,
        hops: vec![HopRecord {
            node: s.source,
            reception_time: s.creation_time,
            window: None,
            send_time_of_prev: None,
        }],
        delivered: false,
        physical_arrival: None,
        delays: Vec::new(),
    };
    let Some(mut at) = g.start_vertex(s.source) else {
        return trace;
    };
    let mut holder = s.source;
    let mut now = s.creation_time;

    while holder != s.destination {
        let Some(plan) = g.timed_route(at, now, Goal::Node(s.destination)) else {
            break;
        };
        let (from_vertex, _) = g.first_hop(&plan.vertices).expect("plan leaves the holder");
        let piece = g.window_of(from_vertex);
        let planned = now.max(piece.start);
        let delay = s.attack.delay_of(holder).filter(|d| *d > Time::ZERO);

        let send = match delay {
            None => Some(Send {
                from_vertex,
                piece: piece.id,
                at: planned,
            }),
            Some(eps) => {
                let wid = piece.id.wid;
                let end = g.original(wid).expect("split window has a parent").end;
                let (send, missed) = if planned + eps + t_tr <= end {
                    (Some((wid, planned + eps)), false)
                } else {
                    (retarget(s, g, holder, wid, now, eps), true)
                };
                let send = send.map(|(wid, t)| {
                    let id = g.piece_at(wid, t).expect("send instant lies in its window");
                    let v = g
                        .vertices_of(holder)
                        .iter()
                        .copied()
                        .find(|&v| g.vertices()[v].window == id)
                        .expect("holder is an endpoint");
                    Send {
                        from_vertex: v,
                        piece: id,
                        at: t,
                    }
                });
                let realized_weight = send.as_ref().and_then(|snd| realized(s, g, at, snd));
                trace.delays.push(DelayEvent {
                    node: holder,
                    hop_index: trace.hops.len() - 1,
                    delay: eps,
                    planned_send: planned,
                    actual_send: send.as_ref().map_or(planned + eps, |x| x.at),
                    missed_window: missed,
                    planned_weight: plan.weight,
                    realized_weight,
                });
                send
            }
        };
        let Some(send) = send else { break };

        let w = g.split_window(send.piece).unwrap();
        let next = if w.a == holder { w.b } else { w.a };
        now = send.at + t_tr;
        at = g
            .vertex_index(&crate::twig::TwigVertex {
                node: next,
                window: send.piece,
            })
            .unwrap();
        holder = next;
        trace.hops.push(HopRecord {
            node: next,
            reception_time: now,
            window: Some(send.piece),
            send_time_of_prev: Some(send.at),
        });
    }

    if holder == s.destination {
        trace.delivered = true;
        trace.physical_arrival = Some(now);
    }
    trace
}

/// The attacker's fallback after missing window `missed`: the earliest
/// other window of its own, opening no earlier than the missed one, that
/// can still carry the delayed transmission.
fn retarget(
    s: &Scenario,
    g: &Twig,
    holder: NodeId,
    missed: WindowId,
    now: Time,
    eps: Time,
) -> Option<(WindowId, Time)> {
    let missed_start = g.original(missed)?.start;
    let mut candidates: Vec<_> = g
        .original_windows()
        .iter()
        .filter(|w| w.involves(holder) && w.wid != missed && w.start >= missed_start)
        .collect();
    candidates.sort_by_key(|w| (w.start, w.end, w.wid));
    candidates.into_iter().find_map(|w| {
        let send = w.start.max(now) + eps;
        (send + s.t_tr <= w.end).then_some((w.wid, send))
    })
}

/// Weight from the holder's vertex along the actual transmission and the
/// cheapest continuation from the receiver.
fn realized(s: &Scenario, g: &Twig, at: usize, send: &Send) -> Option<Time> {
    let lead = g.connector(at, send.from_vertex)?;
    let w = g.window_of(send.from_vertex);
    let holder = g.vertices()[send.from_vertex].node;
    let next = if w.a == holder { w.b } else { w.a };
    let recv = g.vertex_index(&crate::twig::TwigVertex {
        node: next,
        window: send.piece,
    })?;
    let rest = g.timed_route(recv, send.at + s.t_tr, Goal::Node(s.destination))?;
    Some(lead.weight + s.t_tr + rest.weight)
}
