use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{Arc, Twig, TwigPath, TwigVertex};
use crate::error::Result;
use crate::scenario::NodeId;
use crate::time::Time;

/// A path given as vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    pub vertices: Vec<usize>,
    pub weight: Time,
}

/// A route found by the time-aware search, with the time the packet is
/// held at the last vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimedRoute {
    pub vertices: Vec<usize>,
    pub weight: Time,
    pub arrival: Time,
}

impl TimedRoute {
    pub fn route(&self) -> Route {
        Route {
            vertices: self.vertices.clone(),
            weight: self.weight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    /// Any vertex of the node.
    Node(NodeId),
    /// One vertex, optionally reached no later than `deadline`.
    Vertex { index: usize, deadline: Option<Time> },
}

/// Search label ordered by (weight, hops, vertex sequence). Vertex indices
/// follow `(node, window)` order, so comparing index sequences compares
/// vertex sequences lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Label {
    weight: Time,
    path: Vec<usize>,
    time: Time,
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .cmp(&other.weight)
            .then(self.path.len().cmp(&other.path.len()))
            .then_with(|| self.path.cmp(&other.path))
            .then(self.time.cmp(&other.time))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Twig {
    /// Minimum-weight path from `from` to any vertex of `to_node`, ties
    /// broken by fewer hops and then the smaller vertex sequence. `Ok(None)`
    /// means unreachable; an unknown `from` is an error.
    pub fn shortest_path(&self, from: &TwigVertex, to_node: NodeId) -> Result<Option<TwigPath>> {
        let start = self.require(from)?;
        Ok(self
            .shortest_route(start, to_node)
            .map(|r| self.to_path(&r.vertices, r.weight)))
    }

    /// Index-level [`Twig::shortest_path`].
    pub fn shortest_route(&self, from: usize, to_node: NodeId) -> Option<Route> {
        self.untimed(from, |v| self.vertices[v].node == to_node, |_| true)
    }

    /// Cheapest path from `from` to `to` using only waiting edges of one node.
    pub fn connector(&self, from: usize, to: usize) -> Option<Route> {
        self.untimed(from, |v| v == to, |a| !a.cross)
    }

    fn untimed(&self, from: usize, target: impl Fn(usize) -> bool, usable: impl Fn(&Arc) -> bool) -> Option<Route> {
        let mut settled = vec![false; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Label {
            weight: Time::ZERO,
            path: vec![from],
            time: Time::ZERO,
        }));
        while let Some(Reverse(label)) = heap.pop() {
            let v = *label.path.last().unwrap();
            if settled[v] {
                continue;
            }
            settled[v] = true;
            if target(v) {
                return Some(Route {
                    vertices: label.path,
                    weight: label.weight,
                });
            }
            for arc in self.arcs(v).iter().filter(|a| usable(a)) {
                if settled[arc.to] {
                    continue;
                }
                let mut path = label.path.clone();
                path.push(arc.to);
                heap.push(Reverse(Label {
                    weight: label.weight + arc.weight,
                    path,
                    time: Time::ZERO,
                }));
            }
        }
        None
    }

    /// Where a packet held at `time` can go next over the arc `v -> arc.to`:
    /// waiting edges keep the time; a transmission must start inside the
    /// split window and finish before its original window closes.
    pub(crate) fn advance(&self, v: usize, arc: &Arc, time: Time) -> Option<Time> {
        if !arc.cross {
            return Some(time);
        }
        let p = self.vertex_split[v];
        let w = &self.split[p];
        let send = time.max(w.start);
        (send < w.end && send + self.t_tr <= self.parent_end[p]).then_some(send + self.t_tr)
    }

    /// Minimum-weight path from a packet held at vertex `from` at `t0`,
    /// using only transmissions that are still possible at the time the
    /// packet reaches them. Same ordering and tie-breaks as
    /// [`Twig::shortest_path`].
    ///
    /// A state (vertex, time) is dropped once an earlier-or-equal time has
    /// been settled at that vertex, since it can do nothing the settled one
    /// cannot.
    pub fn timed_route(&self, from: usize, t0: Time, goal: Goal) -> Option<TimedRoute> {
        let reached = |v: usize, t: Time| match goal {
            Goal::Node(n) => self.vertices[v].node == n,
            Goal::Vertex { index, deadline } => v == index && deadline.is_none_or(|d| t <= d),
        };
        let mut best: Vec<Option<Time>> = vec![None; self.vertices.len()];
        let mut heap = BinaryHeap::new();
        heap.push(Reverse(Label {
            weight: Time::ZERO,
            path: vec![from],
            time: t0,
        }));
        while let Some(Reverse(label)) = heap.pop() {
            let v = *label.path.last().unwrap();
            if best[v].is_some_and(|b| b <= label.time) {
                continue;
            }
            best[v] = Some(label.time);
            if reached(v, label.time) {
                return Some(TimedRoute {
                    vertices: label.path,
                    weight: label.weight,
                    arrival: label.time,
                });
            }
            for arc in self.arcs(v) {
                let Some(t) = self.advance(v, arc, label.time) else {
                    continue;
                };
                if best[arc.to].is_some_and(|b| b <= t) {
                    continue;
                }
                let mut path = label.path.clone();
                path.push(arc.to);
                heap.push(Reverse(Label {
                    weight: label.weight + arc.weight,
                    path,
                    time: t,
                }));
            }
        }
        None
    }

    /// First transmission on a route: the sending vertex and the receiving
    /// vertex.
    pub fn first_hop(&self, route: &[usize]) -> Option<(usize, usize)> {
        route
            .windows(2)
            .find(|p| self.vertices[p[0]].node != self.vertices[p[1]].node)
            .map(|p| (p[0], p[1]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TimeWindow;
    use crate::twig::SplitId;

    fn s(x: i64) -> Time {
        Time::from_secs(x)
    }

    #[test]
    fn timed_route_skips_closed_windows() {
        // 0-1 early, 1-2 early and late: holding at 1 after the early window
        // has closed forces the late one.
        let g = Twig::build(
            &[
                TimeWindow::new(1, 0, 1, s(0), s(5)),
                TimeWindow::new(2, 1, 2, s(1), s(4)),
                TimeWindow::new(3, 1, 2, s(20), s(30)),
            ],
            s(1),
        );
        let v1 = g.vertex_index(&TwigVertex::new(1, SplitId::whole(1))).unwrap();
        let early = g.timed_route(v1, s(3), Goal::Node(NodeId(2))).unwrap();
        assert_eq!(early.arrival, s(4));
        let late = g
            .timed_route(v1, s(3) + Time::from_micros(1), Goal::Node(NodeId(2)))
            .unwrap();
        assert_eq!(late.arrival, s(21));
        assert_eq!(g.vertices()[*late.vertices.last().unwrap()].window, SplitId::whole(3));
        assert!(g.timed_route(v1, s(30), Goal::Node(NodeId(2))).is_none());
    }

    #[test]
    fn deadline_limits_vertex_goal() {
        let g = Twig::build(&[TimeWindow::new(1, 0, 1, s(0), s(5))], s(1));
        let v0 = g.vertex_index(&TwigVertex::new(0, SplitId::whole(1))).unwrap();
        let v1 = g.vertex_index(&TwigVertex::new(1, SplitId::whole(1))).unwrap();
        assert!(g
            .timed_route(
                v0,
                s(2),
                Goal::Vertex {
                    index: v1,
                    deadline: Some(s(3))
                }
            )
            .is_some());
        assert!(g
            .timed_route(
                v0,
                s(3),
                Goal::Vertex {
                    index: v1,
                    deadline: Some(s(3))
                }
            )
            .is_none());
    }

    #[test]
    fn unknown_start_vertex_is_error() {
        let g = Twig::build(&[TimeWindow::new(1, 0, 1, s(0), s(5))], s(1));
        assert!(g
            .shortest_path(&TwigVertex::new(7, SplitId::whole(1)), NodeId(1))
            .is_err());
    }
}
