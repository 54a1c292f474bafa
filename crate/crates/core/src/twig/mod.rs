//! The time-window graph: one vertex per (node, window) after splitting
//! partially overlapping windows, joined by transmission edges inside a
//! window and by waiting edges between windows of the same node.

mod embed;
mod path;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{NodeId, TimeWindow, WindowId};
use crate::time::Time;

pub use embed::Embedding;
pub use path::{Goal, Route, TimedRoute};

/// Identifies a window after splitting: the original wid plus a piece
/// number. Unsplit windows have part 0 and print as the bare wid; pieces
/// are numbered from 1 in time order and print as `wid.part`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitId {
    pub wid: WindowId,
    pub part: u32,
}

impl SplitId {
    pub fn whole(wid: u32) -> Self {
        SplitId {
            wid: WindowId(wid),
            part: 0,
        }
    }

    pub fn piece(wid: u32, part: u32) -> Self {
        SplitId {
            wid: WindowId(wid),
            part,
        }
    }
}

impl fmt::Display for SplitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.part == 0 {
            write!(f, "{}", self.wid)
        } else {
            write!(f, "{}.{}", self.wid, self.part)
        }
    }
}

impl FromStr for SplitId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownVertex(s.to_string());
        let (w, p) = match s.split_once('.') {
            Some((w, p)) => (w, p.parse().map_err(|_| bad())?),
            None => (s, 0),
        };
        Ok(SplitId {
            wid: WindowId(w.parse().map_err(|_| bad())?),
            part: p,
        })
    }
}

impl Serialize for SplitId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SplitId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A window after splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitWindow {
    pub id: SplitId,
    pub a: NodeId,
    pub b: NodeId,
    pub start: Time,
    pub end: Time,
}

impl SplitWindow {
    pub fn involves(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }

    pub fn contains(&self, t: Time) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwigVertex {
    pub node: NodeId,
    pub window: SplitId,
}

impl TwigVertex {
    pub fn new(node: u32, window: SplitId) -> Self {
        TwigVertex {
            node: NodeId(node),
            window,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Undirected,
    Directed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeOrigin {
    WithinWindow,
    Succession,
    Containment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwigEdge {
    pub u: TwigVertex,
    pub v: TwigVertex,
    pub kind: EdgeKind,
    pub weight: Time,
    pub origin: EdgeOrigin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwigPath {
    pub vertices: Vec<TwigVertex>,
    pub total_weight: Time,
}

#[derive(Debug, Clone, Copy)]
struct EdgeRec {
    u: usize,
    v: usize,
    kind: EdgeKind,
    weight: Time,
    origin: EdgeOrigin,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Arc {
    pub to: usize,
    pub weight: Time,
    /// Transmission between the two endpoints of one split window.
    pub cross: bool,
}

#[derive(Debug, Clone)]
pub struct Twig {
    t_tr: Time,
    originals: Vec<TimeWindow>,
    split: Vec<SplitWindow>,
    /// End of the original window each split window came from.
    parent_end: Vec<Time>,
    vertices: Vec<TwigVertex>,
    vertex_split: Vec<usize>,
    index: BTreeMap<TwigVertex, usize>,
    by_node: BTreeMap<NodeId, Vec<usize>>,
    edges: Vec<EdgeRec>,
    adj: Vec<Vec<Arc>>,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    wid: WindowId,
    a: NodeId,
    b: NodeId,
    start: Time,
    end: Time,
}

/// Splits until no pair partially overlaps. The scan restarts from the top
/// after every split; the resulting pieces depend on that order.
fn split_all(mut ws: Vec<Piece>) -> Vec<Piece> {
    'scan: loop {
        for i in 0..ws.len() {
            for j in 0..ws.len() {
                let (wi, wj) = (ws[i], ws[j]);
                if wi.start < wj.start && wj.start < wi.end && wi.end < wj.end {
                    let i_parts = [Piece { end: wj.start, ..wi }, Piece { start: wj.start, ..wi }];
                    let j_parts = [Piece { end: wi.end, ..wj }, Piece { start: wi.end, ..wj }];
                    if i < j {
                        ws.splice(j..=j, j_parts);
                        ws.splice(i..=i, i_parts);
                    } else {
                        ws.splice(i..=i, i_parts);
                        ws.splice(j..=j, j_parts);
                    }
                    continue 'scan;
                }
            }
        }
        return ws;
    }
}

impl Twig {
    pub fn build(windows: &[TimeWindow], t_tr: Time) -> Twig {
        let mut originals = windows.to_vec();
        originals.sort_by_key(|w| w.wid);

        let pieces = split_all(
            originals
                .iter()
                .map(|w| Piece {
                    wid: w.wid,
                    a: w.a,
                    b: w.b,
                    start: w.start,
                    end: w.end,
                })
                .collect(),
        );
        let mut groups: BTreeMap<WindowId, Vec<Piece>> = BTreeMap::new();
        for p in pieces {
            groups.entry(p.wid).or_default().push(p);
        }
        let mut split = Vec::new();
        let mut parent_end = Vec::new();
        for (wid, mut group) in groups {
            group.sort_by_key(|p| p.start);
            let whole = group.len() == 1;
            let end = group.last().unwrap().end;
            for (k, p) in group.into_iter().enumerate() {
                let part = if whole { 0 } else { k as u32 + 1 };
                split.push(SplitWindow {
                    id: SplitId { wid, part },
                    a: p.a,
                    b: p.b,
                    start: p.start,
                    end: p.end,
                });
                parent_end.push(end);
            }
        }

        let mut tagged: Vec<(TwigVertex, usize)> = split
            .iter()
            .enumerate()
            .flat_map(|(i, w)| {
                [
                    (
                        TwigVertex {
                            node: w.a,
                            window: w.id,
                        },
                        i,
                    ),
                    (
                        TwigVertex {
                            node: w.b,
                            window: w.id,
                        },
                        i,
                    ),
                ]
            })
            .collect();
        tagged.sort();
        let vertices: Vec<TwigVertex> = tagged.iter().map(|t| t.0).collect();
        let vertex_split: Vec<usize> = tagged.iter().map(|t| t.1).collect();
        let index: BTreeMap<TwigVertex, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut by_node: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            by_node.entry(v.node).or_default().push(i);
        }

        let mut edges = Vec::new();
        for w in &split {
            let u = index[&TwigVertex {
                node: w.a,
                window: w.id,
            }];
            let v = index[&TwigVertex {
                node: w.b,
                window: w.id,
            }];
            edges.push(EdgeRec {
                u: u.min(v),
                v: u.max(v),
                kind: EdgeKind::Undirected,
                weight: t_tr,
                origin: EdgeOrigin::WithinWindow,
            });
        }
        for list in by_node.values() {
            for (x, &i) in list.iter().enumerate() {
                for &j in &list[x + 1..] {
                    let (wi, wj) = (&split[vertex_split[i]], &split[vertex_split[j]]);
                    let rec = if wi.end <= wj.start {
                        Some((i, j, EdgeKind::Directed, wj.start - wi.start, EdgeOrigin::Succession))
                    } else if wj.end <= wi.start {
                        Some((j, i, EdgeKind::Directed, wi.start - wj.start, EdgeOrigin::Succession))
                    } else if wi.start <= wj.start && wj.end <= wi.end {
                        Some((i, j, EdgeKind::Undirected, wj.start - wi.start, EdgeOrigin::Containment))
                    } else if wj.start <= wi.start && wi.end <= wj.end {
                        Some((i, j, EdgeKind::Undirected, wi.start - wj.start, EdgeOrigin::Containment))
                    } else {
                        None
                    };
                    if let Some((u, v, kind, weight, origin)) = rec {
                        edges.push(EdgeRec {
                            u,
                            v,
                            kind,
                            weight,
                            origin,
                        });
                    }
                }
            }
        }
        edges.sort_by_key(|e| (e.u, e.v, e.origin));

        let mut adj = vec![Vec::new(); vertices.len()];
        for e in &edges {
            let cross = e.origin == EdgeOrigin::WithinWindow;
            adj[e.u].push(Arc {
                to: e.v,
                weight: e.weight,
                cross,
            });
            if e.kind == EdgeKind::Undirected {
                adj[e.v].push(Arc {
                    to: e.u,
                    weight: e.weight,
                    cross,
                });
            }
        }
        for arcs in &mut adj {
            arcs.sort_by_key(|a| a.to);
        }

        Twig {
            t_tr,
            originals,
            split,
            parent_end,
            vertices,
            vertex_split,
            index,
            by_node,
            edges,
            adj,
        }
    }

    pub fn t_tr(&self) -> Time {
        self.t_tr
    }

    /// Input windows, sorted by wid.
    pub fn original_windows(&self) -> &[TimeWindow] {
        &self.originals
    }

    pub fn original(&self, wid: WindowId) -> Option<&TimeWindow> {
        self.originals
            .binary_search_by_key(&wid, |w| w.wid)
            .ok()
            .map(|i| &self.originals[i])
    }

    /// Post-split windows, sorted by id.
    pub fn split_windows(&self) -> &[SplitWindow] {
        &self.split
    }

    pub fn split_window(&self, id: SplitId) -> Option<&SplitWindow> {
        self.split_index(id).map(|i| &self.split[i])
    }

    pub(crate) fn split_index(&self, id: SplitId) -> Option<usize> {
        self.split.binary_search_by_key(&id, |w| w.id).ok()
    }

    /// Maps each split window to the window it was cut from.
    pub fn provenance(&self) -> BTreeMap<SplitId, WindowId> {
        self.split.iter().map(|w| (w.id, w.id.wid)).collect()
    }

    /// Vertices in `(node, window)` order; indices into this slice are
    /// used by the index-level query methods.
    pub fn vertices(&self) -> &[TwigVertex] {
        &self.vertices
    }

    pub fn vertex_index(&self, v: &TwigVertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub(crate) fn require(&self, v: &TwigVertex) -> Result<usize> {
        self.vertex_index(v)
            .ok_or_else(|| Error::UnknownVertex(format!("{}^{}", v.node, v.window)))
    }

    /// The split window a vertex belongs to.
    pub fn window_of(&self, vertex: usize) -> &SplitWindow {
        &self.split[self.vertex_split[vertex]]
    }

    /// Vertex indices of `node`, in window order.
    pub fn vertices_of(&self, node: NodeId) -> &[usize] {
        self.by_node.get(&node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The vertex of `node` from which every other vertex of that node can
    /// be reached by waiting edges: earliest start, longest window on ties.
    pub fn start_vertex(&self, node: NodeId) -> Option<usize> {
        self.vertices_of(node).iter().copied().min_by_key(|&i| {
            let w = self.window_of(i);
            (w.start, std::cmp::Reverse(w.end), i)
        })
    }

    /// The piece of original window `wid` that is live at `t`. A send at
    /// exactly the window's end maps to its last piece.
    pub fn piece_at(&self, wid: WindowId, t: Time) -> Option<SplitId> {
        let first = self.split.partition_point(|w| w.id.wid < wid);
        let pieces = self.split[first..].iter().take_while(|w| w.id.wid == wid);
        let mut last = None;
        for w in pieces {
            if w.contains(t) {
                return Some(w.id);
            }
            last = Some(w);
        }
        last.filter(|w| w.end == t).map(|w| w.id)
    }

    pub fn edges(&self) -> impl Iterator<Item = TwigEdge> + '_ {
        self.edges.iter().map(|e| TwigEdge {
            u: self.vertices[e.u],
            v: self.vertices[e.v],
            kind: e.kind,
            weight: e.weight,
            origin: e.origin,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub(crate) fn arcs(&self, v: usize) -> &[Arc] {
        &self.adj[v]
    }

    /// Weight of the cheapest arc from `u` to `v`, if they are adjacent.
    pub fn arc_weight(&self, u: usize, v: usize) -> Option<Time> {
        self.adj[u].iter().filter(|a| a.to == v).map(|a| a.weight).min()
    }

    /// Total weight of a vertex sequence, or `None` if some step is not an
    /// arc of the graph.
    pub fn path_weight(&self, path: &[usize]) -> Option<Time> {
        path.windows(2).map(|p| self.arc_weight(p[0], p[1])).sum()
    }

    pub fn to_path(&self, vertices: &[usize], weight: Time) -> TwigPath {
        TwigPath {
            vertices: vertices.iter().map(|&i| self.vertices[i]).collect(),
            total_weight: weight,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: i64) -> Time {
        Time::from_secs(x)
    }

    #[test]
    fn single_window() {
        let g = Twig::build(&[TimeWindow::new(1, 0, 1, s(0), s(10))], s(1));
        assert_eq!(g.vertices().len(), 2);
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].weight, s(1));
        assert_eq!(edges[0].origin, EdgeOrigin::WithinWindow);
    }

    #[test]
    fn partial_overlap_splits_both() {
        let g = Twig::build(
            &[
                TimeWindow::new(3, 1, 2, s(25), s(40)),
                TimeWindow::new(5, 2, 4, s(35), s(50)),
            ],
            s(1),
        );
        let got: Vec<_> = g
            .split_windows()
            .iter()
            .map(|w| {
                (
                    w.id.to_string(),
                    w.start.as_micros() / 1_000_000,
                    w.end.as_micros() / 1_000_000,
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![
                ("3.1".into(), 25, 35),
                ("3.2".into(), 35, 40),
                ("5.1".into(), 35, 40),
                ("5.2".into(), 40, 50)
            ]
        );
    }

    #[test]
    fn piece_at_boundaries() {
        let g = Twig::build(
            &[
                TimeWindow::new(3, 1, 2, s(25), s(40)),
                TimeWindow::new(5, 2, 4, s(35), s(50)),
            ],
            s(1),
        );
        assert_eq!(g.piece_at(WindowId(3), s(25)), Some(SplitId::piece(3, 1)));
        assert_eq!(g.piece_at(WindowId(3), s(35)), Some(SplitId::piece(3, 2)));
        assert_eq!(g.piece_at(WindowId(3), s(40)), Some(SplitId::piece(3, 2)));
        assert_eq!(g.piece_at(WindowId(3), s(41)), None);
        assert_eq!(g.piece_at(WindowId(9), s(30)), None);
    }

    #[test]
    fn split_id_text_round_trip() {
        for t in ["3", "3.1", "12.4"] {
            assert_eq!(t.parse::<SplitId>().unwrap().to_string(), t);
        }
        assert!("x.1".parse::<SplitId>().is_err());
    }
}
