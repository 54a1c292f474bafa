//! Malicious-relay detection from a packet trace, with full knowledge of
//! the graph (global) or with each receiver's own neighborhood and the two
//! most recent relay records carried by the packet (local).

mod global;
mod local;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::scenario::{NodeId, TimeWindow, WindowId};
use crate::time::Time;
use crate::twig::{SplitId, SplitWindow, Twig};

pub use global::{detect_global, detect_global_with, GlobalRule};
pub use local::{detect_local, run_local_pipeline, Alert, LocalOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Benign,
    Malicious,
    /// The comparison could not be made (no usable shortest path).
    Inconclusive,
}

/// The numbers behind one verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evidence {
    /// Global: weight of the followed segment from the node's receiving
    /// vertex to the anchor against the cheapest usable alternative.
    PathWeight {
        anchor: NodeId,
        followed: Time,
        shortest: Option<Time>,
    },
    /// Local: the predecessor neither sent at the window start
    /// (`partial == t_tr`) nor immediately on receipt
    /// (`rt_suspect + t_tr == rt_self`).
    Timing {
        window: SplitId,
        window_start: Time,
        rt_self: Time,
        rt_suspect: Time,
        partial: Time,
        t_tr: Time,
    },
    /// Local: the node two hops back had a live window with the observer
    /// and handed the packet to someone else instead.
    SkippedWindow {
        window: WindowId,
        window_start: Time,
        window_end: Time,
        rt_suspect: Time,
        rt_relay: Time,
        t_tr: Time,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Check {
    pub node: NodeId,
    pub observer: Option<NodeId>,
    pub verdict: Verdict,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionReport {
    pub mode: Mode,
    /// The receiving node, for a single local detection.
    pub observer: Option<NodeId>,
    pub flagged: BTreeSet<NodeId>,
    /// Every comparison made, in the order it was made.
    pub checks: Vec<Check>,
    /// Global only: weights of the followed and the shortest path.
    pub followed_weight: Option<Time>,
    pub shortest_weight: Option<Time>,
}

impl DetectionReport {
    pub(crate) fn new(mode: Mode, observer: Option<NodeId>) -> Self {
        DetectionReport {
            mode,
            observer,
            flagged: BTreeSet::new(),
            checks: Vec::new(),
            followed_weight: None,
            shortest_weight: None,
        }
    }

    pub(crate) fn record(&mut self, check: Check) {
        if check.verdict == Verdict::Malicious {
            self.flagged.insert(check.node);
        }
        self.checks.push(check);
    }

    /// Checks that flagged their node.
    pub fn evidence(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Malicious)
    }

    pub fn inconclusive(&self) -> BTreeSet<NodeId> {
        self.checks
            .iter()
            .filter(|c| c.verdict == Verdict::Inconclusive)
            .map(|c| c.node)
            .collect()
    }
}

/// Who meets whom, as known locally from the scenario's windows.
#[derive(Debug, Clone, Default)]
pub struct NeighborTables {
    one: BTreeMap<NodeId, BTreeSet<NodeId>>,
    two: BTreeMap<NodeId, BTreeSet<NodeId>>,
    pieces: BTreeMap<(NodeId, NodeId), Vec<SplitWindow>>,
    windows: BTreeMap<(NodeId, NodeId), Vec<TimeWindow>>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

impl NeighborTables {
    pub fn from_twig(g: &Twig) -> Self {
        let mut t = NeighborTables::default();
        for w in g.original_windows() {
            t.one.entry(w.a).or_default().insert(w.b);
            t.one.entry(w.b).or_default().insert(w.a);
            t.windows.entry(key(w.a, w.b)).or_default().push(*w);
        }
        for w in g.split_windows() {
            t.pieces.entry(key(w.a, w.b)).or_default().push(*w);
        }
        for (&n, nbrs) in &t.one {
            let mut reach = nbrs.clone();
            for m in nbrs {
                reach.extend(t.one[m].iter().copied());
            }
            reach.remove(&n);
            t.two.insert(n, reach);
        }
        t
    }

    pub fn one_hop(&self, n: NodeId) -> BTreeSet<NodeId> {
        self.one.get(&n).cloned().unwrap_or_default()
    }

    pub fn two_hop(&self, n: NodeId) -> BTreeSet<NodeId> {
        self.two.get(&n).cloned().unwrap_or_default()
    }

    /// Split windows between two nodes.
    pub fn pieces(&self, a: NodeId, b: NodeId) -> &[SplitWindow] {
        self.pieces.get(&key(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Original windows between two nodes.
    pub fn windows(&self, a: NodeId, b: NodeId) -> &[TimeWindow] {
        self.windows.get(&key(a, b)).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// The last two relay records carried in the packet header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HopMetadata {
    pub info_1: Option<(NodeId, Time)>,
    /// The most recent record: the immediate predecessor.
    pub info_2: Option<(NodeId, Time)>,
}

impl HopMetadata {
    /// Appends a record, dropping the oldest.
    pub fn push(&mut self, node: NodeId, rt: Time) {
        self.info_1 = self.info_2.take();
        self.info_2 = Some((node, rt));
    }
}
