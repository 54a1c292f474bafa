//! Nodes, encounter windows and complete simulation scenarios.

mod encounter;
mod generate;
mod io;
mod reach;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Time;

pub use encounter::{derive_windows, drop_short_windows, RangeRule};
pub use generate::{generate, GeneratorParams, Preset};
pub use io::{from_json, load, save, to_json};
pub use reach::earliest_arrival;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    #[default]
    Uav,
    Tower,
}

/// A timed position on a trajectory, in meters and seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub t: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    /// Display name used in reports (falls back to the numeric id).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub waypoints: Vec<Waypoint>,
    /// Communication range in meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<f64>,
    /// Cruise speed in meters per second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
}

impl Node {
    pub fn uav(id: u32) -> Self {
        Node {
            id: NodeId(id),
            label: None,
            kind: NodeKind::Uav,
            waypoints: Vec::new(),
            range: None,
            speed: None,
        }
    }

    pub fn tower(id: u32) -> Self {
        Node {
            kind: NodeKind::Tower,
            ..Node::uav(id)
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_waypoints(mut self, waypoints: Vec<Waypoint>) -> Self {
        self.waypoints = waypoints;
        self
    }

    pub fn with_range(mut self, range: f64) -> Self {
        self.range = Some(range);
        self
    }

    pub fn name(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.id.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WindowId(pub u32);

impl fmt::Display for WindowId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An encounter between two nodes: they can exchange packets while the
/// current time lies in `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub wid: WindowId,
    pub a: NodeId,
    pub b: NodeId,
    pub start: Time,
    pub end: Time,
}

impl TimeWindow {
    pub fn new(wid: u32, a: u32, b: u32, start: Time, end: Time) -> Self {
        TimeWindow {
            wid: WindowId(wid),
            a: NodeId(a),
            b: NodeId(b),
            start,
            end,
        }
    }

    pub fn duration(&self) -> Time {
        self.end - self.start
    }

    pub fn involves(&self, node: NodeId) -> bool {
        self.a == node || self.b == node
    }

    /// The endpoint opposite `node`, if `node` is an endpoint.
    pub fn peer(&self, node: NodeId) -> Option<NodeId> {
        if self.a == node {
            Some(self.b)
        } else if self.b == node {
            Some(self.a)
        } else {
            None
        }
    }

    /// Endpoints in ascending order.
    pub fn pair(&self) -> (NodeId, NodeId) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }
}

/// Ground truth for the attack: the delay each malicious node adds.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttackConfig {
    pub delays: BTreeMap<NodeId, Time>,
}

impl AttackConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: NodeId, delay: Time) -> Self {
        self.delays.insert(node, delay);
        self
    }

    pub fn delay_of(&self, node: NodeId) -> Option<Time> {
        self.delays.get(&node).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Nodes that impose a positive delay.
    pub fn malicious(&self) -> BTreeSet<NodeId> {
        self.delays
            .iter()
            .filter(|(_, d)| **d > Time::ZERO)
            .map(|(n, _)| *n)
            .collect()
    }
}

fn is_zero(t: &Time) -> bool {
    *t == Time::ZERO
}

/// Everything the simulator needs for one tracked message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub nodes: Vec<Node>,
    pub windows: Vec<TimeWindow>,
    pub t_tr: Time,
    pub source: NodeId,
    pub destination: NodeId,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub creation_time: Time,
    #[serde(default)]
    pub attack: AttackConfig,
}

impl Scenario {
    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn name_of(&self, id: NodeId) -> String {
        self.node(id).map(Node::name).unwrap_or_else(|| id.to_string())
    }

    /// Looks a node up by label, falling back to its numeric id.
    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.label.as_deref() == Some(name))
            .map(|n| n.id)
            .or_else(|| {
                let id = name.parse().ok().map(NodeId)?;
                self.node(id).map(|n| n.id)
            })
    }

    pub fn window(&self, wid: WindowId) -> Option<&TimeWindow> {
        self.windows.iter().find(|w| w.wid == wid)
    }

    pub fn ground_truth(&self) -> BTreeSet<NodeId> {
        self.attack.malicious()
    }

    /// The same scenario with every node behaving benignly.
    pub fn without_attack(&self) -> Scenario {
        Scenario {
            attack: AttackConfig::default(),
            ..self.clone()
        }
    }

    pub fn with_attack(&self, attack: AttackConfig) -> Scenario {
        Scenario { attack, ..self.clone() }
    }

    /// Checks every structural and domain invariant, including that the
    /// destination is reachable from the source.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        let arrival = earliest_arrival(&self.windows, self.t_tr, self.source, self.creation_time);
        if !arrival.contains_key(&self.destination) {
            let field = if self.windows.is_empty() {
                "windows"
            } else {
                "destination"
            };
            return Err(Error::invalid(
                field,
                format!(
                    "no window sequence carries a packet from {} to {}",
                    self.name_of(self.source),
                    self.name_of(self.destination)
                ),
            ));
        }
        Ok(())
    }

    /// [`Scenario::validate`] without the reachability check.
    pub fn validate_structure(&self) -> Result<()> {
        let mut ids = BTreeSet::new();
        let mut labels = BTreeSet::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if !ids.insert(node.id) {
                return Err(Error::invalid(
                    format!("nodes[{i}].id"),
                    format!("duplicate node id {}", node.id),
                ));
            }
            if let Some(label) = &node.label {
                if !labels.insert(label.as_str()) {
                    return Err(Error::invalid(
                        format!("nodes[{i}].label"),
                        format!("duplicate label {label:?}"),
                    ));
                }
            }
            validate_waypoints(i, node)?;
            if let Some(r) = node.range {
                if !(r.is_finite() && r >= 0.0) {
                    return Err(Error::invalid(
                        format!("nodes[{i}].range"),
                        "must be a non-negative number",
                    ));
                }
            }
            if let Some(v) = node.speed {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(
                        format!("nodes[{i}].speed"),
                        "must be a non-negative number",
                    ));
                }
            }
        }

        if self.t_tr <= Time::ZERO {
            return Err(Error::invalid("t_tr", "transmission time must be positive"));
        }
        if !ids.contains(&self.source) {
            return Err(Error::invalid("source", format!("unknown node {}", self.source)));
        }
        if !ids.contains(&self.destination) {
            return Err(Error::invalid(
                "destination",
                format!("unknown node {}", self.destination),
            ));
        }
        if self.source == self.destination {
            return Err(Error::invalid("destination", "must differ from source"));
        }

        let mut wids = BTreeSet::new();
        for (i, w) in self.windows.iter().enumerate() {
            if !wids.insert(w.wid) {
                return Err(Error::invalid(
                    format!("windows[{i}].wid"),
                    format!("duplicate window id {}", w.wid),
                ));
            }
            if !ids.contains(&w.a) {
                return Err(Error::invalid(
                    format!("windows[{i}].a"),
                    format!("unknown node {}", w.a),
                ));
            }
            if !ids.contains(&w.b) {
                return Err(Error::invalid(
                    format!("windows[{i}].b"),
                    format!("unknown node {}", w.b),
                ));
            }
            if w.a == w.b {
                return Err(Error::invalid(
                    format!("windows[{i}].b"),
                    "a window needs two distinct nodes",
                ));
            }
            if w.start >= w.end {
                return Err(Error::invalid(
                    format!("windows[{i}].start"),
                    format!("start {} is not before end {}", w.start, w.end),
                ));
            }
            if w.duration() < self.t_tr {
                return Err(Error::invalid(
                    format!("windows[{i}].end"),
                    format!("duration {} is shorter than t_tr {}", w.duration(), self.t_tr),
                ));
            }
        }

        for (node, delay) in &self.attack.delays {
            if !ids.contains(node) {
                return Err(Error::invalid(format!("attack.{node}"), "unknown node"));
            }
            if *node == self.destination {
                return Err(Error::invalid(
                    format!("attack.{node}"),
                    "the destination cannot be malicious",
                ));
            }
            if *delay < Time::ZERO {
                return Err(Error::invalid(format!("attack.{node}"), "delay must not be negative"));
            }
        }
        Ok(())
    }
}

fn validate_waypoints(i: usize, node: &Node) -> Result<()> {
    for (k, wp) in node.waypoints.iter().enumerate() {
        if !(wp.x.is_finite() && wp.y.is_finite() && wp.z.is_finite()) {
            return Err(Error::invalid(
                format!("nodes[{i}].waypoints[{k}]"),
                "coordinates must be finite",
            ));
        }
        if k > 0 && wp.t <= node.waypoints[k - 1].t {
            return Err(Error::invalid(
                format!("nodes[{i}].waypoints[{k}].t"),
                "waypoint times must strictly increase",
            ));
        }
    }
    if node.kind == NodeKind::Tower {
        if node.waypoints.len() > 1 {
            return Err(Error::invalid(
                format!("nodes[{i}].waypoints"),
                "a tower has at most one position",
            ));
        }
        if let Some(wp) = node.waypoints.first() {
            if wp.z != 0.0 {
                return Err(Error::invalid(
                    format!("nodes[{i}].waypoints[0].z"),
                    "towers stand on the ground (z = 0)",
                ));
            }
        }
    }
    Ok(())
}
