//! Serialized views of graphs, traces and reports, with nodes shown by
//! their labels.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::detection::{Check, DetectionReport, Evidence, LocalOutcome, Mode, Verdict};
use crate::metrics::{EorRow, Runtime, Score};
use crate::scenario::{Scenario, WindowId};
use crate::simulator::PacketTrace;
use crate::time::Time;
use crate::twig::{EdgeKind, EdgeOrigin, SplitId, Twig, TwigVertex};

/// Pretty JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("views always serialize");
    s.push('\n');
    s
}

fn vertex_name(s: &Scenario, v: &TwigVertex) -> String {
    format!("{}^{}", s.name_of(v.node), v.window)
}

#[derive(Serialize)]
struct VertexView {
    node: String,
    wid: SplitId,
    start: Time,
    end: Time,
}

#[derive(Serialize)]
struct EdgeView {
    u: String,
    v: String,
    kind: EdgeKind,
    weight: Time,
    origin: EdgeOrigin,
}

#[derive(Serialize)]
pub struct TwigView {
    t_tr: Time,
    vertices: Vec<VertexView>,
    edges: Vec<EdgeView>,
    provenance: BTreeMap<SplitId, WindowId>,
}

pub fn twig_view(s: &Scenario, g: &Twig) -> TwigView {
    TwigView {
        t_tr: g.t_tr(),
        vertices: g
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = g.window_of(i);
                VertexView {
                    node: s.name_of(v.node),
                    wid: v.window,
                    start: w.start,
                    end: w.end,
                }
            })
            .collect(),
        edges: g
            .edges()
            .map(|e| EdgeView {
                u: vertex_name(s, &e.u),
                v: vertex_name(s, &e.v),
                kind: e.kind,
                weight: e.weight,
                origin: e.origin,
            })
            .collect(),
        provenance: g.provenance(),
    }
}

/// Graphviz rendering; directed edges are arrows, the rest are drawn
/// without heads.
pub fn twig_dot(s: &Scenario, g: &Twig) -> String {
    let mut out = String::from("digraph twig {\n  rankdir=LR;\n");
    for (i, v) in g.vertices().iter().enumerate() {
        let w = g.window_of(i);
        writeln!(
            out,
            "  \"{}\" [label=\"{}\\n[{}, {}]\"];",
            vertex_name(s, v),
            vertex_name(s, v),
            w.start,
            w.end
        )
        .unwrap();
    }
    for e in g.edges() {
        let style = match (e.kind, e.origin) {
            (EdgeKind::Directed, _) => "",
            (_, EdgeOrigin::WithinWindow) => ", dir=none, style=bold",
            _ => ", dir=none, style=dashed",
        };
        writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"{style}];",
            vertex_name(s, &e.u),
            vertex_name(s, &e.v),
            e.weight
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize)]
struct HopView {
    node: String,
    reception_time: Time,
    window: Option<SplitId>,
    send_time_of_prev: Option<Time>,
}

#[derive(Serialize)]
struct DelayView {
    node: String,
    hop_index: usize,
    delay: Time,
    planned_send: Time,
    actual_send: Time,
    missed_window: bool,
    planned_weight: Time,
    realized_weight: Option<Time>,
    forced_miss: bool,
}

#[derive(Serialize)]
pub struct TraceView {
    source: String,
    destination: String,
    delivered: bool,
    physical_arrival: Option<Time>,
    hops: Vec<HopView>,
    delays: Vec<DelayView>,
    /// Weight of the followed path in the graph, when it can be embedded.
    followed_weight: Option<Time>,
}

pub fn trace_view(s: &Scenario, g: &Twig, t: &PacketTrace) -> TraceView {
    TraceView {
        source: s.name_of(t.source),
        destination: s.name_of(t.destination),
        delivered: t.delivered,
        physical_arrival: t.physical_arrival,
        hops: t
            .hops
            .iter()
            .map(|h| HopView {
                node: s.name_of(h.node),
                reception_time: h.reception_time,
                window: h.window,
                send_time_of_prev: h.send_time_of_prev,
            })
            .collect(),
        delays: t
            .delays
            .iter()
            .map(|d| DelayView {
                node: s.name_of(d.node),
                hop_index: d.hop_index,
                delay: d.delay,
                planned_send: d.planned_send,
                actual_send: d.actual_send,
                missed_window: d.missed_window,
                planned_weight: d.planned_weight,
                realized_weight: d.realized_weight,
                forced_miss: d.forced_miss(),
            })
            .collect(),
        followed_weight: g.embed(t).ok().map(|e| e.weight()),
    }
}

#[derive(Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
enum EvidenceView {
    PathWeight {
        anchor: String,
        followed: Time,
        shortest: Option<Time>,
    },
    Timing {
        window: SplitId,
        window_start: Time,
        rt_self: Time,
        rt_suspect: Time,
        partial: Time,
        t_tr: Time,
    },
    SkippedWindow {
        window: WindowId,
        window_start: Time,
        window_end: Time,
        rt_suspect: Time,
        rt_relay: Time,
        t_tr: Time,
    },
}

#[derive(Serialize)]
struct CheckView {
    node: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    observer: Option<String>,
    verdict: Verdict,
    evidence: EvidenceView,
}

fn check_view(s: &Scenario, c: &Check) -> CheckView {
    let evidence = match c.evidence {
        Evidence::PathWeight {
            anchor,
            followed,
            shortest,
        } => EvidenceView::PathWeight {
            anchor: s.name_of(anchor),
            followed,
            shortest,
        },
        Evidence::Timing {
            window,
            window_start,
            rt_self,
            rt_suspect,
            partial,
            t_tr,
        } => EvidenceView::Timing {
            window,
            window_start,
            rt_self,
            rt_suspect,
            partial,
            t_tr,
        },
        Evidence::SkippedWindow {
            window,
            window_start,
            window_end,
            rt_suspect,
            rt_relay,
            t_tr,
        } => EvidenceView::SkippedWindow {
            window,
            window_start,
            window_end,
            rt_suspect,
            rt_relay,
            t_tr,
        },
    };
    CheckView {
        node: s.name_of(c.node),
        observer: c.observer.map(|o| s.name_of(o)),
        verdict: c.verdict,
        evidence,
    }
}

#[derive(Serialize)]
struct AlertView {
    observer: String,
    suspect: String,
    notified: Vec<String>,
}

#[derive(Serialize)]
pub struct ReportView {
    mode: Mode,
    flagged: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    followed_weight: Option<Time>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shortest_weight: Option<Time>,
    evidence: Vec<CheckView>,
    checks: Vec<CheckView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alerts: Option<Vec<AlertView>>,
}

pub fn global_view(s: &Scenario, r: &DetectionReport) -> ReportView {
    ReportView {
        mode: r.mode,
        flagged: r.flagged.iter().map(|&n| s.name_of(n)).collect(),
        followed_weight: r.followed_weight,
        shortest_weight: r.shortest_weight,
        evidence: r.evidence().map(|c| check_view(s, c)).collect(),
        checks: r.checks.iter().map(|c| check_view(s, c)).collect(),
        alerts: None,
    }
}

pub fn local_view(s: &Scenario, out: &LocalOutcome) -> ReportView {
    let merged = out.merged();
    ReportView {
        alerts: Some(
            out.alerts
                .iter()
                .map(|a| AlertView {
                    observer: s.name_of(a.observer),
                    suspect: s.name_of(a.suspect),
                    notified: a.notified.iter().map(|&n| s.name_of(n)).collect(),
                })
                .collect(),
        ),
        ..global_view(s, &merged)
    }
}

#[derive(Serialize)]
pub struct DetectView {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global: Option<ReportView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local: Option<ReportView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Serialize)]
pub struct ScoreView {
    pub truth: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub global: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local: Option<Score>,
}

/// Everything the metrics stage reports.
#[derive(Serialize, Default)]
pub struct MetricsView {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eor: Option<Vec<EorRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection: Option<ScoreView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Runtime>,
}
