use std::collections::BTreeSet;

use super::{Check, DetectionReport, Evidence, HopMetadata, Mode, NeighborTables, Verdict};
use crate::error::{Error, Result};
use crate::scenario::{NodeId, Scenario};
use crate::simulator::PacketTrace;
use crate::time::Time;
use crate::twig::Twig;

/// A flag raised by one observer and the nodes it is reported to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alert {
    pub observer: NodeId,
    pub suspect: NodeId,
    pub notified: BTreeSet<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalOutcome {
    /// One report per receiving hop, in trace order.
    pub reports: Vec<DetectionReport>,
    pub alerts: Vec<Alert>,
}

impl LocalOutcome {
    /// All observers' findings as one report.
    pub fn merged(&self) -> DetectionReport {
        let mut out = DetectionReport::new(Mode::Local, None);
        for r in &self.reports {
            for c in &r.checks {
                out.record(*c);
            }
        }
        out
    }
}

/// Judges the predecessor (and possibly the node before it) from what the
/// observer knows: its reception time, the two relay records in the
/// packet, and its own windows.
///
/// The predecessor is benign if it sent exactly at the start of the window
/// that carried the packet, or immediately after receiving it. The window
/// is the latest-starting split window between the two that contains the
/// send instant `rt_self - t_tr`. When the predecessor passes, the node two
/// hops back is flagged if it shared a window with the observer that was
/// still open after it got the packet and had already opened before the
/// predecessor got it. A flagged predecessor already accounts for the
/// delay, so the older node is not judged in that case.
pub fn detect_local(
    observer: NodeId,
    rt_self: Time,
    meta: &HopMetadata,
    tables: &NeighborTables,
    t_tr: Time,
) -> Result<DetectionReport> {
    let (pred, rt_pred) = meta
        .info_2
        .ok_or_else(|| Error::Inconsistent(format!("packet at {observer} carries no predecessor record")))?;
    let send = rt_self - t_tr;
    let window = tables
        .pieces(observer, pred)
        .iter()
        .filter(|w| w.start <= send && send <= w.end)
        .max_by_key(|w| (w.start, std::cmp::Reverse(w.id)))
        .ok_or_else(|| Error::Inconsistent(format!("{observer} has no window with {pred} open at {send}")))?;

    let mut report = DetectionReport::new(Mode::Local, Some(observer));
    let partial = rt_self - window.start;
    let benign = partial == t_tr || rt_pred + t_tr == rt_self;
    report.record(Check {
        node: pred,
        observer: Some(observer),
        verdict: if benign { Verdict::Benign } else { Verdict::Malicious },
        evidence: Evidence::Timing {
            window: window.id,
            window_start: window.start,
            rt_self,
            rt_suspect: rt_pred,
            partial,
            t_tr,
        },
    });

    if let (true, Some((older, rt_older))) = (benign, meta.info_1) {
        if older != observer && tables.one_hop(observer).contains(&older) {
            let skipped = tables
                .windows(observer, older)
                .iter()
                .find(|w| rt_older + t_tr < w.end && rt_pred + t_tr > w.start);
            if let Some(w) = skipped {
                report.record(Check {
                    node: older,
                    observer: Some(observer),
                    verdict: Verdict::Malicious,
                    evidence: Evidence::SkippedWindow {
                        window: w.wid,
                        window_start: w.start,
                        window_end: w.end,
                        rt_suspect: rt_older,
                        rt_relay: rt_pred,
                        t_tr,
                    },
                });
            }
        }
    }
    Ok(report)
}

/// Runs [`detect_local`] at every receiver along the trace, carrying the
/// two-record header forward, and logs which nodes each alert reaches
/// (the observer's two-hop neighborhood).
pub fn run_local_pipeline(s: &Scenario, g: &Twig, trace: &PacketTrace) -> Result<LocalOutcome> {
    let tables = NeighborTables::from_twig(g);
    let mut meta = HopMetadata::default();
    let mut reports = Vec::new();
    let mut alerts = Vec::new();
    for (i, hop) in trace.hops.iter().enumerate() {
        if i > 0 {
            let r = detect_local(hop.node, hop.reception_time, &meta, &tables, s.t_tr)?;
            for c in r.evidence() {
                alerts.push(Alert {
                    observer: hop.node,
                    suspect: c.node,
                    notified: tables.two_hop(hop.node),
                });
            }
            reports.push(r);
        }
        meta.push(hop.node, hop.reception_time);
    }
    Ok(LocalOutcome { reports, alerts })
}
