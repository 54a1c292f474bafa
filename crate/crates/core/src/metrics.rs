//! Overhead ratios, detection quality and phase timings.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::detection::{detect_global, run_local_pipeline, DetectionReport};
use crate::error::{Error, Result};
use crate::scenario::{AttackConfig, NodeId, Scenario};
use crate::simulator::simulate;
use crate::twig::Twig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverheadMode {
    Global,
    Local,
    /// The trust-based baseline's per-hop attachment, for comparison only.
    Hotd,
}

/// Bit sizes of the message and of the detection metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OverheadModel {
    pub message_bits: u64,
    pub node_id_bits: u64,
    pub reception_time_bits: u64,
    /// Fixed header in local mode: two (id, time) records.
    pub local_bits: u64,
    pub hotd_bits: u64,
}

impl Default for OverheadModel {
    fn default() -> Self {
        OverheadModel {
            message_bits: 1400,
            node_id_bits: 7,
            reception_time_bits: 13,
            local_bits: 40,
            hotd_bits: 105,
        }
    }
}

impl OverheadModel {
    pub fn per_hop_bits(&self, mode: OverheadMode) -> u64 {
        match mode {
            OverheadMode::Global => self.node_id_bits + self.reception_time_bits,
            OverheadMode::Local => self.local_bits,
            OverheadMode::Hotd => self.hotd_bits,
        }
    }
}

/// Extra overhead ratio over messages with `hops[i]` hops each.
///
/// Global and HOTD metadata accumulate: after `j` hops the packet carries
/// `j` records, so a message costs `A * H(H+1)/2` extra bits. Local mode
/// carries a fixed header, costing `A * H`. Both are divided by the
/// payload bits sent, `D * H`.
pub fn eor(model: &OverheadModel, mode: OverheadMode, hops: &[u32]) -> Result<f64> {
    if hops.is_empty() {
        return Err(Error::UndefinedRatio("no messages".into()));
    }
    if hops.contains(&0) {
        return Err(Error::UndefinedRatio(
            "a message with zero hops carries no payload".into(),
        ));
    }
    let a = model.per_hop_bits(mode);
    let extra: u64 = hops
        .iter()
        .map(|&h| {
            let h = h as u64;
            match mode {
                OverheadMode::Local => a * h,
                _ => a * h * (h + 1) / 2,
            }
        })
        .sum();
    let payload: u64 = hops.iter().map(|&h| model.message_bits * h as u64).sum();
    Ok(extra as f64 / payload as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EorRow {
    pub hops: u32,
    pub global: f64,
    pub local: f64,
    pub hotd: f64,
}

/// One single-message row per hop count.
pub fn eor_table(model: &OverheadModel, hops: &[u32]) -> Result<Vec<EorRow>> {
    hops.iter()
        .map(|&h| {
            Ok(EorRow {
                hops: h,
                global: eor(model, OverheadMode::Global, &[h])?,
                local: eor(model, OverheadMode::Local, &[h])?,
                hotd: eor(model, OverheadMode::Hotd, &[h])?,
            })
        })
        .collect()
}

pub fn eor_csv(rows: &[EorRow]) -> String {
    let mut out = String::from("hops,global,local,hotd\n");
    for r in rows {
        writeln!(out, "{},{:.6},{:.6},{:.6}", r.hops, r.global, r.local, r.hotd).unwrap();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub precision: f64,
    pub recall: f64,
}

/// Precision and recall of a flagged set. An empty flagged set has
/// precision 1; an empty truth set has recall 1.
pub fn score_sets(flagged: &BTreeSet<NodeId>, truth: &BTreeSet<NodeId>) -> Score {
    let hit = flagged.intersection(truth).count() as f64;
    Score {
        precision: if flagged.is_empty() {
            1.0
        } else {
            hit / flagged.len() as f64
        },
        recall: if truth.is_empty() {
            1.0
        } else {
            hit / truth.len() as f64
        },
    }
}

pub fn score(report: &DetectionReport, truth: &AttackConfig) -> Score {
    score_sets(&report.flagged, &truth.malicious())
}

/// Median wall-clock seconds per pipeline phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Runtime {
    pub repeats: usize,
    pub build: f64,
    pub simulate: f64,
    /// `None` when the message was not delivered.
    pub detect_global: Option<f64>,
    pub detect_local: f64,
}

fn median(mut xs: Vec<Duration>) -> f64 {
    xs.sort();
    let n = xs.len();
    let m = if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2
    };
    m.as_secs_f64()
}

fn timed<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut samples = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let t = Instant::now();
        let out = std::hint::black_box(f());
        samples.push(t.elapsed());
        last = Some(out);
    }
    (last.unwrap(), median(samples))
}

/// Times each phase on the calling thread, `repeats` times (at least 10).
pub fn time_phases(s: &Scenario, repeats: usize) -> Result<Runtime> {
    let repeats = repeats.max(10);
    let (g, build) = timed(repeats, || Twig::build(&s.windows, s.t_tr));
    let (trace, simulate) = timed(repeats, || simulate(s, &g));
    let detect_global = if trace.delivered {
        let (r, t) = timed(repeats, || detect_global(&g, &trace));
        r?;
        Some(t)
    } else {
        None
    };
    let (r, detect_local) = timed(repeats, || run_local_pipeline(s, &g, &trace));
    r?;
    Ok(Runtime {
        repeats,
        build,
        simulate,
        detect_global,
        detect_local,
    })
}
