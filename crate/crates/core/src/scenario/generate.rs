use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AttackConfig, Node, NodeId, Scenario, TimeWindow, WindowId};
use crate::error::{Error, Result};
use crate::time::Time;

const UAV_SPEED: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorParams {
    pub n_nodes: usize,
    pub n_windows: usize,
    pub n_malicious: usize,
    /// Inclusive bounds on window duration.
    pub window_duration: (Time, Time),
    pub horizon: Time,
    pub t_tr: Time,
    /// Delay injected by every malicious node.
    pub delay: Time,
    pub seed: u64,
}

impl GeneratorParams {
    /// Defaults: durations 5 to 15 s, t_tr 1 s, delay 5 s, and a horizon
    /// of ten seconds per window (at least 100 s).
    pub fn new(n_nodes: usize, n_windows: usize, n_malicious: usize, seed: u64) -> Self {
        GeneratorParams {
            n_nodes,
            n_windows,
            n_malicious,
            window_duration: (Time::from_secs(5), Time::from_secs(15)),
            horizon: Time::from_secs(100.max(10 * n_windows as i64)),
            t_tr: Time::from_secs(1),
            delay: Time::from_secs(5),
            seed,
        }
    }
}

/// The five evaluation scenarios: (nodes, windows, malicious).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Table2Row1,
    Table2Row2,
    Table2Row3,
    Table2Row4,
    Table2Row5,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Table2Row1,
        Preset::Table2Row2,
        Preset::Table2Row3,
        Preset::Table2Row4,
        Preset::Table2Row5,
    ];

    pub fn counts(self) -> (usize, usize, usize) {
        match self {
            Preset::Table2Row1 => (7, 10, 2),
            Preset::Table2Row2 => (10, 20, 2),
            Preset::Table2Row3 => (15, 30, 3),
            Preset::Table2Row4 => (20, 40, 4),
            Preset::Table2Row5 => (30, 50, 5),
        }
    }

    pub fn params(self, seed: u64) -> GeneratorParams {
        let (n, w, m) = self.counts();
        GeneratorParams::new(n, w, m, seed)
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Table2Row1 => "table2-row1",
            Preset::Table2Row2 => "table2-row2",
            Preset::Table2Row3 => "table2-row3",
            Preset::Table2Row4 => "table2-row4",
            Preset::Table2Row5 => "table2-row5",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?} (expected table2-row1 .. table2-row5)")))
    }
}

fn tower_count(n: usize) -> usize {
    (n / 6).clamp(2, 5).min(n - 2)
}

fn uniform(rng: &mut ChaCha8Rng, lo: Time, hi: Time) -> Time {
    Time::from_micros(rng.gen_range(lo.as_micros()..=hi.as_micros()))
}

/// Random scenario with a guaranteed source-to-destination route.
///
/// Node 0 is the source UAV and the last node is the destination tower;
/// towers take the highest ids. A chain of windows through distinct UAV
/// relays is laid out in consecutive, equal slices of the horizon so the
/// chain is always usable in order. The remaining windows join random
/// pairs (never two towers) at random times. Malicious nodes are drawn
/// from the chain's relays. Times have microsecond resolution.
pub fn generate(p: &GeneratorParams) -> Result<Scenario> {
    let gen_err = |m: String| Err(Error::Generation(m));
    let (dmin, dmax) = p.window_duration;
    if p.n_nodes < 3 {
        return gen_err(format!("need at least 3 nodes, got {}", p.n_nodes));
    }
    if p.n_malicious >= p.n_nodes - 1 {
        return gen_err(format!(
            "n_malicious ({}) must be below n_nodes - 1 ({})",
            p.n_malicious,
            p.n_nodes - 1
        ));
    }
    if p.t_tr <= Time::ZERO || dmin < p.t_tr || dmin > dmax {
        return gen_err(format!(
            "window durations [{dmin}, {dmax}] must satisfy t_tr <= min <= max"
        ));
    }
    if p.delay <= Time::ZERO && p.n_malicious > 0 {
        return gen_err("delay must be positive".into());
    }

    let towers = tower_count(p.n_nodes);
    let uavs = p.n_nodes - towers;
    let lo = (p.n_malicious + 1).max(2);
    let hi = uavs.min(p.n_windows).min(p.n_malicious + 4);
    if lo > hi {
        return gen_err(format!(
            "cannot plant a {lo}-hop route with {} windows and {uavs} UAVs",
            p.n_windows
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let hops = rng.gen_range(lo..=hi);
    let slot = Time::from_micros(p.horizon.as_micros() / hops as i64);
    if slot < dmax {
        return gen_err(format!(
            "horizon {} is too short: {hops} route windows need slots of at least {dmax} s",
            p.horizon
        ));
    }

    let relay_pool: Vec<u32> = (1..uavs as u32).collect();
    let relays: Vec<u32> = relay_pool.choose_multiple(&mut rng, hops - 1).copied().collect();
    let destination = p.n_nodes as u32 - 1;
    let mut chain = vec![0];
    chain.extend(&relays);
    chain.push(destination);

    let mut raw = Vec::with_capacity(p.n_windows);
    for (i, pair) in chain.windows(2).enumerate() {
        let dur = uniform(&mut rng, dmin, dmax);
        let offset = uniform(&mut rng, Time::ZERO, slot - dur);
        let start = slot * i as i64 + offset;
        raw.push((start, pair[0], pair[1], start + dur));
    }
    let is_tower = |id: u32| id as usize >= uavs;
    while raw.len() < p.n_windows {
        let a = rng.gen_range(0..p.n_nodes as u32);
        let b = rng.gen_range(0..p.n_nodes as u32);
        if a == b || (is_tower(a) && is_tower(b)) {
            continue;
        }
        let dur = uniform(&mut rng, dmin, dmax);
        if dur > p.horizon {
            return gen_err(format!("horizon {} is shorter than a window", p.horizon));
        }
        let start = uniform(&mut rng, Time::ZERO, p.horizon - dur);
        raw.push((start, a, b, start + dur));
    }
    raw.sort_by_key(|&(s, a, b, _)| (s, a, b));

    let mut attack = AttackConfig::new();
    for &m in relays.choose_multiple(&mut rng, p.n_malicious) {
        attack = attack.with(NodeId(m), p.delay);
    }

    let nodes = (0..p.n_nodes as u32)
        .map(|id| {
            if is_tower(id) {
                Node::tower(id)
            } else {
                Node {
                    speed: Some(UAV_SPEED),
                    ..Node::uav(id)
                }
            }
        })
        .collect();
    let windows = raw
        .into_iter()
        .enumerate()
        .map(|(i, (start, a, b, end))| TimeWindow {
            wid: WindowId(i as u32 + 1),
            a: NodeId(a),
            b: NodeId(b),
            start,
            end,
        })
        .collect();

    let s = Scenario {
        nodes,
        windows,
        t_tr: p.t_tr,
        source: NodeId(0),
        destination: NodeId(destination),
        creation_time: Time::ZERO,
        attack,
    };
    s.validate()
        .map_err(|e| Error::Generation(format!("generated scenario failed validation: {e}")))?;
    Ok(s)
}
