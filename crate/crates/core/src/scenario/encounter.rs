use super::{Node, TimeWindow, Waypoint};
use crate::error::{Error, Result};
use crate::time::Time;

/// How the contact distance of a node pair is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeRule {
    /// The smaller of the two nodes' `range` fields; both must be set.
    MinOfPair,
    /// The same distance for every pair.
    Uniform(f64),
}

impl RangeRule {
    fn for_pair(&self, a: &Node, b: &Node) -> Result<f64> {
        match *self {
            RangeRule::Uniform(r) => Ok(r),
            RangeRule::MinOfPair => match (a.range, b.range) {
                (Some(ra), Some(rb)) => Ok(ra.min(rb)),
                _ => Err(Error::Config(format!(
                    "node {} has no range",
                    if a.range.is_none() { a.id } else { b.id }
                ))),
            },
        }
    }
}

fn position(wps: &[Waypoint], t: Time) -> [f64; 3] {
    let first = &wps[0];
    if t <= first.t {
        return [first.x, first.y, first.z];
    }
    for pair in wps.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        if t <= q.t {
            let f = (t - p.t).as_secs_f64() / (q.t - p.t).as_secs_f64();
            return [p.x + f * (q.x - p.x), p.y + f * (q.y - p.y), p.z + f * (q.z - p.z)];
        }
    }
    let last = wps.last().unwrap();
    [last.x, last.y, last.z]
}

fn distance(a: &Node, b: &Node, t: Time) -> f64 {
    let (p, q) = (position(&a.waypoints, t), position(&b.waypoints, t));
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
}

/// Narrows a range crossing between `lo` and `hi` down to one microsecond.
/// `inside_at_lo` tells which side of the boundary `lo` is on.
fn refine(a: &Node, b: &Node, range: f64, mut lo: Time, mut hi: Time, inside_at_lo: bool) -> Time {
    while (hi - lo).as_micros() > 1 {
        let mid = Time::from_micros(lo.as_micros() + (hi - lo).as_micros() / 2);
        if (distance(a, b, mid) <= range) == inside_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if inside_at_lo {
        lo
    } else {
        hi
    }
}

/// Contact windows between every node pair, from their trajectories.
///
/// Positions are linearly interpolated between waypoints and held constant
/// before the first and after the last one. Distances are sampled every
/// `dt` over the span of all waypoint times; each in/out transition is then
/// bisected to microsecond precision. Windows come back sorted by
/// `(start, a, b)` with wids numbered from 1 and `a < b`. Zero-length
/// touches are dropped; filtering against `t_tr` is left to the caller
/// (see [`drop_short_windows`]).
pub fn derive_windows(nodes: &[Node], rule: RangeRule, dt: Time) -> Result<Vec<TimeWindow>> {
    if dt <= Time::ZERO {
        return Err(Error::Config("dt must be positive".into()));
    }
    if let Some(n) = nodes.iter().find(|n| n.waypoints.is_empty()) {
        return Err(Error::Config(format!("node {} has no waypoints", n.id)));
    }
    let times = nodes.iter().flat_map(|n| n.waypoints.iter().map(|w| w.t));
    let (Some(t0), Some(t1)) = (times.clone().min(), times.max()) else {
        return Ok(Vec::new());
    };

    let mut samples = Vec::new();
    let mut t = t0;
    while t < t1 {
        samples.push(t);
        t += dt;
    }
    samples.push(t1);

    let mut found = Vec::new();
    let mut sorted: Vec<&Node> = nodes.iter().collect();
    sorted.sort_by_key(|n| n.id);
    for (i, a) in sorted.iter().enumerate() {
        for b in &sorted[i + 1..] {
            let range = rule.for_pair(a, b)?;
            let mut open: Option<Time> = None;
            let mut prev = samples[0];
            let mut prev_in = false;
            for (k, &t) in samples.iter().enumerate() {
                let inside = distance(a, b, t) <= range;
                if k == 0 {
                    if inside {
                        open = Some(t);
                    }
                } else if inside != prev_in {
                    let edge = refine(a, b, range, prev, t, prev_in);
                    if inside {
                        open = Some(edge);
                    } else if let Some(s) = open.take() {
                        found.push((s, a.id, b.id, edge));
                    }
                }
                prev = t;
                prev_in = inside;
            }
            if let Some(s) = open {
                found.push((s, a.id, b.id, t1));
            }
        }
    }

    found.retain(|&(s, _, _, e)| s < e);
    found.sort_by_key(|&(s, a, b, _)| (s, a, b));
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(i, (start, a, b, end))| TimeWindow {
            wid: super::WindowId(i as u32 + 1),
            a,
            b,
            start,
            end,
        })
        .collect())
}

/// Removes windows too short to carry one transmission.
pub fn drop_short_windows(windows: Vec<TimeWindow>, t_tr: Time) -> Vec<TimeWindow> {
    windows.into_iter().filter(|w| w.duration() >= t_tr).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(x: f64, y: f64, t: i64) -> Waypoint {
        Waypoint {
            x,
            y,
            z: 0.0,
            t: Time::from_secs(t),
        }
    }

    fn at(id: u32, path: Vec<Waypoint>) -> Node {
        Node::uav(id).with_waypoints(path).with_range(5.0)
    }

    #[test]
    fn static_pair_in_range_for_whole_horizon() {
        let nodes = [
            at(0, vec![wp(0.0, 0.0, 0), wp(0.0, 0.0, 10)]),
            at(1, vec![wp(1.0, 0.0, 0), wp(1.0, 0.0, 10)]),
        ];
        let w = derive_windows(&nodes, RangeRule::MinOfPair, Time::from_secs(1)).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!((w[0].start, w[0].end), (Time::ZERO, Time::from_secs(10)));
    }

    #[test]
    fn static_pair_out_of_range() {
        let nodes = [
            at(0, vec![wp(0.0, 0.0, 0), wp(0.0, 0.0, 10)]),
            at(1, vec![wp(100.0, 0.0, 0), wp(100.0, 0.0, 10)]),
        ];
        assert!(derive_windows(&nodes, RangeRule::MinOfPair, Time::from_secs(1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn fly_through_matches_circle_crossing() {
        // Moving along y = 3 from x = -20 to x = 20 over 40 s, past a static
        // node at the origin with range 5: inside while |x| <= 4.
        let nodes = [
            at(0, vec![wp(0.0, 0.0, 0)]),
            at(1, vec![wp(-20.0, 3.0, 0), wp(20.0, 3.0, 40)]),
        ];
        let dt = Time::from_micros(700_000);
        let w = derive_windows(&nodes, RangeRule::MinOfPair, dt).unwrap();
        assert_eq!(w.len(), 1);
        let (s, e) = (w[0].start.as_secs_f64(), w[0].end.as_secs_f64());
        assert!((s - 16.0).abs() <= dt.as_secs_f64(), "{s}");
        assert!((e - 24.0).abs() <= dt.as_secs_f64(), "{e}");
    }

    #[test]
    fn missing_waypoints_is_config_error() {
        let nodes = [at(0, vec![wp(0.0, 0.0, 0)]), Node::uav(1)];
        assert!(matches!(
            derive_windows(&nodes, RangeRule::Uniform(5.0), Time::from_secs(1)),
            Err(Error::Config(_))
        ));
    }
}
