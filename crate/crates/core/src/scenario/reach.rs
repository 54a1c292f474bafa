use std::collections::BTreeMap;

use super::{NodeId, TimeWindow};
use crate::time::Time;

/// Earliest time each node can hold a packet created at `source` at
/// `start`, under store-carry-forward with transmissions of length `t_tr`
/// that must finish inside their window.
///
/// Works directly on the encounter windows and never looks at the
/// time-window graph, so it doubles as a reachability oracle for it.
pub fn earliest_arrival(windows: &[TimeWindow], t_tr: Time, source: NodeId, start: Time) -> BTreeMap<NodeId, Time> {
    let mut arrival = BTreeMap::new();
    arrival.insert(source, start);
    loop {
        let mut changed = false;
        for w in windows {
            for (from, to) in [(w.a, w.b), (w.b, w.a)] {
                let Some(&held) = arrival.get(&from) else { continue };
                let send = held.max(w.start);
                if send + t_tr > w.end {
                    continue;
                }
                let got = send + t_tr;
                if arrival.get(&to).is_none_or(|&t| got < t) {
                    arrival.insert(to, got);
                    changed = true;
                }
            }
        }
        if !changed {
            return arrival;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn waits_for_window_start() {
        let s = Time::from_secs;
        let windows = [
            TimeWindow::new(1, 0, 1, s(5), s(8)),
            TimeWindow::new(2, 1, 2, s(25), s(40)),
            TimeWindow::new(3, 2, 3, s(0), s(20)),
        ];
        let arr = earliest_arrival(&windows, s(1), NodeId(0), Time::ZERO);
        assert_eq!(arr[&NodeId(1)], s(6));
        assert_eq!(arr[&NodeId(2)], s(26));
        assert!(!arr.contains_key(&NodeId(3)));
    }
}
