//! Worked examples on the seven-node, nine-window scenario.

mod common;

use common::*;
use tdaguard_core::detection::{detect_global, detect_global_with, run_local_pipeline, Evidence, GlobalRule, Verdict};
use tdaguard_core::report;
use tdaguard_core::simulator::{benign_next_hop, simulate};
use tdaguard_core::twig::{EdgeKind, EdgeOrigin, SplitId, Twig};

fn build(s: &tdaguard_core::Scenario) -> Twig {
    Twig::build(&s.windows, s.t_tr)
}

#[test]
fn split_windows_and_intervals() {
    let s = seven_node();
    let g = build(&s);
    let got: Vec<(String, i64, i64)> = g
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
    let want = [
        ("1", 5, 8),
        ("2", 12, 15),
        ("3.1", 25, 35),
        ("3.2", 35, 40),
        ("4", 25, 29),
        ("5.1", 35, 40),
        ("5.2", 40, 50),
        ("6", 60, 64),
        ("7", 90, 95),
        ("8", 110, 118),
        ("9", 150, 165),
    ];
    let want: Vec<(String, i64, i64)> = want.iter().map(|(a, b, c)| (a.to_string(), *b, *c)).collect();
    assert_eq!(got, want);
    assert_eq!(g.vertices().len(), 22);
}

fn edge(g: &Twig, s: &tdaguard_core::Scenario, u: &str, v: &str) -> tdaguard_core::twig::TwigEdge {
    let (u, v) = (vx(s, u), vx(s, v));
    g.edges()
        .find(|e| (e.u == u && e.v == v) || (e.kind == EdgeKind::Undirected && e.u == v && e.v == u))
        .unwrap_or_else(|| panic!("no edge {u:?} {v:?}"))
}

#[test]
fn spot_checked_edges() {
    let s = seven_node();
    let g = build(&s);
    let e = edge(&g, &s, "A^1", "A^3.1");
    assert_eq!(
        (e.kind, e.origin, e.weight),
        (EdgeKind::Directed, EdgeOrigin::Succession, secs(20))
    );
    let e = edge(&g, &s, "C^4", "C^7");
    assert_eq!((e.kind, e.weight), (EdgeKind::Directed, secs(65)));
    let e = edge(&g, &s, "B^3.2", "B^5.1");
    assert_eq!(
        (e.kind, e.origin, e.weight),
        (EdgeKind::Undirected, EdgeOrigin::Containment, secs(0))
    );
    let e = edge(&g, &s, "B^3.1", "B^4");
    assert_eq!((e.origin, e.weight), (EdgeOrigin::Containment, secs(0)));
    let e = edge(&g, &s, "D^5.2", "D^6");
    assert_eq!(e.weight, secs(20));
    let e = edge(&g, &s, "C^6", "C^7");
    assert_eq!(e.weight, secs(30));
    for e in g.edges().filter(|e| e.origin == EdgeOrigin::WithinWindow) {
        assert_eq!((e.kind, e.weight), (EdgeKind::Undirected, secs(1)));
    }
}

#[test]
fn shortest_path_from_source_vertex() {
    let s = seven_node();
    let g = build(&s);
    let p = g.shortest_path(&vx(&s, "S^1"), id(&s, "F")).unwrap().unwrap();
    assert_eq!(p.vertices, label_list(&s, "S^1,A^1,A^3.1,B^3.1,B^4,C^4,C^7,F^7"));
    assert_eq!(p.total_weight, secs(89));

    let here = g.shortest_path(&vx(&s, "F^7"), id(&s, "F")).unwrap().unwrap();
    assert_eq!(here.vertices, label_list(&s, "F^7"));
    assert_eq!(here.total_weight, secs(0));
}

fn receptions(t: &tdaguard_core::simulator::PacketTrace, s: &tdaguard_core::Scenario) -> Vec<(String, i64)> {
    t.hops
        .iter()
        .map(|h| (s.name_of(h.node), h.reception_time.as_micros() / 1_000_000))
        .collect()
}

fn pairs(list: &[(&str, i64)]) -> Vec<(String, i64)> {
    list.iter().map(|(n, t)| (n.to_string(), *t)).collect()
}

#[test]
fn benign_replay() {
    let s = seven_node();
    let g = build(&s);
    let t = simulate(&s, &g);
    assert!(t.delivered);
    assert_eq!(
        receptions(&t, &s),
        pairs(&[("S", 0), ("A", 6), ("B", 26), ("C", 27), ("F", 91)])
    );
    assert_eq!(t.physical_arrival, Some(secs(91)));
    assert!(t.delays.is_empty());
}

#[test]
fn single_attacker_replay() {
    let s = seven_node_a();
    let g = build(&s);
    let t = simulate(&s, &g);
    assert_eq!(
        receptions(&t, &s),
        pairs(&[("S", 0), ("A", 6), ("B", 31), ("D", 36), ("C", 61), ("F", 91)])
    );
    assert_eq!(t.delays.len(), 1);
    let d = t.delays[0];
    assert_eq!(
        (d.planned_send, d.actual_send, d.missed_window),
        (secs(25), secs(30), false)
    );
    assert_eq!(d.planned_weight, secs(88));
    assert_eq!(d.realized_weight, Some(secs(89)));
    assert!(d.forced_miss());
}

#[test]
fn two_attacker_replay() {
    let s = seven_node_ac();
    let g = build(&s);
    let t = simulate(&s, &g);
    assert_eq!(
        receptions(&t, &s),
        pairs(&[
            ("S", 0),
            ("A", 6),
            ("B", 31),
            ("D", 36),
            ("C", 61),
            ("E", 117),
            ("F", 151)
        ])
    );
    for (i, h) in t.hops.iter().enumerate().skip(1) {
        assert_eq!(h.reception_time, h.send_time_of_prev.unwrap() + s.t_tr, "hop {i}");
    }
    let c = t.delays.iter().find(|d| d.node == id(&s, "C")).unwrap();
    assert!(c.missed_window);
    assert_eq!((c.planned_send, c.actual_send), (secs(90), secs(116)));
    assert_eq!(t.hops[6].window, Some(SplitId::whole(9)));
    assert_eq!(t.hops[5].window, Some(SplitId::whole(8)));
}

#[test]
fn next_hop_depends_on_time() {
    let s = seven_node();
    let g = build(&s);
    let b = id(&s, "B");
    assert_eq!(
        benign_next_hop(&s, &g, b, secs(26)),
        Some((id(&s, "C"), SplitId::whole(4)))
    );
    assert_eq!(
        benign_next_hop(&s, &g, b, secs(31)),
        Some((id(&s, "D"), SplitId::piece(5, 1)))
    );
    assert_eq!(benign_next_hop(&s, &g, id(&s, "F"), secs(0)), None);
}

#[test]
fn embedding_benign_trace() {
    let s = seven_node();
    let g = build(&s);
    let fp = g.embed_trace(&simulate(&s, &g)).unwrap();
    assert_eq!(fp.vertices, label_list(&s, "S^1,A^1,A^3.1,B^3.1,B^4,C^4,C^7,F^7"));
    assert_eq!(fp.total_weight, secs(89));
}

#[test]
fn embedding_two_attacker_trace() {
    let s = seven_node_ac();
    let g = build(&s);
    let fp = g.embed_trace(&simulate(&s, &g)).unwrap();
    assert_eq!(
        fp.vertices,
        label_list(&s, "S^1,A^1,A^3.1,B^3.1,B^5.1,D^5.1,D^6,C^6,C^8,E^8,E^9,F^9")
    );
    assert_eq!(fp.total_weight, secs(151));
}

#[test]
fn global_detection_examples() {
    let s = seven_node();
    let g = build(&s);
    let r = detect_global(&g, &simulate(&s, &g)).unwrap();
    assert!(r.flagged.is_empty());
    assert_eq!((r.followed_weight, r.shortest_weight), (Some(secs(89)), Some(secs(89))));

    let s = seven_node_a();
    let g = build(&s);
    let r = detect_global(&g, &simulate(&s, &g)).unwrap();
    assert_eq!(r.flagged, [id(&s, "A")].into());
    assert_eq!((r.followed_weight, r.shortest_weight), (Some(secs(90)), Some(secs(89))));

    let s = seven_node_ac();
    let g = build(&s);
    let t = simulate(&s, &g);
    use Verdict::*;
    let per_hop = [
        ("E", Benign, 41, 41),
        ("C", Malicious, 92, 31),
        ("D", Benign, 57, 57),
        ("B", Benign, 68, 68),
        ("A", Malicious, 89, 88),
        ("S", Benign, 89, 89),
    ];
    let anchored = [
        ("E", Benign, 41, 41),
        ("C", Malicious, 92, 31),
        ("D", Benign, 26, 26),
        ("B", Benign, 37, 37),
        ("A", Malicious, 58, 57),
        ("S", Benign, 1, 1),
    ];
    for (rule, want) in [(GlobalRule::PerHop, per_hop), (GlobalRule::Anchored, anchored)] {
        let r = detect_global_with(&g, &t, rule).unwrap();
        assert_eq!(r.flagged, [id(&s, "A"), id(&s, "C")].into(), "{rule:?}");
        assert_eq!(
            (r.followed_weight, r.shortest_weight),
            (Some(secs(151)), Some(secs(89)))
        );
        let order: Vec<(String, Verdict, i64, i64)> = r
            .checks
            .iter()
            .map(|c| match c.evidence {
                Evidence::PathWeight { followed, shortest, .. } => (
                    s.name_of(c.node),
                    c.verdict,
                    followed.as_micros() / 1_000_000,
                    shortest.unwrap().as_micros() / 1_000_000,
                ),
                _ => unreachable!(),
            })
            .collect();
        let want: Vec<_> = want.iter().map(|(n, v, a, b)| (n.to_string(), *v, *a, *b)).collect();
        assert_eq!(order, want, "{rule:?}");
    }
}

#[test]
fn local_detection_two_attackers() {
    let s = seven_node_ac();
    let g = build(&s);
    let out = run_local_pipeline(&s, &g, &simulate(&s, &g)).unwrap();
    let flags: Vec<(String, String)> = out
        .merged()
        .evidence()
        .map(|c| (s.name_of(c.observer.unwrap()), s.name_of(c.node)))
        .collect();
    let want: Vec<(String, String)> = [("B", "A"), ("E", "C"), ("F", "C")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(flags, want);

    let by = |obs: &str| out.reports.iter().find(|r| r.observer == Some(id(&s, obs))).unwrap();
    match by("B").checks[0].evidence {
        Evidence::Timing {
            partial,
            window_start,
            rt_suspect,
            rt_self,
            ..
        } => {
            assert_eq!(
                (partial, window_start, rt_suspect, rt_self),
                (secs(6), secs(25), secs(6), secs(31))
            );
        }
        e => panic!("{e:?}"),
    }
    let f = by("F");
    assert_eq!(f.checks[0].verdict, Verdict::Benign);
    match f.checks[1].evidence {
        Evidence::SkippedWindow {
            rt_suspect,
            rt_relay,
            window_start,
            window_end,
            t_tr,
            ..
        } => {
            assert!(rt_suspect + t_tr < window_end && rt_relay + t_tr > window_start);
            assert_eq!(
                (rt_suspect + t_tr, window_end, rt_relay + t_tr, window_start),
                (secs(62), secs(95), secs(118), secs(90))
            );
        }
        e => panic!("{e:?}"),
    }
    // C checks B two hops back: 31 + 1 < 29 fails, so no second check.
    assert_eq!(by("C").checks.len(), 1);
    assert!(out.alerts.iter().all(|a| !a.notified.contains(&a.observer)));
    let b_alert = &out.alerts[0];
    assert_eq!(
        b_alert.notified.iter().map(|&n| s.name_of(n)).collect::<Vec<_>>(),
        ["S", "A", "C", "D", "E", "F"]
    );
}

#[test]
fn local_detection_single_attacker_and_benign() {
    let s = seven_node_a();
    let g = build(&s);
    let merged = run_local_pipeline(&s, &g, &simulate(&s, &g)).unwrap().merged();
    let flags: Vec<_> = merged.evidence().map(|c| (c.observer.unwrap(), c.node)).collect();
    assert_eq!(flags, [(id(&s, "B"), id(&s, "A"))]);

    let s = seven_node();
    let g = build(&s);
    let out = run_local_pipeline(&s, &g, &simulate(&s, &g)).unwrap();
    assert_eq!(out.reports.len(), 4);
    assert!(out.merged().flagged.is_empty());
    assert!(out.alerts.is_empty());
}

#[test]
fn report_uses_labels() {
    let s = seven_node_ac();
    let g = build(&s);
    let r = detect_global(&g, &simulate(&s, &g)).unwrap();
    let json = report::to_pretty(&report::global_view(&s, &r));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["mode"], "global");
    assert_eq!(v["flagged"], serde_json::json!(["A", "C"]));
    assert_eq!(v["evidence"][0]["node"], "C");
    assert_eq!(v["evidence"][0]["evidence"]["followed"], 92);
}
