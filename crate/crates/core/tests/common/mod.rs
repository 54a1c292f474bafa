#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use tdaguard_core::scenario::{self, NodeId, Scenario};
use tdaguard_core::twig::{EdgeKind, SplitId, Twig, TwigVertex};
use tdaguard_core::Time;

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

pub fn seven_node() -> Scenario {
    scenario::load(data("seven-node.json")).unwrap()
}

pub fn seven_node_a() -> Scenario {
    scenario::load(data("seven-node-attack-a.json")).unwrap()
}

pub fn seven_node_ac() -> Scenario {
    scenario::load(data("seven-node-attack-ac.json")).unwrap()
}

pub fn secs(x: i64) -> Time {
    Time::from_secs(x)
}

pub fn id(s: &Scenario, name: &str) -> NodeId {
    s.node_by_name(name).unwrap_or_else(|| panic!("no node {name}"))
}

/// `"A^3.1"` style vertex.
pub fn vx(s: &Scenario, text: &str) -> TwigVertex {
    let (n, w) = text.split_once('^').unwrap();
    TwigVertex {
        node: id(s, n),
        window: w.parse::<SplitId>().unwrap(),
    }
}

pub fn names(s: &Scenario, g: &Twig, path: &[usize]) -> Vec<String> {
    path.iter()
        .map(|&i| {
            let v = g.vertices()[i];
            format!("{}^{}", s.name_of(v.node), v.window)
        })
        .collect()
}

pub fn label_list(s: &Scenario, list: &str) -> Vec<TwigVertex> {
    list.split(',').map(|t| vx(s, t.trim())).collect()
}

/// Exhaustive search over simple paths, built only from the public edge
/// list. Returns the minimum by (weight, hops, vertex sequence).
pub fn brute_force(g: &Twig, from: TwigVertex, to: NodeId) -> Option<(Time, Vec<TwigVertex>)> {
    let mut adj: HashMap<TwigVertex, Vec<(TwigVertex, Time)>> = HashMap::new();
    for e in g.edges() {
        adj.entry(e.u).or_default().push((e.v, e.weight));
        if e.kind == EdgeKind::Undirected {
            adj.entry(e.v).or_default().push((e.u, e.weight));
        }
    }
    fn dfs(
        adj: &HashMap<TwigVertex, Vec<(TwigVertex, Time)>>,
        to: NodeId,
        path: &mut Vec<TwigVertex>,
        w: Time,
        best: &mut Option<(Time, usize, Vec<TwigVertex>)>,
    ) {
        let v = *path.last().unwrap();
        if v.node == to {
            let cand = (w, path.len(), path.clone());
            if best.as_ref().is_none_or(|b| cand < *b) {
                *best = Some(cand);
            }
            return;
        }
        for &(u, ew) in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if !path.contains(&u) {
                path.push(u);
                dfs(adj, to, path, w + ew, best);
                path.pop();
            }
        }
    }
    let mut best = None;
    dfs(&adj, to, &mut vec![from], Time::ZERO, &mut best);
    best.map(|(w, _, p)| (w, p))
}
