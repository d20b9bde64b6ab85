mod common;

use std::collections::BTreeSet;

use common::graphs;
use explaineo::graph::{
    filter, neighbourhood, reachable, subgraph, Direction, EdgeLabel, NodeLabel, PropertyGraph,
};
use explaineo::render::{export_graph_script, parse_script};
use proptest::collection::vec;
use proptest::prelude::*;

/// Nodes reachable from `from` by repeated relaxation over an edge list.
fn closure(
    g: &PropertyGraph,
    from: &str,
    labels: &[EdgeLabel],
    backward: bool,
) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    loop {
        let before = seen.len();
        for e in g.edges().filter(|e| labels.contains(&e.label)) {
            let (a, b) = if backward {
                (&e.to, &e.from)
            } else {
                (&e.from, &e.to)
            };
            if seen.contains(a) {
                seen.insert(b.clone());
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}

fn undirected_closure(g: &PropertyGraph, from: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([from.to_string()]);
    loop {
        let before = seen.len();
        for e in g.edges() {
            if seen.contains(&e.from) || seen.contains(&e.to) {
                seen.insert(e.from.clone());
                seen.insert(e.to.clone());
            }
        }
        if seen.len() == before {
            return seen;
        }
    }
}

fn label_subset(mask: &[bool]) -> Vec<EdgeLabel> {
    EdgeLabel::ALL
        .into_iter()
        .zip(mask.iter().cycle())
        .filter(|(_, m)| **m)
        .map(|(l, _)| l)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn reachability_matches_the_closure(
        g in graphs(),
        picks in vec((0usize..64, 0usize..64), 1..4),
        mask in vec(any::<bool>(), 15),
        backward in any::<bool>(),
    ) {
        let ids: Vec<&str> = g.nodes().map(|n| n.id.as_str()).collect();
        let labels = label_subset(&mask);
        let direction = if backward { Direction::Backward } else { Direction::Forward };
        for (a, b) in picks {
            let (from, to) = (ids[a % ids.len()], ids[b % ids.len()]);
            let r = reachable(&g, &[from], &[to], &labels, direction);
            prop_assert_eq!(r.found, closure(&g, from, &labels, backward).contains(to));
            if let Some(path) = r.path {
                prop_assert_eq!(path.nodes.first().map(String::as_str), Some(from));
                prop_assert_eq!(path.nodes.last().map(String::as_str), Some(to));
                prop_assert_eq!(path.edges.len() + 1, path.nodes.len());
                for (i, id) in path.edges.iter().enumerate() {
                    let e = g.edge(id).unwrap();
                    prop_assert!(labels.contains(&e.label));
                    let (x, y) = if backward { (&e.to, &e.from) } else { (&e.from, &e.to) };
                    prop_assert_eq!(x, &path.nodes[i]);
                    prop_assert_eq!(y, &path.nodes[i + 1]);
                }
            } else {
                prop_assert!(!r.found);
            }
        }
    }

    #[test]
    fn filtering_is_idempotent_and_induced(g in graphs(), keep in vec(any::<bool>(), 12), mask in vec(any::<bool>(), 15)) {
        let labels = label_subset(&mask);
        let node_ok = |n: &explaineo::graph::Node| keep[NodeLabel::ALL.iter().position(|l| *l == n.label).unwrap()];
        let once = filter(&g, node_ok, |e| labels.contains(&e.label));
        let twice = filter(&once, node_ok, |e| labels.contains(&e.label));
        prop_assert_eq!(&once, &twice);
        for e in once.edges() {
            prop_assert!(once.contains_node(&e.from) && once.contains_node(&e.to));
        }
        let expected = g.edges().filter(|e| {
            labels.contains(&e.label)
                && node_ok(g.node(&e.from).unwrap())
                && node_ok(g.node(&e.to).unwrap())
        }).count();
        prop_assert_eq!(once.edge_count(), expected);
        let ids: Vec<&str> = once.nodes().map(|n| n.id.as_str()).collect();
        let induced = subgraph(&g, ids.iter().copied());
        prop_assert_eq!(induced.node_count(), once.node_count());
    }

    #[test]
    fn neighbourhoods_grow_with_the_radius(g in graphs(), centre in 0usize..64, r in 0usize..5) {
        let id = g.nodes().nth(centre % g.node_count()).unwrap().id.clone();
        let small = neighbourhood(&g, &id, r, &EdgeLabel::ALL).unwrap();
        let big = neighbourhood(&g, &id, r + 1, &EdgeLabel::ALL).unwrap();
        prop_assert!(small.contains_node(&id));
        for n in small.nodes() {
            prop_assert!(big.contains_node(&n.id));
        }
        for e in small.edges() {
            prop_assert!(big.edge(&e.id).is_some());
        }
        let full = neighbourhood(&g, &id, g.node_count(), &EdgeLabel::ALL).unwrap();
        let undirected = undirected_closure(&g, &id);
        let got: BTreeSet<String> = full.nodes().map(|n| n.id.clone()).collect();
        prop_assert_eq!(&got, &undirected);
    }

    #[test]
    fn json_and_script_round_trip(g in graphs()) {
        let json = serde_json::to_string(&g).unwrap();
        let back: PropertyGraph = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &g);
        let script = export_graph_script(&g);
        prop_assert_eq!(script.lines().count(), g.node_count() + g.edge_count());
        prop_assert_eq!(parse_script(&script).unwrap(), g.clone());
        prop_assert_eq!(export_graph_script(&g), script);
    }
}

#[test]
fn closure_oracle_sanity() {
    let mut b = explaineo::graph::GraphBuilder::new();
    for id in ["a", "b", "c"] {
        b.node(id, NodeLabel::Variable, id, []).unwrap();
    }
    b.edge("a", EdgeLabel::Derives, "b", []);
    b.edge("b", EdgeLabel::Input, "c", []);
    let g = b.build().unwrap();
    let set = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
    assert_eq!(
        closure(&g, "a", &[EdgeLabel::Derives], false),
        set(&["a", "b"])
    );
    assert_eq!(
        closure(&g, "c", &EdgeLabel::ALL, true),
        set(&["a", "b", "c"])
    );
}
