use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{Edge, EdgeLabel, GraphError, Node, PropertyGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Follow edges from `from` to `to`.
    Forward,
    /// Follow edges against their direction.
    Backward,
}

/// A walk through the graph in traversal order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Path {
    pub nodes: Vec<String>,
    pub edges: Vec<String>,
}

impl Path {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reachability {
    pub found: bool,
    pub path: Option<Path>,
}

/// Keeps the nodes accepted by `node_pred` and the edges accepted by
/// `edge_pred` whose endpoints were both kept.
pub fn filter(
    graph: &PropertyGraph,
    node_pred: impl Fn(&Node) -> bool,
    edge_pred: impl Fn(&Edge) -> bool,
) -> PropertyGraph {
    let nodes: BTreeMap<String, Node> = graph
        .nodes
        .iter()
        .filter(|(_, n)| node_pred(n))
        .map(|(k, n)| (k.clone(), n.clone()))
        .collect();
    let edges = graph
        .edges
        .iter()
        .filter(|(_, e)| nodes.contains_key(&e.from) && nodes.contains_key(&e.to) && edge_pred(e))
        .map(|(k, e)| (k.clone(), e.clone()))
        .collect();
    PropertyGraph::from_parts(nodes, edges).expect("induced subgraphs are valid")
}

/// Induced subgraph on a node id set.
pub fn subgraph<'a>(
    graph: &PropertyGraph,
    ids: impl IntoIterator<Item = &'a str>,
) -> PropertyGraph {
    let keep: BTreeSet<&str> = ids.into_iter().collect();
    filter(graph, |n| keep.contains(n.id.as_str()), |_| true)
}

fn steps<'g>(
    graph: &'g PropertyGraph,
    node: &str,
    labels: &'g [EdgeLabel],
    direction: Direction,
) -> impl Iterator<Item = (&'g Edge, &'g str)> + 'g {
    let edges: Box<dyn Iterator<Item = &'g Edge>> = match direction {
        Direction::Forward => Box::new(graph.out_edges(node)),
        Direction::Backward => Box::new(graph.in_edges(node)),
    };
    edges.filter(|e| labels.contains(&e.label)).map(move |e| {
        let next = match direction {
            Direction::Forward => e.to.as_str(),
            Direction::Backward => e.from.as_str(),
        };
        (e, next)
    })
}

/// Decides whether some node of `to` can be reached from some node of `from`
/// using only edges labelled in `labels`. The witness is a shortest path and,
/// among those, the one with the lexicographically smallest node id sequence.
pub fn reachable(
    graph: &PropertyGraph,
    from: &[&str],
    to: &[&str],
    labels: &[EdgeLabel],
    direction: Direction,
) -> Reachability {
    let reverse = match direction {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    };
    // Distance from every node to the target set, along the traversal direction.
    let mut dist: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &t in to {
        if graph.contains_node(t) && !dist.contains_key(t) {
            dist.insert(t, 0);
            queue.push_back(t);
        }
    }
    while let Some(n) = queue.pop_front() {
        let d = dist[n];
        for (_, prev) in steps(graph, n, labels, reverse) {
            if !dist.contains_key(prev) {
                dist.insert(prev, d + 1);
                queue.push_back(prev);
            }
        }
    }

    let start = from
        .iter()
        .filter_map(|f| dist.get(f).map(|&d| (d, *f)))
        .min();
    let Some((mut d, start)) = start else {
        return Reachability {
            found: false,
            path: None,
        };
    };
    let mut path = Path {
        nodes: vec![start.to_string()],
        edges: Vec::new(),
    };
    let mut here = start;
    while d > 0 {
        let (edge, next) = steps(graph, here, labels, direction)
            .filter(|(_, next)| dist.get(next) == Some(&(d - 1)))
            .min_by(|(e1, n1), (e2, n2)| n1.cmp(n2).then_with(|| e1.id.cmp(&e2.id)))
            .expect("distance labels guarantee a successor");
        path.edges.push(edge.id.clone());
        path.nodes.push(next.to_string());
        here = next;
        d -= 1;
    }
    Reachability {
        found: true,
        path: Some(path),
    }
}

/// Nodes within `radius` undirected hops of `centre` over edges labelled in
/// `labels`, with the connecting edges of those labels.
pub fn neighbourhood(
    graph: &PropertyGraph,
    centre: &str,
    radius: usize,
    labels: &[EdgeLabel],
) -> Result<PropertyGraph, GraphError> {
    if !graph.contains_node(centre) {
        return Err(GraphError::UnknownNode(centre.to_string()));
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::from([(centre, 0)]);
    let mut queue = VecDeque::from([centre]);
    while let Some(n) = queue.pop_front() {
        let d = seen[n];
        if d == radius {
            continue;
        }
        let forward = steps(graph, n, labels, Direction::Forward);
        let backward = steps(graph, n, labels, Direction::Backward);
        for (_, next) in forward.chain(backward) {
            if !seen.contains_key(next) {
                seen.insert(next, d + 1);
                queue.push_back(next);
            }
        }
    }
    Ok(filter(
        graph,
        |n| seen.contains_key(n.id.as_str()),
        |e| labels.contains(&e.label),
    ))
}

/// Marks the listed nodes `highlight = true`; ids not in the graph are ignored.
pub fn highlight(view: PropertyGraph, ids: &[String]) -> PropertyGraph {
    let mut b = view.to_builder();
    for id in ids {
        if b.has_node(id) {
            b.set_node_property(id, "highlight", true)
                .expect("node exists");
        }
    }
    b.build().expect("highlighting adds properties only")
}
