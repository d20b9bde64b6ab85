//! A small in-memory labelled property graph.
//!
//! Graphs are assembled with a [`GraphBuilder`] and frozen into an immutable
//! [`PropertyGraph`]. Node and edge labels come from closed vocabularies.
//! Nodes and edges iterate in id order, so every output derived from a graph
//! is deterministic.

mod query;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use query::{
    filter, highlight, neighbourhood, reachable, subgraph, Direction, Path, Reachability,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeLabel {
    ObjectType,
    Variable,
    Rule,
    Service,
    InputMessage,
    OutputMessage,
    Source,
    // Abstract syntax graph only.
    Model,
    Condition,
    Atom,
    Action,
    Expression,
}

impl NodeLabel {
    pub const ALL: [NodeLabel; 12] = [
        NodeLabel::ObjectType,
        NodeLabel::Variable,
        NodeLabel::Rule,
        NodeLabel::Service,
        NodeLabel::InputMessage,
        NodeLabel::OutputMessage,
        NodeLabel::Source,
        NodeLabel::Model,
        NodeLabel::Condition,
        NodeLabel::Atom,
        NodeLabel::Action,
        NodeLabel::Expression,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeLabel::ObjectType => "ObjectType",
            NodeLabel::Variable => "Variable",
            NodeLabel::Rule => "Rule",
            NodeLabel::Service => "Service",
            NodeLabel::InputMessage => "InputMessage",
            NodeLabel::OutputMessage => "OutputMessage",
            NodeLabel::Source => "Source",
            NodeLabel::Model => "Model",
            NodeLabel::Condition => "Condition",
            NodeLabel::Atom => "Atom",
            NodeLabel::Action => "Action",
            NodeLabel::Expression => "Expression",
        }
    }

    pub fn parse(s: &str) -> Option<NodeLabel> {
        NodeLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }

    pub fn is_message(self) -> bool {
        matches!(self, NodeLabel::InputMessage | NodeLabel::OutputMessage)
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeLabel {
    RelatesTo,
    HasVariable,
    Condition,
    Derives,
    CalcInput,
    Input,
    Output,
    SourceOf,
    HasMessage,
    // Abstract syntax graph only.
    Contains,
    HasCondition,
    Operand,
    RefersTo,
    HasAction,
    Target,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 15] = [
        EdgeLabel::RelatesTo,
        EdgeLabel::HasVariable,
        EdgeLabel::Condition,
        EdgeLabel::Derives,
        EdgeLabel::CalcInput,
        EdgeLabel::Input,
        EdgeLabel::Output,
        EdgeLabel::SourceOf,
        EdgeLabel::HasMessage,
        EdgeLabel::Contains,
        EdgeLabel::HasCondition,
        EdgeLabel::Operand,
        EdgeLabel::RefersTo,
        EdgeLabel::HasAction,
        EdgeLabel::Target,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::RelatesTo => "RELATES_TO",
            EdgeLabel::HasVariable => "HAS_VARIABLE",
            EdgeLabel::Condition => "CONDITION",
            EdgeLabel::Derives => "DERIVES",
            EdgeLabel::CalcInput => "CALC_INPUT",
            EdgeLabel::Input => "INPUT",
            EdgeLabel::Output => "OUTPUT",
            EdgeLabel::SourceOf => "SOURCE_OF",
            EdgeLabel::HasMessage => "HAS_MESSAGE",
            EdgeLabel::Contains => "CONTAINS",
            EdgeLabel::HasCondition => "HAS_CONDITION",
            EdgeLabel::Operand => "OPERAND",
            EdgeLabel::RefersTo => "REFERS_TO",
            EdgeLabel::HasAction => "HAS_ACTION",
            EdgeLabel::Target => "TARGET",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeLabel> {
        EdgeLabel::ALL.into_iter().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scalar property value. Floats must be finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl Scalar {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(b) => Some(*b),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x:?}"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Str(s.to_string())
    }
}

impl From<String> for Scalar {
    fn from(s: String) -> Self {
        Scalar::Str(s)
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

impl From<i64> for Scalar {
    fn from(i: i64) -> Self {
        Scalar::Int(i)
    }
}

impl From<usize> for Scalar {
    fn from(i: usize) -> Self {
        Scalar::Int(i as i64)
    }
}

pub type Properties = BTreeMap<String, Scalar>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: NodeLabel,
    pub properties: Properties,
}

impl Node {
    pub fn name(&self) -> &str {
        self.properties
            .get("name")
            .and_then(Scalar::as_str)
            .unwrap_or(&self.id)
    }

    pub fn prop(&self, key: &str) -> Option<&Scalar> {
        self.properties.get(key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub label: EdgeLabel,
    pub properties: Properties,
}

impl Edge {
    pub fn prop(&self, key: &str) -> Option<&Scalar> {
        self.properties.get(key)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("edge `{edge}` refers to missing node `{node}`")]
    DanglingEdge { edge: String, node: String },
    #[error("node `{0}` has no name property")]
    MissingName(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
}

/// A frozen directed multigraph.
#[derive(Debug, Clone, Default)]
pub struct PropertyGraph {
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<String, Edge>,
    out: BTreeMap<String, Vec<String>>,
    inc: BTreeMap<String, Vec<String>>,
}

impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl PropertyGraph {
    pub fn empty() -> Self {
        PropertyGraph::default()
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn edge(&self, id: &str) -> Option<&Edge> {
        self.edges.get(id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes_with(&self, label: NodeLabel) -> impl Iterator<Item = &Node> {
        self.nodes.values().filter(move |n| n.label == label)
    }

    /// Outgoing edges of a node, in id order.
    pub fn out_edges(&self, id: &str) -> impl Iterator<Item = &Edge> {
        self.out
            .get(id)
            .into_iter()
            .flatten()
            .map(move |e| &self.edges[e])
    }

    /// Incoming edges of a node, in id order.
    pub fn in_edges(&self, id: &str) -> impl Iterator<Item = &Edge> {
        self.inc
            .get(id)
            .into_iter()
            .flatten()
            .map(move |e| &self.edges[e])
    }

    pub fn incident_edges(&self, id: &str) -> impl Iterator<Item = &Edge> {
        self.out_edges(id).chain(self.in_edges(id))
    }

    /// Starts a new builder seeded with this graph's contents.
    pub fn to_builder(&self) -> GraphBuilder {
        GraphBuilder {
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        }
    }

    fn from_parts(
        nodes: BTreeMap<String, Node>,
        edges: BTreeMap<String, Edge>,
    ) -> Result<PropertyGraph, GraphError> {
        let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut inc: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for node in nodes.values() {
            if !matches!(node.properties.get("name"), Some(Scalar::Str(_))) {
                return Err(GraphError::MissingName(node.id.clone()));
            }
        }
        for edge in edges.values() {
            for end in [&edge.from, &edge.to] {
                if !nodes.contains_key(end) {
                    return Err(GraphError::DanglingEdge {
                        edge: edge.id.clone(),
                        node: end.clone(),
                    });
                }
            }
            out.entry(edge.from.clone())
                .or_default()
                .push(edge.id.clone());
            inc.entry(edge.to.clone())
                .or_default()
                .push(edge.id.clone());
        }
        Ok(PropertyGraph {
            nodes,
            edges,
            out,
            inc,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("graphs serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graphs serialize")
    }
}

#[derive(Serialize, Deserialize)]
struct GraphDocument {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl Serialize for PropertyGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PropertyGraph", 2)?;
        st.serialize_field("nodes", &self.nodes.values().collect::<Vec<_>>())?;
        st.serialize_field("edges", &self.edges.values().collect::<Vec<_>>())?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PropertyGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = GraphDocument::deserialize(d)?;
        let mut b = GraphBuilder::new();
        for n in doc.nodes {
            b.add_node(n).map_err(serde::de::Error::custom)?;
        }
        for e in doc.edges {
            b.add_edge(e).map_err(serde::de::Error::custom)?;
        }
        b.build().map_err(serde::de::Error::custom)
    }
}

/// Mutable staging area for a [`PropertyGraph`].
#[derive(Debug, Clone, Default)]
pub struct GraphBuilder {
    nodes: BTreeMap<String, Node>,
    edges: BTreeMap<String, Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        GraphBuilder::default()
    }

    pub fn add_node(&mut self, node: Node) -> Result<&mut Self, GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(self)
    }

    /// Adds a node with a `name` property and any extra properties.
    pub fn node(
        &mut self,
        id: impl Into<String>,
        label: NodeLabel,
        name: impl Into<String>,
        props: impl IntoIterator<Item = (&'static str, Scalar)>,
    ) -> Result<&mut Self, GraphError> {
        let mut properties: Properties =
            props.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        properties.insert("name".into(), Scalar::Str(name.into()));
        self.add_node(Node {
            id: id.into(),
            label,
            properties,
        })
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<&mut Self, GraphError> {
        if self.edges.contains_key(&edge.id) {
            return Err(GraphError::DuplicateEdge(edge.id));
        }
        self.edges.insert(edge.id.clone(), edge);
        Ok(self)
    }

    /// Adds an edge with id `from-LABEL->to`, suffixed `#n` when that id is taken.
    pub fn edge(
        &mut self,
        from: &str,
        label: EdgeLabel,
        to: &str,
        props: impl IntoIterator<Item = (&'static str, Scalar)>,
    ) -> &mut Self {
        let base = format!("{from}-{label}->{to}");
        let mut id = base.clone();
        let mut n = 2;
        while self.edges.contains_key(&id) {
            id = format!("{base}#{n}");
            n += 1;
        }
        let edge = Edge {
            id: id.clone(),
            from: from.to_string(),
            to: to.to_string(),
            label,
            properties: props.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        };
        self.edges.insert(id, edge);
        self
    }

    pub fn has_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn set_node_property(
        &mut self,
        id: &str,
        key: &str,
        value: impl Into<Scalar>,
    ) -> Result<&mut Self, GraphError> {
        let node = self
            .nodes
            .get_mut(id)
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
        node.properties.insert(key.to_string(), value.into());
        Ok(self)
    }

    pub fn set_edge_property(
        &mut self,
        id: &str,
        key: &str,
        value: impl Into<Scalar>,
    ) -> Result<&mut Self, GraphError> {
        let edge = self
            .edges
            .get_mut(id)
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))?;
        edge.properties.insert(key.to_string(), value.into());
        Ok(self)
    }

    /// Freezes the graph, checking that every edge endpoint exists and every
    /// node is named.
    pub fn build(self) -> Result<PropertyGraph, GraphError> {
        PropertyGraph::from_parts(self.nodes, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_broken_graphs() {
        let mut b = GraphBuilder::new();
        b.node("a", NodeLabel::Variable, "a", []).unwrap();
        assert_eq!(
            b.node("a", NodeLabel::Variable, "a", []).unwrap_err(),
            GraphError::DuplicateNode("a".into())
        );
        b.edge("a", EdgeLabel::Condition, "b", []);
        assert!(matches!(b.build(), Err(GraphError::DanglingEdge { .. })));

        let mut b = GraphBuilder::new();
        b.add_node(Node {
            id: "n".into(),
            label: NodeLabel::Rule,
            properties: Properties::new(),
        })
        .unwrap();
        assert_eq!(b.build().unwrap_err(), GraphError::MissingName("n".into()));
    }

    #[test]
    fn edge_ids_are_disambiguated() {
        let mut b = GraphBuilder::new();
        b.node("a", NodeLabel::Variable, "a", []).unwrap();
        b.node("r", NodeLabel::Rule, "r", []).unwrap();
        b.edge("a", EdgeLabel::Condition, "r", []);
        b.edge("a", EdgeLabel::Condition, "r", []);
        let g = b.build().unwrap();
        let ids: Vec<_> = g.edges().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["a-CONDITION->r", "a-CONDITION->r#2"]);
    }

    #[test]
    fn json_has_stable_shape() {
        let mut b = GraphBuilder::new();
        b.node("v", NodeLabel::Variable, "v", [("kind", "boolean".into())])
            .unwrap();
        b.node("r", NodeLabel::Rule, "r", [("fired", true.into())])
            .unwrap();
        b.edge("r", EdgeLabel::Derives, "v", [("active", true.into())]);
        let g = b.build().unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(
            json,
            r#"{"nodes":[{"id":"r","label":"Rule","properties":{"fired":true,"name":"r"}},{"id":"v","label":"Variable","properties":{"kind":"boolean","name":"v"}}],"edges":[{"id":"r-DERIVES->v","from":"r","to":"v","label":"DERIVES","properties":{"active":true}}]}"#
        );
        let back: PropertyGraph = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.out_edges("r").count(), 1);
    }
}
