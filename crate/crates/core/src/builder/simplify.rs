use std::collections::BTreeSet;

use crate::graph::{EdgeLabel, GraphBuilder, Node, NodeLabel, PropertyGraph};

/// Collapses an abstract syntax graph into the legal-analysis graph.
///
/// Conditions and calculations keep their printed text as rule properties;
/// their trees are replaced by one CONDITION or CALC_INPUT edge per distinct
/// variable they mention.
pub fn simplify(asg: &PropertyGraph) -> PropertyGraph {
    let mut b = GraphBuilder::new();
    for node in asg.nodes() {
        let mut node = node.clone();
        match node.label {
            NodeLabel::ObjectType => {
                node.properties
                    .insert("legal_concept".into(), "legal subject or object".into());
            }
            NodeLabel::Variable
            | NodeLabel::Service
            | NodeLabel::InputMessage
            | NodeLabel::OutputMessage
            | NodeLabel::Source => {}
            NodeLabel::Rule => node = rule_node(asg, &node),
            _ => continue,
        }
        b.add_node(node)
            .expect("node ids are unique in the source graph");
    }
    for edge in asg.edges() {
        let mut edge = edge.clone();
        match edge.label {
            EdgeLabel::RelatesTo => {
                edge.properties
                    .insert("legal_concept".into(), "legal relationship".into());
            }
            EdgeLabel::HasVariable
            | EdgeLabel::HasMessage
            | EdgeLabel::Input
            | EdgeLabel::Output
            | EdgeLabel::SourceOf => {}
            _ => continue,
        }
        b.add_edge(edge)
            .expect("edge ids are unique in the source graph");
    }
    for rule in asg.nodes_with(NodeLabel::Rule) {
        if let Some(cond) = child(asg, &rule.id, EdgeLabel::HasCondition) {
            for var in referenced(asg, cond, EdgeLabel::Contains) {
                b.edge(&var, EdgeLabel::Condition, &rule.id, []);
            }
        }
        if let Some(action) = child(asg, &rule.id, EdgeLabel::HasAction) {
            if let Some(expr) = child(asg, &action.id, EdgeLabel::Operand) {
                for var in referenced(asg, expr, EdgeLabel::Operand) {
                    b.edge(&var, EdgeLabel::CalcInput, &rule.id, []);
                }
            }
            if let Some(target) = child(asg, &action.id, EdgeLabel::Target) {
                b.edge(&rule.id, EdgeLabel::Derives, &target.id, []);
            }
        }
    }
    b.build()
        .expect("simplified graphs only keep edges between kept nodes")
}

fn child<'a>(asg: &'a PropertyGraph, id: &str, label: EdgeLabel) -> Option<&'a Node> {
    asg.out_edges(id)
        .find(|e| e.label == label)
        .and_then(|e| asg.node(&e.to))
}

fn rule_node(asg: &PropertyGraph, rule: &Node) -> Node {
    let mut node = rule.clone();
    let props = &mut node.properties;
    props.insert("legal_concept".into(), "derivation rule".into());
    if let Some(cond) = child(asg, &rule.id, EdgeLabel::HasCondition) {
        props.insert("condition".into(), cond.name().into());
    }
    if let Some(action) = child(asg, &rule.id, EdgeLabel::HasAction) {
        props.insert("action".into(), action.name().into());
        for key in ["kind", "value"] {
            if let Some(v) = action.prop(key) {
                props.insert(key.into(), v.clone());
            }
        }
    }
    node
}

/// Distinct variables referred to anywhere in the subtree under `root`.
fn referenced(asg: &PropertyGraph, root: &Node, tree: EdgeLabel) -> BTreeSet<String> {
    let mut vars = BTreeSet::new();
    let mut stack = vec![root.id.as_str()];
    while let Some(id) = stack.pop() {
        for e in asg.out_edges(id) {
            if e.label == EdgeLabel::RefersTo {
                vars.insert(e.to.clone());
            } else if e.label == tree {
                stack.push(&e.to);
            }
        }
    }
    vars
}
