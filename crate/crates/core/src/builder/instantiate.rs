use crate::engine::{eval_atom, DecisionInstance, Origin};
use crate::graph::{EdgeLabel, NodeLabel, PropertyGraph, Scalar};
use crate::ids;
use crate::model::{print_action, print_condition, Value};

use super::BuildError;

/// Graph form of a value: booleans stay booleans, everything else is its
/// display text so that decimals and dates survive exactly.
pub fn value_scalar(value: &Value) -> Scalar {
    match value {
        Value::Bool(b) => Scalar::Bool(*b),
        other => Scalar::Str(other.to_string()),
    }
}

/// Decorates a simplified graph with one decision.
///
/// Variable nodes gain `origin` and, when set, `value` (derived ones also
/// `rule`); rule nodes gain `fired` and, when fired, `round`. A CONDITION
/// edge is `satisfied` when every atom of the rule's condition that mentions
/// the variable holds, unset values counting as not holding. DERIVES edges
/// gain `active`, true exactly for fired rules.
pub fn instantiate(
    simplified: &PropertyGraph,
    instance: &DecisionInstance,
) -> Result<PropertyGraph, BuildError> {
    let model = instance.model();
    let mismatch = |m: String| BuildError::ModelMismatch(m);

    let graph_vars = simplified.nodes_with(NodeLabel::Variable).count();
    let graph_rules = simplified.nodes_with(NodeLabel::Rule).count();
    if graph_vars != model.variables().count() || graph_rules != model.rule_model.len() {
        return Err(mismatch(format!(
            "graph has {graph_vars} variables and {graph_rules} rules, model `{}` has {} and {}",
            model.name,
            model.variables().count(),
            model.rule_model.len()
        )));
    }

    let env = instance.env();
    let mut b = simplified.to_builder();
    for node in simplified.nodes_with(NodeLabel::Variable) {
        let name = node.name();
        let decl = model
            .variable(name)
            .ok_or_else(|| mismatch(format!("unknown variable `{name}`")))?;
        if node.prop("kind").and_then(Scalar::as_str) != Some(decl.kind.keyword()) {
            return Err(mismatch(format!("variable `{name}` has a different kind")));
        }
        let binding = instance
            .binding(name)
            .expect("instances bind every declared variable");
        let (origin, rule) = match &binding.origin {
            Origin::Input => ("input", None),
            Origin::Derived(r) => ("derived", Some(r.as_str())),
            Origin::Unset => ("unset", None),
        };
        b.set_node_property(&node.id, "origin", origin)
            .expect("node exists");
        if let Some(v) = &binding.value {
            b.set_node_property(&node.id, "value", value_scalar(v))
                .expect("node exists");
        }
        if let Some(r) = rule {
            b.set_node_property(&node.id, "rule", r)
                .expect("node exists");
        }
    }

    for node in simplified.nodes_with(NodeLabel::Rule) {
        let name = node.name();
        let rule = model
            .rule(name)
            .ok_or_else(|| mismatch(format!("unknown rule `{name}`")))?;
        let same_condition = node.prop("condition").and_then(Scalar::as_str)
            == rule.condition.as_ref().map(print_condition).as_deref();
        let same_action = node.prop("action").and_then(Scalar::as_str)
            == Some(print_action(&rule.action).as_str());
        if !same_condition || !same_action {
            return Err(mismatch(format!("rule `{name}` differs")));
        }
        let step = instance.trace().iter().find(|s| s.rule == name);
        b.set_node_property(&node.id, "fired", step.is_some())
            .expect("node exists");
        if let Some(step) = step {
            b.set_node_property(&node.id, "round", step.round)
                .expect("node exists");
        }
        for edge in simplified.in_edges(&node.id) {
            if edge.label != EdgeLabel::Condition {
                continue;
            }
            let var = ids::name_of(&edge.from);
            let satisfied = rule
                .condition
                .iter()
                .flat_map(|c| c.atoms())
                .all(|a| !a.mentions(var) || eval_atom(model, a, &env) == Some(true));
            b.set_edge_property(&edge.id, "satisfied", satisfied)
                .expect("edge exists");
        }
        for edge in simplified.out_edges(&node.id) {
            if edge.label == EdgeLabel::Derives {
                b.set_edge_property(&edge.id, "active", step.is_some())
                    .expect("edge exists");
            }
        }
    }
    Ok(b.build().expect("instantiation adds properties only"))
}
