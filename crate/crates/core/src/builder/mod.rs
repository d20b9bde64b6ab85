//! The three graph stages of a decision model.
//!
//! [`build_asg`] projects every model element into an abstract syntax graph,
//! [`simplify`] collapses it into the legal-analysis graph described by
//! [`GRAPH_SCHEMA`], and [`instantiate`] decorates that graph with the values
//! and rule firings of one decision.

mod asg;
mod instantiate;
mod simplify;

use thiserror::Error;

use crate::engine::DecisionInstance;
use crate::graph::{EdgeLabel, NodeLabel, PropertyGraph};
use crate::model::DecisionModel;

pub use asg::{build_asg, reconstruct_model};
pub use instantiate::{instantiate, value_scalar};
pub use simplify::simplify;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("malformed abstract syntax graph: {0}")]
    Malformed(String),
    #[error("instance does not belong to this model graph: {0}")]
    ModelMismatch(String),
}

/// Every edge of a simplified or instance graph matches one of these
/// (source label, edge label, target label) triples.
pub const GRAPH_SCHEMA: &[(NodeLabel, EdgeLabel, NodeLabel)] = &[
    (
        NodeLabel::ObjectType,
        EdgeLabel::RelatesTo,
        NodeLabel::ObjectType,
    ),
    (
        NodeLabel::ObjectType,
        EdgeLabel::HasVariable,
        NodeLabel::Variable,
    ),
    (NodeLabel::Variable, EdgeLabel::Condition, NodeLabel::Rule),
    (NodeLabel::Rule, EdgeLabel::Derives, NodeLabel::Variable),
    (NodeLabel::Variable, EdgeLabel::CalcInput, NodeLabel::Rule),
    (
        NodeLabel::InputMessage,
        EdgeLabel::Input,
        NodeLabel::Variable,
    ),
    (
        NodeLabel::Variable,
        EdgeLabel::Output,
        NodeLabel::OutputMessage,
    ),
    (NodeLabel::Source, EdgeLabel::SourceOf, NodeLabel::Rule),
    (
        NodeLabel::Service,
        EdgeLabel::HasMessage,
        NodeLabel::InputMessage,
    ),
    (
        NodeLabel::Service,
        EdgeLabel::HasMessage,
        NodeLabel::OutputMessage,
    ),
];

/// Legal-analysis concepts and the simplified-graph element that carries them.
pub const LEGAL_CONCEPTS: &[(&str, &str)] = &[
    ("legal subject", "ObjectType"),
    ("legal object", "ObjectType"),
    ("legal relationship", "RELATES_TO"),
    ("condition", "CONDITION"),
    ("derivation rule", "Rule"),
];

/// Legal-analysis concepts the decision models do not represent.
pub const UNMAPPED_LEGAL_CONCEPTS: &[&str] = &[
    "legal fact",
    "juridical act",
    "delegation power",
    "delegation elaboration",
];

/// Edges that do not match [`GRAPH_SCHEMA`], as human-readable messages.
pub fn schema_violations(graph: &PropertyGraph) -> Vec<String> {
    graph
        .edges()
        .filter_map(|e| {
            let from = graph.node(&e.from)?.label;
            let to = graph.node(&e.to)?.label;
            (!GRAPH_SCHEMA.contains(&(from, e.label, to)))
                .then(|| format!("{}: {from} -{}-> {to}", e.id, e.label))
        })
        .collect()
}

/// The simplified graph of a model.
pub fn model_graph(model: &DecisionModel) -> PropertyGraph {
    simplify(&build_asg(model))
}

/// The instance graph of an evaluated decision.
pub fn instance_graph(instance: &DecisionInstance) -> PropertyGraph {
    instantiate(&model_graph(instance.model()), instance)
        .expect("an instance always matches its own model")
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::{decode_inputs, evaluate};
    use crate::graph::Scalar;
    use crate::model::parse_model;

    const FIXTURE: &str = include_str!("../../../../fixtures/tax_interest.dm");
    const LATE: &str = include_str!("../../../../fixtures/late.json");
    const ON_TIME: &str = include_str!("../../../../fixtures/on_time.json");

    fn fixture() -> Arc<DecisionModel> {
        Arc::new(parse_model(FIXTURE).unwrap())
    }

    fn instance(json: &str) -> DecisionInstance {
        let m = fixture();
        let inputs = decode_inputs(&m, &serde_json::from_str(json).unwrap()).unwrap();
        evaluate(&m, &inputs).unwrap()
    }

    #[test]
    fn fixture_asg_round_trips() {
        let m = fixture();
        let asg = build_asg(&m);
        assert_eq!(
            asg.nodes_with(NodeLabel::Variable).count(),
            m.variables().count()
        );
        assert_eq!(reconstruct_model(&asg).unwrap(), *m);
    }

    #[test]
    fn simplified_fixture_conforms_to_schema() {
        let g = model_graph(&fixture());
        assert_eq!(schema_violations(&g), Vec::<String>::new());
        for id in [
            "var:payment_date-CONDITION->rule:late_payment",
            "var:payment_due_date-CONDITION->rule:late_payment",
            "rule:late_payment-DERIVES->var:overdue",
            "source:paid_too_late-SOURCE_OF->rule:paid_too_late",
        ] {
            assert!(g.edge(id).is_some(), "{id}");
        }
        let src = g.node("source:paid_too_late").unwrap();
        assert!(src
            .prop("uri")
            .and_then(Scalar::as_str)
            .unwrap()
            .starts_with("https://"));
    }

    #[test]
    fn rule_free_model_has_no_rules_or_sources() {
        let m = parse_model("model m object A { a: boolean } service S { in I(a) }").unwrap();
        let g = model_graph(&m);
        assert_eq!(g.nodes_with(NodeLabel::Rule).count(), 0);
        assert_eq!(g.nodes_with(NodeLabel::Source).count(), 0);
    }

    #[test]
    fn instantiation_marks_fired_rules() {
        let late = instance_graph(&instance(LATE));
        let rule = late.node("rule:late_payment").unwrap();
        assert_eq!(rule.prop("fired"), Some(&Scalar::Bool(true)));
        for e in late.in_edges("rule:late_payment") {
            assert_eq!(e.prop("satisfied"), Some(&Scalar::Bool(true)));
        }
        assert_eq!(
            late.node("var:tax_interest_amount").unwrap().prop("value"),
            Some(&Scalar::Str("15.34".into()))
        );

        let on_time = instance_graph(&instance(ON_TIME));
        assert_eq!(
            on_time.node("rule:late_payment").unwrap().prop("fired"),
            Some(&Scalar::Bool(false))
        );
        assert_eq!(
            on_time
                .edge("rule:late_payment-DERIVES->var:overdue")
                .unwrap()
                .prop("active"),
            Some(&Scalar::Bool(false))
        );
        assert_eq!(
            on_time.node("var:interest_days").unwrap().prop("origin"),
            Some(&Scalar::Str("unset".into()))
        );
        let ids = |g: &PropertyGraph| g.nodes().map(|n| n.id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&on_time), ids(&model_graph(&fixture())));
    }

    #[test]
    fn mismatched_instance_is_rejected() {
        let other = parse_model("model m object A { a: boolean }").unwrap();
        let err = instantiate(&model_graph(&other), &instance(LATE)).unwrap_err();
        assert!(matches!(err, BuildError::ModelMismatch(_)));
    }
}
