mod common;

use std::sync::Arc;

use common::{fixture, fixture_inputs, models, pick_inputs, CRIPPLED, LATE, ON_TIME};
use explaineo::builder::{
    build_asg, instance_graph, model_graph, reconstruct_model, schema_violations,
};
use explaineo::engine::evaluate;
use explaineo::graph::{EdgeLabel, NodeLabel, PropertyGraph, Scalar};
use explaineo::model::{parse_model, print_model};
use explaineo::verify::run_all_checks;
use proptest::collection::vec;
use proptest::prelude::*;

fn same_topology(a: &PropertyGraph, b: &PropertyGraph) -> bool {
    a.nodes()
        .map(|n| (&n.id, n.label))
        .eq(b.nodes().map(|n| (&n.id, n.label)))
        && a.edges()
            .map(|e| (&e.id, &e.from, &e.to, e.label))
            .eq(b.edges().map(|e| (&e.id, &e.from, &e.to, e.label)))
}

fn check_instance_graph(graph: &PropertyGraph, plain: &PropertyGraph) {
    assert!(same_topology(graph, plain));
    assert!(schema_violations(graph).is_empty());
    for n in plain.nodes() {
        for (k, v) in &n.properties {
            assert_eq!(graph.node(&n.id).unwrap().prop(k), Some(v), "{} {k}", n.id);
        }
    }
}

#[test]
fn fixture_graphs_conform() {
    let model = fixture();
    let plain = model_graph(&model);
    assert!(schema_violations(&plain).is_empty());
    for json in [LATE, ON_TIME] {
        let instance = evaluate(&model, &fixture_inputs(&model, json)).unwrap();
        check_instance_graph(&instance_graph(&instance), &plain);
    }
    let crippled = parse_model(CRIPPLED).unwrap();
    assert!(schema_violations(&model_graph(&crippled)).is_empty());
    assert_eq!(reconstruct_model(&build_asg(&model)).unwrap(), *model);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn abstract_syntax_graph_is_lossless(m in models()) {
        let model = parse_model(&m.source).unwrap();
        let asg = build_asg(&model);
        let back = reconstruct_model(&asg).unwrap();
        prop_assert_eq!(print_model(&back), print_model(&model));
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(build_asg(&back), asg);
    }

    #[test]
    fn simplified_graphs_follow_the_schema(m in models()) {
        let model = parse_model(&m.source).unwrap();
        let g = model_graph(&model);
        prop_assert_eq!(schema_violations(&g), Vec::<String>::new());
        prop_assert_eq!(g.nodes_with(NodeLabel::Variable).count(), model.variables().count());
        prop_assert_eq!(g.nodes_with(NodeLabel::Rule).count(), model.rule_model.len());
        for rule in &model.rule_model {
            let derives: Vec<_> = g
                .out_edges(&format!("rule:{}", rule.name))
                .filter(|e| e.label == EdgeLabel::Derives)
                .collect();
            prop_assert_eq!(derives.len(), 1);
            prop_assert_eq!(&derives[0].to, &format!("var:{}", rule.action.target().name));
            for v in rule.condition_variables() {
                let id = format!("var:{v}");
                let rule_id = format!("rule:{}", rule.name);
                let linked = g
                    .out_edges(&id)
                    .any(|e| e.label == EdgeLabel::Condition && e.to == rule_id);
                prop_assert!(linked, "{} -> {}", id, rule_id);
            }
        }
        prop_assert!(run_all_checks(&model, None).is_ok());
    }

    #[test]
    fn instance_graphs_keep_the_model_topology(m in models(), choice in vec(0usize..5, 1..8)) {
        let model = Arc::new(parse_model(&m.source).unwrap());
        let Ok(instance) = evaluate(&model, &pick_inputs(&model, &m.inputs, &choice)) else {
            return Ok(());
        };
        let plain = model_graph(&model);
        let g = instance_graph(&instance);
        check_instance_graph(&g, &plain);
        for rule in &model.rule_model {
            let node = g.node(&format!("rule:{}", rule.name)).unwrap();
            prop_assert_eq!(node.prop("fired"), Some(&Scalar::Bool(instance.fired(&rule.name))));
            for e in g.out_edges(&node.id).filter(|e| e.label == EdgeLabel::Derives) {
                prop_assert_eq!(e.prop("active"), Some(&Scalar::Bool(instance.fired(&rule.name))));
            }
        }
    }
}
