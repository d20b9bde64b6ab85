//! Questions about the model itself.

use std::collections::BTreeSet;

use crate::builder::{instance_graph, model_graph};
use crate::engine::DecisionInstance;
use crate::graph::{filter, highlight, EdgeLabel, NodeLabel, PropertyGraph};
use crate::ids;
use crate::model::{print_domain, Action, DecisionModel, Message, Service};
use crate::verify::{join_names, run_check, CheckId, CheckReport};

use super::{
    condition_text, expr_text, push_citation, source_text, Answer, ExplainError, QType, Question,
    Table, Vocabulary,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    Object,
    Rule,
    Service,
    Full,
}

impl View {
    pub fn parse(s: &str) -> Option<View> {
        match s {
            "object" => Some(View::Object),
            "rule" => Some(View::Rule),
            "service" => Some(View::Service),
            "full" => Some(View::Full),
            _ => None,
        }
    }
}

fn answer(qtype: QType, text: String, tables: Vec<Table>, view: PropertyGraph) -> Answer {
    Answer {
        question: Question::new(qtype),
        text,
        tables,
        graph_view: view,
        citations: Vec::new(),
    }
}

fn services<'m>(
    model: &'m DecisionModel,
    name: Option<&str>,
) -> Result<Vec<&'m Service>, ExplainError> {
    match name {
        Some(n) => model
            .service(n)
            .map(|s| vec![s])
            .ok_or_else(|| ExplainError::UnknownService(n.to_string())),
        None => Ok(model.service_model.iter().collect()),
    }
}

fn message_answer(
    model: &DecisionModel,
    service: Option<&str>,
    vocab: Vocabulary,
    output: bool,
) -> Result<Answer, ExplainError> {
    let services = services(model, service)?;
    let (title, direction) = if output {
        ("Output", "output")
    } else {
        ("Input", "input")
    };
    let mut table = Table::new(title, &["message", "variable", "kind", "domain", "unit"]);
    let mut sentences = Vec::new();
    let mut nodes = Vec::new();
    for s in &services {
        nodes.push(ids::service(&s.name));
        let messages: &[Message] = if output {
            &s.output_messages
        } else {
            &s.input_messages
        };
        let mut described = Vec::new();
        for msg in messages {
            nodes.push(ids::message(&msg.name));
            let vars: Vec<String> = msg.variables.iter().map(|v| vocab.name(&v.name)).collect();
            described.push(if vars.is_empty() {
                format!("{} (empty)", vocab.name(&msg.name))
            } else {
                format!("{} ({})", vocab.name(&msg.name), join_names(&vars))
            });
            for v in &msg.variables {
                nodes.push(ids::var(&v.name));
                let decl = model.variable(&v.name);
                table.push(vec![
                    msg.name.clone(),
                    v.name.clone(),
                    decl.map(|d| d.kind.keyword().to_string())
                        .unwrap_or_default(),
                    decl.and_then(|d| d.domain.as_deref().map(print_domain))
                        .unwrap_or_default(),
                    decl.and_then(|d| d.unit.clone()).unwrap_or_default(),
                ]);
            }
        }
        let noun = if described.len() == 1 {
            "message"
        } else {
            "messages"
        };
        sentences.push(if described.is_empty() {
            format!(
                "Service {} has no {direction} messages.",
                vocab.name(&s.name)
            )
        } else {
            format!(
                "Service {} has {direction} {noun} {}.",
                vocab.name(&s.name),
                join_names(&described)
            )
        });
    }
    if sentences.is_empty() {
        sentences.push("The model has no services.".into());
    }
    let graph = model_graph(model);
    let keep: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
    let view = filter(
        &graph,
        |n| keep.contains(n.id.as_str()),
        |e| match e.label {
            EdgeLabel::HasMessage => true,
            EdgeLabel::Input => !output,
            EdgeLabel::Output => output,
            _ => false,
        },
    );
    let qtype = if output { QType::Output } else { QType::Input };
    Ok(answer(qtype, sentences.join(" "), vec![table], view))
}

pub fn answer_input(
    model: &DecisionModel,
    service: Option<&str>,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    message_answer(model, service, vocab, false)
}

pub fn answer_output(
    model: &DecisionModel,
    service: Option<&str>,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    message_answer(model, service, vocab, true)
}

const SLICE: [EdgeLabel; 5] = [
    EdgeLabel::Derives,
    EdgeLabel::Condition,
    EdgeLabel::CalcInput,
    EdgeLabel::Input,
    EdgeLabel::SourceOf,
];

/// Everything `variable` depends on: the rules deriving it, their inputs,
/// recursively, with the input messages and legal sources on the way.
pub(crate) fn derivation_slice(
    model: &DecisionModel,
    variable: &str,
) -> Result<PropertyGraph, ExplainError> {
    if model.variable(variable).is_none() {
        return Err(ExplainError::UnknownVariable(variable.to_string()));
    }
    if model.rules_deriving(variable).next().is_none() {
        return Err(ExplainError::NeverDerived(variable.to_string()));
    }
    let graph = model_graph(model);
    let start = ids::var(variable);
    let mut seen: BTreeSet<String> = BTreeSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for e in graph.in_edges(&n) {
            if SLICE.contains(&e.label) && seen.insert(e.from.clone()) {
                stack.push(e.from.clone());
            }
        }
    }
    let slice = filter(
        &graph,
        |n| seen.contains(&n.id),
        |e| SLICE.contains(&e.label),
    );
    Ok(highlight(slice, &[ids::var(variable)]))
}

pub fn answer_how(
    model: &DecisionModel,
    variable: &str,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    let view = derivation_slice(model, variable)?;
    let mut table = Table::new("Rules", &["rule", "condition", "action", "source"]);
    let mut sentences = Vec::new();
    let mut citations = Vec::new();
    for rule in model.rules_deriving(variable) {
        let (how, action) = match &rule.action {
            Action::Derivation { value, .. } => (format!("sets it to {value}"), value.to_string()),
            Action::Calculation { expr, .. } => (
                format!("calculates it as {}", expr_text(expr, vocab)),
                crate::model::print_expr(expr),
            ),
        };
        let when = match &rule.condition {
            Some(c) => format!(" when {}", condition_text(c, vocab)),
            None => String::new(),
        };
        let source = rule
            .source
            .as_ref()
            .map(|s| format!(" ({})", source_text(s)))
            .unwrap_or_default();
        sentences.push(format!(
            "rule {}{source}, which {how}{when}",
            vocab.name(&rule.name)
        ));
        table.push(vec![
            rule.name.clone(),
            rule.condition
                .as_ref()
                .map(crate::model::print_condition)
                .unwrap_or_default(),
            action,
            rule.source.as_ref().map(source_text).unwrap_or_default(),
        ]);
        push_citation(&mut citations, rule.source.clone());
    }
    let inputs: Vec<String> = view
        .nodes_with(NodeLabel::Variable)
        .map(|n| n.name())
        .filter(|v| model.is_input(v) && *v != variable)
        .map(|v| vocab.name(v))
        .collect();
    let mut text = format!(
        "{} is derived by {}.",
        vocab.name(variable),
        sentences.join("; ")
    );
    if !inputs.is_empty() {
        text.push_str(&format!(
            " It depends on the inputs {}.",
            join_names(&inputs)
        ));
    }
    let mut a = answer(QType::How, text, vec![table], view);
    a.citations = citations;
    Ok(a)
}

pub fn answer_visualisation(
    model: &DecisionModel,
    instance: Option<&DecisionInstance>,
    view: View,
) -> Answer {
    let graph = match instance {
        Some(i) => instance_graph(i),
        None => model_graph(model),
    };
    let shown = match view {
        View::Full => graph,
        View::Object => filter(
            &graph,
            |n| matches!(n.label, NodeLabel::ObjectType | NodeLabel::Variable),
            |e| matches!(e.label, EdgeLabel::RelatesTo | EdgeLabel::HasVariable),
        ),
        View::Rule => filter(
            &graph,
            |n| {
                matches!(
                    n.label,
                    NodeLabel::ObjectType | NodeLabel::Variable | NodeLabel::Rule
                )
            },
            |e| {
                matches!(
                    e.label,
                    EdgeLabel::RelatesTo
                        | EdgeLabel::HasVariable
                        | EdgeLabel::Condition
                        | EdgeLabel::Derives
                        | EdgeLabel::CalcInput
                )
            },
        ),
        View::Service => {
            let vars: BTreeSet<String> = graph
                .edges()
                .filter(|e| matches!(e.label, EdgeLabel::Input | EdgeLabel::Output))
                .flat_map(|e| [e.from.clone(), e.to.clone()])
                .collect();
            filter(
                &graph,
                |n| n.label == NodeLabel::Service || n.label.is_message() || vars.contains(&n.id),
                |e| {
                    matches!(
                        e.label,
                        EdgeLabel::HasMessage | EdgeLabel::Input | EdgeLabel::Output
                    )
                },
            )
        }
    };
    answer(QType::Visualisation, String::new(), Vec::new(), shown)
}

pub fn answer_whether(
    model: &DecisionModel,
    check: &str,
    service: Option<&str>,
) -> Result<Answer, ExplainError> {
    let id = CheckId::parse(check).ok_or_else(|| ExplainError::UnknownCheck(check.to_string()))?;
    let report = run_check(model, id, service)?;
    let table = Table::from(&report);
    Ok(answer(
        QType::Whether,
        report.text,
        vec![table],
        report.graph_view,
    ))
}

impl From<&CheckReport> for Table {
    fn from(report: &CheckReport) -> Table {
        let mut table = Table::new(
            report.check.question(),
            &["element", "kind", "status", "detail"],
        );
        for row in &report.table {
            table.push(vec![
                row.element.clone(),
                row.kind.clone(),
                row.status.as_str().to_string(),
                row.detail.clone(),
            ]);
        }
        table
    }
}
