//! Path and assignment checks over the simplified model graph.

use std::collections::BTreeSet;

use crate::graph::{
    filter, highlight, reachable, Direction, Edge, EdgeLabel, Node, NodeLabel, Path, PropertyGraph,
    Scalar,
};
use crate::ids;

use super::{join_names, CheckId, CheckReport, CheckRow, RowStatus, VerifyError};

/// Edges along which values flow from inputs towards decisions.
pub(crate) const FLOW: [EdgeLabel; 3] = [
    EdgeLabel::Condition,
    EdgeLabel::CalcInput,
    EdgeLabel::Derives,
];

fn index_of(e: &Edge) -> i64 {
    match e.prop("index") {
        Some(Scalar::Int(i)) => *i,
        _ => 0,
    }
}

fn sorted(mut edges: Vec<&Edge>) -> Vec<&Edge> {
    edges.sort_by(|a, b| index_of(a).cmp(&index_of(b)).then_with(|| a.id.cmp(&b.id)));
    edges
}

fn services<'g>(
    graph: &'g PropertyGraph,
    service: Option<&str>,
) -> Result<Vec<&'g Node>, VerifyError> {
    match service {
        Some(name) => graph
            .node(&ids::service(name))
            .filter(|n| n.label == NodeLabel::Service)
            .map(|n| vec![n])
            .ok_or_else(|| VerifyError::UnknownService(name.to_string())),
        None => Ok(graph.nodes_with(NodeLabel::Service).collect()),
    }
}

/// Messages of a service, inputs first, each in declaration order.
pub(crate) fn service_messages<'g>(graph: &'g PropertyGraph, service: &Node) -> Vec<&'g Node> {
    let edges = sorted(
        graph
            .out_edges(&service.id)
            .filter(|e| e.label == EdgeLabel::HasMessage)
            .collect(),
    );
    let msgs: Vec<&Node> = edges.iter().filter_map(|e| graph.node(&e.to)).collect();
    let inputs = msgs.iter().filter(|m| m.label == NodeLabel::InputMessage);
    let outputs = msgs.iter().filter(|m| m.label == NodeLabel::OutputMessage);
    inputs.chain(outputs).copied().collect()
}

/// Variable ids carried by a message, in declaration order.
pub(crate) fn message_variables(graph: &PropertyGraph, message: &Node) -> Vec<String> {
    if message.label == NodeLabel::InputMessage {
        let edges = graph
            .out_edges(&message.id)
            .filter(|e| e.label == EdgeLabel::Input);
        sorted(edges.collect())
            .into_iter()
            .map(|e| e.to.clone())
            .collect()
    } else {
        let edges = graph
            .in_edges(&message.id)
            .filter(|e| e.label == EdgeLabel::Output);
        sorted(edges.collect())
            .into_iter()
            .map(|e| e.from.clone())
            .collect()
    }
}

fn name<'g>(graph: &'g PropertyGraph, id: &'g str) -> &'g str {
    graph.node(id).map_or(id, Node::name)
}

pub(crate) fn path_text(graph: &PropertyGraph, path: &Path) -> String {
    path.nodes
        .iter()
        .map(|id| name(graph, id))
        .collect::<Vec<_>>()
        .join(" -> ")
}

fn scope(service: Option<&str>) -> String {
    match service {
        Some(s) => format!("service {s}"),
        None => "every service".to_string(),
    }
}

/// Variables, rules and messages with the edges between them.
fn dataflow_view(graph: &PropertyGraph) -> PropertyGraph {
    filter(
        graph,
        |n| {
            matches!(
                n.label,
                NodeLabel::Variable
                    | NodeLabel::Rule
                    | NodeLabel::InputMessage
                    | NodeLabel::OutputMessage
            )
        },
        |e| FLOW.contains(&e.label) || matches!(e.label, EdgeLabel::Input | EdgeLabel::Output),
    )
}

/// The services, their messages and everything data flows through.
fn service_view(graph: &PropertyGraph, services: &[&Node]) -> PropertyGraph {
    let mut keep: BTreeSet<String> = BTreeSet::new();
    for s in services {
        keep.insert(s.id.clone());
        keep.extend(service_messages(graph, s).into_iter().map(|m| m.id.clone()));
    }
    filter(
        graph,
        |n| match n.label {
            NodeLabel::Variable | NodeLabel::Rule => true,
            NodeLabel::Service | NodeLabel::InputMessage | NodeLabel::OutputMessage => {
                keep.contains(&n.id)
            }
            _ => false,
        },
        |e| {
            FLOW.contains(&e.label)
                || matches!(
                    e.label,
                    EdgeLabel::Input | EdgeLabel::Output | EdgeLabel::HasMessage
                )
        },
    )
}

/// A message is used when one of its variables feeds a rule (inputs) or is
/// produced by one (outputs).
pub fn check_messages_used(
    graph: &PropertyGraph,
    service: Option<&str>,
) -> Result<CheckReport, VerifyError> {
    let services = services(graph, service)?;
    let rules: Vec<&str> = graph
        .nodes_with(NodeLabel::Rule)
        .map(|n| n.id.as_str())
        .collect();
    let mut rows = Vec::new();
    let mut unused = Vec::new();
    for s in &services {
        for msg in service_messages(graph, s) {
            let vars = message_variables(graph, msg);
            let input = msg.label == NodeLabel::InputMessage;
            let from: Vec<&str> = vars.iter().map(String::as_str).collect();
            let direction = if input {
                Direction::Forward
            } else {
                Direction::Backward
            };
            let found = if from.is_empty() {
                None
            } else {
                reachable(graph, &from, &rules, &FLOW, direction).path
            };
            let kind = if input {
                "input message"
            } else {
                "output message"
            };
            let row = match found {
                Some(path) => CheckRow::new(
                    msg.id.clone(),
                    kind,
                    RowStatus::Pass,
                    format!("used: {}", path_text(graph, &path)),
                ),
                None => {
                    unused.push(msg.id.clone());
                    let detail = if vars.is_empty() {
                        "the message carries no variables".to_string()
                    } else if input {
                        "none of its variables is used by a rule".to_string()
                    } else {
                        "none of its variables is derived by a rule".to_string()
                    };
                    CheckRow::new(msg.id.clone(), kind, RowStatus::Fail, detail)
                }
            };
            rows.push(row);
        }
    }
    let text = if unused.is_empty() {
        format!(
            "Yes, every input and output message of {} is used.",
            scope(service)
        )
    } else {
        let names: Vec<&str> = unused.iter().map(|id| ids::name_of(id)).collect();
        format!(
            "No, {} has unused messages: {}.",
            scope(service),
            join_names(&names)
        )
    };
    let view = highlight(service_view(graph, &services), &unused);
    Ok(CheckReport::new(CheckId::MessagesUsed, text, rows, view))
}

/// Every input variable must reach some output variable along condition,
/// calculation and derivation edges, and every output variable must be
/// reachable from some input variable.
pub fn check_io_paths(
    graph: &PropertyGraph,
    service: Option<&str>,
) -> Result<CheckReport, VerifyError> {
    let services = services(graph, service)?;
    let mut rows = Vec::new();
    let mut unused_inputs = Vec::new();
    let mut underivable = Vec::new();
    for s in &services {
        let mut inputs: Vec<String> = Vec::new();
        let mut outputs: Vec<String> = Vec::new();
        for msg in service_messages(graph, s) {
            let list = if msg.label == NodeLabel::InputMessage {
                &mut inputs
            } else {
                &mut outputs
            };
            for v in message_variables(graph, msg) {
                if !list.contains(&v) {
                    list.push(v);
                }
            }
        }
        let in_refs: Vec<&str> = inputs.iter().map(String::as_str).collect();
        let out_refs: Vec<&str> = outputs.iter().map(String::as_str).collect();
        for v in &inputs {
            let r = reachable(graph, &[v], &out_refs, &FLOW, Direction::Forward);
            rows.push(match r.path {
                Some(p) => CheckRow::new(
                    v.clone(),
                    "input variable",
                    RowStatus::Pass,
                    format!("used for output: {}", path_text(graph, &p)),
                ),
                None => {
                    unused_inputs.push(v.clone());
                    CheckRow::new(
                        v.clone(),
                        "input variable",
                        RowStatus::Fail,
                        "not used to create any output".to_string(),
                    )
                }
            });
        }
        for v in &outputs {
            let r = reachable(graph, &[v], &in_refs, &FLOW, Direction::Backward);
            rows.push(match r.path {
                Some(p) => {
                    let mut p = p;
                    p.nodes.reverse();
                    CheckRow::new(
                        v.clone(),
                        "output variable",
                        RowStatus::Pass,
                        format!("created from input: {}", path_text(graph, &p)),
                    )
                }
                None => {
                    underivable.push(v.clone());
                    CheckRow::new(
                        v.clone(),
                        "output variable",
                        RowStatus::Fail,
                        "cannot be derived from the input".to_string(),
                    )
                }
            });
        }
    }
    let names = |ids: &[String]| {
        let names: Vec<&str> = ids.iter().map(|id| ids::name_of(id)).collect();
        join_names(&names)
    };
    let text = match (unused_inputs.is_empty(), underivable.is_empty()) {
        (true, true) => format!(
            "Yes, for {} all input is used to create the output and all output can be created from the input.",
            scope(service)
        ),
        (false, true) => format!("No, input not used to create any output: {}.", names(&unused_inputs)),
        (true, false) => format!("No, output that cannot be created from the input: {}.", names(&underivable)),
        (false, false) => format!(
            "No, input not used to create any output: {}; output that cannot be created from the input: {}.",
            names(&unused_inputs),
            names(&underivable)
        ),
    };
    let offending: Vec<String> = unused_inputs.into_iter().chain(underivable).collect();
    let view = highlight(service_view(graph, &services), &offending);
    Ok(CheckReport::new(CheckId::IoPaths, text, rows, view))
}

fn describe_use(graph: &PropertyGraph, var: &str, e: &Edge) -> String {
    let other = if e.from == var { &e.to } else { &e.from };
    let other = name(graph, other);
    match e.label {
        EdgeLabel::Condition => format!("condition of rule {other}"),
        EdgeLabel::CalcInput => format!("calculation input of rule {other}"),
        EdgeLabel::Derives => format!("derived by rule {other}"),
        EdgeLabel::Input => format!("input in message {other}"),
        EdgeLabel::Output => format!("output in message {other}"),
        label => format!("{label} {other}"),
    }
}

/// A variable is used when a rule or message refers to it.
pub fn check_variables_used(graph: &PropertyGraph) -> CheckReport {
    let mut rows = Vec::new();
    let mut unused = Vec::new();
    for v in graph.nodes_with(NodeLabel::Variable) {
        let uses: Vec<String> = graph
            .incident_edges(&v.id)
            .filter(|e| {
                FLOW.contains(&e.label) || matches!(e.label, EdgeLabel::Input | EdgeLabel::Output)
            })
            .map(|e| describe_use(graph, &v.id, e))
            .collect();
        if uses.is_empty() {
            unused.push(v.id.clone());
            rows.push(CheckRow::new(
                v.id.clone(),
                "variable",
                RowStatus::Fail,
                "not used by any rule or message".to_string(),
            ));
        } else {
            rows.push(CheckRow::new(
                v.id.clone(),
                "variable",
                RowStatus::Pass,
                uses.join("; "),
            ));
        }
    }
    let text = if unused.is_empty() {
        "Yes, every variable is used.".to_string()
    } else {
        let names: Vec<&str> = unused.iter().map(|id| ids::name_of(id)).collect();
        format!("No, unused variables: {}.", join_names(&names))
    };
    let view = highlight(dataflow_view(graph), &unused);
    CheckReport::new(CheckId::VariablesUsed, text, rows, view)
}

/// A variable is assigned when it is given in an input message or some rule
/// derives it.
pub fn check_variables_assigned(graph: &PropertyGraph) -> CheckReport {
    let mut rows = Vec::new();
    let mut unassigned = Vec::new();
    for v in graph.nodes_with(NodeLabel::Variable) {
        let sources: Vec<String> = graph
            .in_edges(&v.id)
            .filter(|e| matches!(e.label, EdgeLabel::Input | EdgeLabel::Derives))
            .map(|e| describe_use(graph, &v.id, e))
            .collect();
        if sources.is_empty() {
            unassigned.push(v.id.clone());
            rows.push(CheckRow::new(
                v.id.clone(),
                "variable",
                RowStatus::Fail,
                "neither an input nor derived by any rule".to_string(),
            ));
        } else {
            rows.push(CheckRow::new(
                v.id.clone(),
                "variable",
                RowStatus::Pass,
                sources.join("; "),
            ));
        }
    }
    let text = if unassigned.is_empty() {
        "Yes, all variables are assigned.".to_string()
    } else {
        let names: Vec<&str> = unassigned.iter().map(|id| ids::name_of(id)).collect();
        format!(
            "No, variables never assigned a value: {}.",
            join_names(&names)
        )
    };
    let view = highlight(dataflow_view(graph), &unassigned);
    CheckReport::new(CheckId::VariablesAssigned, text, rows, view)
}
