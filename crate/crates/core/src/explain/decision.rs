//! Questions about one decision.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::builder::instance_graph;
use crate::engine::{
    eval_atom, evaluate_counterfactual, search_how_to, DecisionInstance, HowToError, Inputs,
    Origin, Status, TraceStep,
};
use crate::graph::{filter, highlight, subgraph, EdgeLabel, NodeLabel, PropertyGraph};
use crate::ids;
use crate::model::{Action, Atom, Condition, DecisionModel, Value};
use crate::verify::join_names;

use super::system::derivation_slice;
use super::{
    atom_text, citation, condition_text, expr_text, push_citation, source_text, value_text, Answer,
    ExplainError, QType, Question, Table, Vocabulary,
};

fn answer(qtype: QType, text: String, tables: Vec<Table>, view: PropertyGraph) -> Answer {
    Answer {
        question: Question::new(qtype),
        text,
        tables,
        graph_view: view,
        citations: Vec::new(),
    }
}

fn shown(instance: &DecisionInstance, variable: &str) -> String {
    match instance.value(variable) {
        Some(v) => value_text(instance.model(), variable, v),
        None => "unset".to_string(),
    }
}

fn assignment(model: &DecisionModel, variable: &str, value: &Value, vocab: Vocabulary) -> String {
    format!(
        "{} = {}",
        vocab.name(variable),
        value_text(model, variable, value)
    )
}

/// Decisions are the output message variables; a model without services
/// treats every derived variable as a decision.
fn decision_variables(instance: &DecisionInstance) -> Vec<String> {
    let model = instance.model();
    let outputs = model.output_variables();
    if !outputs.is_empty() || !model.service_model.is_empty() {
        return outputs.into_iter().map(String::from).collect();
    }
    let derived: BTreeSet<&str> = model
        .rule_model
        .iter()
        .map(|r| r.action.target().name.as_str())
        .collect();
    model
        .variables()
        .map(|(_, v)| v.name.as_str())
        .filter(|v| derived.contains(v))
        .map(String::from)
        .collect()
}

pub fn answer_what(instance: &DecisionInstance, vocab: Vocabulary) -> Answer {
    let model = instance.model();
    let decisions = decision_variables(instance);

    let mut table = Table::new("Decisions", &["message", "variable", "value", "status"]);
    let mut inputs = Table::new("Inputs", &["message", "variable", "value"]);
    let mut seen = BTreeSet::new();
    for service in &model.service_model {
        for msg in &service.output_messages {
            for v in &msg.variables {
                let status = if instance.value(&v.name).is_some() {
                    "decided"
                } else {
                    "undecided"
                };
                table.push(vec![
                    msg.name.clone(),
                    v.name.clone(),
                    shown(instance, &v.name),
                    status.into(),
                ]);
                seen.insert(v.name.as_str());
            }
        }
        for msg in &service.input_messages {
            for v in &msg.variables {
                inputs.push(vec![
                    msg.name.clone(),
                    v.name.clone(),
                    shown(instance, &v.name),
                ]);
            }
        }
    }
    for v in &decisions {
        if !seen.contains(v.as_str()) {
            let status = if instance.value(v).is_some() {
                "decided"
            } else {
                "undecided"
            };
            table.push(vec![
                String::new(),
                v.clone(),
                shown(instance, v),
                status.into(),
            ]);
        }
    }
    let mut rules = Table::new("Rules used", &["round", "rule", "derived", "value"]);
    for step in instance.trace() {
        rules.push(vec![
            step.round.to_string(),
            step.rule.clone(),
            step.produced.variable.clone(),
            value_text(model, &step.produced.variable, &step.produced.value),
        ]);
    }

    let decided: Vec<String> = decisions
        .iter()
        .filter_map(|v| {
            instance
                .value(v)
                .map(|val| assignment(model, v, val, vocab))
        })
        .collect();
    let undecided: Vec<String> = decisions
        .iter()
        .filter(|v| instance.value(v).is_none())
        .map(|v| vocab.name(v))
        .collect();
    let mut text = if decided.is_empty() {
        "No decision was taken.".to_string()
    } else {
        format!("Decision: {}.", join_names(&decided))
    };
    if !undecided.is_empty() {
        text.push_str(&format!(" Not decided: {}.", join_names(&undecided)));
    }
    let used: Vec<String> = instance
        .inputs()
        .iter()
        .map(|(k, v)| assignment(model, k, v, vocab))
        .collect();
    if !used.is_empty() {
        text.push_str(&format!(" Based on {}.", join_names(&used)));
    }
    if instance.status() == Status::Partial && decided.len() == decisions.len() {
        text.push_str(" Some intermediate variables stayed unset.");
    }

    let mut citations = Vec::new();
    for step in instance.trace() {
        push_citation(&mut citations, citation(model, &step.rule));
    }
    let graph = instance_graph(instance);
    let view = filter(
        &graph,
        |n| match n.label {
            NodeLabel::Variable => true,
            NodeLabel::Rule => instance.fired(n.name()),
            _ => false,
        },
        |e| {
            matches!(
                e.label,
                EdgeLabel::Condition | EdgeLabel::CalcInput | EdgeLabel::Derives
            )
        },
    );
    let highlighted: Vec<String> = decisions.iter().map(|v| ids::var(v)).collect();
    let mut a = answer(
        QType::What,
        text,
        vec![table, inputs, rules],
        highlight(view, &highlighted),
    );
    a.citations = citations;
    a
}

/// Atoms of the fired rule's condition paired with their recorded truth.
fn atom_outcomes<'m>(model: &'m DecisionModel, step: &TraceStep) -> Vec<(&'m Atom, Option<bool>)> {
    let Some(cond) = model.rule(&step.rule).and_then(|r| r.condition.as_ref()) else {
        return Vec::new();
    };
    cond.atoms()
        .into_iter()
        .zip(step.atoms.iter().map(|a| a.value))
        .collect()
}

/// An atom with the values it was evaluated on. A `x = lit` that held needs no values.
fn atom_with_values(
    model: &DecisionModel,
    atom: &Atom,
    values: &impl Fn(&str) -> Option<Value>,
    held: bool,
    vocab: Vocabulary,
) -> String {
    let text = atom_text(atom, vocab);
    let implied = held
        && atom.comparator == crate::model::Comparator::Eq
        && matches!(atom.operand, crate::model::Operand::Literal(_))
        && values(&atom.variable.name).is_some();
    if implied {
        return text;
    }
    let shown: Vec<String> = atom
        .variables()
        .map(|v| match values(v) {
            Some(val) => assignment(model, v, &val, vocab),
            None => format!("{} unset", vocab.name(v)),
        })
        .collect();
    format!("{text} ({})", shown.join(", "))
}

/// "rule r (source), because conditions, calculated as e with inputs" for one step.
fn step_reason(model: &DecisionModel, step: &TraceStep, vocab: Vocabulary) -> String {
    let mut out = format!("rule {}", vocab.name(&step.rule));
    let rule = model.rule(&step.rule).expect("trace names model rules");
    if let Some(src) = &rule.source {
        out.push_str(&format!(" ({})", source_text(src)));
    }
    let values = |v: &str| step.consumed.get(v).cloned();
    let held: Vec<String> = atom_outcomes(model, step)
        .into_iter()
        .filter(|(_, v)| *v == Some(true))
        .map(|(a, _)| atom_with_values(model, a, &values, true, vocab))
        .collect();
    if !held.is_empty() {
        out.push_str(&format!(", because {}", join_names(&held)));
    }
    if let Action::Calculation { expr, .. } = &rule.action {
        let inputs: Vec<String> = expr
            .variables()
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .filter_map(|v| values(v).map(|val| assignment(model, v, &val, vocab)))
            .collect();
        out.push_str(&format!(", calculated as {}", expr_text(expr, vocab)));
        if !inputs.is_empty() {
            out.push_str(&format!(" with {}", join_names(&inputs)));
        }
    }
    out
}

fn rule_nodes(model: &DecisionModel, steps: &[&TraceStep]) -> Vec<String> {
    let mut out = Vec::new();
    for step in steps {
        let rule = model.rule(&step.rule).expect("trace names model rules");
        out.push(ids::rule(&rule.name));
        out.push(ids::var(&step.produced.variable));
        out.extend(step.consumed.keys().map(|v| ids::var(v)));
        if rule.source.is_some() {
            out.push(ids::source(&rule.name));
        }
    }
    out
}

fn derived_step<'i>(
    instance: &'i DecisionInstance,
    target: &str,
) -> Result<&'i TraceStep, ExplainError> {
    let model = instance.model();
    let binding = instance
        .binding(target)
        .filter(|_| model.variable(target).is_some())
        .ok_or_else(|| ExplainError::UnknownVariable(target.to_string()))?;
    match &binding.origin {
        Origin::Derived(_) => Ok(instance
            .step_for(target)
            .expect("derived variables have a step")),
        Origin::Input => Err(ExplainError::NotDerived {
            variable: target.to_string(),
            reason: "it is an input".into(),
        }),
        Origin::Unset => Err(ExplainError::NotDerived {
            variable: target.to_string(),
            reason: "no rule assigned it a value".into(),
        }),
    }
}

pub fn answer_why(
    instance: &DecisionInstance,
    target: &str,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    let model = instance.model();
    let step = derived_step(instance, target)?;
    let text = format!(
        "{} by {}.",
        assignment(model, target, &step.produced.value, vocab),
        step_reason(model, step, vocab)
    );

    let mut table = Table::new("Conditions", &["condition", "values", "satisfied"]);
    for (atom, outcome) in atom_outcomes(model, step) {
        let values: Vec<String> = atom
            .variables()
            .map(|v| match step.consumed.get(v) {
                Some(val) => format!("{v} = {}", value_text(model, v, val)),
                None => format!("{v} unset"),
            })
            .collect();
        let satisfied = match outcome {
            Some(true) => "yes",
            Some(false) => "no",
            None => "unknown",
        };
        table.push(vec![atom.to_string(), values.join(", "), satisfied.into()]);
    }

    let graph = instance_graph(instance);
    let nodes = rule_nodes(model, &[step]);
    let view = subgraph(&graph, nodes.iter().map(String::as_str));
    let view = highlight(view, &[ids::rule(&step.rule), ids::var(target)]);
    let mut a = answer(QType::Why, text, vec![table], view);
    push_citation(&mut a.citations, citation(model, &step.rule));
    Ok(a)
}

/// The steps that contributed to `target`, in firing order.
fn contributing_steps<'i>(instance: &'i DecisionInstance, target: &str) -> Vec<&'i TraceStep> {
    let mut wanted = BTreeSet::new();
    let mut stack = vec![target.to_string()];
    while let Some(v) = stack.pop() {
        if let Some(step) = instance.step_for(&v) {
            if wanted.insert(v) {
                stack.extend(step.consumed.keys().cloned());
            }
        }
    }
    instance
        .trace()
        .iter()
        .filter(|s| wanted.contains(&s.produced.variable))
        .collect()
}

pub fn answer_why_trace(
    instance: &DecisionInstance,
    target: &str,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    let model = instance.model();
    let step = derived_step(instance, target)?;
    let steps = contributing_steps(instance, target);

    let mut used_inputs: BTreeSet<&str> = BTreeSet::new();
    for s in &steps {
        for v in s.consumed.keys() {
            if model.is_input(v) {
                used_inputs.insert(v);
            }
        }
    }
    let mut lines = Vec::new();
    if !used_inputs.is_empty() {
        let shown: Vec<String> = used_inputs
            .iter()
            .filter_map(|v| {
                instance
                    .value(v)
                    .map(|val| assignment(model, v, val, vocab))
            })
            .collect();
        lines.push(format!("Given {}:", join_names(&shown)));
    }
    let mut table = Table::new("Trace", &["step", "round", "rule", "derived", "value"]);
    for (i, s) in steps.iter().enumerate() {
        lines.push(format!(
            "{}. {} by {}.",
            i + 1,
            assignment(model, &s.produced.variable, &s.produced.value, vocab),
            step_reason(model, s, vocab)
        ));
        table.push(vec![
            (i + 1).to_string(),
            s.round.to_string(),
            s.rule.clone(),
            s.produced.variable.clone(),
            value_text(model, &s.produced.variable, &s.produced.value),
        ]);
    }
    lines.push(format!(
        "So {}.",
        assignment(model, target, &step.produced.value, vocab)
    ));

    let graph = instance_graph(instance);
    let mut nodes = rule_nodes(model, &steps);
    for service in &model.service_model {
        for msg in &service.input_messages {
            if msg
                .variables
                .iter()
                .any(|v| used_inputs.contains(v.name.as_str()))
            {
                nodes.push(ids::message(&msg.name));
            }
        }
    }
    let view = subgraph(&graph, nodes.iter().map(String::as_str));
    let view = highlight(view, &[ids::var(target)]);
    let mut a = answer(QType::Why, lines.join("\n"), vec![table], view);
    for s in &steps {
        push_citation(&mut a.citations, citation(model, &s.rule));
    }
    Ok(a)
}

pub fn answer_what_if(
    instance: &DecisionInstance,
    overrides: &Inputs,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    if overrides.is_empty() {
        return Err(super::bad_param("overrides", "change at least one input"));
    }
    let model = instance.model();
    let after = evaluate_counterfactual(instance, overrides)?;

    let mut table = Table::new("Comparison", &["variable", "old", "new", "changed"]);
    let mut changed = Vec::new();
    for (_, decl) in model.variables() {
        let v = decl.name.as_str();
        let differs = instance.value(v) != after.value(v);
        if differs {
            changed.push(ids::var(v));
        }
        table.push(vec![
            v.to_string(),
            shown(instance, v),
            shown(&after, v),
            if differs { "yes" } else { "no" }.into(),
        ]);
    }

    let premise: Vec<String> = overrides
        .iter()
        .map(|(k, v)| {
            let was = shown(instance, k);
            format!("{} instead of {was}", assignment(model, k, v, vocab))
        })
        .collect();
    let decisions = decision_variables(instance);
    let moves: Vec<String> = decisions
        .iter()
        .filter(|v| instance.value(v) != after.value(v))
        .map(|v| {
            format!(
                "{} changes from {} to {}",
                vocab.name(v),
                shown(instance, v),
                shown(&after, v)
            )
        })
        .collect();
    let mut text = format!("With {}, ", join_names(&premise));
    if moves.is_empty() {
        text.push_str("no decision changes.");
    } else {
        text.push_str(&format!("{}.", join_names(&moves)));
    }

    let graph = instance_graph(&after);
    let view = filter(
        &graph,
        |n| match n.label {
            NodeLabel::Variable => true,
            NodeLabel::Rule => after.fired(n.name()) || instance.fired(n.name()),
            _ => false,
        },
        |e| {
            matches!(
                e.label,
                EdgeLabel::Condition | EdgeLabel::CalcInput | EdgeLabel::Derives
            )
        },
    );
    let mut a = answer(QType::WhatIf, text, vec![table], highlight(view, &changed));
    for step in after.trace() {
        if decisions.contains(&step.produced.variable) {
            push_citation(&mut a.citations, citation(model, &step.rule));
        }
    }
    Ok(a)
}

/// Literals of the condition in negation normal form, each with its truth.
fn literals(
    model: &DecisionModel,
    cond: &Condition,
    env: &crate::engine::Env,
) -> Vec<(Atom, Option<bool>)> {
    cond.nnf()
        .atoms()
        .into_iter()
        .map(|a| (a.clone(), eval_atom(model, a, env)))
        .collect()
}

pub fn answer_why_not(
    instance: &DecisionInstance,
    target: &str,
    value: &Value,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    let model = instance.model();
    let decl = model
        .variable(target)
        .ok_or_else(|| ExplainError::UnknownVariable(target.to_string()))?;
    let actual = instance.value(target);
    if actual == Some(value) {
        return Err(ExplainError::SameValue {
            variable: target.to_string(),
            value: value.to_string(),
        });
    }
    let env = instance.env();
    let values = |v: &str| env.get(v).cloned();
    let wanted = value_text(model, target, value);
    let mut text = match actual {
        Some(v) => format!(
            "{} is {}, not {wanted}.",
            vocab.name(target),
            value_text(model, target, v)
        ),
        None => format!(
            "{} has no value, so it is not {wanted}.",
            vocab.name(target)
        ),
    };

    let candidates: Vec<_> = model
        .rules_deriving(target)
        .filter(|r| match &r.action {
            Action::Derivation { value: lit, .. } => {
                lit.to_value(decl.kind).as_ref() == Some(value)
            }
            Action::Calculation { .. } => true,
        })
        .collect();
    let mut table = Table::new(
        "Failed conditions",
        &["rule", "condition", "values", "outcome"],
    );
    let setter = match instance.binding(target).map(|b| &b.origin) {
        Some(Origin::Derived(r)) => Some(r.as_str()),
        _ => None,
    };
    if candidates.is_empty() {
        text.push_str(&format!(
            " No rule gives {} the value {wanted}; the model cannot produce it.",
            vocab.name(target)
        ));
    }
    for rule in &candidates {
        let name = vocab.name(&rule.name);
        let would = match &rule.action {
            Action::Derivation { .. } => format!("would give {wanted}"),
            Action::Calculation { expr, .. } => format!("calculates {}", expr_text(expr, vocab)),
        };
        if instance.fired(&rule.name) {
            text.push_str(&format!(
                " Rule {name} applied and produced {}.",
                shown(instance, target)
            ));
            continue;
        }
        let Some(cond) = &rule.condition else {
            let by = setter
                .map(|s| format!(" by rule {}", vocab.name(s)))
                .unwrap_or_default();
            text.push_str(&format!(
                " Rule {name} {would}, but {} was already set{by}.",
                vocab.name(target)
            ));
            continue;
        };
        let lits = literals(model, cond, &env);
        let failed: Vec<String> = lits
            .iter()
            .filter(|(_, t)| *t == Some(false))
            .map(|(a, _)| atom_with_values(model, a, &values, false, vocab))
            .collect();
        let unknown: Vec<String> = lits
            .iter()
            .filter(|(_, t)| t.is_none())
            .map(|(a, _)| atom_with_values(model, a, &values, false, vocab))
            .collect();
        for (a, t) in &lits {
            if *t == Some(true) {
                continue;
            }
            let shown_values: Vec<String> = a
                .variables()
                .map(|v| match env.get(v) {
                    Some(val) => format!("{v} = {}", value_text(model, v, val)),
                    None => format!("{v} unset"),
                })
                .collect();
            let outcome = if t.is_none() { "unknown" } else { "false" };
            table.push(vec![
                rule.name.clone(),
                a.to_string(),
                shown_values.join(", "),
                outcome.into(),
            ]);
        }
        let source = rule
            .source
            .as_ref()
            .map(|s| format!(" ({})", source_text(s)))
            .unwrap_or_default();
        if failed.is_empty() && unknown.is_empty() {
            let by = setter
                .map(|s| format!(" by rule {}", vocab.name(s)))
                .unwrap_or_default();
            text.push_str(&format!(
                " Rule {name}{source} {would} and its condition holds, but {} was already set{by}.",
                vocab.name(target)
            ));
            continue;
        }
        let mut reasons = Vec::new();
        if !failed.is_empty() {
            let verb = if failed.len() == 1 { "is" } else { "are" };
            reasons.push(format!("{} {verb} false", join_names(&failed)));
        }
        if !unknown.is_empty() {
            reasons.push(format!("{} cannot be decided", join_names(&unknown)));
        }
        text.push_str(&format!(
            " Rule {name}{source} {would}, but its condition {} does not hold: {}.",
            condition_text(cond, vocab),
            reasons.join(" and ")
        ));
    }

    let graph = instance_graph(instance);
    let mut nodes = vec![ids::var(target)];
    for rule in &candidates {
        nodes.push(ids::rule(&rule.name));
        nodes.extend(rule.condition_variables().into_iter().map(ids::var));
        nodes.extend(rule.calculation_inputs().into_iter().map(ids::var));
        if rule.source.is_some() {
            nodes.push(ids::source(&rule.name));
        }
    }
    let view = subgraph(&graph, nodes.iter().map(String::as_str));
    let blocked: Vec<String> = candidates
        .iter()
        .filter(|r| !instance.fired(&r.name))
        .map(|r| ids::rule(&r.name))
        .collect();
    let mut a = answer(QType::WhyNot, text, vec![table], highlight(view, &blocked));
    for rule in &candidates {
        push_citation(&mut a.citations, rule.source.clone());
    }
    Ok(a)
}

pub fn answer_how_to(
    model: &Arc<DecisionModel>,
    fixed: &Inputs,
    target: &str,
    goal: &Value,
    vocab: Vocabulary,
) -> Result<Answer, ExplainError> {
    if model.variable(target).is_none() {
        return Err(ExplainError::UnknownVariable(target.to_string()));
    }
    let wanted = assignment(model, target, goal, vocab);
    let mut table = Table::new("Options", &["option", "variable", "value"]);
    let (text, free) = match search_how_to(model, fixed, (target, goal)) {
        Ok(result) => {
            let options: Vec<String> = result
                .assignments
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    for (v, val) in a {
                        table.push(vec![
                            (i + 1).to_string(),
                            v.clone(),
                            value_text(model, v, val),
                        ]);
                    }
                    let parts: Vec<String> = a
                        .iter()
                        .map(|(v, val)| assignment(model, v, val, vocab))
                        .collect();
                    format!("({}) {}", i + 1, join_names(&parts))
                })
                .collect();
            let text = if result.assignments.iter().any(Vec::is_empty) {
                format!("{wanted} already holds with the fixed inputs.")
            } else {
                format!("{wanted} when {}.", options.join("; or "))
            };
            (text, result.free)
        }
        Err(HowToError::GoalUnreachable { searched }) => (
            format!(
                "No values of the free inputs give {wanted} ({searched} combinations searched)."
            ),
            Vec::new(),
        ),
        Err(e) => return Err(e.into()),
    };
    let slice = derivation_slice(model, target)?;
    let free: Vec<String> = free.iter().map(|v| ids::var(v)).collect();
    let view = highlight(slice, &free);
    let mut a = answer(QType::HowTo, text, vec![table], view);
    for rule in model.rules_deriving(target) {
        push_citation(&mut a.citations, rule.source.clone());
    }
    Ok(a)
}
