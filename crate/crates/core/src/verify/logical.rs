use crate::builder::model_graph;
use crate::engine::Env;
use crate::graph::{filter, highlight, NodeLabel};
use crate::ids;
use crate::model::{Atom, Condition, DecisionModel};

use super::logic::{decide, Sat, SEARCH_BUDGET};
use super::paths::FLOW;
use super::{join_names, CheckId, CheckReport, CheckRow, RowStatus};

/// Largest disjunctive normal form expanded per condition.
pub const DNF_LIMIT: usize = 256;

enum Outcome {
    Satisfiable(Env),
    Contradictory(Vec<String>),
    Unknown(String),
}

fn run(model: &DecisionModel, atoms: &[&Atom]) -> Sat {
    decide(model, atoms, &mut SEARCH_BUDGET.clone())
}

fn quote(atoms: &[&Atom]) -> String {
    let texts: Vec<String> = atoms.iter().map(|a| format!("`{a}`")).collect();
    texts.join(" and ")
}

/// The smallest set of atoms, among singles and pairs, that cannot hold
/// together; the whole branch when no smaller set explains it.
fn explain_contradiction(model: &DecisionModel, branch: &[&Atom]) -> String {
    for a in branch {
        if matches!(run(model, &[a]), Sat::Unsat) {
            return format!("{} can never hold", quote(&[a]));
        }
    }
    for i in 0..branch.len() {
        for j in i + 1..branch.len() {
            if matches!(run(model, &[branch[i], branch[j]]), Sat::Unsat) {
                return format!(
                    "{} contradicts {}",
                    quote(&[branch[i]]),
                    quote(&[branch[j]])
                );
            }
        }
    }
    format!("{} cannot hold together", quote(branch))
}

fn satisfiable(model: &DecisionModel, cond: &Condition) -> Outcome {
    let Some(branches) = cond.dnf(DNF_LIMIT) else {
        return Outcome::Unknown(format!("condition has more than {DNF_LIMIT} alternatives"));
    };
    let mut contradictions = Vec::new();
    let mut unknown = false;
    for branch in &branches {
        let atoms: Vec<&Atom> = branch.iter().collect();
        match run(model, &atoms) {
            Sat::Witness(env) => return Outcome::Satisfiable(env),
            Sat::Unsat => contradictions.push(explain_contradiction(model, &atoms)),
            Sat::Unknown => unknown = true,
        }
    }
    if unknown {
        Outcome::Unknown("satisfiability could not be decided within the search bounds".into())
    } else {
        Outcome::Contradictory(contradictions)
    }
}

fn witness_text(env: &Env) -> String {
    env.iter()
        .map(|(k, v)| format!("{k} = {}", v.to_literal()))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Each rule's condition must be satisfiable. Pairs of rules that derive the
/// same variable and can apply together are reported as warnings.
pub fn check_logical(model: &DecisionModel) -> CheckReport {
    let mut rows = Vec::new();
    let mut failing = Vec::new();
    let mut unchecked = Vec::new();
    for rule in &model.rule_model {
        let id = ids::rule(&rule.name);
        let Some(cond) = &rule.condition else {
            rows.push(CheckRow::new(
                id,
                "rule",
                RowStatus::Pass,
                "unconditional".into(),
            ));
            continue;
        };
        rows.push(match satisfiable(model, cond) {
            Outcome::Satisfiable(env) => CheckRow::new(
                id,
                "rule",
                RowStatus::Pass,
                format!("satisfiable, e.g. when {}", witness_text(&env)),
            ),
            Outcome::Contradictory(reasons) => {
                failing.push(rule.name.clone());
                CheckRow::new(id, "rule", RowStatus::Fail, reasons.join("; "))
            }
            Outcome::Unknown(why) => {
                unchecked.push(rule.name.clone());
                CheckRow::new(id, "rule", RowStatus::NotChecked, why)
            }
        });
    }

    let mut overlaps = Vec::new();
    for (i, r) in model.rule_model.iter().enumerate() {
        for s in &model.rule_model[i + 1..] {
            let target = &r.action.target().name;
            if *target != s.action.target().name {
                continue;
            }
            let both = Condition::And(r.condition.iter().chain(&s.condition).cloned().collect());
            let witness = if matches!(&both, Condition::And(cs) if cs.is_empty()) {
                Some(Env::new())
            } else {
                match satisfiable(model, &both) {
                    Outcome::Satisfiable(env) => Some(env),
                    _ => None,
                }
            };
            if let Some(env) = witness {
                let when = if env.is_empty() {
                    "always".to_string()
                } else {
                    format!("e.g. when {}", witness_text(&env))
                };
                overlaps.push(format!("{} and {}", r.name, s.name));
                rows.push(CheckRow::new(
                    ids::var(target),
                    "rule pair",
                    RowStatus::Warning,
                    format!(
                        "rules {} and {} can both derive {target}, {when}",
                        r.name, s.name
                    ),
                ));
            }
        }
    }

    let mut text = if failing.is_empty() {
        "Yes, every rule condition can be satisfied.".to_string()
    } else {
        format!(
            "No, contradictory conditions in rules: {}.",
            join_names(&failing)
        )
    };
    if !unchecked.is_empty() {
        text.push_str(&format!(" Not checked: {}.", join_names(&unchecked)));
    }
    if !overlaps.is_empty() {
        text.push_str(&format!(
            " Warning: rules that can apply to the same variable together: {}.",
            overlaps.join("; ")
        ));
    }

    let graph = model_graph(model);
    let view = filter(
        &graph,
        |n| matches!(n.label, NodeLabel::Variable | NodeLabel::Rule),
        |e| FLOW.contains(&e.label),
    );
    let failing_ids: Vec<String> = failing.iter().map(|r| ids::rule(r)).collect();
    CheckReport::new(CheckId::Logical, text, rows, highlight(view, &failing_ids))
}
