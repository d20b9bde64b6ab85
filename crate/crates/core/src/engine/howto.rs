//! Exhaustive search for input assignments that achieve a goal value.

use std::sync::Arc;

use thiserror::Error;

use super::{evaluate, EvalError, Inputs};
use crate::model::{DecisionModel, Kind, Literal, Value};

pub const DEFAULT_SEARCH_CAP: usize = 10_000;

/// Values for a subset of the free inputs, sorted by variable name.
pub type Assignment = Vec<(String, Value)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HowToResult {
    /// Every minimal assignment, in lexicographic order of (variable, domain index).
    pub assignments: Vec<Assignment>,
    /// Free input variables searched over, sorted by name.
    pub free: Vec<String>,
    /// Number of partial assignments evaluated.
    pub searched: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HowToError {
    #[error("input `{0}` has no finite domain; declare one with `in [...]`")]
    UnboundedSearch(String),
    #[error(
        "no assignment of the free inputs derives the goal ({searched} combinations searched)"
    )]
    GoalUnreachable { searched: usize },
    #[error("search space of {space} combinations exceeds the cap of {cap}")]
    CapExceeded { space: u128, cap: usize },
    #[error("no rule derives `{0}`")]
    GoalNotDerivable(String),
    #[error("goal value `{value}` does not fit variable `{variable}`")]
    GoalType { variable: String, value: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn finite_domain(model: &DecisionModel, name: &str) -> Option<Vec<Value>> {
    let var = model.variable(name)?;
    match (&var.domain, var.kind) {
        (Some(d), kind) => d.iter().map(|l: &Literal| l.to_value(kind)).collect(),
        (None, Kind::Boolean) => Some(vec![Value::Bool(false), Value::Bool(true)]),
        (None, _) => None,
    }
}

pub fn search_how_to(
    model: &Arc<DecisionModel>,
    fixed: &Inputs,
    goal: (&str, &Value),
) -> Result<HowToResult, HowToError> {
    search_how_to_with_cap(model, fixed, goal, DEFAULT_SEARCH_CAP)
}

/// Finds every minimal assignment of the unset input variables under which
/// evaluation derives `goal`. Each free input is either left unset or takes
/// one of its domain values; an assignment is minimal when no restriction of
/// it to fewer variables also achieves the goal.
pub fn search_how_to_with_cap(
    model: &Arc<DecisionModel>,
    fixed: &Inputs,
    goal: (&str, &Value),
    cap: usize,
) -> Result<HowToResult, HowToError> {
    let (goal_var, goal_value) = goal;
    let decl = model
        .variable(goal_var)
        .ok_or_else(|| EvalError::UnknownVariable(goal_var.to_string()))?;
    if model.rules_deriving(goal_var).next().is_none() {
        return Err(HowToError::GoalNotDerivable(goal_var.to_string()));
    }
    let goal_value = goal_value
        .clone()
        .coerce(decl.kind)
        .ok_or_else(|| HowToError::GoalType {
            variable: goal_var.to_string(),
            value: goal_value.to_string(),
        })?;

    let mut free: Vec<String> = model
        .input_variables()
        .into_iter()
        .filter(|v| !fixed.contains_key(*v))
        .map(String::from)
        .collect();
    free.sort();
    let domains: Vec<Vec<Value>> = free
        .iter()
        .map(|v| finite_domain(model, v).ok_or_else(|| HowToError::UnboundedSearch(v.clone())))
        .collect::<Result<_, _>>()?;

    let space = domains
        .iter()
        .try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128 + 1))
        .unwrap_or(u128::MAX);
    if space > cap as u128 {
        return Err(HowToError::CapExceeded { space, cap });
    }

    // choice[i] == 0 leaves free[i] unset; k > 0 picks domains[i][k - 1].
    let mut achieving: Vec<Vec<usize>> = Vec::new();
    let mut choice = vec![0usize; free.len()];
    let mut searched = 0usize;
    loop {
        searched += 1;
        let mut inputs = fixed.clone();
        for (i, &c) in choice.iter().enumerate() {
            if c > 0 {
                inputs.insert(free[i].clone(), domains[i][c - 1].clone());
            }
        }
        match evaluate(model, &inputs) {
            Ok(inst) if inst.value(goal_var) == Some(&goal_value) => achieving.push(choice.clone()),
            Ok(_) => {}
            // Conflicts under a partial assignment just mean "not achieved".
            Err(EvalError::ModelConflict { .. } | EvalError::Arithmetic { .. }) => {}
            Err(e) => return Err(e.into()),
        }
        if !advance(&mut choice, &domains) {
            break;
        }
    }

    let restricts = |small: &[usize], big: &[usize]| {
        small != big && small.iter().zip(big).all(|(&s, &b)| s == 0 || s == b)
    };
    let mut minimal: Vec<&Vec<usize>> = achieving
        .iter()
        .filter(|a| !achieving.iter().any(|b| restricts(b, a)))
        .collect();
    let key = |c: &Vec<usize>| -> Vec<(usize, usize)> {
        c.iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| (i, k))
            .collect()
    };
    minimal.sort_by_key(|c| key(c));
    if minimal.is_empty() {
        return Err(HowToError::GoalUnreachable { searched });
    }
    let assignments = minimal
        .into_iter()
        .map(|c| {
            c.iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (free[i].clone(), domains[i][k - 1].clone()))
                .collect()
        })
        .collect();
    Ok(HowToResult {
        assignments,
        free,
        searched,
    })
}

fn advance(choice: &mut [usize], domains: &[Vec<Value>]) -> bool {
    for i in (0..choice.len()).rev() {
        if choice[i] < domains[i].len() {
            choice[i] += 1;
            return true;
        }
        choice[i] = 0;
    }
    false
}
