//! Forward-chaining evaluation of decision models.
//!
//! Evaluation runs in rounds. In each round every rule whose target is still
//! unset and whose condition is true under the bindings at the start of the
//! round fires; a variable is assigned at most once. Two rules eligible for
//! the same target in one round are a [`EvalError::ModelConflict`]. The
//! fixpoint is reached when a round fires nothing.

mod eval;
mod howto;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::model::{DecisionModel, Kind, Value};

pub use eval::{eval_action, eval_atom, eval_condition, eval_expr, ArithError, Env};
pub use howto::{
    search_how_to, search_how_to_with_cap, Assignment, HowToError, HowToResult, DEFAULT_SEARCH_CAP,
};

/// Input values keyed by variable name.
pub type Inputs = BTreeMap<String, Value>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not part of any input message")]
    NotAnInput(String),
    #[error("value `{value}` does not fit {kind} variable `{variable}`")]
    TypeError {
        variable: String,
        kind: Kind,
        value: String,
    },
    #[error("rules `{}` and `{}` both derive `{variable}` in the same round", rules[0], rules[1])]
    ModelConflict {
        variable: String,
        rules: [String; 2],
    },
    #[error("rule `{rule}`: {message}")]
    Arithmetic { rule: String, message: String },
    #[error("`{0}` is derived, only input variables can be overridden")]
    OverrideDerived(String),
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "rule", rename_all = "lowercase")]
pub enum Origin {
    Input,
    Derived(String),
    Unset,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub variable: String,
    pub value: Option<Value>,
    pub origin: Origin,
}

/// Truth of one condition atom when its rule fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomOutcome {
    pub atom: String,
    pub value: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Produced {
    pub variable: String,
    pub value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: String,
    pub round: usize,
    pub atoms: Vec<AtomOutcome>,
    pub consumed: BTreeMap<String, Value>,
    pub produced: Produced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Complete,
    Partial,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Complete => "complete",
            Status::Partial => "partial",
        })
    }
}

/// The outcome of evaluating a model over inputs. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionInstance {
    model: Arc<DecisionModel>,
    bindings: BTreeMap<String, Binding>,
    trace: Vec<TraceStep>,
    status: Status,
}

impl DecisionInstance {
    pub fn model(&self) -> &Arc<DecisionModel> {
        &self.model
    }

    /// One binding per declared variable, unset ones included.
    pub fn bindings(&self) -> &BTreeMap<String, Binding> {
        &self.bindings
    }

    pub fn binding(&self, variable: &str) -> Option<&Binding> {
        self.bindings.get(variable)
    }

    pub fn value(&self, variable: &str) -> Option<&Value> {
        self.bindings.get(variable)?.value.as_ref()
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn inputs(&self) -> Inputs {
        self.bound_with(|o| matches!(o, Origin::Input))
    }

    pub fn derived(&self) -> Inputs {
        self.bound_with(|o| matches!(o, Origin::Derived(_)))
    }

    /// All bound values.
    pub fn env(&self) -> Env {
        self.bound_with(|o| !matches!(o, Origin::Unset))
    }

    fn bound_with(&self, keep: impl Fn(&Origin) -> bool) -> Inputs {
        self.bindings
            .values()
            .filter(|b| keep(&b.origin))
            .filter_map(|b| Some((b.variable.clone(), b.value.clone()?)))
            .collect()
    }

    /// The step that produced `variable`, if it was derived.
    pub fn step_for(&self, variable: &str) -> Option<&TraceStep> {
        self.trace.iter().find(|s| s.produced.variable == variable)
    }

    pub fn fired(&self, rule: &str) -> bool {
        self.trace.iter().any(|s| s.rule == rule)
    }

    pub fn to_document(&self) -> InstanceDocument {
        let json = |m: Inputs| m.into_iter().map(|(k, v)| (k, v.to_json())).collect();
        InstanceDocument {
            model: self.model.name.clone(),
            inputs: json(self.inputs()),
            derived: json(self.derived()),
            trace: self
                .trace
                .iter()
                .map(|s| serde_json::to_value(s).expect("trace steps serialize"))
                .collect(),
        }
    }

    /// Rebuilds an instance from its document by re-evaluating the stored
    /// inputs; the stored derived values and trace must match exactly.
    pub fn from_document(
        model: Arc<DecisionModel>,
        doc: &InstanceDocument,
    ) -> Result<DecisionInstance, InstanceError> {
        if doc.model != model.name {
            return Err(InstanceError::ModelMismatch {
                expected: model.name.clone(),
                found: doc.model.clone(),
            });
        }
        let inputs = decode_inputs(&model, &doc.inputs)?;
        let instance = evaluate(&model, &inputs)?;
        let fresh = instance.to_document();
        if fresh.derived != doc.derived || fresh.trace != doc.trace {
            return Err(InstanceError::Stale);
        }
        Ok(instance)
    }
}

/// The JSON form of an instance: `{"model", "inputs", "derived", "trace"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub model: String,
    pub inputs: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub derived: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub trace: Vec<serde_json::Value>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("instance belongs to model `{found}`, expected `{expected}`")]
    ModelMismatch { expected: String, found: String },
    #[error("stored derived values differ from a fresh evaluation of the inputs")]
    Stale,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Kind-directed decoding of JSON input values.
pub fn decode_inputs(
    model: &DecisionModel,
    raw: &BTreeMap<String, serde_json::Value>,
) -> Result<Inputs, EvalError> {
    raw.iter()
        .map(|(name, json)| {
            let var = model
                .variable(name)
                .ok_or_else(|| EvalError::UnknownVariable(name.clone()))?;
            let value = Value::from_json(var.kind, json).ok_or_else(|| EvalError::TypeError {
                variable: name.clone(),
                kind: var.kind,
                value: json.to_string(),
            })?;
            Ok((name.clone(), value))
        })
        .collect()
}

fn check_inputs(model: &DecisionModel, inputs: &Inputs) -> Result<Inputs, EvalError> {
    let allowed = model.input_variables();
    inputs
        .iter()
        .map(|(name, value)| {
            let var = model
                .variable(name)
                .ok_or_else(|| EvalError::UnknownVariable(name.clone()))?;
            if !allowed.contains(&name.as_str()) {
                return Err(EvalError::NotAnInput(name.clone()));
            }
            let type_error = || EvalError::TypeError {
                variable: name.clone(),
                kind: var.kind,
                value: value.to_string(),
            };
            let coerced = value.clone().coerce(var.kind).ok_or_else(type_error)?;
            if let Some(domain) = &var.domain {
                if !domain
                    .iter()
                    .any(|l| l.to_value(var.kind).as_ref() == Some(&coerced))
                {
                    return Err(type_error());
                }
            }
            Ok((name.clone(), coerced))
        })
        .collect()
}

/// Evaluates `model` over `inputs` to a fixpoint.
pub fn evaluate(
    model: &Arc<DecisionModel>,
    inputs: &Inputs,
) -> Result<DecisionInstance, EvalError> {
    let inputs = check_inputs(model, inputs)?;
    let mut env: Env = inputs.clone();
    let mut origins: BTreeMap<String, String> = BTreeMap::new();
    let mut trace = Vec::new();

    for round in 1.. {
        let mut firing: Vec<(&crate::model::Rule, Value)> = Vec::new();
        for rule in &model.rule_model {
            let target = &rule.action.target().name;
            if env.contains_key(target) {
                continue;
            }
            let holds = match &rule.condition {
                None => Some(true),
                Some(c) => eval_condition(model, c, &env),
            };
            if holds != Some(true) {
                continue;
            }
            let value =
                eval_action(model, &rule.action, &env).map_err(|e| EvalError::Arithmetic {
                    rule: rule.name.clone(),
                    message: e.to_string(),
                })?;
            if let Some(value) = value {
                if let Some((other, _)) = firing
                    .iter()
                    .find(|(r, _)| r.action.target().name == *target)
                {
                    return Err(EvalError::ModelConflict {
                        variable: target.clone(),
                        rules: [other.name.clone(), rule.name.clone()],
                    });
                }
                firing.push((rule, value));
            }
        }
        if firing.is_empty() {
            break;
        }
        let steps: Vec<TraceStep> = firing
            .iter()
            .map(|(rule, value)| trace_step(model, rule, round, &env, value.clone()))
            .collect();
        for step in steps {
            env.insert(step.produced.variable.clone(), step.produced.value.clone());
            origins.insert(step.produced.variable.clone(), step.rule.clone());
            trace.push(step);
        }
    }

    let bindings: BTreeMap<String, Binding> = model
        .variables()
        .map(|(_, var)| {
            let origin = if inputs.contains_key(&var.name) {
                Origin::Input
            } else if let Some(rule) = origins.get(&var.name) {
                Origin::Derived(rule.clone())
            } else {
                Origin::Unset
            };
            let binding = Binding {
                variable: var.name.clone(),
                value: env.get(&var.name).cloned(),
                origin,
            };
            (var.name.clone(), binding)
        })
        .collect();
    let status = if model
        .output_variables()
        .iter()
        .all(|v| env.contains_key(*v))
    {
        Status::Complete
    } else {
        Status::Partial
    };
    Ok(DecisionInstance {
        model: Arc::clone(model),
        bindings,
        trace,
        status,
    })
}

fn trace_step(
    model: &DecisionModel,
    rule: &crate::model::Rule,
    round: usize,
    env: &Env,
    value: Value,
) -> TraceStep {
    let atoms = rule
        .condition
        .iter()
        .flat_map(|c| c.atoms())
        .map(|a| AtomOutcome {
            atom: a.to_string(),
            value: eval_atom(model, a, env),
        })
        .collect();
    let consumed = rule
        .condition_variables()
        .into_iter()
        .chain(rule.calculation_inputs())
        .filter_map(|v| Some((v.to_string(), env.get(v)?.clone())))
        .collect();
    TraceStep {
        rule: rule.name.clone(),
        round,
        atoms,
        consumed,
        produced: Produced {
            variable: rule.action.target().name.clone(),
            value,
        },
    }
}

/// Re-evaluates the instance's model with some inputs replaced.
pub fn evaluate_counterfactual(
    instance: &DecisionInstance,
    overrides: &Inputs,
) -> Result<DecisionInstance, EvalError> {
    let model = instance.model();
    let inputs = model.input_variables();
    let mut patched = instance.inputs();
    for (name, value) in overrides {
        if model.variable(name).is_none() {
            return Err(EvalError::UnknownVariable(name.clone()));
        }
        if !inputs.contains(&name.as_str()) {
            return Err(EvalError::OverrideDerived(name.clone()));
        }
        patched.insert(name.clone(), value.clone());
    }
    evaluate(model, &patched)
}
