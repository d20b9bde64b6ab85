//! Explanation questions over models and decisions.
//!
//! Ten question types are answered, split into questions about one decision
//! (what, what_if, why, why_not, how_to) and questions about the system
//! (input, output, how, visualisation, whether). Every [`Answer`] carries
//! prose, tables and a graph view whose elements come from the model or
//! instance graph. An [`AudienceProfile`] decides which questions a
//! recipient may ask, how much of the graph they see and whether the prose
//! uses identifiers or plain words.

mod catalogue;
mod decision;
mod system;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{DecisionInstance, EvalError, HowToError};
use crate::graph::{neighbourhood, EdgeLabel, PropertyGraph};
use crate::ids;
use crate::model::{
    print_condition, print_expr, Atom, Condition, DecisionModel, Expr, Operand, SourceRef, Value,
};
use crate::verify::VerifyError;

pub use catalogue::{catalogue, ParamSpec, QuestionSpec, TargetSpec};
pub use decision::{
    answer_how_to, answer_what, answer_what_if, answer_why, answer_why_not, answer_why_trace,
};
pub use system::{
    answer_how, answer_input, answer_output, answer_visualisation, answer_whether, View,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    What,
    WhatIf,
    Why,
    WhyNot,
    HowTo,
    Input,
    Output,
    How,
    Visualisation,
    Whether,
}

impl QType {
    pub const ALL: [QType; 10] = [
        QType::What,
        QType::WhatIf,
        QType::Why,
        QType::WhyNot,
        QType::HowTo,
        QType::Input,
        QType::Output,
        QType::How,
        QType::Visualisation,
        QType::Whether,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            QType::What => "what",
            QType::WhatIf => "what_if",
            QType::Why => "why",
            QType::WhyNot => "why_not",
            QType::HowTo => "how_to",
            QType::Input => "input",
            QType::Output => "output",
            QType::How => "how",
            QType::Visualisation => "visualisation",
            QType::Whether => "whether",
        }
    }

    /// Accepts the snake_case name, ignoring case and `-`/`_` differences.
    pub fn parse(s: &str) -> Option<QType> {
        let norm = s.to_ascii_lowercase().replace('-', "_");
        QType::ALL.into_iter().find(|q| q.as_str() == norm)
    }

    /// Questions about one decision need an evaluated instance.
    pub fn requires_instance(self) -> bool {
        matches!(
            self,
            QType::What | QType::WhatIf | QType::Why | QType::WhyNot | QType::HowTo
        )
    }
}

impl fmt::Display for QType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub qtype: QType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
}

impl Question {
    pub fn new(qtype: QType) -> Self {
        Question {
            qtype,
            target: None,
            parameters: BTreeMap::new(),
        }
    }

    pub fn target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }

    pub fn param(mut self, key: impl Into<String>, value: serde_json::Value) -> Self {
        self.parameters.insert(key.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: &str, columns: &[&str]) -> Self {
        Table {
            title: title.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub question: Question,
    pub text: String,
    pub tables: Vec<Table>,
    pub graph_view: PropertyGraph,
    pub citations: Vec<SourceRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vocabulary {
    /// Identifiers as declared in the model.
    Technical,
    /// Identifiers spelled as words, without underscores.
    Plain,
}

impl Vocabulary {
    pub fn name(self, ident: &str) -> String {
        match self {
            Vocabulary::Technical => ident.to_string(),
            Vocabulary::Plain => ident.replace('_', " "),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AudienceProfile {
    pub name: String,
    pub allowed: Vec<QType>,
    /// Graph views are trimmed to this many hops around the question target.
    pub radius: Option<usize>,
    pub vocabulary: Vocabulary,
}

impl AudienceProfile {
    /// Modellers verifying a model.
    pub fn model_expert() -> Self {
        AudienceProfile {
            name: "model_expert".into(),
            allowed: vec![
                QType::Input,
                QType::Output,
                QType::How,
                QType::Visualisation,
                QType::Whether,
            ],
            radius: None,
            vocabulary: Vocabulary::Technical,
        }
    }

    /// Legal professionals explaining individual decisions.
    pub fn legal_support() -> Self {
        AudienceProfile {
            name: "legal_support".into(),
            allowed: vec![
                QType::What,
                QType::WhatIf,
                QType::Why,
                QType::WhyNot,
                QType::HowTo,
                QType::Input,
                QType::Output,
            ],
            radius: None,
            vocabulary: Vocabulary::Plain,
        }
    }

    /// Every question, technical vocabulary, untrimmed views.
    pub fn unrestricted() -> Self {
        AudienceProfile {
            name: "unrestricted".into(),
            allowed: QType::ALL.to_vec(),
            radius: None,
            vocabulary: Vocabulary::Technical,
        }
    }

    pub fn builtin() -> Vec<AudienceProfile> {
        vec![
            AudienceProfile::model_expert(),
            AudienceProfile::legal_support(),
            AudienceProfile::unrestricted(),
        ]
    }

    pub fn by_name(name: &str) -> Option<AudienceProfile> {
        AudienceProfile::builtin()
            .into_iter()
            .find(|p| p.name == name)
    }

    pub fn allows(&self, qtype: QType) -> bool {
        self.allowed.contains(&qtype)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplainError {
    #[error("profile `{profile}` does not allow `{qtype}` questions")]
    QTypeNotAllowed { qtype: QType, profile: String },
    #[error("`{0}` questions need a decision instance")]
    MissingInstance(QType),
    #[error("`{0}` questions need a target")]
    MissingTarget(QType),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("unknown view `{0}`; expected object, rule, service or full")]
    UnknownView(String),
    #[error("unknown check `{0}`")]
    UnknownCheck(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("`{variable}` was not derived: {reason}; ask why_not instead")]
    NotDerived { variable: String, reason: String },
    #[error("no rule derives `{0}`; see the variables_assigned check")]
    NeverDerived(String),
    #[error("`{variable}` already has the value `{value}`")]
    SameValue { variable: String, value: String },
    #[error("parameter `{name}`: {message}")]
    BadParameter { name: String, message: String },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    HowTo(#[from] HowToError),
}

impl From<VerifyError> for ExplainError {
    fn from(e: VerifyError) -> Self {
        match e {
            VerifyError::UnknownService(s) => ExplainError::UnknownService(s),
            VerifyError::UnknownCheck(c) => ExplainError::UnknownCheck(c),
        }
    }
}

pub(crate) fn bad_param(name: &str, message: impl Into<String>) -> ExplainError {
    ExplainError::BadParameter {
        name: name.to_string(),
        message: message.into(),
    }
}

/// What a question is asked about.
#[derive(Debug, Clone, Copy)]
pub struct Context<'a> {
    pub model: &'a Arc<DecisionModel>,
    pub instance: Option<&'a DecisionInstance>,
}

/// Answers `question` for `profile`.
pub fn ask(
    profile: &AudienceProfile,
    question: &Question,
    ctx: Context<'_>,
) -> Result<Answer, ExplainError> {
    let q = question.qtype;
    if !profile.allows(q) {
        return Err(ExplainError::QTypeNotAllowed {
            qtype: q,
            profile: profile.name.clone(),
        });
    }
    catalogue::validate(question)?;
    let vocab = profile.vocabulary;
    let instance = || ctx.instance.ok_or(ExplainError::MissingInstance(q));
    let target = || {
        question
            .target
            .as_deref()
            .ok_or(ExplainError::MissingTarget(q))
    };
    let params = &question.parameters;
    let model = ctx.model;

    let mut answer = match q {
        QType::What => answer_what(instance()?, vocab),
        QType::WhatIf => {
            let raw = params
                .get("overrides")
                .and_then(|v| v.as_object())
                .ok_or_else(|| bad_param("overrides", "expected an object of input values"))?;
            let raw: BTreeMap<String, serde_json::Value> =
                raw.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            let overrides = crate::engine::decode_inputs(model, &raw)?;
            answer_what_if(instance()?, &overrides, vocab)?
        }
        QType::Why => {
            if params
                .get("trace")
                .and_then(|v| v.as_bool())
                .unwrap_or(false)
            {
                answer_why_trace(instance()?, target()?, vocab)?
            } else {
                answer_why(instance()?, target()?, vocab)?
            }
        }
        QType::WhyNot => {
            let target = target()?;
            let value = decode_value(model, target, params.get("value"), "value")?;
            answer_why_not(instance()?, target, &value, vocab)?
        }
        QType::HowTo => {
            let case = instance()?;
            let target = target()?;
            let goal = decode_value(model, target, params.get("value"), "value")?;
            let fixed = match params.get("fixed") {
                Some(v) => {
                    let obj = v
                        .as_object()
                        .ok_or_else(|| bad_param("fixed", "expected an object of input values"))?;
                    let raw = obj.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                    crate::engine::decode_inputs(model, &raw)?
                }
                None => {
                    let mut fixed = case.inputs();
                    if let Some(free) = params.get("free") {
                        let free = free
                            .as_array()
                            .ok_or_else(|| bad_param("free", "expected a list of input names"))?;
                        for name in free {
                            let name = name.as_str().ok_or_else(|| {
                                bad_param("free", "expected a list of input names")
                            })?;
                            fixed.remove(name);
                        }
                    }
                    fixed
                }
            };
            answer_how_to(model, &fixed, target, &goal, vocab)?
        }
        QType::Input => answer_input(model, question.target.as_deref(), vocab)?,
        QType::Output => answer_output(model, question.target.as_deref(), vocab)?,
        QType::How => answer_how(model, target()?, vocab)?,
        QType::Visualisation => {
            let view = match params.get("view") {
                None => View::Full,
                Some(v) => {
                    let name = v
                        .as_str()
                        .ok_or_else(|| bad_param("view", "expected a string"))?;
                    View::parse(name).ok_or_else(|| ExplainError::UnknownView(name.to_string()))?
                }
            };
            answer_visualisation(model, ctx.instance, view)
        }
        QType::Whether => {
            let check = params
                .get("check")
                .and_then(|v| v.as_str())
                .ok_or_else(|| bad_param("check", "expected a check id"))?;
            let service = params
                .get("service")
                .and_then(|v| v.as_str())
                .or(question.target.as_deref());
            answer_whether(model, check, service)?
        }
    };

    let radius = match params.get("radius") {
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| bad_param("radius", "expected a non-negative integer"))?
                as usize,
        ),
        None => profile.radius,
    };
    if let (Some(r), Some(t)) = (radius, question.target.as_deref()) {
        let centre = element_id(&answer.graph_view, t);
        if let Some(centre) = centre {
            answer.graph_view = neighbourhood(&answer.graph_view, &centre, r, &EdgeLabel::ALL)
                .expect("centre is in the view");
        }
    }
    answer.question = question.clone();
    Ok(answer)
}

/// The graph element a question target names: an element id, or a variable,
/// rule, service, message or object name.
pub fn element_id(graph: &PropertyGraph, target: &str) -> Option<String> {
    if graph.contains_node(target) {
        return Some(target.to_string());
    }
    [
        ids::var(target),
        ids::rule(target),
        ids::service(target),
        ids::message(target),
        ids::object(target),
    ]
    .into_iter()
    .find(|id| graph.contains_node(id))
}

fn decode_value(
    model: &DecisionModel,
    variable: &str,
    json: Option<&serde_json::Value>,
    param: &str,
) -> Result<Value, ExplainError> {
    let decl = model
        .variable(variable)
        .ok_or_else(|| ExplainError::UnknownVariable(variable.to_string()))?;
    let json = json.ok_or_else(|| bad_param(param, "missing"))?;
    Value::from_json(decl.kind, json)
        .ok_or_else(|| bad_param(param, format!("`{json}` is not a {} value", decl.kind)))
}

/// A value with the variable's unit, if it declares one.
pub(crate) fn value_text(model: &DecisionModel, variable: &str, value: &Value) -> String {
    match model.variable(variable).and_then(|v| v.unit.as_deref()) {
        Some(unit) => format!("{value} {unit}"),
        None => value.to_string(),
    }
}

pub(crate) fn citation(model: &DecisionModel, rule: &str) -> Option<SourceRef> {
    model.rule(rule).and_then(|r| r.source.clone())
}

pub(crate) fn push_citation(citations: &mut Vec<SourceRef>, source: Option<SourceRef>) {
    if let Some(s) = source {
        if !citations.contains(&s) {
            citations.push(s);
        }
    }
}

fn rename_atom(atom: &Atom, vocab: Vocabulary) -> Atom {
    let mut a = atom.clone();
    a.variable.name = vocab.name(&a.variable.name);
    if let Operand::Variable(v) = &mut a.operand {
        v.name = vocab.name(&v.name);
    }
    a
}

pub(crate) fn atom_text(atom: &Atom, vocab: Vocabulary) -> String {
    rename_atom(atom, vocab).to_string()
}

pub(crate) fn expr_text(expr: &Expr, vocab: Vocabulary) -> String {
    fn rename(e: &Expr, vocab: Vocabulary) -> Expr {
        match e {
            Expr::Literal(l) => Expr::Literal(l.clone()),
            Expr::Var(v) => Expr::var(&vocab.name(&v.name)),
            Expr::Neg(inner) => Expr::Neg(Box::new(rename(inner, vocab))),
            Expr::Binary { op, lhs, rhs } => {
                Expr::binary(*op, rename(lhs, vocab), rename(rhs, vocab))
            }
        }
    }
    print_expr(&rename(expr, vocab))
}

pub(crate) fn condition_text(cond: &Condition, vocab: Vocabulary) -> String {
    fn rename(c: &Condition, vocab: Vocabulary) -> Condition {
        match c {
            Condition::Atom(a) => Condition::Atom(rename_atom(a, vocab)),
            Condition::Not(inner) => Condition::Not(Box::new(rename(inner, vocab))),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| rename(c, vocab)).collect()),
            Condition::Or(cs) => Condition::Or(cs.iter().map(|c| rename(c, vocab)).collect()),
        }
    }
    print_condition(&rename(cond, vocab))
}

pub(crate) fn source_text(source: &SourceRef) -> String {
    format!("{} <{}>", source.label, source.uri)
}
