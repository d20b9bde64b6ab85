//! Operations shared by the command line and the HTTP API, with the error
//! classification both of them report.

use std::sync::Arc;

use explaineo::engine::{DecisionInstance, EvalError, HowToError, InstanceError};
use explaineo::explain::{ask, Answer, AudienceProfile, Context, ExplainError, Question};
use explaineo::model::{DecisionModel, ParseError};
use serde::Serialize;

use crate::workspace::WorkspaceError;

/// How a failure is reported: an HTTP status and a stable error code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Class {
    Invalid,
    NotFound,
    Conflict,
    Internal,
}

impl Class {
    pub fn status(self) -> u16 {
        match self {
            Class::Invalid => 400,
            Class::NotFound => 404,
            Class::Conflict => 409,
            Class::Internal => 500,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub class: Class,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<ParseError>,
}

impl Failure {
    pub fn new(class: Class, code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            class,
            code,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)?;
        for d in &self.diagnostics {
            write!(f, "\n  {d}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Failure {}

fn eval_failure(e: &EvalError) -> Failure {
    match e {
        EvalError::ModelConflict { .. } => {
            Failure::new(Class::Conflict, "rule_conflict", e.to_string())
        }
        _ => Failure::new(Class::Invalid, "invalid_inputs", e.to_string()),
    }
}

impl From<WorkspaceError> for Failure {
    fn from(e: WorkspaceError) -> Self {
        match &e {
            WorkspaceError::BadName(_) | WorkspaceError::NameMismatch { .. } => {
                Failure::new(Class::Invalid, "bad_name", e.to_string())
            }
            WorkspaceError::UnknownModel(_) | WorkspaceError::UnknownInstance(_) => {
                Failure::new(Class::NotFound, "not_found", e.to_string())
            }
            WorkspaceError::Invalid(diagnostics) => Failure {
                diagnostics: diagnostics.clone(),
                ..Failure::new(
                    Class::Invalid,
                    "invalid_model",
                    "model source does not validate",
                )
            },
            WorkspaceError::Instance {
                source: InstanceError::Eval(ev),
                ..
            } => eval_failure(ev),
            WorkspaceError::Instance { .. } => {
                Failure::new(Class::Conflict, "stale_instance", e.to_string())
            }
            WorkspaceError::Eval(ev) => eval_failure(ev),
            WorkspaceError::Io { .. } | WorkspaceError::Json { .. } => {
                Failure::new(Class::Internal, "storage", e.to_string())
            }
        }
    }
}

impl From<ExplainError> for Failure {
    fn from(e: ExplainError) -> Self {
        match &e {
            ExplainError::Eval(ev) | ExplainError::HowTo(HowToError::Eval(ev)) => eval_failure(ev),
            ExplainError::QTypeNotAllowed { .. } => {
                Failure::new(Class::Invalid, "not_allowed", e.to_string())
            }
            _ => Failure::new(Class::Invalid, "bad_question", e.to_string()),
        }
    }
}

pub fn profile(name: Option<&str>) -> Result<AudienceProfile, Failure> {
    let name = name.unwrap_or("unrestricted");
    AudienceProfile::by_name(name).ok_or_else(|| {
        let known: Vec<String> = AudienceProfile::builtin()
            .into_iter()
            .map(|p| p.name)
            .collect();
        Failure::new(
            Class::Invalid,
            "unknown_profile",
            format!(
                "unknown profile `{name}`; expected one of {}",
                known.join(", ")
            ),
        )
    })
}

/// Answers a question about a model, and optionally one of its instances,
/// for the named profile (`unrestricted` when absent).
pub fn answer(
    profile_name: Option<&str>,
    model: &Arc<DecisionModel>,
    instance: Option<&DecisionInstance>,
    question: &Question,
) -> Result<Answer, Failure> {
    let profile = profile(profile_name)?;
    if let Some(i) = instance {
        if i.model().name != model.name {
            return Err(Failure::new(
                Class::Invalid,
                "model_mismatch",
                format!(
                    "instance belongs to model `{}`, not `{}`",
                    i.model().name,
                    model.name
                ),
            ));
        }
    }
    Ok(ask(&profile, question, Context { model, instance })?)
}
