//! Model verification checks.
//!
//! Path and assignment checks work on the simplified model graph; the
//! logical check needs condition semantics and works on the model itself.
//! Every check answers in three parts: a verdict sentence, a table with one
//! row per element in scope, and a graph view with the offending elements
//! marked `highlight = true`.

mod logic;
mod logical;
mod paths;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::builder::model_graph;
use crate::graph::PropertyGraph;
use crate::model::DecisionModel;

pub use logical::check_logical;
pub use paths::{
    check_io_paths, check_messages_used, check_variables_assigned, check_variables_used,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    MessagesUsed,
    IoPaths,
    VariablesUsed,
    VariablesAssigned,
    Logical,
}

impl CheckId {
    /// Every check, in the order [`run_all_checks`] runs them.
    pub const ALL: [CheckId; 5] = [
        CheckId::MessagesUsed,
        CheckId::IoPaths,
        CheckId::VariablesUsed,
        CheckId::VariablesAssigned,
        CheckId::Logical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::MessagesUsed => "messages_used",
            CheckId::IoPaths => "io_paths",
            CheckId::VariablesUsed => "variables_used",
            CheckId::VariablesAssigned => "variables_assigned",
            CheckId::Logical => "logical",
        }
    }

    pub fn parse(s: &str) -> Option<CheckId> {
        CheckId::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// The verification question the check answers.
    pub fn question(self) -> &'static str {
        match self {
            CheckId::MessagesUsed => "Is each input and output message used by the service?",
            CheckId::IoPaths => {
                "Is all input used to create the output, and can all output be created from the input?"
            }
            CheckId::VariablesUsed => "Is each variable used?",
            CheckId::VariablesAssigned => "Are all variables assigned?",
            CheckId::Logical => "Are the rule conditions free of contradictions?",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Pass,
    Fail,
    Warning,
    NotChecked,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
            RowStatus::Warning => "warning",
            RowStatus::NotChecked => "not_checked",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRow {
    pub element: String,
    pub kind: String,
    pub status: RowStatus,
    pub detail: String,
}

impl CheckRow {
    pub(crate) fn new(element: String, kind: &str, status: RowStatus, detail: String) -> Self {
        CheckRow {
            element,
            kind: kind.to_string(),
            status,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: CheckId,
    pub verdict: Verdict,
    pub text: String,
    pub table: Vec<CheckRow>,
    pub graph_view: PropertyGraph,
}

impl CheckReport {
    pub(crate) fn new(
        check: CheckId,
        text: String,
        table: Vec<CheckRow>,
        graph_view: PropertyGraph,
    ) -> Self {
        let verdict = if table.iter().any(|r| r.status == RowStatus::Fail) {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        CheckReport {
            check,
            verdict,
            text,
            table,
            graph_view,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failing(&self) -> impl Iterator<Item = &CheckRow> {
        self.table.iter().filter(|r| r.status == RowStatus::Fail)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("unknown service `{0}`")]
    UnknownService(String),
    #[error("unknown check `{0}`; expected one of messages_used, io_paths, variables_used, variables_assigned, logical")]
    UnknownCheck(String),
}

/// Runs one check. `service` limits the message and path checks to one
/// service; without it they cover every service.
pub fn run_check(
    model: &DecisionModel,
    check: CheckId,
    service: Option<&str>,
) -> Result<CheckReport, VerifyError> {
    let graph = model_graph(model);
    run_on_graph(model, &graph, check, service)
}

fn run_on_graph(
    model: &DecisionModel,
    graph: &PropertyGraph,
    check: CheckId,
    service: Option<&str>,
) -> Result<CheckReport, VerifyError> {
    match check {
        CheckId::MessagesUsed => check_messages_used(graph, service),
        CheckId::IoPaths => check_io_paths(graph, service),
        CheckId::VariablesUsed => Ok(check_variables_used(graph)),
        CheckId::VariablesAssigned => Ok(check_variables_assigned(graph)),
        CheckId::Logical => Ok(check_logical(model)),
    }
}

/// Runs every check in [`CheckId::ALL`] order.
pub fn run_all_checks(
    model: &DecisionModel,
    service: Option<&str>,
) -> Result<Vec<CheckReport>, VerifyError> {
    let graph = model_graph(model);
    CheckId::ALL
        .into_iter()
        .map(|c| run_on_graph(model, &graph, c, service))
        .collect()
}

/// Joins names as `a`, `a and b` or `a, b and c`.
pub(crate) fn join_names<S: AsRef<str>>(names: &[S]) -> String {
    match names {
        [] => String::new(),
        [one] => one.as_ref().to_string(),
        [init @ .., last] => {
            let init: Vec<&str> = init.iter().map(AsRef::as_ref).collect();
            format!("{} and {}", init.join(", "), last.as_ref())
        }
    }
}
