use serde::Serialize;

use super::{bad_param, ExplainError, QType, Question};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetSpec {
    None,
    Variable,
    /// A service name; without one every service is covered.
    OptionalService,
    /// A node to centre the view on when trimming.
    OptionalElement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub required: bool,
    pub description: &'static str,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub choices: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuestionSpec {
    pub qtype: QType,
    pub category: &'static str,
    pub requires_instance: bool,
    pub target: TargetSpec,
    pub parameters: Vec<ParamSpec>,
    pub description: &'static str,
}

fn param(
    name: &'static str,
    kind: &'static str,
    required: bool,
    description: &'static str,
) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        required,
        description,
        choices: Vec::new(),
    }
}

fn radius() -> ParamSpec {
    param(
        "radius",
        "integer",
        false,
        "Keep only graph elements within this many hops of the target.",
    )
}

/// The question types with their targets and parameters.
pub fn catalogue() -> Vec<QuestionSpec> {
    QType::ALL.into_iter().map(spec).collect()
}

fn spec(qtype: QType) -> QuestionSpec {
    let (target, mut parameters, description) = match qtype {
        QType::What => (
            TargetSpec::None,
            vec![],
            "The decisions taken for this case, the inputs they rest on and the rules applied.",
        ),
        QType::WhatIf => (
            TargetSpec::None,
            vec![param(
                "overrides",
                "object",
                true,
                "Input values to change, keyed by variable name.",
            )],
            "Re-evaluates the case with changed inputs and compares every variable.",
        ),
        QType::Why => (
            TargetSpec::Variable,
            vec![param(
                "trace",
                "boolean",
                false,
                "Follow the derivation back to the inputs instead of stopping at the last rule.",
            )],
            "The rule that set the variable, its legal source and the conditions that held.",
        ),
        QType::WhyNot => (
            TargetSpec::Variable,
            vec![param(
                "value",
                "value",
                true,
                "The value the variable did not get.",
            )],
            "Which conditions failed for the rules that could have produced the value.",
        ),
        QType::HowTo => (
            TargetSpec::Variable,
            vec![
                param("value", "value", true, "The value the variable should get."),
                param(
                    "fixed",
                    "object",
                    false,
                    "Inputs to keep. Defaults to the inputs of the given case.",
                ),
                param(
                    "free",
                    "array",
                    false,
                    "Inputs of the given case that may change.",
                ),
            ],
            "Input values under which the variable gets the value.",
        ),
        QType::Input => (
            TargetSpec::OptionalService,
            vec![],
            "The input messages of a service and the variables they carry.",
        ),
        QType::Output => (
            TargetSpec::OptionalService,
            vec![],
            "The output messages of a service and the variables they carry.",
        ),
        QType::How => (
            TargetSpec::Variable,
            vec![],
            "The rules that derive the variable and everything they depend on.",
        ),
        QType::Visualisation => (
            TargetSpec::OptionalElement,
            vec![ParamSpec {
                choices: vec!["object", "rule", "service", "full"],
                ..param("view", "string", false, "Which part of the model to show.")
            }],
            "A graph of the model, or of the case when one is given.",
        ),
        QType::Whether => (
            TargetSpec::OptionalService,
            vec![
                ParamSpec {
                    choices: vec![
                        "messages_used",
                        "io_paths",
                        "variables_used",
                        "variables_assigned",
                        "logical",
                    ],
                    ..param("check", "string", true, "The verification check to run.")
                },
                param(
                    "service",
                    "string",
                    false,
                    "Limit message and path checks to this service.",
                ),
            ],
            "Runs a verification check on the model.",
        ),
    };
    parameters.push(radius());
    QuestionSpec {
        qtype,
        category: if matches!(
            qtype,
            QType::What | QType::WhatIf | QType::Why | QType::WhyNot | QType::HowTo
        ) {
            "decision"
        } else {
            "system"
        },
        requires_instance: qtype.requires_instance(),
        target,
        parameters,
        description,
    }
}

/// Rejects unknown parameters and missing required ones.
pub(crate) fn validate(question: &Question) -> Result<(), ExplainError> {
    let spec = spec(question.qtype);
    for key in question.parameters.keys() {
        if !spec.parameters.iter().any(|p| p.name == key) {
            let known: Vec<&str> = spec.parameters.iter().map(|p| p.name).collect();
            return Err(bad_param(
                key,
                format!(
                    "not a parameter of `{}`; expected {}",
                    question.qtype,
                    known.join(", ")
                ),
            ));
        }
    }
    for p in &spec.parameters {
        if p.required && !question.parameters.contains_key(p.name) {
            return Err(bad_param(p.name, "missing"));
        }
    }
    if spec.target == TargetSpec::Variable && question.target.is_none() {
        return Err(ExplainError::MissingTarget(question.qtype));
    }
    Ok(())
}
