use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::*;
use crate::ids;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A finding about a model element. `element` uses the same identifiers as
/// graph nodes (`var:x`, `rule:r`, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub element: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Diagnostic {
    fn error(element: String, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            element,
            message: message.into(),
            span: span.is_known().then_some(span),
        }
    }

    fn warning(element: String, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(element, span, message)
        }
    }
}

/// Checks every structural invariant of a model. An empty result means the
/// model is valid.
pub fn validate_model(model: &DecisionModel) -> Vec<Diagnostic> {
    let mut v = Validator {
        model,
        out: Vec::new(),
        vars: BTreeMap::new(),
    };
    v.declarations();
    v.rules();
    v.services();
    v.out
}

struct Validator<'a> {
    model: &'a DecisionModel,
    out: Vec<Diagnostic>,
    vars: BTreeMap<&'a str, &'a VariableDecl>,
}

fn literal_fits(lit: &Literal, var: &VariableDecl) -> Result<(), String> {
    if !var.kind.compatible_with(lit.natural_kind()) {
        return Err(format!(
            "{} literal `{lit}` does not fit {} variable `{}`",
            lit.natural_kind(),
            var.kind,
            var.name
        ));
    }
    if var.kind == Kind::Money {
        if let Literal::Number(n) = lit {
            if n.round_dp(2) != *n {
                return Err(format!("money literal `{lit}` has more than two decimals"));
            }
        }
    }
    if let Some(domain) = &var.domain {
        if !domain.contains(lit) {
            return Err(format!("`{lit}` is not in the domain of `{}`", var.name));
        }
    }
    Ok(())
}

impl<'a> Validator<'a> {
    fn declarations(&mut self) {
        let mut objects = BTreeSet::new();
        for object in &self.model.object_model {
            if !objects.insert(object.name.as_str()) {
                self.out.push(Diagnostic::error(
                    ids::object(&object.name),
                    object.span,
                    format!("duplicate object type `{}`", object.name),
                ));
            }
            for var in &object.variables {
                if self.vars.contains_key(var.name.as_str()) {
                    self.out.push(Diagnostic::error(
                        ids::var(&var.name),
                        var.span,
                        format!("duplicate variable `{}`", var.name),
                    ));
                } else {
                    self.vars.insert(&var.name, var);
                }
                self.variable(var);
            }
        }
        for object in &self.model.object_model {
            for rel in &object.relations {
                if !objects.contains(rel.target.as_str()) {
                    self.out.push(Diagnostic::error(
                        ids::object(&object.name),
                        rel.span,
                        format!(
                            "relation `{}` targets undeclared object type `{}`",
                            rel.name, rel.target
                        ),
                    ));
                }
            }
        }
    }

    fn variable(&mut self, var: &VariableDecl) {
        let id = ids::var(&var.name);
        match (&var.domain, var.kind) {
            (None, Kind::Enum) => self.out.push(Diagnostic::error(
                id.clone(),
                var.span,
                format!("enum variable `{}` needs a domain", var.name),
            )),
            (Some(d), _) if d.is_empty() => self.out.push(Diagnostic::error(
                id.clone(),
                var.span,
                format!("variable `{}` has an empty domain", var.name),
            )),
            _ => {}
        }
        if let Some(domain) = &var.domain {
            let mut seen = BTreeSet::new();
            for lit in domain {
                let unrestricted = VariableDecl {
                    domain: None,
                    ..var.clone()
                };
                if let Err(msg) = literal_fits(lit, &unrestricted) {
                    self.out.push(Diagnostic::error(id.clone(), var.span, msg));
                }
                if !seen.insert(lit.to_string()) {
                    self.out.push(Diagnostic::warning(
                        id.clone(),
                        var.span,
                        format!("duplicate domain value `{lit}`"),
                    ));
                }
            }
        }
    }

    fn lookup(&mut self, element: &str, r: &VarRef) -> Option<&'a VariableDecl> {
        let found = self.vars.get(r.name.as_str()).copied();
        if found.is_none() {
            self.out.push(Diagnostic::error(
                element.to_string(),
                r.span,
                format!("undeclared variable `{}`", r.name),
            ));
        }
        found
    }

    fn rules(&mut self) {
        let mut names = BTreeSet::new();
        for rule in &self.model.rule_model {
            let id = ids::rule(&rule.name);
            if !names.insert(rule.name.as_str()) {
                self.out.push(Diagnostic::error(
                    id.clone(),
                    rule.span,
                    format!("duplicate rule `{}`", rule.name),
                ));
            }
            if let Some(src) = &rule.source {
                if url::Url::parse(&src.uri).is_err() {
                    self.out.push(Diagnostic::error(
                        id.clone(),
                        rule.span,
                        format!("source `{}` has an invalid URI `{}`", src.label, src.uri),
                    ));
                }
            }
            if let Some(cond) = &rule.condition {
                self.condition(&id, cond);
            }
            let target = self.lookup(&id, rule.action.target());
            match &rule.action {
                Action::Derivation { value, .. } => {
                    if let Some(t) = target {
                        if let Err(msg) = literal_fits(value, t) {
                            self.out.push(Diagnostic::error(
                                id.clone(),
                                rule.action.target().span,
                                msg,
                            ));
                        }
                    }
                }
                Action::Calculation { expr, target: tref } => {
                    if let Some(kind) = self.expr_kind(&id, expr) {
                        if let Some(t) = target {
                            if !assignable(kind, t.kind) {
                                self.out.push(Diagnostic::error(
                                    id.clone(),
                                    tref.span,
                                    format!(
                                        "cannot assign a {kind} result to {} variable `{}`",
                                        t.kind, t.name
                                    ),
                                ));
                            }
                        }
                    }
                }
            }
        }
    }

    fn condition(&mut self, id: &str, cond: &Condition) {
        match cond {
            Condition::Atom(atom) => self.atom(id, atom),
            Condition::Not(c) => self.condition(id, c),
            Condition::And(cs) | Condition::Or(cs) => {
                if cs.is_empty() {
                    self.out.push(Diagnostic::error(
                        id.into(),
                        Span::default(),
                        "empty condition",
                    ));
                }
                cs.iter().for_each(|c| self.condition(id, c))
            }
        }
    }

    fn atom(&mut self, id: &str, atom: &Atom) {
        let subject = self.lookup(id, &atom.variable);
        let operand_kind = match &atom.operand {
            Operand::Literal(lit) => {
                if let Some(s) = subject {
                    let unrestricted = VariableDecl {
                        domain: None,
                        ..s.clone()
                    };
                    let check = if s.kind == Kind::Enum {
                        s
                    } else {
                        &unrestricted
                    };
                    if let Err(msg) = literal_fits(lit, check) {
                        self.out
                            .push(Diagnostic::error(id.into(), atom.variable.span, msg));
                        return;
                    }
                }
                Some(lit.natural_kind())
            }
            Operand::Variable(r) => {
                let operand = self.lookup(id, r);
                if let (Some(s), Some(o)) = (subject, operand) {
                    if !s.kind.compatible_with(o.kind) {
                        self.out.push(Diagnostic::error(
                            id.into(),
                            atom.variable.span,
                            format!(
                                "cannot compare {} variable `{}` with {} variable `{}`",
                                s.kind, s.name, o.kind, o.name
                            ),
                        ));
                        return;
                    }
                }
                operand.map(|o| o.kind)
            }
        };
        if let Some(s) = subject {
            let ordered = s.kind.is_ordered() && operand_kind.is_none_or(|k| k.is_ordered());
            if atom.comparator.is_order() && !ordered {
                self.out.push(Diagnostic::error(
                    id.into(),
                    atom.variable.span,
                    format!(
                        "comparator `{}` is not defined on {} variable `{}`",
                        atom.comparator, s.kind, s.name
                    ),
                ));
            }
        }
    }

    fn expr_kind(&mut self, id: &str, expr: &Expr) -> Option<Kind> {
        match expr {
            Expr::Literal(l) => Some(l.natural_kind()),
            Expr::Var(r) => self.lookup(id, r).map(|v| v.kind),
            Expr::Neg(inner) => {
                let k = self.expr_kind(id, inner)?;
                if k.is_numeric() {
                    Some(k)
                } else {
                    self.type_error(id, expr, format!("cannot negate a {k} value"));
                    None
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.expr_kind(id, lhs);
                let r = self.expr_kind(id, rhs);
                let (l, r) = (l?, r?);
                let result = arith_result(*op, l, r);
                if result.is_none() {
                    self.type_error(
                        id,
                        expr,
                        format!("operator `{}` is not defined for {l} and {r}", op.symbol()),
                    );
                }
                result
            }
        }
    }

    fn type_error(&mut self, id: &str, expr: &Expr, message: String) {
        let span = expr.var_refs().first().map(|v| v.span).unwrap_or_default();
        self.out.push(Diagnostic::error(id.into(), span, message));
    }

    fn services(&mut self) {
        let mut services = BTreeSet::new();
        let mut messages = BTreeSet::new();
        for service in &self.model.service_model {
            if !services.insert(service.name.as_str()) {
                self.out.push(Diagnostic::error(
                    ids::service(&service.name),
                    service.span,
                    format!("duplicate service `{}`", service.name),
                ));
            }
            for (msgs, dir) in [
                (&service.input_messages, "input"),
                (&service.output_messages, "output"),
            ] {
                let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
                for msg in msgs {
                    let id = ids::message(&msg.name);
                    if !messages.insert(msg.name.as_str()) {
                        self.out.push(Diagnostic::error(
                            id.clone(),
                            msg.span,
                            format!("duplicate message `{}`", msg.name),
                        ));
                    }
                    for v in &msg.variables {
                        self.lookup(&id, v);
                        if let Some(prev) = owner.insert(&v.name, &msg.name) {
                            self.out.push(Diagnostic::error(
                                id.clone(),
                                v.span,
                                format!(
                                    "variable `{}` appears in {dir} messages `{prev}` and `{}`",
                                    v.name, msg.name
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
}

/// Result kind of `l op r`, or `None` when undefined.
pub(crate) fn arith_result(op: ArithOp, l: Kind, r: Kind) -> Option<Kind> {
    use Kind::*;
    Some(match (op, l, r) {
        (ArithOp::Add | ArithOp::Sub, Number, Number) => Number,
        (ArithOp::Add | ArithOp::Sub, Money, Money | Number) => Money,
        (ArithOp::Add, Number, Money) | (ArithOp::Sub, Number, Money) => Money,
        (ArithOp::Add, Date, Number) | (ArithOp::Add, Number, Date) => Date,
        (ArithOp::Sub, Date, Number) => Date,
        (ArithOp::Sub, Date, Date) => Number,
        (ArithOp::Mul, Number, Number) => Number,
        (ArithOp::Mul, Money, Number) | (ArithOp::Mul, Number, Money) => Money,
        (ArithOp::Div, Number, Number) => Number,
        (ArithOp::Div, Money, Number) => Money,
        (ArithOp::Div, Money, Money) => Number,
        _ => return None,
    })
}

fn assignable(result: Kind, target: Kind) -> bool {
    result == target
        || (result.is_numeric() && target.is_numeric())
        || (result == Kind::Text && target == Kind::Enum)
        || (result == Kind::Enum && target == Kind::Text)
}
