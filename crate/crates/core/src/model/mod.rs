//! The decision-model language: object, rule and service models.
//!
//! A model is written in a small keyword language (`.dm` files):
//!
//! ```text
//! model tax_interest "1.0"
//!
//! object Assessment {
//!   payment_due_date: date
//!   assessed_amount: money unit "EUR"
//!   relates_to Payment as settled_by
//! }
//!
//! rule late_payment
//!   if payment_date > payment_due_date
//!   then overdue = true
//!
//! service TaxInterest {
//!   in PaymentDetails(payment_date, payment_due_date)
//!   out Decision(overdue)
//! }
//! ```
//!
//! [`parse_model`] turns source text into a [`DecisionModel`] that satisfies
//! every structural invariant; [`validate_model`] reports the same checks as
//! [`Diagnostic`]s for models built in code.

mod lexer;
mod parser;
mod printer;
mod validate;
pub mod value;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parser::{parse_domain, parse_literal, parse_model, parse_model_unchecked, ParseError};
pub use printer::{print_action, print_condition, print_domain, print_expr, print_model};
pub use validate::{validate_model, Diagnostic, Severity};
pub use value::{Kind, Literal, Value};

/// A position in model source (1-based). Positions never take part in
/// model equality, so a re-parsed model compares equal to its original.
#[derive(Debug, Clone, Copy, Default, Eq, Serialize, Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }

    pub fn is_known(&self) -> bool {
        self.line > 0
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// A reference to a variable by name, with its source position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub span: Span,
}

impl VarRef {
    pub fn new(name: impl Into<String>) -> Self {
        VarRef {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn at(name: impl Into<String>, span: Span) -> Self {
        VarRef {
            name: name.into(),
            span,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionModel {
    pub name: String,
    pub version: Option<String>,
    pub object_model: Vec<ObjectType>,
    pub rule_model: Vec<Rule>,
    pub service_model: Vec<Service>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectType {
    pub name: String,
    pub variables: Vec<VariableDecl>,
    pub relations: Vec<Relation>,
    pub span: Span,
}

/// `relates_to <target> as <name>`
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub target: String,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDecl {
    pub name: String,
    pub kind: Kind,
    /// Finite value list; required for enums, optional otherwise.
    pub domain: Option<Vec<Literal>>,
    pub unit: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub source: Option<SourceRef>,
    /// Absent for unconditional rules.
    pub condition: Option<Condition>,
    pub action: Action,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub label: String,
    pub uri: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    /// Assigns a constant.
    Derivation { target: VarRef, value: Literal },
    /// Assigns the result of an arithmetic expression (or a copy of a variable).
    Calculation { target: VarRef, expr: Expr },
}

impl Action {
    pub fn target(&self) -> &VarRef {
        match self {
            Action::Derivation { target, .. } | Action::Calculation { target, .. } => target,
        }
    }

    pub fn is_calculation(&self) -> bool {
        matches!(self, Action::Calculation { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Ne,
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Comparator {
    pub const ALL: [Comparator; 6] = [
        Comparator::Eq,
        Comparator::Ne,
        Comparator::Lt,
        Comparator::Le,
        Comparator::Gt,
        Comparator::Ge,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Comparator> {
        Some(match s {
            "=" => Comparator::Eq,
            "!=" | "≠" | "<>" => Comparator::Ne,
            "<" => Comparator::Lt,
            "<=" | "≤" => Comparator::Le,
            ">" => Comparator::Gt,
            ">=" | "≥" => Comparator::Ge,
            _ => return None,
        })
    }

    pub fn is_order(self) -> bool {
        !matches!(self, Comparator::Eq | Comparator::Ne)
    }

    /// The comparator equivalent to `not (a op b)` over a total order.
    pub fn negate(self) -> Comparator {
        match self {
            Comparator::Eq => Comparator::Ne,
            Comparator::Ne => Comparator::Eq,
            Comparator::Lt => Comparator::Ge,
            Comparator::Le => Comparator::Gt,
            Comparator::Gt => Comparator::Le,
            Comparator::Ge => Comparator::Lt,
        }
    }

    /// The comparator with operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> Comparator {
        match self {
            Comparator::Lt => Comparator::Gt,
            Comparator::Le => Comparator::Ge,
            Comparator::Gt => Comparator::Lt,
            Comparator::Ge => Comparator::Le,
            c => c,
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Comparator::Eq => ord == Equal,
            Comparator::Ne => ord != Equal,
            Comparator::Lt => ord == Less,
            Comparator::Le => ord != Greater,
            Comparator::Gt => ord == Greater,
            Comparator::Ge => ord != Less,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Literal(Literal),
    Variable(VarRef),
}

/// `variable comparator operand`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub variable: VarRef,
    pub comparator: Comparator,
    pub operand: Operand,
}

impl Atom {
    pub fn new(variable: &str, comparator: Comparator, operand: Operand) -> Self {
        Atom {
            variable: VarRef::new(variable),
            comparator,
            operand,
        }
    }

    /// Variables the atom reads, subject first.
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        let operand = match &self.operand {
            Operand::Variable(v) => Some(v.name.as_str()),
            Operand::Literal(_) => None,
        };
        std::iter::once(self.variable.name.as_str()).chain(operand)
    }

    pub fn mentions(&self, variable: &str) -> bool {
        self.variables().any(|v| v == variable)
    }

    pub fn negated(&self) -> Atom {
        Atom {
            comparator: self.comparator.negate(),
            ..self.clone()
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} ", self.variable.name, self.comparator)?;
        match &self.operand {
            Operand::Literal(l) => write!(f, "{l}"),
            Operand::Variable(v) => f.write_str(&v.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Condition {
    Atom(Atom),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl Condition {
    /// All atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Condition::Atom(a) => out.push(a),
            Condition::Not(c) => c.collect_atoms(out),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.collect_atoms(out)),
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.atoms()
            .into_iter()
            .flat_map(|a| a.variables())
            .filter(|v| seen.insert(*v))
            .collect()
    }

    /// Negation normal form as a tree of And/Or over (possibly negated) atoms,
    /// where negation has been folded into the comparator.
    pub fn nnf(&self) -> Condition {
        self.nnf_with(false)
    }

    fn nnf_with(&self, negate: bool) -> Condition {
        match self {
            Condition::Atom(a) if negate => Condition::Atom(a.negated()),
            Condition::Atom(a) => Condition::Atom(a.clone()),
            Condition::Not(c) => c.nnf_with(!negate),
            Condition::And(cs) => {
                let parts = cs.iter().map(|c| c.nnf_with(negate)).collect();
                if negate {
                    Condition::Or(parts)
                } else {
                    Condition::And(parts)
                }
            }
            Condition::Or(cs) => {
                let parts = cs.iter().map(|c| c.nnf_with(negate)).collect();
                if negate {
                    Condition::And(parts)
                } else {
                    Condition::Or(parts)
                }
            }
        }
    }

    /// Disjunctive normal form: a list of conjunctions of literals. Returns
    /// `None` when the expansion would exceed `limit` branches.
    pub fn dnf(&self, limit: usize) -> Option<Vec<Vec<Atom>>> {
        fn go(c: &Condition, limit: usize) -> Option<Vec<Vec<Atom>>> {
            match c {
                Condition::Atom(a) => Some(vec![vec![a.clone()]]),
                Condition::Not(_) => unreachable!("dnf runs on nnf"),
                Condition::Or(cs) => {
                    let mut out = Vec::new();
                    for c in cs {
                        out.extend(go(c, limit)?);
                        if out.len() > limit {
                            return None;
                        }
                    }
                    Some(out)
                }
                Condition::And(cs) => {
                    let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
                    for c in cs {
                        let part = go(c, limit)?;
                        if acc.len().saturating_mul(part.len()) > limit {
                            return None;
                        }
                        acc = acc
                            .iter()
                            .flat_map(|left| {
                                part.iter().map(move |right| {
                                    let mut branch = left.clone();
                                    branch.extend(right.iter().cloned());
                                    branch
                                })
                            })
                            .collect();
                    }
                    Some(acc)
                }
            }
        }
        go(&self.nnf(), limit)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_condition(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }

    pub fn from_symbol(s: &str) -> Option<ArithOp> {
        Some(match s {
            "+" => ArithOp::Add,
            "-" => ArithOp::Sub,
            "*" => ArithOp::Mul,
            "/" => ArithOp::Div,
            _ => return None,
        })
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Literal(Literal),
    Var(VarRef),
    Neg(Box<Expr>),
    Binary {
        op: ArithOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: ArithOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(VarRef::new(name))
    }

    /// Variable references in left-to-right order (with repeats).
    pub fn var_refs(&self) -> Vec<&VarRef> {
        let mut out = Vec::new();
        self.collect_refs(&mut out);
        out
    }

    fn collect_refs<'a>(&'a self, out: &mut Vec<&'a VarRef>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Var(v) => out.push(v),
            Expr::Neg(e) => e.collect_refs(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_refs(out);
                rhs.collect_refs(out);
            }
        }
    }

    /// Distinct variables in first-occurrence order.
    pub fn variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.var_refs()
            .into_iter()
            .map(|v| v.name.as_str())
            .filter(|v| seen.insert(*v))
            .collect()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub name: String,
    pub variables: Vec<VarRef>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Service {
    pub name: String,
    pub input_messages: Vec<Message>,
    pub output_messages: Vec<Message>,
    pub span: Span,
}

impl Rule {
    /// Variables read by the condition.
    pub fn condition_variables(&self) -> Vec<&str> {
        self.condition
            .as_ref()
            .map(|c| c.variables())
            .unwrap_or_default()
    }

    /// Variables read by a calculation.
    pub fn calculation_inputs(&self) -> Vec<&str> {
        match &self.action {
            Action::Calculation { expr, .. } => expr.variables(),
            Action::Derivation { .. } => Vec::new(),
        }
    }
}

impl DecisionModel {
    pub fn empty(name: impl Into<String>) -> Self {
        DecisionModel {
            name: name.into(),
            version: None,
            object_model: Vec::new(),
            rule_model: Vec::new(),
            service_model: Vec::new(),
        }
    }

    /// All declared variables in declaration order, with their owning object type.
    pub fn variables(&self) -> impl Iterator<Item = (&ObjectType, &VariableDecl)> {
        self.object_model
            .iter()
            .flat_map(|o| o.variables.iter().map(move |v| (o, v)))
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables().map(|(_, v)| v).find(|v| v.name == name)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rule_model.iter().find(|r| r.name == name)
    }

    pub fn service(&self, name: &str) -> Option<&Service> {
        self.service_model.iter().find(|s| s.name == name)
    }

    /// Rules whose action assigns `variable`, in declaration order.
    pub fn rules_deriving<'a>(&'a self, variable: &'a str) -> impl Iterator<Item = &'a Rule> {
        self.rule_model
            .iter()
            .filter(move |r| r.action.target().name == variable)
    }

    /// Variables appearing in any service's input messages, deduplicated, in
    /// declaration order of the messages.
    pub fn input_variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.service_model
            .iter()
            .flat_map(|s| &s.input_messages)
            .flat_map(|m| &m.variables)
            .map(|v| v.name.as_str())
            .filter(|v| seen.insert(*v))
            .collect()
    }

    pub fn output_variables(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.service_model
            .iter()
            .flat_map(|s| &s.output_messages)
            .flat_map(|m| &m.variables)
            .map(|v| v.name.as_str())
            .filter(|v| seen.insert(*v))
            .collect()
    }

    pub fn is_input(&self, variable: &str) -> bool {
        self.input_variables().contains(&variable)
    }
}

impl fmt::Display for DecisionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_model(self))
    }
}
