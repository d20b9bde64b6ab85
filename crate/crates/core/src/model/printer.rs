use std::fmt::Write;

use super::value::write_quoted;
use super::*;

/// Canonical source form of a model. Re-parsing the output yields an equal model.
pub fn print_model(model: &DecisionModel) -> String {
    let mut out = String::new();
    write!(out, "model {}", model.name).unwrap();
    if let Some(v) = &model.version {
        out.push(' ');
        write_quoted(&mut out, v).unwrap();
    }
    out.push('\n');

    for object in &model.object_model {
        writeln!(out, "\nobject {} {{", object.name).unwrap();
        for var in &object.variables {
            write!(out, "  {}: {}", var.name, var.kind).unwrap();
            if let Some(domain) = &var.domain {
                write!(out, " in {}", print_domain(domain)).unwrap();
            }
            if let Some(unit) = &var.unit {
                out.push_str(" unit ");
                write_quoted(&mut out, unit).unwrap();
            }
            out.push('\n');
        }
        for rel in &object.relations {
            writeln!(out, "  relates_to {} as {}", rel.target, rel.name).unwrap();
        }
        out.push_str("}\n");
    }

    for rule in &model.rule_model {
        writeln!(out, "\nrule {}", rule.name).unwrap();
        if let Some(src) = &rule.source {
            out.push_str("  source ");
            write_quoted(&mut out, &src.label).unwrap();
            out.push(' ');
            write_quoted(&mut out, &src.uri).unwrap();
            out.push('\n');
        }
        if let Some(cond) = &rule.condition {
            writeln!(out, "  if {}", print_condition(cond)).unwrap();
        }
        writeln!(out, "  then {}", print_action(&rule.action)).unwrap();
    }

    for service in &model.service_model {
        writeln!(out, "\nservice {} {{", service.name).unwrap();
        let messages = service
            .input_messages
            .iter()
            .map(|m| ("in", m))
            .chain(service.output_messages.iter().map(|m| ("out", m)));
        for (dir, msg) in messages {
            let vars: Vec<&str> = msg.variables.iter().map(|v| v.name.as_str()).collect();
            writeln!(out, "  {dir} {}({})", msg.name, vars.join(", ")).unwrap();
        }
        out.push_str("}\n");
    }
    out
}

pub fn print_domain(domain: &[Literal]) -> String {
    let values: Vec<String> = domain.iter().map(|l| l.to_string()).collect();
    format!("[{}]", values.join(", "))
}

pub fn print_action(action: &Action) -> String {
    match action {
        Action::Derivation { target, value } => format!("{} = {value}", target.name),
        Action::Calculation { target, expr } => format!("{} = {}", target.name, print_expr(expr)),
    }
}

pub fn print_condition(cond: &Condition) -> String {
    match cond {
        Condition::Atom(a) => a.to_string(),
        Condition::Not(inner) => match inner.as_ref() {
            Condition::Atom(_) | Condition::Not(_) => format!("not {}", print_condition(inner)),
            _ => format!("not ({})", print_condition(inner)),
        },
        Condition::And(parts) => parts
            .iter()
            .map(|c| match c {
                Condition::And(_) | Condition::Or(_) => format!("({})", print_condition(c)),
                _ => print_condition(c),
            })
            .collect::<Vec<_>>()
            .join(" and "),
        Condition::Or(parts) => parts
            .iter()
            .map(|c| match c {
                Condition::Or(_) => format!("({})", print_condition(c)),
                _ => print_condition(c),
            })
            .collect::<Vec<_>>()
            .join(" or "),
    }
}

pub fn print_expr(expr: &Expr) -> String {
    match expr {
        Expr::Literal(l) => l.to_string(),
        Expr::Var(v) => v.name.clone(),
        Expr::Neg(inner) => match inner.as_ref() {
            Expr::Var(_) => format!("-{}", print_expr(inner)),
            _ => format!("-({})", print_expr(inner)),
        },
        Expr::Binary { op, lhs, rhs } => {
            let side = |e: &Expr, right: bool| match e {
                Expr::Binary { op: inner, .. }
                    if inner.precedence() < op.precedence()
                        || (right && inner.precedence() == op.precedence()) =>
                {
                    format!("({})", print_expr(e))
                }
                _ => print_expr(e),
            };
            format!("{} {} {}", side(lhs, false), op.symbol(), side(rhs, true))
        }
    }
}
