//! Three-valued condition evaluation and arithmetic over bindings.

use std::collections::BTreeMap;

use rust_decimal::Decimal;

use crate::model::{Action, ArithOp, Atom, Condition, DecisionModel, Expr, Operand, Value};

/// Variable values available during evaluation; absent means unset.
pub type Env = BTreeMap<String, Value>;

/// Truth of an atom, `None` while any of its variables is unset.
pub fn eval_atom(model: &DecisionModel, atom: &Atom, env: &Env) -> Option<bool> {
    let lhs = env.get(&atom.variable.name)?;
    let rhs = match &atom.operand {
        Operand::Variable(v) => env.get(&v.name)?.clone(),
        Operand::Literal(lit) => {
            let kind = model.variable(&atom.variable.name)?.kind;
            lit.to_value(kind).unwrap_or_else(|| lit.to_natural_value())
        }
    };
    // Incomparable operands are a validation error; evaluate them as false.
    Some(
        lhs.compare(&rhs)
            .is_some_and(|ord| atom.comparator.holds(ord)),
    )
}

/// Kleene evaluation: `Some(true)` once the condition is settled true.
pub fn eval_condition(model: &DecisionModel, cond: &Condition, env: &Env) -> Option<bool> {
    match cond {
        Condition::Atom(a) => eval_atom(model, a, env),
        Condition::Not(c) => eval_condition(model, c, env).map(|b| !b),
        Condition::And(cs) => {
            let mut unknown = false;
            for c in cs {
                match eval_condition(model, c, env) {
                    Some(false) => return Some(false),
                    None => unknown = true,
                    Some(true) => {}
                }
            }
            (!unknown).then_some(true)
        }
        Condition::Or(cs) => {
            let mut unknown = false;
            for c in cs {
                match eval_condition(model, c, env) {
                    Some(true) => return Some(true),
                    None => unknown = true,
                    Some(false) => {}
                }
            }
            (!unknown).then_some(false)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    Unset(String),
    DivisionByZero,
    Overflow,
    Type(String),
}

impl std::fmt::Display for ArithError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArithError::Unset(v) => write!(f, "variable `{v}` is unset"),
            ArithError::DivisionByZero => f.write_str("division by zero"),
            ArithError::Overflow => f.write_str("arithmetic overflow"),
            ArithError::Type(m) => f.write_str(m),
        }
    }
}

pub fn eval_expr(expr: &Expr, env: &Env) -> Result<Value, ArithError> {
    match expr {
        Expr::Literal(l) => Ok(l.to_natural_value()),
        Expr::Var(v) => env
            .get(&v.name)
            .cloned()
            .ok_or_else(|| ArithError::Unset(v.name.clone())),
        Expr::Neg(e) => match eval_expr(e, env)? {
            Value::Number(n) => Ok(Value::Number(-n)),
            Value::Money(n) => Ok(Value::Money(-n)),
            other => Err(ArithError::Type(format!("cannot negate `{other}`"))),
        },
        Expr::Binary { op, lhs, rhs } => {
            let l = eval_expr(lhs, env)?;
            let r = eval_expr(rhs, env)?;
            arith(*op, l, r)
        }
    }
}

fn arith(op: ArithOp, l: Value, r: Value) -> Result<Value, ArithError> {
    use Value::*;
    let num = |f: fn(Decimal, Decimal) -> Option<Decimal>, a: Decimal, b: Decimal| {
        f(a, b).ok_or(ArithError::Overflow)
    };
    let days = |n: Decimal| -> Result<chrono::Duration, ArithError> {
        if n.fract() != Decimal::ZERO {
            return Err(ArithError::Type(format!(
                "`{n}` is not a whole number of days"
            )));
        }
        let n: i64 = n.try_into().map_err(|_| ArithError::Overflow)?;
        chrono::Duration::try_days(n).ok_or(ArithError::Overflow)
    };
    let money = |l: &Value, r: &Value| matches!(l, Money(_)) || matches!(r, Money(_));
    match (op, &l, &r) {
        (ArithOp::Add, Date(d), Number(n)) | (ArithOp::Add, Number(n), Date(d)) => d
            .checked_add_signed(days(*n)?)
            .map(Date)
            .ok_or(ArithError::Overflow),
        (ArithOp::Sub, Date(d), Number(n)) => d
            .checked_sub_signed(days(*n)?)
            .map(Date)
            .ok_or(ArithError::Overflow),
        (ArithOp::Sub, Date(a), Date(b)) => Ok(Number(Decimal::from((*a - *b).num_days()))),
        (ArithOp::Div, Money(a), Money(b)) => {
            if b.is_zero() {
                return Err(ArithError::DivisionByZero);
            }
            num(Decimal::checked_div, *a, *b).map(Number)
        }
        (_, Number(a) | Money(a), Number(b) | Money(b)) => {
            if op == ArithOp::Div && b.is_zero() {
                return Err(ArithError::DivisionByZero);
            }
            let f = match op {
                ArithOp::Add => Decimal::checked_add,
                ArithOp::Sub => Decimal::checked_sub,
                ArithOp::Mul => Decimal::checked_mul,
                ArithOp::Div => Decimal::checked_div,
            };
            let v = num(f, *a, *b)?;
            // Intermediate money keeps full precision; rounding happens on assignment.
            Ok(if money(&l, &r) { Money(v) } else { Number(v) })
        }
        _ => Err(ArithError::Type(format!(
            "operator `{}` is not defined for `{l}` and `{r}`",
            op.symbol()
        ))),
    }
}

/// Value an action would assign under `env`, or `None` while a calculation
/// input is unset.
pub fn eval_action(
    model: &DecisionModel,
    action: &Action,
    env: &Env,
) -> Result<Option<Value>, ArithError> {
    let kind = model
        .variable(&action.target().name)
        .map(|v| v.kind)
        .ok_or_else(|| ArithError::Unset(action.target().name.clone()))?;
    let raw = match action {
        Action::Derivation { value, .. } => value
            .to_value(kind)
            .ok_or_else(|| ArithError::Type(format!("`{value}` does not fit a {kind} variable")))?,
        Action::Calculation { expr, .. } => match eval_expr(expr, env) {
            Ok(v) => v,
            Err(ArithError::Unset(_)) => return Ok(None),
            Err(e) => return Err(e),
        },
    };
    assign(raw, kind).map(Some)
}

/// Final assignment: money rounds half-up to cents here and nowhere else.
fn assign(v: Value, kind: crate::model::Kind) -> Result<Value, ArithError> {
    use crate::model::Kind;
    match (v, kind) {
        (Value::Number(n) | Value::Money(n), Kind::Money) => Ok(Value::money(n)),
        (Value::Number(n) | Value::Money(n), Kind::Number) => Ok(Value::Number(n.normalize())),
        (v, k) => v
            .clone()
            .coerce(k)
            .ok_or_else(|| ArithError::Type(format!("cannot assign `{v}` to a {k} variable"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;
    use std::str::FromStr;

    fn dec(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    #[test]
    fn kleene_connectives() {
        let m = parse_model(
            "model m object A { a: boolean b: boolean x: boolean }
             rule r if a or b then x = true
             rule s if a and b then x = false
             rule t if not a then x = false",
        )
        .unwrap();
        let cond = |i: usize| m.rule_model[i].condition.clone().unwrap();
        let mut env = Env::new();
        env.insert("a".into(), Value::Bool(true));
        assert_eq!(eval_condition(&m, &cond(0), &env), Some(true));
        assert_eq!(eval_condition(&m, &cond(1), &env), None);
        assert_eq!(eval_condition(&m, &cond(2), &env), Some(false));
        env.insert("a".into(), Value::Bool(false));
        assert_eq!(eval_condition(&m, &cond(0), &env), None);
        assert_eq!(eval_condition(&m, &cond(1), &env), Some(false));
    }

    #[test]
    fn date_and_money_arithmetic() {
        let m = parse_model(
            "model m object A { d1: date d2: date n: number amt: money rate: number total: money }
             rule r then n = d2 - d1
             rule s then total = amt * rate * n / 365",
        )
        .unwrap();
        let mut env = Env::new();
        env.insert(
            "d1".into(),
            Value::Date(chrono::NaiveDate::from_ymd_opt(2023, 4, 1).unwrap()),
        );
        env.insert(
            "d2".into(),
            Value::Date(chrono::NaiveDate::from_ymd_opt(2023, 4, 15).unwrap()),
        );
        let n = eval_action(&m, &m.rule_model[0].action, &env)
            .unwrap()
            .unwrap();
        assert_eq!(n, Value::Number(dec("14")));
        env.insert("n".into(), n);
        env.insert("amt".into(), Value::money(dec("10000")));
        env.insert("rate".into(), Value::Number(dec("0.04")));
        // 10000 * 0.04 * 14 / 365 = 15.3424... -> 15.34
        let out = eval_action(&m, &m.rule_model[1].action, &env)
            .unwrap()
            .unwrap();
        assert_eq!(out, Value::Money(dec("15.34")));
    }

    #[test]
    fn unset_input_defers_calculation() {
        let m =
            parse_model("model m object A { a: number b: number } rule r then b = a + 1").unwrap();
        assert_eq!(
            eval_action(&m, &m.rule_model[0].action, &Env::new()),
            Ok(None)
        );
    }

    #[test]
    fn division_by_zero() {
        let m =
            parse_model("model m object A { a: number b: number } rule r then b = 1 / a").unwrap();
        let mut env = Env::new();
        env.insert("a".into(), Value::Number(Decimal::ZERO));
        assert_eq!(
            eval_action(&m, &m.rule_model[0].action, &env),
            Err(ArithError::DivisionByZero)
        );
    }
}
