//! Variable kinds, source literals and runtime values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Serialize};

/// Declared kind of a variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Boolean,
    Number,
    Money,
    Date,
    Text,
    Enum,
}

impl Kind {
    pub const ALL: [Kind; 6] = [
        Kind::Boolean,
        Kind::Number,
        Kind::Money,
        Kind::Date,
        Kind::Text,
        Kind::Enum,
    ];

    /// Kinds on which `<`, `<=`, `>` and `>=` are defined.
    pub fn is_ordered(self) -> bool {
        matches!(self, Kind::Number | Kind::Money | Kind::Date)
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, Kind::Number | Kind::Money)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Kind::Boolean => "boolean",
            Kind::Number => "number",
            Kind::Money => "money",
            Kind::Date => "date",
            Kind::Text => "text",
            Kind::Enum => "enum",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    /// Whether a value of kind `other` may be compared with or assigned to
    /// a variable of this kind.
    pub fn compatible_with(self, other: Kind) -> bool {
        self == other
            || (self.is_numeric() && other.is_numeric())
            || (self == Kind::Enum && other == Kind::Text)
            || (self == Kind::Text && other == Kind::Enum)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A literal as written in model source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Bool(bool),
    Number(Decimal),
    Date(NaiveDate),
    Text(String),
}

impl Literal {
    /// Kind a literal has when no variable context is available.
    pub fn natural_kind(&self) -> Kind {
        match self {
            Literal::Bool(_) => Kind::Boolean,
            Literal::Number(_) => Kind::Number,
            Literal::Date(_) => Kind::Date,
            Literal::Text(_) => Kind::Text,
        }
    }

    /// Converts the literal to a runtime value for a variable of `kind`.
    pub fn to_value(&self, kind: Kind) -> Option<Value> {
        match (self, kind) {
            (Literal::Bool(b), Kind::Boolean) => Some(Value::Bool(*b)),
            (Literal::Number(n), Kind::Number) => Some(Value::Number(*n)),
            (Literal::Number(n), Kind::Money) => Some(Value::money(*n)),
            (Literal::Date(d), Kind::Date) => Some(Value::Date(*d)),
            (Literal::Text(s), Kind::Text | Kind::Enum) => Some(Value::Text(s.clone())),
            _ => None,
        }
    }

    /// Best-effort value for contexts without a target kind.
    pub fn to_natural_value(&self) -> Value {
        match self {
            Literal::Bool(b) => Value::Bool(*b),
            Literal::Number(n) => Value::Number(*n),
            Literal::Date(d) => Value::Date(*d),
            Literal::Text(s) => Value::Text(s.clone()),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Number(n) => write!(f, "{}", n.normalize()),
            Literal::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Literal::Text(s) => write_quoted(f, s),
        }
    }
}

pub(crate) fn write_quoted(f: &mut impl fmt::Write, s: &str) -> fmt::Result {
    f.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => f.write_str("\\\"")?,
            '\\' => f.write_str("\\\\")?,
            '\n' => f.write_str("\\n")?,
            '\t' => f.write_str("\\t")?,
            c => f.write_char(c)?,
        }
    }
    f.write_char('"')
}

/// A typed runtime value. Enum values are carried as [`Value::Text`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Number(Decimal),
    /// Always held at two decimals.
    Money(Decimal),
    Date(NaiveDate),
    Text(String),
}

impl Value {
    /// Money with half-up rounding to cents.
    pub fn money(amount: Decimal) -> Value {
        Value::Money(round_money(amount))
    }

    pub fn kind_hint(&self) -> Kind {
        match self {
            Value::Bool(_) => Kind::Boolean,
            Value::Number(_) => Kind::Number,
            Value::Money(_) => Kind::Money,
            Value::Date(_) => Kind::Date,
            Value::Text(_) => Kind::Text,
        }
    }

    pub fn as_decimal(&self) -> Option<Decimal> {
        match self {
            Value::Number(n) | Value::Money(n) => Some(*n),
            _ => None,
        }
    }

    /// Compares two values of compatible kinds; `None` when they are not comparable.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => Some(a.cmp(b)),
            (Value::Date(a), Value::Date(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (a, b) => Some(a.as_decimal()?.cmp(&b.as_decimal()?)),
        }
    }

    /// Coerces a value to the representation used for variables of `kind`.
    /// Money values must already be representable in cents.
    pub fn coerce(self, kind: Kind) -> Option<Value> {
        match (self, kind) {
            (v @ Value::Bool(_), Kind::Boolean) => Some(v),
            (Value::Number(n) | Value::Money(n), Kind::Number) => Some(Value::Number(n)),
            (Value::Number(n) | Value::Money(n), Kind::Money) => {
                (n.round_dp(2) == n).then(|| Value::Money(round_money(n)))
            }
            (v @ Value::Date(_), Kind::Date) => Some(v),
            (v @ Value::Text(_), Kind::Text | Kind::Enum) => Some(v),
            _ => None,
        }
    }

    /// The literal that denotes this value in model source.
    pub fn to_literal(&self) -> Literal {
        match self {
            Value::Bool(b) => Literal::Bool(*b),
            Value::Number(n) | Value::Money(n) => Literal::Number(*n),
            Value::Date(d) => Literal::Date(*d),
            Value::Text(s) => Literal::Text(s.clone()),
        }
    }

    /// JSON encoding used in instance documents.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Number(n) => serde_json::from_str(&n.normalize().to_string())
                .unwrap_or_else(|_| serde_json::Value::String(n.to_string())),
            Value::Money(_) | Value::Date(_) | Value::Text(_) => {
                serde_json::Value::String(self.to_string())
            }
        }
    }

    /// Kind-directed decoding of a JSON value.
    pub fn from_json(kind: Kind, json: &serde_json::Value) -> Option<Value> {
        use serde_json::Value as J;
        match (kind, json) {
            (Kind::Boolean, J::Bool(b)) => Some(Value::Bool(*b)),
            (Kind::Boolean, J::String(s)) => s.parse().ok().map(Value::Bool),
            (Kind::Number | Kind::Money, J::Number(n)) => Decimal::from_str(&n.to_string())
                .or_else(|_| Decimal::from_scientific(&n.to_string()))
                .ok()
                .and_then(|d| Value::Number(d).coerce(kind)),
            (Kind::Number | Kind::Money, J::String(s)) => Decimal::from_str(s.trim())
                .ok()
                .and_then(|d| Value::Number(d).coerce(kind)),
            (Kind::Date, J::String(s)) => parse_date(s).map(Value::Date),
            (Kind::Text | Kind::Enum, J::String(s)) => Some(Value::Text(s.clone())),
            _ => None,
        }
    }

    /// Parses the textual form used by the CLI (`--param k=v`) and by
    /// [`fmt::Display`].
    pub fn parse_as(kind: Kind, s: &str) -> Option<Value> {
        Value::from_json(kind, &serde_json::Value::String(s.to_string()))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Number(n) => write!(f, "{}", n.normalize()),
            Value::Money(n) => write!(f, "{:.2}", n),
            Value::Date(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            Value::Text(s) => f.write_str(s),
        }
    }
}

pub fn round_money(amount: Decimal) -> Decimal {
    let mut rounded = amount.round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero);
    rounded.rescale(2);
    rounded
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dec(s: &str) -> Decimal {
        Decimal::from_str(s).unwrap()
    }

    #[test]
    fn money_rounds_half_up() {
        assert_eq!(Value::money(dec("1.005")), Value::Money(dec("1.01")));
        assert_eq!(Value::money(dec("-1.005")), Value::Money(dec("-1.01")));
        assert_eq!(Value::money(dec("2.004")).to_string(), "2.00");
    }

    #[test]
    fn money_coercion_rejects_sub_cent_input() {
        assert_eq!(Value::Number(dec("1.234")).coerce(Kind::Money), None);
        assert_eq!(
            Value::Number(dec("1.5")).coerce(Kind::Money),
            Some(Value::Money(dec("1.50")))
        );
    }

    #[test]
    fn json_round_trip_is_kind_directed() {
        let d = Value::Date(NaiveDate::from_ymd_opt(2023, 4, 1).unwrap());
        assert_eq!(d.to_json(), serde_json::json!("2023-04-01"));
        assert_eq!(Value::from_json(Kind::Date, &d.to_json()), Some(d));
        let n = Value::Number(dec("0.04"));
        assert_eq!(n.to_json(), serde_json::json!(0.04));
        assert_eq!(Value::from_json(Kind::Number, &n.to_json()), Some(n));
        let m = Value::money(dec("1234.5"));
        assert_eq!(m.to_json(), serde_json::json!("1234.50"));
        assert_eq!(
            Value::from_json(Kind::Money, &serde_json::json!(1234.5)),
            Some(m)
        );
        assert_eq!(Value::from_json(Kind::Boolean, &serde_json::json!(1)), None);
    }

    #[test]
    fn mixed_numeric_comparison() {
        let a = Value::Number(dec("3"));
        let b = Value::money(dec("3"));
        assert_eq!(a.compare(&b), Some(Ordering::Equal));
        assert_eq!(a.compare(&Value::Bool(true)), None);
    }
}
