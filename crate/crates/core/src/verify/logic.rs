//! Satisfiability of condition conjunctions.
//!
//! A conjunction is decided by enumerating, per variable, a finite set of
//! candidate values that is complete for comparator atoms: the domain when one
//! is declared, otherwise the constants the variable is compared with plus
//! enough points around and between them to realise any ordering of the
//! variables compared with each other.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};
use rust_decimal::Decimal;

use crate::engine::{eval_atom, Env};
use crate::model::{Atom, DecisionModel, Kind, Literal, Operand, Value};

pub(crate) enum Sat {
    Witness(Env),
    Unsat,
    /// The search was cut short or its candidate sets are not provably complete.
    Unknown,
}

/// Work budget, counted in partial assignments visited.
pub(crate) const SEARCH_BUDGET: usize = 200_000;

pub(crate) fn decide(model: &DecisionModel, atoms: &[&Atom], budget: &mut usize) -> Sat {
    let vars: Vec<&str> = atoms
        .iter()
        .flat_map(|a| a.variables())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: BTreeMap<&str, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let kind = |v: &str| model.variable(v).map(|d| d.kind);

    // Variables compared with each other share their candidate points.
    let mut parent: Vec<usize> = (0..vars.len()).collect();
    fn root(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for a in atoms {
        if let Operand::Variable(o) = &a.operand {
            let (x, y) = (index[a.variable.name.as_str()], index[o.name.as_str()]);
            let (rx, ry) = (root(&mut parent, x), root(&mut parent, y));
            parent[rx] = ry;
        }
    }
    let comp: Vec<usize> = (0..vars.len()).map(|i| root(&mut parent, i)).collect();

    let mut members: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for (i, v) in vars.iter().enumerate() {
        members.entry(comp[i]).or_default().push(v);
    }
    let mut constants: BTreeMap<usize, Vec<Value>> = BTreeMap::new();
    for a in atoms {
        if let (Operand::Literal(l), Some(k)) = (&a.operand, kind(&a.variable.name)) {
            let c = comp[index[a.variable.name.as_str()]];
            constants.entry(c).or_default().push(literal_value(l, k));
        }
    }
    for (c, vs) in &members {
        for v in vs {
            if let Some(d) = model
                .variable(v)
                .and_then(|d| d.domain.as_ref().map(|dom| (d.kind, dom)))
            {
                let entry = constants.entry(*c).or_default();
                entry.extend(d.1.iter().map(|l| literal_value(l, d.0)));
            }
        }
    }

    let mut complete = true;
    let mut candidates: Vec<Vec<Value>> = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let Some(decl) = model.variable(v) else {
            return Sat::Unknown;
        };
        let group = &members[&comp[i]];
        let kinds: BTreeSet<Kind> = group.iter().filter_map(|m| kind(m)).collect();
        if kinds.contains(&Kind::Number) && kinds.contains(&Kind::Money) {
            complete = false;
        }
        let consts = constants.get(&comp[i]).map(Vec::as_slice).unwrap_or(&[]);
        candidates.push(candidate_values(
            decl.kind,
            decl.domain.as_deref(),
            consts,
            group.len(),
        ));
    }

    // Each atom is checked as soon as its last variable is assigned.
    let mut due: Vec<Vec<&Atom>> = vec![Vec::new(); vars.len()];
    for a in atoms {
        let last = a
            .variables()
            .map(|v| index[v])
            .max()
            .expect("atoms mention a variable");
        due[last].push(a);
    }

    let mut env = Env::new();
    match search(model, &vars, &candidates, &due, 0, &mut env, budget) {
        Some(true) => Sat::Witness(env),
        Some(false) if complete => Sat::Unsat,
        _ => Sat::Unknown,
    }
}

fn search(
    model: &DecisionModel,
    vars: &[&str],
    candidates: &[Vec<Value>],
    due: &[Vec<&Atom>],
    i: usize,
    env: &mut Env,
    budget: &mut usize,
) -> Option<bool> {
    if i == vars.len() {
        return Some(true);
    }
    for value in &candidates[i] {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        env.insert(vars[i].to_string(), value.clone());
        if due[i]
            .iter()
            .all(|a| eval_atom(model, a, env) == Some(true))
        {
            match search(model, vars, candidates, due, i + 1, env, budget) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
        }
    }
    env.remove(vars[i]);
    Some(false)
}

fn literal_value(l: &Literal, kind: Kind) -> Value {
    l.to_value(kind).unwrap_or_else(|| l.to_natural_value())
}

fn ordinal(v: &Value) -> Option<Decimal> {
    match v {
        Value::Number(d) | Value::Money(d) => Some(*d),
        Value::Date(d) => Some(Decimal::from(d.num_days_from_ce())),
        _ => None,
    }
}

fn from_ordinal(kind: Kind, d: Decimal) -> Option<Value> {
    match kind {
        Kind::Number => Some(Value::Number(d)),
        Kind::Money => Some(Value::Money(d)),
        Kind::Date => {
            let days: i32 = d.try_into().ok()?;
            NaiveDate::from_num_days_from_ce_opt(days).map(Value::Date)
        }
        _ => None,
    }
}

/// Candidate values for one variable. `n` is the number of variables that
/// share these constants.
fn candidate_values(
    kind: Kind,
    domain: Option<&[Literal]>,
    consts: &[Value],
    n: usize,
) -> Vec<Value> {
    if let Some(d) = domain {
        return d.iter().filter_map(|l| l.to_value(kind)).collect();
    }
    let n = n.max(1) as i64;
    match kind {
        Kind::Boolean => vec![Value::Bool(false), Value::Bool(true)],
        Kind::Text | Kind::Enum => {
            let mut texts: BTreeSet<String> = consts
                .iter()
                .filter_map(|v| match v {
                    Value::Text(s) => Some(s.clone()),
                    _ => None,
                })
                .collect();
            let mut fresh = 0;
            let mut added = 0;
            while added < n {
                let s = format!("~{fresh}");
                fresh += 1;
                if texts.insert(s) {
                    added += 1;
                }
            }
            texts.into_iter().map(Value::Text).collect()
        }
        Kind::Number | Kind::Money | Kind::Date => {
            let points: BTreeSet<Decimal> = consts.iter().filter_map(ordinal).collect();
            let step = match kind {
                Kind::Money => Some(Decimal::new(1, 2)),
                Kind::Date => Some(Decimal::ONE),
                _ => None,
            };
            let out = match step {
                Some(s) => grid_points(&points, s, n),
                None => dense_points(&points, n),
            };
            out.into_iter()
                .filter_map(|d| from_ordinal(kind, d))
                .collect()
        }
    }
}

fn dense_points(consts: &BTreeSet<Decimal>, n: i64) -> BTreeSet<Decimal> {
    let mut out = consts.clone();
    let (Some(&lo), Some(&hi)) = (consts.first(), consts.last()) else {
        return (0..n).map(Decimal::from).collect();
    };
    for k in 1..=n {
        out.insert(lo - Decimal::from(k));
        out.insert(hi + Decimal::from(k));
    }
    let sorted: Vec<Decimal> = consts.iter().copied().collect();
    for w in sorted.windows(2) {
        let gap = (w[1] - w[0]) / Decimal::from(n + 1);
        for k in 1..=n {
            out.insert(w[0] + gap * Decimal::from(k));
        }
    }
    out
}

fn grid_points(consts: &BTreeSet<Decimal>, step: Decimal, n: i64) -> BTreeSet<Decimal> {
    if consts.is_empty() {
        return (0..n).map(|k| step * Decimal::from(k)).collect();
    }
    let mut out = BTreeSet::new();
    for c in consts {
        let g = (c / step).floor() * step;
        for k in -n..=n {
            out.insert(g + step * Decimal::from(k));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn sat(src: &str) -> Option<bool> {
        let m = parse_model(src).unwrap();
        let cond = m.rule_model[0].condition.as_ref().unwrap();
        let [branch] = cond.dnf(8).unwrap().try_into().unwrap();
        let atoms: Vec<&Atom> = branch.iter().collect();
        match decide(&m, &atoms, &mut SEARCH_BUDGET.clone()) {
            Sat::Witness(_) => Some(true),
            Sat::Unsat => Some(false),
            Sat::Unknown => None,
        }
    }

    #[test]
    fn intervals() {
        let decl = "model m object A { x: number y: number m: money d: date e: date b: boolean }";
        assert_eq!(
            sat(&format!("{decl} rule r if x > 5 and x < 3 then b = true")),
            Some(false)
        );
        assert_eq!(
            sat(&format!(
                "{decl} rule r if x > 3 and x < 3.01 then b = true"
            )),
            Some(true)
        );
        assert_eq!(
            sat(&format!(
                "{decl} rule r if m > 3 and m < 3.01 then b = true"
            )),
            Some(false)
        );
        assert_eq!(
            sat(&format!(
                "{decl} rule r if d > 2023-01-01 and d < 2023-01-02 then b = true"
            )),
            Some(false)
        );
        assert_eq!(
            sat(&format!("{decl} rule r if x < y and y < x then b = true")),
            Some(false)
        );
        assert_eq!(
            sat(&format!("{decl} rule r if d < e and e <= d then b = true")),
            Some(false)
        );
    }

    #[test]
    fn chains_of_variables() {
        let decl = "model m object A { x: date y: date z: date b: boolean }";
        assert_eq!(
            sat(&format!(
                "{decl} rule r if x > 2023-01-01 and x < y and y < z and z < 2023-01-04 then b = true"
            )),
            Some(false)
        );
        assert_eq!(
            sat(&format!(
                "{decl} rule r if x > 2023-01-01 and x < y and y < z and z < 2023-01-05 then b = true"
            )),
            Some(true)
        );
    }

    #[test]
    fn finite_domains() {
        let decl = "model m object A { c: enum in [\"p\", \"q\"] t: text b: boolean }";
        assert_eq!(
            sat(&format!(
                "{decl} rule r if c != \"p\" and c != \"q\" then b = true"
            )),
            Some(false)
        );
        assert_eq!(
            sat(&format!(
                "{decl} rule r if t != \"p\" and t != \"q\" then b = true"
            )),
            Some(true)
        );
        assert_eq!(
            sat(&format!("{decl} rule r if b and not b then b = true")),
            Some(false)
        );
    }
}
