//! Reference implementations that work on the generator's own trees and
//! share no code with the library under test.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use explaineo_acceptance::{Action, Atom, Cmp, Cond, Kind, Lit, Model, Rhs};

/// Row identity as the checks report it: element, kind, status.
pub type Row = (String, String, &'static str);

/// Reflexive transitive closure by Warshall's algorithm.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        let via = reach[k].clone();
        for row in reach.iter_mut().filter(|row| row[k]) {
            for (cell, &step) in row.iter_mut().zip(&via) {
                *cell |= step;
            }
        }
    }
    reach
}

/// Variables are nodes `0..vars`, rule `r` is node `vars + r`. Edges run
/// from every variable a rule reads to the rule and from the rule to its
/// target.
pub fn flow_closure(m: &Model) -> Vec<Vec<bool>> {
    let n = m.vars.len();
    let mut edges = Vec::new();
    for (r, rule) in m.rules.iter().enumerate() {
        for v in rule.reads() {
            edges.push((v, n + r));
        }
        edges.push((n + r, rule.target));
    }
    closure(n + m.rules.len(), &edges)
}

fn status(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn messages_used(m: &Model) -> Vec<Row> {
    let reach = flow_closure(m);
    let n = m.vars.len();
    let rules: Vec<usize> = (n..n + m.rules.len()).collect();
    let mut rows = Vec::new();
    for s in &m.services {
        for msg in &s.inputs {
            let ok = msg.vars.iter().any(|&v| rules.iter().any(|&r| reach[v][r]));
            rows.push((
                format!("msg:{}", msg.name),
                "input message".into(),
                status(ok),
            ));
        }
        for msg in &s.outputs {
            let ok = msg.vars.iter().any(|&v| rules.iter().any(|&r| reach[r][v]));
            rows.push((
                format!("msg:{}", msg.name),
                "output message".into(),
                status(ok),
            ));
        }
    }
    rows.sort();
    rows
}

pub fn io_paths(m: &Model) -> Vec<Row> {
    let reach = flow_closure(m);
    let mut rows = Vec::new();
    for s in &m.services {
        let ins: BTreeSet<usize> = s.inputs.iter().flat_map(|x| x.vars.clone()).collect();
        let outs: BTreeSet<usize> = s.outputs.iter().flat_map(|x| x.vars.clone()).collect();
        for &i in &ins {
            let ok = outs.iter().any(|&o| reach[i][o]);
            rows.push((m.var_id(i), "input variable".into(), status(ok)));
        }
        for &o in &outs {
            let ok = ins.iter().any(|&i| reach[i][o]);
            rows.push((m.var_id(o), "output variable".into(), status(ok)));
        }
    }
    rows.sort();
    rows
}

fn in_messages(m: &Model, v: usize, inputs: bool, outputs: bool) -> bool {
    m.services.iter().any(|s| {
        (inputs && s.inputs.iter().any(|x| x.vars.contains(&v)))
            || (outputs && s.outputs.iter().any(|x| x.vars.contains(&v)))
    })
}

pub fn variables_used(m: &Model) -> Vec<Row> {
    let mut rows: Vec<Row> = (0..m.vars.len())
        .map(|v| {
            let ok = m
                .rules
                .iter()
                .any(|r| r.target == v || r.reads().contains(&v))
                || in_messages(m, v, true, true);
            (m.var_id(v), "variable".into(), status(ok))
        })
        .collect();
    rows.sort();
    rows
}

pub fn variables_assigned(m: &Model) -> Vec<Row> {
    let mut rows: Vec<Row> = (0..m.vars.len())
        .map(|v| {
            let ok = m.rules.iter().any(|r| r.target == v) || in_messages(m, v, true, false);
            (m.var_id(v), "variable".into(), status(ok))
        })
        .collect();
    rows.sort();
    rows
}

pub type Env = BTreeMap<usize, Lit>;

fn compare(a: &Lit, b: &Lit) -> Option<Ordering> {
    match (a, b) {
        (Lit::Bool(x), Lit::Bool(y)) => Some(x.cmp(y)),
        (Lit::Int(x), Lit::Int(y)) => Some(x.cmp(y)),
        (Lit::Text(x), Lit::Text(y)) => Some(x.cmp(y)),
        _ => None,
    }
}

fn atom(a: &Atom, env: &Env) -> Option<bool> {
    let left = env.get(&a.var)?;
    let right = match &a.rhs {
        Rhs::Lit(l) => l,
        Rhs::Var(v) => env.get(v)?,
    };
    let o = compare(left, right)?;
    Some(match a.cmp {
        Cmp::Eq => o == Ordering::Equal,
        Cmp::Ne => o != Ordering::Equal,
        Cmp::Lt => o == Ordering::Less,
        Cmp::Le => o != Ordering::Greater,
        Cmp::Gt => o == Ordering::Greater,
        Cmp::Ge => o != Ordering::Less,
    })
}

/// Three-valued evaluation: `None` when unset variables leave it open.
pub fn eval(c: &Cond, env: &Env) -> Option<bool> {
    match c {
        Cond::Atom(a) => atom(a, env),
        Cond::Not(c) => eval(c, env).map(|b| !b),
        Cond::And(cs) => {
            let vals: Vec<Option<bool>> = cs.iter().map(|c| eval(c, env)).collect();
            if vals.contains(&Some(false)) {
                Some(false)
            } else if vals.iter().all(|v| *v == Some(true)) {
                Some(true)
            } else {
                None
            }
        }
        Cond::Or(cs) => {
            let vals: Vec<Option<bool>> = cs.iter().map(|c| eval(c, env)).collect();
            if vals.contains(&Some(true)) {
                Some(true)
            } else if vals.iter().all(|v| *v == Some(false)) {
                Some(false)
            } else {
                None
            }
        }
    }
}

fn finite_values(kind: &Kind) -> Vec<Lit> {
    match kind {
        Kind::Bool => vec![Lit::Bool(false), Lit::Bool(true)],
        Kind::Enum(d) => d.iter().cloned().map(Lit::Text).collect(),
        Kind::Number(Some(d)) => d.iter().copied().map(Lit::Int).collect(),
        Kind::Number(None) => panic!("truth tables need finite domains"),
    }
}

/// Every total assignment of `vars`.
fn assignments(m: &Model, vars: &[usize]) -> Vec<Env> {
    let mut out = vec![Env::new()];
    for &v in vars {
        let values = finite_values(&m.vars[v].kind);
        out = out
            .into_iter()
            .flat_map(|env| {
                values.iter().map(move |x| {
                    let mut e = env.clone();
                    e.insert(v, x.clone());
                    e
                })
            })
            .collect();
    }
    out
}

/// Whether some total assignment over the model's finite variables makes
/// every condition true.
pub fn satisfiable(m: &Model, conds: &[&Cond]) -> bool {
    let mut vars = Vec::new();
    conds.iter().for_each(|c| c.vars(&mut vars));
    vars.sort();
    vars.dedup();
    assignments(m, &vars)
        .iter()
        .any(|env| conds.iter().all(|c| eval(c, env) == Some(true)))
}

/// Rows of the logical check for models over finite variables.
pub fn logical(m: &Model) -> Vec<Row> {
    let mut rows = Vec::new();
    for r in &m.rules {
        let ok = r.cond.as_ref().is_none_or(|c| satisfiable(m, &[c]));
        rows.push((format!("rule:{}", r.name), "rule".into(), status(ok)));
    }
    for (i, a) in m.rules.iter().enumerate() {
        for b in &m.rules[i + 1..] {
            if a.target != b.target {
                continue;
            }
            let conds: Vec<&Cond> = a.cond.iter().chain(&b.cond).collect();
            if satisfiable(m, &conds) {
                rows.push((m.var_id(a.target), "rule pair".into(), "warning"));
            }
        }
    }
    rows.sort();
    rows
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: usize,
    pub round: usize,
    pub value: Lit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Done {
        env: Env,
        steps: Vec<Step>,
    },
    /// Two rules for `variable` in the same round.
    Conflict {
        variable: usize,
    },
}

fn action(a: &Action, env: &Env) -> Option<Lit> {
    match a {
        Action::Set(l) => Some(l.clone()),
        Action::Sum(vs) => {
            let mut total = 0;
            for v in vs {
                match env.get(v)? {
                    Lit::Int(i) => total += i,
                    other => panic!("sum over {other:?}"),
                }
            }
            Some(Lit::Int(total))
        }
    }
}

/// Round-based forward chaining under three-valued conditions.
pub fn run(m: &Model, inputs: &Env) -> Outcome {
    let mut env = inputs.clone();
    let mut steps = Vec::new();
    for round in 1.. {
        let mut fired: Vec<Step> = Vec::new();
        for (i, r) in m.rules.iter().enumerate() {
            if env.contains_key(&r.target) {
                continue;
            }
            let holds = r.cond.as_ref().map_or(Some(true), |c| eval(c, &env));
            if holds != Some(true) {
                continue;
            }
            let Some(value) = action(&r.action, &env) else {
                continue;
            };
            if fired.iter().any(|s| m.rules[s.rule].target == r.target) {
                return Outcome::Conflict { variable: r.target };
            }
            fired.push(Step {
                rule: i,
                round,
                value,
            });
        }
        if fired.is_empty() {
            break;
        }
        for s in &fired {
            env.insert(m.rules[s.rule].target, s.value.clone());
        }
        steps.extend(fired);
    }
    Outcome::Done { env, steps }
}

/// Replays a trace given as (rule, round, consumed, produced) against the
/// inputs. Every step must be enabled on the bindings at the start of its
/// round, read exactly those bindings and produce what the rule computes;
/// at the end no rule may remain enabled.
pub fn replay(
    m: &Model,
    inputs: &Env,
    trace: &[(usize, usize, Env, Lit)],
    final_env: &Env,
) -> Result<(), String> {
    let mut env = inputs.clone();
    let mut round = 0;
    let mut start = env.clone();
    for (k, (rule, r, consumed, produced)) in trace.iter().enumerate() {
        if *r < round || *r > round + 1 {
            return Err(format!("step {k}: round {r} after round {round}"));
        }
        if *r != round {
            round = *r;
            start = env.clone();
        }
        let rule_def = &m.rules[*rule];
        if start.contains_key(&rule_def.target) {
            return Err(format!("step {k}: target already bound"));
        }
        if rule_def
            .cond
            .as_ref()
            .map_or(Some(true), |c| eval(c, &start))
            != Some(true)
        {
            return Err(format!("step {k}: condition does not hold"));
        }
        let reads: Env = rule_def
            .reads()
            .into_iter()
            .filter_map(|v| Some((v, start.get(&v)?.clone())))
            .collect();
        if &reads != consumed {
            return Err(format!(
                "step {k}: consumed {consumed:?}, expected {reads:?}"
            ));
        }
        if action(&rule_def.action, &start).as_ref() != Some(produced) {
            return Err(format!("step {k}: produced {produced:?}"));
        }
        if env.insert(rule_def.target, produced.clone()).is_some() {
            return Err(format!("step {k}: target assigned twice"));
        }
    }
    if &env != final_env {
        return Err(format!("replayed {env:?}, instance has {final_env:?}"));
    }
    for r in &m.rules {
        let enabled = !env.contains_key(&r.target)
            && r.cond.as_ref().map_or(Some(true), |c| eval(c, &env)) == Some(true)
            && action(&r.action, &env).is_some();
        if enabled {
            return Err(format!("rule {} is still enabled at the end", r.name));
        }
    }
    Ok(())
}

/// Every minimal partial assignment of `free` under which `run` derives
/// `goal = value` without conflict.
pub fn how_to(m: &Model, fixed: &Env, free: &[usize], goal: (usize, &Lit)) -> Vec<Env> {
    let mut candidates = vec![Env::new()];
    for &v in free {
        let values = finite_values(&m.vars[v].kind);
        candidates = candidates
            .into_iter()
            .flat_map(|a| {
                let mut out = vec![a.clone()];
                out.extend(values.iter().map(|x| {
                    let mut b = a.clone();
                    b.insert(v, x.clone());
                    b
                }));
                out
            })
            .collect();
    }
    let achieves = |a: &Env| {
        let mut env = fixed.clone();
        env.extend(a.clone());
        matches!(run(m, &env), Outcome::Done { env, .. } if env.get(&goal.0) == Some(goal.1))
    };
    let good: Vec<Env> = candidates.into_iter().filter(achieves).collect();
    good.iter()
        .filter(|a| {
            !good
                .iter()
                .any(|b| b.len() < a.len() && b.iter().all(|(k, v)| a.get(k) == Some(v)))
        })
        .cloned()
        .collect()
}

/// Number of partial assignments [`how_to`] enumerates.
pub fn how_to_space(m: &Model, free: &[usize]) -> usize {
    free.iter()
        .map(|&v| finite_values(&m.vars[v].kind).len() + 1)
        .product()
}

/// Node ids reachable from `from` along edges whose label is in `labels`.
pub fn graph_closure(
    g: &explaineo::graph::PropertyGraph,
    labels: &[explaineo::graph::EdgeLabel],
) -> (Vec<String>, Vec<Vec<bool>>) {
    let ids: Vec<String> = g.nodes().map(|n| n.id.clone()).collect();
    let index: BTreeMap<&str, usize> = ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let edges: Vec<(usize, usize)> = g
        .edges()
        .filter(|e| labels.contains(&e.label))
        .map(|e| (index[e.from.as_str()], index[e.to.as_str()]))
        .collect();
    let reach = closure(ids.len(), &edges);
    (ids, reach)
}
