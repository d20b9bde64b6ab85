//! Seeded generators for random decision models and property graphs.
//!
//! Generated models keep their own condition and action trees next to the
//! DSL text, so test oracles can evaluate them without going through the
//! parser or the engine.

use explaineo::graph::{Edge, EdgeLabel, GraphBuilder, Node, NodeLabel, PropertyGraph, Scalar};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type Rand = ChaCha8Rng;

pub fn rng(seed: u64) -> Rand {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    Bool,
    /// Enum over the listed values.
    Enum(Vec<String>),
    /// Number; inputs carry a finite domain.
    Number(Option<Vec<i64>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub kind: Kind,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Lit {
    Bool(bool),
    Text(String),
    Int(i64),
}

impl Lit {
    fn dsl(&self) -> String {
        match self {
            Lit::Bool(b) => b.to_string(),
            Lit::Text(s) => format!("\"{s}\""),
            Lit::Int(i) => i.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub const ALL: [Cmp; 6] = [Cmp::Eq, Cmp::Ne, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge];

    fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Lit(Lit),
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub var: usize,
    pub cmp: Cmp,
    pub rhs: Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cond {
    Atom(Atom),
    Not(Box<Cond>),
    And(Vec<Cond>),
    Or(Vec<Cond>),
}

impl Cond {
    pub fn vars(&self, out: &mut Vec<usize>) {
        match self {
            Cond::Atom(a) => {
                out.push(a.var);
                if let Rhs::Var(v) = a.rhs {
                    out.push(v);
                }
            }
            Cond::Not(c) => c.vars(out),
            Cond::And(cs) | Cond::Or(cs) => cs.iter().for_each(|c| c.vars(out)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    Set(Lit),
    /// Sum of number variables.
    Sum(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub cond: Option<Cond>,
    pub target: usize,
    pub action: Action,
}

impl Rule {
    /// Variables the rule reads: condition variables, then calculation inputs.
    pub fn reads(&self) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(c) = &self.cond {
            c.vars(&mut out);
        }
        if let Action::Sum(vs) = &self.action {
            out.extend(vs);
        }
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub name: String,
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Service {
    pub name: String,
    pub inputs: Vec<Message>,
    pub outputs: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub name: String,
    pub vars: Vec<Var>,
    pub rules: Vec<Rule>,
    pub services: Vec<Service>,
}

impl Model {
    pub fn var_id(&self, v: usize) -> String {
        format!("var:{}", self.vars[v].name)
    }

    /// Variables carried by some input message.
    pub fn inputs(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .services
            .iter()
            .flat_map(|s| s.inputs.iter().flat_map(|m| m.vars.iter().copied()))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn atom_dsl(&self, a: &Atom) -> String {
        let rhs = match &a.rhs {
            Rhs::Lit(l) => l.dsl(),
            Rhs::Var(v) => self.vars[*v].name.clone(),
        };
        format!("{} {} {rhs}", self.vars[a.var].name, a.cmp.symbol())
    }

    fn cond_dsl(&self, c: &Cond) -> String {
        match c {
            Cond::Atom(a) => self.atom_dsl(a),
            Cond::Not(c) => format!("not ({})", self.cond_dsl(c)),
            Cond::And(cs) | Cond::Or(cs) => {
                let sep = if matches!(c, Cond::And(_)) {
                    " and "
                } else {
                    " or "
                };
                let parts: Vec<String> = cs
                    .iter()
                    .map(|c| format!("({})", self.cond_dsl(c)))
                    .collect();
                parts.join(sep)
            }
        }
    }

    pub fn to_dsl(&self) -> String {
        let mut out = format!("model {}\n", self.name);
        for (i, chunk) in self.vars.chunks(6).enumerate() {
            out.push_str(&format!("\nobject O{i} {{\n"));
            for v in chunk {
                let decl = match &v.kind {
                    Kind::Bool => "boolean".to_string(),
                    Kind::Enum(d) => {
                        let vals: Vec<String> = d.iter().map(|s| format!("\"{s}\"")).collect();
                        format!("enum in [{}]", vals.join(", "))
                    }
                    Kind::Number(Some(d)) => {
                        let vals: Vec<String> = d.iter().map(i64::to_string).collect();
                        format!("number in [{}]", vals.join(", "))
                    }
                    Kind::Number(None) => "number".to_string(),
                };
                out.push_str(&format!("  {}: {decl}\n", v.name));
            }
            if i > 0 {
                out.push_str(&format!("  relates_to O{} as parent\n", i - 1));
            }
            out.push_str("}\n");
        }
        for r in &self.rules {
            out.push_str(&format!("\nrule {}\n", r.name));
            if let Some(c) = &r.cond {
                out.push_str(&format!("  if {}\n", self.cond_dsl(c)));
            }
            let value = match &r.action {
                Action::Set(l) => l.dsl(),
                Action::Sum(vs) => {
                    let names: Vec<&str> = vs.iter().map(|v| self.vars[*v].name.as_str()).collect();
                    names.join(" + ")
                }
            };
            out.push_str(&format!("  then {} = {value}\n", self.vars[r.target].name));
        }
        for s in &self.services {
            out.push_str(&format!("\nservice {} {{\n", s.name));
            for (dir, msgs) in [("in", &s.inputs), ("out", &s.outputs)] {
                for m in msgs {
                    let names: Vec<&str> =
                        m.vars.iter().map(|v| self.vars[*v].name.as_str()).collect();
                    out.push_str(&format!("  {dir} {}({})\n", m.name, names.join(", ")));
                }
            }
            out.push_str("}\n");
        }
        out
    }
}

fn pick<T: Clone>(rng: &mut Rand, xs: &[T]) -> T {
    xs.choose(rng).expect("non-empty choice").clone()
}

fn subset(rng: &mut Rand, xs: &[usize], p: f64) -> Vec<usize> {
    xs.iter().copied().filter(|_| rng.gen_bool(p)).collect()
}

/// A literal that fits variable `v`.
fn literal(rng: &mut Rand, vars: &[Var], v: usize) -> Lit {
    match &vars[v].kind {
        Kind::Bool => Lit::Bool(rng.gen()),
        Kind::Enum(d) => Lit::Text(pick(rng, d)),
        Kind::Number(Some(d)) => Lit::Int(pick(rng, d) + rng.gen_range(-1..=1)),
        Kind::Number(None) => Lit::Int(rng.gen_range(-1..=4)),
    }
}

fn same_kind(a: &Kind, b: &Kind) -> bool {
    match (a, b) {
        (Kind::Bool, Kind::Bool) | (Kind::Number(_), Kind::Number(_)) => true,
        (Kind::Enum(x), Kind::Enum(y)) => x == y,
        _ => false,
    }
}

fn atom(rng: &mut Rand, vars: &[Var], pool: &[usize]) -> Atom {
    let var = pick(rng, pool);
    let ordered = matches!(vars[var].kind, Kind::Number(_));
    let cmp = if ordered {
        pick(rng, &Cmp::ALL)
    } else {
        pick(rng, &[Cmp::Eq, Cmp::Ne])
    };
    let partners: Vec<usize> = pool
        .iter()
        .copied()
        .filter(|&w| w != var && same_kind(&vars[var].kind, &vars[w].kind))
        .collect();
    let rhs = if !partners.is_empty() && rng.gen_bool(0.25) {
        Rhs::Var(pick(rng, &partners))
    } else {
        Rhs::Lit(literal(rng, vars, var))
    };
    Atom { var, cmp, rhs }
}

/// A condition tree of at most `depth` levels over variables from `pool`.
pub fn condition(rng: &mut Rand, vars: &[Var], pool: &[usize], depth: u32) -> Cond {
    if depth == 0 || rng.gen_bool(0.4) {
        return Cond::Atom(atom(rng, vars, pool));
    }
    match rng.gen_range(0..5) {
        0 => Cond::Not(Box::new(condition(rng, vars, pool, depth - 1))),
        1 | 2 => Cond::And(
            (0..rng.gen_range(2..=3))
                .map(|_| condition(rng, vars, pool, depth - 1))
                .collect(),
        ),
        _ => Cond::Or(
            (0..rng.gen_range(2..=3))
                .map(|_| condition(rng, vars, pool, depth - 1))
                .collect(),
        ),
    }
}

fn enum_domain() -> Vec<String> {
    vec!["low".into(), "mid".into(), "high".into()]
}

/// Models for the path and assignment checks: up to `max_vars` variables,
/// up to `max_rules` rules and one to three services. Some variables are
/// left out of every rule or message on purpose.
pub fn dependency_model(rng: &mut Rand, index: usize, max_vars: usize, max_rules: usize) -> Model {
    let n = rng.gen_range(2..=max_vars);
    let vars: Vec<Var> = (0..n)
        .map(|i| Var {
            name: format!("v{i}"),
            kind: if rng.gen_bool(0.5) {
                Kind::Bool
            } else {
                Kind::Number(None)
            },
        })
        .collect();
    let all: Vec<usize> = (0..n).collect();
    let numbers: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&v| vars[v].kind == Kind::Number(None))
        .collect();
    let rules: Vec<Rule> = (0..rng.gen_range(0..=max_rules))
        .map(|i| {
            let target = pick(rng, &all);
            let pool: Vec<usize> = {
                let s = subset(rng, &all, 0.2);
                if s.is_empty() {
                    vec![pick(rng, &all)]
                } else {
                    s
                }
            };
            let cond = rng.gen_bool(0.85).then(|| condition(rng, &vars, &pool, 2));
            let action = if vars[target].kind == Kind::Number(None) && rng.gen_bool(0.5) {
                Action::Sum(
                    (0..rng.gen_range(1..=3))
                        .map(|_| pick(rng, &numbers))
                        .collect(),
                )
            } else {
                Action::Set(literal(rng, &vars, target))
            };
            Rule {
                name: format!("r{i}"),
                cond,
                target,
                action,
            }
        })
        .collect();
    let mut msg = 0;
    let mut message = |vars: Vec<usize>| {
        msg += 1;
        Message {
            name: format!("M{msg}"),
            vars,
        }
    };
    let services = (0..rng.gen_range(1..=3))
        .map(|s| {
            let mut shuffled = all.clone();
            shuffled.shuffle(rng);
            let k = rng.gen_range(1..=n.min(6));
            let chosen = &shuffled[..k];
            let split = rng.gen_range(1..=chosen.len());
            let mut inputs = vec![message(chosen[..split].to_vec())];
            if split < chosen.len() {
                inputs.push(message(chosen[split..].to_vec()));
            }
            shuffled.shuffle(rng);
            let k = rng.gen_range(1..=n.min(6));
            let chosen = &shuffled[..k];
            let split = rng.gen_range(1..=chosen.len());
            let mut outputs = vec![message(chosen[..split].to_vec())];
            if split < chosen.len() {
                outputs.push(message(chosen[split..].to_vec()));
            }
            Service {
                name: format!("S{s}"),
                inputs,
                outputs,
            }
        })
        .collect();
    Model {
        name: format!("deps{index}"),
        vars,
        rules,
        services,
    }
}

/// Two rules deriving `goal` with random conditions over two to five
/// boolean and enum variables.
pub fn logic_model(rng: &mut Rand, index: usize) -> Model {
    let n = rng.gen_range(2..=5);
    let mut vars: Vec<Var> = (0..n)
        .map(|i| Var {
            name: format!("p{i}"),
            kind: if rng.gen_bool(0.5) {
                Kind::Bool
            } else {
                Kind::Enum(enum_domain())
            },
        })
        .collect();
    vars.push(Var {
        name: "goal".into(),
        kind: Kind::Bool,
    });
    let pool: Vec<usize> = (0..n).collect();
    let rules = (0..2)
        .map(|i| {
            // Narrow pools over few variables make contradictions common.
            let narrow: Vec<usize> = if rng.gen_bool(0.5) {
                vec![pick(rng, &pool)]
            } else {
                pool.clone()
            };
            Rule {
                name: format!("r{i}"),
                cond: Some(condition(rng, &vars, &narrow, 3)),
                target: n,
                action: Action::Set(Lit::Bool(rng.gen())),
            }
        })
        .collect();
    Model {
        name: format!("logic{index}"),
        vars,
        rules,
        services: vec![Service {
            name: "S".into(),
            inputs: vec![Message {
                name: "In".into(),
                vars: pool,
            }],
            outputs: vec![Message {
                name: "Out".into(),
                vars: vec![n],
            }],
        }],
    }
}

/// Models for engine properties: finite-domain inputs, derived variables
/// of every kind and rules that may chain, conflict or calculate.
pub fn engine_model(rng: &mut Rand, index: usize) -> Model {
    let n_in = rng.gen_range(1..=4);
    let n_out = rng.gen_range(1..=5);
    let kind = |rng: &mut Rand, input: bool| match rng.gen_range(0..3) {
        0 => Kind::Bool,
        1 => Kind::Enum(enum_domain()),
        _ => Kind::Number(input.then(|| vec![0, 1, 2])),
    };
    let mut vars: Vec<Var> = (0..n_in)
        .map(|i| Var {
            name: format!("in{i}"),
            kind: if i == 0 {
                Kind::Number(Some(vec![0, 1, 2]))
            } else {
                kind(rng, true)
            },
        })
        .collect();
    for i in 0..n_out {
        let k = kind(rng, false);
        vars.push(Var {
            name: format!("d{i}"),
            kind: k,
        });
    }
    let all: Vec<usize> = (0..vars.len()).collect();
    let derived: Vec<usize> = (n_in..vars.len()).collect();
    let numbers: Vec<usize> = all
        .iter()
        .copied()
        .filter(|&v| matches!(vars[v].kind, Kind::Number(_)))
        .collect();
    let rules = (0..rng.gen_range(1..=8))
        .map(|i| {
            let target = pick(rng, &derived);
            let cond = rng.gen_bool(0.85).then(|| condition(rng, &vars, &all, 2));
            let action = if matches!(vars[target].kind, Kind::Number(_)) && rng.gen_bool(0.5) {
                Action::Sum(
                    (0..rng.gen_range(1..=2))
                        .map(|_| pick(rng, &numbers))
                        .collect(),
                )
            } else {
                Action::Set(literal(rng, &vars, target))
            };
            Rule {
                name: format!("r{i}"),
                cond,
                target,
                action,
            }
        })
        .collect();
    Model {
        name: format!("engine{index}"),
        vars,
        rules,
        services: vec![Service {
            name: "S".into(),
            inputs: vec![Message {
                name: "Given".into(),
                vars: (0..n_in).collect(),
            }],
            outputs: vec![Message {
                name: "Decided".into(),
                vars: derived,
            }],
        }],
    }
}

/// The values an input can take.
pub fn domain(var: &Var) -> Vec<Lit> {
    match &var.kind {
        Kind::Bool => vec![Lit::Bool(false), Lit::Bool(true)],
        Kind::Enum(d) => d.iter().cloned().map(Lit::Text).collect(),
        Kind::Number(Some(d)) => d.iter().copied().map(Lit::Int).collect(),
        Kind::Number(None) => panic!("`{}` has no finite domain", var.name),
    }
}

/// Each input of `model` unset or set to a random domain value.
pub fn inputs(rng: &mut Rand, model: &Model) -> Vec<(usize, Lit)> {
    model
        .inputs()
        .into_iter()
        .filter_map(|v| {
            let d = domain(&model.vars[v]);
            let k = rng.gen_range(0..=d.len());
            (k > 0).then(|| (v, d[k - 1].clone()))
        })
        .collect()
}

fn scalar(rng: &mut Rand) -> Scalar {
    match rng.gen_range(0..4) {
        0 => Scalar::Bool(rng.gen()),
        1 => Scalar::Int(rng.gen()),
        2 => Scalar::Float(rng.gen_range(-1e12..1e12) * 10f64.powi(rng.gen_range(-30..30))),
        _ => {
            let alphabet = [
                'a', 'Z', ' ', '\'', '"', '\\', '\n', '\t', '`', 'é', '€', '{', '}', ':', ',',
            ];
            Scalar::Str(
                (0..rng.gen_range(0..10))
                    .map(|_| pick(rng, &alphabet))
                    .collect(),
            )
        }
    }
}

/// Arbitrary property graphs over the full label vocabulary, with parallel
/// edges, self loops and awkward strings.
pub fn property_graph(rng: &mut Rand) -> PropertyGraph {
    let n = rng.gen_range(1..=20);
    let keys = ["name_x", "value", "weird key", "fired", "k-2", "é"];
    let mut b = GraphBuilder::new();
    let ids: Vec<String> = (0..n).map(|i| format!("n{i}:'\"{}", i * 7)).collect();
    for id in &ids {
        let mut properties: explaineo::graph::Properties = (0..rng.gen_range(0..4))
            .map(|_| (pick(rng, &keys).to_string(), scalar(rng)))
            .collect();
        properties.insert("name".into(), Scalar::Str(format!("node {id}")));
        b.add_node(Node {
            id: id.clone(),
            label: pick(rng, &NodeLabel::ALL),
            properties,
        })
        .expect("fresh id");
    }
    for k in 0..rng.gen_range(0..3 * n) {
        b.add_edge(Edge {
            id: format!("e{k}"),
            from: pick(rng, &ids),
            to: pick(rng, &ids),
            label: pick(rng, &EdgeLabel::ALL),
            properties: (0..rng.gen_range(0..3))
                .map(|_| (pick(rng, &keys).to_string(), scalar(rng)))
                .collect(),
        })
        .expect("fresh id");
    }
    b.build().expect("generated graphs are well formed")
}
