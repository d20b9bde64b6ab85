//! Random well-typed models for property tests.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use explaineo::engine::Inputs;
use explaineo::model::{parse_model, DecisionModel, Kind, Value};
use proptest::collection::vec;
use proptest::prelude::*;

pub const FIXTURE: &str = include_str!("../../../../fixtures/tax_interest.dm");
pub const CRIPPLED: &str = include_str!("../../../../fixtures/tax_interest_crippled.dm");
pub const LATE: &str = include_str!("../../../../fixtures/late.json");
pub const ON_TIME: &str = include_str!("../../../../fixtures/on_time.json");

pub fn fixture() -> Arc<DecisionModel> {
    Arc::new(parse_model(FIXTURE).expect("fixture parses"))
}

pub fn fixture_inputs(model: &DecisionModel, json: &str) -> Inputs {
    let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(json).unwrap();
    explaineo::engine::decode_inputs(model, &raw).unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VKind {
    Bool,
    Enum,
    Number,
}

#[derive(Debug, Clone)]
struct AtomSeed {
    var: usize,
    op: usize,
    lit: usize,
    other: usize,
    negate: bool,
}

#[derive(Debug, Clone)]
struct RuleSeed {
    target: usize,
    atoms: Vec<AtomSeed>,
    disjunction: bool,
    literal: usize,
    calculation: Option<(usize, usize)>,
    source: bool,
}

/// Source text of a random model plus the names of its input variables.
#[derive(Debug, Clone)]
pub struct GenModel {
    pub source: String,
    pub inputs: Vec<String>,
}

const ENUM: [&str; 3] = ["a", "b", "c"];
const OPS: [&str; 6] = ["=", "!=", "<", "<=", ">", ">="];

fn kind(k: u8) -> VKind {
    match k % 3 {
        0 => VKind::Bool,
        1 => VKind::Enum,
        _ => VKind::Number,
    }
}

fn literal(k: VKind, i: usize) -> String {
    match k {
        VKind::Bool => (i % 2 == 1).to_string(),
        VKind::Enum => format!("\"{}\"", ENUM[i % 3]),
        VKind::Number => (i % 4).to_string(),
    }
}

fn atom(vars: &[(String, VKind)], a: &AtomSeed) -> String {
    let (name, k) = &vars[a.var % vars.len()];
    let text = match k {
        VKind::Bool if a.op.is_multiple_of(2) => name.clone(),
        VKind::Bool => format!("{name} = {}", literal(*k, a.lit)),
        VKind::Enum => format!("{name} {} {}", OPS[a.op % 2], literal(*k, a.lit)),
        VKind::Number => {
            let numbers: Vec<&String> = vars
                .iter()
                .filter(|(_, k)| *k == VKind::Number)
                .map(|(n, _)| n)
                .collect();
            let operand = if a.other.is_multiple_of(3) {
                numbers[a.other % numbers.len()].clone()
            } else {
                literal(*k, a.lit)
            };
            format!("{name} {} {operand}", OPS[a.op % 6])
        }
    };
    if a.negate {
        format!("not {text}")
    } else {
        text
    }
}

fn build(
    in_kinds: Vec<u8>,
    der_kinds: Vec<u8>,
    rules: Vec<RuleSeed>,
    outputs: Vec<bool>,
) -> GenModel {
    let inputs: Vec<(String, VKind)> = in_kinds
        .iter()
        .enumerate()
        .map(|(i, k)| (format!("in{i}"), kind(*k)))
        .collect();
    let derived: Vec<(String, VKind)> = der_kinds
        .iter()
        .enumerate()
        .map(|(i, k)| (format!("d{i}"), kind(*k)))
        .collect();
    let all: Vec<(String, VKind)> = inputs.iter().chain(&derived).cloned().collect();

    let decl = |(name, k): &(String, VKind), input: bool| match (k, input) {
        (VKind::Bool, _) => format!("  {name}: boolean\n"),
        (VKind::Enum, _) => format!("  {name}: enum in [\"a\", \"b\", \"c\"]\n"),
        (VKind::Number, true) => format!("  {name}: number in [0, 1, 2]\n"),
        (VKind::Number, false) => format!("  {name}: number\n"),
    };
    let mut src = String::from("model generated\n\nobject Inputs {\n");
    inputs.iter().for_each(|v| src.push_str(&decl(v, true)));
    src.push_str("}\n\nobject Derived {\n");
    derived.iter().for_each(|v| src.push_str(&decl(v, false)));
    src.push_str("  relates_to Inputs as basis\n}\n");

    for (i, r) in rules.iter().enumerate() {
        let (target, tk) = &derived[r.target % derived.len()];
        src.push_str(&format!("\nrule r{i}\n"));
        if r.source {
            src.push_str(&format!(
                "  source \"Art. {i}\" \"https://example.org/law/{i}\"\n"
            ));
        }
        if !r.atoms.is_empty() {
            let parts: Vec<String> = r.atoms.iter().map(|a| atom(&all, a)).collect();
            let sep = if r.disjunction { " or " } else { " and " };
            src.push_str(&format!("  if {}\n", parts.join(sep)));
        }
        let numbers: Vec<&String> = all
            .iter()
            .filter(|(_, k)| *k == VKind::Number)
            .map(|(n, _)| n)
            .collect();
        let value = match (tk, r.calculation) {
            (VKind::Number, Some((x, y))) => {
                format!(
                    "{} + {}",
                    numbers[x % numbers.len()],
                    numbers[y % numbers.len()]
                )
            }
            _ => literal(*tk, r.literal),
        };
        src.push_str(&format!("  then {target} = {value}\n"));
    }

    let outs: Vec<&str> = derived
        .iter()
        .zip(outputs.iter().cycle())
        .filter(|(_, o)| **o)
        .map(|((n, _), _)| n.as_str())
        .collect();
    let in_names: Vec<&str> = inputs.iter().map(|(n, _)| n.as_str()).collect();
    src.push_str(&format!(
        "\nservice S {{\n  in Given({})\n",
        in_names.join(", ")
    ));
    if !outs.is_empty() {
        src.push_str(&format!("  out Decided({})\n", outs.join(", ")));
    }
    src.push_str("}\n");
    GenModel {
        source: src,
        inputs: in_names.into_iter().map(String::from).collect(),
    }
}

fn atom_seed() -> impl Strategy<Value = AtomSeed> {
    (
        0..16usize,
        0..6usize,
        0..4usize,
        0..6usize,
        prop::bool::weighted(0.2),
    )
        .prop_map(|(var, op, lit, other, negate)| AtomSeed {
            var,
            op,
            lit,
            other,
            negate,
        })
}

fn rule_seed() -> impl Strategy<Value = RuleSeed> {
    (
        0..8usize,
        prop_oneof![1 => Just(Vec::new()), 6 => vec(atom_seed(), 1..=3)],
        any::<bool>(),
        0..4usize,
        prop::option::weighted(0.6, (0..8usize, 0..8usize)),
        prop::bool::weighted(0.3),
    )
        .prop_map(
            |(target, atoms, disjunction, literal, calculation, source)| RuleSeed {
                target,
                atoms,
                disjunction,
                literal,
                calculation,
                source,
            },
        )
}

/// Models with one to four finite-domain inputs (one of them numeric), up to
/// five derived variables and up to eight rules.
pub fn models() -> impl Strategy<Value = GenModel> {
    (
        vec(0..3u8, 0..=3),
        vec(0..3u8, 1..=5),
        vec(rule_seed(), 1..=8),
        vec(any::<bool>(), 1..=4),
    )
        .prop_map(|(mut in_kinds, der_kinds, rules, outputs)| {
            in_kinds.push(2);
            build(in_kinds, der_kinds, rules, outputs)
        })
}

/// The finite value set of an input, as declared.
pub fn domain(model: &DecisionModel, var: &str) -> Vec<Value> {
    let decl = model.variable(var).unwrap();
    match (&decl.domain, decl.kind) {
        (Some(d), k) => d.iter().map(|l| l.to_value(k).unwrap()).collect(),
        (None, Kind::Boolean) => vec![Value::Bool(false), Value::Bool(true)],
        _ => panic!("`{var}` has no finite domain"),
    }
}

/// Inputs picked by `choice`: 0 leaves a variable unset, k picks the k-th
/// domain value.
pub fn pick_inputs(model: &DecisionModel, inputs: &[String], choice: &[usize]) -> Inputs {
    inputs
        .iter()
        .zip(choice.iter().cycle())
        .filter_map(|(v, c)| {
            let d = domain(model, v);
            let k = c % (d.len() + 1);
            (k > 0).then(|| (v.clone(), d[k - 1].clone()))
        })
        .collect()
}

fn scalar() -> impl Strategy<Value = explaineo::graph::Scalar> {
    use explaineo::graph::Scalar;
    prop_oneof![
        any::<bool>().prop_map(Scalar::Bool),
        any::<i64>().prop_map(Scalar::Int),
        any::<f64>()
            .prop_filter("finite", |x| x.is_finite())
            .prop_map(Scalar::Float),
        "\\PC{0,12}|[a-z'\"\\\\\n\t` ]{0,8}".prop_map(Scalar::Str),
    ]
}

fn props() -> impl Strategy<Value = Vec<(String, explaineo::graph::Scalar)>> {
    vec(("[a-z][a-z_]{0,6}|[a-z -`]{1,6}", scalar()), 0..4).prop_map(|ps| {
        ps.into_iter()
            .filter(|(k, _)| k != "id" && k != "name")
            .collect()
    })
}

/// Arbitrary property graphs over the full label vocabulary, including
/// parallel edges, self loops and awkward strings.
pub fn graphs() -> impl Strategy<Value = explaineo::graph::PropertyGraph> {
    use explaineo::graph::{Edge, EdgeLabel, GraphBuilder, Node, NodeLabel, Scalar};
    let nodes = vec(
        (0..NodeLabel::ALL.len(), "[a-z0-9 '\"\\\\:]{1,8}", props()),
        1..14,
    );
    nodes
        .prop_flat_map(|nodes| {
            let n = nodes.len();
            let edges = vec((0..n, 0..EdgeLabel::ALL.len(), 0..n, props()), 0..(3 * n));
            (Just(nodes), edges)
        })
        .prop_map(|(nodes, edges)| {
            let mut b = GraphBuilder::new();
            for (i, (label, name, ps)) in nodes.iter().enumerate() {
                let mut properties: explaineo::graph::Properties = ps.iter().cloned().collect();
                properties.insert("name".into(), Scalar::Str(name.clone()));
                b.add_node(Node {
                    id: format!("n{i}:{name}"),
                    label: NodeLabel::ALL[*label],
                    properties,
                })
                .unwrap();
            }
            let ids: Vec<String> = nodes
                .iter()
                .enumerate()
                .map(|(i, (_, name, _))| format!("n{i}:{name}"))
                .collect();
            for (k, (from, label, to, ps)) in edges.into_iter().enumerate() {
                b.add_edge(Edge {
                    id: format!("e{k}"),
                    from: ids[from].clone(),
                    to: ids[to].clone(),
                    label: EdgeLabel::ALL[label],
                    properties: ps.into_iter().collect(),
                })
                .unwrap();
            }
            b.build().unwrap()
        })
}
