//! Lossless projection of a model onto a property graph.
//!
//! Ordered containment (objects in the model, variables in an object,
//! children of a condition) is recorded as an `index` property on the
//! containing edge.

use crate::graph::{Edge, EdgeLabel, GraphBuilder, Node, NodeLabel, PropertyGraph, Scalar};
use crate::ids;
use crate::model::{
    parse_domain, parse_literal, print_action, print_condition, print_domain, print_expr, Action,
    ArithOp, Atom, Comparator, Condition, DecisionModel, Expr, Kind, Message, ObjectType, Operand,
    Relation, Rule, Service, SourceRef, Span, VarRef, VariableDecl,
};

use super::BuildError;

pub fn build_asg(model: &DecisionModel) -> PropertyGraph {
    let mut b = GraphBuilder::new();
    let mut root = vec![];
    if let Some(v) = &model.version {
        root.push(("version", Scalar::from(v.as_str())));
    }
    add(&mut b, ids::MODEL, NodeLabel::Model, &model.name, root);

    for (i, object) in model.object_model.iter().enumerate() {
        let oid = ids::object(&object.name);
        add(&mut b, &oid, NodeLabel::ObjectType, &object.name, []);
        b.edge(ids::MODEL, EdgeLabel::Contains, &oid, [("index", i.into())]);
        for (j, var) in object.variables.iter().enumerate() {
            let vid = ids::var(&var.name);
            let mut props = vec![
                ("kind", Scalar::from(var.kind.keyword())),
                ("object", Scalar::from(object.name.as_str())),
            ];
            if let Some(d) = &var.domain {
                props.push(("domain", print_domain(d).into()));
            }
            if let Some(u) = &var.unit {
                props.push(("unit", u.as_str().into()));
            }
            add(&mut b, &vid, NodeLabel::Variable, &var.name, props);
            b.edge(&oid, EdgeLabel::HasVariable, &vid, [("index", j.into())]);
        }
    }
    // Relations second, so targets declared later in the file exist.
    for object in &model.object_model {
        for (j, rel) in object.relations.iter().enumerate() {
            b.edge(
                &ids::object(&object.name),
                EdgeLabel::RelatesTo,
                &ids::object(&rel.target),
                [("name", rel.name.as_str().into()), ("index", j.into())],
            );
        }
    }

    for (i, rule) in model.rule_model.iter().enumerate() {
        let rid = ids::rule(&rule.name);
        add(&mut b, &rid, NodeLabel::Rule, &rule.name, []);
        b.edge(ids::MODEL, EdgeLabel::Contains, &rid, [("index", i.into())]);
        if let Some(src) = &rule.source {
            let sid = ids::source(&rule.name);
            add(
                &mut b,
                &sid,
                NodeLabel::Source,
                &src.label,
                [("uri", src.uri.as_str().into())],
            );
            b.edge(&sid, EdgeLabel::SourceOf, &rid, []);
        }
        if let Some(cond) = &rule.condition {
            let cid = format!("{rid}/cond");
            add_condition(&mut b, &cid, cond);
            b.edge(&rid, EdgeLabel::HasCondition, &cid, []);
        }
        let aid = format!("{rid}/action");
        let target = ids::var(&rule.action.target().name);
        match &rule.action {
            Action::Derivation { value, .. } => {
                let props = [
                    ("kind", Scalar::from("derivation")),
                    ("value", value.to_string().into()),
                ];
                add(
                    &mut b,
                    &aid,
                    NodeLabel::Action,
                    &print_action(&rule.action),
                    props,
                );
            }
            Action::Calculation { expr, .. } => {
                let props = [("kind", Scalar::from("calculation"))];
                add(
                    &mut b,
                    &aid,
                    NodeLabel::Action,
                    &print_action(&rule.action),
                    props,
                );
                let eid = format!("{aid}/expr");
                add_expr(&mut b, &eid, expr);
                b.edge(&aid, EdgeLabel::Operand, &eid, [("index", 0usize.into())]);
            }
        }
        b.edge(&rid, EdgeLabel::HasAction, &aid, []);
        b.edge(&aid, EdgeLabel::Target, &target, []);
    }

    for (i, service) in model.service_model.iter().enumerate() {
        let sid = ids::service(&service.name);
        add(&mut b, &sid, NodeLabel::Service, &service.name, []);
        b.edge(ids::MODEL, EdgeLabel::Contains, &sid, [("index", i.into())]);
        add_messages(
            &mut b,
            &sid,
            &service.input_messages,
            NodeLabel::InputMessage,
        );
        add_messages(
            &mut b,
            &sid,
            &service.output_messages,
            NodeLabel::OutputMessage,
        );
    }

    b.build()
        .expect("validated models project onto valid graphs")
}

fn add(
    b: &mut GraphBuilder,
    id: &str,
    label: NodeLabel,
    name: &str,
    props: impl IntoIterator<Item = (&'static str, Scalar)>,
) {
    b.node(id, label, name, props)
        .expect("validated models have unique element names");
}

fn add_messages(b: &mut GraphBuilder, service: &str, messages: &[Message], label: NodeLabel) {
    for (i, msg) in messages.iter().enumerate() {
        let mid = ids::message(&msg.name);
        add(b, &mid, label, &msg.name, []);
        b.edge(service, EdgeLabel::HasMessage, &mid, [("index", i.into())]);
        for (j, v) in msg.variables.iter().enumerate() {
            let vid = ids::var(&v.name);
            if label == NodeLabel::InputMessage {
                b.edge(&mid, EdgeLabel::Input, &vid, [("index", j.into())]);
            } else {
                b.edge(&vid, EdgeLabel::Output, &mid, [("index", j.into())]);
            }
        }
    }
}

fn add_condition(b: &mut GraphBuilder, id: &str, cond: &Condition) {
    let name = print_condition(cond);
    let children: &[Condition] = match cond {
        Condition::Atom(atom) => {
            let mut props = vec![("comparator", Scalar::from(atom.comparator.symbol()))];
            if let Operand::Literal(l) = &atom.operand {
                props.push(("literal", l.to_string().into()));
            }
            add(b, id, NodeLabel::Atom, &name, props);
            b.edge(
                id,
                EdgeLabel::RefersTo,
                &ids::var(&atom.variable.name),
                [("role", "subject".into())],
            );
            if let Operand::Variable(v) = &atom.operand {
                b.edge(
                    id,
                    EdgeLabel::RefersTo,
                    &ids::var(&v.name),
                    [("role", "operand".into())],
                );
            }
            return;
        }
        Condition::Not(c) => std::slice::from_ref(c.as_ref()),
        Condition::And(cs) | Condition::Or(cs) => cs,
    };
    let op = match cond {
        Condition::Not(_) => "not",
        Condition::And(_) => "and",
        _ => "or",
    };
    add(b, id, NodeLabel::Condition, &name, [("op", op.into())]);
    for (i, c) in children.iter().enumerate() {
        let cid = format!("{id}.{i}");
        add_condition(b, &cid, c);
        b.edge(id, EdgeLabel::Contains, &cid, [("index", i.into())]);
    }
}

fn add_expr(b: &mut GraphBuilder, id: &str, expr: &Expr) {
    let name = print_expr(expr);
    match expr {
        Expr::Literal(l) => {
            let props = [
                ("op", Scalar::from("literal")),
                ("literal", l.to_string().into()),
            ];
            add(b, id, NodeLabel::Expression, &name, props);
        }
        Expr::Var(v) => {
            add(b, id, NodeLabel::Expression, &name, [("op", "var".into())]);
            b.edge(id, EdgeLabel::RefersTo, &ids::var(&v.name), []);
        }
        Expr::Neg(e) => {
            add(b, id, NodeLabel::Expression, &name, [("op", "neg".into())]);
            let cid = format!("{id}.0");
            add_expr(b, &cid, e);
            b.edge(id, EdgeLabel::Operand, &cid, [("index", 0usize.into())]);
        }
        Expr::Binary { op, lhs, rhs } => {
            add(
                b,
                id,
                NodeLabel::Expression,
                &name,
                [("op", op.symbol().into())],
            );
            for (i, e) in [lhs, rhs].into_iter().enumerate() {
                let cid = format!("{id}.{i}");
                add_expr(b, &cid, e);
                b.edge(id, EdgeLabel::Operand, &cid, [("index", i.into())]);
            }
        }
    }
}

/// Rebuilds the model an abstract syntax graph was projected from.
/// Source positions are not recorded in the graph and come back unknown.
pub fn reconstruct_model(asg: &PropertyGraph) -> Result<DecisionModel, BuildError> {
    let root = asg
        .node(ids::MODEL)
        .filter(|n| n.label == NodeLabel::Model)
        .ok_or_else(|| malformed("no model node"))?;
    let mut model = DecisionModel::empty(root.name());
    model.version = opt_str(root, "version");

    for child in ordered(
        asg.out_edges(ids::MODEL)
            .filter(|e| e.label == EdgeLabel::Contains),
    )? {
        let node = asg
            .node(&child.to)
            .expect("frozen graphs have no dangling edges");
        match node.label {
            NodeLabel::ObjectType => model.object_model.push(object(asg, node)?),
            NodeLabel::Rule => model.rule_model.push(rule(asg, node)?),
            NodeLabel::Service => model.service_model.push(service(asg, node)?),
            other => return Err(malformed(format!("model contains a {other} node"))),
        }
    }
    Ok(model)
}

fn malformed(msg: impl Into<String>) -> BuildError {
    BuildError::Malformed(msg.into())
}

fn opt_str(node: &Node, key: &str) -> Option<String> {
    node.prop(key).and_then(Scalar::as_str).map(String::from)
}

fn req_str<'a>(node: &'a Node, key: &str) -> Result<&'a str, BuildError> {
    node.prop(key)
        .and_then(Scalar::as_str)
        .ok_or_else(|| malformed(format!("node `{}` lacks `{key}`", node.id)))
}

fn index(edge: &Edge) -> Result<i64, BuildError> {
    match edge.prop("index") {
        Some(Scalar::Int(i)) => Ok(*i),
        _ => Err(malformed(format!("edge `{}` lacks an index", edge.id))),
    }
}

fn ordered<'a>(edges: impl Iterator<Item = &'a Edge>) -> Result<Vec<&'a Edge>, BuildError> {
    let mut keyed = edges
        .map(|e| index(e).map(|i| (i, e)))
        .collect::<Result<Vec<_>, _>>()?;
    keyed.sort_by_key(|(i, e)| (*i, e.id.clone()));
    Ok(keyed.into_iter().map(|(_, e)| e).collect())
}

fn target_name<'a>(asg: &'a PropertyGraph, edge: &Edge) -> &'a str {
    asg.node(&edge.to)
        .expect("frozen graphs have no dangling edges")
        .name()
}

fn object(asg: &PropertyGraph, node: &Node) -> Result<ObjectType, BuildError> {
    let mut variables = Vec::new();
    for e in ordered(
        asg.out_edges(&node.id)
            .filter(|e| e.label == EdgeLabel::HasVariable),
    )? {
        let v = asg
            .node(&e.to)
            .expect("frozen graphs have no dangling edges");
        let kind = Kind::from_keyword(req_str(v, "kind")?)
            .ok_or_else(|| malformed(format!("unknown kind on `{}`", v.id)))?;
        let domain = opt_str(v, "domain")
            .map(|d| parse_domain(&d).map_err(|e| malformed(e.to_string())))
            .transpose()?;
        variables.push(VariableDecl {
            name: v.name().to_string(),
            kind,
            domain,
            unit: opt_str(v, "unit"),
            span: Span::default(),
        });
    }
    let mut relations = Vec::new();
    for e in ordered(
        asg.out_edges(&node.id)
            .filter(|e| e.label == EdgeLabel::RelatesTo),
    )? {
        relations.push(Relation {
            target: target_name(asg, e).to_string(),
            name: e
                .prop("name")
                .and_then(Scalar::as_str)
                .ok_or_else(|| malformed(format!("relation `{}` lacks a name", e.id)))?
                .to_string(),
            span: Span::default(),
        });
    }
    Ok(ObjectType {
        name: node.name().to_string(),
        variables,
        relations,
        span: Span::default(),
    })
}

fn single<'a>(
    asg: &'a PropertyGraph,
    from: &str,
    label: EdgeLabel,
) -> Result<Option<&'a Node>, BuildError> {
    let mut it = asg.out_edges(from).filter(|e| e.label == label);
    let first = it.next();
    if it.next().is_some() {
        return Err(malformed(format!("`{from}` has several {label} edges")));
    }
    Ok(first.map(|e| {
        asg.node(&e.to)
            .expect("frozen graphs have no dangling edges")
    }))
}

fn rule(asg: &PropertyGraph, node: &Node) -> Result<Rule, BuildError> {
    let source = asg
        .in_edges(&node.id)
        .find(|e| e.label == EdgeLabel::SourceOf)
        .map(|e| {
            let s = asg
                .node(&e.from)
                .expect("frozen graphs have no dangling edges");
            req_str(s, "uri").map(|uri| SourceRef {
                label: s.name().to_string(),
                uri: uri.to_string(),
            })
        })
        .transpose()?;
    let condition = single(asg, &node.id, EdgeLabel::HasCondition)?
        .map(|c| condition(asg, c))
        .transpose()?;
    let action_node = single(asg, &node.id, EdgeLabel::HasAction)?
        .ok_or_else(|| malformed(format!("rule `{}` has no action", node.id)))?;
    let target = single(asg, &action_node.id, EdgeLabel::Target)?
        .ok_or_else(|| malformed(format!("action `{}` has no target", action_node.id)))?;
    let target = VarRef::new(target.name());
    let action = match req_str(action_node, "kind")? {
        "derivation" => Action::Derivation {
            target,
            value: parse_literal(req_str(action_node, "value")?)
                .map_err(|e| malformed(e.to_string()))?,
        },
        "calculation" => {
            let e = single(asg, &action_node.id, EdgeLabel::Operand)?.ok_or_else(|| {
                malformed(format!("action `{}` has no expression", action_node.id))
            })?;
            Action::Calculation {
                target,
                expr: expr(asg, e)?,
            }
        }
        other => return Err(malformed(format!("unknown action kind `{other}`"))),
    };
    Ok(Rule {
        name: node.name().to_string(),
        source,
        condition,
        action,
        span: Span::default(),
    })
}

fn refers<'a>(asg: &'a PropertyGraph, node: &Node, role: Option<&str>) -> Option<&'a str> {
    asg.out_edges(&node.id)
        .find(|e| {
            e.label == EdgeLabel::RefersTo
                && role.is_none_or(|r| e.prop("role").and_then(Scalar::as_str) == Some(r))
        })
        .map(|e| target_name(asg, e))
}

fn condition(asg: &PropertyGraph, node: &Node) -> Result<Condition, BuildError> {
    if node.label == NodeLabel::Atom {
        let subject = refers(asg, node, Some("subject"))
            .ok_or_else(|| malformed(format!("atom `{}` has no subject", node.id)))?;
        let comparator = Comparator::from_symbol(req_str(node, "comparator")?)
            .ok_or_else(|| malformed(format!("atom `{}` has an unknown comparator", node.id)))?;
        let operand = match opt_str(node, "literal") {
            Some(l) => Operand::Literal(parse_literal(&l).map_err(|e| malformed(e.to_string()))?),
            None => Operand::Variable(VarRef::new(
                refers(asg, node, Some("operand"))
                    .ok_or_else(|| malformed(format!("atom `{}` has no operand", node.id)))?,
            )),
        };
        return Ok(Condition::Atom(Atom::new(subject, comparator, operand)));
    }
    let children = ordered(
        asg.out_edges(&node.id)
            .filter(|e| e.label == EdgeLabel::Contains),
    )?
    .into_iter()
    .map(|e| {
        condition(
            asg,
            asg.node(&e.to)
                .expect("frozen graphs have no dangling edges"),
        )
    })
    .collect::<Result<Vec<_>, _>>()?;
    match req_str(node, "op")? {
        "and" => Ok(Condition::And(children)),
        "or" => Ok(Condition::Or(children)),
        "not" => {
            let [c]: [Condition; 1] = children
                .try_into()
                .map_err(|_| malformed(format!("`{}` must have one child", node.id)))?;
            Ok(Condition::Not(Box::new(c)))
        }
        other => Err(malformed(format!("unknown condition operator `{other}`"))),
    }
}

fn expr(asg: &PropertyGraph, node: &Node) -> Result<Expr, BuildError> {
    let children = ordered(
        asg.out_edges(&node.id)
            .filter(|e| e.label == EdgeLabel::Operand),
    )?
    .into_iter()
    .map(|e| {
        expr(
            asg,
            asg.node(&e.to)
                .expect("frozen graphs have no dangling edges"),
        )
    })
    .collect::<Result<Vec<_>, _>>()?;
    let op = req_str(node, "op")?;
    let mut children = children.into_iter();
    match (op, children.len()) {
        ("literal", 0) => Ok(Expr::Literal(
            parse_literal(req_str(node, "literal")?).map_err(|e| malformed(e.to_string()))?,
        )),
        ("var", 0) => Ok(Expr::Var(VarRef::new(refers(asg, node, None).ok_or_else(
            || malformed(format!("`{}` refers to no variable", node.id)),
        )?))),
        ("neg", 1) => Ok(Expr::Neg(Box::new(
            children.next().expect("length checked"),
        ))),
        (sym, 2) => {
            let op = ArithOp::from_symbol(sym)
                .ok_or_else(|| malformed(format!("unknown operator `{sym}`")))?;
            let lhs = children.next().expect("length checked");
            let rhs = children.next().expect("length checked");
            Ok(Expr::binary(op, lhs, rhs))
        }
        _ => Err(malformed(format!("expression `{}` is malformed", node.id))),
    }
}

fn service(asg: &PropertyGraph, node: &Node) -> Result<Service, BuildError> {
    let mut service = Service {
        name: node.name().to_string(),
        input_messages: Vec::new(),
        output_messages: Vec::new(),
        span: Span::default(),
    };
    for e in ordered(
        asg.out_edges(&node.id)
            .filter(|e| e.label == EdgeLabel::HasMessage),
    )? {
        let m = asg
            .node(&e.to)
            .expect("frozen graphs have no dangling edges");
        let (label, list) = match m.label {
            NodeLabel::InputMessage => (EdgeLabel::Input, &mut service.input_messages),
            NodeLabel::OutputMessage => (EdgeLabel::Output, &mut service.output_messages),
            other => return Err(malformed(format!("service has a {other} message"))),
        };
        let var_edges: Vec<&Edge> = match label {
            EdgeLabel::Input => ordered(asg.out_edges(&m.id).filter(|e| e.label == label))?,
            _ => ordered(asg.in_edges(&m.id).filter(|e| e.label == label))?,
        };
        let variables = var_edges
            .into_iter()
            .map(|e| {
                let v = if label == EdgeLabel::Input {
                    &e.to
                } else {
                    &e.from
                };
                VarRef::new(
                    asg.node(v)
                        .expect("frozen graphs have no dangling edges")
                        .name(),
                )
            })
            .collect();
        list.push(Message {
            name: m.name().to_string(),
            variables,
            span: Span::default(),
        });
    }
    Ok(service)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    #[test]
    fn empty_model_is_a_single_node() {
        let g = build_asg(&DecisionModel::empty("m"));
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.node("model").unwrap().label, NodeLabel::Model);
    }

    #[test]
    fn one_rule_projection() {
        let m = parse_model("model m object A { a: boolean b: boolean } rule r if a then b = true")
            .unwrap();
        let g = build_asg(&m);
        let atom = g.node("rule:r/cond").unwrap();
        assert_eq!(atom.label, NodeLabel::Atom);
        assert!(g.edge("rule:r/cond-REFERS_TO->var:a").is_some());
        assert!(g.edge("rule:r/action-TARGET->var:b").is_some());
        assert_eq!(reconstruct_model(&g).unwrap(), m);
    }

    #[test]
    fn reconstruction_is_lossless() {
        let src = r#"model m "2"
            object B { n: number in [1, 2.5] unit "eur" t: enum in ["x, y", "z"] }
            object A { d: date relates_to B as owner  x: money f: boolean }
            rule r source "Art. 1" "https://example.org/a?x=1"
              if not (f or n >= 2) and d < 2023-01-01 and t != "z"
              then x = -(n * 2) - 3 / (n + 1)
            rule s if n = n then f = false
            service S { in I(n, d) out O(x) out P() }"#;
        let m = parse_model(src).unwrap();
        assert_eq!(reconstruct_model(&build_asg(&m)).unwrap(), m);
    }
}
