//! openCypher scripts: `CREATE` per node, `MATCH ... CREATE` per edge.
//!
//! Element ids are stored in the `id` property, so `id` is reserved as a
//! property key.

use std::iter::Peekable;
use std::str::CharIndices;

use thiserror::Error;

use crate::graph::{
    Edge, EdgeLabel, GraphBuilder, Node, NodeLabel, Properties, PropertyGraph, Scalar,
};

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('\'');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\'' => out.push_str("\\'"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

fn key(k: &str) -> String {
    let plain = k
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain {
        k.to_string()
    } else {
        format!("`{}`", k.replace('`', "``"))
    }
}

fn scalar(v: &Scalar) -> String {
    match v {
        Scalar::Bool(b) => b.to_string(),
        Scalar::Int(i) => i.to_string(),
        Scalar::Float(x) => {
            let s = format!("{x:?}");
            if s.contains(['.', 'e', 'E']) {
                s
            } else {
                format!("{s}.0")
            }
        }
        Scalar::Str(s) => string(s),
    }
}

fn map(id: &str, props: &Properties) -> String {
    let mut parts = vec![format!("id: {}", string(id))];
    parts.extend(
        props
            .iter()
            .map(|(k, v)| format!("{}: {}", key(k), scalar(v))),
    );
    format!("{{{}}}", parts.join(", "))
}

/// One statement per line: nodes first, then edges, each in id order.
pub fn export_graph_script(graph: &PropertyGraph) -> String {
    let mut out = String::new();
    for n in graph.nodes() {
        out.push_str(&format!(
            "CREATE (:{} {});\n",
            n.label,
            map(&n.id, &n.properties)
        ));
    }
    for e in graph.edges() {
        out.push_str(&format!(
            "MATCH (a {{id: {}}}), (b {{id: {}}}) CREATE (a)-[:{} {}]->(b);\n",
            string(&e.from),
            string(&e.to),
            e.label,
            map(&e.id, &e.properties)
        ));
    }
    out
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a str,
    chars: Peekable<CharIndices<'a>>,
}

impl<'a> Parser<'a> {
    fn line(&mut self) -> usize {
        let at = self.chars.peek().map_or(self.src.len(), |(i, _)| *i);
        self.src[..at].matches('\n').count() + 1
    }

    fn fail<T>(&mut self, message: impl Into<String>) -> Result<T, ScriptError> {
        Err(ScriptError {
            line: self.line(),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.chars.peek().is_none()
    }

    fn eat(&mut self, want: &str) -> Result<(), ScriptError> {
        self.skip_ws();
        for w in want.chars() {
            match self.chars.next() {
                Some((_, c)) if c == w => {}
                _ => return self.fail(format!("expected `{want}`")),
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<String, ScriptError> {
        self.skip_ws();
        if self.chars.next_if(|(_, c)| *c == '`').is_some() {
            let mut out = String::new();
            loop {
                match self.chars.next() {
                    Some((_, '`')) => {
                        if self.chars.next_if(|(_, c)| *c == '`').is_some() {
                            out.push('`');
                        } else {
                            return Ok(out);
                        }
                    }
                    Some((_, c)) => out.push(c),
                    None => return self.fail("unterminated quoted name"),
                }
            }
        }
        let mut out = String::new();
        while let Some((_, c)) = self
            .chars
            .next_if(|(_, c)| c.is_ascii_alphanumeric() || *c == '_')
        {
            out.push(c);
        }
        if out.is_empty() {
            return self.fail("expected a name");
        }
        Ok(out)
    }

    fn string(&mut self) -> Result<String, ScriptError> {
        self.eat("'")?;
        let mut out = String::new();
        loop {
            match self.chars.next() {
                Some((_, '\'')) => return Ok(out),
                Some((_, '\\')) => match self.chars.next() {
                    Some((_, '\\')) => out.push('\\'),
                    Some((_, '\'')) => out.push('\''),
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 'r')) => out.push('\r'),
                    Some((_, 't')) => out.push('\t'),
                    _ => return self.fail("unknown escape"),
                },
                Some((_, c)) => out.push(c),
                None => return self.fail("unterminated string"),
            }
        }
    }

    fn value(&mut self) -> Result<Scalar, ScriptError> {
        self.skip_ws();
        match self.chars.peek().map(|(_, c)| *c) {
            Some('\'') => Ok(Scalar::Str(self.string()?)),
            Some(c) if c == '-' || c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some((_, c)) = self
                    .chars
                    .next_if(|(_, c)| c.is_ascii_alphanumeric() || matches!(c, '-' | '+' | '.'))
                {
                    text.push(c);
                }
                if text.contains(['.', 'e', 'E']) {
                    match text.parse::<f64>() {
                        Ok(x) => Ok(Scalar::Float(x)),
                        Err(_) => self.fail(format!("bad number `{text}`")),
                    }
                } else {
                    match text.parse::<i64>() {
                        Ok(i) => Ok(Scalar::Int(i)),
                        Err(_) => self.fail(format!("bad integer `{text}`")),
                    }
                }
            }
            _ => match self.ident()?.as_str() {
                "true" => Ok(Scalar::Bool(true)),
                "false" => Ok(Scalar::Bool(false)),
                other => self.fail(format!("unexpected `{other}`")),
            },
        }
    }

    /// `{id: '...', k: v, ...}`, returning the id and the other properties.
    fn map(&mut self) -> Result<(String, Properties), ScriptError> {
        self.eat("{")?;
        let mut id = None;
        let mut props = Properties::new();
        self.skip_ws();
        if self.chars.next_if(|(_, c)| *c == '}').is_some() {
            return self.fail("missing `id`");
        }
        loop {
            let k = self.ident()?;
            self.eat(":")?;
            let v = self.value()?;
            if k == "id" {
                match v {
                    Scalar::Str(s) => id = Some(s),
                    _ => return self.fail("`id` must be a string"),
                }
            } else if props.insert(k.clone(), v).is_some() {
                return self.fail(format!("duplicate property `{k}`"));
            }
            self.skip_ws();
            match self.chars.next() {
                Some((_, ',')) => continue,
                Some((_, '}')) => break,
                _ => return self.fail("expected `,` or `}`"),
            }
        }
        match id {
            Some(id) => Ok((id, props)),
            None => self.fail("missing `id`"),
        }
    }

    fn match_id(&mut self, var: &str) -> Result<String, ScriptError> {
        self.eat("(")?;
        self.eat(var)?;
        self.eat("{")?;
        self.eat("id")?;
        self.eat(":")?;
        let id = self.string()?;
        self.eat("}")?;
        self.eat(")")?;
        Ok(id)
    }

    fn statement(&mut self, b: &mut GraphBuilder) -> Result<(), ScriptError> {
        let line = self.line();
        let wrap = |r: Result<&mut GraphBuilder, crate::graph::GraphError>| {
            r.map(|_| ()).map_err(|e| ScriptError {
                line,
                message: e.to_string(),
            })
        };
        match self.ident()?.as_str() {
            "CREATE" => {
                self.eat("(")?;
                self.eat(":")?;
                let label = self.ident()?;
                let Some(label) = NodeLabel::parse(&label) else {
                    return self.fail(format!("unknown node label `{label}`"));
                };
                let (id, properties) = self.map()?;
                self.eat(")")?;
                self.eat(";")?;
                wrap(b.add_node(Node {
                    id,
                    label,
                    properties,
                }))
            }
            "MATCH" => {
                let from = self.match_id("a")?;
                self.eat(",")?;
                let to = self.match_id("b")?;
                self.eat("CREATE")?;
                self.eat("(a)-[:")?;
                let label = self.ident()?;
                let Some(label) = EdgeLabel::parse(&label) else {
                    return self.fail(format!("unknown edge label `{label}`"));
                };
                let (id, properties) = self.map()?;
                self.eat("]->(b)")?;
                self.eat(";")?;
                wrap(b.add_edge(Edge {
                    id,
                    from,
                    to,
                    label,
                    properties,
                }))
            }
            other => self.fail(format!("expected CREATE or MATCH, found `{other}`")),
        }
    }
}

/// Reads a script produced by [`export_graph_script`] back into a graph.
pub fn parse_script(src: &str) -> Result<PropertyGraph, ScriptError> {
    let mut p = Parser {
        src,
        chars: src.char_indices().peekable(),
    };
    let mut b = GraphBuilder::new();
    while !p.at_end() {
        p.statement(&mut b)?;
    }
    b.build().map_err(|e| ScriptError {
        line: src.lines().count(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_graph_gives_an_empty_script() {
        assert_eq!(export_graph_script(&PropertyGraph::empty()), "");
        assert_eq!(parse_script("").unwrap(), PropertyGraph::empty());
    }

    #[test]
    fn statements_and_round_trip() {
        let mut b = GraphBuilder::new();
        b.node(
            "var:x",
            NodeLabel::Variable,
            "it's \\ odd\n",
            [
                ("weird key", Scalar::Float(1e30)),
                ("n", Scalar::Int(-3)),
                ("f", Scalar::Float(2.0)),
            ],
        )
        .unwrap();
        b.node("rule:r", NodeLabel::Rule, "r", []).unwrap();
        b.edge(
            "var:x",
            EdgeLabel::Condition,
            "rule:r",
            [("satisfied", true.into())],
        );
        let g = b.build().unwrap();
        let script = export_graph_script(&g);
        assert_eq!(script.lines().count(), 3);
        assert!(script.ends_with(
            "MATCH (a {id: 'var:x'}), (b {id: 'rule:r'}) CREATE (a)-[:CONDITION {id: 'var:x-CONDITION->rule:r', satisfied: true}]->(b);\n"
        ));
        assert!(script.contains("`weird key`: 1e30"));
        assert_eq!(parse_script(&script).unwrap(), g);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_script("CREATE (:Variable {id: 'a', name: 'a'});\nCREATE (:Nope {id: 'b'});")
            .unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_script(
            "MATCH (a {id: 'x'}), (b {id: 'y'}) CREATE (a)-[:DERIVES {id: 'e'}]->(b);",
        )
        .unwrap_err();
        assert!(e.message.contains("x"), "{e}");
    }
}
