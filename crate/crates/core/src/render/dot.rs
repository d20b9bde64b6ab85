use crate::graph::{Edge, Node, NodeLabel, PropertyGraph, Scalar};

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => {}
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn shape(label: NodeLabel) -> &'static str {
    match label {
        NodeLabel::Variable => "ellipse",
        NodeLabel::Rule => "box",
        NodeLabel::InputMessage | NodeLabel::OutputMessage => "parallelogram",
        NodeLabel::Source => "note",
        NodeLabel::ObjectType => "tab",
        NodeLabel::Service => "component",
        NodeLabel::Model => "folder",
        NodeLabel::Condition => "diamond",
        NodeLabel::Atom => "hexagon",
        NodeLabel::Action => "cds",
        NodeLabel::Expression => "circle",
    }
}

fn flag(props: &crate::graph::Properties, key: &str) -> Option<bool> {
    props.get(key).and_then(Scalar::as_bool)
}

/// Rules that did not fire and unset variables are dimmed.
fn node_attrs(node: &Node) -> Vec<String> {
    let mut text = node.name().to_string();
    if let Some(v) = node.prop("value") {
        text.push_str(&format!("\n= {v}"));
    }
    let mut attrs = vec![
        format!("label={}", quote(&text)),
        format!("shape={}", shape(node.label)),
    ];
    let dimmed = flag(&node.properties, "fired") == Some(false)
        || node.prop("origin").and_then(Scalar::as_str) == Some("unset");
    let mut style = Vec::new();
    if dimmed {
        style.push("dashed");
        attrs.push("color=gray".into());
        attrs.push("fontcolor=gray".into());
    }
    if flag(&node.properties, "highlight") == Some(true) {
        style.push("bold");
        style.push("filled");
        attrs.push("fillcolor=\"#ffe08a\"".into());
        attrs.push("penwidth=3".into());
    }
    if !style.is_empty() {
        attrs.push(format!("style={}", quote(&style.join(","))));
    }
    attrs
}

fn edge_attrs(edge: &Edge) -> Vec<String> {
    let mut attrs = vec![format!("label={}", quote(edge.label.as_str()))];
    let dimmed = flag(&edge.properties, "active") == Some(false)
        || flag(&edge.properties, "satisfied") == Some(false);
    if dimmed {
        attrs.push("style=dashed".into());
        attrs.push("color=gray".into());
    } else if flag(&edge.properties, "satisfied") == Some(true)
        || flag(&edge.properties, "active") == Some(true)
    {
        attrs.push("style=bold".into());
    }
    if flag(&edge.properties, "highlight") == Some(true) {
        attrs.push("penwidth=3".into());
    }
    attrs
}

/// A DOT digraph with one statement per node and per edge, ordered by id.
pub fn render_dot(graph: &PropertyGraph) -> String {
    let mut out = String::from("digraph explanation {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\", fontsize=10];\n");
    for node in graph.nodes() {
        out.push_str(&format!(
            "  {} [{}];\n",
            quote(&node.id),
            node_attrs(node).join(", ")
        ));
    }
    for edge in graph.edges() {
        out.push_str(&format!(
            "  {} -> {} [{}];\n",
            quote(&edge.from),
            quote(&edge.to),
            edge_attrs(edge).join(", ")
        ));
    }
    out.push_str("}\n");
    out
}
