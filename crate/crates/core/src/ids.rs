//! Element identifiers shared by diagnostics, graphs and reports.

pub const MODEL: &str = "model";

pub fn object(name: &str) -> String {
    format!("object:{name}")
}

pub fn var(name: &str) -> String {
    format!("var:{name}")
}

pub fn rule(name: &str) -> String {
    format!("rule:{name}")
}

pub fn service(name: &str) -> String {
    format!("service:{name}")
}

pub fn message(name: &str) -> String {
    format!("msg:{name}")
}

pub fn source(rule: &str) -> String {
    format!("source:{rule}")
}

/// The declared name behind an element id (`var:x` -> `x`).
pub fn name_of(id: &str) -> &str {
    id.split_once(':').map_or(id, |(_, name)| name)
}
