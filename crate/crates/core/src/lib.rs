//! Question-driven explanations for rule-based decision models.
//!
//! The crate covers the whole pipeline: a decision-model language
//! ([`model`]), a forward-chaining engine with derivation traces
//! ([`engine`]), a labelled property graph ([`graph`]) and the projections of
//! models and decisions onto it ([`builder`]), model verification checks
//! ([`verify`]), the explanation question catalogue ([`explain`]) and
//! renderers for text, tables, DOT and openCypher ([`render`]).

pub mod builder;
pub mod engine;
pub mod explain;
pub mod graph;
pub mod ids;
pub mod model;
pub mod render;
pub mod verify;
