//! Command line and HTTP front end: a file-directory workspace of models and
//! instances, the `/v1` API over it, and the `explaineo` commands.

pub mod cli;
pub mod http;
pub mod service;
pub mod workspace;
