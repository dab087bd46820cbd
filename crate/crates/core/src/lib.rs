//! Compiler toolchain for SCC (sense/compute/control) architecture
//! descriptions with interaction contracts.
//!
//! The crate is organized as a pipeline over one immutable [`model::Architecture`]:
//!
//! - [`parser`] turns `.adl` text into the model and pretty-prints it back;
//! - [`check`] decides consistency, determinacy and typing;
//! - [`denote`] computes the abstract method signature each contract imposes;
//! - [`manifest`] derives the framework manifest of implementation
//!   obligations, renders stub skeletons and diffs manifests across
//!   regenerations;
//! - [`sim`] executes architectures with queued-sequential components,
//!   per-source synchronization queues and guarded callbacks;
//! - [`verify`] answers data reachability queries, checks response and
//!   absence invariants with a built-in explicit-state search, and emits a
//!   Promela model for external checking.

pub mod check;
pub mod denote;
pub mod fixtures;
pub mod manifest;
pub mod model;
pub mod parser;
pub mod sim;
pub mod testgen;
pub mod verify;

pub use model::Architecture;
pub use parser::{format, parse, parse_str, Diagnostic, SourceText};
