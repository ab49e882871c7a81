//! Counting answers to existential positive queries.
//!
//! A query is compiled into a `#`-logic sentence whose value on a finite
//! structure is the number of answers. The pipeline flattens arbitrary
//! sentences into linear combinations of primitive-positive terms, shrinks
//! every term to its core and lays it out along a quantifier-aware tree
//! decomposition of minimum width.

pub mod compile;
pub mod decomp;
pub mod epquery;
pub mod equiv;
mod error;
mod fresh;
mod limits;
pub mod relstore;
pub mod sample;
pub mod sharpcore;
mod syntax;

pub use error::{Error, Result};
pub use fresh::Fresh;
pub use limits::Limits;

/// Variable names are plain identifiers.
pub type Var = String;

/// Variable sets are kept sorted so every traversal is deterministic.
pub type VarSet = std::collections::BTreeSet<Var>;
