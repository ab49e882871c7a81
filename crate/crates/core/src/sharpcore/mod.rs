//! `#`-logic: syntax, well-formedness, widths and evaluation.

mod ast;
mod eval;
mod repr;
mod text;

pub use ast::{Scope, SharpFormula};
pub(crate) use ast::set_text;
pub use eval::{eval_sentence, evaluate, CountTable, EvalStats, Evaluator};
pub use repr::{check_represents, naive_representation, Counterexample};
pub use text::{parse_sharp, serialize_sharp};
