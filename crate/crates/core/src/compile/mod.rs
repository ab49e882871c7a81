//! Compilation of ep-queries into `#`-sentences of minimum width.

mod flat;
mod lc;
mod minimize;
mod pp;

pub use flat::{cast_ep, flatten, normalize_constant, ConstantPart, FlatSharp, FlatTerm};
pub use lc::{canonical_lc, lc_evaluate, term_pair, term_with_decomposition, Engine, LcTerm, LinearCombination};
pub use minimize::{decomposition_representation, minimize_ep, reduce_to_basic, report, MinimizedEp, Report};
pub use pp::{
    basic_sharp_to_pp, basic_with_decomposition, minimize_pp, pp_to_basic_sharp, query_pair, rewrite_width_bounded, MinimizedPp,
};
