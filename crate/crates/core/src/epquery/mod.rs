//! Existential positive queries: syntax, brute-force counting, DNF and the
//! structure view of pp-formulas.

mod ast;
mod dnf;
mod graph;
mod oracle;
mod pair;
mod parse;

pub use ast::{Atom, EpFormula, LiberalQuery};
pub use dnf::to_dnf_pp;
pub use graph::{
    components, contract_graph, exists_components, primal_graph, strip_nonliberal_components,
    ExistsComponent, Graph,
};
pub use oracle::oracle_count;
pub use pair::{pair_to_pp, pp_to_pair, PpPair};
pub use parse::{parse_formula, parse_query};
pub(crate) use parse::parse_formula_at;
