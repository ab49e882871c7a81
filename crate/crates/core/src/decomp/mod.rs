//! Tree decompositions, exact treewidth and quantifier-aware width.

mod qaw;
mod td;
mod treewidth;

pub(crate) use qaw::quantified_first;
pub use qaw::{compute_qaw, is_quantifier_aware, normalize_components, qaw_bounds, QaViolation, Qaw, QawBounds};
pub use td::{make_nice, make_nice_with, reroot, NiceTreeDecomposition, NodeKind, TreeDecomposition};
pub use treewidth::{decomposition_from_order, elimination_width, exact_treewidth, optimal_elimination_order};
