/// Resource caps shared by every stage. Exceeding one is an error, never a
/// silent truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Disjuncts produced by DNF conversion; also bounds inclusion-exclusion
    /// and sum-lifting fan-out.
    pub max_dnf: usize,
    /// Rows of any intermediate table.
    pub max_rows: u64,
    /// Vertices handed to the exact treewidth solver.
    pub max_vertices: usize,
    /// Non-liberal elements explored by the core search.
    pub max_core: usize,
    /// Assignments the brute-force oracle may enumerate.
    pub max_oracle: u64,
    /// Liberal bijections tried by the counting-equivalence search.
    pub max_bijections: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dnf: 4096,
            max_rows: 10_000_000,
            max_vertices: 24,
            max_core: 12,
            max_oracle: 100_000_000,
            max_bijections: 1_000_000,
        }
    }
}
