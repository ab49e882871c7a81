//! Graphs derived from pp-formulas.

use std::collections::{BTreeSet, HashMap};

use super::PpPair;
use crate::{Var, VarSet};

/// A simple undirected graph over named vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    names: Vec<Var>,
    index: HashMap<Var, usize>,
    adj: Vec<BTreeSet<usize>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.adj.push(BTreeSet::new());
        self.index.insert(name.to_string(), self.names.len() - 1);
        self.names.len() - 1
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn add_named_edge(&mut self, a: &str, b: &str) {
        let (a, b) = (self.add_vertex(a), self.add_vertex(b));
        self.add_edge(a, b);
    }

    pub fn make_clique(&mut self, vs: &[usize]) {
        for (i, &a) in vs.iter().enumerate() {
            for &b in &vs[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[Var] {
        &self.names
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|a| self.adj[a].iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Subgraph on `keep`, in that order.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let mut g = Graph::new();
        for &v in keep {
            g.add_vertex(&self.names[v]);
        }
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate() {
                if i < j && self.has_edge(a, b) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Connected components, each sorted, ordered by least vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                i += 1;
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Vertices are the pair's elements; variables sharing an atom are adjacent.
pub fn primal_graph(p: &PpPair) -> Graph {
    let a = &p.structure;
    let mut g = Graph::new();
    for e in a.elements() {
        g.add_vertex(e);
    }
    for (_, tuples) in a.relations() {
        for t in tuples {
            for (i, &x) in t.iter().enumerate() {
                for &y in &t[i + 1..] {
                    g.add_edge(x, y);
                }
            }
        }
    }
    g
}

/// Connected components of the primal graph as pairs; components without
/// liberal variables are kept.
pub fn components(p: &PpPair) -> Vec<PpPair> {
    primal_graph(p)
        .components()
        .into_iter()
        .map(|comp| {
            let structure = p.structure.induced(&comp);
            let liberal = comp
                .iter()
                .map(|&e| p.structure.name(e).to_string())
                .filter(|v| p.liberal.contains(v))
                .collect();
            PpPair { structure, liberal }
        })
        .collect()
}

/// A component of the quantified part together with its liberal neighbours.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExistsComponent {
    pub quantified: VarSet,
    pub liberal: VarSet,
}

impl ExistsComponent {
    pub fn vars(&self) -> VarSet {
        self.quantified.union(&self.liberal).cloned().collect()
    }
}

pub fn exists_components(p: &PpPair) -> Vec<ExistsComponent> {
    let g = primal_graph(p);
    let quantified = p.quantified_indices();
    let inner = g.induced(&quantified);
    inner
        .components()
        .into_iter()
        .map(|comp| {
            let members: Vec<usize> = comp.iter().map(|&i| quantified[i]).collect();
            let mut liberal = VarSet::new();
            for &m in &members {
                for &n in g.neighbors(m) {
                    if p.is_liberal(n) {
                        liberal.insert(g.name(n).to_string());
                    }
                }
            }
            ExistsComponent {
                quantified: members.iter().map(|&m| g.name(m).to_string()).collect(),
                liberal,
            }
        })
        .collect()
}

/// Primal graph on the liberal variables, plus a clique on the liberal
/// neighbourhood of every existential component.
pub fn contract_graph(p: &PpPair) -> Graph {
    let full = primal_graph(p);
    let libs = p.liberal_indices();
    let mut g = full.induced(&libs);
    for c in exists_components(p) {
        let vs: Vec<usize> = c.liberal.iter().map(|v| g.vertex(v).expect("liberal")).collect();
        g.make_clique(&vs);
    }
    g
}

/// Drops connected components that contain no liberal variable. Each such
/// component only contributes a 0/1 factor to the count.
pub fn strip_nonliberal_components(p: &PpPair) -> PpPair {
    let g = primal_graph(p);
    let keep: Vec<usize> = g
        .components()
        .into_iter()
        .filter(|c| c.iter().any(|&e| p.is_liberal(e)))
        .flatten()
        .collect();
    let mut keep = keep;
    keep.sort_unstable();
    PpPair {
        structure: p.structure.induced(&keep),
        liberal: p.liberal.clone(),
    }
}
