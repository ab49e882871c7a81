//! Exact treewidth by branch and bound over elimination orders.

use std::collections::HashMap;

use super::TreeDecomposition;
use crate::epquery::Graph;
use crate::{Error, Limits, Result, VarSet};

type Mask = u64;

fn bits(mut m: Mask) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

fn degree(adj: &[Mask], alive: Mask, v: usize) -> usize {
    (adj[v] & alive).count_ones() as usize
}

/// Eliminates `v`: its live neighbourhood becomes a clique.
fn eliminate(adj: &mut [Mask], alive: Mask, v: usize) {
    let n = adj[v] & alive & !(1 << v);
    for u in bits(n) {
        adj[u] |= n & !(1 << u);
    }
}

fn is_clique(adj: &[Mask], set: Mask) -> bool {
    bits(set).all(|u| adj[u] & set == set & !(1 << u))
}

/// A vertex whose elimination is safe at the given lower bound.
fn safe_vertex(adj: &[Mask], alive: Mask, low: usize) -> Option<usize> {
    for v in bits(alive) {
        let n = adj[v] & alive;
        if is_clique(adj, n) {
            return Some(v);
        }
        if n.count_ones() as usize <= low && bits(n).any(|w| is_clique(adj, n & !(1 << w))) {
            return Some(v);
        }
    }
    None
}

fn fill_in(adj: &[Mask], alive: Mask, v: usize) -> usize {
    let n = adj[v] & alive;
    let mut missing = 0;
    for u in bits(n) {
        missing += (n & !adj[u] & !(1 << u)).count_ones() as usize;
    }
    missing / 2
}

/// Width and order of the greedy min-fill elimination.
fn min_fill(adj: &[Mask], mut alive: Mask) -> (usize, Vec<usize>) {
    let mut adj = adj.to_vec();
    let mut width = 0;
    let mut order = Vec::new();
    while alive != 0 {
        let v = bits(alive)
            .min_by_key(|&v| (fill_in(&adj, alive, v), degree(&adj, alive, v), v))
            .expect("alive is nonempty");
        width = width.max(degree(&adj, alive, v));
        eliminate(&mut adj, alive, v);
        alive &= !(1 << v);
        order.push(v);
    }
    (width, order)
}

/// Minor-min-width: contract a min-degree vertex into its min-degree neighbour.
fn minor_min_width(adj: &[Mask], mut alive: Mask) -> usize {
    let mut adj = adj.to_vec();
    let mut low = 0;
    while alive.count_ones() > 1 {
        let v = bits(alive).min_by_key(|&v| degree(&adj, alive, v)).expect("nonempty");
        let d = degree(&adj, alive, v);
        low = low.max(d);
        let n = adj[v] & alive;
        if n == 0 {
            alive &= !(1 << v);
            continue;
        }
        let u = bits(n).min_by_key(|&u| degree(&adj, alive, u)).expect("nonempty");
        let merged = (adj[u] | n) & !(1 << u) & !(1 << v);
        adj[u] = merged;
        for w in bits(merged) {
            adj[w] |= 1 << u;
        }
        alive &= !(1 << v);
    }
    low
}

struct Search {
    best: usize,
    best_order: Vec<usize>,
    memo: HashMap<Mask, usize>,
}

impl Search {
    fn dfs(&mut self, adj: &[Mask], alive: Mask, cur: usize, order: &mut Vec<usize>) {
        let left = alive.count_ones() as usize;
        if left <= cur + 1 {
            if cur < self.best {
                self.best = cur;
                self.best_order = order.iter().copied().chain(bits(alive)).collect();
            }
            return;
        }
        if cur.max(minor_min_width(adj, alive)) >= self.best {
            return;
        }
        match self.memo.get(&alive) {
            Some(&seen) if seen <= cur => return,
            _ => {
                self.memo.insert(alive, cur);
            }
        }
        let candidates: Vec<usize> = match safe_vertex(adj, alive, cur) {
            Some(v) => vec![v],
            None => {
                let mut vs: Vec<usize> = bits(alive).collect();
                vs.sort_by_key(|&v| (fill_in(adj, alive, v), degree(adj, alive, v)));
                vs
            }
        };
        for v in candidates {
            let next = cur.max(degree(adj, alive, v));
            if next >= self.best {
                continue;
            }
            let mut child = adj.to_vec();
            eliminate(&mut child, alive, v);
            order.push(v);
            self.dfs(&child, alive & !(1 << v), next, order);
            order.pop();
        }
    }
}

fn component_masks(adj: &[Mask], alive: Mask) -> Vec<Mask> {
    let mut rest = alive;
    let mut out = Vec::new();
    while rest != 0 {
        let start = rest.trailing_zeros() as usize;
        let mut comp: Mask = 1 << start;
        let mut frontier = comp;
        while frontier != 0 {
            let mut next = 0;
            for v in bits(frontier) {
                next |= adj[v] & alive;
            }
            frontier = next & !comp;
            comp |= next;
        }
        out.push(comp);
        rest &= !comp;
    }
    out
}

/// An elimination order of minimum width, together with that width.
pub fn optimal_elimination_order(g: &Graph, limits: &Limits) -> Result<(usize, Vec<usize>)> {
    let n = g.len();
    let cap = limits.max_vertices.min(64);
    if n > cap {
        return Err(Error::cap("treewidth vertices", n.to_string(), cap as u64));
    }
    let mut adj: Vec<Mask> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0, |m, &u| m | 1 << u))
        .collect();
    let mut alive: Mask = if n == 64 { !0 } else { (1 << n) - 1 };
    let mut order = Vec::with_capacity(n);
    let mut low = 0;
    while let Some(v) = safe_vertex(&adj, alive, low) {
        low = low.max(degree(&adj, alive, v));
        eliminate(&mut adj, alive, v);
        alive &= !(1 << v);
        order.push(v);
    }
    let mut width = low;
    for comp in component_masks(&adj, alive) {
        let (ub, greedy) = min_fill(&adj, comp);
        let mut search = Search {
            best: ub,
            best_order: greedy,
            memo: HashMap::new(),
        };
        if ub > width {
            search.dfs(&adj, comp, width, &mut Vec::new());
        }
        width = width.max(search.best);
        order.extend(search.best_order);
    }
    Ok((width, order))
}

/// Width of eliminating `order` on `g`.
pub fn elimination_width(g: &Graph, order: &[usize]) -> usize {
    let mut adj: Vec<Vec<bool>> = (0..g.len())
        .map(|v| (0..g.len()).map(|u| g.has_edge(v, u)).collect())
        .collect();
    let mut gone = vec![false; g.len()];
    let mut width = 0;
    for &v in order {
        let n: Vec<usize> = (0..g.len()).filter(|&u| !gone[u] && adj[v][u]).collect();
        width = width.max(n.len());
        for &a in &n {
            for &b in &n {
                if a != b {
                    adj[a][b] = true;
                }
            }
        }
        gone[v] = true;
    }
    width
}

/// The decomposition induced by an elimination order. Bags are a vertex
/// plus its later neighbours; separate trees hang under an empty root.
pub fn decomposition_from_order(g: &Graph, order: &[usize]) -> TreeDecomposition {
    let n = g.len();
    if n == 0 {
        return TreeDecomposition::single(VarSet::new());
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut adj: Vec<std::collections::BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut later = vec![Vec::new(); n];
    for &v in order {
        let up: Vec<usize> = adj[v].iter().copied().filter(|&u| pos[u] > pos[v]).collect();
        for &a in &up {
            for &b in &up {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        later[v] = up;
    }
    let mut td = TreeDecomposition {
        bags: Vec::with_capacity(n + 1),
        parent: Vec::with_capacity(n + 1),
    };
    for &v in order {
        let bag = std::iter::once(v)
            .chain(later[v].iter().copied())
            .map(|u| g.name(u).to_string())
            .collect();
        td.bags.push(bag);
        td.parent.push(None);
    }
    let mut roots = Vec::new();
    for (i, &v) in order.iter().enumerate() {
        match later[v].iter().min_by_key(|&&u| pos[u]) {
            Some(&u) => td.parent[i] = Some(pos[u]),
            None => roots.push(i),
        }
    }
    if roots.len() > 1 {
        let top = td.add_node(VarSet::new(), None);
        for r in roots {
            td.parent[r] = Some(top);
        }
    }
    td
}

/// Treewidth together with a decomposition of that width.
pub fn exact_treewidth(g: &Graph, limits: &Limits) -> Result<(usize, TreeDecomposition)> {
    let (width, order) = optimal_elimination_order(g, limits)?;
    Ok((width, decomposition_from_order(g, &order)))
}
