use std::collections::BTreeMap;

use super::td::{make_nice_with, NiceTreeDecomposition, TreeDecomposition};
use super::treewidth::exact_treewidth;
use crate::epquery::{contract_graph, exists_components, primal_graph, ExistsComponent, Graph, PpPair};
use crate::{Error, Limits, Result, Var, VarSet};

/// A liberal `liberal` of `component` whose top is not above the top of
/// the quantified `quantified`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaViolation {
    pub quantified: Var,
    pub liberal: Var,
    pub component: ExistsComponent,
}

/// `Ok(None)` when `td` is quantifier-aware for `p`.
pub fn is_quantifier_aware(p: &PpPair, td: &TreeDecomposition) -> Result<Option<QaViolation>> {
    td.validate(&primal_graph(p))?;
    for c in exists_components(p) {
        for x in &c.quantified {
            let tx = td.top(x).expect("validated");
            for y in &c.liberal {
                let ty = td.top(y).expect("validated");
                if !td.is_ancestor_or_self(ty, tx) {
                    return Ok(Some(QaViolation {
                        quantified: x.clone(),
                        liberal: y.clone(),
                        component: c,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// A minimum-width quantifier-aware decomposition. `qaw` is its largest
/// bag; `anchors` holds the quantified variable joined to each component's
/// liberal part.
#[derive(Debug, Clone)]
pub struct Qaw {
    pub qaw: usize,
    pub decomposition: NiceTreeDecomposition,
    pub anchors: Vec<(ExistsComponent, Var)>,
}

fn augmented(g: &Graph, anchors: &[(&ExistsComponent, Option<&Var>)]) -> Graph {
    let mut out = g.clone();
    let mut dropped = Vec::new();
    for (c, x) in anchors {
        let libs: Vec<usize> = c.liberal.iter().map(|v| g.vertex(v).expect("vertex")).collect();
        out.make_clique(&libs);
        match x {
            Some(x) => {
                let xi = g.vertex(x).expect("vertex");
                for &l in &libs {
                    out.add_edge(xi, l);
                }
            }
            None => dropped.extend(c.quantified.iter().cloned()),
        }
    }
    let keep: Vec<usize> = (0..g.len()).filter(|&v| !dropped.iter().any(|d| d == g.name(v))).collect();
    out.induced(&keep)
}

pub fn compute_qaw(p: &PpPair, limits: &Limits) -> Result<Qaw> {
    let g = primal_graph(p);
    let comps = exists_components(p);
    let mut anchors = Vec::with_capacity(comps.len());
    for (i, c) in comps.iter().enumerate() {
        let mut best: Option<(usize, &Var)> = None;
        for x in &c.quantified {
            let choice: Vec<(&ExistsComponent, Option<&Var>)> = comps
                .iter()
                .enumerate()
                .map(|(j, d)| (d, (i == j).then_some(x)))
                .collect();
            let (w, _) = exact_treewidth(&augmented(&g, &choice), limits)?;
            if best.is_none_or(|(bw, _)| w < bw) {
                best = Some((w, x));
            }
        }
        anchors.push((c.clone(), best.expect("components are nonempty").1.clone()));
    }
    let choice: Vec<(&ExistsComponent, Option<&Var>)> = anchors.iter().map(|(c, x)| (c, Some(x))).collect();
    let (width, td) = exact_treewidth(&augmented(&g, &choice), limits)?;
    let normal = normalize_components(p, &td)?;
    let decomposition = make_nice_with(&normal, normal.root(), quantified_first(p));
    let qaw = decomposition.max_bag();
    if !g.is_empty() && qaw != width + 1 {
        return Err(Error::Invariant(format!("normalized width {qaw} differs from {}", width + 1)));
    }
    if let Some(v) = is_quantifier_aware(p, &decomposition.td)? {
        return Err(Error::Invariant(format!(
            "constructed decomposition violates awareness at {} over {}",
            v.liberal, v.quantified
        )));
    }
    Ok(Qaw {
        qaw,
        decomposition,
        anchors,
    })
}

/// Forget order: quantified variables first, then by name.
pub(crate) fn quantified_first(p: &PpPair) -> impl Fn(&str, &str) -> std::cmp::Ordering + '_ {
    move |a, b| (p.liberal.contains(a), a).cmp(&(p.liberal.contains(b), b))
}

/// Rebuilds `td` so that quantified variables live only in one subtree per
/// existential component. The outer tree keeps the liberal part of every
/// bag; each component gets a copy of the nodes meeting it, restricted to
/// its variables and hung from the highest node holding its liberal part
/// together with one of its quantified variables. Bags never grow.
pub fn normalize_components(p: &PpPair, td: &TreeDecomposition) -> Result<TreeDecomposition> {
    let mut out = TreeDecomposition {
        bags: td.bags.iter().map(|b| b.intersection(&p.liberal).cloned().collect()).collect(),
        parent: td.parent.clone(),
    };
    for c in exists_components(p) {
        let anchor = (0..td.len())
            .filter(|&t| {
                let bag = &td.bags[t];
                c.liberal.is_subset(bag) && c.quantified.iter().any(|x| bag.contains(x))
            })
            .min_by_key(|&t| (td.depth(t), t))
            .ok_or_else(|| Error::pre("no bag holds a component's liberal part with a quantified variable"))?;
        let vars = c.vars();
        let members: Vec<usize> = (0..td.len())
            .filter(|&t| td.bags[t].iter().any(|v| c.quantified.contains(v)))
            .collect();
        let mut adj: BTreeMap<usize, Vec<usize>> = members.iter().map(|&t| (t, Vec::new())).collect();
        for &t in &members {
            if let Some(q) = td.parent[t].filter(|q| adj.contains_key(q)) {
                adj.get_mut(&t).expect("member").push(q);
                adj.get_mut(&q).expect("member").push(t);
            }
        }
        let mut copy = BTreeMap::new();
        let restrict = |t: usize| -> VarSet { td.bags[t].intersection(&vars).cloned().collect() };
        copy.insert(anchor, out.add_node(restrict(anchor), Some(anchor)));
        let mut queue = vec![anchor];
        while let Some(t) = queue.pop() {
            for &u in &adj[&t] {
                if !copy.contains_key(&u) {
                    copy.insert(u, out.add_node(restrict(u), Some(copy[&t])));
                    queue.push(u);
                }
            }
        }
        if copy.len() != members.len() {
            return Err(Error::pre("bags of a component are not connected"));
        }
    }
    Ok(out)
}

/// `lower <= qaw <= upper` from the treewidths of the primal and contract graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QawBounds {
    pub tw: usize,
    pub tw_contract: usize,
    pub lower: usize,
    pub upper: usize,
}

pub fn qaw_bounds(p: &PpPair, limits: &Limits) -> Result<QawBounds> {
    let (tw, _) = exact_treewidth(&primal_graph(p), limits)?;
    let (tw_contract, _) = exact_treewidth(&contract_graph(p), limits)?;
    Ok(QawBounds {
        tw,
        tw_contract,
        lower: tw.max(tw_contract) + 1,
        upper: tw + tw_contract + 1,
    })
}
