//! Between pp-formulas and basic `#PP`-sentences.

use crate::decomp::{
    compute_qaw, is_quantifier_aware, make_nice_with, normalize_components, NiceTreeDecomposition, NodeKind,
    TreeDecomposition,
};
use crate::epquery::{exists_components, pp_to_pair, primal_graph, Atom, EpFormula, ExistsComponent, LiberalQuery, PpPair};
use crate::equiv::core_of;
use crate::sharpcore::SharpFormula;
use crate::{Error, Fresh, Limits, Result, Var, VarSet};

fn atoms_of(p: &PpPair) -> Vec<Atom> {
    let a = &p.structure;
    let mut out: Vec<Atom> = a
        .relations()
        .flat_map(|(rel, ts)| {
            ts.iter().map(move |t| Atom {
                rel: rel.to_string(),
                args: t.iter().map(|&e| a.name(e).to_string()).collect(),
            })
        })
        .collect();
    out.sort();
    out
}

/// A nested pp-formula equivalent to `p` in which every quantified variable
/// is bound at the top of its bags. Every subformula's free variables lie
/// in one bag when the root bag holds all liberal variables.
pub fn rewrite_width_bounded(p: &PpPair, td: &TreeDecomposition) -> Result<EpFormula> {
    td.validate(&primal_graph(p))?;
    let children = td.children();
    let mut at: Vec<Vec<Atom>> = vec![Vec::new(); td.len()];
    for atom in atoms_of(p) {
        let vars = atom.vars();
        let t = (0..td.len())
            .filter(|&t| vars.is_subset(&td.bags[t]))
            .min_by_key(|&t| (td.depth(t), t))
            .expect("validated decomposition covers every atom");
        at[t].push(atom);
    }
    let mut bound: Vec<Vec<Var>> = vec![Vec::new(); td.len()];
    for v in p.quantified() {
        bound[td.top(&v).expect("validated")].push(v);
    }
    fn build(t: usize, children: &[Vec<usize>], at: &[Vec<Atom>], bound: &[Vec<Var>]) -> EpFormula {
        let mut parts: Vec<EpFormula> = at[t].iter().cloned().map(EpFormula::Atom).collect();
        for &c in &children[t] {
            match build(c, children, at, bound) {
                EpFormula::Top => {}
                f => parts.push(f),
            }
        }
        let body = EpFormula::conj(parts);
        if body == EpFormula::Top {
            return body;
        }
        let used: Vec<Var> = bound[t].iter().filter(|v| body.free_vars().contains(*v)).cloned().collect();
        EpFormula::exists_all(&used, body)
    }
    Ok(build(td.root(), &children, &at, &bound))
}

fn restrict(td: &TreeDecomposition, keep: &VarSet) -> TreeDecomposition {
    TreeDecomposition {
        bags: td.bags.iter().map(|b| b.intersection(keep).cloned().collect()).collect(),
        parent: td.parent.clone(),
    }
}

fn subtree(nice: &NiceTreeDecomposition, children: &[Vec<usize>], top: usize) -> TreeDecomposition {
    let mut out = TreeDecomposition {
        bags: Vec::new(),
        parent: Vec::new(),
    };
    let mut stack = vec![(top, None)];
    while let Some((t, parent)) = stack.pop() {
        let id = out.add_node(nice.td.bags[t].clone(), parent);
        for &c in &children[t] {
            stack.push((c, Some(id)));
        }
    }
    out
}

struct Builder<'a> {
    p: &'a PpPair,
    nice: &'a NiceTreeDecomposition,
    children: Vec<Vec<usize>>,
    free_atoms: Vec<Atom>,
    components: Vec<ExistsComponent>,
}

impl Builder<'_> {
    fn casts_within(&self, bag: &VarSet, must: Option<&str>) -> Vec<EpFormula> {
        self.free_atoms
            .iter()
            .filter(|a| !a.args.is_empty() && a.vars().is_subset(bag) && must.is_none_or(|v| a.args.iter().any(|x| x == v)))
            .cloned()
            .map(EpFormula::Atom)
            .collect()
    }

    fn build(&self, t: usize) -> Result<SharpFormula> {
        let bag = &self.nice.td.bags[t];
        let kids = &self.children[t];
        Ok(match &self.nice.kinds[t] {
            NodeKind::Leaf => {
                let atoms = self.casts_within(bag, None);
                SharpFormula::cast(EpFormula::conj(atoms), bag.clone())
            }
            NodeKind::Introduce(v) => {
                let below = SharpFormula::expand(std::iter::once(v.clone()).collect(), self.build(kids[0])?);
                let atoms = self.casts_within(bag, Some(v));
                if atoms.is_empty() {
                    below
                } else {
                    SharpFormula::times(SharpFormula::cast(EpFormula::conj(atoms), bag.clone()), below)
                }
            }
            NodeKind::Forget(v) if self.p.liberal.contains(v) => {
                SharpFormula::project(std::iter::once(v.clone()).collect(), self.build(kids[0])?)
            }
            NodeKind::Forget(v) => {
                let c = self
                    .components
                    .iter()
                    .find(|c| c.quantified.contains(v))
                    .expect("quantified variables lie in components");
                let vars = c.vars();
                let keep: Vec<usize> = (0..self.p.structure.len())
                    .filter(|&e| vars.contains(self.p.structure.name(e)))
                    .collect();
                let part = PpPair {
                    structure: self.p.structure.induced(&keep),
                    liberal: c.liberal.clone(),
                };
                let copy = subtree(self.nice, &self.children, kids[0]);
                SharpFormula::cast(rewrite_width_bounded(&part, &copy)?, bag.clone())
            }
            NodeKind::Join => SharpFormula::times(self.build(kids[0])?, self.build(kids[1])?),
        })
    }
}

/// A basic `#PP`-sentence representing `p`, built node by node from a
/// quantifier-aware decomposition. Its width is at most the largest bag.
/// Liberal variables in no atom are summed in an outer projection.
pub fn pp_to_basic_sharp(p: &PpPair, qatd: &NiceTreeDecomposition) -> Result<SharpFormula> {
    if let Some(v) = is_quantifier_aware(p, &qatd.td)? {
        return Err(Error::pre(format!(
            "decomposition is not quantifier-aware: {} is not above {}",
            v.liberal, v.quantified
        )));
    }
    let a = &p.structure;
    let mut used = vec![false; a.len()];
    let mut nullary = Vec::new();
    for (rel, tuples) in a.relations() {
        for t in tuples {
            if t.is_empty() {
                nullary.push(EpFormula::Atom(Atom {
                    rel: rel.to_string(),
                    args: Vec::new(),
                }));
            }
            for &e in t {
                used[e] = true;
            }
        }
    }
    let isolated: VarSet = p
        .liberal_indices()
        .into_iter()
        .filter(|&e| !used[e])
        .map(|e| a.name(e).to_string())
        .collect();
    let keep_idx: Vec<usize> = (0..a.len()).filter(|&e| !isolated.contains(a.name(e))).collect();
    let inner = PpPair {
        structure: a.induced(&keep_idx),
        liberal: p.liberal.difference(&isolated).cloned().collect(),
    };
    let keep: VarSet = inner.structure.elements().iter().cloned().collect();
    let td = restrict(&qatd.td, &keep);
    let normal = normalize_components(&inner, &td)?;
    let nice = make_nice_with(&normal, normal.root(), crate::decomp::quantified_first(&inner));
    let free_atoms: Vec<Atom> = atoms_of(&inner)
        .into_iter()
        .filter(|at| at.args.iter().all(|v| inner.liberal.contains(v)))
        .collect();
    let builder = Builder {
        p: &inner,
        nice: &nice,
        children: nice.td.children(),
        free_atoms,
        components: exists_components(&inner),
    };
    let mut out = builder.build(nice.root())?;
    if !nullary.is_empty() {
        out = SharpFormula::times(SharpFormula::cast(EpFormula::conj(nullary), VarSet::new()), out);
    }
    if !isolated.is_empty() {
        out = SharpFormula::project(isolated, out);
    }
    Ok(out)
}

/// Renames variables bound inside casts so that no two binders share a
/// name and none clashes with a name in `avoid`.
pub(crate) fn rename_casts_apart(f: &SharpFormula, avoid: &mut VarSet, fresh: &mut Fresh) -> SharpFormula {
    match f {
        SharpFormula::Cast(ep, l) => {
            let mut scope = avoid.clone();
            scope.extend(l.iter().cloned());
            let renamed = ep.rename_apart(&scope, fresh);
            avoid.extend(renamed.bound_vars());
            SharpFormula::Cast(renamed, l.clone())
        }
        SharpFormula::Project(v, b) => SharpFormula::project(v.clone(), rename_casts_apart(b, avoid, fresh)),
        SharpFormula::Expand(v, b) => SharpFormula::expand(v.clone(), rename_casts_apart(b, avoid, fresh)),
        SharpFormula::Times(l, r) => {
            let l = rename_casts_apart(l, avoid, fresh);
            SharpFormula::times(l, rename_casts_apart(r, avoid, fresh))
        }
        SharpFormula::Plus(l, r) => {
            let l = rename_casts_apart(l, avoid, fresh);
            SharpFormula::plus(l, rename_casts_apart(r, avoid, fresh))
        }
        SharpFormula::Const(_) => f.clone(),
    }
}

fn sharp_vars(f: &SharpFormula) -> VarSet {
    let mut out = VarSet::new();
    f.walk(&mut |g| match g {
        SharpFormula::Cast(_, l) => out.extend(l.iter().cloned()),
        SharpFormula::Project(v, _) | SharpFormula::Expand(v, _) => out.extend(v.iter().cloned()),
        _ => {}
    });
    out
}

fn all_names(f: &SharpFormula) -> VarSet {
    let mut out = sharp_vars(f);
    f.walk(&mut |g| {
        if let SharpFormula::Cast(ep, _) = g {
            out.extend(ep.all_vars());
        }
    });
    out
}

fn check_basic_sentence(f: &SharpFormula) -> Result<()> {
    if !f.is_basic() {
        return Err(Error::pre("formula is not basic"));
    }
    if !f.is_pp_sharp() {
        return Err(Error::pre("a cast holds a disjunction"));
    }
    if !f.validate()?.free.is_empty() {
        return Err(Error::pre("formula is not a sentence"));
    }
    Ok(())
}

/// The pp-formula obtained by erasing the `#`-structure of a basic
/// sentence; every `#`-level variable becomes liberal.
pub fn basic_sharp_to_pp(f: &SharpFormula) -> Result<PpPair> {
    Ok(basic_with_decomposition(f)?.0)
}

/// The pair of a basic sentence together with the decomposition whose bags
/// are the free sets of the syntax tree. It is quantifier-aware and its
/// largest bag is at most the width of `f`.
pub fn basic_with_decomposition(f: &SharpFormula) -> Result<(PpPair, TreeDecomposition)> {
    check_basic_sentence(f)?;
    let mut fresh = Fresh::avoiding(all_names(f));
    let g = rename_casts_apart(f, &mut sharp_vars(f), &mut fresh);
    let mut bodies = Vec::new();
    g.walk(&mut |h| {
        if let SharpFormula::Cast(ep, _) = h {
            bodies.push(ep.clone());
        }
    });
    let q = LiberalQuery {
        name: "basic".into(),
        formula: EpFormula::conj(bodies.into_iter().filter(|b| *b != EpFormula::Top)),
        liberal: sharp_vars(&g),
    };
    let p = pp_to_pair(&q)?;
    let mut td = TreeDecomposition {
        bags: Vec::new(),
        parent: Vec::new(),
    };
    syntax_nodes(&g, None, &mut td);
    let covered: VarSet = td.bags.iter().flatten().cloned().collect();
    let root = td.root();
    for v in p.structure.elements() {
        if !covered.contains(v) {
            td.add_node(std::iter::once(v.clone()).collect(), Some(root));
        }
    }
    Ok((p, td))
}

fn syntax_nodes(f: &SharpFormula, parent: Option<usize>, td: &mut TreeDecomposition) {
    let id = td.add_node(f.free_vars(), parent);
    match f {
        SharpFormula::Cast(ep, _) => ep_nodes(ep, id, td),
        SharpFormula::Project(_, b) | SharpFormula::Expand(_, b) => syntax_nodes(b, Some(id), td),
        SharpFormula::Times(l, r) | SharpFormula::Plus(l, r) => {
            syntax_nodes(l, Some(id), td);
            syntax_nodes(r, Some(id), td);
        }
        SharpFormula::Const(_) => {}
    }
}

fn ep_nodes(f: &EpFormula, parent: usize, td: &mut TreeDecomposition) {
    let id = td.add_node(f.free_vars(), Some(parent));
    match f {
        EpFormula::And(l, r) | EpFormula::Or(l, r) => {
            ep_nodes(l, id, td);
            ep_nodes(r, id, td);
        }
        EpFormula::Exists(_, b) => ep_nodes(b, id, td),
        EpFormula::Atom(_) | EpFormula::Top => {}
    }
}

/// Result of minimizing a pp-formula.
#[derive(Debug, Clone)]
pub struct MinimizedPp {
    pub sentence: SharpFormula,
    pub width: usize,
    pub qaw: usize,
    pub core: PpPair,
}

pub(crate) fn minimize_pair(p: &PpPair, limits: &Limits) -> Result<MinimizedPp> {
    let core = core_of(p, limits)?;
    let qaw = compute_qaw(&core, limits)?;
    let sentence = pp_to_basic_sharp(&core, &qaw.decomposition)?;
    Ok(MinimizedPp {
        width: sentence.width(),
        sentence,
        qaw: qaw.qaw,
        core,
    })
}

/// A basic sentence of minimum width representing a disjunction-free query,
/// built from a minimum quantifier-aware decomposition of its core.
pub fn minimize_pp(q: &LiberalQuery, limits: &Limits) -> Result<MinimizedPp> {
    let q = renamed_apart(q);
    minimize_pair(&pp_to_pair(&q)?, limits)
}

/// The pair of a disjunction-free query, renaming bound variables apart
/// first.
pub fn query_pair(q: &LiberalQuery) -> Result<PpPair> {
    pp_to_pair(&renamed_apart(q))
}

pub(crate) fn renamed_apart(q: &LiberalQuery) -> LiberalQuery {
    if q.formula.is_renamed_apart() && q.formula.bound_vars().iter().all(|v| !q.liberal.contains(v)) {
        return q.clone();
    }
    let mut fresh = Fresh::avoiding(q.formula.all_vars().into_iter().chain(q.liberal.iter().cloned()));
    LiberalQuery {
        name: q.name.clone(),
        formula: q.formula.rename_apart(&q.liberal, &mut fresh),
        liberal: q.liberal.clone(),
    }
}
