use super::{Atom, EpFormula, LiberalQuery};
use crate::relstore::Structure;
use crate::{Error, Result, Var, VarSet};

/// A pp-formula as a structure over its variables plus the liberal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PpPair {
    pub structure: Structure,
    pub liberal: VarSet,
}

impl PpPair {
    pub fn new(structure: Structure, liberal: VarSet) -> Result<Self> {
        if let Some(v) = liberal.iter().find(|v| structure.position(v).is_none()) {
            return Err(Error::pre(format!("liberal variable {v} is not an element")));
        }
        Ok(PpPair { structure, liberal })
    }

    pub fn is_liberal(&self, element: usize) -> bool {
        self.liberal.contains(self.structure.name(element))
    }

    pub fn liberal_indices(&self) -> Vec<usize> {
        (0..self.structure.len()).filter(|&e| self.is_liberal(e)).collect()
    }

    pub fn quantified_indices(&self) -> Vec<usize> {
        (0..self.structure.len()).filter(|&e| !self.is_liberal(e)).collect()
    }

    pub fn quantified(&self) -> Vec<Var> {
        self.quantified_indices()
            .into_iter()
            .map(|e| self.structure.name(e).to_string())
            .collect()
    }

    pub fn atom_count(&self) -> usize {
        self.structure.tuple_count()
    }

    /// Copy with every variable renamed through an injective `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> Var) -> PpPair {
        PpPair {
            structure: self.structure.renamed(&f),
            liberal: self.liberal.iter().map(|v| f(v)).collect(),
        }
    }
}

/// Prenexes a disjunction-free query into a pair. Liberal variables come
/// first, then quantified ones, each group sorted.
pub fn pp_to_pair(q: &LiberalQuery) -> Result<PpPair> {
    if !q.formula.is_pp() {
        return Err(Error::pre("query contains a disjunction"));
    }
    if !q.formula.is_renamed_apart() {
        return Err(Error::pre("query is not renamed apart"));
    }
    let mut a = Structure::new(q.formula.signature()?);
    for v in &q.liberal {
        a.add_element(v);
    }
    let bound: VarSet = q.formula.bound_vars().into_iter().collect();
    if let Some(v) = bound.intersection(&q.liberal).next() {
        return Err(Error::pre(format!("liberal variable {v} is quantified")));
    }
    for v in &bound {
        a.add_element(v);
    }
    for atom in q.formula.atoms() {
        let names: Vec<&str> = atom.args.iter().map(String::as_str).collect();
        if let Some(v) = names.iter().find(|v| a.position(v).is_none()) {
            return Err(Error::pre(format!("free variable {v} is not liberal")));
        }
        a.add_tuple(&atom.rel, &names)?;
    }
    Ok(PpPair {
        structure: a,
        liberal: q.liberal.clone(),
    })
}

/// `∃(quantified) ∧(facts)` with facts in lexicographic order.
pub fn pair_to_pp(p: &PpPair, name: &str) -> LiberalQuery {
    let a = &p.structure;
    let mut atoms: Vec<Atom> = a
        .relations()
        .flat_map(|(rel, ts)| {
            ts.iter().map(move |t| Atom {
                rel: rel.to_string(),
                args: t.iter().map(|&e| a.name(e).to_string()).collect(),
            })
        })
        .collect();
    atoms.sort();
    let body = EpFormula::conj(atoms.into_iter().map(EpFormula::Atom));
    let quantified = p.quantified();
    LiberalQuery {
        name: name.to_string(),
        formula: EpFormula::exists_all(&quantified, body),
        liberal: p.liberal.clone(),
    }
}
