//! Finite relational structures, homomorphisms and the structure algebra.

mod algebra;
mod hom;
mod text;

use std::collections::{BTreeMap, BTreeSet, HashMap};

pub use algebra::{disjoint_union, poly_action, product, unit_structure};
pub use hom::{
    count_homomorphisms, find_homomorphism, for_each_homomorphism, homomorphisms, HomProblem,
};
pub use text::{parse_structure, serialize_structure};

use crate::syntax::is_valid_ident;
use crate::{Error, Result};

/// Relation symbols with their arities.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, arity: usize) -> Result<()> {
        if !is_valid_ident(name) {
            return Err(Error::Signature(format!("'{name}' is not a valid symbol")));
        }
        if arity == 0 {
            return Err(Error::Signature(format!("symbol {name} needs arity >= 1")));
        }
        match self.arities.get(name) {
            Some(&a) if a != arity => Err(Error::Signature(format!(
                "symbol {name} declared with arity {a} and {arity}"
            ))),
            _ => {
                self.arities.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn with(mut self, name: &str, arity: usize) -> Self {
        self.add(name, arity).expect("valid symbol");
        self
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&str, usize)> {
        self.arities.iter().map(|(n, &a)| (n.as_str(), a))
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }

    /// Union of two signatures; fails on an arity conflict.
    pub fn merge(&self, other: &Signature) -> Result<Signature> {
        let mut out = self.clone();
        for (n, a) in other.symbols() {
            out.add(n, a)?;
        }
        Ok(out)
    }
}

/// A finite structure. Elements are identified by name and stored densely.
#[derive(Debug, Clone)]
pub struct Structure {
    signature: Signature,
    elements: Vec<String>,
    index: HashMap<String, usize>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.signature == other.signature
            && self.elements == other.elements
            && self.relations == other.relations
    }
}

impl Eq for Structure {}

impl Structure {
    pub fn new(signature: Signature) -> Self {
        let relations = signature
            .symbols()
            .map(|(n, _)| (n.to_string(), BTreeSet::new()))
            .collect();
        Structure {
            signature,
            elements: Vec::new(),
            index: HashMap::new(),
            relations,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, i: usize) -> &str {
        &self.elements[i]
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Adds an element unless present; returns its index.
    pub fn add_element(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.elements.len();
        self.elements.push(name.to_string());
        self.index.insert(name.to_string(), i);
        i
    }

    /// Widens the signature; existing tuples are untouched.
    pub fn extend_signature(&mut self, sig: &Signature) -> Result<()> {
        self.signature = self.signature.merge(sig)?;
        for (n, _) in sig.symbols() {
            self.relations.entry(n.to_string()).or_default();
        }
        Ok(())
    }

    pub fn add_tuple_idx(&mut self, rel: &str, tuple: Vec<usize>) -> Result<()> {
        let arity = self
            .signature
            .arity(rel)
            .ok_or_else(|| Error::Signature(format!("unknown symbol {rel}")))?;
        if tuple.len() != arity {
            return Err(Error::Signature(format!(
                "{rel} has arity {arity}, got {} arguments",
                tuple.len()
            )));
        }
        debug_assert!(tuple.iter().all(|&e| e < self.elements.len()));
        self.relations.get_mut(rel).expect("declared").insert(tuple);
        Ok(())
    }

    /// Adds a tuple by element names, creating missing elements.
    pub fn add_tuple(&mut self, rel: &str, names: &[&str]) -> Result<()> {
        let tuple = names.iter().map(|n| self.add_element(n)).collect();
        self.add_tuple_idx(rel, tuple)
    }

    pub fn relation(&self, rel: &str) -> Option<&BTreeSet<Vec<usize>>> {
        self.relations.get(rel)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&str, &BTreeSet<Vec<usize>>)> {
        self.relations.iter().map(|(n, r)| (n.as_str(), r))
    }

    pub fn contains(&self, rel: &str, tuple: &[usize]) -> bool {
        self.relations.get(rel).is_some_and(|r| r.contains(tuple))
    }

    pub fn tuple_count(&self) -> usize {
        self.relations.values().map(BTreeSet::len).sum()
    }

    /// Substructure induced by `keep`, in the given element order.
    pub fn induced(&self, keep: &[usize]) -> Structure {
        let mut out = Structure::new(self.signature.clone());
        let mut map = vec![None; self.len()];
        for &e in keep {
            map[e] = Some(out.add_element(&self.elements[e]));
        }
        for (rel, tuples) in &self.relations {
            for t in tuples {
                let mapped: Option<Vec<usize>> = t.iter().map(|&e| map[e]).collect();
                if let Some(m) = mapped {
                    out.relations.get_mut(rel).expect("same signature").insert(m);
                }
            }
        }
        out
    }

    /// Copy with elements renamed through `f`; `f` must be injective.
    pub fn renamed(&self, mut f: impl FnMut(&str) -> String) -> Structure {
        let mut out = self.clone();
        out.elements = self.elements.iter().map(|e| f(e)).collect();
        out.index = out
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        debug_assert_eq!(out.index.len(), out.elements.len(), "rename not injective");
        out
    }
}

/// A partial map from names to element names.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    pub bindings: BTreeMap<String, String>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, var: &str, value: &str) -> Self {
        self.bindings.insert(var.to_string(), value.to_string());
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.bindings.get(var).map(String::as_str)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }
}
