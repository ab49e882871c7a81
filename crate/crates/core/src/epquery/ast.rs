use std::collections::BTreeSet;
use std::fmt;

use crate::relstore::Signature;
use crate::{Error, Fresh, Result, Var, VarSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub rel: String,
    pub args: Vec<Var>,
}

impl Atom {
    pub fn new(rel: &str, args: &[&str]) -> Self {
        Atom {
            rel: rel.to_string(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn vars(&self) -> VarSet {
        self.args.iter().cloned().collect()
    }
}

/// Existential positive formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EpFormula {
    Atom(Atom),
    And(Box<EpFormula>, Box<EpFormula>),
    Or(Box<EpFormula>, Box<EpFormula>),
    Exists(Var, Box<EpFormula>),
    Top,
}

impl EpFormula {
    pub fn atom(rel: &str, args: &[&str]) -> Self {
        EpFormula::Atom(Atom::new(rel, args))
    }

    pub fn and(a: EpFormula, b: EpFormula) -> Self {
        EpFormula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: EpFormula, b: EpFormula) -> Self {
        EpFormula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(v: &str, body: EpFormula) -> Self {
        EpFormula::Exists(v.to_string(), Box::new(body))
    }

    /// Left-nested conjunction; empty input gives `true`.
    pub fn conj<I: IntoIterator<Item = EpFormula>>(parts: I) -> Self {
        parts
            .into_iter()
            .reduce(EpFormula::and)
            .unwrap_or(EpFormula::Top)
    }

    /// Quantifier prefix in the given order, outermost first.
    pub fn exists_all<'a, I>(vars: I, body: EpFormula) -> Self
    where
        I: IntoIterator<Item = &'a Var>,
        I::IntoIter: DoubleEndedIterator,
    {
        vars.into_iter()
            .rev()
            .fold(body, |acc, v| EpFormula::Exists(v.clone(), Box::new(acc)))
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut VarSet) {
        match self {
            EpFormula::Atom(a) => {
                for v in &a.args {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            EpFormula::And(l, r) | EpFormula::Or(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            EpFormula::Exists(v, b) => {
                bound.push(v.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            EpFormula::Top => {}
        }
    }

    /// Quantified variables in binding order (pre-order).
    pub fn bound_vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.walk(&mut |f| {
            if let EpFormula::Exists(v, _) = f {
                out.push(v.clone());
            }
        });
        out
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.walk_ref(&mut out);
        out
    }

    fn walk_ref<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            EpFormula::Atom(a) => out.push(a),
            EpFormula::And(l, r) | EpFormula::Or(l, r) => {
                l.walk_ref(out);
                r.walk_ref(out);
            }
            EpFormula::Exists(_, b) => b.walk_ref(out),
            EpFormula::Top => {}
        }
    }

    /// Pre-order traversal over all subformulas.
    pub fn walk(&self, f: &mut impl FnMut(&EpFormula)) {
        f(self);
        match self {
            EpFormula::And(l, r) | EpFormula::Or(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            EpFormula::Exists(_, b) => b.walk(f),
            EpFormula::Atom(_) | EpFormula::Top => {}
        }
    }

    pub fn is_pp(&self) -> bool {
        let mut pp = true;
        self.walk(&mut |f| pp &= !matches!(f, EpFormula::Or(..)));
        pp
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.walk(&mut |f| match f {
            EpFormula::Atom(a) => out.extend(a.args.iter().cloned()),
            EpFormula::Exists(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Largest free-variable set over all subformulas.
    pub fn width(&self) -> usize {
        let mut w = self.free_vars().len();
        match self {
            EpFormula::And(l, r) | EpFormula::Or(l, r) => w = w.max(l.width()).max(r.width()),
            EpFormula::Exists(_, b) => w = w.max(b.width()),
            EpFormula::Atom(_) | EpFormula::Top => {}
        }
        w
    }

    /// Symbols with arities; fails when one symbol is used with two arities.
    pub fn signature(&self) -> Result<Signature> {
        let mut sig = Signature::new();
        for a in self.atoms() {
            sig.add(&a.rel, a.args.len())?;
        }
        Ok(sig)
    }

    /// Renames every occurrence, bound or free; `f` must be injective.
    pub fn rename(&self, f: &impl Fn(&str) -> Var) -> EpFormula {
        match self {
            EpFormula::Atom(a) => EpFormula::Atom(Atom {
                rel: a.rel.clone(),
                args: a.args.iter().map(|v| f(v)).collect(),
            }),
            EpFormula::And(l, r) => EpFormula::and(l.rename(f), r.rename(f)),
            EpFormula::Or(l, r) => EpFormula::or(l.rename(f), r.rename(f)),
            EpFormula::Exists(v, b) => EpFormula::Exists(f(v), Box::new(b.rename(f))),
            EpFormula::Top => EpFormula::Top,
        }
    }

    /// Renames binders so that none repeats, none shadows a free variable
    /// and none lies in `avoid`.
    pub fn rename_apart(&self, avoid: &VarSet, fresh: &mut Fresh) -> EpFormula {
        let mut taken: VarSet = self.free_vars();
        taken.extend(avoid.iter().cloned());
        fresh.reserve(self.all_vars());
        fresh.reserve(avoid.iter().cloned());
        self.rename_apart_in(&mut Vec::new(), &mut taken, fresh)
    }

    fn rename_apart_in(
        &self,
        scope: &mut Vec<(Var, Var)>,
        taken: &mut VarSet,
        fresh: &mut Fresh,
    ) -> EpFormula {
        match self {
            EpFormula::Atom(a) => EpFormula::Atom(Atom {
                rel: a.rel.clone(),
                args: a
                    .args
                    .iter()
                    .map(|v| {
                        scope
                            .iter()
                            .rev()
                            .find(|(o, _)| o == v)
                            .map_or_else(|| v.clone(), |(_, n)| n.clone())
                    })
                    .collect(),
            }),
            EpFormula::And(l, r) => EpFormula::and(
                l.rename_apart_in(scope, taken, fresh),
                r.rename_apart_in(scope, taken, fresh),
            ),
            EpFormula::Or(l, r) => EpFormula::or(
                l.rename_apart_in(scope, taken, fresh),
                r.rename_apart_in(scope, taken, fresh),
            ),
            EpFormula::Exists(v, b) => {
                let name = if taken.contains(v) {
                    fresh.name(v)
                } else {
                    v.clone()
                };
                taken.insert(name.clone());
                scope.push((v.clone(), name.clone()));
                let body = b.rename_apart_in(scope, taken, fresh);
                scope.pop();
                EpFormula::Exists(name, Box::new(body))
            }
            EpFormula::Top => EpFormula::Top,
        }
    }

    /// True when no variable is bound twice and no bound name occurs free.
    pub fn is_renamed_apart(&self) -> bool {
        let bound = self.bound_vars();
        let distinct: BTreeSet<&Var> = bound.iter().collect();
        distinct.len() == bound.len() && bound.iter().all(|v| !self.free_vars().contains(v))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Whole,
    OrLeft,
    OrRight,
    AndLeft,
    AndRight,
}

fn write_formula(f: &EpFormula, slot: Slot, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = match f {
        EpFormula::Exists(..) => slot != Slot::Whole,
        EpFormula::Or(..) => !matches!(slot, Slot::Whole | Slot::OrLeft),
        EpFormula::And(..) => slot == Slot::AndRight,
        EpFormula::Atom(_) | EpFormula::Top => false,
    };
    if paren {
        out.write_str("(")?;
    }
    match f {
        EpFormula::Atom(a) => write!(out, "{}({})", a.rel, a.args.join(","))?,
        EpFormula::Top => out.write_str("true")?,
        EpFormula::Or(l, r) => {
            write_formula(l, Slot::OrLeft, out)?;
            out.write_str(" | ")?;
            write_formula(r, Slot::OrRight, out)?;
        }
        EpFormula::And(l, r) => {
            write_formula(l, Slot::AndLeft, out)?;
            out.write_str(" & ")?;
            write_formula(r, Slot::AndRight, out)?;
        }
        EpFormula::Exists(v, b) => {
            write!(out, "exists {v} . ")?;
            write_formula(b, Slot::Whole, out)?;
        }
    }
    if paren {
        out.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for EpFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, Slot::Whole, f)
    }
}

/// An ep-formula counted over a liberal variable set containing its free
/// variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiberalQuery {
    pub name: String,
    pub formula: EpFormula,
    pub liberal: VarSet,
}

impl LiberalQuery {
    pub fn new(name: &str, formula: EpFormula, liberal: VarSet) -> Result<Self> {
        let q = LiberalQuery {
            name: name.to_string(),
            formula,
            liberal,
        };
        q.check()?;
        Ok(q)
    }

    pub fn check(&self) -> Result<()> {
        let free = self.formula.free_vars();
        if let Some(v) = free.difference(&self.liberal).next() {
            return Err(Error::pre(format!("free variable {v} is not liberal")));
        }
        if let Some(v) = self.formula.bound_vars().iter().find(|v| self.liberal.contains(*v)) {
            return Err(Error::pre(format!("liberal variable {v} is quantified")));
        }
        if !self.formula.is_renamed_apart() {
            return Err(Error::pre("formula is not renamed apart"));
        }
        self.formula.signature()?;
        Ok(())
    }
}

impl fmt::Display for LiberalQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars: Vec<&str> = self.liberal.iter().map(String::as_str).collect();
        write!(f, "query {}({}): {}", self.name, vars.join(","), self.formula)
    }
}
