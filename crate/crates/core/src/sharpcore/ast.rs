use std::fmt;

use num_bigint::BigInt;

use crate::epquery::EpFormula;
use crate::{Error, Result, VarSet};

/// `#`-logic formulas over ep-formulas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SharpFormula {
    /// `C(φ, L)`: 1 on assignments of `L` satisfying `φ`, else 0.
    Cast(EpFormula, VarSet),
    /// `P V φ`: sums `φ` over all values of `V`.
    Project(VarSet, Box<SharpFormula>),
    /// `E V φ`: extends `φ` to fresh variables `V` without changing values.
    Expand(VarSet, Box<SharpFormula>),
    Times(Box<SharpFormula>, Box<SharpFormula>),
    Plus(Box<SharpFormula>, Box<SharpFormula>),
    Const(BigInt),
}

/// Free and closed variables of a well-formed formula.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub free: VarSet,
    pub closed: VarSet,
}

impl SharpFormula {
    pub fn cast(ep: EpFormula, liberal: VarSet) -> Self {
        SharpFormula::Cast(ep, liberal)
    }

    pub fn project(vars: VarSet, body: SharpFormula) -> Self {
        SharpFormula::Project(vars, Box::new(body))
    }

    pub fn expand(vars: VarSet, body: SharpFormula) -> Self {
        SharpFormula::Expand(vars, Box::new(body))
    }

    pub fn times(a: SharpFormula, b: SharpFormula) -> Self {
        SharpFormula::Times(Box::new(a), Box::new(b))
    }

    pub fn plus(a: SharpFormula, b: SharpFormula) -> Self {
        SharpFormula::Plus(Box::new(a), Box::new(b))
    }

    pub fn constant(n: impl Into<BigInt>) -> Self {
        SharpFormula::Const(n.into())
    }

    /// Left-nested product; `None` when empty.
    pub fn product<I: IntoIterator<Item = SharpFormula>>(parts: I) -> Option<Self> {
        parts.into_iter().reduce(SharpFormula::times)
    }

    /// Left-nested sum; `None` when empty.
    pub fn sum<I: IntoIterator<Item = SharpFormula>>(parts: I) -> Option<Self> {
        parts.into_iter().reduce(SharpFormula::plus)
    }

    /// Free and closed sets, assuming well-formedness.
    pub fn scope(&self) -> Scope {
        match self {
            SharpFormula::Cast(_, l) => Scope {
                free: l.clone(),
                closed: VarSet::new(),
            },
            SharpFormula::Project(v, b) => {
                let s = b.scope();
                Scope {
                    free: s.free.difference(v).cloned().collect(),
                    closed: s.closed.union(v).cloned().collect(),
                }
            }
            SharpFormula::Expand(v, b) => {
                let s = b.scope();
                Scope {
                    free: s.free.union(v).cloned().collect(),
                    closed: s.closed,
                }
            }
            SharpFormula::Times(l, r) | SharpFormula::Plus(l, r) => {
                let (a, b) = (l.scope(), r.scope());
                Scope {
                    free: a.free,
                    closed: a.closed.union(&b.closed).cloned().collect(),
                }
            }
            SharpFormula::Const(_) => Scope::default(),
        }
    }

    pub fn free_vars(&self) -> VarSet {
        self.scope().free
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// No sums and no constants.
    pub fn is_basic(&self) -> bool {
        match self {
            SharpFormula::Cast(..) => true,
            SharpFormula::Project(_, b) | SharpFormula::Expand(_, b) => b.is_basic(),
            SharpFormula::Times(l, r) => l.is_basic() && r.is_basic(),
            SharpFormula::Plus(..) | SharpFormula::Const(_) => false,
        }
    }

    /// Every cast holds a disjunction-free formula.
    pub fn is_pp_sharp(&self) -> bool {
        let mut ok = true;
        self.walk(&mut |f| {
            if let SharpFormula::Cast(ep, _) = f {
                ok &= ep.is_pp();
            }
        });
        ok
    }

    pub fn walk(&self, f: &mut impl FnMut(&SharpFormula)) {
        f(self);
        match self {
            SharpFormula::Project(_, b) | SharpFormula::Expand(_, b) => b.walk(f),
            SharpFormula::Times(l, r) | SharpFormula::Plus(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            SharpFormula::Cast(..) | SharpFormula::Const(_) => {}
        }
    }

    /// Checks every side condition; the error names the first offending node.
    pub fn validate(&self) -> Result<Scope> {
        self.validate_at("$")
    }

    fn validate_at(&self, path: &str) -> Result<Scope> {
        let bad = |msg: String| Error::IllFormed {
            path: path.to_string(),
            msg,
        };
        match self {
            SharpFormula::Cast(ep, l) => {
                let free = ep.free_vars();
                if let Some(v) = free.difference(l).next() {
                    return Err(bad(format!("free variable {v} of the cast is not in its set")));
                }
                ep.signature().map_err(|e| bad(e.to_string()))?;
                Ok(self.scope())
            }
            SharpFormula::Project(v, b) => {
                let s = b.validate_at(&format!("{path}.P"))?;
                if let Some(x) = v.intersection(&s.closed).next() {
                    return Err(bad(format!("{x} is already closed")));
                }
                Ok(Scope {
                    free: s.free.difference(v).cloned().collect(),
                    closed: s.closed.union(v).cloned().collect(),
                })
            }
            SharpFormula::Expand(v, b) => {
                let s = b.validate_at(&format!("{path}.E"))?;
                if let Some(x) = v.intersection(&s.free).next() {
                    return Err(bad(format!("{x} is already free")));
                }
                if let Some(x) = v.intersection(&s.closed).next() {
                    return Err(bad(format!("{x} is already closed")));
                }
                Ok(Scope {
                    free: s.free.union(v).cloned().collect(),
                    closed: s.closed,
                })
            }
            SharpFormula::Times(l, r) | SharpFormula::Plus(l, r) => {
                let times = matches!(self, SharpFormula::Times(..));
                let tag = if times { "*" } else { "+" };
                let a = l.validate_at(&format!("{path}.{tag}0"))?;
                let b = r.validate_at(&format!("{path}.{tag}1"))?;
                if a.free != b.free {
                    return Err(bad(format!(
                        "operands have free sets {} and {}",
                        set_text(&a.free),
                        set_text(&b.free)
                    )));
                }
                if times {
                    if let Some(x) = a.closed.intersection(&b.closed).next() {
                        return Err(bad(format!("{x} is closed in both factors")));
                    }
                }
                Ok(Scope {
                    free: a.free,
                    closed: a.closed.union(&b.closed).cloned().collect(),
                })
            }
            SharpFormula::Const(_) => Ok(Scope::default()),
        }
    }

    /// Largest free set over `#`-subformulas and over the subformulas of
    /// every cast body.
    pub fn width(&self) -> usize {
        let mut w = 0;
        self.walk(&mut |f| {
            w = w.max(f.free_vars().len());
            if let SharpFormula::Cast(ep, _) = f {
                w = w.max(ep.width());
            }
        });
        w
    }

    /// Largest free set over `#`-subformulas only.
    pub fn sharp_width(&self) -> usize {
        let mut w = 0;
        self.walk(&mut |f| w = w.max(f.free_vars().len()));
        w
    }

    /// Number of top-level summands.
    pub fn summands(&self) -> usize {
        match self {
            SharpFormula::Plus(l, r) => l.summands() + r.summands(),
            _ => 1,
        }
    }
}

pub(crate) fn set_text(vars: &VarSet) -> String {
    let v: Vec<&str> = vars.iter().map(String::as_str).collect();
    format!("{{{}}}", v.join(","))
}

impl fmt::Display for SharpFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SharpFormula::Cast(ep, l) => write!(f, "C[{ep}; {}]", set_text(l)),
            SharpFormula::Project(v, b) => write!(f, "P{} {b}", set_text(v)),
            SharpFormula::Expand(v, b) => write!(f, "E{} {b}", set_text(v)),
            SharpFormula::Times(l, r) => write!(f, "({l} * {r})"),
            SharpFormula::Plus(l, r) => write!(f, "({l} + {r})"),
            SharpFormula::Const(n) => write!(f, "{n}"),
        }
    }
}
