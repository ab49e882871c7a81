use super::{EpFormula, LiberalQuery};
use crate::{Error, Limits, Result};

fn dnf(f: &EpFormula, cap: usize) -> Result<Vec<EpFormula>> {
    let too_many = |n: usize| Error::cap("DNF disjuncts", n, cap as u64);
    Ok(match f {
        EpFormula::Atom(_) | EpFormula::Top => vec![f.clone()],
        EpFormula::Or(l, r) => {
            let mut out = dnf(l, cap)?;
            out.extend(dnf(r, cap)?);
            if out.len() > cap {
                return Err(too_many(out.len()));
            }
            out
        }
        EpFormula::And(l, r) => {
            let (a, b) = (dnf(l, cap)?, dnf(r, cap)?);
            if a.len() * b.len() > cap {
                return Err(too_many(a.len() * b.len()));
            }
            let mut out = Vec::with_capacity(a.len() * b.len());
            for x in &a {
                for y in &b {
                    out.push(match (x, y) {
                        (EpFormula::Top, other) | (other, EpFormula::Top) => other.clone(),
                        _ => EpFormula::and(x.clone(), y.clone()),
                    });
                }
            }
            out
        }
        EpFormula::Exists(v, b) => dnf(b, cap)?
            .into_iter()
            .map(|d| {
                if d.free_vars().contains(v) {
                    EpFormula::Exists(v.clone(), Box::new(d))
                } else {
                    d
                }
            })
            .collect(),
    })
}

/// Splits a query into disjunction-free disjuncts over the same liberal set.
/// Syntactic duplicates are dropped; no subformula gains free variables.
pub fn to_dnf_pp(q: &LiberalQuery, limits: &Limits) -> Result<Vec<LiberalQuery>> {
    let mut out: Vec<LiberalQuery> = Vec::new();
    for d in dnf(&q.formula, limits.max_dnf)? {
        if out.iter().all(|e| e.formula != d) {
            out.push(LiberalQuery {
                name: q.name.clone(),
                formula: d,
                liberal: q.liberal.clone(),
            });
        }
    }
    Ok(out)
}
