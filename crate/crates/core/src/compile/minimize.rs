use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::flat::flatten;
use super::lc::{canonical_lc, term_with_decomposition, LinearCombination};
use super::pp::{minimize_pair, pp_to_basic_sharp, renamed_apart, MinimizedPp};
use crate::decomp::{compute_qaw, make_nice_with, quantified_first, TreeDecomposition};
use crate::epquery::{pp_to_pair, to_dnf_pp, EpFormula, LiberalQuery, PpPair};
use crate::equiv::{alignment, counting_equivalent};
use crate::sharpcore::{naive_representation, SharpFormula};
use crate::{Error, Fresh, Limits, Result, VarSet};

fn signed(c: &BigInt, f: SharpFormula) -> SharpFormula {
    if c.is_one() {
        f
    } else {
        SharpFormula::times(SharpFormula::Const(c.clone()), f)
    }
}

#[derive(Debug, Clone)]
pub struct MinimizedEp {
    pub sentence: SharpFormula,
    pub width: usize,
    pub lc: LinearCombination,
    pub terms: Vec<MinimizedPp>,
}

/// `Σ c_i × ψ_i` over the canonical linear combination of `q`, each `ψ_i`
/// a minimum-width basic sentence of its term.
pub fn minimize_ep(q: &LiberalQuery, limits: &Limits) -> Result<MinimizedEp> {
    let lc = canonical_lc(&flatten(&naive_representation(q), limits)?, limits)?;
    let terms: Vec<MinimizedPp> = lc
        .terms
        .iter()
        .map(|t| minimize_pair(&t.pair, limits))
        .collect::<Result<_>>()?;
    let sentence = SharpFormula::sum(
        lc.terms
            .iter()
            .zip(&terms)
            .map(|(t, m)| signed(&t.coefficient, m.sentence.clone())),
    )
    .unwrap_or_else(|| SharpFormula::constant(0));
    Ok(MinimizedEp {
        width: sentence.width(),
        sentence,
        lc,
        terms,
    })
}

/// Inclusion-exclusion over the disjuncts, each conjunction compiled
/// through a minimum quantifier-aware decomposition. No cores are taken and
/// no terms are merged.
pub fn decomposition_representation(q: &LiberalQuery, limits: &Limits) -> Result<SharpFormula> {
    let q = renamed_apart(q);
    let parts = to_dnf_pp(&q, limits)?;
    let s = parts.len();
    if s >= 64 || (1u64 << s) - 1 > limits.max_dnf as u64 {
        return Err(Error::cap("inclusion-exclusion terms", format!("2^{s}-1"), limits.max_dnf as u64));
    }
    let mut summands = Vec::new();
    for mask in 1u64..1 << s {
        let mut fresh = Fresh::avoiding(q.formula.all_vars().into_iter().chain(q.liberal.iter().cloned()));
        let mut avoid: VarSet = q.liberal.clone();
        let mut conj = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            if mask >> i & 1 == 1 {
                let renamed = part.formula.rename_apart(&avoid, &mut fresh);
                avoid.extend(renamed.all_vars());
                conj.push(renamed);
            }
        }
        let query = LiberalQuery {
            name: q.name.clone(),
            formula: EpFormula::conj(conj),
            liberal: q.liberal.clone(),
        };
        let pair = pp_to_pair(&query)?;
        let qaw = compute_qaw(&pair, limits)?;
        let sentence = pp_to_basic_sharp(&pair, &qaw.decomposition)?;
        let sign = if mask.count_ones() % 2 == 1 { BigInt::one() } else { -BigInt::one() };
        summands.push(signed(&sign, sentence));
    }
    Ok(SharpFormula::sum(summands).expect("at least one disjunct"))
}

fn compile_aligned(target: &PpPair, source: &PpPair, td: Option<&TreeDecomposition>, limits: &Limits) -> Result<SharpFormula> {
    let map = alignment(target, source, limits)?;
    let aligned = source.renamed(|v| map[v].clone());
    match td {
        None => pp_to_basic_sharp(&aligned, &compute_qaw(&aligned, limits)?.decomposition),
        Some(td) => {
            let renamed = TreeDecomposition {
                bags: td.bags.iter().map(|b| b.iter().map(|v| map[v].clone()).collect()).collect(),
                parent: td.parent.clone(),
            };
            let nice = make_nice_with(&renamed, renamed.root(), quantified_first(&aligned));
            pp_to_basic_sharp(&aligned, &nice)
        }
    }
}

/// A basic sentence representing `q` whose width and `#`-width do not
/// exceed those of `f`, given that `f` represents `q`.
pub fn reduce_to_basic(f: &SharpFormula, q: &LiberalQuery, limits: &Limits) -> Result<SharpFormula> {
    let q = renamed_apart(q);
    if !q.formula.is_pp() {
        return Err(Error::pre("query contains a disjunction"));
    }
    let target = pp_to_pair(&q)?;
    let flat = flatten(f, limits)?;
    let lc = canonical_lc(&flat, limits)?;
    if lc.len() != 1 || !lc.terms[0].coefficient.is_one() {
        return Err(Error::pre(format!(
            "sentence does not represent a pp-formula: its linear combination has {} terms",
            lc.len()
        )));
    }
    let mut candidates = vec![compile_aligned(&target, &lc.terms[0].pair, None, limits)?];
    for term in flat.terms.iter().filter(|t| !t.constant.value.is_zero()) {
        let (pair, td) = term_with_decomposition(term)?;
        match counting_equivalent(&target, &pair, limits) {
            Ok(Some(_)) => candidates.push(compile_aligned(&target, &pair, Some(&td), limits)?),
            Ok(None) | Err(Error::Cap { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let (w, sw) = (f.width(), f.sharp_width());
    candidates
        .into_iter()
        .filter(|c| c.width() <= w && c.sharp_width() <= sw)
        .min_by_key(|c| (c.width(), c.sharp_width()))
        .ok_or_else(|| {
            Error::Invariant(format!("no basic sentence within width {w} and #-width {sw}"))
        })
}

/// Summary numbers for a compiled sentence: `qaw` and `core_size` are
/// maxima over the terms of its canonical linear combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Report {
    pub width: usize,
    pub sharp_width: usize,
    pub terms: usize,
    pub qaw: usize,
    pub core_size: usize,
}

pub fn report(f: &SharpFormula, limits: &Limits) -> Result<Report> {
    let lc = canonical_lc(&flatten(f, limits)?, limits)?;
    let mut qaw = 0;
    let mut core_size = 0;
    for t in &lc.terms {
        qaw = qaw.max(compute_qaw(&t.pair, limits)?.qaw);
        core_size = core_size.max(t.pair.structure.len());
    }
    Ok(Report {
        width: f.width(),
        sharp_width: f.sharp_width(),
        terms: if lc.is_empty() && matches!(f, SharpFormula::Const(n) if n.is_zero()) { 0 } else { f.summands() },
        qaw,
        core_size,
    })
}
