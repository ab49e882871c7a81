use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use super::flat::{FlatSharp, FlatTerm};
use super::pp::{basic_with_decomposition, minimize_pair};
use crate::decomp::TreeDecomposition;
use crate::epquery::{oracle_count, pair_to_pp, PpPair};
use crate::equiv::{canonical_form, core_of};
use crate::relstore::Structure;
use crate::sharpcore::eval_sentence;
use crate::{Error, Fresh, Limits, Result};

/// One summand: a nonzero integer times the count of a canonical core.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcTerm {
    pub coefficient: BigInt,
    pub pair: PpPair,
    pub key: String,
}

/// Terms are pairwise not counting equivalent and sorted by liberal count,
/// atom count and canonical key.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinearCombination {
    pub terms: Vec<LcTerm>,
}

impl LinearCombination {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for LinearCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            writeln!(f, "{} * {}", t.coefficient, pair_to_pp(&t.pair, &format!("t{}", i + 1)))?;
        }
        Ok(())
    }
}

/// The pair of a flat term; each padding variable becomes an isolated
/// liberal variable.
pub fn term_pair(term: &FlatTerm) -> Result<PpPair> {
    Ok(term_with_decomposition(term)?.0)
}

/// [`term_pair`] with the syntax-tree decomposition of the basic part;
/// padding variables hang below its root.
pub fn term_with_decomposition(term: &FlatTerm) -> Result<(PpPair, TreeDecomposition)> {
    let (mut p, mut td) = basic_with_decomposition(&term.basic)?;
    let mut fresh = Fresh::avoiding(p.structure.elements().iter().cloned());
    let root = td.root();
    for _ in &term.constant.padding {
        let v = fresh.name("pad");
        p.structure.add_element(&v);
        p.liberal.insert(v.clone());
        td.add_node(std::iter::once(v).collect(), Some(root));
    }
    Ok((p, td))
}

/// Merges counting-equivalent terms of a flat sentence. Two terms are
/// merged when their cores are isomorphic, which for cores is the same as
/// counting equivalence.
pub fn canonical_lc(flat: &FlatSharp, limits: &Limits) -> Result<LinearCombination> {
    if !flat.free.is_empty() {
        return Err(Error::pre("only sentences have linear combinations"));
    }
    let mut merged: BTreeMap<(usize, usize, String), (BigInt, PpPair)> = BTreeMap::new();
    for term in &flat.terms {
        if term.constant.value.is_zero() {
            continue;
        }
        let core = core_of(&term_pair(term)?, limits)?;
        let c = canonical_form(&core);
        let slot = merged
            .entry((c.pair.liberal.len(), c.pair.atom_count(), c.key))
            .or_insert_with(|| (BigInt::zero(), c.pair));
        slot.0 += &term.constant.value;
    }
    Ok(LinearCombination {
        terms: merged
            .into_iter()
            .filter(|(_, (c, _))| !c.is_zero())
            .map(|((_, _, key), (coefficient, pair))| LcTerm { coefficient, pair, key })
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Compiled,
    Oracle,
}

/// `Σ c_i · |ψ_i(B)|`.
pub fn lc_evaluate(lc: &LinearCombination, b: &Structure, engine: Engine, limits: &Limits) -> Result<BigInt> {
    let mut total = BigInt::zero();
    for (i, t) in lc.terms.iter().enumerate() {
        let count = match engine {
            Engine::Oracle => oracle_count(&pair_to_pp(&t.pair, &format!("t{i}")), b, limits)?,
            Engine::Compiled => eval_sentence(&minimize_pair(&t.pair, limits)?.sentence, b, limits)?,
        };
        total += &t.coefficient * count;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::flatten;
    use crate::epquery::{parse_query, pp_to_pair};
    use crate::equiv::counting_equivalent;
    use crate::relstore::parse_structure;
    use crate::sample::{random_sentence, random_structure, sample_signature};
    use crate::sharpcore::naive_representation;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lc_of(text: &str) -> LinearCombination {
        let limits = Limits::default();
        let q = parse_query(text).unwrap();
        canonical_lc(&flatten(&naive_representation(&q), &limits).unwrap(), &limits).unwrap()
    }

    #[test]
    fn the_empty_combination_is_zero() {
        let b = parse_structure("signature U/1\nuniverse a b\nU(a)\n").unwrap();
        let lc = LinearCombination::default();
        for engine in [Engine::Compiled, Engine::Oracle] {
            assert_eq!(lc_evaluate(&lc, &b, engine, &Limits::default()).unwrap(), BigInt::zero());
        }
        assert_eq!(lc.to_string(), "0\n");
    }

    #[test]
    fn a_product_of_unaries_is_one_term() {
        let lc = lc_of("query t(x1,x2): U1(x1) & U2(x2)");
        assert_eq!(lc.len(), 1);
        assert_eq!(lc.terms[0].coefficient, BigInt::from(1));
        let b = parse_structure("signature U1/1 U2/1\nuniverse a b\nU1(a)\nU1(b)\nU2(b)\n").unwrap();
        for engine in [Engine::Compiled, Engine::Oracle] {
            assert_eq!(lc_evaluate(&lc, &b, engine, &Limits::default()).unwrap(), BigInt::from(2));
        }
    }

    #[test]
    fn a_union_of_unaries_has_three_terms() {
        let lc = lc_of("query q(x): U(x) | V(x)");
        let mut coefficients: Vec<i64> = lc.terms.iter().map(|t| i64::try_from(&t.coefficient).unwrap()).collect();
        coefficients.sort_unstable();
        assert_eq!(coefficients, [-1, 1, 1]);
        let b = parse_structure("signature U/1 V/1\nuniverse a b c\nU(a)\nU(b)\nV(b)\nV(c)\n").unwrap();
        assert_eq!(lc_evaluate(&lc, &b, Engine::Compiled, &Limits::default()).unwrap(), BigInt::from(3));
    }

    #[test]
    fn a_pp_query_keeps_its_core_only() {
        let lc = lc_of("query q(x): exists y, z . E(x,y) & E(x,z)");
        assert_eq!(lc.len(), 1);
        assert_eq!(lc.terms[0].pair.structure.len(), 2);
        let core = pp_to_pair(&parse_query("query q(x): exists y . E(x,y)").unwrap()).unwrap();
        assert!(counting_equivalent(&core, &lc.terms[0].pair, &Limits::default()).unwrap().is_some());
    }

    #[test]
    fn equivalent_disjuncts_cancel_into_one_term() {
        let lc = lc_of("query q(x): (exists y . E(x,y)) | (exists z . E(x,z) & E(x,z))");
        assert_eq!(lc.len(), 1);
        assert_eq!(lc.terms[0].coefficient, BigInt::from(1));
    }

    #[test]
    fn open_formulas_are_rejected() {
        let q = parse_query("query q(x): U(x)").unwrap();
        let cast = crate::sharpcore::SharpFormula::cast(q.formula, q.liberal);
        let flat = flatten(&cast, &Limits::default()).unwrap();
        assert!(canonical_lc(&flat, &Limits::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn combinations_evaluate_like_their_sentences(seed in any::<u64>()) {
            let limits = Limits::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_sentence(&mut rng, 3);
            let lc = canonical_lc(&flatten(&f, &limits).unwrap(), &limits).unwrap();
            for (i, a) in lc.terms.iter().enumerate() {
                prop_assert!(!a.coefficient.is_zero());
                for b in &lc.terms[i + 1..] {
                    prop_assert!(counting_equivalent(&a.pair, &b.pair, &limits).unwrap().is_none());
                }
            }
            for size in 1..4 {
                let b = random_structure(&mut rng, &sample_signature(), size, 0.4);
                let expected = eval_sentence(&f, &b, &limits).unwrap();
                prop_assert_eq!(lc_evaluate(&lc, &b, Engine::Compiled, &limits).unwrap(), expected.clone());
                prop_assert_eq!(lc_evaluate(&lc, &b, Engine::Oracle, &limits).unwrap(), expected);
            }
        }
    }
}
