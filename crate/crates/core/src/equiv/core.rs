use std::collections::BTreeMap;

use crate::epquery::PpPair;
use crate::relstore::HomProblem;
use crate::{Error, Limits, Result, Var};

/// A core together with an endomorphism of the input onto it that fixes
/// every liberal variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retraction {
    pub core: PpPair,
    pub map: BTreeMap<Var, Var>,
}

/// Subsets of `items` of size `k` in lexicographic order.
fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
    fn go(items: &[usize], k: usize, start: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize]) -> bool) -> bool {
        if acc.len() == k {
            return f(acc);
        }
        for i in start..items.len() {
            if items.len() - i < k - acc.len() {
                break;
            }
            acc.push(items[i]);
            if go(items, k, i + 1, acc, f) {
                return true;
            }
            acc.pop();
        }
        false
    }
    go(items, k, 0, &mut Vec::new(), f)
}

/// The image of an endomorphism fixing the liberal variables, of minimum
/// size; among those, the lexicographically least set of kept elements.
pub fn retract(p: &PpPair, limits: &Limits) -> Result<Retraction> {
    let a = &p.structure;
    let liberal = p.liberal_indices();
    let quantified = p.quantified_indices();
    if quantified.len() > limits.max_core {
        return Err(Error::cap(
            "core search elements",
            quantified.len().to_string(),
            limits.max_core as u64,
        ));
    }
    for k in 0..=quantified.len() {
        let mut found = None;
        let mut failure = None;
        for_each_subset(&quantified, k, &mut |extra| {
            let mut keep: Vec<usize> = liberal.iter().chain(extra).copied().collect();
            keep.sort_unstable();
            let image = a.induced(&keep);
            let pin: Vec<(usize, usize)> = liberal
                .iter()
                .map(|&s| (s, image.position(a.name(s)).expect("kept")))
                .collect();
            match HomProblem::new(a, &image, &pin).map(|h| h.find()) {
                Ok(Some(h)) => {
                    found = Some((image, h));
                    true
                }
                Ok(None) => false,
                Err(e) => {
                    failure = Some(e);
                    true
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some((image, h)) = found {
            let map = (0..a.len())
                .map(|e| (a.name(e).to_string(), image.name(h[e]).to_string()))
                .collect();
            return Ok(Retraction {
                core: PpPair {
                    structure: image,
                    liberal: p.liberal.clone(),
                },
                map,
            });
        }
    }
    Err(Error::Invariant("identity endomorphism not found".into()))
}

pub fn core_of(p: &PpPair, limits: &Limits) -> Result<PpPair> {
    Ok(retract(p, limits)?.core)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epquery::{oracle_count, pair_to_pp, parse_query, pp_to_pair};
    use crate::sample::{random_query, random_structure, sample_signature};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(text: &str) -> PpPair {
        pp_to_pair(&parse_query(text).unwrap()).unwrap()
    }

    #[test]
    fn duplicate_branch_collapses() {
        let p = pair("query q(x): exists y, z. E(x,y) & E(x,z)");
        let r = retract(&p, &Limits::default()).unwrap();
        assert_eq!(r.core.structure.len(), 2);
        assert_eq!(r.map["z"], "y");
        assert_eq!(r.map["x"], "x");
    }

    #[test]
    fn cores_are_fixed_points() {
        let p = pair("query q(x,y): exists z. E(x,z) & E(z,y) & E(y,x)");
        let c = core_of(&p, &Limits::default()).unwrap();
        assert_eq!(c, p);
    }

    #[test]
    fn sentence_collapses_to_loop_when_present() {
        let p = pair("query q(): exists a, b, c. E(a,b) & E(b,c) & E(c,c)");
        assert_eq!(core_of(&p, &Limits::default()).unwrap().structure.len(), 1);
    }

    #[test]
    fn cap_applies_to_quantified_elements() {
        let p = pair("query q(x): exists a, b, c. E(x,a) & E(a,b) & E(b,c)");
        let tight = Limits {
            max_core: 2,
            ..Limits::default()
        };
        assert!(matches!(core_of(&p, &tight), Err(Error::Cap { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn core_preserves_counts_and_is_idempotent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let q = random_query(&mut rng, 5, 5, 0);
            let p = pp_to_pair(&q).unwrap();
            let limits = Limits::default();
            let c = core_of(&p, &limits).unwrap();
            let cc = core_of(&c, &limits).unwrap();
            prop_assert_eq!(cc.structure.len(), c.structure.len());
            let cq = pair_to_pp(&c, "c");
            let sig = sample_signature();
            for size in 1..4 {
                let b = random_structure(&mut rng, &sig, size, 0.5);
                prop_assert_eq!(oracle_count(&q, &b, &limits).unwrap(), oracle_count(&cq, &b, &limits).unwrap());
            }
        }
    }
}
