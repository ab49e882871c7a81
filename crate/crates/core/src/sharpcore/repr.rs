use num_bigint::BigInt;

use super::{eval_sentence, SharpFormula};
use crate::epquery::{oracle_count, LiberalQuery};
use crate::relstore::Structure;
use crate::{Error, Limits, Result};

/// `P L C(φ, L)`.
pub fn naive_representation(q: &LiberalQuery) -> SharpFormula {
    SharpFormula::project(
        q.liberal.clone(),
        SharpFormula::cast(q.formula.clone(), q.liberal.clone()),
    )
}

/// A sample on which a sentence and a query disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub sample: usize,
    pub sentence: BigInt,
    pub oracle: BigInt,
}

/// Compares the sentence with the brute-force count on every sample.
pub fn check_represents(
    f: &SharpFormula,
    q: &LiberalQuery,
    samples: &[Structure],
    limits: &Limits,
) -> Result<Option<Counterexample>> {
    if !f.validate()?.free.is_empty() {
        return Err(Error::pre("only sentences represent queries"));
    }
    for (i, b) in samples.iter().enumerate() {
        let sentence = eval_sentence(f, b, limits)?;
        let oracle = oracle_count(q, b, limits)?;
        if sentence != oracle {
            return Ok(Some(Counterexample {
                sample: i,
                sentence,
                oracle,
            }));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epquery::parse_query;
    use crate::sample::{random_query, random_structure, sample_signature};
    use crate::sharpcore::parse_sharp;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn naive_representation_agrees_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sig = sample_signature();
        for _ in 0..80 {
            let q = random_query(&mut rng, 5, 4, 2);
            let samples: Vec<Structure> = (0..4)
                .map(|i| random_structure(&mut rng, &sig, 1 + i % 4, 0.35))
                .collect();
            let f = naive_representation(&q);
            assert_eq!(check_represents(&f, &q, &samples, &Limits::default()).unwrap(), None, "{q}");
        }
    }

    #[test]
    fn detects_a_wrong_sentence() {
        let q = parse_query("query q(x): exists y . E(x,y)").unwrap();
        let f = parse_sharp("P{x,y} C[E(x,y); {x,y}]").unwrap();
        let b = crate::relstore::parse_structure("signature E/2\nE(a,b)\nE(a,c)\n").unwrap();
        let c = check_represents(&f, &q, &[b], &Limits::default()).unwrap().unwrap();
        assert_eq!((c.sentence, c.oracle), (BigInt::from(2), BigInt::from(1)));
    }
}
