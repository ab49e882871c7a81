//! Flat normal form: a sum of constant times basic products.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::epquery::{to_dnf_pp, EpFormula, LiberalQuery};
use crate::sharpcore::SharpFormula;
use crate::{Error, Fresh, Limits, Result, VarSet};

/// Inclusion-exclusion over the disjuncts:
/// `Σ_J (E L (-1)^(|J|+1)) × Π_{i∈J} C(ψ_i, L)`.
pub fn cast_ep(q: &LiberalQuery, limits: &Limits) -> Result<SharpFormula> {
    let parts = to_dnf_pp(q, limits)?;
    let s = parts.len();
    if s >= 64 || (1u64 << s) - 1 > limits.max_dnf as u64 {
        return Err(Error::cap(
            "inclusion-exclusion terms",
            format!("2^{s}-1"),
            limits.max_dnf as u64,
        ));
    }
    let casts: Vec<SharpFormula> = parts
        .into_iter()
        .map(|p| SharpFormula::cast(p.formula, q.liberal.clone()))
        .collect();
    let terms = (1u64..1 << s).map(|mask| {
        let sign = if mask.count_ones() % 2 == 1 { 1 } else { -1 };
        let coefficient = ConstantPart {
            value: sign.into(),
            free: q.liberal.clone(),
            padding: VarSet::new(),
        }
        .formula();
        let chosen = (0..s).filter(|i| mask >> i & 1 == 1).map(|i| casts[i].clone());
        SharpFormula::times(coefficient, SharpFormula::product(chosen).expect("nonempty subset"))
    });
    Ok(SharpFormula::sum(terms).expect("at least one disjunct"))
}

/// `E V1 P V2 n` with `V1` the free set, `V2` fresh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantPart {
    pub value: BigInt,
    pub free: VarSet,
    pub padding: VarSet,
}

impl ConstantPart {
    pub fn formula(&self) -> SharpFormula {
        let mut f = SharpFormula::Const(self.value.clone());
        if !self.padding.is_empty() {
            f = SharpFormula::project(self.padding.clone(), f);
        }
        if !self.free.is_empty() {
            f = SharpFormula::expand(self.free.clone(), f);
        }
        f
    }
}

/// A single summand `constant × basic`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatTerm {
    pub constant: ConstantPart,
    pub basic: SharpFormula,
}

impl FlatTerm {
    pub fn formula(&self) -> SharpFormula {
        SharpFormula::times(self.constant.formula(), self.basic.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatSharp {
    pub free: VarSet,
    pub terms: Vec<FlatTerm>,
}

impl FlatSharp {
    /// The sum of all terms; `E free 0` when there are none.
    pub fn formula(&self) -> SharpFormula {
        SharpFormula::sum(self.terms.iter().map(FlatTerm::formula)).unwrap_or_else(|| {
            let zero = SharpFormula::constant(0);
            if self.free.is_empty() {
                zero
            } else {
                SharpFormula::expand(self.free.clone(), zero)
            }
        })
    }
}

impl fmt::Display for FlatSharp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}

/// Value and number of `|B|` factors of a constant formula.
fn constant_value(f: &SharpFormula) -> Result<(BigInt, usize)> {
    Ok(match f {
        SharpFormula::Const(n) => (n.clone(), 0),
        SharpFormula::Expand(_, b) => constant_value(b)?,
        SharpFormula::Project(v, b) => {
            let (n, k) = constant_value(b)?;
            (n, k + v.len())
        }
        SharpFormula::Times(l, r) => {
            let ((a, i), (b, j)) = (constant_value(l)?, constant_value(r)?);
            (a * b, i + j)
        }
        SharpFormula::Cast(..) | SharpFormula::Plus(..) => {
            return Err(Error::pre("formula is not constant"));
        }
    })
}

/// Rewrites a constant formula (built from constants, products,
/// projections and expansions) to `E V1 P V2 n` with fresh `V2`.
pub fn normalize_constant(f: &SharpFormula, fresh: &mut Fresh) -> Result<SharpFormula> {
    let free = f.validate()?.free;
    let (value, k) = constant_value(f)?;
    let padding = (0..k).map(|_| fresh.name("n")).collect();
    Ok(ConstantPart { value, free, padding }.formula())
}

/// `+`-free summands whose sum equals `f` pointwise.
fn lift_sums(f: &SharpFormula, cap: usize) -> Result<Vec<SharpFormula>> {
    let too_many = |n: usize| Error::cap("flat summands", n, cap as u64);
    Ok(match f {
        SharpFormula::Cast(..) | SharpFormula::Const(_) => vec![f.clone()],
        SharpFormula::Project(v, b) => lift_sums(b, cap)?
            .into_iter()
            .map(|s| SharpFormula::project(v.clone(), s))
            .collect(),
        SharpFormula::Expand(v, b) => lift_sums(b, cap)?
            .into_iter()
            .map(|s| SharpFormula::expand(v.clone(), s))
            .collect(),
        SharpFormula::Times(l, r) => {
            let (a, b) = (lift_sums(l, cap)?, lift_sums(r, cap)?);
            if a.len() * b.len() > cap {
                return Err(too_many(a.len() * b.len()));
            }
            a.iter()
                .flat_map(|x| b.iter().map(move |y| SharpFormula::times(x.clone(), y.clone())))
                .collect()
        }
        SharpFormula::Plus(l, r) => {
            let mut out = lift_sums(l, cap)?;
            out.extend(lift_sums(r, cap)?);
            if out.len() > cap {
                return Err(too_many(out.len()));
            }
            out
        }
    })
}

/// Splits a `+`-free formula into a value and a basic part with the same
/// free set; projections stay in the basic part.
fn split(f: &SharpFormula) -> (BigInt, SharpFormula) {
    match f {
        SharpFormula::Cast(..) => (BigInt::one(), f.clone()),
        SharpFormula::Const(n) => (n.clone(), SharpFormula::cast(EpFormula::Top, VarSet::new())),
        SharpFormula::Expand(v, b) => {
            let (n, basic) = split(b);
            (n, SharpFormula::expand(v.clone(), basic))
        }
        SharpFormula::Project(v, b) => {
            let (n, basic) = split(b);
            (n, SharpFormula::project(v.clone(), basic))
        }
        SharpFormula::Times(l, r) => {
            let ((a, x), (b, y)) = (split(l), split(r));
            (a * b, SharpFormula::times(x, y))
        }
        SharpFormula::Plus(..) => unreachable!("sums are lifted first"),
    }
}

fn cast_all(f: &SharpFormula, limits: &Limits) -> Result<SharpFormula> {
    Ok(match f {
        SharpFormula::Cast(ep, l) => cast_ep(
            &LiberalQuery {
                name: "cast".into(),
                formula: ep.clone(),
                liberal: l.clone(),
            },
            limits,
        )?,
        SharpFormula::Project(v, b) => SharpFormula::project(v.clone(), cast_all(b, limits)?),
        SharpFormula::Expand(v, b) => SharpFormula::expand(v.clone(), cast_all(b, limits)?),
        SharpFormula::Times(l, r) => SharpFormula::times(cast_all(l, limits)?, cast_all(r, limits)?),
        SharpFormula::Plus(l, r) => SharpFormula::plus(cast_all(l, limits)?, cast_all(r, limits)?),
        SharpFormula::Const(_) => f.clone(),
    })
}

/// Casts every ep-formula by inclusion-exclusion, lifts sums to the top
/// and factors each summand into a constant and a basic part. Evaluation
/// is unchanged and width does not grow.
pub fn flatten(f: &SharpFormula, limits: &Limits) -> Result<FlatSharp> {
    let free = f.validate()?.free;
    let cast = cast_all(f, limits)?;
    let terms = lift_sums(&cast, limits.max_dnf)?
        .iter()
        .map(|s| {
            let (value, basic) = split(s);
            FlatTerm {
                constant: ConstantPart {
                    value,
                    free: free.clone(),
                    padding: VarSet::new(),
                },
                basic,
            }
        })
        .collect();
    Ok(FlatSharp { free, terms })
}

impl FlatSharp {
    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.constant.value.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::epquery::parse_query;
    use crate::relstore::Structure;
    use crate::sample::{random_sharp, random_structure, sample_signature};
    use crate::sharpcore::{evaluate, naive_representation, CountTable};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn vars(v: &[&str]) -> VarSet {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Rows keyed by variable name so column order does not matter.
    fn by_name(t: &CountTable) -> BTreeMap<Vec<(String, usize)>, BigInt> {
        t.rows
            .iter()
            .filter(|(_, n)| !n.is_zero())
            .map(|(row, n)| {
                let mut key: Vec<(String, usize)> = t.variables.iter().cloned().zip(row.iter().copied()).collect();
                key.sort();
                (key, n.clone())
            })
            .collect()
    }

    fn same_everywhere(a: &SharpFormula, b: &SharpFormula, samples: &[Structure]) {
        let limits = Limits::default();
        for s in samples {
            let (x, y) = (evaluate(a, s, &limits).unwrap(), evaluate(b, s, &limits).unwrap());
            assert_eq!(by_name(&x), by_name(&y), "{a}\nvs\n{b}");
        }
    }

    fn samples(seed: u64) -> Vec<Structure> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sig = sample_signature().with("F", 2);
        (0..6).map(|i| random_structure(&mut rng, &sig, 2 + i % 3, 0.45)).collect()
    }

    fn query(text: &str) -> LiberalQuery {
        parse_query(text).unwrap()
    }

    #[test]
    fn a_single_disjunct_is_one_unit_term() {
        let q = query("query q(x): exists y . E(x,y)");
        let f = cast_ep(&q, &Limits::default()).unwrap();
        assert_eq!(f.summands(), 1);
        same_everywhere(&f, &SharpFormula::cast(q.formula.clone(), q.liberal.clone()), &samples(1));
    }

    #[test]
    fn repeated_disjuncts_collapse() {
        let f = cast_ep(&query("query q(x): U(x) | U(x)"), &Limits::default()).unwrap();
        assert_eq!(f.summands(), 1);
    }

    #[test]
    fn inclusion_exclusion_matches_the_cast() {
        let q = query("query q(x,y,z): E(x,y) | F(y,z)");
        let f = cast_ep(&q, &Limits::default()).unwrap();
        assert_eq!(f.summands(), 3);
        assert!(f.is_pp_sharp());
        same_everywhere(&f, &SharpFormula::cast(q.formula.clone(), q.liberal.clone()), &samples(2));
    }

    #[test]
    fn flat_terms_of_a_union_carry_signs() {
        let q = query("query q(x,y,z): E(x,y) | F(y,z)");
        let naive = naive_representation(&q);
        let flat = flatten(&naive, &Limits::default()).unwrap();
        let mut values: Vec<i64> = flat
            .terms
            .iter()
            .map(|t| i64::try_from(&t.constant.value).unwrap())
            .collect();
        values.sort_unstable();
        assert_eq!(values, [-1, 1, 1]);
        assert!(flat.terms.iter().all(|t| t.basic.is_basic() && t.constant.padding.is_empty()));
        same_everywhere(&naive, &flat.formula(), &samples(3));
    }

    #[test]
    fn too_many_disjuncts_hit_the_cap() {
        let q = query("query q(x): U(x) | E(x,x) | R(x,x,x)");
        let limits = Limits { max_dnf: 6, ..Limits::default() };
        assert!(matches!(cast_ep(&q, &limits), Err(Error::Cap { .. })));
    }

    #[test]
    fn constants_normalize_to_value_and_padding() {
        let f = SharpFormula::expand(
            vars(&["x"]),
            SharpFormula::times(
                SharpFormula::project(vars(&["a", "b"]), SharpFormula::expand(vars(&["a", "b"]), SharpFormula::constant(3))),
                SharpFormula::constant(-2),
            ),
        );
        let mut fresh = Fresh::avoiding(["x", "a", "b"]);
        let g = normalize_constant(&f, &mut fresh).unwrap();
        let SharpFormula::Expand(free, body) = &g else { panic!("{g}") };
        assert_eq!(free, &vars(&["x"]));
        let SharpFormula::Project(pad, n) = body.as_ref() else { panic!("{g}") };
        assert_eq!(pad.len(), 2);
        assert_eq!(**n, SharpFormula::constant(-6));
        same_everywhere(&f, &g, &samples(4));
        assert!(normalize_constant(&SharpFormula::cast(EpFormula::Top, VarSet::new()), &mut fresh).is_err());
    }

    #[test]
    fn an_empty_flat_form_is_zero() {
        let flat = FlatSharp { free: vars(&["x"]), terms: Vec::new() };
        assert!(flat.is_zero());
        assert_eq!(flat.formula().validate().unwrap().free, vars(&["x"]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn flattening_keeps_values_and_width(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let free = vars(&["a", "b"]);
            let free = if seed % 3 == 0 { VarSet::new() } else { free };
            let f = random_sharp(&mut rng, &free, 3, &mut Fresh::avoiding(["a", "b"]));
            let flat = flatten(&f, &Limits::default()).unwrap();
            let g = flat.formula();
            prop_assert_eq!(g.validate().unwrap().free, free);
            prop_assert!(g.width() <= f.width());
            prop_assert!(flat.terms.iter().all(|t| t.basic.is_basic() && t.basic.is_pp_sharp()));
            same_everywhere(&f, &g, &samples(seed));
        }
    }
}
