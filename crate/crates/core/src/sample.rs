//! Seeded random structures and queries.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::epquery::{Atom, EpFormula, LiberalQuery};
use crate::relstore::{Signature, Structure};
use crate::sharpcore::SharpFormula;
use crate::{Fresh, VarSet};

/// `U/1 E/2 R/3`, the signature random queries draw from.
pub fn sample_signature() -> Signature {
    Signature::new().with("U", 1).with("E", 2).with("R", 3)
}

/// Elements `e0..`; every possible tuple is present with probability `density`.
pub fn random_structure<R: Rng>(rng: &mut R, sig: &Signature, size: usize, density: f64) -> Structure {
    let mut s = Structure::new(sig.clone());
    for i in 0..size.max(1) {
        s.add_element(&format!("e{i}"));
    }
    let n = s.len();
    for (rel, arity) in sig.symbols() {
        let total = n.pow(arity as u32);
        for code in 0..total {
            if rng.gen_bool(density) {
                let t = (0..arity).map(|i| (code / n.pow(i as u32)) % n).collect();
                s.add_tuple_idx(rel, t).expect("declared");
            }
        }
    }
    s
}

/// Random simple graph on `n` nodes with edges in both directions.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Structure {
    let mut s = Structure::new(Signature::new().with("E", 2));
    for i in 0..n {
        s.add_element(&format!("n{i}"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                s.add_tuple_idx("E", vec![i, j]).expect("declared");
                s.add_tuple_idx("E", vec![j, i]).expect("declared");
            }
        }
    }
    s
}

fn contains(f: &EpFormula, v: &str) -> bool {
    f.atoms().iter().any(|a| a.args.iter().any(|x| x == v))
}

/// Wraps `∃v` around a random subformula covering every occurrence of `v`.
fn bind<R: Rng>(rng: &mut R, f: EpFormula, v: &str) -> EpFormula {
    let here = |f| EpFormula::Exists(v.to_string(), Box::new(f));
    if rng.gen_bool(0.25) {
        return here(f);
    }
    match f {
        EpFormula::And(l, r) => match (contains(&l, v), contains(&r, v)) {
            (true, false) => EpFormula::and(bind(rng, *l, v), *r),
            (false, true) => EpFormula::and(*l, bind(rng, *r, v)),
            _ => here(EpFormula::And(l, r)),
        },
        EpFormula::Or(l, r) => match (contains(&l, v), contains(&r, v)) {
            (true, false) => EpFormula::or(bind(rng, *l, v), *r),
            (false, true) => EpFormula::or(*l, bind(rng, *r, v)),
            _ => here(EpFormula::Or(l, r)),
        },
        EpFormula::Exists(u, b) => EpFormula::Exists(u, Box::new(bind(rng, *b, v))),
        other => here(other),
    }
}

/// A random query with at most `max_vars` variables, `max_atoms` atoms and
/// `max_or` disjunctions over [`sample_signature`].
pub fn random_query<R: Rng>(rng: &mut R, max_vars: usize, max_atoms: usize, max_or: usize) -> LiberalQuery {
    let nvars = rng.gen_range(1..=max_vars.max(1));
    let vars: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
    let natoms = rng.gen_range(1..=max_atoms.max(1));
    let sig = sample_signature();
    let symbols: Vec<(&str, usize)> = sig.symbols().collect();
    let atoms: Vec<EpFormula> = (0..natoms)
        .map(|_| {
            let &(rel, arity) = symbols.choose(rng).expect("nonempty");
            EpFormula::Atom(Atom {
                rel: rel.to_string(),
                args: (0..arity).map(|_| vars.choose(rng).expect("nonempty").clone()).collect(),
            })
        })
        .collect();

    let nor = rng.gen_range(0..=max_or.min(natoms - 1));
    let mut groups: Vec<Vec<EpFormula>> = vec![Vec::new(); nor + 1];
    for (i, a) in atoms.into_iter().enumerate() {
        let g = if i <= nor { i } else { rng.gen_range(0..=nor) };
        groups[g].push(a);
    }
    let mut parts: Vec<EpFormula> = groups.into_iter().map(EpFormula::conj).collect();
    let mut formula = parts.remove(0);
    for p in parts {
        formula = if rng.gen_bool(0.5) {
            EpFormula::or(formula, p)
        } else {
            // Keep a conjunct outside the disjunction.
            match formula {
                EpFormula::And(l, r) => EpFormula::and(*l, EpFormula::or(*r, p)),
                other => EpFormula::or(other, p),
            }
        };
    }

    let mut liberal = VarSet::new();
    let mut quantified = Vec::new();
    for v in &vars {
        if rng.gen_bool(0.6) {
            liberal.insert(v.clone());
        } else {
            quantified.push(v.clone());
        }
    }
    quantified.shuffle(rng);
    for v in quantified {
        if contains(&formula, &v) {
            formula = bind(rng, formula, &v);
        }
    }
    LiberalQuery {
        name: "q".into(),
        formula,
        liberal,
    }
}

/// A random ep-formula over `vars` plus one fresh existential variable.
fn random_cast_body<R: Rng>(rng: &mut R, vars: &VarSet, fresh: &mut Fresh) -> EpFormula {
    let bound = fresh.name("w");
    let mut pool: Vec<String> = vars.iter().cloned().collect();
    let quantify = pool.is_empty() || rng.gen_bool(0.4);
    if quantify {
        pool.push(bound.clone());
    }
    let sig = sample_signature();
    let symbols: Vec<(&str, usize)> = sig.symbols().collect();
    let natoms = rng.gen_range(1..=3);
    let atoms: Vec<EpFormula> = (0..natoms)
        .map(|_| {
            let &(rel, arity) = symbols.choose(rng).expect("nonempty");
            EpFormula::Atom(Atom {
                rel: rel.to_string(),
                args: (0..arity).map(|_| pool.choose(rng).expect("nonempty").clone()).collect(),
            })
        })
        .collect();
    let mut body = if natoms > 1 && rng.gen_bool(0.4) {
        let mut it = atoms.into_iter();
        let first = it.next().expect("nonempty");
        EpFormula::or(first, EpFormula::conj(it))
    } else {
        EpFormula::conj(atoms)
    };
    if quantify && contains(&body, &bound) {
        body = EpFormula::Exists(bound, Box::new(body));
    }
    body
}

/// A random well-formed `#`-formula with free set `free`, built from
/// casts, products, sums, constants, projections and expansions.
/// Projected variables are drawn from `fresh`.
pub fn random_sharp<R: Rng>(rng: &mut R, free: &VarSet, depth: usize, fresh: &mut Fresh) -> SharpFormula {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        if free.is_empty() && rng.gen_bool(0.15) {
            return SharpFormula::constant(rng.gen_range(-2i64..=3));
        }
        return SharpFormula::cast(random_cast_body(rng, free, fresh), free.clone());
    }
    match rng.gen_range(0..5) {
        0 => SharpFormula::times(
            random_sharp(rng, free, depth - 1, fresh),
            random_sharp(rng, free, depth - 1, fresh),
        ),
        1 => SharpFormula::plus(
            random_sharp(rng, free, depth - 1, fresh),
            random_sharp(rng, free, depth - 1, fresh),
        ),
        2 | 3 if free.len() < 3 || rng.gen_bool(0.3) => {
            let v = fresh.name("y");
            let mut inner = free.clone();
            inner.insert(v.clone());
            SharpFormula::project(std::iter::once(v).collect(), random_sharp(rng, &inner, depth - 1, fresh))
        }
        _ if !free.is_empty() => {
            let v = free.iter().nth(rng.gen_range(0..free.len())).expect("nonempty").clone();
            let mut inner = free.clone();
            inner.remove(&v);
            SharpFormula::expand(std::iter::once(v).collect(), random_sharp(rng, &inner, depth - 1, fresh))
        }
        _ => random_sharp(rng, free, depth - 1, fresh),
    }
}

/// A random `#`-sentence; see [`random_sharp`].
pub fn random_sentence<R: Rng>(rng: &mut R, depth: usize) -> SharpFormula {
    random_sharp(rng, &VarSet::new(), depth, &mut Fresh::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_sharp_formulas_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let free: VarSet = ["a", "b"].iter().map(|s| s.to_string()).collect();
            let f = random_sharp(&mut rng, &free, 4, &mut Fresh::avoiding(["a", "b"]));
            assert_eq!(f.validate().unwrap().free, free, "{f}");
            assert!(random_sentence(&mut rng, 4).validate().unwrap().free.is_empty());
        }
    }
}
