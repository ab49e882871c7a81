//! Cores, logical equivalence and counting equivalence of pp-formulas.

mod canon;
mod core;

use std::collections::BTreeMap;

use num_bigint::BigUint;

pub use self::canon::{canonical_form, Canonical};
pub use self::core::{core_of, retract, Retraction};
use crate::epquery::PpPair;
use crate::relstore::HomProblem;
use crate::{Error, Fresh, Limits, Result, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Logical,
    Counting,
}

/// Homomorphisms in both directions, as variable maps. For `Logical` they
/// fix the liberal variables; for `Counting` they restrict to bijections
/// between the liberal sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub kind: WitnessKind,
    pub forward: BTreeMap<Var, Var>,
    pub backward: BTreeMap<Var, Var>,
}

impl EquivalenceWitness {
    pub fn verify(&self, p1: &PpPair, p2: &PpPair) -> bool {
        self.direction_ok(&self.forward, p1, p2) && self.direction_ok(&self.backward, p2, p1)
    }

    fn direction_ok(&self, map: &BTreeMap<Var, Var>, src: &PpPair, dst: &PpPair) -> bool {
        let (a, b) = (&src.structure, &dst.structure);
        let image: Option<Vec<usize>> = a.elements().iter().map(|e| map.get(e).and_then(|v| b.position(v))).collect();
        let Some(image) = image else { return false };
        let hom = a.relations().all(|(rel, tuples)| {
            tuples
                .iter()
                .all(|t| b.contains(rel, &t.iter().map(|&e| image[e]).collect::<Vec<_>>()))
        });
        let libs: std::collections::BTreeSet<&Var> = src.liberal.iter().map(|v| &map[v]).collect();
        let liberal_ok = match self.kind {
            WitnessKind::Logical => src.liberal.iter().all(|v| &map[v] == v),
            WitnessKind::Counting => libs.len() == src.liberal.len() && libs.into_iter().eq(dst.liberal.iter()),
        };
        hom && liberal_ok
    }
}

fn check_signatures(p1: &PpPair, p2: &PpPair) -> Result<()> {
    p1.structure.signature().merge(p2.structure.signature()).map(|_| ())
}

/// A homomorphism `src -> dst` extending `pin`, as a name map.
fn extend(src: &PpPair, dst: &PpPair, pin: &BTreeMap<&str, &str>) -> Result<Option<BTreeMap<Var, Var>>> {
    let (a, b) = (&src.structure, &dst.structure);
    let pins: Vec<(usize, usize)> = pin
        .iter()
        .map(|(s, d)| (a.position(s).expect("source element"), b.position(d).expect("target element")))
        .collect();
    Ok(HomProblem::new(a, b, &pins)?.find().map(|h| {
        (0..a.len())
            .map(|e| (a.name(e).to_string(), b.name(h[e]).to_string()))
            .collect()
    }))
}

/// Mutual entailment: homomorphisms both ways fixing every liberal variable.
pub fn logically_equivalent(p1: &PpPair, p2: &PpPair) -> Result<Option<EquivalenceWitness>> {
    check_signatures(p1, p2)?;
    if p1.liberal != p2.liberal {
        return Err(Error::pre("liberal sets differ"));
    }
    let identity: BTreeMap<&str, &str> = p1.liberal.iter().map(|v| (v.as_str(), v.as_str())).collect();
    let Some(forward) = extend(p1, p2, &identity)? else { return Ok(None) };
    let Some(backward) = extend(p2, p1, &identity)? else { return Ok(None) };
    Ok(Some(EquivalenceWitness {
        kind: WitnessKind::Logical,
        forward,
        backward,
    }))
}

/// Per-element multiset of (relation, position) incidences.
fn profile(p: &PpPair, e: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    for (rel, tuples) in p.structure.relations() {
        for t in tuples {
            for (pos, &u) in t.iter().enumerate() {
                if u == e {
                    out.push((rel.to_string(), pos));
                }
            }
        }
    }
    out.sort();
    out
}

/// Searches homomorphisms between cores that restrict to a bijection of
/// liberal sets. Such a map between counting-equivalent cores is an
/// isomorphism, so candidates must preserve incidence profiles.
fn bijective_hom(c1: &PpPair, c2: &PpPair, limits: &Limits) -> Result<Option<BTreeMap<Var, Var>>> {
    if c1.structure.len() != c2.structure.len() || c1.atom_count() != c2.atom_count() {
        return Ok(None);
    }
    let split = |c: &PpPair| {
        let (mut iso, mut rest) = (Vec::new(), Vec::new());
        for e in c.liberal_indices() {
            let prof = profile(c, e);
            if prof.is_empty() {
                iso.push(e);
            } else {
                rest.push((prof, e));
            }
        }
        (iso, rest)
    };
    let (iso1, rest1) = split(c1);
    let (iso2, rest2) = split(c2);
    if iso1.len() != iso2.len() || rest1.len() != rest2.len() {
        return Ok(None);
    }
    // Profile -> (members in p1, members in p2).
    type Sides = (Vec<usize>, Vec<usize>);
    let mut classes: BTreeMap<&[(String, usize)], Sides> = BTreeMap::new();
    for (prof, e) in &rest1 {
        classes.entry(prof).or_default().0.push(*e);
    }
    for (prof, e) in &rest2 {
        classes.entry(prof).or_default().1.push(*e);
    }
    if classes.values().any(|(a, b)| a.len() != b.len()) {
        return Ok(None);
    }
    let needed: BigUint = classes
        .values()
        .map(|(a, _)| (1..=a.len() as u64).map(BigUint::from).product::<BigUint>())
        .product();
    if needed > BigUint::from(limits.max_bijections) {
        return Err(Error::cap("liberal bijections", needed.to_string(), limits.max_bijections));
    }
    let (a, b) = (&c1.structure, &c2.structure);
    let mut pin: BTreeMap<&str, &str> = iso1.iter().zip(&iso2).map(|(&x, &y)| (a.name(x), b.name(y))).collect();
    let groups: Vec<(Vec<usize>, Vec<usize>)> = classes.into_values().collect();
    search(c1, c2, &groups, 0, &mut vec![false; b.len()], &mut pin)
}

fn search<'a>(
    c1: &'a PpPair,
    c2: &'a PpPair,
    groups: &[(Vec<usize>, Vec<usize>)],
    at: usize,
    used: &mut Vec<bool>,
    pin: &mut BTreeMap<&'a str, &'a str>,
) -> Result<Option<BTreeMap<Var, Var>>> {
    let flat: Vec<(usize, &[usize])> = groups
        .iter()
        .flat_map(|(xs, ys)| xs.iter().map(move |&x| (x, ys.as_slice())))
        .collect();
    let Some(&(x, ys)) = flat.get(at) else {
        return extend(c1, c2, pin);
    };
    for &y in ys {
        if used[y] {
            continue;
        }
        used[y] = true;
        pin.insert(c1.structure.name(x), c2.structure.name(y));
        if let Some(found) = search(c1, c2, groups, at + 1, used, pin)? {
            return Ok(Some(found));
        }
        pin.remove(c1.structure.name(x));
        used[y] = false;
    }
    Ok(None)
}

fn compose(first: &BTreeMap<Var, Var>, then: &BTreeMap<Var, Var>) -> BTreeMap<Var, Var> {
    first.iter().map(|(k, v)| (k.clone(), then[v].clone())).collect()
}

/// Equal counts on every structure, decided through bijective
/// homomorphisms between the cores.
pub fn counting_equivalent(p1: &PpPair, p2: &PpPair, limits: &Limits) -> Result<Option<EquivalenceWitness>> {
    check_signatures(p1, p2)?;
    if p1.liberal.len() != p2.liberal.len() {
        return Ok(None);
    }
    let (r1, r2) = (retract(p1, limits)?, retract(p2, limits)?);
    let Some(f) = bijective_hom(&r1.core, &r2.core, limits)? else { return Ok(None) };
    let Some(b) = bijective_hom(&r2.core, &r1.core, limits)? else { return Ok(None) };
    Ok(Some(EquivalenceWitness {
        kind: WitnessKind::Counting,
        forward: compose(&r1.map, &f),
        backward: compose(&r2.map, &b),
    }))
}

/// Renames `source` so that it becomes logically equivalent to `target`:
/// liberal variables follow the inverse of the witness bijection and
/// quantified ones get fresh names. The primal graph is unchanged up to
/// renaming.
pub fn align_via_renaming(target: &PpPair, source: &PpPair, limits: &Limits) -> Result<PpPair> {
    let map = alignment(target, source, limits)?;
    Ok(source.renamed(|v| map[v].clone()))
}

/// The renaming used by [`align_via_renaming`], defined on every element
/// of `source`.
pub fn alignment(target: &PpPair, source: &PpPair, limits: &Limits) -> Result<BTreeMap<Var, Var>> {
    let w = counting_equivalent(target, source, limits)?
        .ok_or_else(|| Error::pre("formulas are not counting equivalent"))?;
    let back: BTreeMap<&Var, &Var> = target.liberal.iter().map(|t| (&w.forward[t], t)).collect();
    let mut fresh = Fresh::avoiding(
        target
            .structure
            .elements()
            .iter()
            .chain(source.structure.elements())
            .cloned(),
    );
    let map: BTreeMap<Var, Var> = source
        .structure
        .elements()
        .iter()
        .map(|e| {
            let to = match back.get(e) {
                Some(t) => (*t).clone(),
                None => fresh.name(e),
            };
            (e.clone(), to)
        })
        .collect();
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::compute_qaw;
    use crate::epquery::{oracle_count, parse_query, pp_to_pair};
    use crate::sample::{random_query, random_structure, sample_signature};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(text: &str) -> PpPair {
        pp_to_pair(&parse_query(text).unwrap()).unwrap()
    }

    #[test]
    fn reversed_edge_is_not_logically_equivalent() {
        let a = pair("query a(x,y): E(x,y)");
        let b = pair("query b(x,y): E(y,x)");
        assert!(logically_equivalent(&a, &b).unwrap().is_none());
        let w = counting_equivalent(&a, &b, &Limits::default()).unwrap().unwrap();
        assert!(w.verify(&a, &b));
        assert_eq!(w.forward["x"], "y");
    }

    #[test]
    fn renamed_edge_is_counting_equivalent() {
        let a = pair("query a(x,y): E(x,y)");
        let b = pair("query b(u,v): E(v,u)");
        let w = counting_equivalent(&a, &b, &Limits::default()).unwrap().unwrap();
        assert_eq!((w.forward["x"].as_str(), w.forward["y"].as_str()), ("v", "u"));
        assert!(w.verify(&a, &b));
        assert!(logically_equivalent(&a, &b).is_err());
    }

    #[test]
    fn core_and_duplicates_are_logically_equivalent() {
        let p = pair("query q(x): exists y, z. E(x,y) & E(x,z)");
        let c = core_of(&p, &Limits::default()).unwrap();
        let w = logically_equivalent(&p, &c).unwrap().unwrap();
        assert!(w.verify(&p, &c));
        let d = pair("query q(x): exists y. E(x,y) & E(x,y)");
        assert!(logically_equivalent(&d, &pair("query q(x): exists y. E(x,y)")).unwrap().is_some());
    }

    #[test]
    fn collapsed_unaries_are_not_counting_equivalent() {
        let a = pair("query t(x1,x2): U1(x1) & U2(x2)");
        let b = pair("query c(x1,x2): U1(x1) & U2(x1)");
        assert!(counting_equivalent(&a, &b, &Limits::default()).unwrap().is_none());
    }

    #[test]
    fn isolated_liberal_counts_must_match() {
        let a = pair("query a(x,y): exists z. E(z,z)");
        let b = pair("query b(x,y): E(x,x)");
        assert!(counting_equivalent(&a, &b, &Limits::default()).unwrap().is_none());
        let c = pair("query c(p,q): exists w. E(w,w)");
        assert!(counting_equivalent(&a, &c, &Limits::default()).unwrap().is_some());
    }

    #[test]
    fn bijection_guard() {
        let xs: Vec<String> = (0..8).map(|i| format!("x{i}")).collect();
        let atoms: Vec<String> = xs.iter().map(|x| format!("E({x},z)")).collect();
        let p = pair(&format!("query s({}): exists z. {}", xs.join(","), atoms.join(" & ")));
        let tight = Limits {
            max_bijections: 100,
            ..Limits::default()
        };
        assert!(matches!(counting_equivalent(&p, &p, &tight), Err(Error::Cap { .. })));
    }

    #[test]
    fn alignment_makes_formulas_logically_equivalent() {
        let target = pair("query t(x,y): E(x,y)");
        let source = pair("query s(u,v): E(v,u)");
        let aligned = align_via_renaming(&target, &source, &Limits::default()).unwrap();
        let s = &aligned.structure;
        assert!(s.contains("E", &[s.position("x").unwrap(), s.position("y").unwrap()]));
        assert!(logically_equivalent(&target, &aligned).unwrap().is_some());
        assert!(align_via_renaming(&target, &pair("query s(u,v): E(u,u)"), &Limits::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]
        #[test]
        fn decisions_agree_with_counts(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let limits = Limits::default();
            let q1 = random_query(&mut rng, 4, 4, 0);
            let q2 = random_query(&mut rng, 4, 4, 0);
            let (p1, p2) = (pp_to_pair(&q1).unwrap(), pp_to_pair(&q2).unwrap());
            let refl = counting_equivalent(&p1, &p1, &limits).unwrap().unwrap();
            prop_assert!(refl.verify(&p1, &p1));
            let fwd = counting_equivalent(&p1, &p2, &limits).unwrap();
            let bwd = counting_equivalent(&p2, &p1, &limits).unwrap();
            prop_assert_eq!(fwd.is_some(), bwd.is_some());
            if p1.liberal == p2.liberal && logically_equivalent(&p1, &p2).unwrap().is_some() {
                prop_assert!(fwd.is_some());
            }
            let sig = sample_signature();
            let mut differ = false;
            for size in 1..4 {
                let b = random_structure(&mut rng, &sig, size, 0.5);
                differ |= oracle_count(&q1, &b, &limits).unwrap() != oracle_count(&q2, &b, &limits).unwrap();
            }
            if let Some(w) = fwd {
                prop_assert!(w.verify(&p1, &p2));
                prop_assert!(!differ);
                let aligned = align_via_renaming(&p1, &p2, &limits).unwrap();
                prop_assert!(logically_equivalent(&p1, &aligned).unwrap().is_some());
                prop_assert_eq!(compute_qaw(&aligned, &limits).unwrap().qaw, compute_qaw(&p2, &limits).unwrap().qaw);
            }
        }

        #[test]
        fn shuffled_copies_are_counting_equivalent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = pp_to_pair(&random_query(&mut rng, 5, 5, 0)).unwrap();
            let libs: Vec<&Var> = p.liberal.iter().collect();
            let mut perm = libs.clone();
            use rand::seq::SliceRandom;
            perm.shuffle(&mut rng);
            let map: BTreeMap<Var, Var> = libs.iter().zip(&perm).map(|(a, b)| (a.to_string(), format!("{b}'"))).collect();
            let q = p.renamed(|v| map.get(v).cloned().unwrap_or_else(|| format!("{v}q")));
            let w = counting_equivalent(&p, &q, &Limits::default()).unwrap().unwrap();
            prop_assert!(w.verify(&p, &q));
        }
    }
}
