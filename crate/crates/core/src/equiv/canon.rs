//! Canonical forms of pairs up to isomorphism that maps liberal variables
//! onto liberal variables.

use std::collections::BTreeMap;

use crate::epquery::PpPair;
use crate::relstore::Structure;

/// A canonical key plus the pair renamed to canonical names: `x1..` for
/// liberal variables and `u1..` for quantified ones. Isomorphic pairs get
/// equal keys and equal renamed pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub key: String,
    pub pair: PpPair,
    pub names: BTreeMap<String, String>,
}

/// Relation, position and neighbour colours of one tuple an element lies in.
type Incidence<'r> = (&'r str, usize, Vec<usize>);

struct Refiner<'a> {
    a: &'a Structure,
    incidences: Vec<Vec<(&'a str, usize, &'a [usize])>>,
}

impl<'a> Refiner<'a> {
    fn new(a: &'a Structure) -> Self {
        let mut incidences = vec![Vec::new(); a.len()];
        for (rel, tuples) in a.relations() {
            for t in tuples {
                for (pos, &e) in t.iter().enumerate() {
                    incidences[e].push((rel, pos, t.as_slice()));
                }
            }
        }
        Refiner { a, incidences }
    }

    /// Colour refinement to a stable partition; colours are dense ranks.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = count_classes(&colors);
        loop {
            let sigs: Vec<(usize, Vec<Incidence>)> = (0..self.a.len())
                .map(|e| {
                    let mut around: Vec<Incidence> = self.incidences[e]
                        .iter()
                        .map(|&(rel, pos, t)| (rel, pos, t.iter().map(|&u| colors[u]).collect()))
                        .collect();
                    around.sort();
                    (colors[e], around)
                })
                .collect();
            colors = ranks(&sigs);
            let next = count_classes(&colors);
            if next == classes {
                return colors;
            }
            classes = next;
        }
    }

    fn swap_is_automorphism(&self, x: usize, y: usize) -> bool {
        let swap = |e: usize| if e == x { y } else if e == y { x } else { e };
        self.a.relations().all(|(rel, tuples)| {
            tuples
                .iter()
                .filter(|t| t.contains(&x) || t.contains(&y))
                .all(|t| self.a.contains(rel, &t.iter().map(|&e| swap(e)).collect::<Vec<_>>()))
        })
    }
}

fn count_classes(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

fn ranks<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter().map(|k| sorted.binary_search(&k).expect("present")).collect()
}

fn serialize(p: &PpPair, order: &[usize]) -> (String, Vec<String>) {
    let a = &p.structure;
    let mut names = vec![String::new(); a.len()];
    let (mut lib, mut quant) = (0, 0);
    for &e in order {
        names[e] = if p.is_liberal(e) {
            lib += 1;
            format!("x{lib}")
        } else {
            quant += 1;
            format!("u{quant}")
        };
    }
    let mut facts: Vec<(usize, &str, Vec<usize>)> = Vec::new();
    let rank: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    for (rel, tuples) in a.relations() {
        for t in tuples {
            facts.push((t.len(), rel, t.iter().map(|e| rank[e]).collect()));
        }
    }
    facts.sort();
    let mut key = format!("{lib}/{quant}");
    for (_, rel, t) in facts {
        let args: Vec<&str> = t.iter().map(|&i| names[order[i]].as_str()).collect();
        key.push_str(&format!(" {rel}({})", args.join(",")));
    }
    (key, names)
}

pub fn canonical_form(p: &PpPair) -> Canonical {
    let a = &p.structure;
    let r = Refiner::new(a);
    let n = a.len();
    // Twins: elements whose transposition is an automorphism.
    let mut twin_of: Vec<usize> = (0..n).collect();
    let initial: Vec<usize> = (0..n).map(|e| usize::from(!p.is_liberal(e))).collect();
    let start = r.refine(initial);
    for x in 0..n {
        if twin_of[x] != x {
            continue;
        }
        for y in x + 1..n {
            if twin_of[y] == y && start[x] == start[y] && r.swap_is_automorphism(x, y) {
                twin_of[y] = x;
            }
        }
    }
    let mut best: Option<(String, Vec<String>, Vec<usize>)> = None;
    let mut stack = vec![start];
    while let Some(colors) = stack.pop() {
        let classes = count_classes(&colors);
        if classes == n {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by_key(|&e| colors[e]);
            let (key, names) = serialize(p, &order);
            if best.as_ref().is_none_or(|b| key < b.0) {
                best = Some((key, names, order));
            }
            continue;
        }
        let mut sizes = vec![0; classes];
        for &c in &colors {
            sizes[c] += 1;
        }
        let cell = (0..classes).find(|&c| sizes[c] > 1).expect("not discrete");
        let mut seen_twins = Vec::new();
        for m in (0..n).filter(|&e| colors[e] == cell) {
            if seen_twins.contains(&twin_of[m]) {
                continue;
            }
            seen_twins.push(twin_of[m]);
            let split: Vec<(usize, usize)> = (0..n).map(|e| (colors[e], usize::from(e != m))).collect();
            stack.push(r.refine(ranks(&split)));
        }
    }
    let (key, names, order) = best.unwrap_or_else(|| {
        let (k, n) = serialize(p, &[]);
        (k, n, Vec::new())
    });
    let mut structure = Structure::new(a.signature().clone());
    let mut order = order;
    order.sort_by_key(|&e| !p.is_liberal(e));
    for &e in &order {
        structure.add_element(&names[e]);
    }
    for (rel, tuples) in a.relations() {
        for t in tuples {
            let args: Vec<&str> = t.iter().map(|&e| names[e].as_str()).collect();
            structure.add_tuple(rel, &args).expect("same signature");
        }
    }
    let map: BTreeMap<String, String> = (0..n).map(|e| (a.name(e).to_string(), names[e].clone())).collect();
    let pair = PpPair {
        structure,
        liberal: p.liberal.iter().map(|v| map[v].clone()).collect(),
    };
    Canonical { key, pair, names: map }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epquery::{parse_query, pp_to_pair};
    use crate::sample::random_query;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair(text: &str) -> PpPair {
        pp_to_pair(&parse_query(text).unwrap()).unwrap()
    }

    #[test]
    fn renaming_liberal_variables_is_invisible() {
        let a = canonical_form(&pair("query a(x,y): exists z. E(x,y) & E(y,z)"));
        let b = canonical_form(&pair("query b(p,q): exists w. E(q,p) & E(p,w)"));
        assert_eq!(a.key, b.key);
        assert_eq!(a.pair, b.pair);
        let c = canonical_form(&pair("query c(p,q): exists w. E(q,p) & E(w,p)"));
        assert_ne!(a.key, c.key);
    }

    #[test]
    fn liberal_and_quantified_are_distinguished() {
        let a = canonical_form(&pair("query a(x): exists y. E(x,y)"));
        let b = canonical_form(&pair("query b(y): exists x. E(x,y)"));
        assert_ne!(a.key, b.key);
    }

    #[test]
    fn symmetric_star_is_cheap() {
        let xs: Vec<String> = (0..12).map(|i| format!("x{i}")).collect();
        let atoms: Vec<String> = xs.iter().map(|x| format!("E({x},z)")).collect();
        let p = pair(&format!("query s({}): exists z. {}", xs.join(","), atoms.join(" & ")));
        assert!(canonical_form(&p).key.starts_with("12/1"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(80))]
        #[test]
        fn invariant_under_shuffled_renaming(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = pp_to_pair(&random_query(&mut rng, 6, 6, 0)).unwrap();
            let lib: Vec<&String> = p.structure.elements().iter().filter(|e| p.liberal.contains(*e)).collect();
            let quant: Vec<&String> = p.structure.elements().iter().filter(|e| !p.liberal.contains(*e)).collect();
            let mut lib2 = lib.clone();
            lib2.shuffle(&mut rng);
            let mut quant2 = quant.clone();
            quant2.shuffle(&mut rng);
            let map: BTreeMap<String, String> = lib
                .iter()
                .zip(&lib2)
                .chain(quant.iter().zip(&quant2))
                .map(|(a, b)| (a.to_string(), format!("{b}'")))
                .collect();
            let q = p.renamed(|v| map[v].clone());
            let (cp, cq) = (canonical_form(&p), canonical_form(&q));
            prop_assert_eq!(cp.key, cq.key);
            prop_assert_eq!(cp.pair, cq.pair);
        }
    }
}
