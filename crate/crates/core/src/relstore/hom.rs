//! Backtracking homomorphism search.

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{Assignment, Structure};
use crate::{Error, Result};

const UNSET: usize = usize::MAX;

/// A prepared search for homomorphisms `src -> dst`, optionally pinned.
pub struct HomProblem<'a> {
    dst_len: usize,
    src_tuples: Vec<(usize, &'a [usize])>,
    incident: Vec<Vec<usize>>,
    dst_sets: Vec<HashSet<&'a [usize]>>,
    dst_tuples: Vec<Vec<&'a [usize]>>,
    dst_index: Vec<HashMap<(usize, usize), Vec<usize>>>,
    pin: Vec<usize>,
    impossible: bool,
    components: Vec<Vec<usize>>,
}

impl<'a> HomProblem<'a> {
    /// `pin` lists `(src element, dst element)` pairs by index.
    pub fn new(src: &'a Structure, dst: &'a Structure, pin: &[(usize, usize)]) -> Result<Self> {
        let mut impossible = false;
        let mut src_tuples = Vec::new();
        let mut dst_sets = Vec::new();
        let mut dst_tuples = Vec::new();
        let mut dst_index = Vec::new();
        for (rel, tuples) in src.relations() {
            let arity = src.signature().arity(rel).expect("declared");
            if let Some(a) = dst.signature().arity(rel) {
                if a != arity {
                    return Err(Error::Signature(format!(
                        "{rel} has arity {arity} in the source and {a} in the target"
                    )));
                }
            }
            if tuples.is_empty() {
                continue;
            }
            let rel_id = dst_sets.len();
            let target: Vec<&[usize]> = dst
                .relation(rel)
                .map(|r| r.iter().map(Vec::as_slice).collect())
                .unwrap_or_default();
            if target.is_empty() {
                impossible = true;
            }
            let mut index: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
            for (ti, t) in target.iter().enumerate() {
                for (p, &v) in t.iter().enumerate() {
                    index.entry((p, v)).or_default().push(ti);
                }
            }
            dst_sets.push(target.iter().copied().collect());
            dst_tuples.push(target);
            dst_index.push(index);
            src_tuples.extend(tuples.iter().map(|t| (rel_id, t.as_slice())));
        }

        let n = src.len();
        let mut incident = vec![Vec::new(); n];
        for (ti, (_, t)) in src_tuples.iter().enumerate() {
            let mut seen = Vec::new();
            for &e in t.iter() {
                if !seen.contains(&e) {
                    seen.push(e);
                    incident[e].push(ti);
                }
            }
        }

        let mut pinned = vec![UNSET; n];
        for &(s, d) in pin {
            if s >= n || d >= dst.len() {
                return Err(Error::pre("pin refers to a missing element"));
            }
            if pinned[s] != UNSET && pinned[s] != d {
                impossible = true;
            }
            pinned[s] = d;
        }
        if n > 0 && dst.is_empty() {
            impossible = true;
        }

        let mut problem = HomProblem {
            dst_len: dst.len(),
            src_tuples,
            incident,
            dst_sets,
            dst_tuples,
            dst_index,
            pin: pinned,
            impossible,
            components: Vec::new(),
        };
        problem.components = problem.ordered_components();
        if !problem.pinned_tuples_hold() {
            problem.impossible = true;
        }
        Ok(problem)
    }

    fn pinned_tuples_hold(&self) -> bool {
        self.src_tuples.iter().all(|&(r, t)| {
            if t.iter().all(|&e| self.pin[e] != UNSET) {
                let image: Vec<usize> = t.iter().map(|&e| self.pin[e]).collect();
                self.dst_sets[r].contains(image.as_slice())
            } else {
                true
            }
        })
    }

    /// Connected components of the source, each in search order: pinned
    /// elements first, then greedily the element most tied to those placed.
    fn ordered_components(&self) -> Vec<Vec<usize>> {
        let n = self.pin.len();
        let mut comp = vec![UNSET; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            if comp[start] != UNSET {
                continue;
            }
            let id = comps.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let e = members[i];
                i += 1;
                for &ti in &self.incident[e] {
                    for &f in self.src_tuples[ti].1 {
                        if comp[f] == UNSET {
                            comp[f] = id;
                            members.push(f);
                        }
                    }
                }
            }
            comps.push(members);
        }

        comps
            .into_iter()
            .map(|members| {
                let mut placed = vec![false; n];
                let mut order = Vec::with_capacity(members.len());
                for &e in &members {
                    if self.pin[e] != UNSET {
                        placed[e] = true;
                        order.push(e);
                    }
                }
                while order.len() < members.len() {
                    let best = members
                        .iter()
                        .copied()
                        .filter(|&e| !placed[e])
                        .max_by_key(|&e| {
                            let tied = self.incident[e]
                                .iter()
                                .filter(|&&ti| self.src_tuples[ti].1.iter().any(|&f| placed[f]))
                                .count();
                            (tied, self.incident[e].len(), std::cmp::Reverse(e))
                        })
                        .expect("some element left");
                    placed[best] = true;
                    order.push(best);
                }
                order
            })
            .collect()
    }

    /// Candidate images for `e` given the partial map.
    fn candidates(&self, e: usize, map: &[usize]) -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        for &ti in &self.incident[e] {
            let (r, t) = self.src_tuples[ti];
            let mut anchor: Option<(usize, usize, usize)> = None;
            for (p, &f) in t.iter().enumerate() {
                if map[f] == UNSET {
                    continue;
                }
                let len = self.dst_index[r].get(&(p, map[f])).map_or(0, Vec::len);
                if anchor.is_none_or(|(l, _, _)| len < l) {
                    anchor = Some((len, p, f));
                }
            }
            let Some((_, p, f)) = anchor else {
                continue;
            };
            let mut values = Vec::new();
            let mut marked = vec![false; self.dst_len];
            if let Some(list) = self.dst_index[r].get(&(p, map[f])) {
                'tuple: for &di in list {
                    let d = self.dst_tuples[r][di];
                    let mut value = UNSET;
                    for (q, &g) in t.iter().enumerate() {
                        if g == e {
                            if value == UNSET {
                                value = d[q];
                            } else if value != d[q] {
                                continue 'tuple;
                            }
                        } else if map[g] != UNSET && map[g] != d[q] {
                            continue 'tuple;
                        }
                    }
                    if !marked[value] {
                        marked[value] = true;
                        values.push(value);
                    }
                }
            }
            if best.as_ref().is_none_or(|b| values.len() < b.len()) {
                best = Some(values);
            }
        }
        best.unwrap_or_else(|| (0..self.dst_len).collect())
    }

    fn consistent(&self, e: usize, map: &[usize]) -> bool {
        let mut image = Vec::new();
        self.incident[e].iter().all(|&ti| {
            let (r, t) = self.src_tuples[ti];
            if t.iter().any(|&f| map[f] == UNSET) {
                return true;
            }
            image.clear();
            image.extend(t.iter().map(|&f| map[f]));
            self.dst_sets[r].contains(image.as_slice())
        })
    }

    fn initial_map(&self) -> Vec<usize> {
        self.pin.clone()
    }

    fn count_component(&self, order: &[usize], depth: usize, map: &mut Vec<usize>) -> BigInt {
        if depth == order.len() {
            return BigInt::one();
        }
        let e = order[depth];
        if self.pin[e] != UNSET {
            return self.count_component(order, depth + 1, map);
        }
        let mut total = BigInt::zero();
        for v in self.candidates(e, map) {
            map[e] = v;
            if self.consistent(e, map) {
                total += self.count_component(order, depth + 1, map);
            }
        }
        map[e] = UNSET;
        total
    }

    pub fn count(&self) -> BigInt {
        if self.impossible {
            return BigInt::zero();
        }
        let mut map = self.initial_map();
        let mut total = BigInt::one();
        for order in &self.components {
            let c = self.count_component(order, 0, &mut map);
            if c.is_zero() {
                return c;
            }
            total *= c;
        }
        total
    }

    fn walk<F>(&self, order: &[usize], depth: usize, map: &mut Vec<usize>, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if depth == order.len() {
            return f(map);
        }
        let e = order[depth];
        if self.pin[e] != UNSET {
            return self.walk(order, depth + 1, map, f);
        }
        for v in self.candidates(e, map) {
            map[e] = v;
            if self.consistent(e, map) {
                self.walk(order, depth + 1, map, f)?;
            }
        }
        map[e] = UNSET;
        ControlFlow::Continue(())
    }

    /// Visits every homomorphism as a dense map until `f` breaks.
    pub fn for_each<F>(&self, mut f: F)
    where
        F: FnMut(&[usize]) -> ControlFlow<()>,
    {
        if self.impossible {
            return;
        }
        // Components whose search fails make the whole product empty, so
        // find one witness per component before enumerating the product.
        let mut map = self.initial_map();
        for order in &self.components {
            let mut found = false;
            let _ = self.walk(order, 0, &mut map, &mut |_| {
                found = true;
                ControlFlow::Break(())
            });
            if !found {
                return;
            }
            for &e in order {
                if self.pin[e] == UNSET {
                    map[e] = UNSET;
                }
            }
        }
        let order: Vec<usize> = self.components.concat();
        let _ = self.walk(&order, 0, &mut map, &mut f);
    }

    pub fn find(&self) -> Option<Vec<usize>> {
        if self.impossible {
            return None;
        }
        let mut map = self.initial_map();
        for order in &self.components {
            let mut hit = None;
            let _ = self.walk(order, 0, &mut map, &mut |m| {
                hit = Some(m.to_vec());
                ControlFlow::Break(())
            });
            let hit = hit?;
            for &e in order {
                map[e] = hit[e];
            }
        }
        Some(map)
    }
}

fn pin_indices(src: &Structure, dst: &Structure, pin: &Assignment) -> Result<Vec<(usize, usize)>> {
    pin.bindings
        .iter()
        .map(|(s, d)| {
            let si = src
                .position(s)
                .ok_or_else(|| Error::pre(format!("pinned element {s} not in source")))?;
            let di = dst
                .position(d)
                .ok_or_else(|| Error::pre(format!("pinned image {d} not in target")))?;
            Ok((si, di))
        })
        .collect()
}

/// Number of homomorphisms `src -> dst` extending `pin`.
pub fn homomorphisms(src: &Structure, dst: &Structure, pin: &Assignment) -> Result<BigInt> {
    let pin = pin_indices(src, dst, pin)?;
    count_homomorphisms(src, dst, &pin)
}

pub fn count_homomorphisms(src: &Structure, dst: &Structure, pin: &[(usize, usize)]) -> Result<BigInt> {
    Ok(HomProblem::new(src, dst, pin)?.count())
}

pub fn find_homomorphism(
    src: &Structure,
    dst: &Structure,
    pin: &[(usize, usize)],
) -> Result<Option<Vec<usize>>> {
    Ok(HomProblem::new(src, dst, pin)?.find())
}

pub fn for_each_homomorphism<F>(src: &Structure, dst: &Structure, pin: &[(usize, usize)], f: F) -> Result<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    HomProblem::new(src, dst, pin)?.for_each(f);
    Ok(())
}
