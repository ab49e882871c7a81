//! Brute-force answer counting, kept independent of the compiler.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::Zero;

use super::{EpFormula, LiberalQuery};
use crate::relstore::Structure;
use crate::{Error, Limits, Result};

enum Node {
    Atom(usize, Vec<usize>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Exists(usize, Box<Node>),
    Top,
}

struct Compiler<'a> {
    b: &'a Structure,
    slots: HashMap<String, usize>,
    rels: Vec<HashSet<Vec<usize>>>,
    rel_ids: HashMap<String, usize>,
}

impl Compiler<'_> {
    fn slot(&mut self, v: &str) -> usize {
        let n = self.slots.len();
        *self.slots.entry(v.to_string()).or_insert(n)
    }

    fn node(&mut self, f: &EpFormula) -> Result<Node> {
        Ok(match f {
            EpFormula::Atom(a) => {
                let arity = self.b.signature().arity(&a.rel).ok_or_else(|| {
                    Error::Signature(format!("structure lacks symbol {}", a.rel))
                })?;
                if arity != a.args.len() {
                    return Err(Error::Signature(format!(
                        "{} has arity {arity} in the structure",
                        a.rel
                    )));
                }
                let id = match self.rel_ids.get(&a.rel) {
                    Some(&id) => id,
                    None => {
                        let set = self.b.relation(&a.rel).expect("declared").iter().cloned().collect();
                        self.rels.push(set);
                        self.rel_ids.insert(a.rel.clone(), self.rels.len() - 1);
                        self.rels.len() - 1
                    }
                };
                Node::Atom(id, a.args.iter().map(|v| self.slot(v)).collect())
            }
            EpFormula::And(l, r) => Node::And(Box::new(self.node(l)?), Box::new(self.node(r)?)),
            EpFormula::Or(l, r) => Node::Or(Box::new(self.node(l)?), Box::new(self.node(r)?)),
            EpFormula::Exists(v, b) => {
                let s = self.slot(v);
                Node::Exists(s, Box::new(self.node(b)?))
            }
            EpFormula::Top => Node::Top,
        })
    }
}

fn holds(n: &Node, env: &mut [usize], rels: &[HashSet<Vec<usize>>], size: usize, buf: &mut Vec<usize>) -> bool {
    match n {
        Node::Atom(r, args) => {
            buf.clear();
            buf.extend(args.iter().map(|&s| env[s]));
            rels[*r].contains(buf.as_slice())
        }
        Node::And(l, r) => holds(l, env, rels, size, buf) && holds(r, env, rels, size, buf),
        Node::Or(l, r) => holds(l, env, rels, size, buf) || holds(r, env, rels, size, buf),
        Node::Exists(s, b) => {
            let saved = env[*s];
            let found = (0..size).any(|v| {
                env[*s] = v;
                holds(b, env, rels, size, buf)
            });
            env[*s] = saved;
            found
        }
        Node::Top => true,
    }
}

/// Counts assignments of the liberal variables satisfying the formula by
/// enumerating all `|B|^|L|` of them.
pub fn oracle_count(q: &LiberalQuery, b: &Structure, limits: &Limits) -> Result<BigInt> {
    let size = b.len();
    let needed = (size as f64).powi(q.liberal.len() as i32);
    if needed > limits.max_oracle as f64 {
        return Err(Error::cap(
            "oracle enumeration",
            format!("{size}^{}", q.liberal.len()),
            limits.max_oracle,
        ));
    }
    let mut c = Compiler {
        b,
        slots: HashMap::new(),
        rels: Vec::new(),
        rel_ids: HashMap::new(),
    };
    for v in &q.liberal {
        c.slot(v);
    }
    let root = c.node(&q.formula)?;
    let free = q.liberal.len();
    let mut env = vec![0usize; c.slots.len()];
    if size == 0 {
        return Ok(BigInt::zero());
    }
    let mut count = 0u64;
    let mut buf = Vec::new();
    loop {
        if holds(&root, &mut env, &c.rels, size, &mut buf) {
            count += 1;
        }
        let mut i = 0;
        while i < free {
            env[i] += 1;
            if env[i] < size {
                break;
            }
            env[i] = 0;
            i += 1;
        }
        if i == free {
            break;
        }
    }
    Ok(BigInt::from(count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epquery::parse_query;
    use crate::relstore::parse_structure;

    fn count(q: &str, b: &str) -> BigInt {
        oracle_count(
            &parse_query(q).unwrap(),
            &parse_structure(b).unwrap(),
            &Limits::default(),
        )
        .unwrap()
    }

    #[test]
    fn theta_two_is_product_of_unary_sizes() {
        let b = "signature U1/1 U2/1\nuniverse a b\nU1(a)\nU1(b)\nU2(b)\n";
        assert_eq!(count("query t(x1,x2): U1(x1) & U2(x2)", b), BigInt::from(2));
    }

    #[test]
    fn liberal_padding_multiplies() {
        let b = "signature E/2\nuniverse a b c\nE(a,b)\n";
        assert_eq!(count("query q(x,y,z): E(x,y)", b), BigInt::from(3));
        assert_eq!(count("query q(): exists x . E(x,x)", b), BigInt::from(0));
        assert_eq!(count("query q(): true", b), BigInt::from(1));
    }

    #[test]
    fn guard_refuses_large_enumerations() {
        let q = parse_query("query q(a,b,c): E(a,b) & E(b,c)").unwrap();
        let b = parse_structure("signature E/2\nuniverse p q r s\n").unwrap();
        let tight = Limits {
            max_oracle: 10,
            ..Limits::default()
        };
        assert!(matches!(oracle_count(&q, &b, &tight), Err(Error::Cap { .. })));
    }

    #[test]
    fn missing_symbol_is_a_signature_error() {
        let q = parse_query("query q(a): F(a)").unwrap();
        let b = parse_structure("signature E/2\nuniverse p\n").unwrap();
        assert!(matches!(oracle_count(&q, &b, &Limits::default()), Err(Error::Signature(_))));
    }
}
