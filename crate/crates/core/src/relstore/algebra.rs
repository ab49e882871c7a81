//! Product, disjoint union and the action of polynomials on structures.

use std::collections::HashSet;

use super::{Signature, Structure};
use crate::{Error, Result};

fn same_signature(a: &Structure, b: &Structure) -> Result<()> {
    if a.signature() != b.signature() {
        return Err(Error::Signature("operands have different signatures".into()));
    }
    Ok(())
}

/// Makes `name` unique against `taken` by repeating `suffix`.
fn unique(mut name: String, suffix: &str, taken: &HashSet<String>) -> String {
    while taken.contains(&name) {
        name.push_str(suffix);
    }
    name
}

/// Categorical product; element `(a, b)` is named `a*b`.
pub fn product(a: &Structure, b: &Structure) -> Result<Structure> {
    same_signature(a, b)?;
    let mut out = Structure::new(a.signature().clone());
    let mut taken = HashSet::new();
    for x in a.elements() {
        for y in b.elements() {
            let name = unique(format!("{x}*{y}"), "'", &taken);
            taken.insert(name.clone());
            out.add_element(&name);
        }
    }
    let m = b.len();
    for (rel, ta) in a.relations() {
        let tb = b.relation(rel).expect("same signature");
        for s in ta {
            for t in tb {
                let pair = s.iter().zip(t).map(|(&x, &y)| x * m + y).collect();
                out.add_tuple_idx(rel, pair)?;
            }
        }
    }
    Ok(out)
}

/// Disjoint union; clashing names get `#L` on the left and `#R` on the right.
pub fn disjoint_union(a: &Structure, b: &Structure) -> Result<Structure> {
    same_signature(a, b)?;
    let left: HashSet<&str> = a.elements().iter().map(String::as_str).collect();
    let right: HashSet<&str> = b.elements().iter().map(String::as_str).collect();
    let mut taken: HashSet<String> = left
        .iter()
        .chain(right.iter())
        .map(|s| s.to_string())
        .collect();
    let mut out = Structure::new(a.signature().clone());
    for x in a.elements() {
        let name = if right.contains(x.as_str()) {
            unique(format!("{x}#L"), "#L", &taken)
        } else {
            x.clone()
        };
        taken.insert(name.clone());
        out.add_element(&name);
    }
    for y in b.elements() {
        let name = if left.contains(y.as_str()) {
            unique(format!("{y}#R"), "#R", &taken)
        } else {
            y.clone()
        };
        taken.insert(name.clone());
        out.add_element(&name);
    }
    let shift = a.len();
    for (rel, ta) in a.relations() {
        for t in ta {
            out.add_tuple_idx(rel, t.clone())?;
        }
        for t in b.relation(rel).expect("same signature") {
            out.add_tuple_idx(rel, t.iter().map(|&y| y + shift).collect())?;
        }
    }
    Ok(out)
}

/// One element carrying the all-loop tuple in every relation.
pub fn unit_structure(sig: &Signature) -> Structure {
    let mut out = Structure::new(sig.clone());
    out.add_element("1");
    for (rel, arity) in sig.symbols() {
        out.add_tuple_idx(rel, vec![0; arity]).expect("declared");
    }
    out
}

fn copies(n: u64, sig: &Signature) -> Result<Option<Structure>> {
    let unit = unit_structure(sig);
    let mut acc: Option<Structure> = None;
    for _ in 0..n {
        acc = Some(match acc {
            None => unit.clone(),
            Some(s) => disjoint_union(&s, &unit)?,
        });
    }
    Ok(acc)
}

/// Evaluates `coeffs[0] + coeffs[1]·X + …` at `b` by Horner's rule, with
/// `1` read as the unit structure, `+` as disjoint union and `·` as product.
pub fn poly_action(coeffs: &[i64], b: &Structure) -> Result<Structure> {
    if let Some(c) = coeffs.iter().find(|&&c| c < 0) {
        return Err(Error::pre(format!("negative coefficient {c}")));
    }
    let sig = b.signature();
    let mut acc: Option<Structure> = None;
    for &c in coeffs.iter().rev() {
        if let Some(s) = acc.take() {
            acc = Some(product(&s, b)?);
        }
        if let Some(k) = copies(c as u64, sig)? {
            acc = Some(match acc {
                None => k,
                Some(s) => disjoint_union(&s, &k)?,
            });
        }
    }
    acc.ok_or_else(|| Error::pre("the zero polynomial has no structure"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relstore::{count_homomorphisms, parse_structure};
    use num_bigint::BigInt;

    fn graph() -> Structure {
        parse_structure("signature E/2\nE(a,b)\nE(b,b)\nE(b,c)\n").unwrap()
    }

    #[test]
    fn product_sizes_multiply() {
        let g = graph();
        let p = product(&g, &g).unwrap();
        assert_eq!(p.len(), 9);
        assert_eq!(p.tuple_count(), 9);
        assert_eq!(p.name(1), "a*b");
    }

    #[test]
    fn disjoint_union_renames_clashes() {
        let g = graph();
        let u = disjoint_union(&g, &g).unwrap();
        assert_eq!(u.len(), 6);
        assert_eq!(u.tuple_count(), 6);
        assert_eq!(u.name(0), "a#L");
        assert_eq!(u.name(3), "a#R");
    }

    #[test]
    fn identity_polynomial_reproduces_structure_up_to_names() {
        let g = graph();
        let x = poly_action(&[0, 1], &g).unwrap();
        assert_eq!(x.len(), g.len());
        assert_eq!(x.tuple_count(), g.tuple_count());
        assert_eq!(x.elements(), ["1*a", "1*b", "1*c"]);
    }

    #[test]
    fn polynomial_sizes() {
        let g = graph();
        assert_eq!(poly_action(&[1], &g).unwrap().len(), 1);
        assert_eq!(poly_action(&[1, 1, 1], &g).unwrap().len(), 13);
        assert_eq!(poly_action(&[0, 0, 1], &g).unwrap().len(), 9);
        assert!(poly_action(&[1, -1], &g).is_err());
        assert!(poly_action(&[0], &g).is_err());
    }

    #[test]
    fn hom_counts_respect_the_algebra() {
        // hom(A, B x C) = hom(A, B) * hom(A, C) and hom(A, B + C) = hom(A,B) + hom(A,C) for connected A.
        let a = parse_structure("signature E/2\nE(x,y)\nE(y,z)\n").unwrap();
        let b = graph();
        let c = parse_structure("signature E/2\nE(p,q)\nE(q,p)\n").unwrap();
        let hb = count_homomorphisms(&a, &b, &[]).unwrap();
        let hc = count_homomorphisms(&a, &c, &[]).unwrap();
        let prod = count_homomorphisms(&a, &product(&b, &c).unwrap(), &[]).unwrap();
        let sum = count_homomorphisms(&a, &disjoint_union(&b, &c).unwrap(), &[]).unwrap();
        assert_eq!(prod, &hb * &hc);
        assert_eq!(sum, hb + hc);
        assert_eq!(count_homomorphisms(&a, &unit_structure(b.signature()), &[]).unwrap(), BigInt::from(1));
    }
}
