//! The `.rel` text format.

use super::{Signature, Structure};
use crate::syntax::Cursor;
use crate::{Error, Result};

struct Fact {
    line: usize,
    col: usize,
    rel: String,
    args: Vec<(String, usize, usize)>,
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let mut cur = Cursor::new(text);
    let mut sig = Signature::new();
    let mut seen_signature = false;
    let mut universe: Option<Vec<String>> = None;
    let mut facts = Vec::new();

    while !cur.at_eof() {
        if cur.keyword("signature") {
            seen_signature = true;
            loop {
                cur.skip_space(false);
                if matches!(cur.peek(), None | Some('\n')) {
                    break;
                }
                let (line, col) = cur.pos();
                let name = cur.ident()?;
                cur.skip_space(false);
                if cur.peek() != Some('/') {
                    return Err(cur.unexpected("'/'"));
                }
                cur.bump();
                let arity: usize = cur
                    .integer()?
                    .parse()
                    .map_err(|_| Error::parse(line, col, "bad arity"))?;
                sig.add(&name, arity)
                    .map_err(|e| Error::parse(line, col, e.to_string()))?;
            }
        } else if cur.keyword("universe") {
            let names = universe.get_or_insert_with(Vec::new);
            loop {
                cur.skip_space(false);
                if matches!(cur.peek(), None | Some('\n')) {
                    break;
                }
                names.push(cur.element()?);
            }
        } else {
            let (line, col) = cur.pos();
            let rel = cur.ident()?;
            cur.expect('(')?;
            let mut args = Vec::new();
            loop {
                cur.ws();
                let (l, c) = cur.pos();
                args.push((cur.element()?, l, c));
                if cur.eat(')') {
                    break;
                }
                cur.expect(',')?;
            }
            facts.push(Fact {
                line,
                col,
                rel,
                args,
            });
        }
    }

    if !seen_signature && !facts.is_empty() {
        return Err(Error::parse(1, 1, "missing signature line"));
    }
    let mut out = Structure::new(sig);
    let declared = universe.is_some();
    for e in universe.iter().flatten() {
        out.add_element(e);
    }
    for f in &facts {
        let arity = out
            .signature()
            .arity(&f.rel)
            .ok_or_else(|| Error::parse(f.line, f.col, format!("undeclared symbol {}", f.rel)))?;
        if arity != f.args.len() {
            return Err(Error::parse(
                f.line,
                f.col,
                format!(
                    "arity mismatch: {} has arity {arity}, got {}",
                    f.rel,
                    f.args.len()
                ),
            ));
        }
        let mut tuple = Vec::with_capacity(arity);
        for (name, l, c) in &f.args {
            let idx = match out.position(name) {
                Some(i) => i,
                None if declared => {
                    return Err(Error::parse(*l, *c, format!("unknown element {name}")))
                }
                None => out.add_element(name),
            };
            tuple.push(idx);
        }
        out.add_tuple_idx(&f.rel, tuple)?;
    }
    if out.is_empty() {
        return Err(Error::parse(cur.line(), 1, "empty universe"));
    }
    Ok(out)
}

/// Signature line, universe line, then facts in lexicographic order.
pub fn serialize_structure(a: &Structure) -> String {
    let mut out = String::from("signature");
    for (n, k) in a.signature().symbols() {
        out.push_str(&format!(" {n}/{k}"));
    }
    out.push_str("\nuniverse");
    for e in a.elements() {
        out.push(' ');
        out.push_str(e);
    }
    out.push('\n');
    let mut facts: Vec<(&str, Vec<&str>)> = a
        .relations()
        .flat_map(|(rel, ts)| {
            ts.iter()
                .map(move |t| (rel, t.iter().map(|&e| a.name(e)).collect()))
        })
        .collect();
    facts.sort();
    for (rel, args) in facts {
        out.push_str(&format!("{rel}({})\n", args.join(",")));
    }
    out
}
