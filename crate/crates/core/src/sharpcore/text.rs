//! The `.shq` text format.

use num_bigint::BigInt;

use super::SharpFormula;
use crate::epquery::parse_formula_at;
use crate::syntax::Cursor;
use crate::{Error, Result, VarSet};

/// Parses a `#`-formula. Inside parentheses `*` binds tighter than `+` and
/// chains associate to the left.
pub fn parse_sharp(text: &str) -> Result<SharpFormula> {
    let mut cur = Cursor::new(text);
    let f = primary(&mut cur, text)?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of input"));
    }
    Ok(f)
}

fn var_set(cur: &mut Cursor) -> Result<VarSet> {
    cur.expect('{')?;
    let mut out = VarSet::new();
    if cur.eat('}') {
        return Ok(out);
    }
    loop {
        out.insert(cur.ident()?);
        if cur.eat('}') {
            return Ok(out);
        }
        cur.expect(',')?;
    }
}

fn followed_by(cur: &mut Cursor, word: &str, next: char) -> bool {
    cur.peek_ident() == Some(word) && cur.rest()[word.len()..].trim_start().starts_with(next)
}

fn primary(cur: &mut Cursor, src: &str) -> Result<SharpFormula> {
    cur.ws();
    if followed_by(cur, "C", '[') {
        cur.keyword("C");
        cur.expect('[')?;
        let ep = parse_formula_at(cur, src)?;
        cur.expect(';')?;
        let l = var_set(cur)?;
        cur.expect(']')?;
        return Ok(SharpFormula::Cast(ep, l));
    }
    if followed_by(cur, "P", '{') {
        cur.keyword("P");
        let v = var_set(cur)?;
        return Ok(SharpFormula::project(v, primary(cur, src)?));
    }
    if followed_by(cur, "E", '{') {
        cur.keyword("E");
        let v = var_set(cur)?;
        return Ok(SharpFormula::expand(v, primary(cur, src)?));
    }
    if cur.eat('(') {
        let f = sum(cur, src)?;
        cur.expect(')')?;
        return Ok(f);
    }
    match cur.peek() {
        Some(c) if c == '-' || c.is_ascii_digit() => {
            let (line, col) = cur.pos();
            let digits = cur.integer()?;
            let n: BigInt = digits
                .parse()
                .map_err(|_| Error::parse(line, col, "bad integer"))?;
            Ok(SharpFormula::Const(n))
        }
        _ => Err(cur.unexpected("C[, P{, E{, '(' or an integer")),
    }
}

fn sum(cur: &mut Cursor, src: &str) -> Result<SharpFormula> {
    let mut acc = product(cur, src)?;
    while cur.eat('+') {
        acc = SharpFormula::plus(acc, product(cur, src)?);
    }
    Ok(acc)
}

fn product(cur: &mut Cursor, src: &str) -> Result<SharpFormula> {
    let mut acc = primary(cur, src)?;
    while cur.eat('*') {
        acc = SharpFormula::times(acc, primary(cur, src)?);
    }
    Ok(acc)
}

pub fn serialize_sharp(f: &SharpFormula) -> String {
    f.to_string()
}
