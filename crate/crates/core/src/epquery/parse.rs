//! The `.epq` query format.

use super::{Atom, EpFormula, LiberalQuery};
use crate::relstore::Signature;
use crate::syntax::{is_ident_char, is_ident_start, Cursor};
use crate::{Error, Fresh, Result, Var, VarSet};

struct Parser<'c, 'a> {
    cur: &'c mut Cursor<'a>,
    header: Option<VarSet>,
    scopes: Vec<(String, Var)>,
    used_bound: VarSet,
    fresh: Fresh,
    sig: Signature,
}

/// Parses `query name(x,y): body`, renaming repeated binders apart.
pub fn parse_query(text: &str) -> Result<LiberalQuery> {
    let mut cur = Cursor::new(text);
    if !cur.keyword("query") {
        return Err(cur.unexpected("'query'"));
    }
    let name = cur.ident()?;
    cur.expect('(')?;
    let mut header = VarSet::new();
    if !cur.eat(')') {
        loop {
            header.insert(cur.ident()?);
            if cur.eat(')') {
                break;
            }
            cur.expect(',')?;
        }
    }
    cur.expect(':')?;
    let mut p = Parser::new(&mut cur, Some(header), text);
    let formula = p.expr()?;
    let liberal = p.header.take().expect("header");
    if !cur.at_eof() {
        return Err(cur.unexpected("end of query"));
    }
    Ok(LiberalQuery {
        name,
        formula,
        liberal,
    })
}

/// Parses a formula without a header; unbound variables are free.
pub fn parse_formula(text: &str) -> Result<EpFormula> {
    let mut cur = Cursor::new(text);
    let f = parse_formula_at(&mut cur, text)?;
    if !cur.at_eof() {
        return Err(cur.unexpected("end of formula"));
    }
    Ok(f)
}

/// Parses one formula from `cur` and renames binders apart from its free
/// variables; `source` is the whole input, whose names fresh binders avoid.
pub(crate) fn parse_formula_at(cur: &mut Cursor, source: &str) -> Result<EpFormula> {
    let mut p = Parser::new(cur, None, source);
    let f = p.expr()?;
    let mut fresh = p.fresh;
    Ok(f.rename_apart(&VarSet::new(), &mut fresh))
}

fn identifiers(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if is_ident_start(c) {
            let mut end = i + c.len_utf8();
            while let Some(&(j, d)) = chars.peek() {
                if !is_ident_char(d) {
                    break;
                }
                end = j + d.len_utf8();
                chars.next();
            }
            out.push(text[i..end].to_string());
        }
    }
    out
}

impl<'c, 'a> Parser<'c, 'a> {
    fn new(cur: &'c mut Cursor<'a>, header: Option<VarSet>, source: &str) -> Self {
        Parser {
            cur,
            header,
            scopes: Vec::new(),
            used_bound: VarSet::new(),
            fresh: Fresh::avoiding(identifiers(source)),
            sig: Signature::new(),
        }
    }

    fn expr(&mut self) -> Result<EpFormula> {
        let mut left = self.conj()?;
        while self.cur.eat('|') {
            let right = self.conj()?;
            left = EpFormula::or(left, right);
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<EpFormula> {
        let mut left = self.unary()?;
        while self.cur.eat('&') {
            let right = self.unary()?;
            left = EpFormula::and(left, right);
        }
        Ok(left)
    }

    fn followed_by_paren(&mut self, word: &str) -> bool {
        self.cur.peek_ident() == Some(word)
            && self.cur.rest()[word.len()..].trim_start().starts_with('(')
    }

    fn unary(&mut self) -> Result<EpFormula> {
        if self.cur.eat('(') {
            let f = self.expr()?;
            self.cur.expect(')')?;
            return Ok(f);
        }
        if !self.followed_by_paren("true") && self.cur.keyword("true") {
            return Ok(EpFormula::Top);
        }
        if !self.followed_by_paren("exists") && self.cur.keyword("exists") {
            return self.quantified();
        }
        self.atom()
    }

    fn quantified(&mut self) -> Result<EpFormula> {
        let mut vars = Vec::new();
        loop {
            self.cur.ws();
            let (line, col) = self.cur.pos();
            let v = self.cur.ident()?;
            if self.header.as_ref().is_some_and(|h| h.contains(&v)) {
                return Err(Error::parse(
                    line,
                    col,
                    format!("header variable {v} is quantified in the body"),
                ));
            }
            let renamed = if self.used_bound.contains(&v) {
                self.fresh.name(&v)
            } else {
                v.clone()
            };
            self.used_bound.insert(v.clone());
            self.used_bound.insert(renamed.clone());
            vars.push((v, renamed));
            self.cur.eat(',');
            if self.cur.eat('.') {
                break;
            }
        }
        let depth = self.scopes.len();
        self.scopes.extend(vars.iter().cloned());
        let body = self.expr()?;
        self.scopes.truncate(depth);
        Ok(vars
            .into_iter()
            .rev()
            .fold(body, |acc, (_, v)| EpFormula::Exists(v, Box::new(acc))))
    }

    fn resolve(&self, v: &str, line: usize, col: usize) -> Result<Var> {
        if let Some((_, renamed)) = self.scopes.iter().rev().find(|(orig, _)| orig == v) {
            return Ok(renamed.clone());
        }
        match &self.header {
            None => return Ok(v.to_string()),
            Some(h) if h.contains(v) => return Ok(v.to_string()),
            Some(_) => {}
        }
        Err(Error::parse(
            line,
            col,
            format!("free variable {v} is not in the header"),
        ))
    }

    fn atom(&mut self) -> Result<EpFormula> {
        self.cur.ws();
        let (line, col) = self.cur.pos();
        let rel = self.cur.ident()?;
        self.cur.expect('(')?;
        let mut args = Vec::new();
        loop {
            self.cur.ws();
            let (l, c) = self.cur.pos();
            let v = self.cur.ident()?;
            args.push(self.resolve(&v, l, c)?);
            if self.cur.eat(')') {
                break;
            }
            self.cur.expect(',')?;
        }
        self.sig
            .add(&rel, args.len())
            .map_err(|e| Error::parse(line, col, e.to_string()))?;
        Ok(EpFormula::Atom(Atom { rel, args }))
    }
}
