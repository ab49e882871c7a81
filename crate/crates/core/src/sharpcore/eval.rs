//! Bottom-up evaluation with tables whose size is bounded by the width.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::SharpFormula;
use crate::epquery::EpFormula;
use crate::relstore::Structure;
use crate::{Error, Limits, Result, Var, VarSet};

/// Values of a formula on all assignments of its free variables. Absent
/// rows are zero; rows are keyed by element indices in `variables` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub variables: Vec<Var>,
    pub rows: BTreeMap<Vec<usize>, BigInt>,
}

impl CountTable {
    pub fn get(&self, row: &[usize]) -> BigInt {
        self.rows.get(row).cloned().unwrap_or_default()
    }

    /// One `x=a y=b : n` line per row.
    pub fn render(&self, b: &Structure) -> String {
        let mut out = String::new();
        for (row, n) in &self.rows {
            let parts: Vec<String> = self
                .variables
                .iter()
                .zip(row)
                .map(|(v, &e)| format!("{v}={}", b.name(e)))
                .collect();
            out.push_str(&format!("{} : {n}\n", parts.join(" ")));
        }
        out
    }
}

/// Sizes of the tables built during one evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub tables: usize,
    pub max_rows: usize,
    pub total_rows: u64,
}

/// Weighted table. Variables in `wild` are free but the value does not
/// depend on them, so they are not stored.
struct Table {
    cols: Vec<Var>,
    wild: VarSet,
    rows: HashMap<Vec<usize>, BigInt>,
}

/// Set of assignments to `cols`.
struct Rel {
    cols: Vec<Var>,
    tuples: HashSet<Vec<usize>>,
}

pub struct Evaluator<'a> {
    b: &'a Structure,
    limits: &'a Limits,
    stats: EvalStats,
}

fn positions(cols: &[Var], of: &[Var]) -> Vec<usize> {
    of.iter()
        .map(|v| cols.iter().position(|c| c == v).expect("column present"))
        .collect()
}

impl<'a> Evaluator<'a> {
    pub fn new(b: &'a Structure, limits: &'a Limits) -> Self {
        Evaluator {
            b,
            limits,
            stats: EvalStats::default(),
        }
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }

    fn guard(&self, rows: usize) -> Result<()> {
        if rows as u64 > self.limits.max_rows {
            return Err(Error::cap("table rows", rows, self.limits.max_rows));
        }
        Ok(())
    }

    fn record(&mut self, rows: usize) {
        self.stats.tables += 1;
        self.stats.max_rows = self.stats.max_rows.max(rows);
        self.stats.total_rows += rows as u64;
    }

    /// Full table over the free variables, sorted by variable name.
    pub fn evaluate(&mut self, f: &SharpFormula) -> Result<CountTable> {
        let scope = f.validate()?;
        let t = self.table(f)?;
        let t = self.materialize(t, &scope.free)?;
        let variables: Vec<Var> = scope.free.iter().cloned().collect();
        let idx = positions(&t.cols, &variables);
        let rows = t
            .rows
            .into_iter()
            .filter(|(_, n)| !n.is_zero())
            .map(|(r, n)| (idx.iter().map(|&i| r[i]).collect(), n))
            .collect();
        Ok(CountTable { variables, rows })
    }

    /// Value of a sentence.
    pub fn eval_sentence(&mut self, f: &SharpFormula) -> Result<BigInt> {
        let scope = f.validate()?;
        if !scope.free.is_empty() {
            return Err(Error::pre("formula has free variables"));
        }
        let t = self.table(f)?;
        Ok(t.rows.get(&Vec::new()).cloned().unwrap_or_default())
    }

    fn materialize(&mut self, mut t: Table, which: &VarSet) -> Result<Table> {
        let add: Vec<Var> = t.wild.intersection(which).cloned().collect();
        if add.is_empty() {
            return Ok(t);
        }
        let n = self.b.len();
        let needed = t.rows.len().saturating_mul(n.saturating_pow(add.len() as u32));
        self.guard(needed)?;
        let mut rows = HashMap::with_capacity(needed);
        for (row, val) in t.rows {
            let mut ext = vec![0usize; add.len()];
            loop {
                let mut r = row.clone();
                r.extend_from_slice(&ext);
                rows.insert(r, val.clone());
                if !odometer(&mut ext, n) {
                    break;
                }
            }
        }
        for v in &add {
            t.wild.remove(v);
        }
        t.cols.extend(add);
        t.rows = rows;
        self.record(t.rows.len());
        Ok(t)
    }

    fn table(&mut self, f: &SharpFormula) -> Result<Table> {
        let t = match f {
            SharpFormula::Const(n) => {
                let mut rows = HashMap::new();
                if !n.is_zero() {
                    rows.insert(Vec::new(), n.clone());
                }
                Table {
                    cols: Vec::new(),
                    wild: VarSet::new(),
                    rows,
                }
            }
            SharpFormula::Cast(ep, l) => {
                let rel = self.fo(ep)?;
                let wild = l.iter().filter(|v| !rel.cols.contains(v)).cloned().collect();
                Table {
                    cols: rel.cols,
                    wild,
                    rows: rel.tuples.into_iter().map(|r| (r, BigInt::one())).collect(),
                }
            }
            SharpFormula::Expand(v, body) => {
                let mut t = self.table(body)?;
                t.wild.extend(v.iter().cloned());
                return Ok(t);
            }
            SharpFormula::Project(v, body) => {
                let t = self.table(body)?;
                self.project(t, v)?
            }
            SharpFormula::Times(l, r) => {
                let (a, b) = (self.table(l)?, self.table(r)?);
                self.join(a, b)?
            }
            SharpFormula::Plus(l, r) => {
                let (a, b) = (self.table(l)?, self.table(r)?);
                self.add(a, b)?
            }
        };
        self.record(t.rows.len());
        Ok(t)
    }

    fn project(&mut self, t: Table, vars: &VarSet) -> Result<Table> {
        let mut factor_exp = 0u32;
        let mut wild = t.wild;
        for v in vars {
            if !t.cols.contains(v) {
                wild.remove(v);
                factor_exp += 1;
            }
        }
        let keep: Vec<usize> = (0..t.cols.len()).filter(|&i| !vars.contains(&t.cols[i])).collect();
        let cols: Vec<Var> = keep.iter().map(|&i| t.cols[i].clone()).collect();
        let factor = BigInt::from(self.b.len()).pow(factor_exp);
        let mut rows: HashMap<Vec<usize>, BigInt> = HashMap::new();
        for (row, val) in t.rows {
            let key: Vec<usize> = keep.iter().map(|&i| row[i]).collect();
            *rows.entry(key).or_default() += val;
        }
        rows.retain(|_, n| !n.is_zero());
        if !factor.is_one() {
            for n in rows.values_mut() {
                *n *= &factor;
            }
        }
        Ok(Table { cols, wild, rows })
    }

    fn join(&mut self, a: Table, b: Table) -> Result<Table> {
        let (small, large) = if a.rows.len() <= b.rows.len() { (a, b) } else { (b, a) };
        let shared: Vec<Var> = small.cols.iter().filter(|c| large.cols.contains(c)).cloned().collect();
        let ks = positions(&small.cols, &shared);
        let kl = positions(&large.cols, &shared);
        let extra: Vec<usize> = (0..small.cols.len())
            .filter(|&i| !large.cols.contains(&small.cols[i]))
            .collect();
        let mut index: HashMap<Vec<usize>, Vec<(&Vec<usize>, &BigInt)>> = HashMap::new();
        for (row, val) in &small.rows {
            index
                .entry(ks.iter().map(|&i| row[i]).collect())
                .or_default()
                .push((row, val));
        }
        let mut cols = large.cols.clone();
        cols.extend(extra.iter().map(|&i| small.cols[i].clone()));
        let mut rows = HashMap::new();
        for (row, val) in &large.rows {
            let key: Vec<usize> = kl.iter().map(|&i| row[i]).collect();
            if let Some(matches) = index.get(&key) {
                for (srow, sval) in matches {
                    let mut r = row.clone();
                    r.extend(extra.iter().map(|&i| srow[i]));
                    rows.insert(r, val * *sval);
                }
                self.guard(rows.len())?;
            }
        }
        let wild = small
            .wild
            .union(&large.wild)
            .filter(|v| !cols.contains(v))
            .cloned()
            .collect();
        Ok(Table { cols, wild, rows })
    }

    fn add(&mut self, a: Table, b: Table) -> Result<Table> {
        let a = self.materialize(a, &b.cols.iter().cloned().collect())?;
        let b = self.materialize(b, &a.cols.iter().cloned().collect())?;
        let idx = positions(&b.cols, &a.cols);
        let mut rows = a.rows;
        for (row, val) in b.rows {
            let key: Vec<usize> = idx.iter().map(|&i| row[i]).collect();
            *rows.entry(key).or_default() += val;
        }
        rows.retain(|_, n| !n.is_zero());
        self.guard(rows.len())?;
        let wild = a.wild.intersection(&b.wild).cloned().collect();
        Ok(Table {
            cols: a.cols,
            wild,
            rows,
        })
    }

    fn fo(&mut self, f: &EpFormula) -> Result<Rel> {
        let rel = match f {
            EpFormula::Top => Rel {
                cols: Vec::new(),
                tuples: std::iter::once(Vec::new()).collect(),
            },
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
                let mut cols: Vec<Var> = Vec::new();
                for v in &a.args {
                    if !cols.contains(v) {
                        cols.push(v.clone());
                    }
                }
                let first = positions(&a.args, &cols);
                let slot = positions(&cols, &a.args);
                let tuples = self
                    .b
                    .relation(&a.rel)
                    .expect("declared")
                    .iter()
                    .filter(|t| t.iter().zip(&slot).all(|(&e, &s)| t[first[s]] == e))
                    .map(|t| first.iter().map(|&p| t[p]).collect())
                    .collect();
                Rel { cols, tuples }
            }
            EpFormula::And(l, r) => {
                let (a, b) = (self.fo(l)?, self.fo(r)?);
                self.fo_join(a, b)?
            }
            EpFormula::Or(l, r) => {
                let (a, b) = (self.fo(l)?, self.fo(r)?);
                self.fo_union(a, b)?
            }
            EpFormula::Exists(v, body) => {
                let r = self.fo(body)?;
                match r.cols.iter().position(|c| c == v) {
                    None => r,
                    Some(p) => {
                        let mut cols = r.cols;
                        cols.remove(p);
                        let tuples = r
                            .tuples
                            .into_iter()
                            .map(|mut t| {
                                t.remove(p);
                                t
                            })
                            .collect();
                        Rel { cols, tuples }
                    }
                }
            }
        };
        self.guard(rel.tuples.len())?;
        self.record(rel.tuples.len());
        Ok(rel)
    }

    fn fo_join(&mut self, a: Rel, b: Rel) -> Result<Rel> {
        let (small, large) = if a.tuples.len() <= b.tuples.len() { (a, b) } else { (b, a) };
        let shared: Vec<Var> = small.cols.iter().filter(|c| large.cols.contains(c)).cloned().collect();
        let ks = positions(&small.cols, &shared);
        let kl = positions(&large.cols, &shared);
        let extra: Vec<usize> = (0..small.cols.len())
            .filter(|&i| !large.cols.contains(&small.cols[i]))
            .collect();
        let mut index: HashMap<Vec<usize>, Vec<&Vec<usize>>> = HashMap::new();
        for t in &small.tuples {
            index.entry(ks.iter().map(|&i| t[i]).collect()).or_default().push(t);
        }
        let mut cols = large.cols.clone();
        cols.extend(extra.iter().map(|&i| small.cols[i].clone()));
        let mut tuples = HashSet::new();
        for t in &large.tuples {
            let key: Vec<usize> = kl.iter().map(|&i| t[i]).collect();
            if let Some(ms) = index.get(&key) {
                for s in ms {
                    let mut r = t.clone();
                    r.extend(extra.iter().map(|&i| s[i]));
                    tuples.insert(r);
                }
                self.guard(tuples.len())?;
            }
        }
        Ok(Rel { cols, tuples })
    }

    fn fo_extend(&mut self, r: Rel, cols: &[Var]) -> Result<HashSet<Vec<usize>>> {
        let missing: Vec<&Var> = cols.iter().filter(|c| !r.cols.contains(c)).collect();
        let n = self.b.len();
        self.guard(r.tuples.len().saturating_mul(n.saturating_pow(missing.len() as u32)))?;
        let mut out = HashSet::new();
        let mut ext = vec![0usize; missing.len()];
        for t in &r.tuples {
            loop {
                let row = cols
                    .iter()
                    .map(|c| match r.cols.iter().position(|x| x == c) {
                        Some(p) => t[p],
                        None => ext[missing.iter().position(|m| *m == c).expect("missing")],
                    })
                    .collect();
                out.insert(row);
                if !odometer(&mut ext, n) {
                    break;
                }
            }
        }
        Ok(out)
    }

    fn fo_union(&mut self, a: Rel, b: Rel) -> Result<Rel> {
        let mut cols = a.cols.clone();
        cols.extend(b.cols.iter().filter(|c| !a.cols.contains(c)).cloned());
        let mut tuples = self.fo_extend(a, &cols)?;
        tuples.extend(self.fo_extend(b, &cols)?);
        Ok(Rel { cols, tuples })
    }
}

/// Advances a little-endian counter in base `n`; false after wrapping.
fn odometer(digits: &mut [usize], n: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < n {
            return true;
        }
        *d = 0;
    }
    false
}

pub fn evaluate(f: &SharpFormula, b: &Structure, limits: &Limits) -> Result<CountTable> {
    Evaluator::new(b, limits).evaluate(f)
}

pub fn eval_sentence(f: &SharpFormula, b: &Structure, limits: &Limits) -> Result<BigInt> {
    Evaluator::new(b, limits).eval_sentence(f)
}
