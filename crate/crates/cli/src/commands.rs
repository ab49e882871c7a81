use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sharpq::compile::{
    canonical_lc, decomposition_representation, flatten as flatten_formula, minimize_ep, query_pair,
};
use sharpq::decomp::{compute_qaw, exact_treewidth, qaw_bounds};
use sharpq::epquery::{oracle_count, pair_to_pp, parse_query, primal_graph, LiberalQuery};
use sharpq::equiv::{core_of, counting_equivalent, logically_equivalent, EquivalenceWitness};
use sharpq::relstore::{parse_structure, Structure};
use sharpq::sample::random_structure;
use sharpq::sharpcore::{check_represents, naive_representation, parse_sharp, serialize_sharp, Evaluator, SharpFormula};
use sharpq::Limits;

use crate::failure::Failure;
use crate::{EngineChoice, Mode, Options, Strategy};

const SAMPLES: usize = 20;
/// Enumeration budget per verification sample.
const SAMPLE_BUDGET: u64 = 1 << 22;

fn read(path: &Option<PathBuf>, flag: &str) -> Result<String, Failure> {
    let path = path.as_ref().ok_or_else(|| Failure::Input(format!("missing {flag}")))?;
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn query(o: &Options) -> Result<LiberalQuery, Failure> {
    Ok(parse_query(&read(&o.query, "--query")?)?)
}

fn structure(o: &Options) -> Result<Structure, Failure> {
    Ok(parse_structure(&read(&o.data, "--data")?)?)
}

fn sharp(o: &Options) -> Result<SharpFormula, Failure> {
    let f = parse_sharp(&read(&o.sharp, "--sharp")?)?;
    f.validate()?;
    Ok(f)
}

fn dump(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        write_file(p, text)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn json_text(v: Value) -> String {
    format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
}

/// Report numbers of a compiled sentence.
struct Summary {
    width: usize,
    sharp_width: usize,
    terms: usize,
    qaw: usize,
    core_size: usize,
}

impl Summary {
    fn json(&self) -> Value {
        json!({
            "width": self.width,
            "sharp_width": self.sharp_width,
            "terms": self.terms,
            "qaw": self.qaw,
            "core_size": self.core_size,
        })
    }

    fn line(&self) -> String {
        format!(
            "width {} sharp_width {} terms {} qaw {} core_size {}",
            self.width, self.sharp_width, self.terms, self.qaw, self.core_size
        )
    }
}

fn summarize(f: &SharpFormula, limits: &Limits) -> Result<Summary, Failure> {
    let r = sharpq::compile::report(f, limits)?;
    Ok(Summary {
        width: r.width,
        sharp_width: r.sharp_width,
        terms: r.terms,
        qaw: r.qaw,
        core_size: r.core_size,
    })
}

fn minimized(q: &LiberalQuery, limits: &Limits) -> Result<(SharpFormula, Summary), Failure> {
    let m = minimize_ep(q, limits)?;
    let summary = Summary {
        width: m.width,
        sharp_width: m.sentence.sharp_width(),
        terms: if m.lc.is_empty() { 0 } else { m.sentence.summands() },
        qaw: m.terms.iter().map(|t| t.qaw).max().unwrap_or(0),
        core_size: m.terms.iter().map(|t| t.core.structure.len()).max().unwrap_or(0),
    };
    Ok((m.sentence, summary))
}

/// Largest sample size whose brute-force enumeration fits the budget.
fn sample_size(q: &LiberalQuery) -> usize {
    let vars = q.formula.all_vars().union(&q.liberal).count() as u32;
    (1..=4u64)
        .rev()
        .find(|n| n.checked_pow(vars).is_some_and(|t| t <= SAMPLE_BUDGET))
        .unwrap_or(1) as usize
}

/// The emitted text re-parses to `f` and `f` counts like `q` on seeded samples.
fn verify(f: &SharpFormula, q: &LiberalQuery, o: &Options, limits: &Limits) -> Result<String, Failure> {
    let text = serialize_sharp(f);
    match parse_sharp(&text) {
        Ok(back) if &back == f => {}
        Ok(_) => return Err(Failure::Verification("serialized formula re-parses differently".into())),
        Err(e) => return Err(Failure::Verification(format!("serialized formula does not re-parse: {e}"))),
    }
    let sig = q.formula.signature()?;
    let max = sample_size(q);
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let samples: Vec<Structure> = (0..SAMPLES)
        .map(|i| random_structure(&mut rng, &sig, 1 + i % max, 0.5))
        .collect();
    if let Some(cx) = check_represents(f, q, &samples, limits)? {
        return Err(Failure::Verification(format!(
            "sample {} gives {} but the query has {} answers",
            cx.sample, cx.sentence, cx.oracle
        )));
    }
    Ok(text)
}

fn emit(f: &SharpFormula, summary: &Summary, q: &LiberalQuery, o: &Options, limits: &Limits) -> Result<String, Failure> {
    let text = verify(f, q, o, limits)?;
    Ok(if o.json {
        json_text(json!({ "sharp": text, "report": summary.json(), "verified_samples": SAMPLES }))
    } else {
        format!("{text}\n# {}\n", summary.line())
    })
}

pub fn count(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let b = structure(o)?;
    if o.query.is_none() && o.sharp.is_some() {
        if o.engine != EngineChoice::Compiled {
            return Err(Failure::Input("a #-sentence can only be evaluated by the compiled engine".into()));
        }
        let f = sharp(o)?;
        let mut ev = Evaluator::new(&b, &limits);
        let n = ev.eval_sentence(&f)?;
        return Ok(count_output(o, &n, None, ev.stats().max_rows, None));
    }
    let q = query(o)?;
    let compiled = match o.engine {
        EngineChoice::Oracle => None,
        _ => {
            let (f, summary) = minimized(&q, &limits)?;
            let mut ev = Evaluator::new(&b, &limits);
            let n = ev.eval_sentence(&f)?;
            Some((n, summary, ev.stats().max_rows))
        }
    };
    let oracle = match o.engine {
        EngineChoice::Compiled => None,
        _ => Some(oracle_count(&q, &b, &limits)?),
    };
    match (compiled, oracle) {
        (Some((c, summary, rows)), Some(n)) => {
            if c != n {
                return Err(Failure::Disagreement(format!("compiled {c}, oracle {n}")));
            }
            Ok(count_output(o, &c, Some(&summary), rows, Some(true)))
        }
        (Some((c, summary, rows)), None) => Ok(count_output(o, &c, Some(&summary), rows, None)),
        (None, Some(n)) => Ok(count_output(o, &n, None, 0, None)),
        (None, None) => unreachable!("some engine runs"),
    }
}

fn count_output(o: &Options, n: &BigInt, summary: Option<&Summary>, rows: usize, agree: Option<bool>) -> String {
    if o.json {
        let mut v = json!({ "count": n.to_string(), "engine": format!("{:?}", o.engine).to_lowercase() });
        if let Some(s) = summary {
            v["report"] = s.json();
            v["max_table_rows"] = json!(rows);
        }
        if let Some(a) = agree {
            v["engines_agree"] = json!(a);
        }
        return json_text(v);
    }
    let mut out = format!("count: {n}\n");
    if let Some(s) = summary {
        let _ = writeln!(out, "{}", s.line());
    }
    if agree == Some(true) {
        out.push_str("engines agree\n");
    }
    out
}

pub fn compile(o: &Options, strategy: Strategy) -> Result<String, Failure> {
    let limits = o.limits();
    let q = query(o)?;
    let f = match strategy {
        Strategy::Naive => naive_representation(&q),
        Strategy::Qaw => decomposition_representation(&q, &limits)?,
    };
    let summary = summarize(&f, &limits)?;
    emit(&f, &summary, &q, o, &limits)
}

pub fn minimize(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let q = query(o)?;
    let (f, summary) = minimized(&q, &limits)?;
    emit(&f, &summary, &q, o, &limits)
}

pub fn width(o: &Options) -> Result<String, Failure> {
    let f = sharp(o)?;
    let free = f.free_vars().len();
    Ok(if o.json {
        json_text(json!({ "width": f.width(), "sharp_width": f.sharp_width(), "free": free }))
    } else {
        format!("width {}\nsharp_width {}\nfree {free}\n", f.width(), f.sharp_width())
    })
}

pub fn qaw(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let p = query_pair(&query(o)?)?;
    let q = compute_qaw(&p, &limits)?;
    let b = qaw_bounds(&p, &limits)?;
    dump(&o.dump_td, &q.decomposition.render())?;
    Ok(if o.json {
        json_text(json!({
            "qaw": q.qaw,
            "tw": b.tw,
            "tw_contract": b.tw_contract,
            "lower": b.lower,
            "upper": b.upper,
        }))
    } else {
        format!(
            "qaw {}\ntw {}\ntw_contract {}\nbounds {} {}\n",
            q.qaw, b.tw, b.tw_contract, b.lower, b.upper
        )
    })
}

pub fn core(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let q = query(o)?;
    let p = query_pair(&q)?;
    let c = core_of(&p, &limits)?;
    let text = pair_to_pp(&c, &q.name).to_string();
    let size = c.structure.len();
    Ok(if o.json {
        json_text(json!({ "core": text, "size": size, "original_size": p.structure.len() }))
    } else {
        format!("{text}\n# core size {size} of {}\n", p.structure.len())
    })
}

fn map_text(m: &std::collections::BTreeMap<String, String>) -> String {
    m.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(" ")
}

pub fn equiv(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let p1 = query_pair(&query(o)?)?;
    let p2 = query_pair(&parse_query(&read(&o.rhs, "--rhs")?)?)?;
    let (label, witness): (&str, Option<EquivalenceWitness>) = match o.mode {
        Mode::Counting => ("counting-equivalent", counting_equivalent(&p1, &p2, &limits)?),
        Mode::Logical => ("logically-equivalent", logically_equivalent(&p1, &p2)?),
    };
    if o.json {
        return Ok(json_text(json!({
            "mode": label,
            "equivalent": witness.is_some(),
            "forward": witness.as_ref().map(|w| json!(w.forward)),
            "backward": witness.as_ref().map(|w| json!(w.backward)),
        })));
    }
    Ok(match witness {
        Some(w) => format!(
            "{label}: yes\nforward {}\nbackward {}\n",
            map_text(&w.forward),
            map_text(&w.backward)
        ),
        None => format!("{label}: no\n"),
    })
}

pub fn flatten(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let f = sharp(o)?;
    let flat = flatten_formula(&f, &limits)?;
    let text = serialize_sharp(&flat.formula());
    let lc = if flat.free.is_empty() {
        Some(canonical_lc(&flat, &limits)?)
    } else {
        None
    };
    if o.json {
        let terms: Option<Vec<Value>> = lc.as_ref().map(|lc| {
            lc.terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    json!({
                        "coefficient": t.coefficient.to_string(),
                        "query": pair_to_pp(&t.pair, &format!("t{}", i + 1)).to_string(),
                    })
                })
                .collect()
        });
        return Ok(json_text(json!({ "flat": text, "terms": flat.terms.len(), "lc": terms })));
    }
    let mut out = format!("{text}\n# terms {}\n", flat.terms.len());
    if let Some(lc) = lc {
        for line in lc.to_string().lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    Ok(out)
}

pub fn decompose(o: &Options) -> Result<String, Failure> {
    let limits = o.limits();
    let p = query_pair(&query(o)?)?;
    let g = primal_graph(&p);
    let (tw, td) = exact_treewidth(&g, &limits)?;
    dump(&o.dump_td, &td.render())?;
    Ok(if o.json {
        json_text(json!({ "treewidth": tw, "vertices": g.len(), "edges": g.edge_count(), "bags": td.len() }))
    } else {
        format!("treewidth {tw}\nvertices {}\nedges {}\nbags {}\n", g.len(), g.edge_count(), td.len())
    })
}
