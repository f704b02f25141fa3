//! Finite interpretations of a signature.
//!
//! Text format, one declaration per line, `#` starts a comment:
//!
//! ```text
//! carrier Basic.NAT = [0, 1, 2]
//! op Basic.add 0 1 -> 1
//! op Basic.add * * -> 0
//! pred Bool.true 1
//! ```
//!
//! Operation rows are matched in order and `*` matches any element, so a
//! trailing wildcard row supplies a default. Every operation of the model
//! must end up total; predicates not mentioned are empty.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{Model, SortRef, SymbolRef};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct UniverseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> UniverseError {
    UniverseError {
        line,
        message: message.into(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FiniteUniverse {
    carriers: BTreeMap<SortRef, Vec<String>>,
    ops: HashMap<SymbolRef, HashMap<Vec<usize>, usize>>,
    preds: HashMap<SymbolRef, BTreeSet<Vec<usize>>>,
}

impl FiniteUniverse {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set_carrier(&mut self, sort: SortRef, values: Vec<String>) {
        self.carriers.insert(sort, values);
    }

    pub fn carrier(&self, sort: &SortRef) -> Option<&[String]> {
        self.carriers.get(sort).map(Vec::as_slice)
    }

    pub fn size(&self, sort: &SortRef) -> usize {
        self.carriers.get(sort).map_or(0, Vec::len)
    }

    /// Index of `value` in the carrier of `sort`.
    pub fn index(&self, sort: &SortRef, value: &str) -> Option<usize> {
        self.carriers.get(sort)?.iter().position(|v| v == value)
    }

    pub fn name(&self, sort: &SortRef, index: usize) -> &str {
        &self.carriers[sort][index]
    }

    pub fn set_op(&mut self, sym: SymbolRef, args: Vec<usize>, result: usize) {
        self.ops.entry(sym).or_default().insert(args, result);
    }

    pub fn apply(&self, sym: &SymbolRef, args: &[usize]) -> Option<usize> {
        self.ops.get(sym)?.get(args).copied()
    }

    pub fn add_pred(&mut self, sym: SymbolRef, args: Vec<usize>) {
        self.preds.entry(sym).or_default().insert(args);
    }

    pub fn holds(&self, sym: &SymbolRef, args: &[usize]) -> bool {
        self.preds.get(sym).is_some_and(|s| s.contains(args))
    }

    /// Every sort gets the carrier `0..size` (`BOOLEAN` gets `false, true`).
    /// `add`/`sub` are taken modulo `size`, `ls`/`gt` compare into a
    /// `BOOLEAN` result and `true`/`false` on `BOOLEAN` are the obvious
    /// tests. Remaining operations return the first element and remaining
    /// predicates are empty.
    pub fn numeric(model: &Model, size: usize) -> Self {
        assert!(size >= 1);
        let mut u = FiniteUniverse::new();
        for s in model.sorts() {
            let values = if s.name == "BOOLEAN" {
                vec!["false".to_string(), "true".to_string()]
            } else {
                (0..size).map(|v| v.to_string()).collect()
            };
            u.set_carrier(s, values);
        }
        for dt in &model.datatypes {
            for op in &dt.operations {
                let sym = SymbolRef::new(&dt.name, &op.name);
                let sizes: Vec<usize> = op.args.iter().map(|s| u.size(s)).collect();
                for args in tuples(&sizes) {
                    let n = u.size(&op.result).max(1);
                    let r = match (op.name.as_str(), args.as_slice()) {
                        ("add", [a, b]) => (a + b) % n,
                        ("sub", [a, b]) => (a + n * 2 - b % n) % n,
                        ("ls", [a, b]) => usize::from(a < b).min(n - 1),
                        ("gt", [a, b]) => usize::from(a > b).min(n - 1),
                        _ => 0,
                    };
                    u.set_op(sym.clone(), args, r);
                }
            }
            for p in &dt.predicates {
                let sym = SymbolRef::new(&dt.name, &p.name);
                if p.args.len() == 1 && p.args[0].name == "BOOLEAN" {
                    match p.name.as_str() {
                        "true" => u.add_pred(sym, vec![1]),
                        "false" => u.add_pred(sym, vec![0]),
                        _ => {}
                    }
                }
            }
        }
        u
    }

    /// Report the first sort without a carrier or operation that is not
    /// total.
    pub fn check_against(&self, model: &Model) -> Result<(), String> {
        for s in model.sorts() {
            if self.size(&s) == 0 {
                return Err(format!("sort {s} has no carrier"));
            }
        }
        for dt in &model.datatypes {
            for op in &dt.operations {
                let sym = SymbolRef::new(&dt.name, &op.name);
                let sizes: Vec<usize> = op.args.iter().map(|s| self.size(s)).collect();
                for args in tuples(&sizes) {
                    match self.apply(&sym, &args) {
                        None => return Err(format!("operation {sym} undefined on {args:?}")),
                        Some(r) if r >= self.size(&op.result) => {
                            return Err(format!("operation {sym} leaves its carrier on {args:?}"))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

/// All tuples with `tuple[i] < sizes[i]`, in lexicographic order.
pub fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |v| {
                    let mut t = t.clone();
                    t.push(v);
                    t
                })
            })
            .collect();
    }
    out
}

fn symbol(line: usize, text: &str) -> Result<SymbolRef, UniverseError> {
    let (dt, name) = text
        .split_once('.')
        .ok_or_else(|| err(line, format!("expected DT.name, found `{text}`")))?;
    Ok(SymbolRef::new(dt, name))
}

/// Parse a universe description for `model` and check it is complete.
pub fn parse_universe(model: &Model, text: &str) -> Result<FiniteUniverse, UniverseError> {
    let mut u = FiniteUniverse::new();
    let mut rows: Vec<(usize, SymbolRef, Vec<Option<String>>, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (kw, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
        let rest = rest.trim();
        match kw {
            "carrier" => {
                let (lhs, rhs) = rest
                    .split_once('=')
                    .ok_or_else(|| err(line, "expected `carrier DT.Sort = [...]`"))?;
                let sym = symbol(line, lhs.trim())?;
                let sort = SortRef::new(sym.datatype, sym.name);
                if !model.has_sort(&sort) {
                    return Err(err(line, format!("unknown sort {sort}")));
                }
                let list = rhs
                    .trim()
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(']'))
                    .ok_or_else(|| err(line, "carrier values must be written as [a, b, ...]"))?;
                let values: Vec<String> = list
                    .split(',')
                    .map(|v| v.trim().to_string())
                    .filter(|v| !v.is_empty())
                    .collect();
                if values.is_empty() {
                    return Err(err(line, format!("carrier of {sort} is empty")));
                }
                let distinct: BTreeSet<&String> = values.iter().collect();
                if distinct.len() != values.len() {
                    return Err(err(line, format!("carrier of {sort} repeats a value")));
                }
                u.set_carrier(sort, values);
            }
            "op" => {
                let (lhs, result) = rest
                    .split_once("->")
                    .ok_or_else(|| err(line, "expected `op DT.f args -> result`"))?;
                let mut words = lhs.split_whitespace();
                let sym = symbol(line, words.next().unwrap_or(""))?;
                if model.operation(&sym).is_none() {
                    return Err(err(line, format!("unknown operation {sym}")));
                }
                let args = words.map(|w| (w != "*").then(|| w.to_string())).collect();
                rows.push((line, sym, args, result.trim().to_string()));
            }
            "pred" => {
                let mut words = rest.split_whitespace();
                let sym = symbol(line, words.next().unwrap_or(""))?;
                let decl = model
                    .predicate(&sym)
                    .ok_or_else(|| err(line, format!("unknown predicate {sym}")))?;
                let args: Vec<&str> = words.collect();
                if args.len() != decl.args.len() {
                    return Err(err(
                        line,
                        format!("{sym} takes {} argument(s)", decl.args.len()),
                    ));
                }
                let mut idx = Vec::new();
                for (a, s) in args.iter().zip(&decl.args) {
                    idx.push(
                        u.index(s, a).ok_or_else(|| {
                            err(line, format!("{a} is not in the carrier of {s}"))
                        })?,
                    );
                }
                u.add_pred(sym, idx);
            }
            other => return Err(err(line, format!("unknown declaration `{other}`"))),
        }
    }
    for (line, sym, args, result) in rows {
        let decl = model.operation(&sym).expect("checked above");
        if args.len() != decl.args.len() {
            return Err(err(
                line,
                format!("{sym} takes {} argument(s)", decl.args.len()),
            ));
        }
        let r = u.index(&decl.result, &result).ok_or_else(|| {
            err(
                line,
                format!("{result} is not in the carrier of {}", decl.result),
            )
        })?;
        let mut pattern = Vec::new();
        for (a, s) in args.iter().zip(&decl.args) {
            pattern.push(match a {
                None => None,
                Some(v) => Some(
                    u.index(s, v)
                        .ok_or_else(|| err(line, format!("{v} is not in the carrier of {s}")))?,
                ),
            });
        }
        let sizes: Vec<usize> = decl.args.iter().map(|s| u.size(s)).collect();
        for t in tuples(&sizes) {
            let hit = pattern
                .iter()
                .zip(&t)
                .all(|(p, v)| p.is_none_or(|p| p == *v));
            if hit && u.apply(&sym, &t).is_none() {
                u.set_op(sym.clone(), t, r);
            }
        }
    }
    u.check_against(model).map_err(|m| err(0, m))?;
    Ok(u)
}
