//! Shared fixtures: corpus access, random small models and the
//! brute-force entailment oracle.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use apml::oracle::{saturate, search_proof, FiniteUniverse, SearchOptions};
use apml::{
    parse_model, validate_structure, ArchitectureContract, Model, Predicate, Proof, SortRef,
    SymbolRef, Term,
};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn corpus(name: &str) -> Model {
    let parsed = parse_model(&corpus_text(name));
    assert!(!parsed.has_errors(), "{name}: {:?}", parsed.diagnostics);
    parsed.model
}

pub fn corpus_files() -> Vec<&'static str> {
    vec![
        "radder.apml",
        "radder_listing.apml",
        "radder_duration6.apml",
        "radder_merge1.apml",
        "radder_merge2.apml",
        "tgmt.apml",
    ]
}

pub fn nat() -> SortRef {
    SortRef::new("B", "N")
}

// ---------------------------------------------------------------------
// Random architectures

struct Comp {
    inputs: usize,
    outputs: usize,
}

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [String]) -> &'a String {
    xs.choose(rng).expect("non-empty")
}

/// A random contract over `inputs` and `outputs` (unqualified names).
fn random_contract<R: Rng>(
    rng: &mut R,
    name: &str,
    inputs: &[String],
    outputs: &[String],
) -> String {
    let vars = ["x", "y"];
    let n_triggers = if rng.gen_bool(0.15) {
        0
    } else {
        rng.gen_range(1..=2)
    };
    let mut triggers = Vec::new();
    let mut bound = BTreeSet::new();
    let mut last = 0;
    for j in 0..n_triggers {
        let time = if j == 0 { 0 } else { rng.gen_range(0..=1) };
        last = time;
        let v = vars[rng.gen_range(0..2)];
        let w = vars[rng.gen_range(0..2)];
        let a = pick(rng, inputs);
        let b = pick(rng, inputs);
        let pred = match rng.gen_range(0..5) {
            0 | 1 => {
                bound.insert(v);
                format!("[{a} = {v}]")
            }
            2 => {
                bound.insert(v);
                bound.insert(w);
                format!("[{a} = {v}] /\\ [{b} = {w}]")
            }
            3 => format!("B.P[{a}]"),
            _ => {
                bound.insert(v);
                format!("[{a} = {v}] \\/ [{b} = {v}]")
            }
        };
        triggers.push(format!(
            "t{j}: {pred}{}",
            if time > 0 {
                format!(" at {time}")
            } else {
                String::new()
            }
        ));
    }
    let duration = rng.gen_range(last + 1..=3);
    let bound: Vec<&str> = bound.into_iter().collect();
    let a = pick(rng, outputs);
    let b = pick(rng, outputs);
    let guarantee = if bound.is_empty() {
        match rng.gen_range(0..2) {
            0 => format!("B.P[{a}]"),
            _ => format!("[{a} = {b}]"),
        }
    } else {
        let v = bound[rng.gen_range(0..bound.len())];
        let w = bound[rng.gen_range(0..bound.len())];
        match rng.gen_range(0..5) {
            0 | 1 => format!("[{a} = {v}]"),
            2 => format!("[{a} = B.add[{v}, {w}]]"),
            3 => format!("[{a} = {v}] /\\ [{b} = {w}]"),
            _ => format!("[{a} = {v}] \\/ [{b} = {w}]"),
        }
    };
    let mut used: Vec<&str> = vars
        .iter()
        .copied()
        .filter(|v| triggers.iter().any(|t| mentions(t, v)))
        .collect();
    used.dedup();
    let decls: Vec<String> = used.iter().map(|v| format!("var {v}: B.N")).collect();
    format!(
        "Contract {name} {{\n{}\ntriggers {{\n{}\n}}\nguarantees {{\n{guarantee}\n}}\nduration {duration}\n}}",
        decls.join(",\n"),
        triggers.join(",\n")
    )
}

fn mentions(text: &str, v: &str) -> bool {
    text.split(|c: char| !c.is_alphanumeric() && c != '_')
        .any(|w| w == v)
}

fn signature() -> &'static str {
    "DTSpec {\nDT B (\nSort N\nPredicate P: N\nOperation add: N, N => N\n)\n}"
}

/// Model text with the given architecture contract block.
fn model_text(
    comps: &[Comp],
    contracts: &[Vec<String>],
    connections: &[(String, String)],
    arch: &str,
) -> String {
    let mut out = format!(
        "Pattern Random ShortName rnd {{\n{}\nCTypes {{\n",
        signature()
    );
    let mut blocks = Vec::new();
    for (k, c) in comps.iter().enumerate() {
        let ins: Vec<String> = (0..c.inputs)
            .map(|i| format!("InputPort i{i} (Type: B.N)"))
            .collect();
        let outs: Vec<String> = (0..c.outputs)
            .map(|i| format!("OutputPort o{i} (Type: B.N)"))
            .collect();
        blocks.push(format!(
            "CType K{k} {{\nInputPorts {{\n{}\n}}\nOutputPorts {{\n{}\n}}\nContracts {{\n{}\n}}\n}}",
            ins.join(",\n"),
            outs.join(",\n"),
            contracts[k].join(",\n")
        ));
    }
    out += &blocks.join(",\n");
    out += "\n}\n";
    if !connections.is_empty() {
        let cs: Vec<String> = connections
            .iter()
            .map(|(i, o)| format!("({i}, {o})"))
            .collect();
        out += &format!("Connections {{\n{}\n}}\n", cs.join(",\n"));
    }
    out += &format!("Contracts {{\n{arch}\n}}\n}}\n");
    out
}

fn arch_text(name: &str, triggers: &[String], guarantee: &str, duration: u32) -> String {
    let vars: Vec<&str> = ["x", "y"]
        .into_iter()
        .filter(|v| triggers.iter().any(|t| mentions(t, v)) || mentions(guarantee, v))
        .collect();
    let decls: Vec<String> = vars.iter().map(|v| format!("var {v}: B.N")).collect();
    format!(
        "Contract {name} {{\n{}\ntriggers {{\n{}\n}}\nguarantees {{\n{guarantee}\n}}\nduration {duration}\n}}",
        decls.join(",\n"),
        triggers.join(",\n")
    )
}

/// A random architecture of at most three components together with an
/// architecture contract that has a searched proof attached, or `None`
/// when the random draw admits no usable contract.
pub fn random_proved_model<R: Rng>(rng: &mut R) -> Option<Model> {
    let n = rng.gen_range(1..=3);
    let comps: Vec<Comp> = (0..n)
        .map(|_| Comp {
            inputs: rng.gen_range(1..=2),
            outputs: rng.gen_range(1..=2),
        })
        .collect();
    let mut connections = Vec::new();
    for (k, c) in comps.iter().enumerate().skip(1) {
        for i in 0..c.inputs {
            if rng.gen_bool(0.9) {
                let src = if rng.gen_bool(0.7) {
                    k - 1
                } else {
                    rng.gen_range(0..k)
                };
                let o = rng.gen_range(0..comps[src].outputs);
                connections.push((format!("K{k}.i{i}"), format!("K{src}.o{o}")));
            }
        }
    }
    let contracts: Vec<Vec<String>> = comps
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let ins: Vec<String> = (0..c.inputs).map(|i| format!("i{i}")).collect();
            let outs: Vec<String> = (0..c.outputs).map(|i| format!("o{i}")).collect();
            (0..rng.gen_range(1..=2))
                .map(|j| random_contract(rng, &format!("c{k}_{j}"), &ins, &outs))
                .collect()
        })
        .collect();
    let connected_in: BTreeSet<&String> = connections.iter().map(|(i, _)| i).collect();
    let connected_out: BTreeSet<&String> = connections.iter().map(|(_, o)| o).collect();
    let arch_inputs: Vec<String> = comps
        .iter()
        .enumerate()
        .flat_map(|(k, c)| (0..c.inputs).map(move |i| format!("K{k}.i{i}")))
        .filter(|p| !connected_in.contains(p))
        .collect();
    let arch_outputs: BTreeSet<String> = comps
        .iter()
        .enumerate()
        .flat_map(|(k, c)| (0..c.outputs).map(move |o| format!("K{k}.o{o}")))
        .filter(|p| !connected_out.contains(p))
        .collect();
    if arch_inputs.is_empty() || arch_outputs.is_empty() {
        return None;
    }
    let mut triggers = Vec::new();
    let a = pick(rng, &arch_inputs).clone();
    let b = pick(rng, &arch_inputs).clone();
    triggers.push(if rng.gen_bool(0.5) {
        format!("t0: [{a} = x] /\\ [{b} = y]")
    } else {
        format!("t0: [{a} = x]")
    });
    if rng.gen_bool(0.3) {
        let c = pick(rng, &arch_inputs).clone();
        triggers.push(format!("t1: [{c} = y] at 1"));
    }
    let probe_out = arch_outputs.iter().next().expect("non-empty").clone();
    let probe = model_text(
        &comps,
        &contracts,
        &connections,
        &arch_text("goal", &triggers, &format!("[{probe_out} = x]"), 7),
    );
    let parsed = parse_model(&probe);
    assert!(!parsed.has_errors(), "{probe}\n{:?}", parsed.diagnostics);
    if !validate_structure(&parsed.model).is_empty() {
        return None;
    }
    let steps = saturate(
        &parsed.model,
        &parsed.model.contracts[0],
        SearchOptions {
            max_steps: 40,
            ..SearchOptions::default()
        },
    )
    .ok()?;
    let usable: Vec<_> = steps
        .iter()
        .filter(|s| {
            s.time >= 1
                && s.state
                    .ports()
                    .iter()
                    .all(|p| arch_outputs.contains(&p.to_string()))
        })
        .collect();
    let deepest = usable
        .iter()
        .max_by_key(|s| (cone(&steps, s), s.time))
        .copied();
    let chosen = if rng.gen_bool(0.7) {
        deepest?
    } else {
        *usable.choose(rng)?
    };
    if cone(&steps, chosen) == 1 && rng.gen_bool(0.6) {
        return None;
    }
    let guarantee = weaken(rng, &chosen.state, &probe_out);
    let text = model_text(
        &comps,
        &contracts,
        &connections,
        &arch_text("goal", &triggers, &guarantee, chosen.time),
    );
    let parsed = parse_model(&text);
    assert!(!parsed.has_errors(), "{text}\n{:?}", parsed.diagnostics);
    let mut model = parsed.model;
    if !validate_structure(&model).is_empty() {
        return None;
    }
    let proof = search_proof(&model, &model.contracts[0], 40).ok()?;
    model.contracts[0].proof = Some(proof);
    Some(model)
}

/// Number of steps `s` depends on, itself included.
fn cone(steps: &[apml::ProofStep], s: &apml::ProofStep) -> usize {
    let mut seen = BTreeSet::new();
    let mut todo = vec![s];
    while let Some(x) = todo.pop() {
        for set in &x.refs {
            for r in set {
                if let apml::Reference::Step { step, .. } = r {
                    if seen.insert(*step) {
                        todo.push(&steps[*step]);
                    }
                }
            }
        }
    }
    seen.len() + 1
}

/// `p` rendered in surface syntax, possibly weakened by dropping conjuncts
/// or adding a disjunct.
fn weaken<R: Rng>(rng: &mut R, p: &Predicate, port: &str) -> String {
    let p = match p {
        Predicate::And(parts) if rng.gen_bool(0.4) => parts.choose(rng).expect("non-empty").clone(),
        other => other.clone(),
    };
    let text = surface(&p);
    if rng.gen_bool(0.2) {
        format!("{text} \\/ [{port} = x]")
    } else {
        text
    }
}

/// Surface syntax of a predicate whose ports are qualified.
pub fn surface(p: &Predicate) -> String {
    fn term(t: &Term) -> String {
        match t {
            Term::Var(v) => v.name.clone(),
            Term::Port(p) => p.to_string(),
            Term::App(f, args) => format!(
                "{}.{}[{}]",
                f.datatype,
                f.name,
                args.iter().map(term).collect::<Vec<_>>().join(", ")
            ),
        }
    }
    match p {
        Predicate::Eq(a, b) => format!("[{} = {}]", term(a), term(b)),
        Predicate::Atom(s, args) => format!(
            "{}.{}[{}]",
            s.datatype,
            s.name,
            args.iter().map(term).collect::<Vec<_>>().join(", ")
        ),
        Predicate::And(ps) => ps.iter().map(paren).collect::<Vec<_>>().join(" /\\ "),
        Predicate::Or(ps) => ps.iter().map(paren).collect::<Vec<_>>().join(" \\/ "),
    }
}

fn paren(p: &Predicate) -> String {
    match p {
        Predicate::And(_) | Predicate::Or(_) => format!("({})", surface(p)),
        _ => surface(p),
    }
}

/// Random total tables over carriers of `size` elements for the random
/// signature.
pub fn random_universe<R: Rng>(model: &Model, rng: &mut R, size: usize) -> FiniteUniverse {
    let mut u = FiniteUniverse::numeric(model, size);
    let add = SymbolRef::new("B", "add");
    let p = SymbolRef::new("B", "P");
    for a in 0..size {
        for b in 0..size {
            u.set_op(add.clone(), vec![a, b], rng.gen_range(0..size));
        }
        if rng.gen_bool(0.5) {
            u.add_pred(p.clone(), vec![a]);
        }
    }
    u
}

/// Arithmetic modulo `size` with `P` true everywhere, so that
/// trigger-less contracts on `P` are satisfiable.
pub fn full_universe(model: &Model, size: usize) -> FiniteUniverse {
    let mut u = FiniteUniverse::numeric(model, size);
    for a in 0..size {
        u.add_pred(SymbolRef::new("B", "P"), vec![a]);
    }
    u
}

/// Small corruptions of a proof: shifted times, dropped references and
/// swapped rationales.
pub fn mutate<R: Rng>(rng: &mut R, model: &Model, proof: &Proof) -> Proof {
    let mut out = proof.clone();
    let i = rng.gen_range(0..out.steps.len());
    let step = &mut out.steps[i];
    match rng.gen_range(0..4) {
        0 => step.time = step.time.saturating_sub(1),
        1 => step.time += 1,
        2 => {
            if let Some(set) = step.refs.first_mut() {
                if set.len() > 1 {
                    set.pop();
                } else if let Some(apml::Reference::Step { connections, .. }) = set.first_mut() {
                    connections.pop();
                }
            }
        }
        _ => {
            let all: Vec<_> = model
                .components
                .iter()
                .flat_map(|c| {
                    c.contracts
                        .iter()
                        .map(move |k| apml::ContractRef::new(&c.name, &k.name))
                })
                .collect();
            step.rationale = all.choose(rng).expect("some contract").clone();
        }
    }
    out
}

pub fn arch(model: &Model) -> &ArchitectureContract {
    &model.contracts[0]
}

// ---------------------------------------------------------------------
// Entailment against exhaustive interpretation

/// Ground terms over ports `a`, `b`, constant `x`, unary `f` and binary
/// `add`, as a subterm-closed pool of at most four terms.
pub fn random_pool<R: Rng>(rng: &mut R, model: &Model) -> Vec<Term> {
    let _ = model;
    let a = Term::port("C", "a");
    let b = Term::port("C", "b");
    let x = Term::var("x", &nat());
    let f = |t: &Term| Term::app(SymbolRef::new("B", "f"), vec![t.clone()]);
    let add =
        |s: &Term, t: &Term| Term::app(SymbolRef::new("B", "add"), vec![s.clone(), t.clone()]);
    let mut pool: Vec<Term> = Vec::new();
    let size = rng.gen_range(2..=4);
    while pool.len() < size {
        let cand = match rng.gen_range(0..6) {
            0 => a.clone(),
            1 => b.clone(),
            2 => x.clone(),
            3 | 4 if !pool.is_empty() => f(pool.choose(rng).expect("non-empty")),
            _ if !pool.is_empty() => add(
                pool.choose(rng).expect("non-empty"),
                pool.choose(rng).expect("non-empty"),
            ),
            _ => a.clone(),
        };
        if !pool.contains(&cand) {
            pool.push(cand);
        }
    }
    pool
}

pub fn entail_model() -> Model {
    let text = "Pattern E ShortName e {\nDTSpec {\nDT B (\nSort N\nPredicate P: N\nOperation f: N => N\nOperation add: N, N => N\n)\n}\nCTypes {\nCType C {\nInputPorts {\nInputPort i (Type: B.N)\n}\nOutputPorts {\nOutputPort a (Type: B.N),\nOutputPort b (Type: B.N)\n}\nContracts {\n}\n}\n}\n}\n";
    let parsed = parse_model(text);
    assert!(!parsed.has_errors(), "{:?}", parsed.diagnostics);
    parsed.model
}

pub fn random_literal<R: Rng>(rng: &mut R, pool: &[Term]) -> Predicate {
    if rng.gen_bool(0.8) {
        Predicate::eq(
            pool.choose(rng).expect("non-empty").clone(),
            pool.choose(rng).expect("non-empty").clone(),
        )
    } else {
        Predicate::Atom(
            SymbolRef::new("B", "P"),
            vec![pool.choose(rng).expect("non-empty").clone()],
        )
    }
}

pub fn random_formula<R: Rng>(rng: &mut R, pool: &[Term], depth: u32) -> Predicate {
    if depth == 0 || rng.gen_bool(0.5) {
        return random_literal(rng, pool);
    }
    let parts = (0..rng.gen_range(2..=3))
        .map(|_| random_formula(rng, pool, depth - 1))
        .collect();
    if rng.gen_bool(0.5) {
        Predicate::and(parts)
    } else {
        Predicate::or(parts)
    }
}

/// Subterm closure of the terms in `ps`, subterms first.
pub fn subterms(ps: &[&Predicate]) -> Vec<Term> {
    fn add(t: &Term, out: &mut Vec<Term>) {
        if let Term::App(_, args) = t {
            for a in args {
                add(a, out);
            }
        }
        if !out.contains(t) {
            out.push(t.clone());
        }
    }
    let mut out = Vec::new();
    for p in ps {
        p.visit_terms(&mut |t| add(t, &mut out));
    }
    out
}

/// Whether `goal` holds in every interpretation over `{0, .., k-1}` that
/// satisfies all `hyps`. Ports and constants are free, functions and the
/// predicate are arbitrary, so only the values of the occurring subterms
/// matter; with at most `k` subterms this decides validity.
pub fn brute_entails(hyps: &[Predicate], goal: &Predicate, k: usize) -> bool {
    let mut all: Vec<&Predicate> = hyps.iter().collect();
    all.push(goal);
    let terms = subterms(&all);
    let n = terms.len();
    let mut vals = vec![0usize; n];
    loop {
        if congruent(&terms, &vals) {
            for p_set in 0..(1u32 << k) {
                let ev = |p: &Predicate| eval(p, &terms, &vals, p_set);
                if hyps.iter().all(ev) && !ev(goal) {
                    return false;
                }
            }
        }
        let mut i = 0;
        while i < n {
            vals[i] += 1;
            if vals[i] < k {
                break;
            }
            vals[i] = 0;
            i += 1;
        }
        if i == n {
            return true;
        }
    }
}

fn value(t: &Term, terms: &[Term], vals: &[usize]) -> usize {
    vals[terms.iter().position(|u| u == t).expect("subterm")]
}

fn congruent(terms: &[Term], vals: &[usize]) -> bool {
    for (i, s) in terms.iter().enumerate() {
        for (j, t) in terms.iter().enumerate().skip(i + 1) {
            if let (Term::App(f, xs), Term::App(g, ys)) = (s, t) {
                if f == g
                    && xs
                        .iter()
                        .zip(ys)
                        .all(|(x, y)| value(x, terms, vals) == value(y, terms, vals))
                    && vals[i] != vals[j]
                {
                    return false;
                }
            }
        }
    }
    true
}

fn eval(p: &Predicate, terms: &[Term], vals: &[usize], p_set: u32) -> bool {
    match p {
        Predicate::Eq(a, b) => value(a, terms, vals) == value(b, terms, vals),
        Predicate::Atom(_, args) => p_set & (1 << value(&args[0], terms, vals)) != 0,
        Predicate::And(ps) => ps.iter().all(|q| eval(q, terms, vals, p_set)),
        Predicate::Or(ps) => ps.iter().any(|q| eval(q, terms, vals, p_set)),
    }
}
