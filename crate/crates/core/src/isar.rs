//! Isabelle/Isar generation: a locale for the architecture, one theorem per
//! architecture contract and a structured proof per checked proof.
//!
//! Ports become time-indexed parameters `p :: "nat \<Rightarrow> S"`, contracts and
//! connections become locale assumptions. Proofs follow a fixed recipe:
//! every reference position first re-derives the rationale's trigger with
//! `simp`, then the rationale assumption closes the step with `blast`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::check::{check_proof, CheckReport};
use crate::entail::{apply, Substitution};
use crate::model::{
    ArchitectureContract, Connection, ContractRef, Model, PortRef, Predicate, Proof, Reference,
    SortRef, SymbolRef, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Naming {
    /// Component initial plus trailing digits, then the port name
    /// (`Adder1.i1` becomes `a1i1`). Falls back to qualified names for the
    /// whole model if any two ports would share a name.
    #[default]
    Compact,
    /// Always `Component_port`.
    Qualified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsarOptions {
    /// Emit `⟹`, `∧`, ... instead of `\<Longrightarrow>`, `\<and>`, ...
    pub unicode: bool,
    /// Refuse symbols without a built-in rendering instead of declaring them.
    pub strict: bool,
    /// Also name every connection `<output>_<input>`.
    pub legacy_connection_names: bool,
    /// Tag each proof step with `(* step i *)`.
    pub step_comments: bool,
    pub naming: Naming,
}

impl Default for IsarOptions {
    fn default() -> Self {
        IsarOptions {
            unicode: false,
            strict: false,
            legacy_connection_names: false,
            step_comments: true,
            naming: Naming::Compact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum IsarError {
    #[error("NAME_COLLISION: {0}")]
    NameCollision(String),
    #[error("UNMAPPED_SYMBOL: {0} has no Isabelle rendering")]
    UnmappedSymbol(String),
}

const RESERVED: &[&str] = &[
    "o",
    "id",
    "fst",
    "snd",
    "map",
    "set",
    "list",
    "nat",
    "int",
    "bool",
    "string",
    "True",
    "False",
    "and",
    "or",
    "not",
    "if",
    "then",
    "else",
    "let",
    "in",
    "case",
    "of",
    "where",
    "fixes",
    "assumes",
    "shows",
    "begin",
    "end",
    "theory",
    "imports",
    "using",
    "by",
    "have",
    "from",
    "hence",
    "thus",
    "moreover",
    "ultimately",
    "proof",
    "qed",
    "is",
    "for",
    "obtain",
    "show",
    "next",
    "note",
    "with",
    "also",
    "finally",
    "fun",
    "def",
    "open",
    "const",
    "consts",
    "types",
    "typedecl",
    "datatype",
    "locale",
    "context",
    "theorem",
    "lemma",
    "oops",
    "sorry",
    "structure",
    "infix",
    "axioms",
    "notes",
    "defines",
    "constrains",
    "Pure",
    "HOL",
    "Main",
    "THE",
    "SOME",
    "ALL",
    "EX",
    "op",
    "size",
    "hd",
    "tl",
    "rev",
    "max",
    "min",
    "abs",
    "sgn",
    "dvd",
    "mod",
    "div",
    "inv",
    "undefined",
];

#[derive(Clone, Debug)]
enum Sym {
    Infix(&'static str),
    /// Predicate shown as its argument itself (`true`) or negated (`false`).
    Truth(bool),
    Const(String),
}

struct Glyphs {
    and: &'static str,
    or: &'static str,
    not: &'static str,
    all: &'static str,
    imp: &'static str,
    lbr: &'static str,
    rbr: &'static str,
    fun: &'static str,
}

const ASCII: Glyphs = Glyphs {
    and: "\\<and>",
    or: "\\<or>",
    not: "\\<not>",
    all: "\\<And>",
    imp: "\\<Longrightarrow>",
    lbr: "\\<lbrakk>",
    rbr: "\\<rbrakk>",
    fun: "\\<Rightarrow>",
};

const UNICODE: Glyphs = Glyphs {
    and: "∧",
    or: "∨",
    not: "¬",
    all: "⋀",
    imp: "⟹",
    lbr: "⟦",
    rbr: "⟧",
    fun: "⇒",
};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Ctx {
    EqSide,
    InfixArg,
    AppArg,
}

/// Identifier tables for one model.
pub struct Renderer<'m> {
    model: &'m Model,
    opts: IsarOptions,
    g: &'static Glyphs,
    ports: HashMap<PortRef, String>,
    sorts: BTreeMap<SortRef, String>,
    /// Sorts that need a `typedecl`, in declaration order.
    decl_sorts: Vec<(SortRef, String)>,
    syms: HashMap<(SymbolRef, bool), Sym>,
    contracts: HashMap<ContractRef, String>,
    time: String,
}

fn builtin_sort(name: &str) -> Option<&'static str> {
    match name {
        "NAT" => Some("nat"),
        "INT" => Some("int"),
        "BOOLEAN" => Some("bool"),
        "STRING" => Some("string"),
        _ => None,
    }
}

fn sanitize_var(name: &str) -> String {
    name.replace('#', "__")
}

fn abbreviation(component: &str) -> String {
    let first = component
        .chars()
        .next()
        .map(|c| c.to_ascii_lowercase())
        .unwrap_or('c');
    let digits: String = {
        let rev: String = component
            .chars()
            .rev()
            .take_while(|c| c.is_ascii_digit())
            .collect();
        rev.chars().rev().collect()
    };
    format!("{first}{digits}")
}

impl<'m> Renderer<'m> {
    pub fn new(model: &'m Model, opts: IsarOptions) -> Result<Self, IsarError> {
        let mut vars = BTreeSet::new();
        for c in model
            .components
            .iter()
            .flat_map(|c| &c.contracts)
            .chain(model.contracts.iter().map(|a| &a.contract))
        {
            vars.extend(c.variables.iter().map(|v| v.name.clone()));
        }
        let time = ["n", "n0", "t", "t0"]
            .iter()
            .find(|t| !vars.contains(**t))
            .unwrap_or(&"n_time")
            .to_string();

        let all = model.all_ports();
        let compact = |p: &PortRef| format!("{}{}", abbreviation(&p.component), p.port);
        let qualified = |p: &PortRef| format!("{}_{}", p.component, p.port);
        let names: Vec<String> = all.iter().map(compact).collect();
        let distinct: BTreeSet<&String> = names.iter().collect();
        let use_compact = opts.naming == Naming::Compact
            && distinct.len() == names.len()
            && names
                .iter()
                .all(|c| !RESERVED.contains(&c.as_str()) && !vars.contains(c) && *c != time);
        let ports: HashMap<PortRef, String> = all
            .iter()
            .zip(names)
            .map(|(p, c)| (p.clone(), if use_compact { c } else { qualified(p) }))
            .collect();

        let mut sorts = BTreeMap::new();
        let mut decl_sorts = Vec::new();
        let mut by_name: HashMap<String, usize> = HashMap::new();
        for s in model.sorts() {
            *by_name.entry(s.name).or_default() += 1;
        }
        for s in model.sorts() {
            let name = match builtin_sort(&s.name) {
                Some(b) => b.to_string(),
                None => {
                    let n = if by_name[&s.name] > 1 || RESERVED.contains(&s.name.as_str()) {
                        format!("{}_{}", s.datatype, s.name)
                    } else {
                        s.name.clone()
                    };
                    decl_sorts.push((s.clone(), n.clone()));
                    n
                }
            };
            sorts.insert(s, name);
        }

        let mut r = Renderer {
            model,
            opts,
            g: if opts.unicode { &UNICODE } else { &ASCII },
            ports,
            sorts,
            decl_sorts,
            syms: HashMap::new(),
            contracts: HashMap::new(),
            time,
        };
        r.symbols()?;
        r.contract_names();
        r.check_collisions()?;
        Ok(r)
    }

    fn symbols(&mut self) -> Result<(), IsarError> {
        let mut plain: HashMap<String, usize> = HashMap::new();
        for dt in &self.model.datatypes {
            for o in &dt.operations {
                *plain.entry(o.name.clone()).or_default() += 1;
            }
            for p in &dt.predicates {
                *plain.entry(p.name.clone()).or_default() += 1;
            }
        }
        for dt in &self.model.datatypes {
            for o in &dt.operations {
                let sym = SymbolRef::new(&dt.name, &o.name);
                let infix = match (o.name.as_str(), o.args.len()) {
                    ("add", 2) => Some("+"),
                    ("sub", 2) => Some("-"),
                    ("ls", 2) => Some("<"),
                    ("gt", 2) => Some(">"),
                    _ => None,
                };
                let r = match infix {
                    Some(i) => Sym::Infix(i),
                    None if self.opts.strict => {
                        return Err(IsarError::UnmappedSymbol(sym.to_string()))
                    }
                    None => Sym::Const(self.const_name(&dt.name, &o.name, &plain)),
                };
                self.syms.insert((sym, false), r);
            }
            for p in &dt.predicates {
                let sym = SymbolRef::new(&dt.name, &p.name);
                let boolish = p.args.len() == 1
                    && self.sorts.get(&p.args[0]).map(String::as_str) == Some("bool");
                let r = match p.name.as_str() {
                    "true" if boolish => Sym::Truth(true),
                    "false" if boolish => Sym::Truth(false),
                    _ if self.opts.strict => {
                        return Err(IsarError::UnmappedSymbol(sym.to_string()))
                    }
                    _ => Sym::Const(self.const_name(&dt.name, &p.name, &plain)),
                };
                self.syms.insert((sym, true), r);
            }
        }
        Ok(())
    }

    fn const_name(&self, dt: &str, name: &str, plain: &HashMap<String, usize>) -> String {
        if plain[name] > 1 || RESERVED.contains(&name) {
            format!("{dt}_{name}")
        } else {
            name.to_string()
        }
    }

    fn contract_names(&mut self) {
        let mut count: HashMap<&str, usize> = HashMap::new();
        for c in self.model.components.iter().flat_map(|c| &c.contracts) {
            *count.entry(&c.name).or_default() += 1;
        }
        for comp in &self.model.components {
            for c in &comp.contracts {
                let name = if count[c.name.as_str()] > 1 || RESERVED.contains(&c.name.as_str()) {
                    format!("{}_{}", comp.name, c.name)
                } else {
                    c.name.clone()
                };
                self.contracts
                    .insert(ContractRef::new(&comp.name, &c.name), name);
            }
        }
    }

    fn check_collisions(&self) -> Result<(), IsarError> {
        let mut seen: HashMap<String, String> = HashMap::new();
        let mut claim = |name: &str, what: String| -> Result<(), IsarError> {
            if let Some(prev) = seen.insert(name.to_string(), what.clone()) {
                return Err(IsarError::NameCollision(format!(
                    "{name} names both {prev} and {what}"
                )));
            }
            Ok(())
        };
        let mut ports: Vec<_> = self.ports.iter().collect();
        ports.sort();
        for (p, n) in ports {
            claim(n, format!("port {p}"))?;
        }
        let mut contracts: Vec<_> = self.contracts.iter().collect();
        contracts.sort();
        for (c, n) in contracts {
            claim(n, format!("contract {c}"))?;
        }
        for c in &self.model.connections {
            claim(&self.connection_name(c), format!("connection {c}"))?;
        }
        let mut consts = BTreeSet::new();
        for s in self.syms.values() {
            if let Sym::Const(n) = s {
                consts.insert(n.clone());
            }
        }
        for n in consts {
            claim(&n, format!("symbol {n}"))?;
        }
        Ok(())
    }

    pub fn port_name(&self, p: &PortRef) -> String {
        self.ports
            .get(p)
            .cloned()
            .unwrap_or_else(|| format!("{}_{}", p.component, p.port))
    }

    pub fn contract_name(&self, c: &ContractRef) -> String {
        self.contracts
            .get(c)
            .cloned()
            .unwrap_or_else(|| format!("{}_{}", c.component, c.contract))
    }

    /// Assumption name of a connection: input first, then output.
    pub fn connection_name(&self, c: &Connection) -> String {
        format!("{}_{}", self.port_name(&c.input), self.port_name(&c.output))
    }

    fn legacy_connection_name(&self, c: &Connection) -> String {
        format!("{}_{}", self.port_name(&c.output), self.port_name(&c.input))
    }

    fn sort_name(&self, s: &SortRef) -> String {
        self.sorts
            .get(s)
            .cloned()
            .unwrap_or_else(|| "'a".to_string())
    }

    fn at(&self, offset: u32) -> String {
        if offset == 0 {
            self.time.clone()
        } else {
            format!("({}+{offset})", self.time)
        }
    }

    fn term(&self, t: &Term, offset: u32, ctx: Ctx) -> String {
        match t {
            Term::Var(v) => sanitize_var(&v.name),
            Term::Port(p) => {
                let s = format!("{} {}", self.port_name(p), self.at(offset));
                if ctx == Ctx::AppArg {
                    format!("({s})")
                } else {
                    s
                }
            }
            Term::App(f, args) => match self.syms.get(&(f.clone(), false)) {
                Some(Sym::Infix(op)) => {
                    let s = format!(
                        "{} {op} {}",
                        self.term(&args[0], offset, Ctx::InfixArg),
                        self.term(&args[1], offset, Ctx::InfixArg)
                    );
                    let comparison = matches!(*op, "<" | ">");
                    if ctx >= Ctx::InfixArg || (comparison && ctx >= Ctx::EqSide) {
                        format!("({s})")
                    } else {
                        s
                    }
                }
                other => {
                    let name = match other {
                        Some(Sym::Const(n)) => n.clone(),
                        _ => format!("{}_{}", f.datatype, f.name),
                    };
                    if args.is_empty() {
                        return name;
                    }
                    let parts: Vec<String> = args
                        .iter()
                        .map(|a| self.term(a, offset, Ctx::AppArg))
                        .collect();
                    let s = format!("{name} {}", parts.join(" "));
                    if ctx == Ctx::AppArg {
                        format!("({s})")
                    } else {
                        s
                    }
                }
            },
        }
    }

    /// `p` with every port read at `time + offset`.
    pub fn predicate(&self, p: &Predicate, offset: u32) -> String {
        self.pred(p, offset, false)
    }

    fn pred(&self, p: &Predicate, offset: u32, nested: bool) -> String {
        match p {
            Predicate::Eq(l, r) => {
                format!(
                    "{} = {}",
                    self.term(l, offset, Ctx::EqSide),
                    self.term(r, offset, Ctx::EqSide)
                )
            }
            Predicate::Atom(s, args) => match self.syms.get(&(s.clone(), true)) {
                Some(Sym::Truth(true)) if args.len() == 1 => {
                    self.term(&args[0], offset, Ctx::InfixArg)
                }
                Some(Sym::Truth(false)) if args.len() == 1 => {
                    format!(
                        "{} {}",
                        self.g.not,
                        self.term(&args[0], offset, Ctx::AppArg)
                    )
                }
                other => {
                    let name = match other {
                        Some(Sym::Const(n)) => n.clone(),
                        _ => format!("{}_{}", s.datatype, s.name),
                    };
                    let parts: Vec<String> = args
                        .iter()
                        .map(|a| self.term(a, offset, Ctx::AppArg))
                        .collect();
                    std::iter::once(name)
                        .chain(parts)
                        .collect::<Vec<_>>()
                        .join(" ")
                }
            },
            Predicate::And(ps) => {
                let s = ps
                    .iter()
                    .map(|q| self.pred(q, offset, true))
                    .collect::<Vec<_>>()
                    .join(&format!(" {} ", self.g.and));
                if nested && ps.len() > 1 {
                    format!("({s})")
                } else {
                    s
                }
            }
            Predicate::Or(ps) => {
                let s = ps
                    .iter()
                    .map(|q| self.pred(q, offset, true))
                    .collect::<Vec<_>>()
                    .join(&format!(" {} ", self.g.or));
                if nested && ps.len() > 1 {
                    format!("({s})")
                } else {
                    s
                }
            }
        }
    }

    fn premises(&self, p: &Predicate, offset: u32, out: &mut Vec<String>) {
        match p {
            Predicate::And(ps) => ps.iter().for_each(|q| self.premises(q, offset, out)),
            _ => out.push(self.pred(p, offset, false)),
        }
    }

    pub fn locale(&self) -> String {
        let g = self.g;
        let mut out = String::new();
        let name = &self.model.short_name;
        let mut fixes = Vec::new();
        for comp in &self.model.components {
            let ports: Vec<String> = comp
                .inputs
                .iter()
                .chain(&comp.outputs)
                .map(|p| {
                    let r = PortRef::new(&comp.name, &p.name);
                    format!(
                        "{} :: \"nat {} {}\"",
                        self.port_name(&r),
                        g.fun,
                        self.sort_name(&p.sort)
                    )
                })
                .collect();
            if !ports.is_empty() {
                fixes.push((comp.name.clone(), ports));
            }
        }
        let mut assumes = Vec::new();
        for comp in &self.model.components {
            for c in &comp.contracts {
                let mut bound = vec![self.time.clone()];
                bound.extend(c.variables.iter().map(|v| sanitize_var(&v.name)));
                let mut prem = Vec::new();
                for t in &c.triggers {
                    self.premises(&t.predicate, t.time, &mut prem);
                }
                let concl = self.predicate(&c.guarantee, c.duration);
                let body = match prem.len() {
                    0 => concl,
                    1 => format!("{} {} {concl}", prem[0], g.imp),
                    _ => format!("{}{}{} {} {concl}", g.lbr, prem.join("; "), g.rbr, g.imp),
                };
                assumes.push(format!(
                    "{}: \"{}{}. {body}\"",
                    self.contract_name(&ContractRef::new(&comp.name, &c.name)),
                    g.all,
                    bound.join(" ")
                ));
            }
        }
        let mut conns = Vec::new();
        for c in &self.model.connections {
            let stmt = format!(
                "\"{}{}. {} {} = {} {}\"",
                g.all,
                self.time,
                self.port_name(&c.input),
                self.time,
                self.port_name(&c.output),
                self.time
            );
            conns.push(format!("{}: {stmt}", self.connection_name(c)));
            if self.opts.legacy_connection_names {
                conns.push(format!("{}: {stmt}", self.legacy_connection_name(c)));
            }
        }

        let _ = write!(out, "locale {name}");
        if fixes.is_empty() && assumes.is_empty() && conns.is_empty() {
            out.push('\n');
            return out;
        }
        out.push_str(" =\n");
        if !fixes.is_empty() {
            out.push_str("  fixes\n");
            for (k, (comp, ports)) in fixes.iter().enumerate() {
                let _ = writeln!(out, "    \\<comment> \\<open>{comp}\\<close>");
                let lead = if k == 0 { "    " } else { "    and " };
                let _ = writeln!(out, "{lead}{}", ports.join(" and "));
            }
        }
        let mut first = true;
        let mut emit = |out: &mut String, header: Option<&str>, items: &[String]| {
            if items.is_empty() {
                return;
            }
            if let Some(h) = header {
                let _ = writeln!(out, "    \\<comment> \\<open>{h}\\<close>");
            }
            for it in items {
                let lead = if first { "  assumes " } else { "    and " };
                first = false;
                let _ = writeln!(out, "{lead}{it}");
            }
        };
        emit(&mut out, Some("Contracts"), &assumes);
        emit(&mut out, Some("Connections"), &conns);
        out
    }

    /// Theorem statement for `arch`, named `name`.
    pub fn theorem(&self, arch: &ArchitectureContract, name: &str) -> String {
        let c = &arch.contract;
        let mut fixes = vec![self.time.clone()];
        fixes.extend(c.variables.iter().map(|v| sanitize_var(&v.name)));
        let mut out = format!("theorem {name}:\n  fixes {}", fixes.join(" "));
        for (j, t) in c.triggers.iter().enumerate() {
            let kw = if j == 0 { "assumes" } else { "and" };
            let _ = write!(
                out,
                " {kw} a{j}: \"{}\"",
                self.predicate(&t.predicate, t.time)
            );
        }
        let _ = write!(
            out,
            "\n  shows \"{}\"\n",
            self.predicate(&c.guarantee, c.duration)
        );
        out
    }

    /// Structured proof for `proof`, using the substitutions and base
    /// times the checker found.
    pub fn proof(&self, proof: &Proof, report: &CheckReport) -> String {
        let mut out = String::from("proof -\n");
        for (i, step) in proof.steps.iter().enumerate() {
            if self.opts.step_comments {
                let _ = writeln!(out, "  (* step {i} *)");
            }
            let state = self.predicate(&step.state, step.time);
            if step.refs.is_empty() {
                let _ = writeln!(out, "  have s{i}: \"{state}\" by simp");
                continue;
            }
            let rat = self.model.contract(&step.rationale);
            let sr = report.steps.get(i);
            let sigma: Substitution = sr.and_then(|s| s.substitution.clone()).unwrap_or_default();
            let base = sr
                .and_then(|s| s.base)
                .unwrap_or_else(|| step.time.saturating_sub(rat.map_or(0, |c| c.duration)));
            for (j, set) in step.refs.iter().enumerate() {
                let mut words = Vec::new();
                if j > 0 {
                    words.push("moreover".to_string());
                }
                words.push("from".into());
                words.extend(set.iter().filter_map(|r| match r {
                    Reference::Trigger(k) => Some(format!("a{k}")),
                    _ => None,
                }));
                words.extend(set.iter().filter_map(|r| match r {
                    Reference::Step { step, .. } => Some(format!("s{step}")),
                    _ => None,
                }));
                let trig = match rat.and_then(|c| c.triggers.get(j)) {
                    Some(t) => self.predicate(&apply(&sigma, &t.predicate), base + t.time),
                    None => "True".to_string(),
                };
                words.push(format!("have \"{trig}\""));
                if set.iter().any(|r| matches!(r, Reference::Step { .. })) {
                    words.push("using".into());
                    for r in set {
                        if let Reference::Step { connections, .. } = r {
                            words.extend(connections.iter().map(|c| self.connection_name(c)));
                        }
                    }
                }
                words.push("by simp".into());
                let _ = writeln!(out, "  {}", words.join(" "));
            }
            let lead = match step.refs.len() {
                0 => "have",
                1 => "hence",
                _ => "ultimately have",
            };
            let _ = writeln!(
                out,
                "  {lead} s{i}: \"{state}\" using {} by blast",
                self.contract_name(&step.rationale)
            );
        }
        out.push_str("  thus ?thesis by auto\nqed\n");
        out
    }

    /// Declarations for sorts and symbols without a built-in rendering.
    pub fn preamble(&self) -> String {
        let mut out = String::new();
        for (_, n) in &self.decl_sorts {
            let _ = writeln!(out, "typedecl {n}");
        }
        let mut consts = Vec::new();
        for dt in &self.model.datatypes {
            for o in &dt.operations {
                if let Some(Sym::Const(n)) =
                    self.syms.get(&(SymbolRef::new(&dt.name, &o.name), false))
                {
                    let mut ty: Vec<String> = o.args.iter().map(|s| self.sort_name(s)).collect();
                    ty.push(self.sort_name(&o.result));
                    consts.push((n.clone(), ty.join(&format!(" {} ", self.g.fun))));
                }
            }
            for p in &dt.predicates {
                if let Some(Sym::Const(n)) =
                    self.syms.get(&(SymbolRef::new(&dt.name, &p.name), true))
                {
                    let mut ty: Vec<String> = p.args.iter().map(|s| self.sort_name(s)).collect();
                    ty.push("bool".into());
                    consts.push((n.clone(), ty.join(&format!(" {} ", self.g.fun))));
                }
            }
        }
        let mut seen = BTreeSet::new();
        consts.retain(|(n, _)| seen.insert(n.clone()));
        if !consts.is_empty() {
            out.push_str("consts\n");
            for (n, ty) in consts {
                let _ = writeln!(out, "  {n} :: \"{ty}\"");
            }
        }
        out
    }
}

pub fn emit_locale(model: &Model, opts: IsarOptions) -> Result<String, IsarError> {
    Ok(Renderer::new(model, opts)?.locale())
}

/// Render `p` with every port read at `n+offset`.
pub fn to_isabelle(
    model: &Model,
    p: &Predicate,
    offset: u32,
    opts: IsarOptions,
) -> Result<String, IsarError> {
    Ok(Renderer::new(model, opts)?.predicate(p, offset))
}

pub fn emit_theorem(
    model: &Model,
    arch: &ArchitectureContract,
    opts: IsarOptions,
) -> Result<String, IsarError> {
    Ok(Renderer::new(model, opts)?.theorem(arch, &arch.contract.name))
}

pub fn emit_isar_proof(
    model: &Model,
    arch: &ArchitectureContract,
    proof: &Proof,
    opts: IsarOptions,
) -> Result<String, IsarError> {
    let r = Renderer::new(model, opts)?;
    Ok(r.proof(proof, &check_proof(model, arch, proof)))
}

/// Complete theory: declarations, locale, and one theorem per architecture
/// contract inside the locale context. Contracts without a proof end in
/// `oops`; repeated contract names get a `_2`, `_3`, ... suffix.
pub fn emit_theory(model: &Model, opts: IsarOptions) -> Result<String, IsarError> {
    let r = Renderer::new(model, opts)?;
    let name = &model.short_name;
    let mut out = format!("theory {name}\n  imports Main\nbegin\n\n");
    let pre = r.preamble();
    if !pre.is_empty() {
        out.push_str(&pre);
        out.push('\n');
    }
    out.push_str(&r.locale());
    out.push('\n');
    if !model.contracts.is_empty() {
        let _ = writeln!(out, "context {name}\nbegin\n");
        let mut used: HashMap<&str, usize> = HashMap::new();
        for arch in &model.contracts {
            let k = used.entry(&arch.contract.name).or_default();
            *k += 1;
            let thm = if *k == 1 {
                arch.contract.name.clone()
            } else {
                format!("{}_{k}", arch.contract.name)
            };
            out.push_str(&r.theorem(arch, &thm));
            match &arch.proof {
                Some(p) => out.push_str(&r.proof(p, &check_proof(model, arch, p))),
                None => out.push_str("  oops\n"),
            }
            out.push('\n');
        }
        out.push_str("end\n\n");
    }
    out.push_str("end\n");
    Ok(out)
}
