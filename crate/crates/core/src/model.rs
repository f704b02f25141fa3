//! Domain types: signatures, ports, component types, connections,
//! predicates, contracts and architecture proofs.
//!
//! A [`Model`] is one parsed pattern. Component types are single
//! instances; ports are addressed as `Type.port`.

use std::collections::BTreeSet;
use std::fmt;

use crate::diagnostic::Loc;

/// Qualified sort name `DT.Sort`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortRef {
    pub datatype: String,
    pub name: String,
}

impl SortRef {
    pub fn new(datatype: impl Into<String>, name: impl Into<String>) -> Self {
        SortRef {
            datatype: datatype.into(),
            name: name.into(),
        }
    }

    /// Placeholder sort used for names the parser could not resolve.
    pub fn unresolved() -> Self {
        SortRef::new("?", "?")
    }

    pub fn is_unresolved(&self) -> bool {
        self.datatype == "?"
    }
}

impl fmt::Display for SortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.datatype, self.name)
    }
}

/// Qualified operation or predicate symbol `DT.name`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolRef {
    pub datatype: String,
    pub name: String,
}

impl SymbolRef {
    pub fn new(datatype: impl Into<String>, name: impl Into<String>) -> Self {
        SymbolRef {
            datatype: datatype.into(),
            name: name.into(),
        }
    }
}

impl fmt::Display for SymbolRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.datatype, self.name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PredicateDecl {
    pub name: String,
    pub args: Vec<SortRef>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OperationDecl {
    pub name: String,
    pub args: Vec<SortRef>,
    pub result: SortRef,
    pub loc: Loc,
}

/// One `DT` block of the data-type signature.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DataType {
    pub name: String,
    pub sorts: Vec<String>,
    pub predicates: Vec<PredicateDecl>,
    pub operations: Vec<OperationDecl>,
    pub loc: Loc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Port {
    pub name: String,
    pub sort: SortRef,
    pub loc: Loc,
}

/// Reference to a port of a component type: `Type.port`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub component: String,
    pub port: String,
}

impl PortRef {
    pub fn new(component: impl Into<String>, port: impl Into<String>) -> Self {
        PortRef {
            component: component.into(),
            port: port.into(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.port)
    }
}

/// Reference to a component contract: `Type.contract`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractRef {
    pub component: String,
    pub contract: String,
}

impl ContractRef {
    pub fn new(component: impl Into<String>, contract: impl Into<String>) -> Self {
        ContractRef {
            component: component.into(),
            contract: contract.into(),
        }
    }
}

impl fmt::Display for ContractRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.component, self.contract)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    pub name: String,
    pub sort: SortRef,
}

impl Variable {
    pub fn new(name: impl Into<String>, sort: SortRef) -> Self {
        Variable {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Variable),
    Port(PortRef),
    App(SymbolRef, Vec<Term>),
}

impl Term {
    pub fn var(name: &str, sort: &SortRef) -> Term {
        Term::Var(Variable::new(name, sort.clone()))
    }

    pub fn port(component: &str, port: &str) -> Term {
        Term::Port(PortRef::new(component, port))
    }

    pub fn app(symbol: SymbolRef, args: Vec<Term>) -> Term {
        Term::App(symbol, args)
    }

    pub fn visit_ports<'a>(&'a self, f: &mut dyn FnMut(&'a PortRef)) {
        match self {
            Term::Var(_) => {}
            Term::Port(p) => f(p),
            Term::App(_, args) => args.iter().for_each(|a| a.visit_ports(f)),
        }
    }

    pub fn visit_vars<'a>(&'a self, f: &mut dyn FnMut(&'a Variable)) {
        match self {
            Term::Var(v) => f(v),
            Term::Port(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.visit_vars(f)),
        }
    }

    pub fn has_ports(&self) -> bool {
        let mut found = false;
        self.visit_ports(&mut |_| found = true);
        found
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Port(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Replace variables by the terms `lookup` returns for them.
    pub fn substitute(&self, lookup: &dyn Fn(&Variable) -> Option<Term>) -> Term {
        match self {
            Term::Var(v) => lookup(v).unwrap_or_else(|| self.clone()),
            Term::Port(_) => self.clone(),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.substitute(lookup)).collect(),
            ),
        }
    }

    /// Replace ports by the terms `lookup` returns for them.
    pub fn map_ports(&self, lookup: &dyn Fn(&PortRef) -> Term) -> Term {
        match self {
            Term::Var(_) => self.clone(),
            Term::Port(p) => lookup(p),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.map_ports(lookup)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(&v.name),
            Term::Port(p) => write!(f, "{p}"),
            Term::App(s, args) => {
                write!(f, "{s}[")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("]")
            }
        }
    }
}

/// Positive predicate fragment: equalities, atoms, conjunction, disjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predicate {
    Eq(Term, Term),
    Atom(SymbolRef, Vec<Term>),
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
}

impl Predicate {
    pub fn eq(lhs: Term, rhs: Term) -> Predicate {
        Predicate::Eq(lhs, rhs)
    }

    /// Conjunction, flattening directly nested conjunctions and dropping
    /// the wrapper for a single operand.
    pub fn and(parts: Vec<Predicate>) -> Predicate {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Predicate::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Predicate::And(out)
        }
    }

    pub fn or(parts: Vec<Predicate>) -> Predicate {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Predicate::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Predicate::Or(out)
        }
    }

    pub fn visit_terms<'a>(&'a self, f: &mut dyn FnMut(&'a Term)) {
        match self {
            Predicate::Eq(l, r) => {
                f(l);
                f(r);
            }
            Predicate::Atom(_, args) => args.iter().for_each(f),
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().for_each(|p| p.visit_terms(f)),
        }
    }

    pub fn ports(&self) -> BTreeSet<&PortRef> {
        let mut out = BTreeSet::new();
        self.visit_terms(&mut |t| {
            t.visit_ports(&mut |p| {
                out.insert(p);
            })
        });
        out
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Predicate {
        match self {
            Predicate::Eq(l, r) => Predicate::Eq(f(l), f(r)),
            Predicate::Atom(s, args) => Predicate::Atom(s.clone(), args.iter().map(f).collect()),
            Predicate::And(ps) => Predicate::And(ps.iter().map(|p| p.map_terms(f)).collect()),
            Predicate::Or(ps) => Predicate::Or(ps.iter().map(|p| p.map_terms(f)).collect()),
        }
    }

    pub fn substitute(&self, lookup: &dyn Fn(&Variable) -> Option<Term>) -> Predicate {
        self.map_terms(&|t| t.substitute(lookup))
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(p: &Predicate, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match p {
                Predicate::And(_) | Predicate::Or(_) => write!(f, "({p})"),
                _ => write!(f, "{p}"),
            }
        }
        match self {
            Predicate::Eq(l, r) => write!(f, "[{l} = {r}]"),
            Predicate::Atom(s, args) => write!(f, "{}", Term::App(s.clone(), args.clone())),
            Predicate::And(ps) | Predicate::Or(ps) => {
                let op = if matches!(self, Predicate::And(_)) {
                    " /\\ "
                } else {
                    " \\/ "
                };
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(op)?;
                    }
                    child(p, f)?;
                }
                Ok(())
            }
        }
    }
}

/// Names of all variables occurring in `p`.
pub fn free_variables(p: &Predicate) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    p.visit_terms(&mut |t| {
        t.visit_vars(&mut |v| {
            out.insert(v.name.clone());
        })
    });
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Trigger {
    pub label: String,
    pub predicate: Predicate,
    pub time: u32,
    pub loc: Loc,
}

/// An assume-guarantee contract: if every trigger holds at its relative
/// time, the guarantee holds `duration` time units after the first trigger.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Contract {
    pub name: String,
    pub variables: Vec<Variable>,
    pub triggers: Vec<Trigger>,
    pub guarantee: Predicate,
    pub duration: u32,
    pub loc: Loc,
}

impl Contract {
    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn trigger_index(&self, label: &str) -> Option<usize> {
        self.triggers.iter().position(|t| t.label == label)
    }

    /// The three well-formedness conditions on trigger times and duration.
    pub fn is_well_timed(&self) -> bool {
        match self.triggers.last() {
            None => self.duration > 0,
            Some(last) => {
                self.triggers[0].time == 0
                    && self.triggers.windows(2).all(|w| w[0].time <= w[1].time)
                    && self.duration > last.time
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComponentType {
    pub name: String,
    pub inputs: Vec<Port>,
    pub outputs: Vec<Port>,
    pub contracts: Vec<Contract>,
    pub loc: Loc,
}

impl ComponentType {
    pub fn port(&self, name: &str) -> Option<(&Port, Direction)> {
        self.inputs
            .iter()
            .find(|p| p.name == name)
            .map(|p| (p, Direction::Input))
            .or_else(|| {
                self.outputs
                    .iter()
                    .find(|p| p.name == name)
                    .map(|p| (p, Direction::Output))
            })
    }

    pub fn contract(&self, name: &str) -> Option<&Contract> {
        self.contracts.iter().find(|c| c.name == name)
    }

    pub fn port_refs(&self) -> impl Iterator<Item = PortRef> + '_ {
        self.inputs
            .iter()
            .chain(&self.outputs)
            .map(|p| PortRef::new(&self.name, &p.name))
    }
}

/// One entry of the connection function: `input ↦ output`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Connection {
    pub input: PortRef,
    pub output: PortRef,
    pub loc: Loc,
}

impl Connection {
    pub fn new(input: PortRef, output: PortRef) -> Self {
        Connection {
            input,
            output,
            loc: Loc::synthetic(),
        }
    }

    pub fn same_link(&self, other: &Connection) -> bool {
        self.input == other.input && self.output == other.output
    }
}

impl fmt::Display for Connection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.input, self.output)
    }
}

/// A single member of a reference set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Reference {
    /// Index of a trigger of the architecture contract.
    Trigger(usize),
    /// Index of an earlier proof step plus the connections used to pass
    /// its outputs on.
    Step {
        step: usize,
        connections: Vec<Connection>,
    },
}

/// One entry `r(j)`: a non-empty set of references.
pub type RefSet = Vec<Reference>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofStep {
    pub label: String,
    pub time: u32,
    pub state: Predicate,
    pub rationale: ContractRef,
    pub refs: Vec<RefSet>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Proof {
    pub steps: Vec<ProofStep>,
    pub loc: Loc,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArchitectureContract {
    pub contract: Contract,
    pub proof: Option<Proof>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Model {
    pub name: String,
    pub short_name: String,
    pub datatypes: Vec<DataType>,
    pub components: Vec<ComponentType>,
    pub connections: Vec<Connection>,
    pub contracts: Vec<ArchitectureContract>,
    pub loc: Loc,
}

impl Model {
    pub fn component(&self, name: &str) -> Option<&ComponentType> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn port(&self, port: &PortRef) -> Option<(&Port, Direction)> {
        self.component(&port.component)?.port(&port.port)
    }

    pub fn port_sort(&self, port: &PortRef) -> Option<&SortRef> {
        self.port(port).map(|(p, _)| &p.sort)
    }

    pub fn port_direction(&self, port: &PortRef) -> Option<Direction> {
        self.port(port).map(|(_, d)| d)
    }

    pub fn contract(&self, r: &ContractRef) -> Option<&Contract> {
        self.component(&r.component)?.contract(&r.contract)
    }

    pub fn architecture_contract(&self, name: &str) -> Option<&ArchitectureContract> {
        self.contracts.iter().find(|c| c.contract.name == name)
    }

    pub fn datatype(&self, name: &str) -> Option<&DataType> {
        self.datatypes.iter().find(|d| d.name == name)
    }

    pub fn has_sort(&self, sort: &SortRef) -> bool {
        self.datatype(&sort.datatype)
            .is_some_and(|d| d.sorts.contains(&sort.name))
    }

    pub fn operation(&self, sym: &SymbolRef) -> Option<&OperationDecl> {
        self.datatype(&sym.datatype)?
            .operations
            .iter()
            .find(|o| o.name == sym.name)
    }

    pub fn predicate(&self, sym: &SymbolRef) -> Option<&PredicateDecl> {
        self.datatype(&sym.datatype)?
            .predicates
            .iter()
            .find(|p| p.name == sym.name)
    }

    pub fn sorts(&self) -> impl Iterator<Item = SortRef> + '_ {
        self.datatypes
            .iter()
            .flat_map(|d| d.sorts.iter().map(move |s| SortRef::new(&d.name, s)))
    }

    pub fn has_connection(&self, input: &PortRef, output: &PortRef) -> bool {
        self.connections
            .iter()
            .any(|c| c.input == *input && c.output == *output)
    }

    /// Every port of every component, inputs before outputs, in declaration order.
    pub fn all_ports(&self) -> Vec<PortRef> {
        self.components.iter().flat_map(|c| c.port_refs()).collect()
    }

    pub fn component_contract_count(&self) -> usize {
        self.components.iter().map(|c| c.contracts.len()).sum()
    }

    /// Sort of a term, or `None` if something in it is unknown or ill-sorted.
    pub fn sort_of(&self, term: &Term) -> Option<SortRef> {
        match term {
            Term::Var(v) => (!v.sort.is_unresolved()).then(|| v.sort.clone()),
            Term::Port(p) => self.port_sort(p).cloned(),
            Term::App(sym, args) => {
                let op = self.operation(sym)?;
                if op.args.len() != args.len() {
                    return None;
                }
                for (a, s) in args.iter().zip(&op.args) {
                    if self.sort_of(a).as_ref() != Some(s) {
                        return None;
                    }
                }
                Some(op.result.clone())
            }
        }
    }

    /// First sort error in `p`, if any.
    pub fn sort_error(&self, p: &Predicate) -> Option<String> {
        match p {
            Predicate::Eq(l, r) => {
                let ls = self.term_sort_checked(l)?;
                let rs = self.term_sort_checked(r)?;
                match (ls, rs) {
                    (Ok(a), Ok(b)) if a != b => Some(format!("[{l} = {r}] compares {a} with {b}")),
                    (Err(e), _) | (_, Err(e)) => Some(e),
                    _ => None,
                }
            }
            Predicate::Atom(sym, args) => {
                let Some(decl) = self.predicate(sym) else {
                    return Some(format!("unknown predicate {sym}"));
                };
                if decl.args.len() != args.len() {
                    return Some(format!(
                        "{sym} expects {} argument(s), got {}",
                        decl.args.len(),
                        args.len()
                    ));
                }
                for (a, s) in args.iter().zip(&decl.args) {
                    match self.term_sort_checked(a) {
                        Some(Ok(got)) if got != *s => {
                            return Some(format!(
                                "argument {a} of {sym} has sort {got}, expected {s}"
                            ))
                        }
                        Some(Err(e)) => return Some(e),
                        _ => {}
                    }
                }
                None
            }
            Predicate::And(ps) | Predicate::Or(ps) => ps.iter().find_map(|q| self.sort_error(q)),
        }
    }

    // `None` means "no opinion" (unresolved names are reported elsewhere).
    fn term_sort_checked(&self, t: &Term) -> Option<Result<SortRef, String>> {
        match t {
            Term::Var(v) if v.sort.is_unresolved() => None,
            Term::Var(v) => Some(Ok(v.sort.clone())),
            Term::Port(p) => self.port_sort(p).map(|s| Ok(s.clone())),
            Term::App(sym, args) => {
                let Some(op) = self.operation(sym) else {
                    return Some(Err(format!("unknown operation {sym}")));
                };
                if op.args.len() != args.len() {
                    return Some(Err(format!(
                        "{sym} expects {} argument(s), got {}",
                        op.args.len(),
                        args.len()
                    )));
                }
                for (a, s) in args.iter().zip(&op.args) {
                    match self.term_sort_checked(a) {
                        Some(Ok(got)) if got != *s => {
                            return Some(Err(format!(
                                "argument {a} of {sym} has sort {got}, expected {s}"
                            )))
                        }
                        Some(Err(e)) => return Some(Err(e)),
                        _ => {}
                    }
                }
                Some(Ok(op.result.clone()))
            }
        }
    }
}
