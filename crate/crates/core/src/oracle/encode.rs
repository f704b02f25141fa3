//! Bounded composition as a propositional problem.
//!
//! Connected ports share one cell per instant (the connection equations are
//! built in). A cell holding a value of a carrier of size k is k one-hot
//! literals. Contracts are grounded for every window and every variable
//! assignment, so each instance is a plain clause over cell literals and
//! Tseitin definitions of the compound terms.

use std::collections::{BTreeMap, HashMap};

use varisat::{ExtendFormula, Lit, Solver};

use super::trace::{valuations, Trace, Valuation};
use super::universe::{tuples, FiniteUniverse};
use super::OracleError;
use crate::model::{Contract, Model, PortRef, Predicate, SortRef, Term};

/// Behaviors admitted for one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BehaviorSpec {
    /// Every trace satisfying all of the component's contracts.
    Contracts,
    /// Exactly these traces over the component's ports (inputs, then
    /// outputs, in declaration order).
    Explicit(Vec<Trace>),
}

/// Default limit on the number of clauses of one problem.
pub const DEFAULT_CLAUSE_BUDGET: usize = 4_000_000;

#[derive(Clone, Debug)]
enum Val {
    Const(usize),
    Lits(Vec<Lit>),
}

#[derive(Clone, Copy, Debug)]
enum B {
    T,
    F,
    L(Lit),
}

impl std::ops::Not for B {
    type Output = B;
    fn not(self) -> B {
        match self {
            B::T => B::F,
            B::F => B::T,
            B::L(l) => B::L(!l),
        }
    }
}

struct Encoder<'a> {
    model: &'a Model,
    u: &'a FiniteUniverse,
    horizon: usize,
    solver: Solver<'static>,
    ports: Vec<PortRef>,
    class_of: HashMap<PortRef, usize>,
    class_sort: Vec<SortRef>,
    cells: Vec<Vec<Vec<Lit>>>,
    clauses: usize,
    budget: usize,
}

impl<'a> Encoder<'a> {
    fn new(
        model: &'a Model,
        u: &'a FiniteUniverse,
        horizon: usize,
        budget: usize,
    ) -> Result<Self, OracleError> {
        u.check_against(model).map_err(OracleError::Universe)?;
        let ports = model.all_ports();
        let mut parent: Vec<usize> = (0..ports.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let index: HashMap<&PortRef, usize> =
            ports.iter().enumerate().map(|(i, p)| (p, i)).collect();
        for c in &model.connections {
            if let (Some(&a), Some(&b)) = (index.get(&c.input), index.get(&c.output)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut class_of = HashMap::new();
        let mut root_class = HashMap::new();
        let mut class_sort = Vec::new();
        for (i, p) in ports.iter().enumerate() {
            let r = find(&mut parent, i);
            let k = *root_class.entry(r).or_insert_with(|| {
                class_sort.push(
                    model
                        .port_sort(&ports[r])
                        .cloned()
                        .unwrap_or_else(SortRef::unresolved),
                );
                class_sort.len() - 1
            });
            class_of.insert(p.clone(), k);
        }
        let mut e = Encoder {
            model,
            u,
            horizon,
            solver: Solver::new(),
            ports,
            class_of,
            class_sort,
            cells: Vec::new(),
            clauses: 0,
            budget,
        };
        for k in 0..e.class_sort.len() {
            let size = u.size(&e.class_sort[k]);
            let mut per_t = Vec::new();
            for _ in 0..horizon {
                let lits = e.one_hot(size)?;
                per_t.push(lits);
            }
            e.cells.push(per_t);
        }
        Ok(e)
    }

    fn raw_clause(&mut self, lits: &[Lit]) -> Result<(), OracleError> {
        self.clauses += 1;
        if self.clauses > self.budget {
            return Err(OracleError::Explosion(format!(
                "more than {} clauses",
                self.budget
            )));
        }
        self.solver.add_clause(lits);
        Ok(())
    }

    fn one_hot(&mut self, size: usize) -> Result<Vec<Lit>, OracleError> {
        let lits: Vec<Lit> = (0..size).map(|_| self.solver.new_lit()).collect();
        self.raw_clause(&lits)?;
        for i in 0..size {
            for j in i + 1..size {
                self.raw_clause(&[!lits[i], !lits[j]])?;
            }
        }
        Ok(lits)
    }

    /// Add the disjunction of `parts`.
    fn clause(&mut self, parts: &[B]) -> Result<(), OracleError> {
        let mut lits = Vec::new();
        for b in parts {
            match b {
                B::T => return Ok(()),
                B::F => {}
                B::L(l) => lits.push(*l),
            }
        }
        self.raw_clause(&lits)
    }

    fn and(&mut self, parts: Vec<B>) -> Result<B, OracleError> {
        let mut lits = Vec::new();
        for b in parts {
            match b {
                B::F => return Ok(B::F),
                B::T => {}
                B::L(l) => lits.push(l),
            }
        }
        match lits.len() {
            0 => Ok(B::T),
            1 => Ok(B::L(lits[0])),
            _ => {
                let a = self.solver.new_lit();
                for &l in &lits {
                    self.raw_clause(&[!a, l])?;
                }
                let mut back: Vec<Lit> = lits.iter().map(|&l| !l).collect();
                back.push(a);
                self.raw_clause(&back)?;
                Ok(B::L(a))
            }
        }
    }

    fn or(&mut self, parts: Vec<B>) -> Result<B, OracleError> {
        let negated: Vec<B> = parts.into_iter().map(|b| !b).collect();
        Ok(!self.and(negated)?)
    }

    fn is(v: &Val, x: usize) -> B {
        match v {
            Val::Const(c) if *c == x => B::T,
            Val::Const(_) => B::F,
            Val::Lits(l) => B::L(l[x]),
        }
    }

    fn sort_of(&self, t: &Term) -> SortRef {
        self.model.sort_of(t).unwrap_or_else(SortRef::unresolved)
    }

    fn term(&mut self, t: &Term, at: usize, sigma: &Valuation) -> Result<Val, OracleError> {
        match t {
            Term::Var(v) => Ok(Val::Const(sigma[&v.name])),
            Term::Port(p) => {
                let k = self.class_of[p];
                Ok(Val::Lits(self.cells[k][at].clone()))
            }
            Term::App(f, args) => {
                let vals: Vec<Val> = args
                    .iter()
                    .map(|a| self.term(a, at, sigma))
                    .collect::<Result<_, _>>()?;
                if vals.iter().all(|v| matches!(v, Val::Const(_))) {
                    let a: Vec<usize> = vals
                        .iter()
                        .map(|v| if let Val::Const(c) = v { *c } else { 0 })
                        .collect();
                    return Ok(Val::Const(self.u.apply(f, &a).expect("total operation")));
                }
                let sizes: Vec<usize> =
                    args.iter().map(|a| self.u.size(&self.sort_of(a))).collect();
                let out = self.one_hot(self.u.size(&self.sort_of(t)))?;
                for tup in tuples(&sizes) {
                    let mut cl: Vec<B> = vals
                        .iter()
                        .zip(&tup)
                        .map(|(v, &x)| !Self::is(v, x))
                        .collect();
                    cl.push(B::L(out[self.u.apply(f, &tup).expect("total operation")]));
                    self.clause(&cl)?;
                }
                Ok(Val::Lits(out))
            }
        }
    }

    fn pred(&mut self, p: &Predicate, at: usize, sigma: &Valuation) -> Result<B, OracleError> {
        match p {
            Predicate::Eq(l, r) => {
                let (a, b) = (self.term(l, at, sigma)?, self.term(r, at, sigma)?);
                match (&a, &b) {
                    (Val::Const(x), Val::Const(y)) => Ok(if x == y { B::T } else { B::F }),
                    (Val::Const(x), v) | (v, Val::Const(x)) => Ok(Self::is(v, *x)),
                    (Val::Lits(la), Val::Lits(lb)) => {
                        let e = self.solver.new_lit();
                        for (x, y) in la.iter().zip(lb) {
                            self.raw_clause(&[!*x, !*y, e])?;
                            self.raw_clause(&[!e, !*x, *y])?;
                        }
                        Ok(B::L(e))
                    }
                }
            }
            Predicate::Atom(s, args) => {
                let vals: Vec<Val> = args
                    .iter()
                    .map(|a| self.term(a, at, sigma))
                    .collect::<Result<_, _>>()?;
                let sizes: Vec<usize> =
                    args.iter().map(|a| self.u.size(&self.sort_of(a))).collect();
                let mut cases = Vec::new();
                for tup in tuples(&sizes) {
                    if self.u.holds(s, &tup) {
                        let m: Vec<B> = vals
                            .iter()
                            .zip(&tup)
                            .map(|(v, &x)| Self::is(v, x))
                            .collect();
                        cases.push(self.and(m)?);
                    }
                }
                self.or(cases)
            }
            Predicate::And(ps) => {
                let parts = ps
                    .iter()
                    .map(|q| self.pred(q, at, sigma))
                    .collect::<Result<_, _>>()?;
                self.and(parts)
            }
            Predicate::Or(ps) => {
                let parts = ps
                    .iter()
                    .map(|q| self.pred(q, at, sigma))
                    .collect::<Result<_, _>>()?;
                self.or(parts)
            }
        }
    }

    /// Require every fitting window of the trace to satisfy `c`.
    fn require_contract(&mut self, c: &Contract) -> Result<(), OracleError> {
        let d = c.duration as usize;
        if self.horizon <= d {
            return Ok(());
        }
        for n in 0..self.horizon - d {
            for sigma in valuations(self.u, &c.variables) {
                let mut cl = Vec::new();
                for tr in &c.triggers {
                    cl.push(!self.pred(&tr.predicate, n + tr.time as usize, &sigma)?);
                }
                cl.push(self.pred(&c.guarantee, n + d, &sigma)?);
                self.clause(&cl)?;
            }
        }
        Ok(())
    }

    /// Require the ports of `component` to follow one of `traces`.
    fn require_one_of(&mut self, component: &str, traces: &[Trace]) -> Result<(), OracleError> {
        let mut options = Vec::new();
        for tr in traces {
            if tr.horizon() < self.horizon {
                return Err(OracleError::HorizonTooSmall {
                    horizon: tr.horizon(),
                    needed: self.horizon,
                });
            }
            let mut eqs = Vec::new();
            for (i, p) in tr.ports.iter().enumerate() {
                if p.component != component {
                    continue;
                }
                let Some(&k) = self.class_of.get(p) else {
                    continue;
                };
                for t in 0..self.horizon {
                    eqs.push(B::L(self.cells[k][t][tr.valuations[t][i]]));
                }
            }
            options.push(self.and(eqs)?);
        }
        self.clause(&options)
    }

    /// Literal that is true iff `c` is violated in some fitting window.
    /// Returns the windows together with their literals for decoding.
    fn violation(&mut self, c: &Contract) -> Result<Vec<(usize, Valuation, B)>, OracleError> {
        let d = c.duration as usize;
        if self.horizon <= d {
            return Err(OracleError::HorizonTooSmall {
                horizon: self.horizon,
                needed: d + 1,
            });
        }
        let mut out = Vec::new();
        for n in 0..self.horizon - d {
            for sigma in valuations(self.u, &c.variables) {
                let mut parts = Vec::new();
                for tr in &c.triggers {
                    parts.push(self.pred(&tr.predicate, n + tr.time as usize, &sigma)?);
                }
                parts.push(!self.pred(&c.guarantee, n + d, &sigma)?);
                let v = self.and(parts)?;
                out.push((n, sigma, v));
            }
        }
        Ok(out)
    }

    fn require_any(&mut self, parts: &[B]) -> Result<(), OracleError> {
        self.clause(parts)
    }

    fn solve(&mut self) -> Result<Option<Vec<bool>>, OracleError> {
        match self.solver.solve() {
            Ok(true) => {
                let model = self.solver.model().expect("model after sat");
                let max = model.iter().map(|l| l.index()).max().map_or(0, |m| m + 1);
                let mut vals = vec![false; max];
                for l in model {
                    vals[l.index()] = l.is_positive();
                }
                Ok(Some(vals))
            }
            Ok(false) => Ok(None),
            Err(e) => Err(OracleError::Explosion(e.to_string())),
        }
    }

    fn lit_true(vals: &[bool], l: Lit) -> bool {
        vals.get(l.index()).copied().unwrap_or(false) == l.is_positive()
    }

    fn holds(vals: &[bool], b: B) -> bool {
        match b {
            B::T => true,
            B::F => false,
            B::L(l) => Self::lit_true(vals, l),
        }
    }

    fn decode(&self, vals: &[bool]) -> Trace {
        let valuations = (0..self.horizon)
            .map(|t| {
                self.ports
                    .iter()
                    .map(|p| {
                        let lits = &self.cells[self.class_of[p]][t];
                        lits.iter()
                            .position(|&l| Self::lit_true(vals, l))
                            .unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        Trace {
            ports: self.ports.clone(),
            valuations,
        }
    }

    /// Exclude the cell assignment of `vals` from further solutions.
    fn block(&mut self, vals: &[bool]) -> Result<(), OracleError> {
        let mut cl = Vec::new();
        for per_t in &self.cells {
            for lits in per_t {
                if let Some(&l) = lits.iter().find(|&&l| Self::lit_true(vals, l)) {
                    cl.push(!l);
                }
            }
        }
        self.raw_clause(&cl)
    }
}

/// All traces of length `horizon` in which every component follows its
/// behavior specification (missing entries default to
/// [`BehaviorSpec::Contracts`]) and connected ports agree, sorted.
pub fn compose_behaviors(
    model: &Model,
    u: &FiniteUniverse,
    behaviors: &BTreeMap<String, BehaviorSpec>,
    horizon: usize,
    limit: usize,
) -> Result<Vec<Trace>, OracleError> {
    let mut e = Encoder::new(model, u, horizon, DEFAULT_CLAUSE_BUDGET)?;
    for comp in &model.components {
        match behaviors
            .get(&comp.name)
            .unwrap_or(&BehaviorSpec::Contracts)
        {
            BehaviorSpec::Contracts => {
                for c in &comp.contracts {
                    e.require_contract(c)?;
                }
            }
            BehaviorSpec::Explicit(ts) => e.require_one_of(&comp.name, ts)?,
        }
    }
    let mut out = Vec::new();
    while let Some(vals) = e.solve()? {
        if out.len() == limit {
            return Err(OracleError::Explosion(format!(
                "more than {limit} composed traces"
            )));
        }
        out.push(e.decode(&vals));
        e.block(&vals)?;
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verification {
    Holds,
    /// A composed trace violating the contract in the given window.
    Counterexample {
        trace: Trace,
        window: usize,
        sigma: Valuation,
    },
}

/// Whether every trace composed from contract-satisfying component
/// behaviors satisfies `contract` within `horizon`.
pub fn verify_satisfaction(
    model: &Model,
    contract: &Contract,
    u: &FiniteUniverse,
    horizon: usize,
) -> Result<Verification, OracleError> {
    verify_with_budget(model, contract, u, horizon, DEFAULT_CLAUSE_BUDGET)
}

pub fn verify_with_budget(
    model: &Model,
    contract: &Contract,
    u: &FiniteUniverse,
    horizon: usize,
    budget: usize,
) -> Result<Verification, OracleError> {
    let mut e = Encoder::new(model, u, horizon, budget)?;
    let windows = e.violation(contract)?;
    for comp in &model.components {
        for c in &comp.contracts {
            e.require_contract(c)?;
        }
    }
    let lits: Vec<B> = windows.iter().map(|w| w.2).collect();
    e.require_any(&lits)?;
    match e.solve()? {
        None => Ok(Verification::Holds),
        Some(vals) => {
            let (window, sigma, _) = windows
                .into_iter()
                .find(|w| Encoder::holds(&vals, w.2))
                .expect("some window is violated");
            Ok(Verification::Counterexample {
                trace: e.decode(&vals),
                window,
                sigma,
            })
        }
    }
}
