//! Entailment over the equality/atom/and/or fragment, and instantiation of
//! contract variables by matching.
//!
//! Operations are uninterpreted. Hypotheses and goal are brought into
//! disjunctive normal form; every hypothesis case gets its own congruence
//! closure, and the goal holds when each case derives all literals of some
//! goal case.

mod cc;
mod dnf;

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{free_variables, Model, Predicate, Term, Variable};

pub use cc::{Closure, Fun, NodeId};
pub use dnf::{dnf, dnf_of_all, Dnf, Literal};

pub const DEFAULT_DNF_BUDGET: usize = 4096;

/// Contract variable name ↦ term over architecture variables and operations.
pub type Substitution = BTreeMap<String, Term>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entailment {
    Holds,
    /// Some hypothesis case derives no goal case; the text names it.
    Fails(String),
    /// The normal form outgrew the budget; nothing was decided.
    Blowup {
        disjuncts: usize,
    },
}

impl Entailment {
    pub fn holds(&self) -> bool {
        *self == Entailment::Holds
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EntailError {
    #[error("SORT_MISMATCH: {0}")]
    SortMismatch(String),
    #[error("BLOWUP: normal form exceeds {0} disjuncts")]
    Blowup(usize),
}

/// Decide whether every model of all `hyps` satisfies `goal`.
pub fn entails(
    model: &Model,
    hyps: &[Predicate],
    goal: &Predicate,
    budget: usize,
) -> Result<Entailment, EntailError> {
    for p in hyps.iter().chain(std::iter::once(goal)) {
        if let Some(msg) = model.sort_error(p) {
            return Err(EntailError::SortMismatch(msg));
        }
    }
    let refs: Vec<&Predicate> = hyps.iter().collect();
    let cases = match dnf_of_all(&refs, budget) {
        Ok(d) => d,
        Err(n) => return Ok(Entailment::Blowup { disjuncts: n }),
    };
    let goals = match dnf(goal, budget) {
        Ok(d) => d,
        Err(n) => return Ok(Entailment::Blowup { disjuncts: n }),
    };
    for (k, case) in cases.iter().enumerate() {
        let mut cc = closure_of(case);
        if !goals
            .iter()
            .any(|g| g.iter().all(|l| literal_holds(&mut cc, l)))
        {
            let shown: Vec<String> = case.iter().map(|l| l.to_predicate().to_string()).collect();
            let hyp = if shown.is_empty() {
                "true".to_string()
            } else {
                shown.join(" /\\ ")
            };
            return Ok(Entailment::Fails(format!(
                "hypothesis case {} of {} ({hyp}) does not derive {goal}",
                k + 1,
                cases.len()
            )));
        }
    }
    Ok(Entailment::Holds)
}

/// Congruence closure of a conjunction of literals.
pub fn closure_of(case: &[Literal]) -> Closure {
    let mut cc = Closure::new();
    for l in case {
        match l {
            Literal::Eq(a, b) => {
                let (x, y) = (cc.add_term(a), cc.add_term(b));
                cc.merge(x, y);
            }
            Literal::Atom(p, args) => {
                let x = cc.add_atom(p, args);
                let t = cc.true_node();
                cc.merge(x, t);
            }
        }
    }
    cc.close();
    cc
}

fn literal_holds(cc: &mut Closure, l: &Literal) -> bool {
    match l {
        Literal::Eq(a, b) => {
            let (x, y) = (cc.add_term(a), cc.add_term(b));
            cc.equal(x, y)
        }
        Literal::Atom(p, args) => {
            let x = cc.add_atom(p, args);
            let t = cc.true_node();
            cc.equal(x, t)
        }
    }
}

pub fn apply(sigma: &Substitution, p: &Predicate) -> Predicate {
    p.substitute(&|v: &Variable| sigma.get(&v.name).cloned())
}

/// Upper bound on candidate substitutions explored per call.
const MAX_CANDIDATES: usize = 64;

/// All substitutions extending `partial` over the pattern variables `vars`
/// under which `facts` entail `trigger`, in discovery order (facts in
/// declaration order). Variables are bound to port-free terms only: a port
/// denotes a different value at every instant, so binding one would not
/// carry over to the guarantee.
pub fn match_candidates(
    model: &Model,
    vars: &[Variable],
    trigger: &Predicate,
    facts: &[Predicate],
    partial: &Substitution,
    budget: usize,
) -> Result<Vec<Substitution>, EntailError> {
    let pattern: BTreeSet<String> = vars.iter().map(|v| v.name.clone()).collect();
    let needed: BTreeSet<String> = free_variables(trigger)
        .into_iter()
        .filter(|v| pattern.contains(v))
        .collect();
    let refs: Vec<&Predicate> = facts.iter().collect();
    let cases = dnf_of_all(&refs, budget).map_err(EntailError::Blowup)?;
    let goals = dnf(trigger, budget).map_err(EntailError::Blowup)?;
    let mut cc = closure_of(cases.first().map(Vec::as_slice).unwrap_or(&[]));
    let m = Matcher { pattern: &pattern };
    let mut raw = Vec::new();
    for g in &goals {
        m.literals(&mut cc, g, partial.clone(), &mut raw);
        if raw.len() >= MAX_CANDIDATES {
            break;
        }
    }
    let mut out: Vec<Substitution> = Vec::new();
    for s in raw {
        if !needed.iter().all(|v| s.contains_key(v)) || out.contains(&s) {
            continue;
        }
        if entails(model, facts, &apply(&s, trigger), budget)?.holds() {
            out.push(s);
        }
    }
    Ok(out)
}

/// Outcome of [`match_trigger`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Match {
    pub substitution: Substitution,
    /// Another, non-congruent substitution also matched.
    pub ambiguous: bool,
}

/// First substitution under which `facts` entail `trigger`, with an
/// ambiguity flag when a non-congruent alternative exists.
pub fn match_trigger(
    model: &Model,
    vars: &[Variable],
    trigger: &Predicate,
    facts: &[Predicate],
    budget: usize,
) -> Result<Option<Match>, EntailError> {
    let cands = match_candidates(model, vars, trigger, facts, &Substitution::new(), budget)?;
    let Some(first) = cands.first().cloned() else {
        return Ok(None);
    };
    let mut ambiguous = false;
    for other in &cands[1..] {
        if !congruent(model, facts, &first, other, budget)? {
            ambiguous = true;
            break;
        }
    }
    Ok(Some(Match {
        substitution: first,
        ambiguous,
    }))
}

/// Whether `facts` force `a` and `b` to agree on every variable they share.
pub fn congruent(
    model: &Model,
    facts: &[Predicate],
    a: &Substitution,
    b: &Substitution,
    budget: usize,
) -> Result<bool, EntailError> {
    let eqs: Vec<Predicate> = a
        .iter()
        .filter_map(|(k, t)| b.get(k).map(|u| Predicate::Eq(t.clone(), u.clone())))
        .collect();
    if eqs.is_empty() {
        return Ok(true);
    }
    Ok(entails(model, facts, &Predicate::and(eqs), budget)?.holds())
}

struct Matcher<'a> {
    pattern: &'a BTreeSet<String>,
}

impl Matcher<'_> {
    fn is_open(&self, t: &Term, s: &Substitution) -> bool {
        let mut open = false;
        t.visit_vars(&mut |v| {
            if self.pattern.contains(&v.name) && !s.contains_key(&v.name) {
                open = true;
            }
        });
        open
    }

    fn literals(
        &self,
        cc: &mut Closure,
        lits: &[Literal],
        s: Substitution,
        out: &mut Vec<Substitution>,
    ) {
        if out.len() >= MAX_CANDIDATES {
            return;
        }
        let Some((first, rest)) = lits.split_first() else {
            out.push(s);
            return;
        };
        let mut here = Vec::new();
        match first {
            Literal::Eq(l, r) => {
                if !self.is_open(l, &s) {
                    let c = cc.add_term(&self.ground(l, &s));
                    self.term(cc, r, c, s, &mut here);
                } else if !self.is_open(r, &s) {
                    let c = cc.add_term(&self.ground(r, &s));
                    self.term(cc, l, c, s, &mut here);
                } else {
                    for c in cc.term_classes() {
                        let mut left = Vec::new();
                        self.term(cc, l, c, s.clone(), &mut left);
                        for s2 in left {
                            self.term(cc, r, c, s2, &mut here);
                        }
                    }
                }
            }
            Literal::Atom(p, args) => {
                let t = cc.true_node();
                for ids in cc.apps_in_class(t, &Fun::Pred(p.clone()), args.len()) {
                    self.args(cc, args, &ids, s.clone(), &mut here);
                }
            }
        }
        for s2 in here {
            self.literals(cc, rest, s2, out);
        }
    }

    fn ground(&self, t: &Term, s: &Substitution) -> Term {
        t.substitute(&|v: &Variable| {
            s.get(&v.name)
                .filter(|_| self.pattern.contains(&v.name))
                .cloned()
        })
    }

    fn args(
        &self,
        cc: &mut Closure,
        pats: &[Term],
        ids: &[NodeId],
        s: Substitution,
        out: &mut Vec<Substitution>,
    ) {
        let Some((p, rest)) = pats.split_first() else {
            out.push(s);
            return;
        };
        let mut here = Vec::new();
        self.term(cc, p, ids[0], s, &mut here);
        for s2 in here {
            self.args(cc, rest, &ids[1..], s2, out);
        }
    }

    /// Extend `s` in every way that makes pattern `p` congruent to `class`.
    fn term(
        &self,
        cc: &mut Closure,
        p: &Term,
        class: NodeId,
        s: Substitution,
        out: &mut Vec<Substitution>,
    ) {
        if !self.is_open(p, &s) {
            let id = cc.add_term(&self.ground(p, &s));
            if cc.equal(id, class) {
                out.push(s);
            }
            return;
        }
        match p {
            Term::Var(v) => {
                if let Some(rep) = cc.port_free_representative(class) {
                    let mut s2 = s;
                    s2.insert(v.name.clone(), rep);
                    out.push(s2);
                }
            }
            Term::App(f, args) => {
                for ids in cc.apps_in_class(class, &Fun::Op(f.clone()), args.len()) {
                    self.args(cc, args, &ids, s.clone(), out);
                }
            }
            Term::Port(_) => unreachable!("ports are never open"),
        }
    }
}
