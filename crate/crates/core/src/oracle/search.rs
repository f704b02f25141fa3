//! Forward-closure proof search.
//!
//! Facts start as the architecture triggers. Each round applies every
//! component contract, in declaration order, at every base time suggested
//! by the facts known at the start of the round. A new step is kept unless
//! the states already known at its time imply it. The search stops at the
//! first step at the architecture duration whose state implies the
//! architecture guarantee and whose dependency cone checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::check::check_proof_with;
use crate::check::CheckOptions;
use crate::diagnostic::Loc;
use crate::entail::{self, apply, match_candidates, Substitution};
use crate::model::{
    free_variables, ArchitectureContract, Connection, Contract, ContractRef, Model, PortRef,
    Predicate, Proof, ProofStep, RefSet, Reference, Term,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Upper bound on the number of derived steps.
    pub max_steps: usize,
    pub dnf_budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_steps: 64,
            dnf_budget: entail::DEFAULT_DNF_BUDGET,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("step budget of {0} exhausted before the closure saturated")]
    BudgetExceeded(usize),
    #[error("no proof: the closure saturated without reaching the guarantee")]
    NoProof,
}

#[derive(Clone, Debug)]
enum Origin {
    Trigger(usize),
    Step(usize),
}

#[derive(Clone, Debug)]
struct Fact {
    time: u32,
    state: Predicate,
    origin: Origin,
}

/// One member of a reference set under construction: a fact and the
/// connections carrying it to the rationale's inputs.
#[derive(Clone, Debug)]
struct Member {
    fact: usize,
    connections: Vec<Connection>,
}

struct Search<'a> {
    model: &'a Model,
    arch: &'a ArchitectureContract,
    opts: SearchOptions,
    facts: Vec<Fact>,
    steps: Vec<ProofStep>,
}

pub fn search_proof(
    model: &Model,
    arch: &ArchitectureContract,
    max_steps: usize,
) -> Result<Proof, SearchError> {
    search_proof_with(
        model,
        arch,
        SearchOptions {
            max_steps,
            ..SearchOptions::default()
        },
    )
}

pub fn search_proof_with(
    model: &Model,
    arch: &ArchitectureContract,
    opts: SearchOptions,
) -> Result<Proof, SearchError> {
    let facts = seed(arch);
    let mut s = Search {
        model,
        arch,
        opts,
        facts,
        steps: Vec::new(),
    };
    match s.run(true)? {
        Some(proof) => Ok(proof),
        None => Err(SearchError::NoProof),
    }
}

/// Every step derivable for `arch` up to its duration, in derivation
/// order: the maximal proof, without the stop at the guarantee.
pub fn saturate(
    model: &Model,
    arch: &ArchitectureContract,
    opts: SearchOptions,
) -> Result<Vec<ProofStep>, SearchError> {
    let facts = seed(arch);
    let mut s = Search {
        model,
        arch,
        opts,
        facts,
        steps: Vec::new(),
    };
    s.run(false)?;
    Ok(s.steps)
}

fn seed(arch: &ArchitectureContract) -> Vec<Fact> {
    arch.contract
        .triggers
        .iter()
        .enumerate()
        .map(|(k, t)| Fact {
            time: t.time,
            state: t.predicate.clone(),
            origin: Origin::Trigger(k),
        })
        .collect()
}

fn ports_of(p: &Predicate) -> BTreeSet<PortRef> {
    p.ports().into_iter().cloned().collect()
}

impl Search<'_> {
    fn holds(&self, hyps: &[Predicate], goal: &Predicate) -> bool {
        matches!(entail::entails(self.model, hyps, goal, self.opts.dnf_budget), Ok(e) if e.holds())
    }

    /// Derive rounds until saturation. With `stop`, return the first
    /// checked proof of the guarantee.
    fn run(&mut self, stop: bool) -> Result<Option<Proof>, SearchError> {
        if self.opts.max_steps == 0 {
            return Err(SearchError::BudgetExceeded(0));
        }
        let target = self.arch.contract.duration;
        loop {
            let known = self.facts.len();
            let mut progress = false;
            for comp in &self.model.components {
                for c in &comp.contracts {
                    for base in self.bases(c, known, target) {
                        let Some((sigma, sets)) = self.instantiate(c, base, known) else {
                            continue;
                        };
                        let state = apply(&sigma, &c.guarantee);
                        let time = base + c.duration;
                        let same_time: Vec<Predicate> = self
                            .facts
                            .iter()
                            .filter(|f| f.time == time)
                            .map(|f| f.state.clone())
                            .collect();
                        if self.holds(&same_time, &state) {
                            continue;
                        }
                        let refs = sets
                            .into_iter()
                            .map(|set| set.into_iter().map(|m| self.reference(m)).collect())
                            .collect();
                        let index = self.steps.len();
                        self.steps.push(ProofStep {
                            label: format!("s{index}"),
                            time,
                            state: state.clone(),
                            rationale: ContractRef::new(&comp.name, &c.name),
                            refs,
                            loc: Loc::synthetic(),
                        });
                        self.facts.push(Fact {
                            time,
                            state: state.clone(),
                            origin: Origin::Step(index),
                        });
                        progress = true;
                        if stop
                            && time == target
                            && self
                                .holds(std::slice::from_ref(&state), &self.arch.contract.guarantee)
                        {
                            let proof = self.extract(index);
                            let report = check_proof_with(
                                self.model,
                                self.arch,
                                &proof,
                                CheckOptions {
                                    dnf_budget: self.opts.dnf_budget,
                                },
                            );
                            if report.is_ok() {
                                return Ok(Some(proof));
                            }
                        }
                        if self.steps.len() >= self.opts.max_steps {
                            return Err(SearchError::BudgetExceeded(self.opts.max_steps));
                        }
                    }
                }
            }
            if !progress {
                return Ok(None);
            }
        }
    }

    /// Candidate base times for `c`, ascending.
    fn bases(&self, c: &Contract, known: usize, target: u32) -> Vec<u32> {
        let fits = |b: u32| b + c.duration <= target;
        if c.triggers.is_empty() {
            return (0..=target).filter(|&b| fits(b)).collect();
        }
        let mut out = BTreeSet::new();
        for f in &self.facts[..known] {
            for t in &c.triggers {
                if f.time >= t.time && fits(f.time - t.time) {
                    out.insert(f.time - t.time);
                }
            }
        }
        out.into_iter().collect()
    }

    fn member_facts(&self, members: &[Member]) -> Vec<Predicate> {
        let mut out = Vec::new();
        for m in members {
            out.push(self.facts[m.fact].state.clone());
            out.extend(
                m.connections.iter().map(|c| {
                    Predicate::Eq(Term::Port(c.input.clone()), Term::Port(c.output.clone()))
                }),
            );
        }
        out
    }

    /// A substitution binding every guarantee variable, with minimal
    /// reference sets for the triggers of `c` at `base`.
    fn instantiate(
        &self,
        c: &Contract,
        base: u32,
        known: usize,
    ) -> Option<(Substitution, Vec<Vec<Member>>)> {
        let mut pools = Vec::new();
        for t in &c.triggers {
            let wanted = ports_of(&t.predicate);
            let pool: Vec<Member> = (0..known)
                .filter(|&i| self.facts[i].time == base + t.time)
                .map(|i| {
                    let produced = ports_of(&self.facts[i].state);
                    let connections = match self.facts[i].origin {
                        Origin::Trigger(_) => Vec::new(),
                        Origin::Step(_) => self
                            .model
                            .connections
                            .iter()
                            .filter(|k| wanted.contains(&k.input) && produced.contains(&k.output))
                            .cloned()
                            .collect(),
                    };
                    Member {
                        fact: i,
                        connections,
                    }
                })
                .collect();
            if pool.is_empty() {
                return None;
            }
            pools.push(pool);
        }
        let sigma = self.thread(c, &pools, 0, Substitution::new())?;
        let needed = free_variables(&c.guarantee);
        if !needed.iter().all(|v| sigma.contains_key(v)) {
            return None;
        }
        let sets = c
            .triggers
            .iter()
            .zip(pools)
            .map(|(t, pool)| self.minimize(&apply(&sigma, &t.predicate), pool))
            .collect();
        Some((sigma, sets))
    }

    fn thread(
        &self,
        c: &Contract,
        pools: &[Vec<Member>],
        j: usize,
        partial: Substitution,
    ) -> Option<Substitution> {
        if j == pools.len() {
            return Some(partial);
        }
        let facts = self.member_facts(&pools[j]);
        let cands = match_candidates(
            self.model,
            &c.variables,
            &c.triggers[j].predicate,
            &facts,
            &partial,
            self.opts.dnf_budget,
        )
        .ok()?;
        cands
            .into_iter()
            .find_map(|s| self.thread(c, pools, j + 1, s))
    }

    /// Drop members, then connections, as long as `goal` still follows.
    fn minimize(&self, goal: &Predicate, mut members: Vec<Member>) -> Vec<Member> {
        let mut i = 0;
        while i < members.len() && members.len() > 1 {
            let mut trial = members.clone();
            trial.remove(i);
            if self.holds(&self.member_facts(&trial), goal) {
                members = trial;
            } else {
                i += 1;
            }
        }
        for m in 0..members.len() {
            let mut k = 0;
            while k < members[m].connections.len() {
                let mut trial = members.clone();
                trial[m].connections.remove(k);
                if self.holds(&self.member_facts(&trial), goal) {
                    members = trial;
                } else {
                    k += 1;
                }
            }
        }
        members
    }

    fn reference(&self, m: Member) -> Reference {
        match self.facts[m.fact].origin {
            Origin::Trigger(k) => Reference::Trigger(k),
            Origin::Step(step) => Reference::Step {
                step,
                connections: m.connections,
            },
        }
    }

    /// The steps `last` depends on, renumbered in derivation order.
    fn extract(&self, last: usize) -> Proof {
        let mut keep = BTreeSet::new();
        let mut todo = vec![last];
        while let Some(i) = todo.pop() {
            if keep.insert(i) {
                for set in &self.steps[i].refs {
                    for r in set {
                        if let Reference::Step { step, .. } = r {
                            todo.push(*step);
                        }
                    }
                }
            }
        }
        let renumber: BTreeMap<usize, usize> = keep
            .iter()
            .enumerate()
            .map(|(new, &old)| (old, new))
            .collect();
        let steps = keep
            .iter()
            .map(|&old| {
                let s = &self.steps[old];
                let refs: Vec<RefSet> = s
                    .refs
                    .iter()
                    .map(|set| {
                        set.iter()
                            .map(|r| match r {
                                Reference::Step { step, connections } => Reference::Step {
                                    step: renumber[step],
                                    connections: connections.clone(),
                                },
                                other => other.clone(),
                            })
                            .collect()
                    })
                    .collect();
                ProofStep {
                    label: format!("s{}", renumber[&old]),
                    refs,
                    ..s.clone()
                }
            })
            .collect();
        Proof {
            steps,
            loc: Loc::synthetic(),
        }
    }
}
