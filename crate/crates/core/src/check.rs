//! Checking architecture proofs step by step.
//!
//! Every step is evaluated against the conditions below; the proof as a whole
//! must be non-empty, end in a state implying the architecture guarantee and
//! end exactly at the architecture duration.
//!
//! | id           | what is checked                                              |
//! |--------------|--------------------------------------------------------------|
//! | `C0`         | the proof has at least one step                              |
//! | `RATIONALE`  | the rationale names an existing component contract           |
//! | `SHAPE`      | one non-empty reference set per rationale trigger            |
//! | `STATE`      | the state mentions output ports of a single component only   |
//! | `C1`         | references point at architecture triggers or earlier steps   |
//! | `CONNECTION` | every `with` pair is a declared connection                   |
//! | `C2`         | reference times agree with the rationale's trigger offsets   |
//! | `C3`         | referenced facts entail the instantiated triggers            |
//! | `C4`         | step time is the base time plus the rationale duration       |
//! | `C5`         | the instantiated guarantee entails the step state            |
//! | `EQ6`        | the last state entails the architecture guarantee            |
//! | `EQ7`        | the last step time equals the architecture duration          |

use std::collections::BTreeSet;
use std::fmt;

use crate::entail::{self, apply, congruent, EntailError, Entailment, Substitution};
use crate::model::{
    ArchitectureContract, Contract, Direction, Model, Predicate, Proof, RefSet, Reference, Term,
    Variable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    C0,
    Rationale,
    Shape,
    State,
    C1,
    Connection,
    C2,
    C3,
    C4,
    C5,
    Eq6,
    Eq7,
}

impl Condition {
    pub fn id(self) -> &'static str {
        match self {
            Condition::C0 => "C0",
            Condition::Rationale => "RATIONALE",
            Condition::Shape => "SHAPE",
            Condition::State => "STATE",
            Condition::C1 => "C1",
            Condition::Connection => "CONNECTION",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::C4 => "C4",
            Condition::C5 => "C5",
            Condition::Eq6 => "EQ6",
            Condition::Eq7 => "EQ7",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Violated(String),
    /// The entailment budget ran out before a decision was reached.
    Inconclusive(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::Violated(_) => "violated",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn detail(&self) -> &str {
        match self {
            Verdict::Ok => "",
            Verdict::Violated(d) | Verdict::Inconclusive(d) => d,
        }
    }

    pub fn is_ok(&self) -> bool {
        *self == Verdict::Ok
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Overall {
    Ok,
    Inconclusive,
    Violated,
}

impl Overall {
    pub fn name(self) -> &'static str {
        match self {
            Overall::Ok => "ok",
            Overall::Inconclusive => "inconclusive",
            Overall::Violated => "violated",
        }
    }

    fn of(v: &Verdict) -> Overall {
        match v {
            Verdict::Ok => Overall::Ok,
            Verdict::Inconclusive(_) => Overall::Inconclusive,
            Verdict::Violated(_) => Overall::Violated,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub label: String,
    pub time: u32,
    pub rationale: String,
    /// Evaluated conditions in evaluation order; conditions whose
    /// prerequisites failed are absent.
    pub results: Vec<(Condition, Verdict)>,
    pub substitution: Option<Substitution>,
    pub base: Option<u32>,
    pub duration: Option<u32>,
    pub warnings: Vec<String>,
}

impl StepReport {
    pub fn overall(&self) -> Overall {
        self.results
            .iter()
            .map(|(_, v)| Overall::of(v))
            .max()
            .unwrap_or(Overall::Ok)
    }

    pub fn verdict(&self, c: Condition) -> Option<&Verdict> {
        self.results.iter().find(|(k, _)| *k == c).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub contract: String,
    /// Whole-proof conditions: `C0`, `EQ6`, `EQ7`.
    pub global: Vec<(Condition, Verdict)>,
    pub steps: Vec<StepReport>,
}

impl CheckReport {
    pub fn overall(&self) -> Overall {
        self.global
            .iter()
            .map(|(_, v)| Overall::of(v))
            .chain(self.steps.iter().map(StepReport::overall))
            .max()
            .unwrap_or(Overall::Ok)
    }

    pub fn is_ok(&self) -> bool {
        self.overall() == Overall::Ok
    }

    /// Every (step, condition, verdict) triple, global ones with `None`.
    pub fn records(&self) -> impl Iterator<Item = (Option<usize>, Condition, &Verdict)> {
        self.global.iter().map(|(c, v)| (None, *c, v)).chain(
            self.steps
                .iter()
                .flat_map(|s| s.results.iter().map(move |(c, v)| (Some(s.index), *c, v))),
        )
    }

    /// Violated or inconclusive conditions.
    pub fn failures(&self) -> Vec<(Option<usize>, Condition, &Verdict)> {
        self.records().filter(|(_, _, v)| !v.is_ok()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RefTimeError {
    #[error("step {0} does not exist")]
    NoStep(usize),
    #[error("reference set {0} does not exist")]
    NoRefSet(usize),
    #[error("EMPTY_REFSET: reference set {0} is empty")]
    Empty(usize),
    #[error("reference {0} points outside the proof")]
    OutOfBounds(usize),
    #[error("reference set {set} mixes times {}", join_times(.times))]
    Disagree { set: usize, times: Vec<u32> },
}

fn join_times(t: &[u32]) -> String {
    t.iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(" and ")
}

fn member_time(arch: &Contract, proof: &Proof, r: &Reference) -> Option<u32> {
    match r {
        Reference::Trigger(k) => arch.triggers.get(*k).map(|t| t.time),
        Reference::Step { step, .. } => proof.steps.get(*step).map(|s| s.time),
    }
}

fn set_times(arch: &Contract, proof: &Proof, set: &RefSet) -> Result<Vec<u32>, usize> {
    set.iter()
        .map(|r| {
            member_time(arch, proof, r).ok_or(match r {
                Reference::Trigger(k) => *k,
                Reference::Step { step, .. } => *step,
            })
        })
        .collect()
}

/// Time point of reference set `j` of step `step`. All members of the set
/// must share it.
pub fn time_of_reference(
    arch: &Contract,
    proof: &Proof,
    step: usize,
    j: usize,
) -> Result<u32, RefTimeError> {
    let s = proof.steps.get(step).ok_or(RefTimeError::NoStep(step))?;
    let set = s.refs.get(j).ok_or(RefTimeError::NoRefSet(j))?;
    let times = set_times(arch, proof, set).map_err(RefTimeError::OutOfBounds)?;
    let Some(&first) = times.first() else {
        return Err(RefTimeError::Empty(j));
    };
    if times.iter().any(|&t| t != first) {
        return Err(RefTimeError::Disagree { set: j, times });
    }
    Ok(first)
}

/// Hypotheses contributed by one reference set: trigger predicates, step
/// states and the equalities of the listed connections.
pub fn reference_facts(arch: &Contract, proof: &Proof, set: &RefSet) -> Vec<Predicate> {
    let mut out = Vec::new();
    for r in set {
        match r {
            Reference::Trigger(k) => out.extend(arch.triggers.get(*k).map(|t| t.predicate.clone())),
            Reference::Step { step, connections } => {
                out.extend(proof.steps.get(*step).map(|s| s.state.clone()));
                out.extend(connections.iter().map(|c| {
                    Predicate::Eq(Term::Port(c.input.clone()), Term::Port(c.output.clone()))
                }));
            }
        }
    }
    out
}

/// Name of the constant standing in for rationale variable `v` when it is
/// not bound by matching. `#` cannot occur in source identifiers.
pub fn fresh_name(v: &str, step: usize) -> String {
    format!("{v}#{step}")
}

/// Complete `sigma` with fresh constants for every variable of `vars` it
/// leaves unbound.
pub fn close_substitution(sigma: &Substitution, vars: &[Variable], step: usize) -> Substitution {
    let mut out = sigma.clone();
    for v in vars {
        out.entry(v.name.clone())
            .or_insert_with(|| Term::Var(Variable::new(fresh_name(&v.name, step), v.sort.clone())));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub dnf_budget: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            dnf_budget: entail::DEFAULT_DNF_BUDGET,
        }
    }
}

pub fn check_proof(model: &Model, arch: &ArchitectureContract, proof: &Proof) -> CheckReport {
    check_proof_with(model, arch, proof, CheckOptions::default())
}

pub fn check_proof_with(
    model: &Model,
    arch: &ArchitectureContract,
    proof: &Proof,
    opts: CheckOptions,
) -> CheckReport {
    let contract = &arch.contract;
    let steps: Vec<StepReport> = (0..proof.steps.len())
        .map(|i| check_step(model, contract, proof, i, opts))
        .collect();
    let mut global = Vec::new();
    match proof.steps.last() {
        None => global.push((
            Condition::C0,
            Verdict::Violated("the proof has no steps".into()),
        )),
        Some(last) => {
            global.push((Condition::C0, Verdict::Ok));
            global.push((
                Condition::Eq6,
                entailment_verdict(
                    model,
                    std::slice::from_ref(&last.state),
                    &contract.guarantee,
                    opts,
                    || {
                        format!(
                            "final state {} does not imply guarantee {}",
                            last.state, contract.guarantee
                        )
                    },
                ),
            ));
            global.push((
                Condition::Eq7,
                if last.time == contract.duration {
                    Verdict::Ok
                } else {
                    Verdict::Violated(format!(
                        "final step is at {}, contract duration is {}",
                        last.time, contract.duration
                    ))
                },
            ));
        }
    }
    CheckReport {
        contract: contract.name.clone(),
        global,
        steps,
    }
}

fn entailment_verdict(
    model: &Model,
    hyps: &[Predicate],
    goal: &Predicate,
    opts: CheckOptions,
    why: impl FnOnce() -> String,
) -> Verdict {
    match entail::entails(model, hyps, goal, opts.dnf_budget) {
        Ok(Entailment::Holds) => Verdict::Ok,
        Ok(Entailment::Fails(_)) => Verdict::Violated(why()),
        Ok(Entailment::Blowup { disjuncts }) => Verdict::Inconclusive(format!(
            "normal form exceeds budget ({disjuncts} disjuncts)"
        )),
        Err(e) => Verdict::Violated(e.to_string()),
    }
}

/// Components whose output ports `p` mentions, or `Err` naming a port that
/// is not an output.
fn state_owner(model: &Model, p: &Predicate) -> Result<BTreeSet<String>, String> {
    let mut owners = BTreeSet::new();
    for port in p.ports() {
        if model.port_direction(port) != Some(Direction::Output) {
            return Err(format!("{port} is not an output port"));
        }
        owners.insert(port.component.clone());
    }
    Ok(owners)
}

fn check_step(
    model: &Model,
    arch: &Contract,
    proof: &Proof,
    i: usize,
    opts: CheckOptions,
) -> StepReport {
    let step = &proof.steps[i];
    let mut rep = StepReport {
        index: i,
        label: step.label.clone(),
        time: step.time,
        rationale: step.rationale.to_string(),
        results: Vec::new(),
        substitution: None,
        base: None,
        duration: None,
        warnings: Vec::new(),
    };
    let Some(rat) = model.contract(&step.rationale) else {
        rep.results.push((
            Condition::Rationale,
            Verdict::Violated(format!("UNKNOWN_RATIONALE: no contract {}", step.rationale)),
        ));
        return rep;
    };
    rep.results.push((Condition::Rationale, Verdict::Ok));
    rep.duration = Some(rat.duration);

    let shape = if step.refs.len() != rat.triggers.len() {
        Verdict::Violated(format!(
            "{} reference set(s) for {} trigger(s) of {}",
            step.refs.len(),
            rat.triggers.len(),
            step.rationale
        ))
    } else if let Some(j) = step.refs.iter().position(Vec::is_empty) {
        Verdict::Violated(format!("EMPTY_REFSET: reference set {j} is empty"))
    } else {
        Verdict::Ok
    };
    let shape_ok = shape.is_ok();
    rep.results.push((Condition::Shape, shape));

    let state = match state_owner(model, &step.state) {
        Err(e) => Verdict::Violated(e),
        Ok(o) if o.len() > 1 => Verdict::Violated(format!(
            "state mixes outputs of {}",
            o.into_iter().collect::<Vec<_>>().join(", ")
        )),
        Ok(_) => Verdict::Ok,
    };
    rep.results.push((Condition::State, state));

    let mut bad = Vec::new();
    for r in step.refs.iter().flatten() {
        match r {
            Reference::Trigger(k) if *k >= arch.triggers.len() => {
                bad.push(format!("trigger {k} does not exist"))
            }
            Reference::Step { step: k, .. } if *k >= i => {
                bad.push(format!("step {k} is not before step {i}"))
            }
            _ => {}
        }
    }
    let c1_ok = bad.is_empty();
    rep.results.push((
        Condition::C1,
        if c1_ok {
            Verdict::Ok
        } else {
            Verdict::Violated(bad.join("; "))
        },
    ));

    let unknown: Vec<String> = step
        .refs
        .iter()
        .flatten()
        .filter_map(|r| match r {
            Reference::Step { connections, .. } => Some(connections),
            _ => None,
        })
        .flatten()
        .filter(|c| !model.has_connection(&c.input, &c.output))
        .map(|c| format!("UNKNOWN_CONNECTION: {c}"))
        .collect();
    rep.results.push((
        Condition::Connection,
        if unknown.is_empty() {
            Verdict::Ok
        } else {
            Verdict::Violated(unknown.join("; "))
        },
    ));

    if !c1_ok || !shape_ok {
        return rep;
    }

    // Base instant: time of the first member of the first reference set,
    // or the step time minus the duration for trigger-less rationales.
    let base = if step.refs.is_empty() {
        step.time.checked_sub(rat.duration)
    } else {
        member_time(arch, proof, &step.refs[0][0])
    };

    if !step.refs.is_empty() {
        let base = base.expect("references are in bounds");
        let mut problems = Vec::new();
        for (j, set) in step.refs.iter().enumerate() {
            let expected = base + rat.triggers[j].time;
            let times = set_times(arch, proof, set).expect("references are in bounds");
            if times.iter().any(|&t| t != times[0]) {
                problems.push(format!(
                    "reference set {j} mixes times {}",
                    join_times(&times)
                ));
            } else if let Some(&t) = times.iter().find(|&&t| t != expected) {
                problems.push(format!(
                    "reference set {j}: expected time {base}+{} = {expected}, found {t}",
                    rat.triggers[j].time
                ));
            }
        }
        rep.results.push((
            Condition::C2,
            if problems.is_empty() {
                Verdict::Ok
            } else {
                Verdict::Violated(problems.join("; "))
            },
        ));
    }
    rep.base = base;

    let sigma = if step.refs.is_empty() {
        Substitution::new()
    } else {
        let (sigma, c3) = instantiate(model, arch, proof, i, rat, opts);
        if let Some(w) = c3.1 {
            rep.warnings.push(w);
        }
        rep.results.push((Condition::C3, c3.0));
        sigma.unwrap_or_default()
    };

    let c4 = match base {
        None => Verdict::Violated(format!(
            "step time {} is smaller than the rationale duration {}",
            step.time, rat.duration
        )),
        Some(b) if b + rat.duration == step.time => Verdict::Ok,
        Some(b) => Verdict::Violated(format!(
            "expected time {b}+{} = {}, found {}",
            rat.duration,
            b + rat.duration,
            step.time
        )),
    };
    rep.results.push((Condition::C4, c4));

    let full = close_substitution(&sigma, &rat.variables, i);
    let guarantee = apply(&full, &rat.guarantee);
    rep.results.push((
        Condition::C5,
        entailment_verdict(
            model,
            std::slice::from_ref(&guarantee),
            &step.state,
            opts,
            || format!("guarantee {guarantee} does not imply state {}", step.state),
        ),
    ));
    rep.substitution = Some(full);
    rep
}

type C3Outcome = (Verdict, Option<String>);

/// Find one substitution making every reference set entail its trigger,
/// threading bindings from earlier positions into later ones. Among complete
/// substitutions the first (in fact declaration order) whose guarantee also
/// yields the step state is preferred.
fn instantiate(
    model: &Model,
    arch: &Contract,
    proof: &Proof,
    i: usize,
    rat: &Contract,
    opts: CheckOptions,
) -> (Option<Substitution>, C3Outcome) {
    let step = &proof.steps[i];
    let facts: Vec<Vec<Predicate>> = step
        .refs
        .iter()
        .map(|s| reference_facts(arch, proof, s))
        .collect();
    let mut found = Vec::new();
    let mut deepest = (0usize, None::<String>);
    if let Err(e) = search(
        model,
        rat,
        &facts,
        0,
        Substitution::new(),
        opts,
        &mut found,
        &mut deepest,
    ) {
        let v = match e {
            EntailError::Blowup(n) => {
                Verdict::Inconclusive(format!("normal form exceeds budget ({n} disjuncts)"))
            }
            EntailError::SortMismatch(m) => Verdict::Violated(format!("SORT_MISMATCH: {m}")),
        };
        return (None, (v, None));
    }
    let Some(first) = found.first().cloned() else {
        let j = deepest.0;
        let detail = deepest.1.unwrap_or_else(|| {
            format!(
                "reference set {j} does not entail trigger {} ({})",
                rat.triggers[j].label, rat.triggers[j].predicate
            )
        });
        return (None, (Verdict::Violated(detail), None));
    };
    let all_facts: Vec<Predicate> = facts.concat();
    let mut ambiguous = None;
    for other in &found[1..] {
        if !congruent(model, &all_facts, &first, other, opts.dnf_budget).unwrap_or(true) {
            ambiguous = Some(format!(
                "AMBIGUOUS: {} and {} both instantiate {}",
                show_substitution(&first),
                show_substitution(other),
                step.rationale
            ));
            break;
        }
    }
    let chosen = found
        .iter()
        .find(|s| {
            let g = apply(&close_substitution(s, &rat.variables, i), &rat.guarantee);
            entail::entails(model, &[g], &step.state, opts.dnf_budget)
                .map(|e| e.holds())
                .unwrap_or(false)
        })
        .cloned()
        .unwrap_or(first);
    (Some(chosen), (Verdict::Ok, ambiguous))
}

const MAX_COMPLETE: usize = 16;

#[allow(clippy::too_many_arguments)]
fn search(
    model: &Model,
    rat: &Contract,
    facts: &[Vec<Predicate>],
    j: usize,
    partial: Substitution,
    opts: CheckOptions,
    found: &mut Vec<Substitution>,
    deepest: &mut (usize, Option<String>),
) -> Result<(), EntailError> {
    if found.len() >= MAX_COMPLETE {
        return Ok(());
    }
    if j == facts.len() {
        found.push(partial);
        return Ok(());
    }
    let cands = entail::match_candidates(
        model,
        &rat.variables,
        &rat.triggers[j].predicate,
        &facts[j],
        &partial,
        opts.dnf_budget,
    )?;
    if cands.is_empty() && j >= deepest.0 {
        *deepest = (j, None);
    }
    for c in cands {
        search(model, rat, facts, j + 1, c, opts, found, deepest)?;
    }
    Ok(())
}

pub fn show_substitution(s: &Substitution) -> String {
    let parts: Vec<String> = s.iter().map(|(k, v)| format!("{k} ↦ {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Narrative of one step: rationale, substitution, times and every
/// evaluated condition.
pub fn explain_step(report: &CheckReport, index: usize) -> String {
    let Some(s) = report.steps.get(index) else {
        return format!("proof {} has no step {index}\n", report.contract);
    };
    let mut out = format!(
        "step {} ({} at {}) using {}\n",
        s.index, s.label, s.time, s.rationale
    );
    if let Some(sigma) = &s.substitution {
        out += &format!("  substitution {}\n", show_substitution(sigma));
    }
    match (s.base, s.duration) {
        (Some(b), Some(d)) => {
            out += &format!(
                "  base time {b}, rationale duration {d}, result time {}\n",
                b + d
            )
        }
        (None, Some(d)) => out += &format!("  no base time, rationale duration {d}\n"),
        _ => {}
    }
    for (c, v) in &s.results {
        match v {
            Verdict::Ok => out += &format!("  {c} ok\n"),
            Verdict::Violated(d) => out += &format!("  {c} violated: {d}\n"),
            Verdict::Inconclusive(d) => {
                out += &format!(
                    "  {c} inconclusive: {d}; emit the Isar proof and let Isabelle decide this obligation\n"
                )
            }
        }
    }
    for w in &s.warnings {
        out += &format!("  warning {w}\n");
    }
    out
}

/// Line-oriented report: a summary line, then one line per failing
/// condition and per warning.
pub fn text_report(report: &CheckReport) -> String {
    let ok = report
        .steps
        .iter()
        .filter(|s| s.overall() == Overall::Ok)
        .count();
    let mut out = format!(
        "proof {}: {ok}/{} steps ok, {}\n",
        report.contract,
        report.steps.len(),
        report.overall().name()
    );
    for (step, c, v) in report.failures() {
        let at = step.map_or("proof".to_string(), |i| format!("step {i}"));
        out += &format!("{at}: {c} {}: {}\n", v.name(), v.detail());
    }
    for s in &report.steps {
        for w in &s.warnings {
            out += &format!("step {}: warning {w}\n", s.index);
        }
    }
    out
}

/// One `key=value` record per evaluated condition and per warning.
pub fn key_value_report(report: &CheckReport) -> String {
    let mut out = String::new();
    let name = &report.contract;
    for (step, c, v) in report.records() {
        let at = step.map_or("-".to_string(), |i| i.to_string());
        out += &format!(
            "proof={name} step={at} condition={c} verdict={} detail=\"{}\"\n",
            v.name(),
            escape(v.detail())
        );
    }
    for s in &report.steps {
        for w in &s.warnings {
            out += &format!(
                "proof={name} step={} condition=AMBIGUOUS verdict=warning detail=\"{}\"\n",
                s.index,
                escape(w)
            );
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
