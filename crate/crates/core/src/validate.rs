//! Structural validation and the architecture interface.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::diagnostic::{Diagnostic, Loc, Rule};
use crate::model::{Contract, Direction, Model, PortRef, Predicate};

/// Disconnected ports: inputs outside the connection domain and outputs
/// outside its range, in declaration order.
pub fn architecture_interface(model: &Model) -> (Vec<PortRef>, Vec<PortRef>) {
    let connected_in: HashSet<&PortRef> = model.connections.iter().map(|c| &c.input).collect();
    let connected_out: HashSet<&PortRef> = model.connections.iter().map(|c| &c.output).collect();
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for comp in &model.components {
        for p in &comp.inputs {
            let r = PortRef::new(&comp.name, &p.name);
            if !connected_in.contains(&r) {
                inputs.push(r);
            }
        }
        for p in &comp.outputs {
            let r = PortRef::new(&comp.name, &p.name);
            if !connected_out.contains(&r) {
                outputs.push(r);
            }
        }
    }
    (inputs, outputs)
}

/// Check every structural invariant of the model. Violations are returned
/// as error diagnostics; an empty list means the model is valid.
pub fn validate_structure(model: &Model) -> Vec<Diagnostic> {
    let mut v = Validator {
        model,
        out: Vec::new(),
    };
    v.signature();
    v.components();
    v.connections();
    v.architecture_contracts();
    v.out
}

struct Validator<'a> {
    model: &'a Model,
    out: Vec<Diagnostic>,
}

impl Validator<'_> {
    fn error(&mut self, rule: Rule, loc: &Loc, message: String) {
        self.out
            .push(Diagnostic::error(rule, loc.span().clone(), message));
    }

    fn signature(&mut self) {
        let model = self.model;
        let mut dt_names = HashSet::new();
        for dt in &model.datatypes {
            if !dt_names.insert(dt.name.as_str()) {
                self.error(
                    Rule::SignatureDuplicate,
                    &dt.loc,
                    format!("data type {} declared twice", dt.name),
                );
            }
            let mut seen = HashSet::new();
            for s in &dt.sorts {
                if !seen.insert(s.as_str()) {
                    self.error(
                        Rule::SignatureDuplicate,
                        &dt.loc,
                        format!("sort {}.{s} declared twice", dt.name),
                    );
                }
            }
            let mut seen = HashSet::new();
            for p in &dt.predicates {
                if !seen.insert(p.name.as_str()) {
                    self.error(
                        Rule::SignatureDuplicate,
                        &p.loc,
                        format!("predicate {}.{} declared twice", dt.name, p.name),
                    );
                }
                for s in &p.args {
                    if !model.has_sort(s) {
                        self.error(
                            Rule::SignatureUnknownSort,
                            &p.loc,
                            format!("predicate {}.{} uses undeclared sort {s}", dt.name, p.name),
                        );
                    }
                }
            }
            let mut seen = HashSet::new();
            for o in &dt.operations {
                if !seen.insert(o.name.as_str()) {
                    self.error(
                        Rule::SignatureDuplicate,
                        &o.loc,
                        format!("operation {}.{} declared twice", dt.name, o.name),
                    );
                }
                for s in o.args.iter().chain(std::iter::once(&o.result)) {
                    if !model.has_sort(s) {
                        self.error(
                            Rule::SignatureUnknownSort,
                            &o.loc,
                            format!("operation {}.{} uses undeclared sort {s}", dt.name, o.name),
                        );
                    }
                }
            }
        }
    }

    fn components(&mut self) {
        let model = self.model;
        let mut names = HashSet::new();
        for comp in &model.components {
            if !names.insert(comp.name.as_str()) {
                self.error(
                    Rule::ComponentDuplicate,
                    &comp.loc,
                    format!("component type {} declared twice", comp.name),
                );
            }
            let mut ports = HashSet::new();
            for p in comp.inputs.iter().chain(&comp.outputs) {
                if !ports.insert(p.name.as_str()) {
                    self.error(
                        Rule::PortDuplicate,
                        &p.loc,
                        format!("port {}.{} declared twice", comp.name, p.name),
                    );
                }
                if !model.has_sort(&p.sort) {
                    self.error(
                        Rule::SignatureUnknownSort,
                        &p.loc,
                        format!(
                            "port {}.{} has undeclared sort {}",
                            comp.name, p.name, p.sort
                        ),
                    );
                }
            }
            let mut contracts = HashSet::new();
            for c in &comp.contracts {
                if !contracts.insert(c.name.as_str()) {
                    self.error(
                        Rule::ContractDuplicate,
                        &c.loc,
                        format!("contract {}.{} declared twice", comp.name, c.name),
                    );
                }
                self.contract_common(c);
                let inputs: BTreeSet<PortRef> = comp
                    .inputs
                    .iter()
                    .map(|p| PortRef::new(&comp.name, &p.name))
                    .collect();
                let outputs: BTreeSet<PortRef> = comp
                    .outputs
                    .iter()
                    .map(|p| PortRef::new(&comp.name, &p.name))
                    .collect();
                for t in &c.triggers {
                    for p in t.predicate.ports() {
                        if !inputs.contains(p) {
                            self.error(Rule::TriggerPortDirection, &t.loc, format!("trigger {} of {}.{} refers to {p}, which is not an input of {}", t.label, comp.name, c.name, comp.name));
                        }
                    }
                }
                for p in c.guarantee.ports() {
                    if !outputs.contains(p) {
                        self.error(
                            Rule::GuaranteePortDirection,
                            &c.loc,
                            format!(
                                "guarantee of {}.{} refers to {p}, which is not an output of {}",
                                comp.name, c.name, comp.name
                            ),
                        );
                    }
                }
            }
        }
    }

    fn connections(&mut self) {
        let model = self.model;
        let mut inputs = HashSet::new();
        for conn in &model.connections {
            let (Some(din), Some(dout)) = (
                model.port_direction(&conn.input),
                model.port_direction(&conn.output),
            ) else {
                for p in [&conn.input, &conn.output] {
                    if model.port(p).is_none() {
                        self.error(
                            Rule::ConnectionUnknownPort,
                            &conn.loc,
                            format!("connection {conn} refers to unknown port {p}"),
                        );
                    }
                }
                continue;
            };
            if din != Direction::Input || dout != Direction::Output {
                self.error(
                    Rule::ConnectionDirection,
                    &conn.loc,
                    format!("connection {conn} must link an input to an output"),
                );
            }
            if !inputs.insert(&conn.input) {
                self.error(
                    Rule::ConnectionDuplicateInput,
                    &conn.loc,
                    format!("input {} is connected more than once", conn.input),
                );
            }
            let (si, so) = (model.port_sort(&conn.input), model.port_sort(&conn.output));
            if si != so {
                self.error(
                    Rule::ConnectionSort,
                    &conn.loc,
                    format!(
                        "connection {conn} joins sort {} with {}",
                        si.unwrap(),
                        so.unwrap()
                    ),
                );
            }
        }
    }

    fn architecture_contracts(&mut self) {
        let model = self.model;
        let (ins, outs) = architecture_interface(model);
        let ins: BTreeSet<PortRef> = ins.into_iter().collect();
        let outs: BTreeSet<PortRef> = outs.into_iter().collect();
        let mut names = HashSet::new();
        for ac in &model.contracts {
            let c = &ac.contract;
            if !names.insert(c.name.as_str()) {
                self.error(
                    Rule::ArchContractDuplicate,
                    &c.loc,
                    format!("architecture contract {} declared twice", c.name),
                );
            }
            self.contract_common(c);
            for t in &c.triggers {
                for p in t.predicate.ports() {
                    if !ins.contains(p) {
                        self.error(Rule::ArchTriggerPort, &t.loc, format!("trigger {} of {} refers to {p}, which is not a disconnected input port", t.label, c.name));
                    }
                }
            }
            for p in c.guarantee.ports() {
                if !outs.contains(p) {
                    self.error(Rule::ArchGuaranteePort, &c.loc, format!("guarantee of {} refers to {p}, which is not a disconnected output port", c.name));
                }
            }
        }
    }

    /// Variables, trigger labels, timing and sorts of any contract.
    fn contract_common(&mut self, c: &Contract) {
        let mut vars = HashSet::new();
        for v in &c.variables {
            if !vars.insert(v.name.as_str()) {
                self.error(
                    Rule::VariableDuplicate,
                    &c.loc,
                    format!("variable {} of {} declared twice", v.name, c.name),
                );
            }
            if !self.model.has_sort(&v.sort) {
                self.error(
                    Rule::SignatureUnknownSort,
                    &c.loc,
                    format!(
                        "variable {} of {} has undeclared sort {}",
                        v.name, c.name, v.sort
                    ),
                );
            }
        }
        let mut labels = HashMap::new();
        for t in &c.triggers {
            if labels.insert(t.label.as_str(), ()).is_some() {
                self.error(
                    Rule::TriggerLabelDuplicate,
                    &t.loc,
                    format!("trigger label {} of {} used twice", t.label, c.name),
                );
            }
        }
        match c.triggers.first() {
            None if c.duration == 0 => {
                self.error(
                    Rule::ContractDurationPositive,
                    &c.loc,
                    format!("{} has no triggers and duration 0", c.name),
                );
            }
            None => {}
            Some(first) => {
                if first.time != 0 {
                    self.error(
                        Rule::ContractFirstTriggerTime,
                        &first.loc,
                        format!(
                            "first trigger of {} is at {}, expected 0",
                            c.name, first.time
                        ),
                    );
                }
                for w in c.triggers.windows(2) {
                    if w[1].time < w[0].time {
                        self.error(
                            Rule::ContractTriggerOrder,
                            &w[1].loc,
                            format!(
                                "trigger {} of {} at {} precedes {} at {}",
                                w[1].label, c.name, w[1].time, w[0].label, w[0].time
                            ),
                        );
                    }
                }
                let last = c.triggers.iter().map(|t| t.time).max().unwrap_or(0);
                if c.duration <= last {
                    self.error(
                        Rule::ContractDurationAfterTrigger,
                        &c.loc,
                        format!(
                            "duration {} of {} does not exceed last trigger time {last}",
                            c.duration, c.name
                        ),
                    );
                }
            }
        }
        let preds: Vec<(&Predicate, &Loc)> = c
            .triggers
            .iter()
            .map(|t| (&t.predicate, &t.loc))
            .chain(std::iter::once((&c.guarantee, &c.loc)))
            .collect();
        for (p, loc) in preds {
            if let Some(msg) = self.model.sort_error(p) {
                self.error(Rule::SortMismatch, loc, format!("in {}: {msg}", c.name));
            }
        }
    }
}
