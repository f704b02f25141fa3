use std::fmt::Write;

use crate::model::*;

/// Canonical text for `model`: two-space indentation, LF line endings,
/// declaration order preserved. Parsing the result yields an equal model.
pub fn print_model(model: &Model) -> String {
    let mut w = W {
        out: String::new(),
        indent: 0,
    };
    w.line(&format!(
        "Pattern {} ShortName {} {{",
        model.name, model.short_name
    ));
    w.indent += 1;
    if !model.datatypes.is_empty() {
        w.open("DTSpec");
        for (i, dt) in model.datatypes.iter().enumerate() {
            w.line(&format!("DT {} (", dt.name));
            w.indent += 1;
            for s in &dt.sorts {
                w.line(&format!("Sort {s}"));
            }
            for (k, p) in dt.predicates.iter().enumerate() {
                let kw = if k == 0 { "Predicate " } else { "" };
                let args: Vec<_> = p.args.iter().map(|s| local_sort(s, &dt.name)).collect();
                let sep = if k + 1 < dt.predicates.len() { "," } else { "" };
                w.line(&format!("{kw}{}: {}{sep}", p.name, args.join(", ")));
            }
            for (k, o) in dt.operations.iter().enumerate() {
                let kw = if k == 0 { "Operation " } else { "" };
                let args: Vec<_> = o.args.iter().map(|s| local_sort(s, &dt.name)).collect();
                let sep = if k + 1 < dt.operations.len() { "," } else { "" };
                let lhs = if args.is_empty() {
                    String::new()
                } else {
                    format!("{} ", args.join(", "))
                };
                w.line(&format!(
                    "{kw}{}: {lhs}=> {}{sep}",
                    o.name,
                    local_sort(&o.result, &dt.name)
                ));
            }
            w.indent -= 1;
            w.line(if i + 1 < model.datatypes.len() {
                "),"
            } else {
                ")"
            });
        }
        w.close("}");
    }
    if !model.components.is_empty() {
        w.open("CTypes");
        for (i, c) in model.components.iter().enumerate() {
            w.open(&format!("CType {}", c.name));
            for (block, item, ports) in [
                ("InputPorts", "InputPort", &c.inputs),
                ("OutputPorts", "OutputPort", &c.outputs),
            ] {
                if ports.is_empty() {
                    continue;
                }
                w.open(block);
                for (k, p) in ports.iter().enumerate() {
                    let sep = if k + 1 < ports.len() { "," } else { "" };
                    w.line(&format!("{item} {} (Type: {}){sep}", p.name, sort(&p.sort)));
                }
                w.close("}");
            }
            if !c.contracts.is_empty() {
                w.open("Contracts");
                for (k, ct) in c.contracts.iter().enumerate() {
                    w.contract(ct, Some(&c.name), None, k + 1 < c.contracts.len());
                }
                w.close("}");
            }
            w.close(if i + 1 < model.components.len() {
                "},"
            } else {
                "}"
            });
        }
        w.close("}");
    }
    if !model.connections.is_empty() {
        w.open("Connections");
        for (k, c) in model.connections.iter().enumerate() {
            let sep = if k + 1 < model.connections.len() {
                ","
            } else {
                ""
            };
            w.line(&format!("{c}{sep}"));
        }
        w.close("}");
    }
    if !model.contracts.is_empty() {
        w.open("Contracts");
        for (k, ac) in model.contracts.iter().enumerate() {
            w.contract(
                &ac.contract,
                None,
                ac.proof.as_ref(),
                k + 1 < model.contracts.len(),
            );
        }
        w.close("}");
    }
    w.indent -= 1;
    w.line("}");
    w.out
}

/// Print a predicate as it would appear in a contract of `component`
/// (ports of that component unqualified) or at architecture level.
pub fn print_predicate(p: &Predicate, component: Option<&str>) -> String {
    let mut s = String::new();
    pred(&mut s, p, component);
    s
}

/// Print a proof in surface syntax, as the `proof { ... }` block of `contract`.
pub fn print_proof(proof: &Proof, contract: &Contract) -> String {
    let mut w = W {
        out: String::new(),
        indent: 0,
    };
    w.proof(proof, contract);
    w.out
}

struct W {
    out: String,
    indent: usize,
}

impl W {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn open(&mut self, head: &str) {
        self.line(&format!("{head} {{"));
        self.indent += 1;
    }

    fn close(&mut self, s: &str) {
        self.indent -= 1;
        self.line(s);
    }

    fn contract(
        &mut self,
        c: &Contract,
        component: Option<&str>,
        proof: Option<&Proof>,
        comma: bool,
    ) {
        self.open(&format!("Contract {}", c.name));
        for v in &c.variables {
            self.line(&format!("var {}: {}", v.name, sort(&v.sort)));
        }
        if !c.triggers.is_empty() {
            self.open("triggers");
            for (k, t) in c.triggers.iter().enumerate() {
                let at = if t.time == 0 {
                    String::new()
                } else {
                    format!(" at {}", t.time)
                };
                let sep = if k + 1 < c.triggers.len() { "," } else { "" };
                self.line(&format!(
                    "{}: {}{at}{sep}",
                    t.label,
                    print_predicate(&t.predicate, component)
                ));
            }
            self.close("}");
        }
        self.open("guarantees");
        self.line(&print_predicate(&c.guarantee, component));
        self.close("}");
        self.line(&format!("duration {}", c.duration));
        if let Some(p) = proof {
            self.proof(p, c);
        }
        self.close(if comma { "}," } else { "}" });
    }

    fn proof(&mut self, proof: &Proof, c: &Contract) {
        self.open("proof");
        for (i, s) in proof.steps.iter().enumerate() {
            self.line(&format!("{}: at {}", s.label, s.time));
            self.indent += 1;
            self.line(&format!("have {}", print_predicate(&s.state, None)));
            if !s.refs.is_empty() {
                self.open_with("from [");
                for (j, set) in s.refs.iter().enumerate() {
                    let sep = if j + 1 < s.refs.len() { "," } else { "" };
                    let text = if set.len() == 1 {
                        reference(&set[0], c, proof)
                    } else {
                        let parts: Vec<_> = set.iter().map(|r| reference(r, c, proof)).collect();
                        format!("{{ {} }}", parts.join(", "))
                    };
                    self.line(&format!("{text}{sep}"));
                }
                self.close("]");
            }
            let sep = if i + 1 < proof.steps.len() { "," } else { "" };
            self.line(&format!("using {}{sep}", s.rationale));
            self.indent -= 1;
        }
        self.close("}");
    }

    fn open_with(&mut self, head: &str) {
        self.line(head);
        self.indent += 1;
    }
}

fn reference(r: &Reference, c: &Contract, proof: &Proof) -> String {
    match r {
        Reference::Trigger(k) => c
            .triggers
            .get(*k)
            .map_or_else(|| format!("t{k}"), |t| t.label.clone()),
        Reference::Step { step, connections } => {
            let label = proof
                .steps
                .get(*step)
                .map_or_else(|| format!("s{step}"), |s| s.label.clone());
            if connections.is_empty() {
                label
            } else {
                let conns: Vec<_> = connections.iter().map(|c| c.to_string()).collect();
                format!("{label} with [{}]", conns.join(", "))
            }
        }
    }
}

fn sort(s: &SortRef) -> String {
    if s.is_unresolved() {
        s.name.clone()
    } else {
        s.to_string()
    }
}

fn local_sort(s: &SortRef, dt: &str) -> String {
    if s.datatype == dt {
        s.name.clone()
    } else {
        sort(s)
    }
}

fn pred(out: &mut String, p: &Predicate, component: Option<&str>) {
    match p {
        Predicate::Eq(l, r) => {
            out.push('[');
            term(out, l, component);
            out.push_str(" = ");
            term(out, r, component);
            out.push(']');
        }
        Predicate::Atom(sym, args) => {
            let _ = write!(out, "{sym}");
            term_args(out, args, component);
        }
        Predicate::And(ps) | Predicate::Or(ps) => {
            let op = if matches!(p, Predicate::And(_)) {
                " /\\ "
            } else {
                " \\/ "
            };
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(op);
                }
                if matches!(q, Predicate::And(_) | Predicate::Or(_)) {
                    out.push('(');
                    pred(out, q, component);
                    out.push(')');
                } else {
                    pred(out, q, component);
                }
            }
        }
    }
}

fn term(out: &mut String, t: &Term, component: Option<&str>) {
    match t {
        Term::Var(v) => out.push_str(&v.name),
        Term::Port(p) if Some(p.component.as_str()) == component => out.push_str(&p.port),
        Term::Port(p) => {
            let _ = write!(out, "{p}");
        }
        Term::App(sym, args) => {
            let _ = write!(out, "{sym}");
            term_args(out, args, component);
        }
    }
}

fn term_args(out: &mut String, args: &[Term], component: Option<&str>) {
    out.push('[');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        term(out, a, component);
    }
    out.push(']');
}
