use std::collections::HashMap;
use std::sync::Arc;

use crate::diagnostic::{Diagnostic, Loc, Rule, SourceSpan};
use crate::model::*;

use super::lexer::{lex, Tok, Token};

/// Result of parsing: the (possibly partial) model and every lexical,
/// syntactic and name-resolution diagnostic in source order.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub model: Model,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parsed {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

pub fn parse_model(text: &str) -> Parsed {
    parse_model_named("<input>", text)
}

/// Parse `text`, attributing spans to `file`. Parsing stops at the first
/// syntax error; everything completed before it is kept in the model.
pub fn parse_model_named(file: &str, text: &str) -> Parsed {
    let file: Arc<str> = Arc::from(file);
    let (tokens, mut diagnostics) = lex(&file, text);
    let mut p = Parser {
        tokens,
        pos: 0,
        diags: Vec::new(),
        model: Model::default(),
    };
    let _ = p.pattern();
    diagnostics.append(&mut p.diags);
    Parsed {
        model: p.model,
        diagnostics,
    }
}

/// Marker for "a syntax error was reported; unwind".
struct Stop;

type PResult<T> = Result<T, Stop>;

/// Name-resolution context for predicates.
enum Scope<'a> {
    Component {
        name: &'a str,
        inputs: &'a [Port],
        outputs: &'a [Port],
        vars: &'a [Variable],
    },
    Architecture {
        vars: &'a [Variable],
    },
}

impl Scope<'_> {
    fn vars(&self) -> &[Variable] {
        match self {
            Scope::Component { vars, .. } | Scope::Architecture { vars } => vars,
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    model: Model,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span.clone()
    }

    fn loc_from(&self, start: &SourceSpan) -> Loc {
        Loc(start.to(&self.prev_span()))
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&mut self, expected: &str) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.diags.push(Diagnostic::error(
            Rule::UnexpectedToken,
            span,
            format!("expected {expected}, found {found}"),
        ));
        Err(Stop)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            let what = match &t {
                Tok::Keyword(k) => format!("`{k}`"),
                other => format!("`{}`", other.symbol()),
            };
            self.fail(&what)
        }
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(x) if *x == k)
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.fail("identifier"),
        }
    }

    fn number(&mut self) -> PResult<u32> {
        match *self.peek() {
            Tok::Number(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail("number"),
        }
    }

    fn resolution(&mut self, rule: Rule, span: SourceSpan, msg: String) {
        self.diags.push(Diagnostic::error(rule, span, msg));
    }

    // ---- top level -------------------------------------------------------

    fn pattern(&mut self) -> PResult<()> {
        let start = self.span();
        if !self.at_kw("Pattern") {
            let found = self.peek().describe();
            self.diags.push(Diagnostic::error(
                Rule::ExpectedPattern,
                start,
                format!("expected `Pattern`, found {found}"),
            ));
            return Err(Stop);
        }
        self.bump();
        self.model.name = self.ident()?;
        self.expect(Tok::Keyword("ShortName"))?;
        self.model.short_name = self.ident()?;
        self.expect(Tok::LBrace)?;
        if self.at_kw("DTSpec") {
            self.dtspec()?;
        }
        if self.at_kw("CTypes") {
            self.ctypes()?;
        }
        if self.at_kw("Connections") {
            self.connections()?;
        }
        if self.at_kw("Contracts") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                let c = self.contract(None)?;
                self.model.contracts.push(c);
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBrace)?;
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        self.model.loc = self.loc_from(&start);
        if *self.peek() != Tok::Eof {
            return self.fail("end of input");
        }
        Ok(())
    }

    // ---- signature -------------------------------------------------------

    fn dtspec(&mut self) -> PResult<()> {
        self.bump();
        self.expect(Tok::LBrace)?;
        let mut result = self.dt_list();
        // Sorts may refer to data types declared later in the block, so
        // check them once the whole block has been read.
        let sorts: Vec<SortRef> = self.model.sorts().collect();
        let mut unknown = Vec::new();
        for dt in &self.model.datatypes {
            for (loc, s) in dt
                .predicates
                .iter()
                .flat_map(|p| p.args.iter().map(move |s| (&p.loc, s)))
                .chain(dt.operations.iter().flat_map(|o| {
                    o.args
                        .iter()
                        .chain(std::iter::once(&o.result))
                        .map(move |s| (&o.loc, s))
                }))
            {
                if !sorts.contains(s) {
                    unknown.push(Diagnostic::error(
                        Rule::UnresolvedSort,
                        loc.span().clone(),
                        format!("unknown sort {s}"),
                    ));
                }
            }
        }
        self.diags.extend(unknown);
        if result.is_ok() {
            result = self.expect(Tok::RBrace);
        }
        result
    }

    fn dt_list(&mut self) -> PResult<()> {
        if *self.peek() == Tok::RBrace {
            return Ok(());
        }
        loop {
            self.datatype()?;
            if !self.eat(&Tok::Comma) {
                return Ok(());
            }
        }
    }

    fn datatype(&mut self) -> PResult<()> {
        let start = self.span();
        self.expect(Tok::Keyword("DT"))?;
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut dt = DataType {
            name: name.clone(),
            ..Default::default()
        };
        loop {
            if self.at_kw("Sort") {
                self.bump();
                dt.sorts.push(self.ident()?);
            } else if self.at_kw("Predicate") {
                self.bump();
                loop {
                    let ds = self.span();
                    let pname = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let mut args = vec![self.sort_ref(&name)?];
                    while self.continues_list() {
                        self.bump();
                        args.push(self.sort_ref(&name)?);
                    }
                    let loc = self.loc_from(&ds);
                    dt.predicates.push(PredicateDecl {
                        name: pname,
                        args,
                        loc,
                    });
                    if !self.next_is_decl() {
                        break;
                    }
                    self.bump();
                }
            } else if self.at_kw("Operation") {
                self.bump();
                loop {
                    let ds = self.span();
                    let oname = self.ident()?;
                    self.expect(Tok::Colon)?;
                    let mut args = Vec::new();
                    if *self.peek() != Tok::Arrow {
                        args.push(self.sort_ref(&name)?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.sort_ref(&name)?);
                        }
                    }
                    self.expect(Tok::Arrow)?;
                    let result = self.sort_ref(&name)?;
                    let loc = self.loc_from(&ds);
                    dt.operations.push(OperationDecl {
                        name: oname,
                        args,
                        result,
                        loc,
                    });
                    if !self.next_is_decl() {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        dt.loc = self.loc_from(&start);
        self.add_datatype(dt);
        Ok(())
    }

    /// `, ident :` starts the next declaration of the same kind.
    fn next_is_decl(&self) -> bool {
        *self.peek() == Tok::Comma
            && matches!(self.peek_at(1), Tok::Ident(_))
            && *self.peek_at(2) == Tok::Colon
    }

    /// `,` continuing an argument-sort list (not starting a new declaration).
    fn continues_list(&self) -> bool {
        *self.peek() == Tok::Comma && !self.next_is_decl()
    }

    fn sort_ref(&mut self, own_dt: &str) -> PResult<SortRef> {
        let first = self.ident()?;
        if self.eat(&Tok::Dot) {
            Ok(SortRef::new(first, self.ident()?))
        } else {
            Ok(SortRef::new(own_dt, first))
        }
    }

    fn add_datatype(&mut self, dt: DataType) {
        let Some(existing) = self.model.datatypes.iter_mut().find(|d| d.name == dt.name) else {
            self.model.datatypes.push(dt);
            return;
        };
        self.diags.push(Diagnostic::warning(
            Rule::DuplicateDatatype,
            dt.loc.span().clone(),
            format!(
                "data type {} is declared more than once; declarations are merged",
                dt.name
            ),
        ));
        for s in dt.sorts {
            if !existing.sorts.contains(&s) {
                existing.sorts.push(s);
            }
        }
        for p in dt.predicates {
            match existing.predicates.iter_mut().find(|q| q.name == p.name) {
                Some(q) => *q = p,
                None => existing.predicates.push(p),
            }
        }
        for o in dt.operations {
            match existing.operations.iter_mut().find(|q| q.name == o.name) {
                Some(q) => *q = o,
                None => existing.operations.push(o),
            }
        }
    }

    /// Sort reference outside the signature: `DT.Sort`, or a bare sort name
    /// looked up across all data types.
    fn port_sort(&mut self) -> PResult<SortRef> {
        let start = self.span();
        let first = self.ident()?;
        let sort = if self.eat(&Tok::Dot) {
            SortRef::new(first, self.ident()?)
        } else {
            match self.model.sorts().find(|s| s.name == first) {
                Some(s) => s,
                None => SortRef::new("?", first),
            }
        };
        if !self.model.has_sort(&sort) {
            let span = start.to(&self.prev_span());
            self.resolution(Rule::UnresolvedSort, span, format!("unknown sort {sort}"));
        }
        Ok(sort)
    }

    // ---- components ------------------------------------------------------

    fn ctypes(&mut self) -> PResult<()> {
        self.bump();
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            self.ctype()?;
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(())
    }

    fn ctype(&mut self) -> PResult<()> {
        let start = self.span();
        self.expect(Tok::Keyword("CType"))?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let inputs = if self.at_kw("InputPorts") {
            self.ports("InputPorts", "InputPort")?
        } else {
            Vec::new()
        };
        let outputs = if self.at_kw("OutputPorts") {
            self.ports("OutputPorts", "OutputPort")?
        } else {
            Vec::new()
        };
        self.model.components.push(ComponentType {
            name: name.clone(),
            inputs,
            outputs,
            contracts: Vec::new(),
            loc: self.loc_from(&start),
        });
        if self.at_kw("Contracts") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                let c = self.contract(Some(&name))?;
                self.model
                    .components
                    .last_mut()
                    .unwrap()
                    .contracts
                    .push(c.contract);
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBrace)?;
                    break;
                }
            }
        }
        self.expect(Tok::RBrace)?;
        let loc = self.loc_from(&start);
        self.model.components.last_mut().unwrap().loc = loc;
        Ok(())
    }

    fn ports(&mut self, block: &'static str, item: &'static str) -> PResult<Vec<Port>> {
        self.expect(Tok::Keyword(block))?;
        self.expect(Tok::LBrace)?;
        let mut out = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let start = self.span();
            self.expect(Tok::Keyword(item))?;
            let name = self.ident()?;
            self.expect(Tok::LParen)?;
            self.expect(Tok::Keyword("Type"))?;
            self.expect(Tok::Colon)?;
            let sort = self.port_sort()?;
            self.expect(Tok::RParen)?;
            out.push(Port {
                name,
                sort,
                loc: self.loc_from(&start),
            });
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(out)
    }

    // ---- connections -----------------------------------------------------

    fn connections(&mut self) -> PResult<()> {
        self.bump();
        self.expect(Tok::LBrace)?;
        while !self.eat(&Tok::RBrace) {
            let c = self.connection()?;
            self.model.connections.push(c);
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        Ok(())
    }

    fn connection(&mut self) -> PResult<Connection> {
        let start = self.span();
        self.expect(Tok::LParen)?;
        let input = self.qualified_port()?;
        self.expect(Tok::Comma)?;
        let output = self.qualified_port()?;
        self.expect(Tok::RParen)?;
        Ok(Connection {
            input,
            output,
            loc: self.loc_from(&start),
        })
    }

    fn qualified_port(&mut self) -> PResult<PortRef> {
        let start = self.span();
        let comp = self.ident()?;
        self.expect(Tok::Dot)?;
        let port = self.ident()?;
        let r = PortRef::new(comp, port);
        if self.model.port(&r).is_none() {
            let span = start.to(&self.prev_span());
            self.resolution(Rule::UnresolvedPort, span, format!("unknown port {r}"));
        }
        Ok(r)
    }

    // ---- contracts -------------------------------------------------------

    /// A component contract when `component` is given, otherwise an
    /// architecture contract (which may carry a proof).
    fn contract(&mut self, component: Option<&str>) -> PResult<ArchitectureContract> {
        let start = self.span();
        self.expect(Tok::Keyword("Contract"))?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut variables = Vec::new();
        while self.at_kw("var") {
            self.bump();
            let vname = self.ident()?;
            self.expect(Tok::Colon)?;
            let sort = self.port_sort()?;
            variables.push(Variable::new(vname, sort));
            self.eat(&Tok::Comma);
        }
        let (inputs, outputs) = match component.and_then(|c| self.model.component(c)) {
            Some(c) => (c.inputs.clone(), c.outputs.clone()),
            None => (Vec::new(), Vec::new()),
        };
        let scope = match component {
            Some(name) => Scope::Component {
                name,
                inputs: &inputs,
                outputs: &outputs,
                vars: &variables,
            },
            None => Scope::Architecture { vars: &variables },
        };
        let mut triggers = Vec::new();
        if self.at_kw("triggers") {
            self.bump();
            self.expect(Tok::LBrace)?;
            while !self.eat(&Tok::RBrace) {
                let ts = self.span();
                let label = self.ident()?;
                self.expect(Tok::Colon)?;
                let predicate = self.predicate(&scope)?;
                let time = if self.at_kw("at") {
                    self.bump();
                    self.number()?
                } else {
                    0
                };
                triggers.push(Trigger {
                    label,
                    predicate,
                    time,
                    loc: self.loc_from(&ts),
                });
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBrace)?;
                    break;
                }
            }
        }
        self.expect(Tok::Keyword("guarantees"))?;
        self.expect(Tok::LBrace)?;
        let guarantee = self.predicate(&scope)?;
        self.expect(Tok::RBrace)?;
        self.expect(Tok::Keyword("duration"))?;
        let duration = self.number()?;
        let mut contract = Contract {
            name,
            variables: variables.clone(),
            triggers,
            guarantee,
            duration,
            loc: Loc::default(),
        };
        let proof = if component.is_none() && self.at_kw("proof") {
            Some(self.proof(&contract)?)
        } else {
            None
        };
        self.expect(Tok::RBrace)?;
        contract.loc = self.loc_from(&start);
        Ok(ArchitectureContract { contract, proof })
    }

    // ---- proofs ----------------------------------------------------------

    fn proof(&mut self, contract: &Contract) -> PResult<Proof> {
        let start = self.span();
        self.bump();
        self.expect(Tok::LBrace)?;
        let scope = Scope::Architecture {
            vars: &contract.variables,
        };
        // References are resolved once all step labels are known.
        let mut raw_refs: Vec<Vec<Vec<RawRef>>> = Vec::new();
        let mut steps = Vec::new();
        while !self.eat(&Tok::RBrace) {
            let ss = self.span();
            let label = self.ident()?;
            self.expect(Tok::Colon)?;
            self.expect(Tok::Keyword("at"))?;
            let time = self.number()?;
            self.expect(Tok::Keyword("have"))?;
            let state = self.predicate(&scope)?;
            let mut refs = Vec::new();
            if self.at_kw("from") {
                self.bump();
                self.expect(Tok::LBracket)?;
                while !self.eat(&Tok::RBracket) {
                    refs.push(self.ref_set()?);
                    if !self.eat(&Tok::Comma) {
                        self.expect(Tok::RBracket)?;
                        break;
                    }
                }
            }
            self.expect(Tok::Keyword("using"))?;
            let comp = self.ident()?;
            self.expect(Tok::Dot)?;
            let cname = self.ident()?;
            raw_refs.push(refs);
            steps.push(ProofStep {
                label,
                time,
                state,
                rationale: ContractRef::new(comp, cname),
                refs: Vec::new(),
                loc: self.loc_from(&ss),
            });
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBrace)?;
                break;
            }
        }
        let step_index: HashMap<String, usize> = steps
            .iter()
            .enumerate()
            .rev()
            .map(|(i, s)| (s.label.clone(), i))
            .collect();
        for (step, raw) in steps.iter_mut().zip(raw_refs) {
            for set in raw {
                let mut out = Vec::new();
                for r in set {
                    if let Some(k) = contract.trigger_index(&r.label) {
                        if !r.connections.is_empty() {
                            self.resolution(
                                Rule::UnresolvedLabel,
                                r.span.clone(),
                                format!(
                                    "{} names a trigger, which takes no `with` clause",
                                    r.label
                                ),
                            );
                        }
                        out.push(Reference::Trigger(k));
                    } else if let Some(&k) = step_index.get(&r.label) {
                        out.push(Reference::Step {
                            step: k,
                            connections: r.connections,
                        });
                    } else {
                        self.resolution(
                            Rule::UnresolvedLabel,
                            r.span.clone(),
                            format!("unknown trigger or step label {}", r.label),
                        );
                    }
                }
                step.refs.push(out);
            }
        }
        Ok(Proof {
            steps,
            loc: self.loc_from(&start),
        })
    }

    fn ref_set(&mut self) -> PResult<Vec<RawRef>> {
        if self.eat(&Tok::LBrace) {
            let mut out = Vec::new();
            while !self.eat(&Tok::RBrace) {
                out.push(self.raw_ref()?);
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBrace)?;
                    break;
                }
            }
            Ok(out)
        } else {
            Ok(vec![self.raw_ref()?])
        }
    }

    fn raw_ref(&mut self) -> PResult<RawRef> {
        let span = self.span();
        let label = self.ident()?;
        let mut connections = Vec::new();
        if self.at_kw("with") {
            self.bump();
            self.expect(Tok::LBracket)?;
            while !self.eat(&Tok::RBracket) {
                connections.push(self.connection()?);
                if !self.eat(&Tok::Comma) {
                    self.expect(Tok::RBracket)?;
                    break;
                }
            }
        }
        Ok(RawRef {
            label,
            connections,
            span,
        })
    }

    // ---- predicates and terms --------------------------------------------

    fn predicate(&mut self, scope: &Scope) -> PResult<Predicate> {
        let mut parts = vec![self.conjunction(scope)?];
        while self.eat(&Tok::Or) {
            parts.push(self.conjunction(scope)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::Or(parts)
        })
    }

    fn conjunction(&mut self, scope: &Scope) -> PResult<Predicate> {
        let mut parts = vec![self.primary(scope)?];
        while self.eat(&Tok::And) {
            parts.push(self.primary(scope)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Predicate::And(parts)
        })
    }

    fn primary(&mut self, scope: &Scope) -> PResult<Predicate> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let p = self.predicate(scope)?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::LBracket => {
                self.bump();
                let l = self.term(scope)?;
                self.expect(Tok::Eq)?;
                let r = self.term(scope)?;
                self.expect(Tok::RBracket)?;
                Ok(Predicate::Eq(l, r))
            }
            Tok::Ident(_) => {
                let start = self.span();
                let dt = self.ident()?;
                self.expect(Tok::Dot)?;
                let name = self.ident()?;
                let sym = SymbolRef::new(dt, name);
                if self.model.predicate(&sym).is_none() {
                    let span = start.to(&self.prev_span());
                    self.resolution(
                        Rule::UnresolvedSymbol,
                        span,
                        format!("unknown predicate {sym}"),
                    );
                }
                let args = self.args(scope)?;
                Ok(Predicate::Atom(sym, args))
            }
            _ => self.fail("predicate"),
        }
    }

    fn args(&mut self, scope: &Scope) -> PResult<Vec<Term>> {
        self.expect(Tok::LBracket)?;
        let mut args = Vec::new();
        while !self.eat(&Tok::RBracket) {
            args.push(self.term(scope)?);
            if !self.eat(&Tok::Comma) {
                self.expect(Tok::RBracket)?;
                break;
            }
        }
        Ok(args)
    }

    fn term(&mut self, scope: &Scope) -> PResult<Term> {
        let start = self.span();
        let first = self.ident()?;
        if self.eat(&Tok::Dot) {
            let second = self.ident()?;
            if *self.peek() == Tok::LBracket {
                let sym = SymbolRef::new(first, second);
                if self.model.operation(&sym).is_none() {
                    let span = start.to(&self.prev_span());
                    self.resolution(
                        Rule::UnresolvedSymbol,
                        span,
                        format!("unknown operation {sym}"),
                    );
                }
                let args = self.args(scope)?;
                return Ok(Term::App(sym, args));
            }
            let r = PortRef::new(&first, &second);
            let known = match scope {
                Scope::Component {
                    name,
                    inputs,
                    outputs,
                    ..
                } if *name == first => inputs
                    .iter()
                    .chain(outputs.iter())
                    .any(|p| p.name == second),
                _ => self.model.port(&r).is_some(),
            };
            if !known {
                let sym = SymbolRef::new(&first, &second);
                if self
                    .model
                    .operation(&sym)
                    .is_some_and(|o| o.args.is_empty())
                {
                    return Ok(Term::App(sym, Vec::new()));
                }
                let span = start.to(&self.prev_span());
                self.resolution(Rule::UnresolvedPort, span, format!("unknown port {r}"));
            }
            return Ok(Term::Port(r));
        }
        if let Scope::Component {
            name,
            inputs,
            outputs,
            ..
        } = scope
        {
            if inputs.iter().chain(outputs.iter()).any(|p| p.name == first) {
                return Ok(Term::Port(PortRef::new(*name, first)));
            }
        }
        if let Some(v) = scope.vars().iter().find(|v| v.name == first) {
            return Ok(Term::Var(v.clone()));
        }
        let span = start.to(&self.prev_span());
        self.resolution(
            Rule::UnresolvedName,
            span,
            format!("unknown port or variable {first}"),
        );
        Ok(Term::Var(Variable::new(first, SortRef::unresolved())))
    }
}

struct RawRef {
    label: String,
    connections: Vec<Connection>,
    span: SourceSpan,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rules(p: &Parsed) -> Vec<Rule> {
        p.diagnostics.iter().map(|d| d.rule).collect()
    }

    #[test]
    fn empty_input_expects_pattern() {
        let p = parse_model("");
        assert_eq!(rules(&p), [Rule::ExpectedPattern]);
        assert_eq!(p.model, Model::default());
    }

    #[test]
    fn minimal_pattern() {
        let p = parse_model("Pattern P ShortName p { }");
        assert!(p.diagnostics.is_empty());
        assert_eq!(p.model.name, "P");
        assert_eq!(p.model.short_name, "p");
    }

    const SMALL: &str = "Pattern P ShortName p {
        DTSpec { DT B ( Sort N Predicate even: N, odd: N Operation inc: N => N, add: N, N => N ) }
        CTypes {
            CType A {
                InputPorts { InputPort i (Type: B.N) }
                OutputPorts { OutputPort o (Type: B.N) }
                Contracts {
                    Contract c { var x: B.N triggers { t: [i = x] /\\ B.even[x] } guarantees { [o = B.inc[x]] } duration 1 }
                }
            }
        }
    }";

    #[test]
    fn predicate_and_operation_lists_split_on_ident_colon() {
        let p = parse_model(SMALL);
        assert!(p.diagnostics.is_empty(), "{:?}", p.diagnostics);
        let dt = &p.model.datatypes[0];
        assert_eq!(
            dt.predicates
                .iter()
                .map(|p| p.name.as_str())
                .collect::<Vec<_>>(),
            ["even", "odd"]
        );
        assert_eq!(dt.operations[1].args.len(), 2);
        let c = &p.model.components[0].contracts[0];
        assert_eq!(c.triggers[0].predicate.ports().len(), 1);
    }

    #[test]
    fn unresolved_name_is_a_resolution_diagnostic() {
        let p = parse_model(&SMALL.replace("[o = B.inc[x]]", "[o = B.inc[z]]"));
        assert_eq!(rules(&p), [Rule::UnresolvedName]);
        assert_eq!(p.model.components[0].contracts.len(), 1);
    }

    #[test]
    fn syntax_error_keeps_partial_model() {
        let p = parse_model(&SMALL.replace("duration 1", "duration"));
        assert_eq!(rules(&p), [Rule::UnexpectedToken]);
        assert_eq!(p.model.datatypes.len(), 1);
        assert_eq!(p.model.components.len(), 1);
        assert!(p.model.components[0].contracts.is_empty());
    }

    #[test]
    fn and_binds_tighter_than_or() {
        let p = parse_model(&SMALL.replace(
            "[i = x] /\\ B.even[x]",
            "[i = x] \\/ B.even[x] /\\ B.odd[x]",
        ));
        assert!(p.diagnostics.is_empty());
        let t = &p.model.components[0].contracts[0].triggers[0].predicate;
        match t {
            Predicate::Or(parts) => assert!(matches!(parts[1], Predicate::And(_))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_datatypes_merge_with_warning() {
        let text = "Pattern P ShortName p { DTSpec { DT B ( Sort N Predicate a: N ), DT B ( Sort N Predicate b: N ) } }";
        let p = parse_model(text);
        assert_eq!(rules(&p), [Rule::DuplicateDatatype]);
        assert!(!p.has_errors());
        let names: Vec<_> = p.model.datatypes[0]
            .predicates
            .iter()
            .map(|p| p.name.as_str())
            .collect();
        assert_eq!(names, ["a", "b"]);
    }

    #[test]
    fn spans_point_into_the_input() {
        let p = parse_model("Pattern P ShortName p {\n  CTypes { CType A { InputPorts { InputPort i (Type: Q.R) } } }\n}");
        assert_eq!(rules(&p), [Rule::UnresolvedSort]);
        let s = &p.diagnostics[0].span;
        assert_eq!(
            (s.start_line, s.start_col, s.end_line, s.end_col),
            (2, 54, 2, 57)
        );
    }
}
