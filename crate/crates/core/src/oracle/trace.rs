//! Finite traces and direct evaluation of contracts on them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::universe::{tuples, FiniteUniverse};
use super::OracleError;
use crate::model::{Contract, Model, PortRef, Predicate, Term, Variable};

/// A finite prefix of a behavior: one valuation per instant, each a carrier
/// index per port.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Trace {
    pub ports: Vec<PortRef>,
    pub valuations: Vec<Vec<usize>>,
}

impl Trace {
    pub fn horizon(&self) -> usize {
        self.valuations.len()
    }

    pub fn port_index(&self, p: &PortRef) -> Option<usize> {
        self.ports.iter().position(|q| q == p)
    }

    pub fn value(&self, p: &PortRef, t: usize) -> Option<usize> {
        Some(self.valuations.get(t)?[self.port_index(p)?])
    }

    /// Restriction to `ports`, in the given order.
    pub fn project(&self, ports: &[PortRef]) -> Trace {
        let idx: Vec<usize> = ports
            .iter()
            .map(|p| self.port_index(p).expect("port of the trace"))
            .collect();
        Trace {
            ports: ports.to_vec(),
            valuations: self
                .valuations
                .iter()
                .map(|v| idx.iter().map(|&i| v[i]).collect())
                .collect(),
        }
    }

    /// Time × port table with carrier names.
    pub fn table(&self, model: &Model, u: &FiniteUniverse) -> String {
        let names: Vec<String> = self.ports.iter().map(|p| p.to_string()).collect();
        let mut rows: Vec<Vec<String>> =
            vec![std::iter::once("t".to_string()).chain(names).collect()];
        for (t, v) in self.valuations.iter().enumerate() {
            let mut row = vec![t.to_string()];
            for (p, &x) in self.ports.iter().zip(v) {
                let sort = model.port_sort(p).expect("port of the model");
                row.push(u.name(sort, x).to_string());
            }
            rows.push(row);
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in rows {
            let cells: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}

/// Values of contract variables.
pub type Valuation = BTreeMap<String, usize>;

pub fn eval_term(
    u: &FiniteUniverse,
    trace: &Trace,
    t: usize,
    sigma: &Valuation,
    term: &Term,
) -> usize {
    match term {
        Term::Var(v) => sigma[&v.name],
        Term::Port(p) => trace.value(p, t).expect("port of the trace"),
        Term::App(f, args) => {
            let a: Vec<usize> = args
                .iter()
                .map(|x| eval_term(u, trace, t, sigma, x))
                .collect();
            u.apply(f, &a).expect("total operation")
        }
    }
}

pub fn eval_predicate(
    u: &FiniteUniverse,
    trace: &Trace,
    t: usize,
    sigma: &Valuation,
    p: &Predicate,
) -> bool {
    match p {
        Predicate::Eq(l, r) => eval_term(u, trace, t, sigma, l) == eval_term(u, trace, t, sigma, r),
        Predicate::Atom(s, args) => {
            let a: Vec<usize> = args
                .iter()
                .map(|x| eval_term(u, trace, t, sigma, x))
                .collect();
            u.holds(s, &a)
        }
        Predicate::And(ps) => ps.iter().all(|q| eval_predicate(u, trace, t, sigma, q)),
        Predicate::Or(ps) => ps.iter().any(|q| eval_predicate(u, trace, t, sigma, q)),
    }
}

/// Every assignment of carrier elements to `vars`, in lexicographic order.
pub fn valuations(u: &FiniteUniverse, vars: &[Variable]) -> Vec<Valuation> {
    let sizes: Vec<usize> = vars.iter().map(|v| u.size(&v.sort)).collect();
    tuples(&sizes)
        .into_iter()
        .map(|t| vars.iter().map(|v| v.name.clone()).zip(t).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Satisfies {
    Yes,
    /// Least window start and variable values where the triggers hold but
    /// the guarantee does not.
    No {
        window: usize,
        sigma: Valuation,
    },
}

/// Whether every window of `trace` that fits within its horizon satisfies
/// `contract`, for all values of the contract variables.
pub fn trace_satisfies(
    u: &FiniteUniverse,
    trace: &Trace,
    contract: &Contract,
) -> Result<Satisfies, OracleError> {
    let d = contract.duration as usize;
    if trace.horizon() <= d {
        return Err(OracleError::HorizonTooSmall {
            horizon: trace.horizon(),
            needed: d + 1,
        });
    }
    let sigmas = valuations(u, &contract.variables);
    for n in 0..trace.horizon() - d {
        for sigma in &sigmas {
            let triggered = contract
                .triggers
                .iter()
                .all(|tr| eval_predicate(u, trace, n + tr.time as usize, sigma, &tr.predicate));
            if triggered && !eval_predicate(u, trace, n + d, sigma, &contract.guarantee) {
                return Ok(Satisfies::No {
                    window: n,
                    sigma: sigma.clone(),
                });
            }
        }
    }
    Ok(Satisfies::Yes)
}
