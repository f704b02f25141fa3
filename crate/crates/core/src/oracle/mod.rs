//! Executable finite-domain semantics: traces over finite carriers, their
//! composition along connections, satisfaction of contracts, and a
//! forward-closure proof search.

mod encode;
mod search;
mod trace;
mod universe;

pub use encode::{
    compose_behaviors, verify_satisfaction, verify_with_budget, BehaviorSpec, Verification,
    DEFAULT_CLAUSE_BUDGET,
};
pub use search::{saturate, search_proof, search_proof_with, SearchError, SearchOptions};
pub use trace::{
    eval_predicate, eval_term, trace_satisfies, valuations, Satisfies, Trace, Valuation,
};
pub use universe::{parse_universe, tuples, FiniteUniverse, UniverseError};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("HORIZON_TOO_SMALL: horizon {horizon}, need at least {needed}")]
    HorizonTooSmall { horizon: usize, needed: usize },
    #[error("EXPLOSION: {0}")]
    Explosion(String),
    #[error("malformed universe: {0}")]
    Universe(String),
}
