//! Toolchain for architecture proof models: parsing, structural validation,
//! proof checking, Isabelle/Isar emission and a finite-domain oracle.

pub mod check;
pub mod diagnostic;
pub mod entail;
pub mod isar;
pub mod model;
pub mod oracle;
pub mod syntax;
pub mod validate;

pub use check::{
    check_proof, explain_step, time_of_reference, CheckReport, Condition, Overall, Verdict,
};
pub use diagnostic::{Diagnostic, Loc, Rule, Severity, SourceSpan};
pub use model::*;
pub use syntax::{parse_model, parse_model_named, print_model, Parsed};
pub use validate::{architecture_interface, validate_structure};
