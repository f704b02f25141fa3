//! Concrete syntax: lexer, recursive-descent parser and canonical printer.
//!
//! Grammar summary:
//!
//! ```text
//! model     = "Pattern" id "ShortName" id "{" dtspec? ctypes? connections? contracts? "}"
//! dtspec    = "DTSpec" "{" (dt ("," dt)*)? "}"
//! dt        = "DT" id "(" ("Sort" id | "Predicate" decl ("," decl)* | "Operation" opdecl ("," opdecl)*)* ")"
//! ctype     = "CType" id "{" ports("InputPorts")? ports("OutputPorts")? ("Contracts" "{" contract,* "}")? "}"
//! contract  = "Contract" id "{" ("var" id ":" sort ","?)* triggers? "guarantees" "{" pred "}"
//!             "duration" nat proof? "}"
//! proof     = "proof" "{" (id ":" "at" nat "have" pred ("from" "[" refset,* "]")? "using" id "." id),* "}"
//! refset    = ref | "{" ref,* "}"
//! ref       = id ("with" "[" ("(" port "," port ")"),* "]")?
//! pred      = conj ("\/" conj)*        conj = prim ("/\" prim)*
//! prim      = "[" term "=" term "]" | id "." id "[" term,* "]" | "(" pred ")"
//! term      = id "." id "[" term,* "]" | id "." id | id
//! ```

mod lexer;
mod parser;
mod printer;

pub use lexer::{lex, Tok, Token, KEYWORDS};
pub use parser::{parse_model, parse_model_named, Parsed};
pub use printer::{print_model, print_predicate, print_proof};
