//! Source locations and diagnostics shared by the parser and the validators.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// A 1-based, inclusive-start / exclusive-end region of a source file.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceSpan {
    pub file: Arc<str>,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(file: Arc<str>, start: (u32, u32), end: (u32, u32)) -> Self {
        debug_assert!(start <= end);
        SourceSpan {
            file,
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// A zero-width span at the start of an unnamed input.
    pub fn synthetic() -> Self {
        SourceSpan::new(Arc::from("<synthetic>"), (1, 1), (1, 1))
    }

    /// Smallest span covering both `self` and `other`.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), start, end)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}-{}:{}",
            self.file, self.start_line, self.start_col, self.end_line, self.end_col
        )
    }
}

/// Location attached to model nodes.
///
/// Structural equality of models ignores where a node came from, so two
/// `Loc`s always compare equal and hash identically.
#[derive(Clone, Debug)]
pub struct Loc(pub SourceSpan);

impl Loc {
    pub fn synthetic() -> Self {
        Loc(SourceSpan::synthetic())
    }
    pub fn span(&self) -> &SourceSpan {
        &self.0
    }
}

impl Default for Loc {
    fn default() -> Self {
        Loc::synthetic()
    }
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}
impl Eq for Loc {}
impl Hash for Loc {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Closed set of diagnostic rule identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    // lexing and parsing
    LexError,
    UnexpectedToken,
    ExpectedPattern,
    // name resolution
    UnresolvedSort,
    UnresolvedPort,
    UnresolvedName,
    UnresolvedSymbol,
    UnresolvedContract,
    UnresolvedLabel,
    DuplicateDatatype,
    // structure
    SignatureDuplicate,
    SignatureUnknownSort,
    ComponentDuplicate,
    PortDuplicate,
    ContractDuplicate,
    ArchContractDuplicate,
    VariableDuplicate,
    TriggerLabelDuplicate,
    ConnectionUnknownPort,
    ConnectionDirection,
    ConnectionDuplicateInput,
    ConnectionSort,
    SortMismatch,
    TriggerPortDirection,
    GuaranteePortDirection,
    ArchTriggerPort,
    ArchGuaranteePort,
    ContractFirstTriggerTime,
    ContractTriggerOrder,
    ContractDurationAfterTrigger,
    ContractDurationPositive,
}

impl Rule {
    pub const ALL: &'static [Rule] = &[
        Rule::LexError,
        Rule::UnexpectedToken,
        Rule::ExpectedPattern,
        Rule::UnresolvedSort,
        Rule::UnresolvedPort,
        Rule::UnresolvedName,
        Rule::UnresolvedSymbol,
        Rule::UnresolvedContract,
        Rule::UnresolvedLabel,
        Rule::DuplicateDatatype,
        Rule::SignatureDuplicate,
        Rule::SignatureUnknownSort,
        Rule::ComponentDuplicate,
        Rule::PortDuplicate,
        Rule::ContractDuplicate,
        Rule::ArchContractDuplicate,
        Rule::VariableDuplicate,
        Rule::TriggerLabelDuplicate,
        Rule::ConnectionUnknownPort,
        Rule::ConnectionDirection,
        Rule::ConnectionDuplicateInput,
        Rule::ConnectionSort,
        Rule::SortMismatch,
        Rule::TriggerPortDirection,
        Rule::GuaranteePortDirection,
        Rule::ArchTriggerPort,
        Rule::ArchGuaranteePort,
        Rule::ContractFirstTriggerTime,
        Rule::ContractTriggerOrder,
        Rule::ContractDurationAfterTrigger,
        Rule::ContractDurationPositive,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::LexError => "LEX_ERROR",
            Rule::UnexpectedToken => "UNEXPECTED_TOKEN",
            Rule::ExpectedPattern => "EXPECTED_PATTERN",
            Rule::UnresolvedSort => "UNRESOLVED_SORT",
            Rule::UnresolvedPort => "UNRESOLVED_PORT",
            Rule::UnresolvedName => "UNRESOLVED_NAME",
            Rule::UnresolvedSymbol => "UNRESOLVED_SYMBOL",
            Rule::UnresolvedContract => "UNRESOLVED_CONTRACT",
            Rule::UnresolvedLabel => "UNRESOLVED_LABEL",
            Rule::DuplicateDatatype => "DUPLICATE_DATATYPE",
            Rule::SignatureDuplicate => "SIGNATURE_DUPLICATE",
            Rule::SignatureUnknownSort => "SIGNATURE_UNKNOWN_SORT",
            Rule::ComponentDuplicate => "COMPONENT_DUPLICATE",
            Rule::PortDuplicate => "PORT_DUPLICATE",
            Rule::ContractDuplicate => "CONTRACT_DUPLICATE",
            Rule::ArchContractDuplicate => "ARCH_CONTRACT_DUPLICATE",
            Rule::VariableDuplicate => "VARIABLE_DUPLICATE",
            Rule::TriggerLabelDuplicate => "TRIGGER_LABEL_DUPLICATE",
            Rule::ConnectionUnknownPort => "CONNECTION_UNKNOWN_PORT",
            Rule::ConnectionDirection => "CONNECTION_DIRECTION",
            Rule::ConnectionDuplicateInput => "CONNECTION_DUPLICATE_INPUT",
            Rule::ConnectionSort => "CONNECTION_SORT",
            Rule::SortMismatch => "SORT_MISMATCH",
            Rule::TriggerPortDirection => "TRIGGER_PORT_DIRECTION",
            Rule::GuaranteePortDirection => "GUARANTEE_PORT_DIRECTION",
            Rule::ArchTriggerPort => "ARCH_TRIGGER_PORT",
            Rule::ArchGuaranteePort => "ARCH_GUARANTEE_PORT",
            Rule::ContractFirstTriggerTime => "CONTRACT_FIRST_TRIGGER_TIME",
            Rule::ContractTriggerOrder => "CONTRACT_TRIGGER_ORDER",
            Rule::ContractDurationAfterTrigger => "CONTRACT_DURATION_AFTER_TRIGGER",
            Rule::ContractDurationPositive => "CONTRACT_DURATION_POSITIVE",
        }
    }

    pub fn from_id(id: &str) -> Option<Rule> {
        Rule::ALL.iter().copied().find(|r| r.id() == id)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule: Rule,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(rule: Rule, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule,
            message: message.into(),
            span,
        }
    }

    pub fn warning(rule: Rule, span: SourceSpan, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            rule,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} [{}] {}",
            self.span, self.severity, self.rule, self.message
        )
    }
}
