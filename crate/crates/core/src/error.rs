use std::fmt;

use thiserror::Error;

use crate::egraph::EClassId;

/// Where a sort mismatch was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MismatchSite {
    /// Zero-based argument position of a function application.
    Argument {
        function: String,
        index: usize,
    },
    RewriteSides,
    Union,
    Equality,
    Binding(String),
}

impl fmt::Display for MismatchSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MismatchSite::Argument { function, index } => {
                write!(f, "argument {index} of `{function}`")
            }
            MismatchSite::RewriteSides => f.write_str("rewrite left- and right-hand sides"),
            MismatchSite::Union => f.write_str("union"),
            MismatchSite::Equality => f.write_str("equality"),
            MismatchSite::Binding(name) => write!(f, "uses of `{name}`"),
        }
    }
}

/// Static errors: declarations, term typing and rule construction.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TypeError {
    #[error("sort `{0}` is already declared")]
    DuplicateSort(String),
    #[error("`{0}` is a reserved primitive sort name")]
    ReservedName(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("function `{0}` is already declared")]
    DuplicateFunction(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("name `{0}` is already bound")]
    DuplicateName(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("`{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("sort mismatch in {site}: expected {expected}, found {found}")]
    SortMismatch {
        expected: String,
        found: String,
        site: MismatchSite,
    },
    #[error("cost of `{0}` must be at least 1")]
    InvalidCost(String),
    #[error("variable `{0}` is not bound by the query")]
    UnboundVariable(String),
    #[error("pattern `{0}` cannot be used as a left-hand side")]
    DegeneratePattern(String),
    #[error("cannot infer the sort of `{0}`")]
    CannotInferSort(String),
    #[error("primitive `{0}` is only allowed in equality facts and actions")]
    PrimitiveInQuery(String),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
}

/// Errors raised by primitive evaluation.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PrimitiveError {
    #[error("integer overflow in ({op} {lhs} {rhs})")]
    Overflow { op: String, lhs: i64, rhs: i64 },
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("primitive `{op}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("ill-sorted arguments to primitive `{op}`")]
    TypeMismatch { op: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error("invalid e-class id {0}")]
    InvalidId(EClassId),
    #[error("rule `{rule}` failed under {substitution}: {source}")]
    Action {
        rule: String,
        substitution: String,
        source: PrimitiveError,
    },
    #[error("iteration {iteration}: {source}")]
    /// `iteration` counts from 1.
    Iteration {
        iteration: usize,
        source: Box<Error>,
    },
    #[error("run limit must be at least 1")]
    InvalidRunLimit,
    #[error("node budget exceeded: {nodes} e-nodes > limit {limit}")]
    NodeBudgetExceeded { limit: usize, nodes: usize },
    #[error("e-class {0} contains no finite term")]
    NoFiniteTerm(EClassId),
    #[error("malformed e-graph document: {0}")]
    Import(String),
}

impl Error {
    /// True for failures that happen while executing a well-typed program
    /// (overflow, resource limits, extraction of cyclic classes).
    pub fn is_runtime(&self) -> bool {
        match self {
            Error::Type(_) | Error::InvalidRunLimit | Error::Import(_) => false,
            Error::Iteration { source, .. } => source.is_runtime(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
