//! The s-expression command language: parsing, evaluation and JSON export.

mod ast;
mod json;
mod parse;
mod session;

use thiserror::Error;

use crate::error::Error;

pub use ast::{
    pretty_print, ActionSyntax, Command, CommandKind, Constructor, Expr, FactSyntax, Span,
};
pub use json::{ExportClass, ExportDocument, ExportNode};
pub use parse::{is_identifier, parse_program};
pub use session::{Output, Session};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FrontendError {
    #[error("{span}: lex error: {message}")]
    Lex { message: String, span: Span },
    #[error("{span}: parse error: {message}")]
    Parse { message: String, span: Span },
    #[error("{span}: {source}")]
    Eval { source: Box<Error>, span: Span },
}

impl FrontendError {
    pub fn span(&self) -> Span {
        match self {
            FrontendError::Lex { span, .. }
            | FrontendError::Parse { span, .. }
            | FrontendError::Eval { span, .. } => *span,
        }
    }

    /// Process exit code for this error: 3 for runtime failures, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            FrontendError::Eval { source, .. } if source.is_runtime() => 3,
            _ => 2,
        }
    }
}
