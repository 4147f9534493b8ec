//! A typed e-graph equality-saturation engine.
//!
//! Programs declare sorts and typed functions, insert ground terms, register
//! rewrites whose two sides must share a sort, then run equality saturation
//! and query the result with `check` and `extract`. The [`frontend`] module
//! provides the s-expression command language used by the `eqsat` binary.

pub mod egraph;
pub mod error;
pub mod extract;
pub mod frontend;
pub mod rules;
pub mod scheduler;
pub mod schema;
pub mod unionfind;
pub mod value;

pub use egraph::{ClassSnapshot, EClass, EClassId, EGraph, ENode};
pub use error::{Error, MismatchSite, PrimitiveError, Result, TypeError};
pub use extract::{extract, CostModel, Extractor};
pub use frontend::{parse_program, pretty_print, ExportDocument, FrontendError, Output, Session};
pub use rules::{
    apply_matches, apply_rule, check, ematch, make_rewrite, search, search_rule, Action, Fact,
    Pattern, PatternVar, Rule, Substitution,
};
pub use scheduler::{run, IterationReport, RunConfig, RunReport};
pub use schema::{qualify, FuncId, FunctionDecl, Schema, Sort, SortId, SortKind, Term};
pub use unionfind::UnionFind;
pub use value::{eval_primitive, PrimitiveOp, Value};
