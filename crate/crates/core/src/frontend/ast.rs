//! Syntax tree of the command language and its canonical printer.

use std::fmt;

use crate::value::Value;

/// Source location of a syntax node.
///
/// Spans never take part in equality, so programs that differ only in
/// layout compare equal.
#[derive(Clone, Copy, Debug, Default, Eq)]
pub struct Span {
    /// Byte offset of the first character.
    pub start: usize,
    /// Byte offset one past the last character.
    pub end: usize,
    /// 1-based line of `start`.
    pub line: usize,
    /// 1-based column (in characters) of `start`.
    pub column: usize,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(Value, Span),
    Ident(String, Span),
    Call(String, Vec<Expr>, Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Lit(_, s) | Expr::Ident(_, s) | Expr::Call(_, _, s) => *s,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v, _) => write!(f, "{v}"),
            Expr::Ident(name, _) => f.write_str(name),
            Expr::Call(head, args, _) => {
                write!(f, "({head}")?;
                for arg in args {
                    write!(f, " {arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactSyntax {
    Eq(Expr, Expr),
    Exists(Expr),
}

impl fmt::Display for FactSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactSyntax::Eq(l, r) => write!(f, "(= {l} {r})"),
            FactSyntax::Exists(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ActionSyntax {
    Union(Expr, Expr),
    Let(String, Expr),
}

impl fmt::Display for ActionSyntax {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionSyntax::Union(l, r) => write!(f, "(union {l} {r})"),
            ActionSyntax::Let(name, e) => write!(f, "(let {name} {e})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constructor {
    pub name: String,
    pub params: Vec<String>,
    pub cost: Option<u64>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CommandKind {
    Datatype {
        name: String,
        constructors: Vec<Constructor>,
    },
    Function {
        name: String,
        params: Vec<String>,
        ret: String,
        cost: Option<u64>,
    },
    /// `let`, or its alias `define`.
    Let {
        name: String,
        expr: Expr,
    },
    Rewrite {
        lhs: Expr,
        rhs: Expr,
    },
    Rule {
        query: Vec<FactSyntax>,
        actions: Vec<ActionSyntax>,
    },
    Run(usize),
    Check(FactSyntax),
    Extract(Expr),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Command {
    pub kind: CommandKind,
    pub span: Span,
}

fn write_cost(f: &mut fmt::Formatter<'_>, cost: Option<u64>) -> fmt::Result {
    match cost {
        Some(c) => write!(f, " :cost {c}"),
        None => Ok(()),
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CommandKind::Datatype { name, constructors } => {
                write!(f, "(datatype {name}")?;
                for ctor in constructors {
                    write!(f, "\n  ({}", ctor.name)?;
                    for p in &ctor.params {
                        write!(f, " {p}")?;
                    }
                    write_cost(f, ctor.cost)?;
                    f.write_str(")")?;
                }
                f.write_str(")")
            }
            CommandKind::Function {
                name,
                params,
                ret,
                cost,
            } => {
                write!(f, "(function {name} ({}) {ret}", params.join(" "))?;
                write_cost(f, *cost)?;
                f.write_str(")")
            }
            CommandKind::Let { name, expr } => write!(f, "(let {name} {expr})"),
            CommandKind::Rewrite { lhs, rhs } => write!(f, "(rewrite {lhs} {rhs})"),
            CommandKind::Rule { query, actions } => {
                f.write_str("(rule (")?;
                for (i, fact) in query.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{fact}")?;
                }
                f.write_str(")\n      (")?;
                for (i, action) in actions.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{action}")?;
                }
                f.write_str("))")
            }
            CommandKind::Run(limit) => write!(f, "(run {limit})"),
            CommandKind::Check(fact) => write!(f, "(check {fact})"),
            CommandKind::Extract(expr) => write!(f, "(extract {expr})"),
        }
    }
}

/// Renders a program in canonical form, one command per line.
pub fn pretty_print(commands: &[Command]) -> String {
    let mut out = String::new();
    for cmd in commands {
        out.push_str(&cmd.to_string());
        out.push('\n');
    }
    out
}
