//! Lexer and parser for the command language.

use super::ast::{ActionSyntax, Command, CommandKind, Constructor, Expr, FactSyntax, Span};
use super::FrontendError;
use crate::value::Value;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Int(i64),
    Str(String),
    Ident(String),
    Keyword(String),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || "_+*/<>=!?-".contains(c)
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_+*/<>=!?.-".contains(c)
}

/// True if `s` is a legal identifier in the command language.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if is_ident_start(c) => {}
        _ => return false,
    }
    chars.all(is_ident_continue) && !is_integer(s)
}

fn is_integer(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn is_delimiter(c: char) -> bool {
    c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';')
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            text,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }

    fn error(&self, message: impl Into<String>, mut span: Span) -> FrontendError {
        span.end = self.pos.max(span.start);
        FrontendError::Lex {
            message: message.into(),
            span,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Token, Span)>, FrontendError> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let mut span = self.here();
            let token = match c {
                c if c.is_whitespace() => {
                    self.bump();
                    continue;
                }
                ';' => {
                    while let Some(c) = self.bump() {
                        if c == '\n' {
                            break;
                        }
                    }
                    continue;
                }
                '(' => {
                    self.bump();
                    Token::Open
                }
                ')' => {
                    self.bump();
                    Token::Close
                }
                '"' => self.string(span)?,
                _ => {
                    let start = self.pos;
                    while self.peek().is_some_and(|c| !is_delimiter(c)) {
                        self.bump();
                    }
                    let word = &self.text[start..self.pos];
                    if is_integer(word) {
                        let n = word.parse().map_err(|_| {
                            self.error(format!("integer literal `{word}` out of range"), span)
                        })?;
                        Token::Int(n)
                    } else if let Some(kw) = word.strip_prefix(':') {
                        if !is_identifier(kw) {
                            return Err(self.error(format!("bad keyword `{word}`"), span));
                        }
                        Token::Keyword(kw.to_owned())
                    } else if is_identifier(word) {
                        Token::Ident(word.to_owned())
                    } else {
                        return Err(self.error(format!("bad token `{word}`"), span));
                    }
                }
            };
            span.end = self.pos;
            out.push((token, span));
        }
        Ok(out)
    }

    fn string(&mut self, span: Span) -> Result<Token, FrontendError> {
        self.bump();
        let mut value = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unterminated string", span)),
                Some('"') => return Ok(Token::Str(value)),
                Some('\\') => match self.bump() {
                    Some('"') => value.push('"'),
                    Some('\\') => value.push('\\'),
                    Some(c) => return Err(self.error(format!("unknown escape `\\{c}`"), span)),
                    None => return Err(self.error("unterminated string", span)),
                },
                Some(c) => value.push(c),
            }
        }
    }
}

#[derive(Debug)]
enum SExp {
    Atom(Token, Span),
    List(Vec<SExp>, Span),
}

impl SExp {
    fn span(&self) -> Span {
        match self {
            SExp::Atom(_, s) | SExp::List(_, s) => *s,
        }
    }
}

fn parse_error(message: impl Into<String>, span: Span) -> FrontendError {
    FrontendError::Parse {
        message: message.into(),
        span,
    }
}

fn read_sexps(tokens: Vec<(Token, Span)>) -> Result<Vec<SExp>, FrontendError> {
    // stack of open lists: (opening span, items)
    let mut stack: Vec<(Span, Vec<SExp>)> = Vec::new();
    let mut top = Vec::new();
    for (token, span) in tokens {
        match token {
            Token::Open => stack.push((span, Vec::new())),
            Token::Close => {
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| parse_error("unexpected `)`", span))?;
                let full = Span {
                    end: span.end,
                    ..open
                };
                let list = SExp::List(items, full);
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            atom => {
                let atom = SExp::Atom(atom, span);
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(atom),
                    None => top.push(atom),
                }
            }
        }
    }
    if let Some((open, _)) = stack.pop() {
        return Err(parse_error("unclosed `(`", open));
    }
    Ok(top)
}

fn ident(sexp: &SExp, what: &str) -> Result<String, FrontendError> {
    match sexp {
        SExp::Atom(Token::Ident(name), _) => Ok(name.clone()),
        other => Err(parse_error(format!("expected {what}"), other.span())),
    }
}

fn expr(sexp: &SExp) -> Result<Expr, FrontendError> {
    match sexp {
        SExp::Atom(token, span) => Ok(match token {
            Token::Int(n) => Expr::Lit(Value::I64(*n), *span),
            Token::Str(s) => Expr::Lit(Value::Str(s.clone()), *span),
            Token::Ident(name) if name == "true" => Expr::Lit(Value::Bool(true), *span),
            Token::Ident(name) if name == "false" => Expr::Lit(Value::Bool(false), *span),
            Token::Ident(name) => Expr::Ident(name.clone(), *span),
            Token::Keyword(k) => {
                return Err(parse_error(format!("unexpected keyword `:{k}`"), *span))
            }
            Token::Open | Token::Close => unreachable!(),
        }),
        SExp::List(items, span) => {
            let (head, args) = items
                .split_first()
                .ok_or_else(|| parse_error("empty expression", *span))?;
            let head = ident(head, "a function name")?;
            let args = args.iter().map(expr).collect::<Result<_, _>>()?;
            Ok(Expr::Call(head, args, *span))
        }
    }
}

fn fact(sexp: &SExp) -> Result<FactSyntax, FrontendError> {
    if let SExp::List(items, span) = sexp {
        if let Some(SExp::Atom(Token::Ident(head), _)) = items.first() {
            if head == "=" {
                if items.len() != 3 {
                    return Err(parse_error("`=` takes exactly two expressions", *span));
                }
                return Ok(FactSyntax::Eq(expr(&items[1])?, expr(&items[2])?));
            }
        }
    }
    Ok(FactSyntax::Exists(expr(sexp)?))
}

fn action(sexp: &SExp) -> Result<ActionSyntax, FrontendError> {
    let SExp::List(items, span) = sexp else {
        return Err(parse_error("expected an action", sexp.span()));
    };
    match items
        .first()
        .map(|h| ident(h, "an action"))
        .transpose()?
        .as_deref()
    {
        Some("union") if items.len() == 3 => {
            Ok(ActionSyntax::Union(expr(&items[1])?, expr(&items[2])?))
        }
        Some("let") if items.len() == 3 => Ok(ActionSyntax::Let(
            ident(&items[1], "a name")?,
            expr(&items[2])?,
        )),
        Some("union" | "let") => Err(parse_error("action takes exactly two arguments", *span)),
        _ => Err(parse_error(
            "expected `(union a b)` or `(let name e)`",
            *span,
        )),
    }
}

fn list<'a>(sexp: &'a SExp, what: &str) -> Result<&'a [SExp], FrontendError> {
    match sexp {
        SExp::List(items, _) => Ok(items),
        other => Err(parse_error(
            format!("expected a list of {what}"),
            other.span(),
        )),
    }
}

/// Splits a trailing `:cost N` off `items`.
fn take_cost(items: &[SExp]) -> Result<(&[SExp], Option<u64>), FrontendError> {
    for (i, item) in items.iter().enumerate() {
        if let SExp::Atom(Token::Keyword(k), span) = item {
            if k != "cost" {
                return Err(parse_error(format!("unknown keyword `:{k}`"), *span));
            }
            if i + 2 != items.len() {
                return Err(parse_error(
                    "`:cost` must be followed by one integer at the end",
                    *span,
                ));
            }
            return match &items[i + 1] {
                SExp::Atom(Token::Int(n), _) if *n >= 1 => Ok((&items[..i], Some(*n as u64))),
                other => Err(parse_error("cost must be a positive integer", other.span())),
            };
        }
    }
    Ok((items, None))
}

fn arity(items: &[SExp], expected: usize, form: &str, span: Span) -> Result<(), FrontendError> {
    if items.len() != expected + 1 {
        return Err(parse_error(
            format!(
                "`{form}` takes {expected} argument(s), found {}",
                items.len() - 1
            ),
            span,
        ));
    }
    Ok(())
}

fn command(sexp: &SExp) -> Result<Command, FrontendError> {
    let SExp::List(items, span) = sexp else {
        return Err(parse_error("expected a command", sexp.span()));
    };
    let span = *span;
    let Some(head) = items.first() else {
        return Err(parse_error("empty command", span));
    };
    let head = ident(head, "a command name")?;
    let kind = match head.as_str() {
        "datatype" => {
            if items.len() < 2 {
                return Err(parse_error("`datatype` needs a name", span));
            }
            let name = ident(&items[1], "a sort name")?;
            let constructors = items[2..]
                .iter()
                .map(|c| {
                    let parts = list(c, "constructor parts")?;
                    let (parts, cost) = take_cost(parts)?;
                    let (name, params) = parts
                        .split_first()
                        .ok_or_else(|| parse_error("empty constructor", c.span()))?;
                    Ok(Constructor {
                        name: ident(name, "a constructor name")?,
                        params: params
                            .iter()
                            .map(|p| ident(p, "a sort name"))
                            .collect::<Result<_, _>>()?,
                        cost,
                        span: c.span(),
                    })
                })
                .collect::<Result<_, FrontendError>>()?;
            CommandKind::Datatype { name, constructors }
        }
        "function" => {
            let (parts, cost) = take_cost(items)?;
            arity(parts, 3, "function", span)?;
            CommandKind::Function {
                name: ident(&parts[1], "a function name")?,
                params: list(&parts[2], "sorts")?
                    .iter()
                    .map(|p| ident(p, "a sort name"))
                    .collect::<Result<_, _>>()?,
                ret: ident(&parts[3], "a sort name")?,
                cost,
            }
        }
        "let" | "define" => {
            arity(items, 2, &head, span)?;
            CommandKind::Let {
                name: ident(&items[1], "a name")?,
                expr: expr(&items[2])?,
            }
        }
        "rewrite" => {
            arity(items, 2, "rewrite", span)?;
            CommandKind::Rewrite {
                lhs: expr(&items[1])?,
                rhs: expr(&items[2])?,
            }
        }
        "rule" => {
            arity(items, 2, "rule", span)?;
            CommandKind::Rule {
                query: list(&items[1], "facts")?
                    .iter()
                    .map(fact)
                    .collect::<Result<_, _>>()?,
                actions: list(&items[2], "actions")?
                    .iter()
                    .map(action)
                    .collect::<Result<_, _>>()?,
            }
        }
        "run" => {
            arity(items, 1, "run", span)?;
            match &items[1] {
                SExp::Atom(Token::Int(n), _) if *n >= 0 => CommandKind::Run(*n as usize),
                other => {
                    return Err(parse_error(
                        "`run` expects a non-negative iteration count",
                        other.span(),
                    ))
                }
            }
        }
        "check" => {
            arity(items, 1, "check", span)?;
            CommandKind::Check(fact(&items[1])?)
        }
        "extract" => {
            arity(items, 1, "extract", span)?;
            CommandKind::Extract(expr(&items[1])?)
        }
        other => {
            return Err(parse_error(
                format!("unknown command `{other}`"),
                items[0].span(),
            ))
        }
    };
    Ok(Command { kind, span })
}

/// Parses a whole program.
pub fn parse_program(text: &str) -> Result<Vec<Command>, FrontendError> {
    let tokens = Lexer::new(text).tokens()?;
    read_sexps(tokens)?.iter().map(command).collect()
}
