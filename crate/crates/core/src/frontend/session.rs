//! Program state and command evaluation.

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;

use super::ast::{ActionSyntax, Command, CommandKind, Expr, FactSyntax};
use super::json::{ExportClass, ExportDocument, ExportNode};
use super::parse::parse_program;
use super::FrontendError;
use crate::egraph::{ClassSnapshot, EClassId, EGraph, ENode};
use crate::error::{Error, Result, TypeError};
use crate::extract::{extract, CostModel};
use crate::rules::{self, make_rewrite, Action, Fact, Pattern, Rule};
use crate::scheduler::{self, RunConfig, RunReport};
use crate::schema::{FunctionDecl, Schema, SortId, Term};
use crate::value::{PrimitiveOp, Value};

/// Result of evaluating one command.
#[derive(Clone, Debug, PartialEq)]
pub enum Output {
    Declared(String),
    Bound { name: String, class: EClassId },
    RuleAdded(String),
    Ran(RunReport),
    Check { fact: String, passed: bool },
    Extracted { term: Term, cost: u64 },
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Declared(what) => write!(f, "declared {what}"),
            Output::Bound { name, class } => write!(f, "bound {name} to e-class {class}"),
            Output::RuleAdded(name) => write!(f, "added rule {name}"),
            Output::Ran(report) => {
                let last = report.per_iteration.last();
                write!(
                    f,
                    "ran {} iteration(s){}: {} e-classes, {} e-nodes",
                    report.iterations_run,
                    if report.saturated { ", saturated" } else { "" },
                    last.map_or(0, |i| i.classes_after),
                    last.map_or(0, |i| i.nodes_after),
                )
            }
            Output::Check { fact, passed: true } => write!(f, "check passed: {fact}"),
            Output::Check {
                fact,
                passed: false,
            } => write!(f, "check failed: {fact}"),
            Output::Extracted { term, cost } => write!(f, "{term} ; cost {cost}"),
        }
    }
}

/// Schema, e-graph, bound names and registered rules of one program.
#[derive(Clone, Debug, Default)]
pub struct Session {
    egraph: EGraph,
    bindings: IndexMap<String, EClassId>,
    rules: Vec<Rule>,
    config: RunConfig,
    cost_model: CostModel,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_config(config: RunConfig) -> Self {
        Session {
            config,
            ..Self::default()
        }
    }

    pub fn egraph(&self) -> &EGraph {
        &self.egraph
    }

    pub fn schema(&self) -> &Schema {
        self.egraph.schema()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn binding(&self, name: &str) -> Option<EClassId> {
        self.bindings
            .get(name)
            .map(|&id| self.egraph.find(id).unwrap())
    }

    pub fn bindings(&self) -> impl Iterator<Item = (&str, EClassId)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn set_cost_model(&mut self, model: CostModel) {
        self.cost_model = model;
    }

    /// Parses and evaluates `text`, stopping at the first error.
    pub fn eval_program(&mut self, text: &str) -> Result<Vec<Output>, FrontendError> {
        parse_program(text)?
            .iter()
            .map(|cmd| self.eval_command(cmd))
            .collect()
    }

    pub fn eval_command(&mut self, cmd: &Command) -> Result<Output, FrontendError> {
        self.eval_kind(&cmd.kind)
            .map_err(|source| FrontendError::Eval {
                source: Box::new(source),
                span: cmd.span,
            })
    }

    fn eval_kind(&mut self, kind: &CommandKind) -> Result<Output> {
        match kind {
            CommandKind::Datatype { name, constructors } => {
                let ctors: Vec<(&str, Vec<&str>)> = constructors
                    .iter()
                    .map(|c| {
                        (
                            c.name.as_str(),
                            c.params.iter().map(String::as_str).collect(),
                        )
                    })
                    .collect();
                let schema = self.egraph.schema_mut();
                let (_, funcs) = schema.declare_datatype(name, &ctors)?;
                // a datatype declaration is atomic, so costs are validated by
                // the parser (cost >= 1) and applied afterwards
                for (ctor, func) in constructors.iter().zip(funcs) {
                    if let Some(cost) = ctor.cost {
                        self.cost_model = std::mem::take(&mut self.cost_model)
                            .with_cost(schema.function(func).name.clone(), cost)?;
                    }
                }
                Ok(Output::Declared(format!("datatype {name}")))
            }
            CommandKind::Function {
                name,
                params,
                ret,
                cost,
            } => {
                let schema = self.egraph.schema_mut();
                let params = params
                    .iter()
                    .map(|p| schema.lookup_sort(p))
                    .collect::<Result<Vec<_>, _>>()?;
                let ret = schema.lookup_sort(ret)?;
                let decl =
                    FunctionDecl::new(name.clone(), params, ret).with_cost(cost.unwrap_or(1));
                schema.declare_function(decl)?;
                Ok(Output::Declared(format!("function {name}")))
            }
            CommandKind::Let { name, expr } => {
                let term = ground_term(self.schema(), expr)?;
                let class = self.bind(name, &term)?;
                Ok(Output::Bound {
                    name: name.clone(),
                    class,
                })
            }
            CommandKind::Rewrite { lhs, rhs } => {
                let rule = self.resolve_rewrite(lhs, rhs)?;
                let name = rule.name.clone();
                self.rules.push(rule);
                Ok(Output::RuleAdded(name))
            }
            CommandKind::Rule { query, actions } => {
                let rule = self.resolve_rule(query, actions)?;
                let name = rule.name.clone();
                self.rules.push(rule);
                Ok(Output::RuleAdded(name))
            }
            CommandKind::Run(limit) => Ok(Output::Ran(self.run(*limit)?)),
            CommandKind::Check(fact) => {
                let rule = self.resolve_rule(std::slice::from_ref(fact), &[])?;
                let passed = self.check(&rule.query[0]);
                Ok(Output::Check {
                    fact: fact.to_string(),
                    passed,
                })
            }
            CommandKind::Extract(expr) => {
                let class = match expr {
                    Expr::Ident(name, _) => self
                        .binding(name)
                        .ok_or_else(|| TypeError::UnknownName(name.clone()))?,
                    _ => {
                        let term = ground_term(self.schema(), expr)?;
                        self.add_term(&term)?
                    }
                };
                let (term, cost) = self.extract(class)?;
                Ok(Output::Extracted { term, cost })
            }
        }
    }

    fn binding_sort(&self, name: &str) -> Option<SortId> {
        self.binding(name).map(|id| self.egraph.sort_of(id))
    }

    /// Typechecks and inserts a ground term, resolving names through the
    /// current bindings.
    pub fn add_term(&mut self, term: &Term) -> Result<EClassId> {
        self.schema()
            .typecheck_term(term, &|n| self.binding_sort(n))?;
        let bindings = &self.bindings;
        let id = self
            .egraph
            .add_term_with(term, &|n| bindings.get(n).copied())?;
        self.egraph.rebuild();
        self.egraph.find(id)
    }

    /// Inserts `term` and binds `name` to its class.
    pub fn bind(&mut self, name: &str, term: &Term) -> Result<EClassId> {
        if self.bindings.contains_key(name) {
            return Err(TypeError::DuplicateName(name.to_owned()).into());
        }
        let id = self.add_term(term)?;
        self.bindings.insert(name.to_owned(), id);
        Ok(id)
    }

    pub fn declare_datatype(
        &mut self,
        name: &str,
        constructors: &[(&str, Vec<&str>)],
    ) -> Result<SortId> {
        Ok(self
            .egraph
            .schema_mut()
            .declare_datatype(name, constructors)?
            .0)
    }

    pub fn declare_function(&mut self, decl: FunctionDecl) -> Result<()> {
        self.egraph.schema_mut().declare_function(decl)?;
        Ok(())
    }

    pub fn add_rule(&mut self, rule: Rule) {
        self.rules.push(rule);
    }

    pub fn run(&mut self, limit: usize) -> Result<RunReport> {
        scheduler::run(&mut self.egraph, &self.rules, limit, &self.config)
    }

    pub fn check(&mut self, fact: &Fact) -> bool {
        self.egraph.rebuild();
        rules::check(&self.egraph, fact)
    }

    pub fn extract(&mut self, class: EClassId) -> Result<(Term, u64)> {
        self.egraph.rebuild();
        extract(&self.egraph, class, &self.cost_model)
    }

    fn resolver(&self, allow_new: bool) -> Resolver<'_> {
        Resolver {
            session: self,
            vars: BTreeMap::new(),
            allow_new,
        }
    }

    fn resolve_rewrite(&self, lhs: &Expr, rhs: &Expr) -> Result<Rule> {
        if !matches!(lhs, Expr::Call(..)) {
            return Err(TypeError::DegeneratePattern(lhs.to_string()).into());
        }
        let mut resolver = self.resolver(true);
        let lhs = resolver.pattern(lhs, None)?;
        resolver.allow_new = false;
        let rhs = resolver.pattern(rhs, None)?;
        Ok(make_rewrite(self.schema(), lhs, rhs)?)
    }

    fn resolve_rule(&self, query: &[FactSyntax], actions: &[ActionSyntax]) -> Result<Rule> {
        let mut resolver = self.resolver(true);
        let mut facts = Vec::with_capacity(query.len());
        for fact in query {
            facts.push(match fact {
                FactSyntax::Exists(e) => Fact::Exists(resolver.pattern(e, None)?),
                FactSyntax::Eq(l, r) => {
                    let (l, r) = if resolver.is_fresh(l) {
                        let r = resolver.pattern(r, None)?;
                        let sort = resolver.sort_of(&r)?;
                        (resolver.pattern(l, Some(sort))?, r)
                    } else {
                        let l = resolver.pattern(l, None)?;
                        let sort = resolver.sort_of(&l)?;
                        (l, resolver.pattern(r, Some(sort))?)
                    };
                    Fact::Eq(l, r)
                }
            });
        }
        resolver.allow_new = false;
        let mut resolved = Vec::with_capacity(actions.len());
        for action in actions {
            resolved.push(match action {
                ActionSyntax::Union(l, r) => {
                    Action::Union(resolver.pattern(l, None)?, resolver.pattern(r, None)?)
                }
                ActionSyntax::Let(name, e) => {
                    let p = resolver.pattern(e, None)?;
                    let sort = resolver.sort_of(&p)?;
                    resolver.vars.insert(name.clone(), sort);
                    Action::Let(name.clone(), p)
                }
            });
        }
        let name = render_rule(query, actions);
        Ok(Rule::new(self.schema(), name, facts, resolved)?)
    }

    /// Canonical JSON view of the e-graph and bindings.
    pub fn export_json(&self) -> ExportDocument {
        let schema = self.schema();
        let classes = self
            .egraph
            .snapshot()
            .into_iter()
            .map(|class| ExportClass {
                id: class.id.index() as u32,
                sort: schema.sort_name(class.sort).to_owned(),
                nodes: class
                    .nodes
                    .iter()
                    .map(|node| ExportNode {
                        op: node.op_name(schema).to_owned(),
                        children: node.children().iter().map(|c| c.index() as u32).collect(),
                        literal: node.literal().map(Value::to_json),
                    })
                    .collect(),
            })
            .collect();
        let bindings = self
            .bindings
            .keys()
            .map(|name| (name.clone(), self.binding(name).unwrap().index() as u32))
            .collect();
        ExportDocument { classes, bindings }
    }

    /// Loads an exported document into this session, whose schema must
    /// already declare every sort and function the document uses and whose
    /// e-graph must be empty.
    pub fn import_json(&mut self, doc: &ExportDocument) -> Result<()> {
        if self.egraph.id_count() > 0 || !self.bindings.is_empty() {
            return Err(Error::Import("session is not empty".into()));
        }
        let schema = self.schema().clone();
        let mut classes = Vec::with_capacity(doc.classes.len());
        for class in &doc.classes {
            let sort = schema
                .sort_id(&class.sort)
                .ok_or_else(|| Error::Import(format!("unknown sort `{}`", class.sort)))?;
            let mut nodes = Vec::with_capacity(class.nodes.len());
            for node in &class.nodes {
                let children = node
                    .children
                    .iter()
                    .map(|&c| EClassId::from_index(c as usize))
                    .collect();
                nodes.push(match &node.literal {
                    Some(json) => {
                        let value = schema
                            .sort_id(&node.op)
                            .and_then(|s| Value::from_json(s, json))
                            .ok_or_else(|| {
                                Error::Import(format!("bad literal {json} for `{}`", node.op))
                            })?;
                        ENode::Literal(value)
                    }
                    None => {
                        let func = schema.function_id(&node.op).ok_or_else(|| {
                            Error::Import(format!("unknown function `{}`", node.op))
                        })?;
                        ENode::apply(func, children)
                    }
                });
            }
            classes.push(ClassSnapshot {
                id: EClassId::from_index(class.id as usize),
                sort,
                nodes,
            });
        }
        let egraph = EGraph::from_snapshot(schema, classes)?;
        for (name, &id) in &doc.bindings {
            let id = EClassId::from_index(id as usize);
            egraph
                .find(id)
                .map_err(|_| Error::Import(format!("binding `{name}` to missing class {id}")))?;
            self.bindings.insert(name.clone(), id);
        }
        self.egraph = egraph;
        Ok(())
    }
}

fn render_rule(query: &[FactSyntax], actions: &[ActionSyntax]) -> String {
    let facts: Vec<_> = query.iter().map(ToString::to_string).collect();
    let actions: Vec<_> = actions.iter().map(ToString::to_string).collect();
    format!("({}) => ({})", facts.join(" "), actions.join(" "))
}

/// Converts a ground expression into a term; identifiers are binding names.
fn ground_term(schema: &Schema, expr: &Expr) -> Result<Term, TypeError> {
    match expr {
        Expr::Lit(v, _) => Ok(Term::Literal(v.clone())),
        Expr::Ident(name, _) => Ok(Term::Ref(name.clone())),
        Expr::Call(head, args, _) => {
            schema.lookup_function(head)?;
            Ok(Term::Apply(
                head.clone(),
                args.iter()
                    .map(|a| ground_term(schema, a))
                    .collect::<Result<_, _>>()?,
            ))
        }
    }
}

/// Resolves pattern syntax, inferring the sorts of variables from the
/// positions they occur in.
struct Resolver<'a> {
    session: &'a Session,
    vars: BTreeMap<String, SortId>,
    allow_new: bool,
}

impl Resolver<'_> {
    fn schema(&self) -> &Schema {
        self.session.schema()
    }

    /// True if `e` is an identifier that would introduce a new variable.
    fn is_fresh(&self, e: &Expr) -> bool {
        matches!(e, Expr::Ident(name, _)
            if !self.vars.contains_key(name) && self.session.binding(name).is_none())
    }

    fn sort_of(&self, p: &Pattern) -> Result<SortId, TypeError> {
        p.infer_sort(self.schema(), &mut self.vars.clone())
    }

    /// Best-effort sort of an expression without resolving it.
    fn guess_sort(&self, e: &Expr) -> Option<SortId> {
        match e {
            Expr::Lit(v, _) => Some(v.sort()),
            Expr::Ident(name, _) => self
                .vars
                .get(name)
                .copied()
                .or_else(|| self.session.binding_sort(name)),
            Expr::Call(head, args, _) => {
                if let Some(f) = self.schema().function_id(head) {
                    return Some(self.schema().function(f).ret);
                }
                let op = PrimitiveOp::from_name(head)?;
                let sorts = args
                    .iter()
                    .map(|a| self.guess_sort(a))
                    .collect::<Option<Vec<_>>>()?;
                op.result_sort(&sorts).ok()
            }
        }
    }

    fn pattern(&mut self, e: &Expr, expected: Option<SortId>) -> Result<Pattern, TypeError> {
        match e {
            Expr::Lit(v, _) => Ok(Pattern::Literal(v.clone())),
            Expr::Ident(name, _) => {
                if let Some(&sort) = self.vars.get(name) {
                    return Ok(Pattern::var(name.clone(), sort));
                }
                if let Some(id) = self.session.binding(name) {
                    return Ok(Pattern::Class {
                        id,
                        sort: self.session.egraph.sort_of(id),
                    });
                }
                if !self.allow_new {
                    return Err(TypeError::UnboundVariable(name.clone()));
                }
                let sort = expected.ok_or_else(|| TypeError::CannotInferSort(name.clone()))?;
                self.vars.insert(name.clone(), sort);
                Ok(Pattern::var(name.clone(), sort))
            }
            Expr::Call(head, args, _) => {
                if let Some(func) = self.schema().function_id(head) {
                    let params = self.schema().function(func).params.clone();
                    let args = args
                        .iter()
                        .enumerate()
                        .map(|(i, a)| self.pattern(a, params.get(i).copied()))
                        .collect::<Result<_, _>>()?;
                    return Ok(Pattern::apply(func, args));
                }
                let op = PrimitiveOp::from_name(head)
                    .ok_or_else(|| TypeError::UnknownFunction(head.clone()))?;
                let hint = match op {
                    PrimitiveOp::Eq | PrimitiveOp::Ne => {
                        args.iter().find_map(|a| self.guess_sort(a))
                    }
                    _ => Some(SortId::I64),
                };
                let args = args
                    .iter()
                    .map(|a| self.pattern(a, hint))
                    .collect::<Result<_, _>>()?;
                Ok(Pattern::prim(op, args))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MATH: &str = "(datatype Math (Num i64) (Var String) (Add Math Math) (Mul Math Math))\n";

    fn session(text: &str) -> Session {
        let mut s = Session::new();
        s.eval_program(text).unwrap();
        s
    }

    fn eval_err(s: &mut Session, text: &str) -> Error {
        match s.eval_program(text).unwrap_err() {
            FrontendError::Eval { source, .. } => *source,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn let_counts_classes() {
        let s = session(&format!(
            "{MATH}(let expr1 (Mul (Num 2) (Add (Var \"x\") (Num 3))))"
        ));
        // literals 2, "x", 3 plus Num 2, Var x, Num 3, Add, Mul
        assert_eq!(s.egraph().class_count(), 8);
        assert_eq!(s.binding("expr1"), Some(EClassId::from_index(7)));
    }

    #[test]
    fn check_before_and_after_union() {
        let mut s = session(&format!("{MATH}(let a (Num 1)) (let b (Num 2))"));
        let out = s
            .eval_program("(check (= a b)) (check (= a a)) (check (= (Num 1) (Num 2)))")
            .unwrap();
        let passed: Vec<_> = out
            .iter()
            .map(|o| matches!(o, Output::Check { passed: true, .. }))
            .collect();
        assert_eq!(passed, vec![false, true, false]);
    }

    #[test]
    fn type_errors() {
        let mut s = session(MATH);
        assert!(matches!(
            eval_err(&mut s, "(let x (Add (Num 1) \"x\"))"),
            Error::Type(TypeError::SortMismatch { .. })
        ));
        assert!(matches!(
            eval_err(&mut s, "(rewrite (Mul (Num i) (Num j)) (* i j))"),
            Error::Type(TypeError::SortMismatch { .. })
        ));
        assert!(matches!(
            eval_err(&mut s, "(rewrite a (Add a a))"),
            Error::Type(TypeError::DegeneratePattern(_))
        ));
        assert!(matches!(
            eval_err(&mut s, "(rewrite (Add a b) (Add a c))"),
            Error::Type(TypeError::UnboundVariable(_))
        ));
        assert!(matches!(
            eval_err(&mut s, "(let y nope)"),
            Error::Type(TypeError::UnknownName(_))
        ));
        assert!(matches!(
            eval_err(&mut s, "(let y (Frob))"),
            Error::Type(TypeError::UnknownFunction(_))
        ));
        s.eval_program("(let y (Num 1))").unwrap();
        assert!(matches!(
            eval_err(&mut s, "(let y (Num 2))"),
            Error::Type(TypeError::DuplicateName(_))
        ));
        assert!(matches!(
            eval_err(&mut s, "(run 0)"),
            Error::InvalidRunLimit
        ));
    }

    #[test]
    fn general_rule_and_extract() {
        let mut s = session(&format!(
            "{MATH}
             (let e (Add (Num 2) (Num 3)))
             (rule ((= r (Add (Num a) (Num b))))
                   ((let s (+ a b)) (union r (Num s))))
             (run 5)"
        ));
        let out = s.eval_program("(extract e)").unwrap();
        assert_eq!(
            out[0],
            Output::Extracted {
                term: Term::apply("Num", vec![Term::lit(5)]),
                cost: 2
            }
        );
        let out = s.eval_program("(extract (Num 9))").unwrap();
        assert_eq!(out[0].to_string(), "(Num 9) ; cost 2");
    }

    #[test]
    fn overflow_is_runtime() {
        let mut s = session(&format!(
            "{MATH}
             (let e (Mul (Num 9223372036854775807) (Num 2)))
             (rewrite (Mul (Num a) (Num b)) (Num (* a b)))"
        ));
        let err = s.eval_program("(run 3)").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn function_costs_drive_extraction() {
        let mut s = session(&format!(
            "{MATH}
             (function Double (Math) Math :cost 5)
             (let e (Double (Num 3)))
             (let f (Add (Num 3) (Num 3)))
             (rule ((= r (Double x))) ((union r (Add x x))))
             (run 3)"
        ));
        let out = s.eval_program("(extract e)").unwrap();
        assert_eq!(out[0].to_string(), "(Add (Num 3) (Num 3)) ; cost 5");
    }

    #[test]
    fn json_export_shapes() {
        assert_eq!(
            Session::new().export_json().to_json(),
            r#"{"classes":[],"bindings":{}}"#
        );
        let s = session(&format!("{MATH}(let n (Num 1))"));
        assert_eq!(
            s.export_json().to_json(),
            concat!(
                r#"{"classes":[{"id":0,"sort":"i64","nodes":[{"op":"i64","children":[],"literal":1}]},"#,
                r#"{"id":1,"sort":"Math","nodes":[{"op":"Num","children":[0]}]}],"bindings":{"n":1}}"#
            )
        );
    }

    #[test]
    fn import_round_trip() {
        let text = format!(
            "{MATH}
             (let e (Add (Num 1) (Var \"v\")))
             (rewrite (Add a b) (Add b a))
             (run 4)"
        );
        let s = session(&text);
        let doc = s.export_json();
        let mut fresh = session(MATH);
        let json = doc.to_json();
        fresh
            .import_json(&serde_json::from_str(&json).unwrap())
            .unwrap();
        assert_eq!(fresh.export_json().to_json(), json);
        assert!(fresh.import_json(&doc).is_err());
    }
}
