//! Patterns, e-matching and rules.
//!
//! Matching is top-down backtracking over canonical e-nodes. A query is a
//! list of facts evaluated left to right; each fact extends the set of
//! substitutions produced by the facts before it. Rules are applied with
//! snapshot semantics: every match is collected before any action runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::egraph::{EClassId, EGraph, ENode};
use crate::error::{Error, MismatchSite, PrimitiveError, Result, TypeError};
use crate::schema::{FuncId, Schema, SortId};
use crate::value::{PrimitiveOp, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PatternVar {
    pub name: String,
    pub sort: SortId,
}

impl PatternVar {
    pub fn new(name: impl Into<String>, sort: SortId) -> Self {
        PatternVar {
            name: name.into(),
            sort,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Var(PatternVar),
    Literal(Value),
    Apply {
        func: FuncId,
        args: Vec<Pattern>,
    },
    PrimCall {
        op: PrimitiveOp,
        args: Vec<Pattern>,
    },
    /// A fixed, already-existing e-class (a bound name).
    Class {
        id: EClassId,
        sort: SortId,
    },
}

impl Pattern {
    pub fn var(name: impl Into<String>, sort: SortId) -> Pattern {
        Pattern::Var(PatternVar::new(name, sort))
    }

    pub fn lit(value: impl Into<Value>) -> Pattern {
        Pattern::Literal(value.into())
    }

    pub fn apply(func: FuncId, args: Vec<Pattern>) -> Pattern {
        Pattern::Apply { func, args }
    }

    /// Builds an application by function name.
    pub fn call(schema: &Schema, name: &str, args: Vec<Pattern>) -> Result<Pattern, TypeError> {
        Ok(Pattern::apply(schema.lookup_function(name)?, args))
    }

    pub fn prim(op: PrimitiveOp, args: Vec<Pattern>) -> Pattern {
        Pattern::PrimCall { op, args }
    }

    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Pattern::Var(v) => {
                out.insert(&v.name);
            }
            Pattern::Apply { args, .. } | Pattern::PrimCall { args, .. } => {
                args.iter().for_each(|a| a.collect_vars(out))
            }
            Pattern::Literal(_) | Pattern::Class { .. } => {}
        }
    }

    fn contains_prim(&self) -> Option<PrimitiveOp> {
        match self {
            Pattern::PrimCall { op, .. } => Some(*op),
            Pattern::Apply { args, .. } => args.iter().find_map(Pattern::contains_prim),
            _ => None,
        }
    }

    /// Infers the sort of the pattern, recording variable sorts in `vars`
    /// and rejecting inconsistent ones.
    pub fn infer_sort(
        &self,
        schema: &Schema,
        vars: &mut BTreeMap<String, SortId>,
    ) -> Result<SortId, TypeError> {
        match self {
            Pattern::Var(v) => match vars.get(&v.name) {
                Some(&sort) if sort != v.sort => {
                    Err(schema.mismatch(sort, v.sort, MismatchSite::Binding(v.name.clone())))
                }
                _ => {
                    vars.insert(v.name.clone(), v.sort);
                    Ok(v.sort)
                }
            },
            Pattern::Literal(v) => Ok(v.sort()),
            Pattern::Class { sort, .. } => Ok(*sort),
            Pattern::Apply { func, args } => {
                let decl = schema
                    .try_function(*func)
                    .ok_or_else(|| TypeError::UnknownFunction(format!("#{}", func.index())))?;
                if decl.params.len() != args.len() {
                    return Err(TypeError::ArityMismatch {
                        name: decl.name.clone(),
                        expected: decl.params.len(),
                        found: args.len(),
                    });
                }
                for (index, (arg, &expected)) in args.iter().zip(&decl.params).enumerate() {
                    let found = arg.infer_sort(schema, vars)?;
                    if found != expected {
                        return Err(schema.mismatch(
                            expected,
                            found,
                            MismatchSite::Argument {
                                function: decl.name.clone(),
                                index,
                            },
                        ));
                    }
                }
                Ok(decl.ret)
            }
            Pattern::PrimCall { op, args } => {
                let sorts = args
                    .iter()
                    .map(|a| a.infer_sort(schema, vars))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(op.result_sort(&sorts)?)
            }
        }
    }

    pub fn display<'a>(&'a self, schema: &'a Schema) -> PatternDisplay<'a> {
        PatternDisplay {
            pattern: self,
            schema,
        }
    }
}

pub struct PatternDisplay<'a> {
    pattern: &'a Pattern,
    schema: &'a Schema,
}

impl fmt::Display for PatternDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, args): (&str, &[Pattern]) = match self.pattern {
            Pattern::Var(v) => return f.write_str(&v.name),
            Pattern::Literal(v) => return write!(f, "{v}"),
            Pattern::Class { id, .. } => return write!(f, "#{id}"),
            Pattern::Apply { func, args } => (&self.schema.function(*func).name, args),
            Pattern::PrimCall { op, args } => (op.name(), args),
        };
        write!(f, "({head}")?;
        for arg in args {
            write!(f, " {}", arg.display(self.schema))?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Fact {
    Eq(Pattern, Pattern),
    Exists(Pattern),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    Union(Pattern, Pattern),
    /// Binds a rule-local name to the instantiated pattern.
    Let(String, Pattern),
}

/// Variable bindings produced by matching. Ids are canonical at match time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Substitution(BTreeMap<String, EClassId>);

impl Substitution {
    pub fn get(&self, name: &str) -> Option<EClassId> {
        self.0.get(name).copied()
    }

    pub fn insert(&mut self, name: impl Into<String>, id: EClassId) {
        self.0.insert(name.into(), id);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, EClassId)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, EClassId)> for Substitution {
    fn from_iter<T: IntoIterator<Item = (String, EClassId)>>(iter: T) -> Self {
        Substitution(iter.into_iter().collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k} -> {v}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub query: Vec<Fact>,
    pub actions: Vec<Action>,
}

impl Rule {
    /// Validates a general rule against `schema`.
    ///
    /// Facts bind variables left to right. Primitive calls may only appear in
    /// equality facts, and only over variables bound by earlier facts.
    pub fn new(
        schema: &Schema,
        name: impl Into<String>,
        query: Vec<Fact>,
        actions: Vec<Action>,
    ) -> Result<Rule, TypeError> {
        let mut vars = BTreeMap::new();
        for fact in &query {
            match fact {
                Fact::Exists(p) => {
                    if let Some(op) = p.contains_prim() {
                        return Err(TypeError::PrimitiveInQuery(op.name().to_owned()));
                    }
                    if let Pattern::Var(v) = p {
                        return Err(TypeError::DegeneratePattern(v.name.clone()));
                    }
                    p.infer_sort(schema, &mut vars)?;
                }
                Fact::Eq(l, r) => {
                    let bound: BTreeSet<String> = vars.keys().cloned().collect();
                    for side in [l, r] {
                        if side.contains_prim().is_some() {
                            if let Some(v) = side.vars().into_iter().find(|v| !bound.contains(*v)) {
                                return Err(TypeError::UnboundVariable(v.to_owned()));
                            }
                        }
                    }
                    let ls = l.infer_sort(schema, &mut vars)?;
                    let rs = r.infer_sort(schema, &mut vars)?;
                    if ls != rs {
                        return Err(schema.mismatch(ls, rs, MismatchSite::Equality));
                    }
                }
            }
        }
        for action in &actions {
            match action {
                Action::Union(l, r) => {
                    let ls = check_action_pattern(schema, l, &vars)?;
                    let rs = check_action_pattern(schema, r, &vars)?;
                    if ls != rs {
                        return Err(schema.mismatch(ls, rs, MismatchSite::Union));
                    }
                }
                Action::Let(name, p) => {
                    let sort = check_action_pattern(schema, p, &vars)?;
                    if vars.contains_key(name) {
                        return Err(TypeError::DuplicateName(name.clone()));
                    }
                    vars.insert(name.clone(), sort);
                }
            }
        }
        Ok(Rule {
            name: name.into(),
            query,
            actions,
        })
    }
}

fn check_action_pattern(
    schema: &Schema,
    p: &Pattern,
    bound: &BTreeMap<String, SortId>,
) -> Result<SortId, TypeError> {
    if let Some(v) = p.vars().into_iter().find(|v| !bound.contains_key(*v)) {
        return Err(TypeError::UnboundVariable(v.to_owned()));
    }
    let mut vars = bound.clone();
    p.infer_sort(schema, &mut vars)
}

/// Builds the rule `lhs => rhs`: match `lhs`, union it with `rhs`.
pub fn make_rewrite(schema: &Schema, lhs: Pattern, rhs: Pattern) -> Result<Rule, TypeError> {
    if !matches!(lhs, Pattern::Apply { .. }) {
        return Err(TypeError::DegeneratePattern(
            lhs.display(schema).to_string(),
        ));
    }
    if let Some(op) = lhs.contains_prim() {
        return Err(TypeError::PrimitiveInQuery(op.name().to_owned()));
    }
    let mut vars = BTreeMap::new();
    let lhs_sort = lhs.infer_sort(schema, &mut vars)?;
    if let Some(v) = rhs.vars().into_iter().find(|v| !vars.contains_key(*v)) {
        return Err(TypeError::UnboundVariable(v.to_owned()));
    }
    let rhs_sort = rhs.infer_sort(schema, &mut vars)?;
    if lhs_sort != rhs_sort {
        return Err(schema.mismatch(lhs_sort, rhs_sort, MismatchSite::RewriteSides));
    }
    let name = format!("{} => {}", lhs.display(schema), rhs.display(schema));
    Ok(Rule {
        name,
        query: vec![Fact::Exists(lhs.clone())],
        actions: vec![Action::Union(lhs, rhs)],
    })
}

struct Matcher<'a> {
    egraph: &'a EGraph,
}

impl Matcher<'_> {
    /// The literal held by a class, if any.
    fn class_value(&self, id: EClassId) -> Option<Value> {
        self.egraph.class(id).literal().cloned()
    }

    /// Value of a pattern without touching the graph. `None` if some
    /// variable is unbound or names a class without a literal.
    fn value_of(&self, p: &Pattern, subst: &Substitution) -> Option<Value> {
        match p {
            Pattern::Literal(v) => Some(v.clone()),
            Pattern::Var(v) => self.class_value(subst.get(&v.name)?),
            Pattern::Class { id, .. } => self.class_value(*id),
            Pattern::PrimCall { op, args } => {
                let args = args
                    .iter()
                    .map(|a| self.value_of(a, subst))
                    .collect::<Option<Vec<_>>>()?;
                op.eval(&args).ok()
            }
            Pattern::Apply { .. } => None,
        }
    }

    fn match_in_class(
        &self,
        p: &Pattern,
        class: EClassId,
        subst: Substitution,
        out: &mut Vec<Substitution>,
    ) {
        let eg = self.egraph;
        match p {
            Pattern::Var(v) => match subst.get(&v.name) {
                Some(bound) => {
                    if eg.canonical(bound) == class {
                        out.push(subst);
                    }
                }
                None => {
                    if eg.sort_of(class) == v.sort {
                        let mut subst = subst;
                        subst.insert(v.name.clone(), class);
                        out.push(subst);
                    }
                }
            },
            Pattern::Class { id, .. } => {
                if eg.canonical(*id) == class {
                    out.push(subst);
                }
            }
            Pattern::Literal(v) => {
                if eg.lookup(&ENode::Literal(v.clone())) == Some(class) {
                    out.push(subst);
                }
            }
            Pattern::PrimCall { .. } => {
                if let Some(v) = self.value_of(p, &subst) {
                    if eg.lookup(&ENode::Literal(v)) == Some(class) {
                        out.push(subst);
                    }
                }
            }
            Pattern::Apply { func, args } => {
                for node in eg.class(class).nodes() {
                    let ENode::Apply { func: nf, children } = node else {
                        continue;
                    };
                    if nf != func || children.len() != args.len() {
                        continue;
                    }
                    let mut partial = vec![subst.clone()];
                    for (arg, &child) in args.iter().zip(children) {
                        let mut next = Vec::new();
                        for s in partial {
                            self.match_in_class(arg, eg.canonical(child), s, &mut next);
                        }
                        partial = next;
                        if partial.is_empty() {
                            break;
                        }
                    }
                    out.extend(partial);
                }
            }
        }
    }

    /// Matches `p` at every possible root, yielding `(root, substitution)`.
    fn match_anywhere(
        &self,
        p: &Pattern,
        subst: Substitution,
        out: &mut Vec<(EClassId, Substitution)>,
    ) {
        let eg = self.egraph;
        match p {
            Pattern::Var(v) => match subst.get(&v.name) {
                Some(id) => out.push((eg.canonical(id), subst)),
                None => {
                    for class in eg.classes().filter(|c| c.sort() == v.sort) {
                        let mut s = subst.clone();
                        s.insert(v.name.clone(), class.id());
                        out.push((class.id(), s));
                    }
                }
            },
            Pattern::Class { id, .. } => out.push((eg.canonical(*id), subst)),
            Pattern::Literal(_) | Pattern::PrimCall { .. } => {
                if let Some(id) = self
                    .value_of(p, &subst)
                    .and_then(|v| eg.lookup(&ENode::Literal(v)))
                {
                    out.push((id, subst));
                }
            }
            Pattern::Apply { func, .. } => {
                let sort = eg.schema().function(*func).ret;
                for class in eg.classes().filter(|c| c.sort() == sort) {
                    let mut found = Vec::new();
                    self.match_in_class(p, class.id(), subst.clone(), &mut found);
                    out.extend(found.into_iter().map(|s| (class.id(), s)));
                }
            }
        }
    }

    fn search(&self, query: &[Fact]) -> Vec<Substitution> {
        let mut substs = vec![Substitution::default()];
        for fact in query {
            let mut next = Vec::new();
            for subst in substs {
                match fact {
                    Fact::Exists(p) => {
                        let mut roots = Vec::new();
                        self.match_anywhere(p, subst, &mut roots);
                        next.extend(roots.into_iter().map(|(_, s)| s));
                    }
                    Fact::Eq(l, r) => {
                        // match the side that constrains more first
                        let (first, second) = match (l, r) {
                            (Pattern::Var(v), _) if subst.get(&v.name).is_none() => (r, l),
                            _ => (l, r),
                        };
                        let mut roots = Vec::new();
                        self.match_anywhere(first, subst, &mut roots);
                        for (root, s) in roots {
                            self.match_in_class(second, root, s, &mut next);
                        }
                    }
                }
            }
            next.sort();
            next.dedup();
            substs = next;
        }
        substs
    }
}

/// All `(root, substitution)` pairs under which `pattern` is represented in
/// `root`, ordered by root id and then substitution.
pub fn ematch(egraph: &EGraph, pattern: &Pattern) -> Vec<(EClassId, Substitution)> {
    let matcher = Matcher { egraph };
    let mut out = Vec::new();
    matcher.match_anywhere(pattern, Substitution::default(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// Substitutions satisfying every fact of `query`, sorted and deduplicated.
pub fn search(egraph: &EGraph, query: &[Fact]) -> Vec<Substitution> {
    Matcher { egraph }.search(query)
}

pub fn search_rule(egraph: &EGraph, rule: &Rule) -> Vec<Substitution> {
    search(egraph, &rule.query)
}

/// True iff `fact` holds under some substitution. Never mutates the graph.
pub fn check(egraph: &EGraph, fact: &Fact) -> bool {
    !search(egraph, std::slice::from_ref(fact)).is_empty()
}

/// Adds the instance of `p` under `subst`. Returns `Ok(None)` when a primitive
/// call cannot be evaluated because an argument class holds no literal.
fn instantiate(
    egraph: &mut EGraph,
    p: &Pattern,
    subst: &Substitution,
) -> Result<Option<EClassId>, PrimitiveError> {
    Ok(match p {
        Pattern::Var(v) => Some(egraph.canonical(subst.get(&v.name).expect("unbound variable"))),
        Pattern::Class { id, .. } => Some(egraph.canonical(*id)),
        Pattern::Literal(v) => Some(egraph.add_literal(v.clone())),
        Pattern::Apply { func, args } => {
            let mut children = Vec::with_capacity(args.len());
            for arg in args {
                match instantiate(egraph, arg, subst)? {
                    Some(id) => children.push(id),
                    None => return Ok(None),
                }
            }
            Some(egraph.add_apply(*func, children))
        }
        Pattern::PrimCall { op, args } => {
            let mut values = Vec::with_capacity(args.len());
            for arg in args {
                let value = match arg {
                    Pattern::Literal(v) => Some(v.clone()),
                    _ => match instantiate(egraph, arg, subst)? {
                        Some(id) => egraph.class(id).literal().cloned(),
                        None => None,
                    },
                };
                match value {
                    Some(v) => values.push(v),
                    None => return Ok(None),
                }
            }
            Some(egraph.add_literal(op.eval(&values)?))
        }
    })
}

fn run_actions(
    egraph: &mut EGraph,
    actions: &[Action],
    subst: &Substitution,
) -> Result<bool, PrimitiveError> {
    let mut subst = subst.clone();
    for action in actions {
        match action {
            Action::Union(l, r) => {
                let (Some(a), Some(b)) = (
                    instantiate(egraph, l, &subst)?,
                    instantiate(egraph, r, &subst)?,
                ) else {
                    return Ok(false);
                };
                egraph.union_unchecked(a, b);
            }
            Action::Let(name, p) => match instantiate(egraph, p, &subst)? {
                Some(id) => subst.insert(name.clone(), id),
                None => return Ok(false),
            },
        }
    }
    Ok(true)
}

/// Runs `rule`'s actions for each of `matches`, returning how many completed.
pub fn apply_matches(egraph: &mut EGraph, rule: &Rule, matches: &[Substitution]) -> Result<usize> {
    let mut applied = 0;
    for subst in matches {
        let done = run_actions(egraph, &rule.actions, subst).map_err(|source| Error::Action {
            rule: rule.name.clone(),
            substitution: subst.to_string(),
            source,
        })?;
        applied += usize::from(done);
    }
    Ok(applied)
}

/// Collects all matches of `rule`, then acts on them. Does not rebuild.
pub fn apply_rule(egraph: &mut EGraph, rule: &Rule) -> Result<usize> {
    let matches = search_rule(egraph, rule);
    apply_matches(egraph, rule, &matches)
}
