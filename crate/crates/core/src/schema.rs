//! Sorts, function signatures and ground-term typing.

use std::collections::HashMap;
use std::fmt;

use crate::error::{MismatchSite, TypeError};
use crate::value::Value;

/// Index of a declared sort.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(u32);

impl SortId {
    pub const I64: SortId = SortId(0);
    pub const STRING: SortId = SortId(1);
    pub const BOOL: SortId = SortId(2);
    pub const UNIT: SortId = SortId(3);

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_primitive(self) -> bool {
        self.0 <= Self::UNIT.0
    }
}

/// Index of a declared function, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FuncId(u32);

impl FuncId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimitiveSort {
    I64,
    Str,
    Bool,
    Unit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SortKind {
    Primitive(PrimitiveSort),
    User,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    pub kind: SortKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<SortId>,
    pub ret: SortId,
    pub cost: u64,
    pub is_constructor: bool,
}

impl FunctionDecl {
    pub fn new(name: impl Into<String>, params: Vec<SortId>, ret: SortId) -> Self {
        FunctionDecl {
            name: name.into(),
            params,
            ret,
            cost: 1,
            is_constructor: false,
        }
    }

    pub fn with_cost(mut self, cost: u64) -> Self {
        self.cost = cost;
        self
    }
}

/// A ground expression. `Ref` names a binding resolved by the caller.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Literal(Value),
    Apply(String, Vec<Term>),
    Ref(String),
}

impl Term {
    pub fn apply(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::Apply(name.into(), args)
    }

    pub fn lit(value: impl Into<Value>) -> Term {
        Term::Literal(value.into())
    }

    /// Number of nodes, counting literals.
    pub fn size(&self) -> usize {
        match self {
            Term::Literal(_) | Term::Ref(_) => 1,
            Term::Apply(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Literal(_) | Term::Ref(_) => 1,
            Term::Apply(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Literal(v) => write!(f, "{v}"),
            Term::Ref(name) => f.write_str(name),
            Term::Apply(name, args) => {
                write!(f, "({name}")?;
                for arg in args {
                    write!(f, " {arg}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Separator between an owner and a method in qualified function names.
pub const QUALIFIER: char = '.';

/// Joins an owner and a method name into a single engine function name.
///
/// Neither part may contain the separator, so distinct `(owner, method)`
/// pairs never map to the same name.
pub fn qualify(owner: &str, method: &str) -> Result<String, TypeError> {
    for part in [owner, method] {
        if part.is_empty() || part.contains(QUALIFIER) {
            return Err(TypeError::InvalidIdentifier(part.to_owned()));
        }
    }
    Ok(format!("{owner}{QUALIFIER}{method}"))
}

#[derive(Clone, Debug)]
pub struct Schema {
    sorts: Vec<Sort>,
    sort_names: HashMap<String, SortId>,
    functions: Vec<FunctionDecl>,
    function_names: HashMap<String, FuncId>,
}

impl Default for Schema {
    fn default() -> Self {
        Self::new()
    }
}

impl Schema {
    /// A schema holding only the primitive sorts.
    pub fn new() -> Self {
        let mut schema = Schema {
            sorts: Vec::new(),
            sort_names: HashMap::new(),
            functions: Vec::new(),
            function_names: HashMap::new(),
        };
        for (name, prim) in [
            ("i64", PrimitiveSort::I64),
            ("String", PrimitiveSort::Str),
            ("bool", PrimitiveSort::Bool),
            ("Unit", PrimitiveSort::Unit),
        ] {
            schema.push_sort(name, SortKind::Primitive(prim));
        }
        schema
    }

    fn push_sort(&mut self, name: &str, kind: SortKind) -> SortId {
        let id = SortId(self.sorts.len() as u32);
        self.sorts.push(Sort {
            name: name.to_owned(),
            kind,
        });
        self.sort_names.insert(name.to_owned(), id);
        id
    }

    fn check_fresh_sort(&self, name: &str) -> Result<(), TypeError> {
        match self.sort_names.get(name) {
            Some(id) if id.is_primitive() => Err(TypeError::ReservedName(name.to_owned())),
            Some(_) => Err(TypeError::DuplicateSort(name.to_owned())),
            None => Ok(()),
        }
    }

    pub fn declare_sort(&mut self, name: &str) -> Result<SortId, TypeError> {
        self.check_fresh_sort(name)?;
        Ok(self.push_sort(name, SortKind::User))
    }

    /// Declares a sort together with its constructors. Parameter sorts are
    /// given by name and may refer to the sort being declared. Nothing is
    /// registered if any part of the declaration is invalid.
    pub fn declare_datatype<S: AsRef<str>>(
        &mut self,
        name: &str,
        constructors: &[(S, Vec<S>)],
    ) -> Result<(SortId, Vec<FuncId>), TypeError> {
        self.check_fresh_sort(name)?;
        let mut seen = Vec::new();
        for (ctor, params) in constructors {
            let ctor = ctor.as_ref();
            if self.function_names.contains_key(ctor) || seen.contains(&ctor) {
                return Err(TypeError::DuplicateFunction(ctor.to_owned()));
            }
            seen.push(ctor);
            for param in params {
                let param = param.as_ref();
                if param != name && !self.sort_names.contains_key(param) {
                    return Err(TypeError::UnknownSort(param.to_owned()));
                }
            }
        }
        let sort = self.push_sort(name, SortKind::User);
        let mut funcs = Vec::with_capacity(constructors.len());
        for (ctor, params) in constructors {
            let params = params.iter().map(|p| self.sort_names[p.as_ref()]).collect();
            let decl = FunctionDecl {
                name: ctor.as_ref().to_owned(),
                params,
                ret: sort,
                cost: 1,
                is_constructor: true,
            };
            funcs.push(self.push_function(decl));
        }
        Ok((sort, funcs))
    }

    pub fn declare_function(&mut self, decl: FunctionDecl) -> Result<FuncId, TypeError> {
        if self.function_names.contains_key(&decl.name) {
            return Err(TypeError::DuplicateFunction(decl.name));
        }
        if decl.cost == 0 {
            return Err(TypeError::InvalidCost(decl.name));
        }
        for sort in decl.params.iter().chain([&decl.ret]) {
            if sort.index() >= self.sorts.len() {
                return Err(TypeError::UnknownSort(format!("#{}", sort.index())));
            }
        }
        Ok(self.push_function(decl))
    }

    fn push_function(&mut self, decl: FunctionDecl) -> FuncId {
        let id = FuncId(self.functions.len() as u32);
        self.function_names.insert(decl.name.clone(), id);
        self.functions.push(decl);
        id
    }

    pub fn sort(&self, id: SortId) -> &Sort {
        &self.sorts[id.index()]
    }

    pub fn sort_name(&self, id: SortId) -> &str {
        &self.sorts[id.index()].name
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sort_names.get(name).copied()
    }

    pub fn lookup_sort(&self, name: &str) -> Result<SortId, TypeError> {
        self.sort_id(name)
            .ok_or_else(|| TypeError::UnknownSort(name.to_owned()))
    }

    pub fn sorts(&self) -> impl Iterator<Item = (SortId, &Sort)> {
        self.sorts
            .iter()
            .enumerate()
            .map(|(i, s)| (SortId(i as u32), s))
    }

    pub fn function(&self, id: FuncId) -> &FunctionDecl {
        &self.functions[id.index()]
    }

    pub fn try_function(&self, id: FuncId) -> Option<&FunctionDecl> {
        self.functions.get(id.index())
    }

    pub fn function_id(&self, name: &str) -> Option<FuncId> {
        self.function_names.get(name).copied()
    }

    pub fn lookup_function(&self, name: &str) -> Result<FuncId, TypeError> {
        self.function_id(name)
            .ok_or_else(|| TypeError::UnknownFunction(name.to_owned()))
    }

    pub fn functions(&self) -> impl Iterator<Item = (FuncId, &FunctionDecl)> {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, f)| (FuncId(i as u32), f))
    }

    pub(crate) fn mismatch(
        &self,
        expected: SortId,
        found: SortId,
        site: MismatchSite,
    ) -> TypeError {
        TypeError::SortMismatch {
            expected: self.sort_name(expected).to_owned(),
            found: self.sort_name(found).to_owned(),
            site,
        }
    }

    /// Returns the sort of `term`, resolving `Ref`s through `env`.
    pub fn typecheck_term(
        &self,
        term: &Term,
        env: &dyn Fn(&str) -> Option<SortId>,
    ) -> Result<SortId, TypeError> {
        match term {
            Term::Literal(v) => Ok(v.sort()),
            Term::Ref(name) => env(name).ok_or_else(|| TypeError::UnknownName(name.clone())),
            Term::Apply(name, args) => {
                let decl = self.function(self.lookup_function(name)?);
                if decl.params.len() != args.len() {
                    return Err(TypeError::ArityMismatch {
                        name: name.clone(),
                        expected: decl.params.len(),
                        found: args.len(),
                    });
                }
                for (index, (arg, &expected)) in args.iter().zip(&decl.params).enumerate() {
                    let found = self.typecheck_term(arg, env)?;
                    if found != expected {
                        return Err(self.mismatch(
                            expected,
                            found,
                            MismatchSite::Argument {
                                function: name.clone(),
                                index,
                            },
                        ));
                    }
                }
                Ok(decl.ret)
            }
        }
    }
}
