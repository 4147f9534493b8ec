//! The e-graph: hashconsed e-nodes grouped into e-classes, with deferred
//! congruence-closure rebuilding.

use std::collections::HashMap;
use std::fmt;
use std::mem;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, MismatchSite, Result, TypeError};
use crate::schema::{FuncId, Schema, SortId, Term};
use crate::unionfind::UnionFind;
use crate::value::Value;

/// Identifier of an e-class. Allocated densely from 0 and never reused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EClassId(u32);

impl EClassId {
    pub fn from_index(index: usize) -> Self {
        EClassId(u32::try_from(index).expect("e-class id overflow"))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A function symbol applied to child e-classes, or a primitive literal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ENode {
    Literal(Value),
    Apply {
        func: FuncId,
        children: Vec<EClassId>,
    },
}

impl ENode {
    pub fn apply(func: FuncId, children: Vec<EClassId>) -> Self {
        ENode::Apply { func, children }
    }

    pub fn children(&self) -> &[EClassId] {
        match self {
            ENode::Literal(_) => &[],
            ENode::Apply { children, .. } => children,
        }
    }

    pub fn literal(&self) -> Option<&Value> {
        match self {
            ENode::Literal(v) => Some(v),
            ENode::Apply { .. } => None,
        }
    }

    fn map_children(mut self, mut f: impl FnMut(EClassId) -> EClassId) -> Self {
        if let ENode::Apply { children, .. } = &mut self {
            for child in children {
                *child = f(*child);
            }
        }
        self
    }

    /// Name of the operator: the function name, or the sort name for literals.
    pub fn op_name<'a>(&self, schema: &'a Schema) -> &'a str {
        match self {
            ENode::Literal(v) => schema.sort_name(v.sort()),
            ENode::Apply { func, .. } => &schema.function(*func).name,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EClass {
    id: EClassId,
    sort: SortId,
    nodes: Vec<ENode>,
    parents: Vec<(ENode, EClassId)>,
}

impl EClass {
    pub fn id(&self) -> EClassId {
        self.id
    }

    pub fn sort(&self) -> SortId {
        self.sort
    }

    /// Member nodes in insertion order. Canonical after a rebuild.
    pub fn nodes(&self) -> &[ENode] {
        &self.nodes
    }

    /// The first literal carried by this class, if any.
    pub fn literal(&self) -> Option<&Value> {
        self.nodes.iter().find_map(ENode::literal)
    }
}

/// A class as written to or read from an external document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassSnapshot {
    pub id: EClassId,
    pub sort: SortId,
    pub nodes: Vec<ENode>,
}

#[derive(Clone, Debug)]
pub struct EGraph {
    schema: Schema,
    unionfind: UnionFind,
    classes: Vec<Option<EClass>>,
    memo: HashMap<ENode, EClassId>,
    pending: Vec<EClassId>,
    nodes_created: usize,
    merges: usize,
}

impl Default for EGraph {
    fn default() -> Self {
        Self::new(Schema::new())
    }
}

impl EGraph {
    pub fn new(schema: Schema) -> Self {
        EGraph {
            schema,
            unionfind: UnionFind::default(),
            classes: Vec::new(),
            memo: HashMap::new(),
            pending: Vec::new(),
            nodes_created: 0,
            merges: 0,
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    /// Schema changes only add sorts and functions, so existing classes stay
    /// well-typed.
    pub fn schema_mut(&mut self) -> &mut Schema {
        &mut self.schema
    }

    /// Total ids ever allocated, including merged ones.
    pub fn id_count(&self) -> usize {
        self.unionfind.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.iter().flatten().count()
    }

    pub fn node_count(&self) -> usize {
        self.classes.iter().flatten().map(|c| c.nodes.len()).sum()
    }

    /// Number of e-nodes ever created (monotone counter).
    pub fn nodes_created(&self) -> usize {
        self.nodes_created
    }

    /// Number of union-find merges ever performed (monotone counter).
    pub fn merge_count(&self) -> usize {
        self.merges
    }

    pub fn is_clean(&self) -> bool {
        self.pending.is_empty()
    }

    /// Canonical classes in id order.
    pub fn classes(&self) -> impl Iterator<Item = &EClass> {
        self.classes.iter().flatten()
    }

    /// The class with canonical id `id`. Non-canonical ids are resolved.
    pub fn class(&self, id: EClassId) -> &EClass {
        self.classes[self.canonical(id).index()]
            .as_ref()
            .expect("canonical id without a class")
    }

    pub fn sort_of(&self, id: EClassId) -> SortId {
        self.class(id).sort
    }

    fn check_id(&self, id: EClassId) -> Result<()> {
        if self.unionfind.contains(id) && self.classes[self.unionfind.find(id).index()].is_some() {
            Ok(())
        } else {
            Err(Error::InvalidId(id))
        }
    }

    pub fn find(&self, id: EClassId) -> Result<EClassId> {
        self.check_id(id)?;
        Ok(self.unionfind.find(id))
    }

    pub(crate) fn canonical(&self, id: EClassId) -> EClassId {
        self.unionfind.find(id)
    }

    pub fn canonicalize(&self, node: ENode) -> ENode {
        node.map_children(|c| self.unionfind.find(c))
    }

    /// Canonical class of `node` if it is already represented.
    pub fn lookup(&self, node: &ENode) -> Option<EClassId> {
        let node = self.canonicalize(node.clone());
        self.memo.get(&node).map(|&id| self.canonical(id))
    }

    fn node_sort(&self, node: &ENode) -> Result<SortId> {
        match node {
            ENode::Literal(v) => Ok(v.sort()),
            ENode::Apply { func, children } => {
                let decl = self
                    .schema
                    .try_function(*func)
                    .ok_or_else(|| TypeError::UnknownFunction(format!("#{}", func.index())))?;
                if decl.params.len() != children.len() {
                    return Err(TypeError::ArityMismatch {
                        name: decl.name.clone(),
                        expected: decl.params.len(),
                        found: children.len(),
                    }
                    .into());
                }
                for (index, (&child, &expected)) in children.iter().zip(&decl.params).enumerate() {
                    self.check_id(child)?;
                    let found = self.sort_of(child);
                    if found != expected {
                        return Err(self
                            .schema
                            .mismatch(
                                expected,
                                found,
                                MismatchSite::Argument {
                                    function: decl.name.clone(),
                                    index,
                                },
                            )
                            .into());
                    }
                }
                Ok(decl.ret)
            }
        }
    }

    /// Adds `node`, returning the canonical id of the class containing it.
    pub fn add_node(&mut self, node: ENode) -> Result<EClassId> {
        let sort = self.node_sort(&node)?;
        Ok(self.add_checked(node, sort))
    }

    /// Adds a node whose sort has already been established.
    pub(crate) fn add_checked(&mut self, node: ENode, sort: SortId) -> EClassId {
        let node = self.canonicalize(node);
        if let Some(&id) = self.memo.get(&node) {
            return self.unionfind.find_mut(id);
        }
        let id = self.unionfind.make_set();
        debug_assert_eq!(id.index(), self.classes.len());
        for &child in node.children() {
            let child = self.canonical(child);
            self.classes[child.index()]
                .as_mut()
                .unwrap()
                .parents
                .push((node.clone(), id));
        }
        self.classes.push(Some(EClass {
            id,
            sort,
            nodes: vec![node.clone()],
            parents: Vec::new(),
        }));
        self.memo.insert(node, id);
        self.nodes_created += 1;
        id
    }

    /// Adds an application of `func` to classes already known to fit its signature.
    pub(crate) fn add_apply(&mut self, func: FuncId, children: Vec<EClassId>) -> EClassId {
        let ret = self.schema.function(func).ret;
        self.add_checked(ENode::apply(func, children), ret)
    }

    pub(crate) fn add_literal(&mut self, value: Value) -> EClassId {
        let sort = value.sort();
        self.add_checked(ENode::Literal(value), sort)
    }

    /// Adds a ground term, resolving `Ref`s through `lookup`.
    pub fn add_term_with(
        &mut self,
        term: &Term,
        lookup: &dyn Fn(&str) -> Option<EClassId>,
    ) -> Result<EClassId> {
        match term {
            Term::Literal(v) => Ok(self.add_literal(v.clone())),
            Term::Ref(name) => {
                let id = lookup(name).ok_or_else(|| TypeError::UnknownName(name.clone()))?;
                self.find(id)
            }
            Term::Apply(name, args) => {
                let func = self.schema.lookup_function(name)?;
                let children = args
                    .iter()
                    .map(|arg| self.add_term_with(arg, lookup))
                    .collect::<Result<Vec<_>>>()?;
                self.add_node(ENode::apply(func, children))
            }
        }
    }

    pub fn add_term(&mut self, term: &Term) -> Result<EClassId> {
        self.add_term_with(term, &|_| None)
    }

    /// Merges the classes of `a` and `b`. Congruence is restored by [`EGraph::rebuild`].
    pub fn union(&mut self, a: EClassId, b: EClassId) -> Result<EClassId> {
        self.check_id(a)?;
        self.check_id(b)?;
        let (sa, sb) = (self.sort_of(a), self.sort_of(b));
        if sa != sb {
            return Err(self.schema.mismatch(sa, sb, MismatchSite::Union).into());
        }
        Ok(self.union_unchecked(a, b))
    }

    pub(crate) fn union_unchecked(&mut self, a: EClassId, b: EClassId) -> EClassId {
        let (root, merged) = self.unionfind.union(a, b);
        if let Some(child) = merged {
            let child = self.classes[child.index()].take().unwrap();
            let root_class = self.classes[root.index()].as_mut().unwrap();
            debug_assert_eq!(root_class.sort, child.sort);
            root_class.nodes.extend(child.nodes);
            root_class.parents.extend(child.parents);
            self.pending.push(root);
            self.merges += 1;
        }
        root
    }

    /// Restores the congruence invariant and returns the number of merges it
    /// performed.
    pub fn rebuild(&mut self) -> usize {
        let before = self.merges;
        while !self.pending.is_empty() {
            let todo: IndexSet<EClassId> = mem::take(&mut self.pending)
                .into_iter()
                .map(|id| self.unionfind.find_mut(id))
                .collect();
            for id in todo {
                self.repair(id);
            }
        }
        self.normalize();
        self.merges - before
    }

    fn repair(&mut self, id: EClassId) {
        let id = self.unionfind.find_mut(id);
        let parents = mem::take(&mut self.classes[id.index()].as_mut().unwrap().parents);
        for (node, class) in &parents {
            self.memo.remove(node);
            let node = self.canonicalize(node.clone());
            let class = self.canonical(*class);
            self.memo.insert(node, class);
        }
        let mut deduped: IndexMap<ENode, EClassId> = IndexMap::with_capacity(parents.len());
        for (node, class) in parents {
            let node = self.canonicalize(node);
            let class = self.canonical(class);
            if let Some(other) = deduped.insert(node, class) {
                self.union_unchecked(other, class);
            }
        }
        let id = self.unionfind.find_mut(id);
        let class = self.classes[id.index()].as_mut().unwrap();
        class.parents.extend(deduped);
    }

    /// Canonicalizes and deduplicates class members and refreshes the memo.
    fn normalize(&mut self) {
        self.memo.clear();
        for index in 0..self.classes.len() {
            let Some(class) = self.classes[index].as_mut() else {
                continue;
            };
            let nodes = mem::take(&mut class.nodes);
            let canonical: IndexSet<ENode> = nodes
                .into_iter()
                .map(|n| n.map_children(|c| self.unionfind.find(c)))
                .collect();
            class.nodes = canonical.into_iter().collect();
            for node in &class.nodes {
                let previous = self.memo.insert(node.clone(), class.id);
                debug_assert!(
                    previous.is_none() || previous == Some(class.id),
                    "congruence violated after rebuild"
                );
            }
        }
    }

    /// Canonical classes with their canonical, deduplicated member nodes.
    pub fn snapshot(&self) -> Vec<ClassSnapshot> {
        self.classes()
            .map(|class| {
                let nodes: IndexSet<ENode> = class
                    .nodes
                    .iter()
                    .map(|n| self.canonicalize(n.clone()))
                    .collect();
                ClassSnapshot {
                    id: class.id,
                    sort: class.sort,
                    nodes: nodes.into_iter().collect(),
                }
            })
            .collect()
    }

    /// Reconstructs an e-graph from canonical classes, preserving ids.
    /// Ids absent from `classes` are allocated as unreachable placeholders.
    pub fn from_snapshot(schema: Schema, classes: Vec<ClassSnapshot>) -> Result<EGraph> {
        let mut egraph = EGraph::new(schema);
        let Some(max) = classes.iter().map(|c| c.id.index()).max() else {
            return Ok(egraph);
        };
        for _ in 0..=max {
            egraph.unionfind.make_set();
            egraph.classes.push(None);
        }
        for class in &classes {
            let slot = &mut egraph.classes[class.id.index()];
            if slot.is_some() {
                return Err(Error::Import(format!("duplicate class {}", class.id)));
            }
            if class.nodes.is_empty() {
                return Err(Error::Import(format!("class {} has no nodes", class.id)));
            }
            *slot = Some(EClass {
                id: class.id,
                sort: class.sort,
                nodes: Vec::new(),
                parents: Vec::new(),
            });
        }
        for class in classes {
            for node in class.nodes {
                let sort = egraph.node_sort(&node)?;
                if sort != class.sort {
                    return Err(Error::Import(format!(
                        "node of sort {} in class {} of sort {}",
                        egraph.schema.sort_name(sort),
                        class.id,
                        egraph.schema.sort_name(class.sort)
                    )));
                }
                if let Some(other) = egraph.memo.insert(node.clone(), class.id) {
                    return Err(Error::Import(format!(
                        "node shared by classes {other} and {}",
                        class.id
                    )));
                }
                for &child in node.children() {
                    egraph.classes[child.index()]
                        .as_mut()
                        .unwrap()
                        .parents
                        .push((node.clone(), class.id));
                }
                egraph.classes[class.id.index()]
                    .as_mut()
                    .unwrap()
                    .nodes
                    .push(node);
                egraph.nodes_created += 1;
            }
        }
        Ok(egraph)
    }
}
