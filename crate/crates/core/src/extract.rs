//! Minimum-cost term extraction.

use std::collections::HashMap;
use std::rc::Rc;

use crate::egraph::{EClassId, EGraph, ENode};
use crate::error::{Error, Result, TypeError};
use crate::schema::{FuncId, Schema, Term};
use crate::value::Value;

/// Per-function node costs. Functions without an override use the cost
/// declared in the schema; literal nodes cost 1.
#[derive(Clone, Debug, Default)]
pub struct CostModel {
    overrides: HashMap<String, u64>,
}

impl CostModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Overrides the cost of `function`. Costs must be at least 1.
    pub fn with_cost(mut self, function: impl Into<String>, cost: u64) -> Result<Self, TypeError> {
        let function = function.into();
        if cost == 0 {
            return Err(TypeError::InvalidCost(function));
        }
        self.overrides.insert(function, cost);
        Ok(self)
    }

    pub fn function_cost(&self, schema: &Schema, func: FuncId) -> u64 {
        let decl = schema.function(func);
        self.overrides.get(&decl.name).copied().unwrap_or(decl.cost)
    }

    pub fn node_cost(&self, schema: &Schema, node: &ENode) -> u64 {
        match node {
            ENode::Literal(_) => 1,
            ENode::Apply { func, .. } => self.function_cost(schema, *func),
        }
    }

    /// Cost of a term: the sum of its node costs.
    pub fn term_cost(&self, schema: &Schema, term: &Term) -> Result<u64, TypeError> {
        match term {
            Term::Literal(_) => Ok(1),
            Term::Ref(name) => Err(TypeError::UnknownName(name.clone())),
            Term::Apply(name, args) => {
                let func = schema.lookup_function(name)?;
                args.iter()
                    .try_fold(self.function_cost(schema, func), |acc, a| {
                        Ok(acc.saturating_add(self.term_cost(schema, a)?))
                    })
            }
        }
    }
}

/// Chosen term in a form whose derived order implements the tie-break:
/// literals before applications, then lower declaration index, then children.
#[derive(Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Choice {
    Literal(Value),
    Apply(FuncId, Vec<Rc<Choice>>),
}

impl Choice {
    fn to_term(&self, schema: &Schema) -> Term {
        match self {
            Choice::Literal(v) => Term::Literal(v.clone()),
            Choice::Apply(f, args) => Term::Apply(
                schema.function(*f).name.clone(),
                args.iter().map(|a| a.to_term(schema)).collect(),
            ),
        }
    }
}

pub struct Extractor<'a> {
    egraph: &'a EGraph,
    model: &'a CostModel,
    costs: Vec<Option<u64>>,
    chosen: HashMap<EClassId, Rc<Choice>>,
}

impl<'a> Extractor<'a> {
    /// Computes the best cost of every class by iterating to a fixpoint.
    pub fn new(egraph: &'a EGraph, model: &'a CostModel) -> Self {
        let mut costs: Vec<Option<u64>> = vec![None; egraph.id_count()];
        loop {
            let mut changed = false;
            for class in egraph.classes() {
                for node in class.nodes() {
                    let Some(cost) = Self::candidate_cost(egraph, model, &costs, node) else {
                        continue;
                    };
                    let slot = &mut costs[class.id().index()];
                    if slot.is_none_or(|c| cost < c) {
                        *slot = Some(cost);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Extractor {
            egraph,
            model,
            costs,
            chosen: HashMap::new(),
        }
    }

    fn candidate_cost(
        egraph: &EGraph,
        model: &CostModel,
        costs: &[Option<u64>],
        node: &ENode,
    ) -> Option<u64> {
        node.children()
            .iter()
            .try_fold(model.node_cost(egraph.schema(), node), |acc, &child| {
                Some(acc.saturating_add(costs[egraph.canonical(child).index()]?))
            })
    }

    pub fn cost(&self, id: EClassId) -> Option<u64> {
        self.costs[self.egraph.canonical(id).index()]
    }

    fn choose(&mut self, id: EClassId) -> Rc<Choice> {
        let id = self.egraph.canonical(id);
        if let Some(choice) = self.chosen.get(&id) {
            return choice.clone();
        }
        let best = self.costs[id.index()].expect("class has a finite cost");
        let mut winner: Option<Rc<Choice>> = None;
        for node in self.egraph.class(id).nodes() {
            if Self::candidate_cost(self.egraph, self.model, &self.costs, node) != Some(best) {
                continue;
            }
            // every child of a minimal node is strictly cheaper than `best`,
            // so this recursion terminates
            let candidate = Rc::new(match node {
                ENode::Literal(v) => Choice::Literal(v.clone()),
                ENode::Apply { func, children } => {
                    Choice::Apply(*func, children.iter().map(|&c| self.choose(c)).collect())
                }
            });
            if winner.as_ref().is_none_or(|w| candidate < *w) {
                winner = Some(candidate);
            }
        }
        let winner = winner.expect("a node attains the class cost");
        self.chosen.insert(id, winner.clone());
        winner
    }

    /// The cheapest term represented by `id` and its cost.
    pub fn find_best(&mut self, id: EClassId) -> Result<(Term, u64)> {
        let root = self.egraph.find(id)?;
        let cost = self.cost(root).ok_or(Error::NoFiniteTerm(root))?;
        let choice = self.choose(root);
        Ok((choice.to_term(self.egraph.schema()), cost))
    }
}

/// Extracts a minimum-cost term from `root`'s class.
pub fn extract(egraph: &EGraph, root: EClassId, model: &CostModel) -> Result<(Term, u64)> {
    Extractor::new(egraph, model).find_best(root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::FunctionDecl;

    fn graph() -> EGraph {
        let mut schema = Schema::new();
        schema
            .declare_datatype(
                "Math",
                &[("Num", vec!["i64"]), ("Add", vec!["Math", "Math"])],
            )
            .unwrap();
        let math = schema.sort_id("Math").unwrap();
        schema
            .declare_function(FunctionDecl::new("f", vec![math], math))
            .unwrap();
        EGraph::new(schema)
    }

    fn num(n: i64) -> Term {
        Term::apply("Num", vec![Term::lit(n)])
    }

    #[test]
    fn single_candidate() {
        let mut eg = graph();
        let six = eg.add_term(&num(6)).unwrap();
        let (term, cost) = extract(&eg, six, &CostModel::new()).unwrap();
        assert_eq!(term, num(6));
        assert_eq!(cost, 2);
    }

    #[test]
    fn picks_cheaper_member() {
        let mut eg = graph();
        let six = eg.add_term(&num(6)).unwrap();
        let sum = eg
            .add_term(&Term::apply("Add", vec![num(4), num(2)]))
            .unwrap();
        eg.union(six, sum).unwrap();
        eg.rebuild();
        let (term, cost) = extract(&eg, sum, &CostModel::new()).unwrap();
        assert_eq!(term, num(6));
        assert_eq!(cost, 2);
        // Num 6 now costs 11, Add(Num 4, Num 2) costs 23
        let model = CostModel::new().with_cost("Num", 10).unwrap();
        assert_eq!(extract(&eg, sum, &model).unwrap(), (num(6), 11));
    }

    #[test]
    fn avoids_cycles() {
        let mut eg = graph();
        let one = eg.add_term(&num(1)).unwrap();
        let f = eg.schema().function_id("f").unwrap();
        let f1 = eg.add_node(ENode::apply(f, vec![one])).unwrap();
        eg.union(one, f1).unwrap();
        eg.rebuild();
        assert_eq!(extract(&eg, f1, &CostModel::new()).unwrap(), (num(1), 2));
    }

    #[test]
    fn tie_break_prefers_earlier_declaration() {
        let mut eg = graph();
        let a = eg.add_term(&Term::apply("f", vec![num(4)])).unwrap();
        let b = eg
            .add_term(&Term::apply("Num", vec![Term::lit(5)]))
            .unwrap();
        let c = eg.add_term(&Term::apply("f", vec![num(3)])).unwrap();
        eg.union(a, c).unwrap();
        eg.rebuild();
        // f(Num 3) and f(Num 4) tie at cost 3; Num 3 < Num 4 by literal
        assert_eq!(
            extract(&eg, a, &CostModel::new()).unwrap(),
            (Term::apply("f", vec![num(3)]), 3)
        );
        eg.union(a, b).unwrap();
        eg.rebuild();
        assert_eq!(extract(&eg, a, &CostModel::new()).unwrap(), (num(5), 2));
    }

    #[test]
    fn no_finite_term() {
        let mut schema = Schema::new();
        let s = schema.declare_sort("S").unwrap();
        schema
            .declare_function(FunctionDecl::new("c", vec![], s))
            .unwrap();
        schema
            .declare_function(FunctionDecl::new("g", vec![s], s))
            .unwrap();
        let mut eg = EGraph::new(schema);
        let c = eg.add_term(&Term::apply("c", vec![])).unwrap();
        assert_eq!(extract(&eg, c, &CostModel::new()).unwrap().1, 1);
        // a class whose only node refers to itself can only be built by import
        let g = eg.schema().function_id("g").unwrap();
        let id = EClassId::from_index(0);
        let cyclic = EGraph::from_snapshot(
            eg.schema().clone(),
            vec![crate::egraph::ClassSnapshot {
                id,
                sort: s,
                nodes: vec![ENode::apply(g, vec![id])],
            }],
        )
        .unwrap();
        assert_eq!(
            extract(&cyclic, id, &CostModel::new()),
            Err(Error::NoFiniteTerm(id))
        );
    }

    #[test]
    fn zero_cost_rejected() {
        assert!(CostModel::new().with_cost("Num", 0).is_err());
    }
}
