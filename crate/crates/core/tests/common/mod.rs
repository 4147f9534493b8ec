//! Random instance generators and naive reference implementations used to
//! cross-check the engine.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use eqsat::{EClassId, EGraph, ENode, FuncId, FunctionDecl, Pattern, Schema, SortId, Term, Value};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Sort `S` with constructors `L(i64)`, `F(S)`, `G(S, S)`.
pub struct Small {
    pub s: SortId,
    pub l: FuncId,
    pub f: FuncId,
    pub g: FuncId,
}

pub fn small_schema() -> (Schema, Small) {
    let mut schema = Schema::new();
    let (s, funcs) = schema
        .declare_datatype(
            "S",
            &[("L", vec!["i64"]), ("F", vec!["S"]), ("G", vec!["S", "S"])],
        )
        .unwrap();
    let small = Small {
        s,
        l: funcs[0],
        f: funcs[1],
        g: funcs[2],
    };
    (schema, small)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Shape {
    L(i64),
    F(usize),
    G(usize, usize),
}

/// One step of a random workload; indices refer to earlier `Add`s.
#[derive(Clone, Debug)]
pub enum Op {
    Add(Shape),
    Union(usize, usize),
}

pub fn random_ops(rng: &mut StdRng, max_ops: usize) -> Vec<Op> {
    let len = rng.gen_range(1..=max_ops);
    let mut ops = Vec::with_capacity(len);
    let mut terms = 0usize;
    for _ in 0..len {
        if terms >= 2 && rng.gen_bool(0.3) {
            ops.push(Op::Union(rng.gen_range(0..terms), rng.gen_range(0..terms)));
            continue;
        }
        let shape = match if terms == 0 { 0 } else { rng.gen_range(0..3) } {
            0 => Shape::L(rng.gen_range(0..3)),
            1 => Shape::F(rng.gen_range(0..terms)),
            _ => Shape::G(rng.gen_range(0..terms), rng.gen_range(0..terms)),
        };
        ops.push(Op::Add(shape));
        terms += 1;
    }
    ops
}

/// Replays `ops` on a fresh e-graph, returning it rebuilt together with the
/// class of every added term.
pub fn replay(ops: &[Op]) -> (EGraph, Vec<EClassId>) {
    let (schema, k) = small_schema();
    let mut eg = EGraph::new(schema);
    let mut ids = Vec::new();
    for op in ops {
        match op {
            Op::Add(shape) => {
                let node = match *shape {
                    Shape::L(n) => {
                        let lit = eg.add_node(ENode::Literal(Value::I64(n))).unwrap();
                        ENode::apply(k.l, vec![lit])
                    }
                    Shape::F(a) => ENode::apply(k.f, vec![ids[a]]),
                    Shape::G(a, b) => ENode::apply(k.g, vec![ids[a], ids[b]]),
                };
                ids.push(eg.add_node(node).unwrap());
            }
            &Op::Union(a, b) => {
                eg.union(ids[a], ids[b]).unwrap();
            }
        }
    }
    eg.rebuild();
    (eg, ids)
}

/// Naive congruence closure over the added terms. Returns, for every term,
/// the smallest term index in its equivalence block.
pub fn closure_oracle(ops: &[Op]) -> Vec<usize> {
    let mut terms = Vec::new();
    let mut unions = Vec::new();
    for op in ops {
        match op {
            Op::Add(shape) => terms.push(shape.clone()),
            Op::Union(a, b) => unions.push((*a, *b)),
        }
    }
    let n = terms.len();
    let mut block: Vec<usize> = (0..n).collect();
    let merge = |block: &mut Vec<usize>, a: usize, b: usize| {
        let (keep, drop) = (block[a].min(block[b]), block[a].max(block[b]));
        for x in block.iter_mut() {
            if *x == drop {
                *x = keep;
            }
        }
    };
    for (a, b) in unions {
        merge(&mut block, a, b);
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                if block[i] == block[j] {
                    continue;
                }
                let congruent = match (&terms[i], &terms[j]) {
                    (Shape::L(a), Shape::L(b)) => a == b,
                    (Shape::F(a), Shape::F(b)) => block[*a] == block[*b],
                    (Shape::G(a, b), Shape::G(c, d)) => {
                        block[*a] == block[*c] && block[*b] == block[*d]
                    }
                    _ => false,
                };
                if congruent {
                    merge(&mut block, i, j);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|i| (0..n).find(|&j| block[j] == block[i]).unwrap())
        .collect()
}

/// Same normal form as `closure_oracle`, read off the e-graph.
pub fn engine_partition(eg: &EGraph, ids: &[EClassId]) -> Vec<usize> {
    let roots: Vec<_> = ids.iter().map(|&id| eg.find(id).unwrap()).collect();
    (0..ids.len())
        .map(|i| (0..ids.len()).find(|&j| roots[j] == roots[i]).unwrap())
        .collect()
}

/// A random rebuilt graph over the small schema with at most `max_nodes`
/// e-nodes.
pub fn random_graph(rng: &mut StdRng, max_nodes: usize) -> EGraph {
    loop {
        let mut ops = random_ops(rng, 14);
        while !ops.is_empty() {
            let (eg, _) = replay(&ops);
            if eg.node_count() <= max_nodes {
                return eg;
            }
            ops.pop();
        }
    }
}

/// Random pattern of sort `S` and depth at most `depth` over the variables
/// `x`, `y` (sort S) and `n` (i64).
pub fn random_pattern(rng: &mut StdRng, k: &Small, depth: usize) -> Pattern {
    let choice = if depth <= 1 { 0 } else { rng.gen_range(0..5) };
    match choice {
        0 => Pattern::var(*["x", "y"].choose(rng).unwrap(), k.s),
        1 => {
            let leaf = if rng.gen_bool(0.5) {
                Pattern::lit(rng.gen_range(0..3))
            } else {
                Pattern::var("n", SortId::I64)
            };
            Pattern::apply(k.l, vec![leaf])
        }
        2 => Pattern::apply(k.f, vec![random_pattern(rng, k, depth - 1)]),
        _ => Pattern::apply(
            k.g,
            vec![
                random_pattern(rng, k, depth - 1),
                random_pattern(rng, k, depth - 1),
            ],
        ),
    }
}

pub fn pattern_vars(p: &Pattern, out: &mut BTreeMap<String, SortId>) {
    match p {
        Pattern::Var(v) => {
            out.insert(v.name.clone(), v.sort);
        }
        Pattern::Apply { args, .. } | Pattern::PrimCall { args, .. } => {
            for a in args {
                pattern_vars(a, out);
            }
        }
        Pattern::Literal(_) | Pattern::Class { .. } => {}
    }
}

pub fn pattern_sort(eg: &EGraph, p: &Pattern) -> SortId {
    match p {
        Pattern::Var(v) => v.sort,
        Pattern::Literal(v) => v.sort(),
        Pattern::Apply { func, .. } => eg.schema().function(*func).ret,
        Pattern::Class { sort, .. } => *sort,
        Pattern::PrimCall { .. } => SortId::I64,
    }
}

/// Whether `p` under `assign` is represented in `class`.
pub fn represented(
    eg: &EGraph,
    p: &Pattern,
    class: EClassId,
    assign: &BTreeMap<String, EClassId>,
) -> bool {
    match p {
        Pattern::Var(v) => assign[&v.name] == class,
        Pattern::Literal(v) => eg.class(class).nodes().contains(&ENode::Literal(v.clone())),
        Pattern::Class { id, .. } => eg.find(*id).unwrap() == class,
        Pattern::Apply { func, args } => eg.class(class).nodes().iter().any(|node| match node {
            ENode::Apply { func: f, children } => {
                f == func
                    && children.len() == args.len()
                    && args
                        .iter()
                        .zip(children)
                        .all(|(a, &c)| represented(eg, a, eg.find(c).unwrap(), assign))
            }
            ENode::Literal(_) => false,
        }),
        Pattern::PrimCall { .. } => panic!("no primitive calls in oracle patterns"),
    }
}

pub type MatchSet = BTreeSet<(EClassId, BTreeMap<String, EClassId>)>;

/// Every (root, assignment) pair, found by trying all assignments of the
/// pattern's variables to classes of the right sort.
pub fn brute_ematch(eg: &EGraph, p: &Pattern) -> MatchSet {
    let mut vars = BTreeMap::new();
    pattern_vars(p, &mut vars);
    let vars: Vec<_> = vars.into_iter().collect();
    let classes_of = |sort: SortId| -> Vec<EClassId> {
        eg.classes()
            .filter(|c| c.sort() == sort)
            .map(|c| c.id())
            .collect()
    };
    let roots = classes_of(pattern_sort(eg, p));
    let domains: Vec<Vec<EClassId>> = vars.iter().map(|(_, s)| classes_of(*s)).collect();
    let mut out = MatchSet::new();
    let mut cursor = vec![0usize; vars.len()];
    if domains.iter().any(Vec::is_empty) {
        return out;
    }
    loop {
        let assign: BTreeMap<String, EClassId> = vars
            .iter()
            .zip(&cursor)
            .zip(&domains)
            .map(|(((name, _), &i), dom)| (name.clone(), dom[i]))
            .collect();
        for &root in &roots {
            if represented(eg, p, root, &assign) {
                out.insert((root, assign.clone()));
            }
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == cursor.len() {
                return out;
            }
            cursor[pos] += 1;
            if cursor[pos] < domains[pos].len() {
                break;
            }
            cursor[pos] = 0;
            pos += 1;
        }
    }
}

/// Graph for extraction tests: constructors `L(i64)`, `F(S)`, `G(S, S)`,
/// `H(S)` with random costs. Every class sits at a level and nodes only
/// point to strictly lower levels (unions join classes of equal level), so
/// no term in it is deeper than five.
pub fn random_extraction_graph(rng: &mut StdRng, max_classes: usize) -> EGraph {
    let mut schema = Schema::new();
    let s = schema.declare_sort("S").unwrap();
    let mut funcs = Vec::new();
    for (name, params) in [
        ("L", vec![SortId::I64]),
        ("F", vec![s]),
        ("G", vec![s, s]),
        ("H", vec![s]),
    ] {
        let decl = FunctionDecl::new(name, params, s).with_cost(rng.gen_range(1..=4));
        funcs.push(schema.declare_function(decl).unwrap());
    }
    let mut eg = EGraph::new(schema);
    let mut level: BTreeMap<EClassId, usize> = BTreeMap::new();
    for _ in 0..rng.gen_range(1..30) {
        if eg.class_count() + 2 > max_classes {
            break;
        }
        let of_sort = |eg: &EGraph,
                       sort: SortId,
                       level: &BTreeMap<EClassId, usize>|
         -> Vec<(EClassId, usize)> {
            eg.classes()
                .filter(|c| c.sort() == sort)
                .map(|c| (c.id(), level[&c.id()]))
                .collect()
        };
        let lits = of_sort(&eg, SortId::I64, &level);
        let nodes = of_sort(&eg, s, &level);
        let low: Vec<_> = nodes.iter().filter(|(_, l)| *l < 4).copied().collect();
        let (node, lvl) = match rng.gen_range(0..8) {
            0 => (ENode::Literal(Value::I64(rng.gen_range(0..3))), 0),
            1 if !lits.is_empty() => (ENode::apply(funcs[0], vec![lits.choose(rng).unwrap().0]), 1),
            2 | 3 if !low.is_empty() => {
                let (c, l) = *low.choose(rng).unwrap();
                let f = if rng.gen_bool(0.5) {
                    funcs[1]
                } else {
                    funcs[3]
                };
                (ENode::apply(f, vec![c]), l + 1)
            }
            4 if !low.is_empty() => {
                let (a, la) = *low.choose(rng).unwrap();
                let (b, lb) = *low.choose(rng).unwrap();
                (ENode::apply(funcs[2], vec![a, b]), la.max(lb) + 1)
            }
            5..=7 => {
                let same: Vec<_> = nodes
                    .iter()
                    .flat_map(|a| nodes.iter().map(move |b| (a, b)))
                    .filter(|(a, b)| a.0 < b.0 && a.1 == b.1)
                    .collect();
                if let Some((a, b)) = same.choose(rng) {
                    eg.union(a.0, b.0).unwrap();
                    eg.rebuild();
                    // surviving ids existed before and merged classes share a level
                    level = eg.classes().map(|c| (c.id(), level[&c.id()])).collect();
                }
                continue;
            }
            _ => continue,
        };
        let id = eg.add_node(node).unwrap();
        level.entry(id).or_insert(lvl);
    }
    eg.rebuild();
    eg
}

/// Minimum cost over every term of depth at most `depth` rooted in `class`,
/// by exhaustive recursion over node choices.
pub fn brute_min_cost(eg: &EGraph, class: EClassId, depth: usize) -> Option<u64> {
    if depth == 0 {
        return None;
    }
    eg.class(class)
        .nodes()
        .iter()
        .filter_map(|node| match node {
            ENode::Literal(_) => Some(1),
            ENode::Apply { func, children } => {
                let mut total = eg.schema().function(*func).cost;
                for &c in children {
                    total += brute_min_cost(eg, eg.find(c).unwrap(), depth - 1)?;
                }
                Some(total)
            }
        })
        .min()
}

/// Cost of a term computed from the declared function costs.
pub fn term_cost(schema: &Schema, term: &Term) -> u64 {
    match term {
        Term::Literal(_) => 1,
        Term::Apply(name, args) => {
            let f = schema.function_id(name).unwrap();
            schema.function(f).cost + args.iter().map(|a| term_cost(schema, a)).sum::<u64>()
        }
        Term::Ref(_) => panic!("extracted terms contain no references"),
    }
}

/// Class ids partitioned by their canonical root, in id order.
pub fn partition(eg: &EGraph, upto: usize) -> Vec<EClassId> {
    (0..upto)
        .map(|i| eg.find(EClassId::from_index(i)).unwrap())
        .collect()
}
