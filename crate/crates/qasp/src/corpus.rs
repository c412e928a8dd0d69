//! Benchmark families: instance types, encoders into quantified
//! programs, seeded instance generators, and independent brute-force
//! oracles used to cross-check the evaluator.
//!
//! The non-fact rules of each encoding are fixed across instances; all
//! instance data enters through facts, with the size parameter `k`
//! carried by a `kval(k)` fact that rules pick up through variable
//! bounds. Symbolic constants never collide with the encoders' predicate
//! names.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Atom, Program, QuantifiedProgram, Quantifier, Rule, Term};
use crate::parser::parse_program_text;

fn facts(atoms: Vec<Atom>) -> Vec<Rule> {
    atoms.into_iter().map(Rule::fact).collect()
}

fn sym(s: &str) -> Term {
    Term::Const(s.to_string())
}

fn rules(text: &str) -> Vec<Rule> {
    parse_program_text(text).expect("fixed encoding rules parse").rules
}

/// Decides `min over f of the max clique size in the induced subgraph
/// G_f is at least k`, where f picks one column per row of the partition.
///
/// The graph is undirected; `edges` lists each edge once in either
/// orientation. `cells` maps a (row, column) index pair to the nodes of
/// that partition cell; absent pairs are empty cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinmaxInstance {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub cells: BTreeMap<(i64, i64), Vec<String>>,
    pub k: i64,
}

const MINMAX_P1: &str = "\
setI(X) :- v(X,Y,Z).
setJ(Y) :- v(X,Y,Z).
1 { f(X,Y) : setJ(Y) } 1 :- setI(X).
";

// The clique constraint needs X != Y: a node never has an edge to
// itself, so without it no nonempty clique would survive.
const MINMAX_P2: &str = "\
inInduced(Z) :- v(X,Y,Z), f(X,Y).
edgeP(X,Y) :- edge(X,Y), inInduced(X), inInduced(Y).
{ inClique(X) : inInduced(X) }.
:- inClique(X), inClique(Y), X != Y, not edgeP(X,Y).
";

const MINMAX_C: &str = "\
:- kval(K), #count{X : inClique(X)} < K.
";

pub fn encode_minmax(inst: &MinmaxInstance) -> QuantifiedProgram {
    let mut p1_facts = Vec::new();
    for n in &inst.nodes {
        p1_facts.push(Atom::new("node", vec![sym(n)]));
    }
    for (a, b) in &inst.edges {
        p1_facts.push(Atom::new("edge", vec![sym(a), sym(b)]));
        p1_facts.push(Atom::new("edge", vec![sym(b), sym(a)]));
    }
    for ((i, j), cell) in &inst.cells {
        for n in cell {
            p1_facts.push(Atom::new("v", vec![Term::Int(*i), Term::Int(*j), sym(n)]));
        }
    }
    p1_facts.push(Atom::new("kval", vec![Term::Int(inst.k)]));

    let mut p1 = facts(p1_facts);
    p1.extend(rules(MINMAX_P1));
    QuantifiedProgram {
        blocks: vec![
            (Quantifier::Forall, Program::new(p1)),
            (Quantifier::Exists, Program::new(rules(MINMAX_P2))),
        ],
        constraint: Program::new(rules(MINMAX_C)),
    }
}

pub fn oracle_minmax(inst: &MinmaxInstance) -> bool {
    let undirected: BTreeSet<(String, String)> = inst
        .edges
        .iter()
        .flat_map(|(a, b)| [(a.clone(), b.clone()), (b.clone(), a.clone())])
        .collect();
    let rows: Vec<i64> = inst
        .cells
        .iter()
        .filter(|(_, c)| !c.is_empty())
        .map(|((i, _), _)| *i)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cols: Vec<i64> = inst
        .cells
        .iter()
        .filter(|(_, c)| !c.is_empty())
        .map(|((_, j), _)| *j)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let max_clique = |induced: &[&String]| -> i64 {
        let n = induced.len();
        let mut best = 0i64;
        for mask in 0u64..1u64 << n {
            let members: Vec<&&String> =
                induced.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, m)| m).collect();
            let ok = members.iter().enumerate().all(|(a, x)| {
                members.iter().skip(a + 1).all(|y| {
                    undirected.contains(&((**x).clone(), (**y).clone()))
                })
            });
            if ok {
                best = best.max(members.len() as i64);
            }
        }
        best
    };

    // All column choices per row; the empty row set gives one empty map.
    let mut assignments: Vec<BTreeMap<i64, i64>> = vec![BTreeMap::new()];
    for &i in &rows {
        let mut next = Vec::new();
        for f in &assignments {
            for &j in &cols {
                let mut f = f.clone();
                f.insert(i, j);
                next.push(f);
            }
        }
        assignments = next;
    }

    assignments.iter().all(|f| {
        let mut induced: Vec<&String> = Vec::new();
        for (&i, &j) in f {
            if let Some(cell) = inst.cells.get(&(i, j)) {
                induced.extend(cell.iter());
            }
        }
        max_clique(&induced) >= inst.k
    })
}

pub fn gen_minmax(seed: u64, size: u8) -> MinmaxInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=(3 + size.min(5) as usize)).min(8);
    let nodes: Vec<String> = (1..=n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if rng.gen_bool(0.5) {
                edges.push((nodes[a].clone(), nodes[b].clone()));
            }
        }
    }
    // |cols|^|rows| stays at or below 81.
    let rows = rng.gen_range(1..=2.max(size.min(4) as i64 / 2).min(4));
    let cols = match rows {
        1..=2 => rng.gen_range(1..=3),
        3 => rng.gen_range(1..=3),
        _ => rng.gen_range(1..=2),
    };
    let mut cells: BTreeMap<(i64, i64), Vec<String>> = BTreeMap::new();
    for node in &nodes {
        let i = rng.gen_range(1..=rows);
        let j = rng.gen_range(1..=cols);
        cells.entry((i, j)).or_default().push(node.clone());
    }
    let k = rng.gen_range(0..=n as i64);
    MinmaxInstance { nodes, edges, cells, k }
}

/// Decides whether the pebbling number of a directed graph is at most k:
/// from every placement of exactly k pebbles and for every target node,
/// some sequence of moves puts a pebble on the target. A move along an
/// edge takes two pebbles off its source and adds one to its sink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PebblingInstance {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub k: i64,
}

const PEBBLING_P1: &str = "\
1 { onNode(X,N) : pebble(N) } 1 :- node(X).
:- kval(K), #sum{N,X : onNode(X,N)} != K.
1 { target(X) : node(X) } 1.
";

// Move preconditions read the state before the move (step S-1); the
// post-move count on the source says nothing about legality.
const PEBBLING_P2: &str = "\
1 { endstep(S) : step(S) } 1.
onNode(X,N,0) :- onNode(X,N).
1 { move(X,Y,S) : edge(X,Y) } 1 :- step(S), endstep(T), 1 <= S, S <= T.
:- move(X,Y,S), onNode(X,N,S-1), N < 2.
affected(X,S) :- move(X,Y,S).
affected(Y,S) :- move(X,Y,S).
onNode(X,N-2,S) :- onNode(X,N,S-1), move(X,Y,S).
onNode(Y,M+1,S) :- onNode(Y,M,S-1), move(X,Y,S).
onNode(X,N,S) :- onNode(X,N,S-1), not affected(X,S).
";

const PEBBLING_C: &str = "\
ok(W) :- onNode(W,N,S), target(W), endstep(S), N > 0.
:- target(W), not ok(W).
";

pub fn encode_pebbling(inst: &PebblingInstance) -> QuantifiedProgram {
    let mut p1_facts = Vec::new();
    for n in &inst.nodes {
        p1_facts.push(Atom::new("node", vec![sym(n)]));
    }
    for (a, b) in &inst.edges {
        p1_facts.push(Atom::new("edge", vec![sym(a), sym(b)]));
    }
    p1_facts.push(Atom::new(
        "pebble",
        vec![Term::Interval(Box::new(Term::Int(0)), Box::new(Term::Int(inst.k)))],
    ));
    p1_facts.push(Atom::new("kval", vec![Term::Int(inst.k)]));
    let mut p1 = facts(p1_facts);
    p1.extend(rules(PEBBLING_P1));

    // Every successful move sequence has length below k.
    let mut p2 = facts(vec![Atom::new(
        "step",
        vec![Term::Interval(Box::new(Term::Int(0)), Box::new(Term::Int(inst.k - 1)))],
    )]);
    p2.extend(rules(PEBBLING_P2));

    QuantifiedProgram {
        blocks: vec![
            (Quantifier::Forall, Program::new(p1)),
            (Quantifier::Exists, Program::new(p2)),
        ],
        constraint: Program::new(rules(PEBBLING_C)),
    }
}

pub fn oracle_pebbling(inst: &PebblingInstance) -> bool {
    let n = inst.nodes.len();
    let idx: BTreeMap<&String, usize> =
        inst.nodes.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let edges: Vec<(usize, usize)> =
        inst.edges.iter().map(|(a, b)| (idx[a], idx[b])).collect();

    // All placements of exactly k pebbles onto n nodes.
    fn placements(n: usize, k: i64) -> Vec<Vec<i64>> {
        if n == 1 {
            return vec![vec![k]];
        }
        let mut out = Vec::new();
        for first in 0..=k {
            for mut rest in placements(n - 1, k - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    let reachable = |start: &Vec<i64>, target: usize, max_moves: i64| -> bool {
        let mut seen: BTreeSet<(Vec<i64>, i64)> = BTreeSet::new();
        let mut queue = vec![(start.clone(), 0i64)];
        while let Some((config, depth)) = queue.pop() {
            if config[target] > 0 {
                return true;
            }
            if depth >= max_moves || !seen.insert((config.clone(), depth)) {
                continue;
            }
            for &(a, b) in &edges {
                if config[a] >= 2 {
                    let mut next = config.clone();
                    next[a] -= 2;
                    next[b] += 1;
                    queue.push((next, depth + 1));
                }
            }
        }
        false
    };

    placements(n, inst.k)
        .iter()
        .all(|p| (0..n).all(|t| reachable(p, t, (inst.k - 1).max(0))))
}

pub fn gen_pebbling(seed: u64, size: u8) -> PebblingInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=(2 + (size as usize % 3)).min(4));
    let nodes: Vec<String> = (1..=n).map(|i| format!("n{i}")).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(0.45) {
                edges.push((nodes[a].clone(), nodes[b].clone()));
            }
        }
    }
    if edges.is_empty() {
        edges.push((nodes[0].clone(), nodes[n - 1].clone()));
    }
    let k = rng.gen_range(1..=3);
    PebblingInstance { nodes, edges, k }
}

/// Decides whether a set family has VC dimension at least k: some subset
/// X of the universe with at least k elements is shattered, meaning each
/// subset of X arises as the intersection of X with a family member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcInstance {
    pub universe: Vec<String>,
    pub sets: Vec<BTreeSet<String>>,
    pub k: i64,
}

const VC_P1: &str = "\
K { inX(X) : inU(X) } :- kval(K).
";

const VC_P2: &str = "\
{ inS(X) : inX(X) }.
";

// The family itself, as a program whose answer sets carry the members
// through the extension of `true`.
const VC_P3: &str = "\
1 { sel(I) : setid(I) } 1.
true(X) :- sel(I), elem(I,X).
";

const VC_C: &str = "\
inIntersection(X) :- true(X), inX(X).
:- inIntersection(X), not inS(X).
:- not inIntersection(X), inS(X).
";

pub fn encode_vc(inst: &VcInstance) -> QuantifiedProgram {
    let mut p1_facts = Vec::new();
    for x in &inst.universe {
        p1_facts.push(Atom::new("inU", vec![sym(x)]));
    }
    p1_facts.push(Atom::new("kval", vec![Term::Int(inst.k)]));
    let mut p1 = facts(p1_facts);
    p1.extend(rules(VC_P1));

    let mut p3_facts = Vec::new();
    for (i, set) in inst.sets.iter().enumerate() {
        let id = Term::Int(i as i64 + 1);
        p3_facts.push(Atom::new("setid", vec![id.clone()]));
        for x in set {
            p3_facts.push(Atom::new("elem", vec![id.clone(), sym(x)]));
        }
    }
    let mut p3 = facts(p3_facts);
    p3.extend(rules(VC_P3));

    QuantifiedProgram {
        blocks: vec![
            (Quantifier::Exists, Program::new(p1)),
            (Quantifier::Forall, Program::new(rules(VC_P2))),
            (Quantifier::Exists, Program::new(p3)),
        ],
        constraint: Program::new(rules(VC_C)),
    }
}

pub fn oracle_vc(inst: &VcInstance) -> bool {
    let n = inst.universe.len();
    let shattered = |x: &BTreeSet<&String>| -> bool {
        let members: Vec<&&String> = x.iter().collect();
        let m = members.len();
        (0u64..1u64 << m).all(|mask| {
            let s: BTreeSet<&String> = members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, e)| **e)
                .collect();
            inst.sets.iter().any(|si| {
                let inter: BTreeSet<&String> =
                    si.iter().filter(|e| x.contains(e)).collect();
                inter == s
            })
        })
    };
    (0u64..1u64 << n).any(|mask| {
        let x: BTreeSet<&String> = inst
            .universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| e)
            .collect();
        x.len() as i64 >= inst.k && shattered(&x)
    })
}

pub fn gen_vc(seed: u64, size: u8) -> VcInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=(2 + (size as usize % 3)).min(5));
    let universe: Vec<String> = (1..=n).map(|i| format!("e{i}")).collect();
    let m = rng.gen_range(1..=6usize.min(1 << n));
    let sets: Vec<BTreeSet<String>> = (0..m)
        .map(|_| {
            universe
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect()
        })
        .collect();
    let k = rng.gen_range(0..=n as i64);
    VcInstance { universe, sets, k }
}

/// The generator-facing problem names accepted by the command line.
pub const PROBLEMS: [&str; 3] = ["minmax-clique", "pebbling", "vc-dimension"];

/// Generates an instance, returning its encoding and the oracle verdict.
pub fn generate(problem: &str, seed: u64, size: u8) -> Option<(QuantifiedProgram, bool)> {
    match problem {
        "minmax-clique" => {
            let inst = gen_minmax(seed, size);
            Some((encode_minmax(&inst), oracle_minmax(&inst)))
        }
        "pebbling" => {
            let inst = gen_pebbling(seed, size);
            Some((encode_pebbling(&inst), oracle_pebbling(&inst)))
        }
        "vc-dimension" => {
            let inst = gen_vc(seed, size);
            Some((encode_vc(&inst), oracle_vc(&inst)))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::coherent;

    #[test]
    fn minmax_two_node_clique() {
        // Single cell holding both endpoints of one edge: the only f
        // induces the whole graph, whose max clique is 2.
        let inst = MinmaxInstance {
            nodes: vec!["n1".into(), "n2".into()],
            edges: vec![("n1".into(), "n2".into())],
            cells: [((1, 1), vec!["n1".into(), "n2".into()])].into_iter().collect(),
            k: 2,
        };
        assert!(oracle_minmax(&inst));
        assert!(coherent(&encode_minmax(&inst)).unwrap().coherent);
        let inst = MinmaxInstance { k: 3, ..inst };
        assert!(!oracle_minmax(&inst));
        assert!(!coherent(&encode_minmax(&inst)).unwrap().coherent);
    }

    #[test]
    fn minmax_adversarial_column_choice() {
        // Two rows; picking mismatched columns separates the edge's
        // endpoints, so the min over f of the max clique is 1.
        let inst = MinmaxInstance {
            nodes: vec!["n1".into(), "n2".into()],
            edges: vec![("n1".into(), "n2".into())],
            cells: [
                ((1, 1), vec!["n1".into()]),
                ((2, 1), vec!["n2".into()]),
                ((2, 2), vec!["n2".into()]),
            ]
            .into_iter()
            .collect(),
            k: 2,
        };
        assert!(!oracle_minmax(&inst));
        assert!(!coherent(&encode_minmax(&inst)).unwrap().coherent);
    }

    #[test]
    fn pebbling_single_edge() {
        // Two nodes, one edge, k = 2: placing both pebbles on the source
        // reaches the sink, but one pebble on each node strands the
        // target when the target is the far node... both placements and
        // both targets must work. (1,1) with target n2 works (pebble
        // already there); (2,0) target n2 works via the move; (0,2)
        // target n1 fails: no edge back. So k = 2 does not suffice.
        let inst = PebblingInstance {
            nodes: vec!["n1".into(), "n2".into()],
            edges: vec![("n1".into(), "n2".into())],
            k: 2,
        };
        assert!(!oracle_pebbling(&inst));
        assert!(!coherent(&encode_pebbling(&inst)).unwrap().coherent);
    }

    #[test]
    fn pebbling_two_cycle() {
        // Edges both ways: k = 2 suffices; wherever the two pebbles sit,
        // the target either has one or is one move away.
        let inst = PebblingInstance {
            nodes: vec!["n1".into(), "n2".into()],
            edges: vec![("n1".into(), "n2".into()), ("n2".into(), "n1".into())],
            k: 2,
        };
        assert!(oracle_pebbling(&inst));
        assert!(coherent(&encode_pebbling(&inst)).unwrap().coherent);
        // k = 1 fails: a lone pebble on the wrong node cannot move.
        let inst = PebblingInstance { k: 1, ..inst };
        assert!(!oracle_pebbling(&inst));
        assert!(!coherent(&encode_pebbling(&inst)).unwrap().coherent);
    }

    #[test]
    fn vc_dimension_of_powerset() {
        // The full powerset of a 2-element universe shatters it.
        let u = vec!["e1".to_string(), "e2".to_string()];
        let sets: Vec<BTreeSet<String>> = vec![
            BTreeSet::new(),
            ["e1".to_string()].into_iter().collect(),
            ["e2".to_string()].into_iter().collect(),
            ["e1".to_string(), "e2".to_string()].into_iter().collect(),
        ];
        let inst = VcInstance { universe: u.clone(), sets: sets.clone(), k: 2 };
        assert!(oracle_vc(&inst));
        assert!(coherent(&encode_vc(&inst)).unwrap().coherent);
        // A single set cannot shatter a pair.
        let inst = VcInstance { universe: u, sets: sets[..2].to_vec(), k: 2 };
        assert!(!oracle_vc(&inst));
        assert!(!coherent(&encode_vc(&inst)).unwrap().coherent);
    }

    #[test]
    fn vc_quantified_answer_sets_exist_when_coherent() {
        let inst = VcInstance {
            universe: vec!["e1".into(), "e2".into()],
            sets: vec![
                BTreeSet::new(),
                ["e1".to_string()].into_iter().collect(),
            ],
            k: 1,
        };
        assert!(oracle_vc(&inst));
        let qp = encode_vc(&inst);
        let models = crate::eval::quantified_answer_sets(&qp, Some(1)).unwrap();
        assert_eq!(models.len(), 1);
        assert!(models[0].atoms.iter().any(|a| a.pred == "inX"));
    }

    #[test]
    fn generators_are_deterministic() {
        for p in PROBLEMS {
            let a = generate(p, 7, 2).unwrap();
            let b = generate(p, 7, 2).unwrap();
            assert_eq!(a.0.to_string(), b.0.to_string());
            assert_eq!(a.1, b.1);
        }
    }
}
