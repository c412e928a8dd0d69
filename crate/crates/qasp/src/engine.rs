//! Stable-model computation over ground programs.
//!
//! Answer sets are minimal models of the reduct that also satisfy the
//! constraints. [`AnswerSets`] streams them lazily: a depth-first search
//! over the candidate atoms, false branch first, pruning a branch as soon
//! as some fully decided rule is violated. Leaves are certified by the
//! full [`is_answer_set`] check, so the search only has to be sound about
//! what it prunes, never about what it keeps.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::ast::{AggFunc, Aggregate, Atom, BodyLiteral, HeadForm, Interpretation, Rule, Term};
use crate::ground::GroundProgram;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("interpretation is not a subset of the Herbrand base: {0}")]
    NotInBase(Atom),
    #[error("reduct is only defined for aggregate-free non-constraint rules: {0}")]
    UnsupportedRule(String),
    #[error("#sum element tuple does not start with an integer: {0}")]
    NonIntegerWeight(String),
    #[error("aggregate bound is not an integer: {0}")]
    NonIntegerBound(String),
    #[error("program too large for brute force: {0} atoms (cap {1}, override with QASP_ATOM_CAP)")]
    TooManyAtoms(usize, usize),
}

fn eval_aggregate(agg: &Aggregate, i: &Interpretation) -> Result<bool, EngineError> {
    let mut tuples: BTreeSet<&Vec<Term>> = BTreeSet::new();
    for e in &agg.elements {
        let holds = e
            .condition
            .iter()
            .all(|l| literal_plain(l, i).unwrap_or(false));
        if holds {
            tuples.insert(&e.tuple);
        }
    }
    let value: i64 = match agg.func {
        AggFunc::Count => tuples.len() as i64,
        AggFunc::Sum => {
            let mut sum = 0i64;
            for t in &tuples {
                match t.first() {
                    Some(Term::Int(n)) => sum += n,
                    _ => return Err(EngineError::NonIntegerWeight(agg.to_string())),
                }
            }
            sum
        }
    };
    let Term::Int(bound) = agg.bound else {
        return Err(EngineError::NonIntegerBound(agg.to_string()));
    };
    Ok(agg.op.eval(&value, &bound))
}

/// Truth of a non-aggregate literal; `None` for aggregates.
fn literal_plain(lit: &BodyLiteral, i: &Interpretation) -> Option<bool> {
    match lit {
        BodyLiteral::Pos(a) => Some(i.contains(a)),
        BodyLiteral::Neg(a) => Some(!i.contains(a)),
        BodyLiteral::Cmp(l, op, r) => Some(op.eval(l, r)),
        BodyLiteral::Agg(_) => None,
    }
}

fn body_holds(body: &[BodyLiteral], i: &Interpretation) -> Result<bool, EngineError> {
    for lit in body {
        let v = match lit {
            BodyLiteral::Agg(agg) => eval_aggregate(agg, i)?,
            other => literal_plain(other, i).unwrap(),
        };
        if !v {
            return Ok(false);
        }
    }
    Ok(true)
}

fn head_holds(head: &HeadForm, i: &Interpretation) -> bool {
    match head {
        HeadForm::Disjunction(atoms) => atoms.iter().any(|a| i.contains(a)),
        HeadForm::Choice { .. } => unreachable!("choice heads are desugared before the engine"),
    }
}

/// Classical satisfaction: every rule with a true body has a true head.
pub fn is_model(rules: &[Rule], i: &Interpretation) -> Result<bool, EngineError> {
    for r in rules {
        if body_holds(&r.body, i)? && !head_holds(&r.head, i) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The reduct with respect to `i`: rules whose negative body intersects
/// `i` are dropped, the rest keep only their positive body.
pub fn gl_reduct(rules: &[Rule], i: &Interpretation) -> Result<Vec<Rule>, EngineError> {
    let mut out = Vec::new();
    for r in rules {
        if r.is_constraint() || r.body.iter().any(|l| matches!(l, BodyLiteral::Agg(_))) {
            return Err(EngineError::UnsupportedRule(r.to_string()));
        }
        if let Some(reduced) = reduce_rule(r, i)? {
            out.push(reduced);
        }
    }
    Ok(out)
}

/// Reduct of a single rule; aggregates and comparisons are evaluated
/// against `i` up front, then the negative body is applied.
fn reduce_rule(r: &Rule, i: &Interpretation) -> Result<Option<Rule>, EngineError> {
    let mut body = Vec::new();
    for lit in &r.body {
        match lit {
            BodyLiteral::Pos(a) => body.push(BodyLiteral::Pos(a.clone())),
            BodyLiteral::Neg(a) => {
                if i.contains(a) {
                    return Ok(None);
                }
            }
            BodyLiteral::Cmp(l, op, rr) => {
                if !op.eval(l, rr) {
                    return Ok(None);
                }
            }
            BodyLiteral::Agg(agg) => {
                if !eval_aggregate(agg, i)? {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(Rule { head: r.head.clone(), body }))
}

/// Least model of a positive normal program (every head a single atom).
fn least_model(rules: &[Rule]) -> Interpretation {
    let mut atoms: BTreeSet<Atom> = BTreeSet::new();
    loop {
        let before = atoms.len();
        for r in rules {
            let ok = r.body.iter().all(|l| match l {
                BodyLiteral::Pos(a) => atoms.contains(a),
                _ => unreachable!("positive program"),
            });
            if ok {
                if let HeadForm::Disjunction(hs) = &r.head {
                    atoms.insert(hs[0].clone());
                }
            }
        }
        if atoms.len() == before {
            return Interpretation::new(atoms);
        }
    }
}

/// True when `i` is a minimal model of the positive program `rules`:
/// no proper subset of `i` is also a model.
fn is_minimal_model(rules: &[Rule], i: &Interpretation) -> Result<bool, EngineError> {
    if !is_model(rules, i)? {
        return Ok(false);
    }
    if rules.iter().all(Rule::is_normal) {
        return Ok(least_model(rules) == *i);
    }
    // Disjunctive reduct: search the proper subsets.
    let atoms: Vec<&Atom> = i.atoms.iter().collect();
    let n = atoms.len();
    for mask in 0u64..(1u64 << n).saturating_sub(1) {
        let j: Interpretation = atoms
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, a)| (*a).clone())
            .collect();
        if is_model(rules, &j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All minimal models over the given atom pool, by exhaustive search.
pub fn minimal_models(rules: &[Rule], pool: &BTreeSet<Atom>) -> Result<Vec<Interpretation>, EngineError> {
    let atoms: Vec<&Atom> = pool.iter().collect();
    let n = atoms.len();
    if n > 24 {
        return Err(EngineError::TooManyAtoms(n, 24));
    }
    let mut models: Vec<Interpretation> = Vec::new();
    for mask in 0u64..1u64 << n {
        let i: Interpretation = atoms
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, a)| (*a).clone())
            .collect();
        if is_model(rules, &i)? {
            models.push(i);
        }
    }
    let minimal: Vec<Interpretation> = models
        .iter()
        .filter(|m| !models.iter().any(|o| o.atoms.is_subset(&m.atoms) && o.atoms != m.atoms))
        .cloned()
        .collect();
    Ok(minimal)
}

/// Full answer-set certification: `i` satisfies the constraints, models
/// the defining rules, and is a minimal model of their reduct.
pub fn is_answer_set(program: &GroundProgram, i: &Interpretation) -> Result<bool, EngineError> {
    if let Some(a) = i.atoms.iter().find(|a| !program.base.contains(*a)) {
        return Err(EngineError::NotInBase(a.clone()));
    }
    let (constraints, defining): (Vec<&Rule>, Vec<&Rule>) =
        program.rules.iter().partition(|r| r.is_constraint());
    for c in &constraints {
        if body_holds(&c.body, i)? {
            return Ok(false);
        }
    }
    let mut reduct = Vec::new();
    for r in &defining {
        if let Some(reduced) = reduce_rule(r, i)? {
            reduct.push(reduced);
        }
    }
    is_minimal_model(&reduct, i)
}

pub const DEFAULT_BRUTE_CAP: usize = 20;

/// Cap on atom counts for the exponential fallbacks; overridable through
/// the QASP_ATOM_CAP environment variable.
pub fn brute_cap() -> usize {
    std::env::var("QASP_ATOM_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_BRUTE_CAP)
}

/// Checks every subset of the Herbrand base. The reference oracle.
pub fn brute_force_answer_sets(program: &GroundProgram) -> Result<Vec<Interpretation>, EngineError> {
    brute_force_answer_sets_capped(program, brute_cap())
}

pub fn brute_force_answer_sets_capped(
    program: &GroundProgram,
    cap: usize,
) -> Result<Vec<Interpretation>, EngineError> {
    let atoms: Vec<&Atom> = program.base.iter().collect();
    let n = atoms.len();
    if n > cap {
        return Err(EngineError::TooManyAtoms(n, cap));
    }
    let mut out = Vec::new();
    for mask in 0u64..1u64 << n {
        let i: Interpretation = atoms
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, a)| (*a).clone())
            .collect();
        if is_answer_set(program, &i)? {
            out.push(i);
        }
    }
    out.sort();
    Ok(out)
}

/// Lazy answer-set stream in deterministic (subset-lexicographic) order.
pub struct AnswerSets {
    program: Arc<GroundProgram>,
    candidates: Vec<Atom>,
    /// Rules grouped by the highest candidate index they mention; a rule
    /// becomes checkable once that atom is decided.
    checkable_at: Vec<Vec<usize>>,
    /// DFS stack of (depth, value-to-try); truth values of decided atoms
    /// live in `assigned`.
    stack: Vec<(usize, bool)>,
    assigned: Vec<bool>,
    limit: Option<usize>,
    yielded: usize,
    /// Decision nodes explored; exposed so tests can assert laziness.
    pub nodes_explored: u64,
    /// Per candidate, the body profiles of the rules that could supply
    /// it: (index, required value) pairs over other candidates. Rules
    /// whose body can never hold are dropped; aggregate literals are
    /// skipped, conservatively counting as satisfiable.
    supports: Vec<Vec<Vec<(usize, bool)>>>,
    done: bool,
}

/// Orders candidates so that rule bodies tend to be decided before the
/// heads they support: a topological pass over the dependency graph,
/// picking the smallest ready atom and breaking cycles on the smallest
/// remaining one. Atoms whose value follows from already-decided ones
/// then cost two search nodes instead of doubling the search space.
fn order_candidates(program: &GroundProgram) -> Vec<Atom> {
    let sorted = &program.candidates;
    let idx_of = |a: &Atom| sorted.binary_search(a).ok();
    let n = sorted.len();
    let mut deps: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for r in &program.rules {
        let heads: Vec<usize> = match &r.head {
            HeadForm::Disjunction(atoms) => atoms.iter().filter_map(|a| idx_of(a)).collect(),
            HeadForm::Choice { .. } => Vec::new(),
        };
        for a in r.atoms() {
            if let Some(b) = idx_of(a) {
                for &h in &heads {
                    if b != h {
                        deps[h].insert(b);
                    }
                }
            }
        }
    }
    let mut emitted = vec![false; n];
    let mut remaining: BTreeSet<usize> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&first) = remaining.iter().next() {
        let next = remaining
            .iter()
            .copied()
            .find(|&i| deps[i].iter().all(|&d| emitted[d]))
            .unwrap_or(first);
        emitted[next] = true;
        remaining.remove(&next);
        order.push(sorted[next].clone());
    }
    order
}

impl AnswerSets {
    pub fn new(program: Arc<GroundProgram>) -> Self {
        Self::with_limit(program, None)
    }

    pub fn with_limit(program: Arc<GroundProgram>, limit: Option<usize>) -> Self {
        let candidates = order_candidates(&program);
        let positions: BTreeMap<&Atom, usize> =
            candidates.iter().enumerate().map(|(i, a)| (a, i)).collect();
        let idx_of = |a: &Atom| positions.get(a).copied();
        let mut checkable_at = vec![Vec::new(); candidates.len() + 1];
        for (ri, r) in program.rules.iter().enumerate() {
            let last = r
                .atoms()
                .iter()
                .filter_map(|a| idx_of(a))
                .max()
                .map(|k| k + 1)
                .unwrap_or(0);
            checkable_at[last].push(ri);
        }
        let mut supports: Vec<Vec<Vec<(usize, bool)>>> = vec![Vec::new(); candidates.len()];
        for r in &program.rules {
            let HeadForm::Disjunction(heads) = &r.head else { continue };
            if heads.is_empty() {
                continue;
            }
            let mut profile = Vec::new();
            let mut possible = true;
            for l in &r.body {
                match l {
                    BodyLiteral::Pos(a) => match idx_of(a) {
                        Some(i) => profile.push((i, true)),
                        // Non-candidates are false in every answer set.
                        None => {
                            possible = false;
                            break;
                        }
                    },
                    BodyLiteral::Neg(a) => {
                        if let Some(i) = idx_of(a) {
                            profile.push((i, false));
                        }
                    }
                    BodyLiteral::Cmp(lhs, op, rhs) => {
                        if !op.eval(lhs, rhs) {
                            possible = false;
                            break;
                        }
                    }
                    BodyLiteral::Agg(_) => {}
                }
            }
            if possible {
                for h in heads {
                    if let Some(i) = idx_of(h) {
                        supports[i].push(profile.clone());
                    }
                }
            }
        }
        let n = candidates.len();
        AnswerSets {
            program,
            candidates,
            checkable_at,
            stack: vec![(0, false)],
            assigned: vec![false; n],
            limit,
            yielded: 0,
            nodes_explored: 0,
            supports,
            done: false,
        }
    }

    fn current(&self, depth: usize) -> Interpretation {
        self.candidates
            .iter()
            .zip(&self.assigned)
            .take(depth)
            .filter(|(_, &v)| v)
            .map(|(a, _)| a.clone())
            .collect()
    }

    /// A violated rule among those fully decided once index `depth` is
    /// assigned kills the whole subtree: undecided candidates cannot
    /// occur in such a rule, and non-candidate atoms are false in every
    /// answer set.
    fn prefix_consistent(&self, depth: usize) -> bool {
        let i = self.current(depth + 1);
        for &ri in &self.checkable_at[depth + 1] {
            let r = &self.program.rules[ri];
            let body = body_holds(&r.body, &i).unwrap_or(false);
            if body && !head_holds(&r.head, &i) {
                return false;
            }
        }
        true
    }

    /// A true atom must end up supported by a rule whose body holds; if
    /// every candidate body is already falsified by the decided prefix,
    /// the subtree below contains no answer set.
    fn possibly_supported(&self, depth: usize) -> bool {
        self.supports[depth]
            .iter()
            .any(|profile| profile.iter().all(|&(i, want)| i > depth || self.assigned[i] == want))
    }
}

impl Iterator for AnswerSets {
    type Item = Interpretation;

    fn next(&mut self) -> Option<Interpretation> {
        if self.done || self.limit.is_some_and(|l| self.yielded >= l) {
            return None;
        }
        let n = self.candidates.len();
        if n == 0 {
            self.done = true;
            let i = Interpretation::empty();
            if is_answer_set(&self.program, &i).unwrap_or(false) {
                self.yielded += 1;
                return Some(i);
            }
            return None;
        }
        while let Some((depth, value)) = self.stack.pop() {
            self.nodes_explored += 1;
            // Trying `false` first; `true` surfaces after backtracking.
            if !value {
                self.stack.push((depth, true));
            }
            self.assigned[depth] = value;
            if value && !self.possibly_supported(depth) {
                continue;
            }
            if !self.prefix_consistent(depth) {
                continue;
            }
            if depth + 1 < n {
                self.stack.push((depth + 1, false));
                continue;
            }
            // Leaf: all candidates decided; certify in full.
            let i = self.current(n);
            if is_answer_set(&self.program, &i).unwrap_or(false) {
                self.yielded += 1;
                return Some(i);
            }
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground, ground_pruned};
    use crate::parser::parse_program_text;

    fn gp(text: &str) -> GroundProgram {
        ground(&parse_program_text(text).unwrap()).unwrap()
    }

    fn answer_sets(text: &str) -> Vec<String> {
        let g = ground_pruned(&parse_program_text(text).unwrap()).unwrap();
        AnswerSets::new(Arc::new(g)).map(|i| i.to_string()).collect()
    }

    #[test]
    fn even_loop_has_two_answer_sets() {
        // Deterministic order: the false branch of each atom comes first.
        assert_eq!(answer_sets("a :- not b. b :- not a."), vec!["{b}", "{a}"]);
    }

    #[test]
    fn disjunction_splits() {
        assert_eq!(answer_sets("a | b."), vec!["{b}", "{a}"]);
    }

    #[test]
    fn constraint_filters() {
        assert_eq!(answer_sets("a :- not b. b :- not a. :- a."), vec!["{b}"]);
    }

    #[test]
    fn self_support_is_rejected() {
        assert_eq!(answer_sets("a :- a."), vec!["{}"]);
    }

    #[test]
    fn odd_loop_is_incoherent() {
        assert!(answer_sets("a :- not a.").is_empty());
    }

    #[test]
    fn supported_but_nonminimal_disjunct() {
        // {a,b} models the reduct but is not minimal.
        assert_eq!(answer_sets("a | b. a :- b. b :- a."), vec!["{a,b}"]);
    }

    #[test]
    fn reduct_matches_definition() {
        let g = gp("a :- not b. b :- not a.");
        let i: Interpretation = [Atom::prop("a")].into_iter().collect();
        let red = gl_reduct(&g.rules, &i).unwrap();
        let text: Vec<String> = red.iter().map(|r| r.to_string()).collect();
        assert_eq!(text, vec!["a."]);
    }

    #[test]
    fn reduct_rejects_constraints() {
        let g = gp("a. :- a.");
        let i = Interpretation::empty();
        assert!(matches!(
            gl_reduct(&g.rules, &i),
            Err(EngineError::UnsupportedRule(_))
        ));
    }

    #[test]
    fn is_model_examples() {
        let g = gp("a :- b.");
        let both: Interpretation = [Atom::prop("a"), Atom::prop("b")].into_iter().collect();
        let only_b: Interpretation = [Atom::prop("b")].into_iter().collect();
        assert!(is_model(&g.rules, &both).unwrap());
        assert!(!is_model(&g.rules, &only_b).unwrap());
        assert!(is_model(&g.rules, &Interpretation::empty()).unwrap());
    }

    #[test]
    fn minimal_models_of_disjunction() {
        let g = gp("a | b.");
        let models = minimal_models(&g.rules, &g.base).unwrap();
        let text: Vec<String> = models.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, vec!["{a}", "{b}"]);
    }

    #[test]
    fn out_of_base_interpretation_is_an_error() {
        let g = gp("a.");
        let i: Interpretation = [Atom::prop("zzz")].into_iter().collect();
        assert!(matches!(is_answer_set(&g, &i), Err(EngineError::NotInBase(_))));
    }

    #[test]
    fn brute_force_agrees_with_search() {
        for text in [
            "a :- not b. b :- not a. c :- a.",
            "a | b. :- b.",
            "a | b | c. :- a, b.",
            "p(1). p(2). q(X) :- p(X), not r(X). r(1) :- not q(1).",
        ] {
            let g = ground_pruned(&parse_program_text(text).unwrap()).unwrap();
            let brute = brute_force_answer_sets(&g).unwrap();
            let mut searched: Vec<Interpretation> =
                AnswerSets::new(Arc::new(g)).collect();
            searched.sort();
            assert_eq!(brute, searched, "program: {text}");
        }
    }

    #[test]
    fn choice_with_count_bounds() {
        let sets = answer_sets("d(1..3). 1 {c(X) : d(X)} 2. :- c(2).");
        // Subsets of {c(1),c(3)} of size 1 or 2, plus complement atoms.
        let visible: Vec<String> = sets
            .iter()
            .map(|s| {
                s.trim_matches(['{', '}'])
                    .split(',')
                    .filter(|a| !a.starts_with("_aux_") && a.starts_with('c'))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        let mut visible = visible;
        visible.sort();
        assert_eq!(visible, vec!["c(1)", "c(1),c(3)", "c(3)"]);
    }

    #[test]
    fn sum_aggregate_constraint() {
        let sets = answer_sets(
            "w(1). w(2). w(3). pick(X) :- w(X), not skip(X). skip(X) :- w(X), not pick(X). \
             :- #sum{X : pick(X)} > 3.",
        );
        // Sums of picked weights must stay at most 3.
        for s in &sets {
            let sum: i64 = [1, 2, 3]
                .iter()
                .filter(|n| s.contains(&format!("pick({n})")))
                .sum();
            assert!(sum <= 3, "{s}");
        }
        // {1,2} {1} {2} {3} {} picked.
        assert_eq!(sets.len(), 5);
    }

    #[test]
    fn first_answer_set_is_found_lazily() {
        // 10 independent guess pairs: 1024 answer sets.
        let mut text = String::new();
        for k in 0..10 {
            text.push_str(&format!("x{k} :- not y{k}. y{k} :- not x{k}. "));
        }
        let g = ground(&parse_program_text(&text).unwrap()).unwrap();
        let mut it = AnswerSets::new(Arc::new(g));
        assert!(it.next().is_some());
        assert!(it.nodes_explored <= 60, "explored {}", it.nodes_explored);
    }

    #[test]
    fn limit_stops_the_stream() {
        let g = gp("a | b. ");
        let it = AnswerSets::with_limit(Arc::new(g), Some(1));
        assert_eq!(it.count(), 1);
    }
}
