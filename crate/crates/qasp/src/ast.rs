//! Abstract syntax and semantic domains shared by the parser, grounder,
//! stable-model engine and the quantifier evaluator.
//!
//! Programs are sets of disjunctive rules with a few sugared forms on top
//! (choice heads, `#count`/`#sum` aggregates, comparison literals, integer
//! intervals in facts). The grounder lowers everything to the disjunctive
//! core plus natively evaluated ground aggregates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Reserved prefix for atoms invented during desugaring. They never show up
/// in user-visible output or in `fix` bases.
pub const AUX_PREFIX: &str = "_aux_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl fmt::Display for ArithOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn eval<T: Ord>(self, l: &T, r: &T) -> bool {
        match self {
            CmpOp::Lt => l < r,
            CmpOp::Le => l <= r,
            CmpOp::Eq => l == r,
            CmpOp::Ne => l != r,
            CmpOp::Ge => l >= r,
            CmpOp::Gt => l > r,
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        })
    }
}

/// A term. Integers sort before symbolic constants, which gives the
/// deterministic enumeration order used throughout the engine.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Int(i64),
    Const(String),
    Var(String),
    Arith(ArithOp, Box<Term>, Box<Term>),
    /// `lo..hi`, only legal in fact arguments.
    Interval(Box<Term>, Box<Term>),
}

impl Term {
    pub fn is_ground_const(&self) -> bool {
        matches!(self, Term::Int(_) | Term::Const(_))
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Arith(_, l, r) | Term::Interval(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            _ => {}
        }
    }

    /// Variables that occur as a whole argument (not nested inside
    /// arithmetic); these can be bound by matching against ground atoms.
    pub fn collect_consts(&self, out: &mut BTreeSet<Term>) {
        match self {
            Term::Int(_) | Term::Const(_) => {
                out.insert(self.clone());
            }
            Term::Arith(_, l, r) | Term::Interval(l, r) => {
                l.collect_consts(out);
                r.collect_consts(out);
            }
            Term::Var(_) => {}
        }
    }

    pub fn has_interval(&self) -> bool {
        match self {
            Term::Interval(_, _) => true,
            Term::Arith(_, l, r) => l.has_interval() || r.has_interval(),
            _ => false,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Int(n) => write!(f, "{n}"),
            Term::Const(s) => f.write_str(s),
            Term::Var(v) => f.write_str(v),
            Term::Arith(op, l, r) => write!(f, "({l}{op}{r})"),
            Term::Interval(l, r) => write!(f, "{l}..{r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Self {
        Atom { pred: pred.into(), args }
    }

    pub fn prop(pred: impl Into<String>) -> Self {
        Atom { pred: pred.into(), args: Vec::new() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn key(&self) -> (String, usize) {
        (self.pred.clone(), self.arity())
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground_const)
    }

    pub fn is_aux(&self) -> bool {
        self.pred.starts_with(AUX_PREFIX)
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for t in &self.args {
            t.collect_vars(out);
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggFunc {
    Count,
    Sum,
}

impl fmt::Display for AggFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AggFunc::Count => "#count",
            AggFunc::Sum => "#sum",
        })
    }
}

/// One `terms : condition` element of an aggregate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AggElement {
    pub tuple: Vec<Term>,
    pub condition: Vec<BodyLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Aggregate {
    pub func: AggFunc,
    pub elements: Vec<AggElement>,
    pub op: CmpOp,
    pub bound: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BodyLiteral {
    Pos(Atom),
    Neg(Atom),
    Agg(Aggregate),
    Cmp(Term, CmpOp, Term),
}

impl fmt::Display for BodyLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyLiteral::Pos(a) => write!(f, "{a}"),
            BodyLiteral::Neg(a) => write!(f, "not {a}"),
            BodyLiteral::Cmp(l, op, r) => write!(f, "{l} {op} {r}"),
            BodyLiteral::Agg(agg) => write!(f, "{agg}"),
        }
    }
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{{", self.func)?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, t) in e.tuple.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{t}")?;
            }
            if !e.condition.is_empty() {
                write!(f, " : ")?;
                for (j, l) in e.condition.iter().enumerate() {
                    if j > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{l}")?;
                }
            }
        }
        write!(f, "}} {} {}", self.op, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceElement {
    pub atom: Atom,
    pub condition: Vec<BodyLiteral>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeadForm {
    Disjunction(Vec<Atom>),
    Choice {
        lower: Option<Term>,
        upper: Option<Term>,
        elements: Vec<ChoiceElement>,
    },
}

impl HeadForm {
    pub fn is_empty_disjunction(&self) -> bool {
        matches!(self, HeadForm::Disjunction(atoms) if atoms.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: HeadForm,
    pub body: Vec<BodyLiteral>,
}

impl Rule {
    pub fn fact(atom: Atom) -> Self {
        Rule { head: HeadForm::Disjunction(vec![atom]), body: Vec::new() }
    }

    pub fn constraint(body: Vec<BodyLiteral>) -> Self {
        Rule { head: HeadForm::Disjunction(Vec::new()), body }
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_empty_disjunction() && !self.body.is_empty()
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
            && matches!(&self.head, HeadForm::Disjunction(atoms) if atoms.len() == 1)
    }

    pub fn is_normal(&self) -> bool {
        matches!(&self.head, HeadForm::Disjunction(atoms) if atoms.len() <= 1)
    }

    /// Variables occurring in positive body atoms (including inside
    /// arithmetic arguments), the ones safety allows the rest of the rule
    /// to mention.
    pub fn positive_body_vars(&self) -> BTreeSet<String> {
        let mut vars = BTreeSet::new();
        for lit in &self.body {
            if let BodyLiteral::Pos(a) = lit {
                a.collect_vars(&mut vars);
            }
        }
        vars
    }

    /// Checks the safety condition: every variable of the rule occurs in a
    /// positive body atom; element-local variables may instead occur in a
    /// positive literal of their element's condition. Returns the name of
    /// an offending variable on failure.
    pub fn check_safety(&self) -> Result<(), String> {
        let global = self.positive_body_vars();

        let check_scoped = |cond: &[BodyLiteral],
                            mentioned: &BTreeSet<String>|
         -> Result<(), String> {
            let mut local = global.clone();
            for lit in cond {
                if let BodyLiteral::Pos(a) = lit {
                    a.collect_vars(&mut local);
                }
            }
            for v in mentioned {
                if !local.contains(v) {
                    return Err(v.clone());
                }
            }
            Ok(())
        };

        match &self.head {
            HeadForm::Disjunction(atoms) => {
                let mut vars = BTreeSet::new();
                for a in atoms {
                    a.collect_vars(&mut vars);
                }
                for v in &vars {
                    if !global.contains(v) {
                        return Err(v.clone());
                    }
                }
            }
            HeadForm::Choice { lower, upper, elements } => {
                let mut bound_vars = BTreeSet::new();
                if let Some(t) = lower {
                    t.collect_vars(&mut bound_vars);
                }
                if let Some(t) = upper {
                    t.collect_vars(&mut bound_vars);
                }
                for v in &bound_vars {
                    if !global.contains(v) {
                        return Err(v.clone());
                    }
                }
                for e in elements {
                    let mut mentioned = BTreeSet::new();
                    e.atom.collect_vars(&mut mentioned);
                    for lit in &e.condition {
                        collect_literal_vars(lit, &mut mentioned);
                    }
                    check_scoped(&e.condition, &mentioned)?;
                }
            }
        }

        for lit in &self.body {
            match lit {
                BodyLiteral::Pos(_) => {}
                BodyLiteral::Neg(a) => {
                    let mut vars = BTreeSet::new();
                    a.collect_vars(&mut vars);
                    for v in &vars {
                        if !global.contains(v) {
                            return Err(v.clone());
                        }
                    }
                }
                BodyLiteral::Cmp(l, _, r) => {
                    let mut vars = BTreeSet::new();
                    l.collect_vars(&mut vars);
                    r.collect_vars(&mut vars);
                    for v in &vars {
                        if !global.contains(v) {
                            return Err(v.clone());
                        }
                    }
                }
                BodyLiteral::Agg(agg) => {
                    let mut bound_vars = BTreeSet::new();
                    agg.bound.collect_vars(&mut bound_vars);
                    for v in &bound_vars {
                        if !global.contains(v) {
                            return Err(v.clone());
                        }
                    }
                    for e in &agg.elements {
                        let mut mentioned = BTreeSet::new();
                        for t in &e.tuple {
                            t.collect_vars(&mut mentioned);
                        }
                        for l in &e.condition {
                            collect_literal_vars(l, &mut mentioned);
                        }
                        check_scoped(&e.condition, &mentioned)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// All atoms syntactically occurring in this rule, including inside
    /// aggregates and choice elements.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        match &self.head {
            HeadForm::Disjunction(atoms) => out.extend(atoms.iter()),
            HeadForm::Choice { elements, .. } => {
                for e in elements {
                    out.push(&e.atom);
                    for l in &e.condition {
                        collect_literal_atoms(l, &mut out);
                    }
                }
            }
        }
        for l in &self.body {
            collect_literal_atoms(l, &mut out);
        }
        out
    }
}

fn collect_literal_vars(lit: &BodyLiteral, out: &mut BTreeSet<String>) {
    match lit {
        BodyLiteral::Pos(a) | BodyLiteral::Neg(a) => a.collect_vars(out),
        BodyLiteral::Cmp(l, _, r) => {
            l.collect_vars(out);
            r.collect_vars(out);
        }
        BodyLiteral::Agg(agg) => {
            agg.bound.collect_vars(out);
            for e in &agg.elements {
                for t in &e.tuple {
                    t.collect_vars(out);
                }
                for l in &e.condition {
                    collect_literal_vars(l, out);
                }
            }
        }
    }
}

fn collect_literal_atoms<'a>(lit: &'a BodyLiteral, out: &mut Vec<&'a Atom>) {
    match lit {
        BodyLiteral::Pos(a) | BodyLiteral::Neg(a) => out.push(a),
        BodyLiteral::Cmp(_, _, _) => {}
        BodyLiteral::Agg(agg) => {
            for e in &agg.elements {
                for l in &e.condition {
                    collect_literal_atoms(l, out);
                }
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.head {
            HeadForm::Disjunction(atoms) => {
                for (i, a) in atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{a}")?;
                }
            }
            HeadForm::Choice { lower, upper, elements } => {
                if let Some(l) = lower {
                    write!(f, "{l} ")?;
                }
                write!(f, "{{")?;
                for (i, e) in elements.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{}", e.atom)?;
                    if !e.condition.is_empty() {
                        write!(f, " : ")?;
                        for (j, l) in e.condition.iter().enumerate() {
                            if j > 0 {
                                write!(f, ", ")?;
                            }
                            write!(f, "{l}")?;
                        }
                    }
                }
                write!(f, "}}")?;
                if let Some(u) = upper {
                    write!(f, " {u}")?;
                }
            }
        }
        let headless = self.head.is_empty_disjunction();
        if !self.body.is_empty() || headless {
            // A headless rule with an empty body is falsum and still
            // needs the `:-` marker to be reparseable.
            write!(f, "{}", if headless { ":-" } else { " :-" })?;
            for (i, l) in self.body.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, " {l}")?;
            }
        }
        write!(f, ".")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Program {
    pub rules: Vec<Rule>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        Program { rules }
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn union(&self, other: &Program) -> Program {
        let mut rules = self.rules.clone();
        rules.extend(other.rules.iter().cloned());
        Program { rules }
    }

    pub fn is_normal(&self) -> bool {
        self.rules.iter().all(Rule::is_normal)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantifier::Exists => "exists",
            Quantifier::Forall => "forall",
        })
    }
}

/// A quantified program: a nonempty prefix of quantifier blocks followed by
/// the constraint program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantifiedProgram {
    pub blocks: Vec<(Quantifier, Program)>,
    pub constraint: Program,
}

impl QuantifiedProgram {
    pub fn is_existential(&self) -> bool {
        matches!(self.blocks.first(), Some((Quantifier::Exists, _)))
    }

    pub fn is_normal(&self) -> bool {
        self.blocks.iter().all(|(_, p)| p.is_normal()) && self.constraint.is_normal()
    }
}

impl fmt::Display for QuantifiedProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, p) in &self.blocks {
            writeln!(f, "%@{q}")?;
            write!(f, "{p}")?;
        }
        writeln!(f, "%@constraint")?;
        write!(f, "{}", self.constraint)
    }
}

/// A set of ground atoms. Which Herbrand base it is drawn from is validated
/// by the operations that consume it.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Interpretation {
    pub atoms: BTreeSet<Atom>,
}

impl Interpretation {
    pub fn new(atoms: BTreeSet<Atom>) -> Self {
        Interpretation { atoms }
    }

    pub fn empty() -> Self {
        Interpretation::default()
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_subset(&self, base: &BTreeSet<Atom>) -> bool {
        self.atoms.iter().all(|a| base.contains(a))
    }

    /// Drops desugaring artifacts; what remains is user-visible.
    pub fn without_aux(&self) -> Interpretation {
        Interpretation {
            atoms: self.atoms.iter().filter(|a| !a.is_aux()).cloned().collect(),
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation { atoms: iter.into_iter().collect() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("program is not normal: rule `{0}` has a disjunctive or choice head")]
    NonNormal(String),
}

/// The set of predicate/arity pairs occurring anywhere in the program,
/// including inside aggregates and choice elements.
pub fn at(program: &Program) -> BTreeSet<(String, usize)> {
    let mut out = BTreeSet::new();
    for r in &program.rules {
        for a in r.atoms() {
            out.insert(a.key());
        }
    }
    out
}

/// Stratification test on the predicate dependency graph: a level mapping
/// exists iff no cycle goes through a negative edge. Aggregate literals are
/// left out of the dependency skeleton.
pub fn check_stratified(program: &Program) -> Result<bool, ModelError> {
    for r in &program.rules {
        if !r.is_normal() {
            return Err(ModelError::NonNormal(r.to_string()));
        }
    }

    // Node per predicate/arity; edges body -> head, marked by polarity.
    let mut index: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let idx_of = |key: (String, usize), index: &mut BTreeMap<(String, usize), usize>| {
        let next = index.len();
        *index.entry(key).or_insert(next)
    };
    let mut edges: BTreeSet<(usize, usize, bool)> = BTreeSet::new(); // (from, to, negative)
    for r in &program.rules {
        let head = match &r.head {
            HeadForm::Disjunction(atoms) => atoms.first(),
            HeadForm::Choice { .. } => unreachable!("normality checked above"),
        };
        let Some(head) = head else { continue };
        let h = idx_of(head.key(), &mut index);
        for lit in &r.body {
            match lit {
                BodyLiteral::Pos(a) => {
                    let b = idx_of(a.key(), &mut index);
                    edges.insert((b, h, false));
                }
                BodyLiteral::Neg(a) => {
                    let b = idx_of(a.key(), &mut index);
                    edges.insert((b, h, true));
                }
                BodyLiteral::Agg(_) | BodyLiteral::Cmp(_, _, _) => {}
            }
        }
    }

    let n = index.len();
    let mut adj = vec![Vec::new(); n];
    for &(from, to, neg) in &edges {
        adj[from].push((to, neg));
    }
    let scc = tarjan_scc(n, &adj);
    Ok(!edges
        .iter()
        .any(|&(from, to, neg)| neg && scc[from] == scc[to]))
}

/// Iterative Tarjan; returns the component id of each node.
fn tarjan_scc(n: usize, adj: &[Vec<(usize, bool)>]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut num = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut counter = 0usize;
    let mut ncomp = 0usize;

    for start in 0..n {
        if num[start] != usize::MAX {
            continue;
        }
        // Frames: (node, next child index).
        let mut frames = vec![(start, 0usize)];
        num[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;
        while let Some(&mut (v, ref mut ci)) = frames.last_mut() {
            if *ci < adj[v].len() {
                let (w, _) = adj[v][*ci];
                *ci += 1;
                if num[w] == usize::MAX {
                    num[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(num[w]);
                }
            } else {
                if low[v] == num[v] {
                    while let Some(w) = stack.pop() {
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    comp
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program_text;

    fn prog(text: &str) -> Program {
        parse_program_text(text).unwrap()
    }

    #[test]
    fn at_collects_predicates_with_arity() {
        let p = prog("a :- b.");
        let ats = at(&p);
        assert_eq!(
            ats,
            [("a".to_string(), 0), ("b".to_string(), 0)].into_iter().collect()
        );
    }

    #[test]
    fn at_example1_first_block() {
        let p = prog("a(1) | a(2).");
        assert_eq!(at(&p), [("a".to_string(), 1)].into_iter().collect());
    }

    #[test]
    fn at_empty_program() {
        assert!(at(&Program::default()).is_empty());
    }

    #[test]
    fn at_sees_inside_aggregates_and_choices() {
        let p = prog("1 {f(X,Y) : setj(Y)} 1 :- seti(X).\n:- #count{X : c(X)} < 2.");
        let keys: BTreeSet<String> = at(&p).into_iter().map(|(p, a)| format!("{p}/{a}")).collect();
        assert!(keys.contains("f/2"));
        assert!(keys.contains("setj/1"));
        assert!(keys.contains("seti/1"));
        assert!(keys.contains("c/1"));
    }

    #[test]
    fn stratified_acyclic() {
        let p = prog("p :- not q.\nq.");
        assert_eq!(check_stratified(&p), Ok(true));
    }

    #[test]
    fn stratified_negative_self_loop() {
        let p = prog("p :- not p.");
        assert_eq!(check_stratified(&p), Ok(false));
    }

    #[test]
    fn stratified_cnf_constraint_program() {
        // Shape of the clause-checking constraint program: ok_j rules plus
        // a constraint per clause.
        let p = prog("ok1 :- x1.\nok1 :- nx2.\n:- not ok1.");
        assert_eq!(check_stratified(&p), Ok(true));
    }

    #[test]
    fn stratified_rejects_disjunction() {
        let p = prog("a | b.");
        assert!(matches!(check_stratified(&p), Err(ModelError::NonNormal(_))));
    }

    #[test]
    fn stratified_invariant_under_reordering() {
        let p1 = prog("p :- not q.\nq :- r.\nr.");
        let p2 = prog("r.\nq :- r.\np :- not q.");
        assert_eq!(check_stratified(&p1), check_stratified(&p2));
    }

    #[test]
    fn predicate_identity_includes_arity() {
        let p = prog("onnode(x,1) :- onnode(x,1,0).");
        assert_eq!(at(&p).len(), 2);
    }

    #[test]
    fn safety_rejects_unbound_head_var() {
        let p = prog("p(1).");
        assert!(p.rules[0].check_safety().is_ok());
        let r = Rule {
            head: HeadForm::Disjunction(vec![Atom::new("p", vec![Term::Var("X".into())])]),
            body: vec![BodyLiteral::Neg(Atom::new("q", vec![Term::Var("X".into())]))],
        };
        assert_eq!(r.check_safety(), Err("X".to_string()));
    }

    #[test]
    fn safety_accepts_var_inside_arith_of_positive_atom() {
        // Inertia-style rule: S occurs only inside S-1 within a positive atom.
        let p = prog("onnode(X,N,S) :- onnode(X,N,S-1), not affected(X,S).");
        assert!(p.rules[0].check_safety().is_ok());
    }

    #[test]
    fn safety_scopes_aggregate_locals() {
        let p = prog(":- #count{X : p(X)} < 2.");
        assert!(p.rules[0].check_safety().is_ok());
        let p = prog(":- q(Y), #sum{N,X : onnode(X,N)} != Y.");
        assert!(p.rules[0].check_safety().is_ok());
    }
}
