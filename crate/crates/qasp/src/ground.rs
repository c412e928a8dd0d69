//! Instantiation of programs over their Herbrand universe.
//!
//! Desugarings applied on the way down to the disjunctive core:
//! interval facts expand to one fact per integer, comparison literals and
//! arithmetic are evaluated, choice heads become complement-atom guess
//! pairs plus cardinality constraints, and aggregates are grounded to
//! explicit element lists that the engine evaluates natively.
//!
//! Two instantiation modes exist: [`ground`] performs the full naive
//! instantiation over the universe, [`ground_pruned`] additionally drops
//! rule instances whose positive body can never be derived (a fixpoint
//! over derivable atoms). Pruning never changes answer sets.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{
    AggElement, Aggregate, ArithOp, Atom, BodyLiteral, ChoiceElement, CmpOp, HeadForm,
    Program, Rule, Term, AUX_PREFIX,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroundError {
    #[error("unsafe rule: variable {0} does not occur in a positive body atom")]
    Unsafe(String),
    #[error("arithmetic overflow while grounding")]
    Overflow,
    #[error("division by zero while grounding")]
    DivisionByZero,
    #[error("ill-formed arithmetic over non-integer constants: {0}")]
    IllFormedArith(String),
    #[error("interval term outside a fact: {0}")]
    IntervalOutsideFact(String),
    #[error("interval bounds must be integers: {0}")]
    NonIntegerInterval(String),
    #[error("choice bound does not evaluate to an integer: {0}")]
    NonIntegerBound(String),
    #[error("Herbrand base too large ({0} atoms)")]
    BaseTooLarge(usize),
}

/// A variable-free program: disjunction heads only, evaluated arithmetic,
/// aggregates reduced to ground element lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundProgram {
    pub rules: Vec<Rule>,
    /// Herbrand base: every atom constructible from the program's
    /// predicate/arity pairs over its universe, plus every atom occurring
    /// in the ground rules.
    pub base: BTreeSet<Atom>,
    /// Complement atoms introduced by choice desugaring.
    pub choice_atoms: BTreeSet<Atom>,
    /// Atoms that can occur in answer sets (head atoms of ground rules),
    /// in the engine's deterministic enumeration order.
    pub candidates: Vec<Atom>,
}

impl GroundProgram {
    pub fn user_base(&self) -> BTreeSet<Atom> {
        self.base.iter().filter(|a| !a.is_aux()).cloned().collect()
    }

    pub fn to_program(&self) -> Program {
        Program::new(self.rules.clone())
    }
}

/// All constants appearing in the program; `{u0}` when there are none.
pub fn herbrand_universe(program: &Program) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    for rule in &program.rules {
        collect_rule_consts(rule, &mut out);
    }
    if out.is_empty() {
        out.insert(Term::Const("u0".to_string()));
    }
    out
}

fn collect_rule_consts(rule: &Rule, out: &mut BTreeSet<Term>) {
    match &rule.head {
        HeadForm::Disjunction(atoms) => {
            for a in atoms {
                for t in &a.args {
                    t.collect_consts(out);
                }
            }
        }
        HeadForm::Choice { lower, upper, elements } => {
            if let Some(t) = lower {
                t.collect_consts(out);
            }
            if let Some(t) = upper {
                t.collect_consts(out);
            }
            for e in elements {
                for t in &e.atom.args {
                    t.collect_consts(out);
                }
                for l in &e.condition {
                    collect_literal_consts(l, out);
                }
            }
        }
    }
    for l in &rule.body {
        collect_literal_consts(l, out);
    }
}

fn collect_literal_consts(lit: &BodyLiteral, out: &mut BTreeSet<Term>) {
    match lit {
        BodyLiteral::Pos(a) | BodyLiteral::Neg(a) => {
            for t in &a.args {
                t.collect_consts(out);
            }
        }
        BodyLiteral::Cmp(l, _, r) => {
            l.collect_consts(out);
            r.collect_consts(out);
        }
        BodyLiteral::Agg(agg) => {
            agg.bound.collect_consts(out);
            for e in &agg.elements {
                for t in &e.tuple {
                    t.collect_consts(out);
                }
                for l in &e.condition {
                    collect_literal_consts(l, out);
                }
            }
        }
    }
}

type Subst = BTreeMap<String, Term>;

fn eval_term(t: &Term, theta: &Subst) -> Result<Option<Term>, GroundError> {
    match t {
        Term::Int(_) | Term::Const(_) => Ok(Some(t.clone())),
        Term::Var(v) => Ok(theta.get(v).cloned()),
        Term::Arith(op, l, r) => {
            let (Some(l), Some(r)) = (eval_term(l, theta)?, eval_term(r, theta)?) else {
                return Ok(None);
            };
            let (Term::Int(l), Term::Int(r)) = (l, r) else {
                // Non-integer operand; the instance is inapplicable.
                return Ok(None);
            };
            let v = match op {
                ArithOp::Add => l.checked_add(r).ok_or(GroundError::Overflow)?,
                ArithOp::Sub => l.checked_sub(r).ok_or(GroundError::Overflow)?,
                ArithOp::Mul => l.checked_mul(r).ok_or(GroundError::Overflow)?,
                ArithOp::Div => {
                    if r == 0 {
                        return Err(GroundError::DivisionByZero);
                    }
                    l.checked_div(r).ok_or(GroundError::Overflow)?
                }
            };
            Ok(Some(Term::Int(v)))
        }
        Term::Interval(_, _) => Ok(None),
    }
}

fn eval_atom(a: &Atom, theta: &Subst) -> Result<Option<Atom>, GroundError> {
    let mut args = Vec::with_capacity(a.args.len());
    for t in &a.args {
        match eval_term(t, theta)? {
            Some(g) => args.push(g),
            None => return Ok(None),
        }
    }
    Ok(Some(Atom::new(a.pred.clone(), args)))
}

fn eval_cmp(l: &Term, op: CmpOp, r: &Term, theta: &Subst) -> Result<Option<bool>, GroundError> {
    let (Some(l), Some(r)) = (eval_term(l, theta)?, eval_term(r, theta)?) else {
        return Ok(None);
    };
    Ok(Some(op.eval(&l, &r)))
}

/// Positive-atom matching context: in pruned mode substitutions are found
/// by matching against the derivable-atom set, in naive mode by full
/// enumeration over the universe.
struct Ctx<'a> {
    universe: &'a BTreeSet<Term>,
    /// `None` means naive mode.
    derivable: Option<&'a BTreeSet<Atom>>,
}

impl<'a> Ctx<'a> {
    fn int_universe(&self) -> Vec<Term> {
        self.universe.iter().filter(|t| matches!(t, Term::Int(_))).cloned().collect()
    }

    /// Drives `cb` once per substitution extending `theta` that makes every
    /// positive literal in `lits` hold (pruned mode) or is syntactically
    /// possible (naive mode).
    fn solve_positives<E, F>(
        &self,
        lits: &[&Atom],
        theta: &mut Subst,
        cb: &mut F,
    ) -> Result<(), E>
    where
        F: FnMut(&mut Subst) -> Result<(), E>,
        E: From<GroundError>,
    {
        match self.derivable {
            Some(derivable) => self.solve_matched(lits, derivable, theta, cb),
            None => {
                // Naive: enumerate every variable of the literals.
                let mut vars = BTreeSet::new();
                for a in lits {
                    a.collect_vars(&mut vars);
                }
                let free: Vec<String> =
                    vars.into_iter().filter(|v| !theta.contains_key(v)).collect();
                self.enumerate_vars(&free, theta, &mut |theta| {
                    // Positive literals stay in the body; no derivability test.
                    cb(theta)
                })
            }
        }
    }

    fn enumerate_vars<E, F>(&self, vars: &[String], theta: &mut Subst, cb: &mut F) -> Result<(), E>
    where
        F: FnMut(&mut Subst) -> Result<(), E>,
    {
        let Some((v, rest)) = vars.split_first() else {
            return cb(theta);
        };
        for c in self.universe {
            theta.insert(v.clone(), c.clone());
            self.enumerate_vars(rest, theta, cb)?;
        }
        theta.remove(v);
        Ok(())
    }

    fn enumerate_int_vars<E, F>(
        &self,
        vars: &[String],
        theta: &mut Subst,
        cb: &mut F,
    ) -> Result<(), E>
    where
        F: FnMut(&mut Subst) -> Result<(), E>,
    {
        let Some((v, rest)) = vars.split_first() else {
            return cb(theta);
        };
        for c in self.int_universe() {
            theta.insert(v.clone(), c);
            self.enumerate_int_vars(rest, theta, cb)?;
        }
        theta.remove(v);
        Ok(())
    }

    fn solve_matched<E, F>(
        &self,
        lits: &[&Atom],
        derivable: &BTreeSet<Atom>,
        theta: &mut Subst,
        cb: &mut F,
    ) -> Result<(), E>
    where
        F: FnMut(&mut Subst) -> Result<(), E>,
        E: From<GroundError>,
    {
        let Some((lit, rest)) = lits.split_first() else {
            return cb(theta);
        };
        // Variables occurring only inside arithmetic cannot be bound by
        // structural matching; enumerate them over the integer constants.
        let mut all_vars = BTreeSet::new();
        lit.collect_vars(&mut all_vars);
        let mut bare = BTreeSet::new();
        for t in &lit.args {
            if let Term::Var(v) = t {
                bare.insert(v.clone());
            }
        }
        let arith_only: Vec<String> = all_vars
            .into_iter()
            .filter(|v| !bare.contains(v) && !theta.contains_key(v))
            .collect();
        self.enumerate_int_vars(&arith_only, theta, &mut |theta| {
            for fact in derivable.range(range_start(&lit.pred)..) {
                if fact.pred != lit.pred {
                    break;
                }
                if fact.arity() != lit.arity() {
                    continue;
                }
                let mut bound_here = Vec::new();
                let mut ok = true;
                for (pat, val) in lit.args.iter().zip(&fact.args) {
                    match pat {
                        Term::Var(v) => match theta.get(v) {
                            Some(existing) => {
                                if existing != val {
                                    ok = false;
                                    break;
                                }
                            }
                            None => {
                                theta.insert(v.clone(), val.clone());
                                bound_here.push(v.clone());
                            }
                        },
                        other => match eval_term(other, theta).map_err(E::from)? {
                            Some(g) => {
                                if &g != val {
                                    ok = false;
                                    break;
                                }
                            }
                            None => {
                                ok = false;
                                break;
                            }
                        },
                    }
                }
                if ok {
                    self.solve_matched(rest, derivable, theta, cb)?;
                }
                for v in bound_here {
                    theta.remove(&v);
                }
            }
            Ok(())
        })
    }
}

/// Smallest atom with the given predicate, for `BTreeSet::range` seeks.
fn range_start(pred: &str) -> Atom {
    Atom::new(pred.to_string(), Vec::new())
}

fn positive_atoms(body: &[BodyLiteral]) -> Vec<&Atom> {
    body.iter()
        .filter_map(|l| match l {
            BodyLiteral::Pos(a) => Some(a),
            _ => None,
        })
        .collect()
}

fn comparisons_hold(body: &[BodyLiteral], theta: &Subst) -> Result<bool, GroundError> {
    for lit in body {
        if let BodyLiteral::Cmp(l, op, r) = lit {
            match eval_cmp(l, *op, r, theta)? {
                Some(true) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

/// Expands interval facts; everything else passes through.
fn expand_intervals(program: &Program) -> Result<Vec<Rule>, GroundError> {
    let mut out = Vec::new();
    for rule in &program.rules {
        if !rule.is_fact() {
            // Parser already rejects these; defense in depth.
            for a in rule.atoms() {
                for t in &a.args {
                    if t.has_interval() {
                        return Err(GroundError::IntervalOutsideFact(rule.to_string()));
                    }
                }
            }
            out.push(rule.clone());
            continue;
        }
        let HeadForm::Disjunction(atoms) = &rule.head else { unreachable!() };
        let atom = &atoms[0];
        if !atom.args.iter().any(Term::has_interval) {
            out.push(rule.clone());
            continue;
        }
        let mut expansions: Vec<Vec<Term>> = vec![Vec::new()];
        for arg in &atom.args {
            let choices: Vec<Term> = match arg {
                Term::Interval(lo, hi) => {
                    let empty = Subst::new();
                    let lo = eval_term(lo, &empty)?;
                    let hi = eval_term(hi, &empty)?;
                    match (lo, hi) {
                        (Some(Term::Int(lo)), Some(Term::Int(hi))) => {
                            (lo..=hi).map(Term::Int).collect()
                        }
                        _ => {
                            return Err(GroundError::NonIntegerInterval(rule.to_string()));
                        }
                    }
                }
                other => {
                    let empty = Subst::new();
                    match eval_term(other, &empty)? {
                        Some(g) => vec![g],
                        None => return Err(GroundError::IllFormedArith(rule.to_string())),
                    }
                }
            };
            let mut next = Vec::new();
            for prefix in &expansions {
                for c in &choices {
                    let mut row = prefix.clone();
                    row.push(c.clone());
                    next.push(row);
                }
            }
            expansions = next;
        }
        for args in expansions {
            out.push(Rule::fact(Atom::new(atom.pred.clone(), args)));
        }
    }
    Ok(out)
}

/// Rejects source-level ground arithmetic over symbolic constants.
fn check_ground_arith(rules: &[Rule]) -> Result<(), GroundError> {
    fn check_term(t: &Term, rule: &Rule) -> Result<(), GroundError> {
        if let Term::Arith(_, _, _) = t {
            let mut vars = BTreeSet::new();
            t.collect_vars(&mut vars);
            if vars.is_empty() {
                let empty = Subst::new();
                if eval_term(t, &empty)?.is_none() {
                    return Err(GroundError::IllFormedArith(rule.to_string()));
                }
            }
        }
        if let Term::Arith(_, l, r) | Term::Interval(l, r) = t {
            check_term(l, rule)?;
            check_term(r, rule)?;
        }
        Ok(())
    }
    for rule in rules {
        for a in rule.atoms() {
            for t in &a.args {
                check_term(t, rule)?;
            }
        }
    }
    Ok(())
}

/// Full naive instantiation, no pruning.
pub fn ground(program: &Program) -> Result<GroundProgram, GroundError> {
    ground_impl(program, false)
}

/// Instantiation with derivability pruning: rule instances whose positive
/// body cannot be derived are dropped, and negative literals over
/// underivable atoms are removed. Answer sets are unchanged.
pub fn ground_pruned(program: &Program) -> Result<GroundProgram, GroundError> {
    ground_impl(program, true)
}

fn ground_impl(program: &Program, prune: bool) -> Result<GroundProgram, GroundError> {
    for rule in &program.rules {
        rule.check_safety().map_err(GroundError::Unsafe)?;
    }
    let expanded = expand_intervals(program)?;
    check_ground_arith(&expanded)?;
    let universe = herbrand_universe(&Program::new(expanded.clone()));

    let derivable = if prune { Some(derivable_fixpoint(&expanded, &universe)?) } else { None };
    let ctx = Ctx { universe: &universe, derivable: derivable.as_ref() };

    let mut rules_out: BTreeSet<Rule> = BTreeSet::new();
    let mut choice_atoms: BTreeSet<Atom> = BTreeSet::new();
    for (rule_idx, rule) in expanded.iter().enumerate() {
        emit_rule(rule, rule_idx, &ctx, &mut rules_out, &mut choice_atoms)?;
    }

    let rules: Vec<Rule> = rules_out.into_iter().collect();

    // Base: constructible atoms plus everything occurring in the rules.
    let mut base = BTreeSet::new();
    let preds = crate::ast::at(&Program::new(expanded));
    for (pred, arity) in preds {
        let count = universe.len().checked_pow(arity as u32).unwrap_or(usize::MAX);
        if base.len().saturating_add(count) > 5_000_000 {
            return Err(GroundError::BaseTooLarge(base.len().saturating_add(count)));
        }
        let mut stack: Vec<Vec<Term>> = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for prefix in &stack {
                for c in &universe {
                    let mut row = prefix.clone();
                    row.push(c.clone());
                    next.push(row);
                }
            }
            stack = next;
        }
        for args in stack {
            base.insert(Atom::new(pred.clone(), args));
        }
    }
    let mut candidates: BTreeSet<Atom> = BTreeSet::new();
    for rule in &rules {
        for a in rule.atoms() {
            base.insert(a.clone());
        }
        if let HeadForm::Disjunction(atoms) = &rule.head {
            for a in atoms {
                candidates.insert(a.clone());
            }
        }
    }

    Ok(GroundProgram {
        rules,
        base,
        choice_atoms,
        candidates: candidates.into_iter().collect(),
    })
}

/// Over-approximation of the derivable atoms: negative literals and
/// aggregates are ignored, choice elements count as derivable whenever
/// their body and condition positives are.
fn derivable_fixpoint(
    rules: &[Rule],
    universe: &BTreeSet<Term>,
) -> Result<BTreeSet<Atom>, GroundError> {
    let mut derivable: BTreeSet<Atom> = BTreeSet::new();
    loop {
        let before = derivable.len();
        let snapshot = derivable.clone();
        let ctx = Ctx { universe, derivable: Some(&snapshot) };
        for rule in rules {
            let pos = positive_atoms(&rule.body);
            let mut theta = Subst::new();
            ctx.solve_positives::<GroundError, _>(&pos, &mut theta, &mut |theta| {
                if !comparisons_hold(&rule.body, theta)? {
                    return Ok(());
                }
                match &rule.head {
                    HeadForm::Disjunction(atoms) => {
                        for a in atoms {
                            if let Some(g) = eval_atom(a, theta)? {
                                derivable.insert(g);
                            }
                        }
                    }
                    HeadForm::Choice { elements, .. } => {
                        for e in elements {
                            let cond_pos = positive_atoms(&e.condition);
                            ctx.solve_positives::<GroundError, _>(
                                &cond_pos,
                                theta,
                                &mut |theta| {
                                    if !comparisons_hold(&e.condition, theta)? {
                                        return Ok(());
                                    }
                                    let mut all_vars = BTreeSet::new();
                                    e.atom.collect_vars(&mut all_vars);
                                    let free: Vec<String> = all_vars
                                        .into_iter()
                                        .filter(|v| !theta.contains_key(v))
                                        .collect();
                                    ctx.enumerate_int_vars::<GroundError, _>(
                                        &free,
                                        theta,
                                        &mut |theta| {
                                            if let Some(g) = eval_atom(&e.atom, theta)? {
                                                derivable.insert(g);
                                            }
                                            Ok(())
                                        },
                                    )
                                },
                            )?;
                        }
                    }
                }
                Ok(())
            })?;
        }
        if derivable.len() == before {
            return Ok(derivable);
        }
    }
}

/// Grounds the non-comparison body literals under `theta`. Returns `None`
/// when the instance is inapplicable (symbolic arithmetic).
fn ground_body(
    body: &[BodyLiteral],
    theta: &Subst,
    ctx: &Ctx<'_>,
) -> Result<Option<Vec<BodyLiteral>>, GroundError> {
    let mut out = Vec::new();
    for lit in body {
        match lit {
            BodyLiteral::Pos(a) => match eval_atom(a, theta)? {
                Some(g) => out.push(BodyLiteral::Pos(g)),
                None => return Ok(None),
            },
            BodyLiteral::Neg(a) => match eval_atom(a, theta)? {
                Some(g) => {
                    match ctx.derivable {
                        // Underivable atoms are false in every answer set;
                        // the literal is vacuously true.
                        Some(d) if !d.contains(&g) => {}
                        _ => out.push(BodyLiteral::Neg(g)),
                    }
                }
                None => return Ok(None),
            },
            BodyLiteral::Cmp(_, _, _) => {}
            BodyLiteral::Agg(agg) => match ground_aggregate(agg, theta, ctx)? {
                Some(g) => out.push(BodyLiteral::Agg(g)),
                None => return Ok(None),
            },
        }
    }
    Ok(Some(out))
}

fn ground_aggregate(
    agg: &Aggregate,
    theta: &Subst,
    ctx: &Ctx<'_>,
) -> Result<Option<Aggregate>, GroundError> {
    let Some(bound) = eval_term(&agg.bound, theta)? else {
        return Ok(None);
    };
    let mut elements: BTreeSet<AggElement> = BTreeSet::new();
    for e in &agg.elements {
        let cond_pos = positive_atoms(&e.condition);
        let mut theta_local = theta.clone();
        ctx.solve_positives::<GroundError, _>(&cond_pos, &mut theta_local, &mut |theta| {
            if !comparisons_hold(&e.condition, theta)? {
                return Ok(());
            }
            let Some(condition) = ground_condition(&e.condition, theta, ctx)? else {
                return Ok(());
            };
            let mut tuple = Vec::with_capacity(e.tuple.len());
            for t in &e.tuple {
                match eval_term(t, theta)? {
                    Some(g) => tuple.push(g),
                    None => return Ok(()),
                }
            }
            elements.insert(AggElement { tuple, condition });
            Ok(())
        })?;
    }
    Ok(Some(Aggregate {
        func: agg.func,
        elements: elements.into_iter().collect(),
        op: agg.op,
        bound,
    }))
}

/// Like `ground_body` but for element conditions (no nested aggregates).
fn ground_condition(
    cond: &[BodyLiteral],
    theta: &Subst,
    ctx: &Ctx<'_>,
) -> Result<Option<Vec<BodyLiteral>>, GroundError> {
    let mut out = Vec::new();
    for lit in cond {
        match lit {
            BodyLiteral::Pos(a) => match eval_atom(a, theta)? {
                Some(g) => out.push(BodyLiteral::Pos(g)),
                None => return Ok(None),
            },
            BodyLiteral::Neg(a) => match eval_atom(a, theta)? {
                Some(g) => match ctx.derivable {
                    Some(d) if !d.contains(&g) => {}
                    _ => out.push(BodyLiteral::Neg(g)),
                },
                None => return Ok(None),
            },
            BodyLiteral::Cmp(_, _, _) => {}
            BodyLiteral::Agg(_) => unreachable!("no nested aggregates"),
        }
    }
    Ok(Some(out))
}

fn emit_rule(
    rule: &Rule,
    rule_idx: usize,
    ctx: &Ctx<'_>,
    rules_out: &mut BTreeSet<Rule>,
    choice_atoms: &mut BTreeSet<Atom>,
) -> Result<(), GroundError> {
    let pos = positive_atoms(&rule.body);
    let mut theta = Subst::new();
    ctx.solve_positives::<GroundError, _>(&pos, &mut theta, &mut |theta| {
        if !comparisons_hold(&rule.body, theta)? {
            return Ok(());
        }
        let Some(body) = ground_body(&rule.body, theta, ctx)? else {
            return Ok(());
        };
        match &rule.head {
            HeadForm::Disjunction(atoms) => {
                let mut head = Vec::with_capacity(atoms.len());
                for a in atoms {
                    match eval_atom(a, theta)? {
                        Some(g) => head.push(g),
                        None => return Ok(()),
                    }
                }
                rules_out.insert(Rule { head: HeadForm::Disjunction(head), body });
            }
            HeadForm::Choice { lower, upper, elements } => {
                desugar_choice(
                    rule, rule_idx, lower, upper, elements, &body, theta, ctx, rules_out,
                    choice_atoms,
                )?;
            }
        }
        Ok(())
    })
}

#[allow(clippy::too_many_arguments)]
fn desugar_choice(
    rule: &Rule,
    rule_idx: usize,
    lower: &Option<Term>,
    upper: &Option<Term>,
    elements: &[ChoiceElement],
    body: &[BodyLiteral],
    theta: &mut Subst,
    ctx: &Ctx<'_>,
    rules_out: &mut BTreeSet<Rule>,
    choice_atoms: &mut BTreeSet<Atom>,
) -> Result<(), GroundError> {
    let eval_bound = |t: &Option<Term>, theta: &Subst| -> Result<Option<i64>, GroundError> {
        match t {
            None => Ok(None),
            Some(t) => match eval_term(t, theta)? {
                Some(Term::Int(n)) => Ok(Some(n)),
                _ => Err(GroundError::NonIntegerBound(rule.to_string())),
            },
        }
    };
    let lower = eval_bound(lower, theta)?;
    let upper = eval_bound(upper, theta)?;

    // Ground elements: (element atom, processed condition).
    let mut ground_elems: BTreeSet<(Atom, Vec<BodyLiteral>)> = BTreeSet::new();
    for e in elements {
        let cond_pos = positive_atoms(&e.condition);
        ctx.solve_positives::<GroundError, _>(&cond_pos, theta, &mut |theta| {
            if !comparisons_hold(&e.condition, theta)? {
                return Ok(());
            }
            let Some(cond) = ground_condition(&e.condition, theta, ctx)? else {
                return Ok(());
            };
            let mut all_vars = BTreeSet::new();
            e.atom.collect_vars(&mut all_vars);
            let free: Vec<String> =
                all_vars.into_iter().filter(|v| !theta.contains_key(v)).collect();
            ctx.enumerate_int_vars::<GroundError, _>(&free, theta, &mut |theta| {
                if let Some(g) = eval_atom(&e.atom, theta)? {
                    ground_elems.insert((g, cond.clone()));
                }
                Ok(())
            })
        })?;
    }

    // The standard two-rule guess with a fresh complement atom per element.
    for (h, cond) in &ground_elems {
        let aux = Atom::new(format!("{AUX_PREFIX}n{rule_idx}_{}", h.pred), h.args.clone());
        let mut b1 = body.to_vec();
        b1.extend(cond.iter().cloned());
        let mut b2 = b1.clone();
        b1.push(BodyLiteral::Neg(aux.clone()));
        b2.push(BodyLiteral::Neg(h.clone()));
        rules_out.insert(Rule { head: HeadForm::Disjunction(vec![h.clone()]), body: b1 });
        rules_out.insert(Rule { head: HeadForm::Disjunction(vec![aux.clone()]), body: b2 });
        choice_atoms.insert(aux);
    }

    let count_elements: Vec<AggElement> = ground_elems
        .iter()
        .map(|(h, cond)| {
            let mut tuple = vec![Term::Const(h.pred.clone())];
            tuple.extend(h.args.iter().cloned());
            let mut condition = cond.clone();
            condition.push(BodyLiteral::Pos(h.clone()));
            AggElement { tuple, condition }
        })
        .collect();

    if let Some(l) = lower {
        if l > 0 {
            let mut b = body.to_vec();
            b.push(BodyLiteral::Agg(Aggregate {
                func: crate::ast::AggFunc::Count,
                elements: count_elements.clone(),
                op: CmpOp::Lt,
                bound: Term::Int(l),
            }));
            rules_out.insert(Rule::constraint(b));
            // Redundant but propagation-friendly: not all elements false.
            let mut b = body.to_vec();
            for (h, _) in &ground_elems {
                b.push(BodyLiteral::Neg(h.clone()));
            }
            rules_out.insert(Rule::constraint(b));
        }
    }
    if let Some(u) = upper {
        let mut b = body.to_vec();
        b.push(BodyLiteral::Agg(Aggregate {
            func: crate::ast::AggFunc::Count,
            elements: count_elements,
            op: CmpOp::Gt,
            bound: Term::Int(u),
        }));
        rules_out.insert(Rule::constraint(b));
        if u == 1 {
            // Pairwise at-most-one, implied by the count constraint.
            let elems: Vec<&(Atom, Vec<BodyLiteral>)> = ground_elems.iter().collect();
            for i in 0..elems.len() {
                for j in (i + 1)..elems.len() {
                    let mut b = body.to_vec();
                    b.extend(elems[i].1.iter().cloned());
                    b.push(BodyLiteral::Pos(elems[i].0.clone()));
                    b.extend(elems[j].1.iter().cloned());
                    b.push(BodyLiteral::Pos(elems[j].0.clone()));
                    rules_out.insert(Rule::constraint(b));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program_text;

    fn prog(text: &str) -> Program {
        parse_program_text(text).unwrap()
    }

    #[test]
    fn universe_collects_constants() {
        let p = prog("p(1). q(X) :- p(X).");
        assert_eq!(herbrand_universe(&p), [Term::Int(1)].into_iter().collect());
    }

    #[test]
    fn universe_defaults_to_u0() {
        let p = prog("p :- q.");
        assert_eq!(
            herbrand_universe(&p),
            [Term::Const("u0".to_string())].into_iter().collect()
        );
    }

    #[test]
    fn simple_instantiation() {
        let p = prog("q(a). q(b). p(X) :- q(X).");
        let g = ground(&p).unwrap();
        let text: Vec<String> = g.rules.iter().map(|r| r.to_string()).collect();
        assert!(text.contains(&"p(a) :- q(a).".to_string()));
        assert!(text.contains(&"p(b) :- q(b).".to_string()));
        assert!(text.contains(&"q(a).".to_string()));
        assert_eq!(g.rules.len(), 4);
    }

    #[test]
    fn interval_facts_expand() {
        let p = prog("pebble(0..2).");
        let g = ground(&p).unwrap();
        let text: Vec<String> = g.rules.iter().map(|r| r.to_string()).collect();
        assert_eq!(text, vec!["pebble(0).", "pebble(1).", "pebble(2)."]);
    }

    #[test]
    fn arithmetic_in_heads_evaluates() {
        let p = prog(
            "onnode(x,3,0). move(x,y,1). onnode(X,N-2,S) :- onnode(X,N,S-1), move(X,Y,S).",
        );
        let g = ground_pruned(&p).unwrap();
        let text: Vec<String> = g.rules.iter().map(|r| r.to_string()).collect();
        assert!(
            text.iter().any(|t| t.contains("onnode(x,1,1)")),
            "expected onnode(x,1,1) in {text:?}"
        );
    }

    #[test]
    fn ground_is_identity_on_ground_sugarfree_input() {
        let p = prog("a :- not b. b :- not a. c | d :- a.");
        let g = ground(&p).unwrap();
        let got: BTreeSet<Rule> = g.rules.iter().cloned().collect();
        let want: BTreeSet<Rule> = p.rules.iter().cloned().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn grounding_is_idempotent() {
        let p = prog("q(a). q(b). p(X) :- q(X), not r(X). r(a).");
        let g1 = ground(&p).unwrap();
        let g2 = ground(&g1.to_program()).unwrap();
        assert_eq!(g1.rules, g2.rules);
        let g1 = ground_pruned(&p).unwrap();
        let g2 = ground_pruned(&g1.to_program()).unwrap();
        assert_eq!(g1.rules, g2.rules);
    }

    #[test]
    fn division_by_zero_is_reported() {
        let p = prog("q(0). p(X) :- q(X), r(1/X).");
        // 1/X with X=0; the positive literal r(..) forces evaluation.
        assert_eq!(ground(&p).unwrap_err(), GroundError::DivisionByZero);
    }

    #[test]
    fn overflow_is_reported() {
        let p = prog(&format!("q({}). p(X+1) :- q(X).", i64::MAX));
        assert_eq!(ground(&p).unwrap_err(), GroundError::Overflow);
    }

    #[test]
    fn comparison_filters_instances() {
        let p = prog("q(1). q(2). q(3). p(X) :- q(X), X < 3.");
        let g = ground_pruned(&p).unwrap();
        let heads: Vec<String> = g
            .rules
            .iter()
            .filter(|r| !r.is_fact())
            .map(|r| r.to_string())
            .collect();
        assert_eq!(heads, vec!["p(1) :- q(1).", "p(2) :- q(2)."]);
    }

    #[test]
    fn choice_desugars_to_guess_pairs() {
        let p = prog("b(1). b(2). 1 {a(X) : b(X)} 1.");
        let g = ground_pruned(&p).unwrap();
        assert_eq!(g.choice_atoms.len(), 2);
        let text: Vec<String> = g.rules.iter().map(|r| r.to_string()).collect();
        assert!(text.iter().any(|t| t.contains("a(1) :- b(1), not _aux_")), "{text:?}");
        assert!(text.iter().any(|t| t.contains("#count")), "{text:?}");
    }

    #[test]
    fn base_covers_predicates_over_universe() {
        let p = prog("a(1) | a(2).");
        let g = ground(&p).unwrap();
        assert_eq!(
            g.base,
            [
                Atom::new("a", vec![Term::Int(1)]),
                Atom::new("a", vec![Term::Int(2)])
            ]
            .into_iter()
            .collect()
        );
    }

    #[test]
    fn unsafe_rule_is_rejected() {
        use crate::ast::{HeadForm, Rule};
        let r = Rule {
            head: HeadForm::Disjunction(vec![Atom::new("p", vec![Term::Var("X".into())])]),
            body: vec![],
        };
        let p = Program::new(vec![r]);
        assert!(matches!(ground(&p), Err(GroundError::Unsafe(_))));
    }
}
