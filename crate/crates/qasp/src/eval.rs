//! Evaluation of quantified programs.
//!
//! A quantified program is coherent when the quantifier blocks can be
//! resolved recursively: an existential level needs some answer set of
//! its (combined) program whose fixing makes the rest coherent, a
//! universal level needs that for every answer set. The final level
//! checks that the constraint program combined with the last fixed model
//! has an answer set.
//!
//! Answer sets are streamed level by level and the recursion
//! short-circuits on the first decisive branch, so memory stays linear
//! in the number of levels times the size of one ground program.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::ast::{Atom, Interpretation, Program, QuantifiedProgram, Quantifier, Rule};
use crate::engine::{AnswerSets, EngineError};
use crate::ground::{ground_pruned, GroundError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("model atom {0} is outside the Herbrand base being fixed")]
    FixOutsideBase(Atom),
    #[error("quantified answer sets defined only for existential programs")]
    NotExistential,
    #[error("quantified program has no blocks")]
    NoBlocks,
}

/// The program that pins an interpretation: a fact per atom of `m`, a
/// constraint per base atom absent from `m`.
pub fn fix(base: &BTreeSet<Atom>, m: &Interpretation) -> Result<Program, EvalError> {
    if let Some(a) = m.atoms.iter().find(|a| !base.contains(*a)) {
        return Err(EvalError::FixOutsideBase(a.clone()));
    }
    let mut rules = Vec::new();
    for a in &m.atoms {
        rules.push(Rule::fact(a.clone()));
    }
    for a in base {
        if !m.contains(a) {
            rules.push(Rule::constraint(vec![crate::ast::BodyLiteral::Pos(a.clone())]));
        }
    }
    Ok(Program::new(rules))
}

/// The next level's program with the previous model pinned.
pub fn combine(next: &Program, base: &BTreeSet<Atom>, m: &Interpretation) -> Result<Program, EvalError> {
    Ok(next.union(&fix(base, m)?))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LevelStats {
    /// Answer sets consumed at this level before the verdict.
    pub branches: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub levels: Vec<LevelStats>,
    pub time_ms: u128,
}

/// One decisive model per level: the witness chain for a coherent
/// existential level, the counterexample chain for an incoherent
/// universal one. The chain stops at the first level decided by
/// exhaustion rather than by a single model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub quantifier: Quantifier,
    pub model: Interpretation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub coherent: bool,
    pub trace: Vec<TraceStep>,
    pub stats: EvalStats,
}

#[derive(Debug, Clone, Copy)]
pub struct EvalConfig {
    /// With short-circuiting off every branch is explored; verdicts must
    /// not change. Exists for cross-checking only.
    pub short_circuit: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { short_circuit: true }
    }
}

pub fn coherent(qp: &QuantifiedProgram) -> Result<Verdict, EvalError> {
    coherent_with(qp, EvalConfig::default())
}

pub fn coherent_with(qp: &QuantifiedProgram, config: EvalConfig) -> Result<Verdict, EvalError> {
    if qp.blocks.is_empty() {
        return Err(EvalError::NoBlocks);
    }
    let start = Instant::now();
    let mut stats = EvalStats {
        levels: vec![LevelStats::default(); qp.blocks.len()],
        time_ms: 0,
    };
    let mut eval = Eval { qp, config, stats: &mut stats };
    let (coherent, trace) = eval.level(0, &qp.blocks[0].1)?;
    stats.time_ms = start.elapsed().as_millis();
    Ok(Verdict { coherent, trace, stats })
}

struct Eval<'a> {
    qp: &'a QuantifiedProgram,
    config: EvalConfig,
    stats: &'a mut EvalStats,
}

impl Eval<'_> {
    /// Evaluates quantifier level `level` over `current`, the level's
    /// program combined with the fixing of the previous model.
    fn level(&mut self, level: usize, current: &Program) -> Result<(bool, Vec<TraceStep>), EvalError> {
        let quantifier = self.qp.blocks[level].0;
        let g = ground_pruned(current)?;
        let base = g.user_base();
        let stream = AnswerSets::new(Arc::new(g));
        // With short-circuiting off the decisive branch is still the
        // first one found; later branches are explored and discarded.
        let mut decided: Option<(bool, Vec<TraceStep>)> = None;
        for m in stream {
            self.stats.levels[level].branches += 1;
            let visible = m.without_aux();
            let pinned = fix(&base, &visible)?;
            let (sub, sub_trace) = if level + 1 < self.qp.blocks.len() {
                let next = self.qp.blocks[level + 1].1.union(&pinned);
                self.level(level + 1, &next)?
            } else {
                (self.constraint_holds(&pinned)?, Vec::new())
            };
            let decisive = match quantifier {
                Quantifier::Exists => sub,
                Quantifier::Forall => !sub,
            };
            if decisive && decided.is_none() {
                let mut trace = vec![TraceStep { quantifier, model: visible }];
                trace.extend(sub_trace);
                decided = Some((sub, trace));
                if self.config.short_circuit {
                    break;
                }
            }
        }
        Ok(decided.unwrap_or_else(|| {
            // Exhausted without a decisive branch: a universal level is
            // vacuously or unanimously coherent, an existential level
            // (including one with no answer sets at all) is incoherent.
            (quantifier == Quantifier::Forall, Vec::new())
        }))
    }

    /// Final check: the constraint program pinned to the last model must
    /// have an answer set.
    fn constraint_holds(&mut self, pinned: &Program) -> Result<bool, EvalError> {
        let combined = self.qp.constraint.union(pinned);
        let g = ground_pruned(&combined)?;
        Ok(AnswerSets::new(Arc::new(g)).next().is_some())
    }
}

/// Lazy stream of quantified answer sets: the answer sets of the first
/// (existential) block whose fixing leaves the rest coherent. Models are
/// reported without desugaring artifacts.
pub struct QuantifiedAnswerSets<'a> {
    qp: &'a QuantifiedProgram,
    base: BTreeSet<Atom>,
    stream: AnswerSets,
    stats: EvalStats,
}

impl<'a> QuantifiedAnswerSets<'a> {
    pub fn new(qp: &'a QuantifiedProgram) -> Result<Self, EvalError> {
        if qp.blocks.is_empty() {
            return Err(EvalError::NoBlocks);
        }
        if !qp.is_existential() {
            return Err(EvalError::NotExistential);
        }
        let g = ground_pruned(&qp.blocks[0].1)?;
        let base = g.user_base();
        Ok(QuantifiedAnswerSets {
            qp,
            base,
            stream: AnswerSets::new(Arc::new(g)),
            stats: EvalStats {
                levels: vec![LevelStats::default(); qp.blocks.len()],
                time_ms: 0,
            },
        })
    }

    pub fn stats(&self) -> &EvalStats {
        &self.stats
    }
}

impl Iterator for QuantifiedAnswerSets<'_> {
    type Item = Result<Interpretation, EvalError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let m = self.stream.next()?;
            self.stats.levels[0].branches += 1;
            let visible = m.without_aux();
            let pinned = match fix(&self.base, &visible) {
                Ok(p) => p,
                Err(e) => return Some(Err(e)),
            };
            let mut eval = Eval {
                qp: self.qp,
                config: EvalConfig::default(),
                stats: &mut self.stats,
            };
            let sub = if self.qp.blocks.len() > 1 {
                let next = self.qp.blocks[1].1.union(&pinned);
                eval.level(1, &next).map(|(b, _)| b)
            } else {
                eval.constraint_holds(&pinned)
            };
            match sub {
                Ok(true) => return Some(Ok(visible)),
                Ok(false) => continue,
                Err(e) => return Some(Err(e)),
            }
        }
    }
}

/// Convenience wrapper: collects up to `limit` quantified answer sets.
pub fn quantified_answer_sets(
    qp: &QuantifiedProgram,
    limit: Option<usize>,
) -> Result<Vec<Interpretation>, EvalError> {
    let mut out = Vec::new();
    for m in QuantifiedAnswerSets::new(qp)? {
        out.push(m?);
        if limit.is_some_and(|l| out.len() >= l) {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_aspq, parse_program_text};

    const EXAMPLE: &str = "\
%@exists
a(1) | a(2).
%@forall
b(1) | b(2) :- a(1).
b(2) :- a(2).
%@constraint
:- b(1), not b(2).
";

    fn qp(text: &str) -> QuantifiedProgram {
        parse_aspq(text).unwrap()
    }

    #[test]
    fn fix_pins_a_model() {
        let p = parse_program_text("a(1) | a(2).").unwrap();
        let g = crate::ground::ground(&p).unwrap();
        let m: Interpretation = [Atom::new("a", vec![crate::ast::Term::Int(1)])]
            .into_iter()
            .collect();
        let f = fix(&g.user_base(), &m).unwrap();
        assert_eq!(f.to_string(), "a(1).\n:- a(2).\n");
    }

    #[test]
    fn fix_rejects_foreign_atoms() {
        let base = BTreeSet::new();
        let m: Interpretation = [Atom::prop("z")].into_iter().collect();
        assert!(matches!(fix(&base, &m), Err(EvalError::FixOutsideBase(_))));
    }

    #[test]
    fn alternation_example_is_coherent() {
        let v = coherent(&qp(EXAMPLE)).unwrap();
        assert!(v.coherent);
        // The witness at the existential level must be a(2): fixing a(1)
        // admits the counterexample {a(1),b(1)}.
        assert_eq!(v.trace[0].quantifier, Quantifier::Exists);
        assert_eq!(v.trace[0].model.to_string(), "{a(2)}");
    }

    #[test]
    fn quantified_answer_sets_of_example() {
        let qp = qp(EXAMPLE);
        let models = quantified_answer_sets(&qp, None).unwrap();
        let text: Vec<String> = models.iter().map(|m| m.to_string()).collect();
        assert_eq!(text, vec!["{a(2)}"]);
    }

    #[test]
    fn forall_root_rejects_model_enumeration() {
        let text = EXAMPLE.replace("%@exists", "%@forall").replace("%@forall\nb", "%@exists\nb");
        let qp = qp(&text);
        assert!(matches!(
            QuantifiedAnswerSets::new(&qp).err(),
            Some(EvalError::NotExistential)
        ));
    }

    #[test]
    fn exists_over_empty_stream_is_incoherent() {
        let v = coherent(&qp("%@exists\na :- not a.\n%@constraint\nb.\n")).unwrap();
        assert!(!v.coherent);
        assert!(v.trace.is_empty());
    }

    #[test]
    fn forall_over_empty_stream_is_coherent() {
        let v = coherent(&qp("%@forall\na :- not a.\n%@constraint\n:- b.\n")).unwrap();
        assert!(v.coherent);
    }

    #[test]
    fn constraint_violation_detected() {
        let v = coherent(&qp("%@exists\na.\n%@constraint\n:- a.\n")).unwrap();
        assert!(!v.coherent);
        let v = coherent(&qp("%@exists\na.\n%@constraint\n:- not a.\n")).unwrap();
        assert!(v.coherent);
    }

    #[test]
    fn short_circuit_does_not_change_verdicts() {
        for text in [
            EXAMPLE,
            "%@exists\na | b.\n%@forall\nc | d :- a.\n%@constraint\n:- c.\n",
            "%@forall\na | b.\n%@exists\nc :- not d. d :- not c.\n%@constraint\n:- a, not c.\n",
        ] {
            let qp = qp(text);
            let fast = coherent(&qp).unwrap();
            let slow = coherent_with(&qp, EvalConfig { short_circuit: false }).unwrap();
            assert_eq!(fast.coherent, slow.coherent, "{text}");
        }
    }

    #[test]
    fn stats_count_branches_per_level() {
        let v = coherent(&qp(EXAMPLE)).unwrap();
        assert_eq!(v.stats.levels.len(), 2);
        // The enumeration order tries a(2) first; it succeeds at once.
        assert_eq!(v.stats.levels[0].branches, 1);
        assert!(v.stats.levels[1].branches >= 1);
    }
}
