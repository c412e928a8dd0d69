//! Randomized cross-checks between independent implementations: the
//! engine against subset brute force, quantified evaluation of a single
//! existential block against plain answer sets, and the QBF translation
//! against direct semantic evaluation. All sweeps are seeded and
//! reproducible.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Atom, BodyLiteral, HeadForm, Interpretation, Program, QuantifiedProgram, Quantifier, Rule};
use crate::engine::{brute_force_answer_sets, AnswerSets};
use crate::eval::{coherent, quantified_answer_sets};
use crate::ground::ground;
use crate::qbf::{eval_qbf, qbf_to_aspq, Matrix, Qbf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub name: String,
    pub total: usize,
    pub passed: usize,
    /// Reproduction text for the first few disagreements.
    pub failures: Vec<String>,
}

impl SweepReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}/{}", self.name, self.passed, self.total)?;
        for fail in &self.failures {
            writeln!(f, "  disagreement: {fail}")?;
        }
        Ok(())
    }
}

/// Random propositional program over atoms a0..a{n-1}.
pub fn gen_ground_program(rng: &mut ChaCha8Rng, disjunctive: bool) -> Program {
    gen_ground_program_sized(rng, disjunctive, 5, 6)
}

pub fn gen_ground_program_sized(
    rng: &mut ChaCha8Rng,
    disjunctive: bool,
    max_atoms: usize,
    max_rules: usize,
) -> Program {
    let n_atoms = rng.gen_range(2..=max_atoms);
    let atoms: Vec<Atom> = (0..n_atoms).map(|i| Atom::prop(&format!("a{i}"))).collect();
    let n_rules = rng.gen_range(1..=max_rules);
    let mut rules = Vec::new();
    for _ in 0..n_rules {
        let mut body = Vec::new();
        for a in &atoms {
            match rng.gen_range(0..4) {
                0 => body.push(BodyLiteral::Pos(a.clone())),
                1 => body.push(BodyLiteral::Neg(a.clone())),
                _ => {}
            }
        }
        let head = if rng.gen_bool(0.25) {
            Vec::new()
        } else {
            let width = if disjunctive && rng.gen_bool(0.4) { 2 } else { 1 };
            let mut head = Vec::new();
            for _ in 0..width {
                let a = atoms[rng.gen_range(0..n_atoms)].clone();
                if !head.contains(&a) {
                    head.push(a);
                }
            }
            head
        };
        rules.push(Rule { head: HeadForm::Disjunction(head), body });
    }
    Program::new(rules)
}

/// Random prenex QBF with up to three blocks over up to four variables.
pub fn gen_qbf(rng: &mut ChaCha8Rng) -> Qbf {
    gen_qbf_sized(rng, 4, 3, 3)
}

pub fn gen_qbf_sized(rng: &mut ChaCha8Rng, max_vars: u32, max_blocks: usize, max_rows: usize) -> Qbf {
    let n_vars = rng.gen_range(1..=max_vars);
    let n_blocks = rng.gen_range(1..=max_blocks.min(n_vars as usize));
    // Split 1..=n_vars into consecutive blocks.
    let mut cuts: Vec<u32> = (1..n_vars).collect();
    while cuts.len() > n_blocks - 1 {
        let i = rng.gen_range(0..cuts.len());
        cuts.remove(i);
    }
    cuts.push(n_vars);
    let mut prefix = Vec::new();
    let mut start = 1u32;
    for cut in cuts {
        let q = if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
        prefix.push((q, (start..=cut).collect::<Vec<u32>>()));
        start = cut + 1;
    }
    let n_rows = rng.gen_range(1..=max_rows);
    let rows: Vec<Vec<i64>> = (0..n_rows)
        .map(|_| {
            let width = rng.gen_range(1..=3);
            let mut row = Vec::new();
            for _ in 0..width {
                let v = rng.gen_range(1..=n_vars) as i64;
                let lit = if rng.gen_bool(0.5) { v } else { -v };
                if !row.contains(&lit) && !row.contains(&-lit) {
                    row.push(lit);
                }
            }
            row
        })
        .collect();
    let matrix = if rng.gen_bool(0.5) { Matrix::Cnf(rows) } else { Matrix::Dnf(rows) };
    Qbf { prefix, matrix }
}

fn sorted_models(models: Vec<Interpretation>) -> Vec<Interpretation> {
    let mut models = models;
    models.sort();
    models
}

/// Engine search against subset brute force.
pub fn sweep_engine(seed: u64, count: usize) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SweepReport {
        name: "engine vs brute force".into(),
        total: count,
        passed: 0,
        failures: Vec::new(),
    };
    for _ in 0..count {
        let p = gen_ground_program_sized(&mut rng, true, 12, 10);
        let g = match ground(&p) {
            Ok(g) => Arc::new(g),
            Err(e) => {
                report.failures.push(format!("grounding failed: {e}\n{p}"));
                continue;
            }
        };
        let brute = brute_force_answer_sets(&g).unwrap();
        let searched = sorted_models(AnswerSets::new(g).collect());
        if brute == searched {
            report.passed += 1;
        } else if report.failures.len() < 3 {
            report
                .failures
                .push(format!("brute {brute:?} vs search {searched:?} on:\n{p}"));
        }
    }
    report
}

/// A single existential block with an empty constraint program has
/// exactly the answer sets of its block.
pub fn sweep_single_quantifier(seed: u64, count: usize) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SweepReport {
        name: "single existential block vs plain answer sets".into(),
        total: count,
        passed: 0,
        failures: Vec::new(),
    };
    for _ in 0..count {
        let p = gen_ground_program_sized(&mut rng, false, 8, 12);
        let qp = QuantifiedProgram {
            blocks: vec![(Quantifier::Exists, p.clone())],
            constraint: Program::new(Vec::new()),
        };
        let g = ground(&p).unwrap();
        let plain = brute_force_answer_sets(&g).unwrap();
        let quantified = match quantified_answer_sets(&qp, None) {
            Ok(m) => sorted_models(m),
            Err(e) => {
                report.failures.push(format!("evaluation failed: {e}\n{p}"));
                continue;
            }
        };
        let verdict = coherent(&qp).unwrap().coherent;
        if plain == quantified && verdict == !plain.is_empty() {
            report.passed += 1;
        } else if report.failures.len() < 3 {
            report.failures.push(format!(
                "plain {plain:?} vs quantified {quantified:?} (coherent={verdict}) on:\n{p}"
            ));
        }
    }
    report
}

/// The QBF translation against direct semantic evaluation.
pub fn sweep_qbf(seed: u64, count: usize) -> SweepReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SweepReport {
        name: "qbf translation vs direct evaluation".into(),
        total: count,
        passed: 0,
        failures: Vec::new(),
    };
    for _ in 0..count {
        let f = gen_qbf_sized(&mut rng, 8, 4, 4);
        let direct = eval_qbf(&f).unwrap();
        let qp = qbf_to_aspq(&f).unwrap();
        let translated = coherent(&qp).unwrap().coherent;
        if direct == translated {
            report.passed += 1;
        } else if report.failures.len() < 3 {
            report
                .failures
                .push(format!("direct {direct} vs translated {translated} on {f:?}"));
        }
    }
    report
}

/// The standard battery used by the `selftest` command: 200 programs per
/// engine sweep and 500 formulas for the translation sweep, unless a
/// smaller count is requested.
pub fn run_all(seed: u64, count: Option<usize>) -> Vec<SweepReport> {
    vec![
        sweep_engine(seed, count.unwrap_or(200)),
        sweep_single_quantifier(seed.wrapping_add(1), count.unwrap_or(200)),
        sweep_qbf(seed.wrapping_add(2), count.unwrap_or(500)),
    ]
}
