//! Quantified boolean formulas in prenex normal form and their reduction
//! to quantified answer set programs.
//!
//! Each boolean variable `i` becomes a pair of atoms `x{i}` / `nx{i}`
//! guessed by the complementary rules `x :- not nx.` and `nx :- not x.`.
//! A CNF matrix yields one witness atom and one constraint per clause; a
//! DNF matrix yields one witness atom per cube and a single constraint
//! requiring some cube to hold.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{Atom, BodyLiteral, Program, QuantifiedProgram, Quantifier, Rule};

/// Literals are DIMACS-style signed variable numbers; a clause or cube is
/// a list of literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Matrix {
    Cnf(Vec<Vec<i64>>),
    Dnf(Vec<Vec<i64>>),
}

impl Matrix {
    pub fn rows(&self) -> &[Vec<i64>] {
        match self {
            Matrix::Cnf(rows) | Matrix::Dnf(rows) => rows,
        }
    }
}

/// A prenex QBF: alternating quantifier blocks over disjoint variable
/// sets, then a CNF or DNF matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf {
    pub prefix: Vec<(Quantifier, Vec<u32>)>,
    pub matrix: Matrix,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QbfError {
    #[error("too many variables for exhaustive evaluation: {0} (cap {1})")]
    TooManyVariables(usize, usize),
    #[error("literal references variable {0} outside the prefix")]
    UnboundLiteral(i64),
    #[error("empty quantifier block")]
    EmptyBlock,
}

impl Qbf {
    pub fn variables(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for (_, vars) in &self.prefix {
            out.extend(vars.iter().copied());
        }
        out
    }

    fn check(&self) -> Result<(), QbfError> {
        let bound: BTreeSet<u32> = self.variables().into_iter().collect();
        for (_, vars) in &self.prefix {
            if vars.is_empty() {
                return Err(QbfError::EmptyBlock);
            }
        }
        for row in self.matrix.rows() {
            for &lit in row {
                if !bound.contains(&(lit.unsigned_abs() as u32)) {
                    return Err(QbfError::UnboundLiteral(lit));
                }
            }
        }
        Ok(())
    }
}

fn var_atom(lit: i64) -> Atom {
    let v = lit.unsigned_abs();
    if lit > 0 {
        Atom::prop(&format!("x{v}"))
    } else {
        Atom::prop(&format!("nx{v}"))
    }
}

fn guess_rules(vars: &[u32]) -> Vec<Rule> {
    let mut rules = Vec::new();
    for &v in vars {
        let x = Atom::prop(&format!("x{v}"));
        let nx = Atom::prop(&format!("nx{v}"));
        rules.push(Rule {
            head: crate::ast::HeadForm::Disjunction(vec![x.clone()]),
            body: vec![BodyLiteral::Neg(nx.clone())],
        });
        rules.push(Rule {
            head: crate::ast::HeadForm::Disjunction(vec![nx]),
            body: vec![BodyLiteral::Neg(x)],
        });
    }
    rules
}

/// Translates a prenex QBF into an equivalent quantified program: one
/// program block of guess rules per quantifier block, and a constraint
/// program checking the matrix through per-row witness atoms.
pub fn qbf_to_aspq(qbf: &Qbf) -> Result<QuantifiedProgram, QbfError> {
    qbf.check()?;
    let blocks: Vec<(Quantifier, Program)> = qbf
        .prefix
        .iter()
        .map(|(q, vars)| (*q, Program::new(guess_rules(vars))))
        .collect();

    let mut constraint = Vec::new();
    match &qbf.matrix {
        Matrix::Cnf(clauses) => {
            for (j, clause) in clauses.iter().enumerate() {
                let ok = Atom::prop(&format!("ok{}", j + 1));
                for &lit in clause {
                    constraint.push(Rule {
                        head: crate::ast::HeadForm::Disjunction(vec![ok.clone()]),
                        body: vec![BodyLiteral::Pos(var_atom(lit))],
                    });
                }
                constraint.push(Rule::constraint(vec![BodyLiteral::Neg(ok)]));
            }
        }
        Matrix::Dnf(cubes) => {
            let mut all_neg = Vec::new();
            for (j, cube) in cubes.iter().enumerate() {
                let ok = Atom::prop(&format!("ok{}", j + 1));
                constraint.push(Rule {
                    head: crate::ast::HeadForm::Disjunction(vec![ok.clone()]),
                    body: cube.iter().map(|&l| BodyLiteral::Pos(var_atom(l))).collect(),
                });
                all_neg.push(BodyLiteral::Neg(ok));
            }
            constraint.push(Rule::constraint(all_neg));
        }
    }

    Ok(QuantifiedProgram {
        blocks,
        constraint: Program::new(constraint),
    })
}

pub const DEFAULT_VAR_CAP: usize = 16;

/// Exhaustive semantic evaluation, exponential in the number of
/// variables; intended as the cross-check oracle only.
pub fn eval_qbf(qbf: &Qbf) -> Result<bool, QbfError> {
    eval_qbf_capped(qbf, DEFAULT_VAR_CAP)
}

pub fn eval_qbf_capped(qbf: &Qbf, cap: usize) -> Result<bool, QbfError> {
    qbf.check()?;
    let vars = qbf.variables();
    if vars.len() > cap {
        return Err(QbfError::TooManyVariables(vars.len(), cap));
    }
    let mut assignment = BTreeSet::new();
    Ok(eval_prefix(&qbf.prefix, &qbf.matrix, &mut assignment))
}

fn eval_prefix(
    prefix: &[(Quantifier, Vec<u32>)],
    matrix: &Matrix,
    assignment: &mut BTreeSet<u32>,
) -> bool {
    let Some(((q, vars), rest)) = prefix.split_first() else {
        return eval_matrix(matrix, assignment);
    };
    let n = vars.len();
    for mask in 0u64..(1u64 << n) {
        for (i, &v) in vars.iter().enumerate() {
            if mask >> i & 1 == 1 {
                assignment.insert(v);
            } else {
                assignment.remove(&v);
            }
        }
        let sub = eval_prefix(rest, matrix, assignment);
        match q {
            Quantifier::Exists if sub => {
                for v in vars {
                    assignment.remove(v);
                }
                return true;
            }
            Quantifier::Forall if !sub => {
                for v in vars {
                    assignment.remove(v);
                }
                return false;
            }
            _ => {}
        }
    }
    for v in vars {
        assignment.remove(v);
    }
    matches!(q, Quantifier::Forall)
}

fn eval_matrix(matrix: &Matrix, assignment: &BTreeSet<u32>) -> bool {
    let lit_true = |lit: i64| {
        let v = lit.unsigned_abs() as u32;
        (lit > 0) == assignment.contains(&v)
    };
    match matrix {
        Matrix::Cnf(clauses) => clauses.iter().all(|c| c.iter().any(|&l| lit_true(l))),
        Matrix::Dnf(cubes) => cubes.iter().any(|c| c.iter().all(|&l| lit_true(l))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qbf(prefix: Vec<(Quantifier, Vec<u32>)>, matrix: Matrix) -> Qbf {
        Qbf { prefix, matrix }
    }

    #[test]
    fn eval_simple_cnf() {
        // exists x1: x1 is true.
        let f = qbf(
            vec![(Quantifier::Exists, vec![1])],
            Matrix::Cnf(vec![vec![1]]),
        );
        assert!(eval_qbf(&f).unwrap());
        // forall x1: x1 is false.
        let f = qbf(
            vec![(Quantifier::Forall, vec![1])],
            Matrix::Cnf(vec![vec![1]]),
        );
        assert!(!eval_qbf(&f).unwrap());
    }

    #[test]
    fn eval_alternation() {
        // forall x1 exists x2: x1 <-> x2 (CNF: (-1 2) (1 -2)) is true.
        let f = qbf(
            vec![(Quantifier::Forall, vec![1]), (Quantifier::Exists, vec![2])],
            Matrix::Cnf(vec![vec![-1, 2], vec![1, -2]]),
        );
        assert!(eval_qbf(&f).unwrap());
        // exists x2 forall x1: x1 <-> x2 is false.
        let f = qbf(
            vec![(Quantifier::Exists, vec![2]), (Quantifier::Forall, vec![1])],
            Matrix::Cnf(vec![vec![-1, 2], vec![1, -2]]),
        );
        assert!(!eval_qbf(&f).unwrap());
    }

    #[test]
    fn eval_dnf() {
        // forall x1: x1 or not x1 (DNF cubes {1} {-1}) is true.
        let f = qbf(
            vec![(Quantifier::Forall, vec![1])],
            Matrix::Dnf(vec![vec![1], vec![-1]]),
        );
        assert!(eval_qbf(&f).unwrap());
    }

    #[test]
    fn empty_cnf_is_true_empty_clause_is_false() {
        let f = qbf(vec![(Quantifier::Exists, vec![1])], Matrix::Cnf(vec![]));
        assert!(eval_qbf(&f).unwrap());
        let f = qbf(vec![(Quantifier::Exists, vec![1])], Matrix::Cnf(vec![vec![]]));
        assert!(!eval_qbf(&f).unwrap());
    }

    #[test]
    fn translation_shape_cnf() {
        let f = qbf(
            vec![(Quantifier::Forall, vec![1]), (Quantifier::Exists, vec![2])],
            Matrix::Cnf(vec![vec![-1, 2]]),
        );
        let qp = qbf_to_aspq(&f).unwrap();
        assert_eq!(qp.blocks.len(), 2);
        assert_eq!(qp.blocks[0].0, Quantifier::Forall);
        assert_eq!(qp.blocks[0].1.rules.len(), 2);
        let text = qp.to_string();
        assert!(text.contains("x1 :- not nx1."), "{text}");
        assert!(text.contains("ok1 :- nx1."), "{text}");
        assert!(text.contains("ok1 :- x2."), "{text}");
        assert!(text.contains(":- not ok1."), "{text}");
    }

    #[test]
    fn translation_shape_dnf() {
        let f = qbf(
            vec![(Quantifier::Forall, vec![1])],
            Matrix::Dnf(vec![vec![1], vec![-1]]),
        );
        let qp = qbf_to_aspq(&f).unwrap();
        let text = qp.to_string();
        assert!(text.contains("ok1 :- x1."), "{text}");
        assert!(text.contains("ok2 :- nx1."), "{text}");
        assert!(text.contains(":- not ok1, not ok2."), "{text}");
    }

    #[test]
    fn unbound_literal_is_rejected() {
        let f = qbf(vec![(Quantifier::Exists, vec![1])], Matrix::Cnf(vec![vec![2]]));
        assert_eq!(qbf_to_aspq(&f).unwrap_err(), QbfError::UnboundLiteral(2));
    }

    #[test]
    fn variable_cap_is_enforced() {
        let vars: Vec<u32> = (1..=17).collect();
        let f = qbf(vec![(Quantifier::Exists, vars)], Matrix::Cnf(vec![vec![1]]));
        assert_eq!(
            eval_qbf(&f).unwrap_err(),
            QbfError::TooManyVariables(17, 16)
        );
    }
}
