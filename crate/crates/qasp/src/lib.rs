//! Answer set programming with quantifiers over stable models.
//!
//! A quantified program stacks existential and universal quantifier
//! blocks of ASP programs over a final stratified constraint program.
//! This crate parses such programs, grounds them, decides coherence by
//! streaming answer sets level by level, enumerates quantified answer
//! sets of existential programs, and translates prenex QBF instances
//! into equivalent quantified programs.

pub mod ast;
pub mod corpus;
pub mod engine;
pub mod eval;
pub mod ground;
pub mod parser;
pub mod qbf;
pub mod selftest;

pub use ast::{Atom, Interpretation, Program, QuantifiedProgram, Quantifier, Rule, Term};
pub use engine::{brute_force_answer_sets, is_answer_set, AnswerSets};
pub use eval::{coherent, quantified_answer_sets, Verdict};
pub use ground::{ground, ground_pruned, GroundProgram};
pub use parser::{parse_aspq, parse_program_text, parse_qbf_file};
pub use qbf::{eval_qbf, qbf_to_aspq, Qbf};
