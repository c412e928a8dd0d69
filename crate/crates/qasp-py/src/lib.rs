//! Python bindings: a program class wrapping parsing, coherence, model
//! enumeration and grounding, plus module-level helpers for the QBF
//! translation and the randomized self-test battery.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use qasp::ast::Interpretation;
use qasp::eval::{coherent, quantified_answer_sets};
use qasp::ground::ground;
use qasp::parser::{parse_aspq, parse_qbf_file};
use qasp::qbf::qbf_to_aspq;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn model_atoms(m: &Interpretation) -> Vec<String> {
    m.atoms.iter().map(|a| a.to_string()).collect()
}

/// A quantified answer set program.
#[pyclass(name = "Program")]
struct Program {
    inner: qasp::ast::QuantifiedProgram,
}

#[pymethods]
impl Program {
    /// Parses the sectioned text format (%@exists / %@forall /
    /// %@constraint).
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Program { inner: parse_aspq(text).map_err(err)? })
    }

    /// Number of quantifier blocks.
    #[getter]
    fn levels(&self) -> usize {
        self.inner.blocks.len()
    }

    /// Whether the outermost quantifier is existential.
    #[getter]
    fn existential(&self) -> bool {
        self.inner.is_existential()
    }

    /// Decides coherence.
    fn coherent(&self) -> PyResult<bool> {
        Ok(coherent(&self.inner).map_err(err)?.coherent)
    }

    /// Quantified answer sets as lists of atom strings; `limit` bounds
    /// how many are enumerated.
    #[pyo3(signature = (limit=None))]
    fn models(&self, limit: Option<usize>) -> PyResult<Vec<Vec<String>>> {
        let models = quantified_answer_sets(&self.inner, limit).map_err(err)?;
        Ok(models.iter().map(model_atoms).collect())
    }

    /// Per-level branch counts of the last coherence check.
    fn branch_counts(&self) -> PyResult<Vec<u64>> {
        let v = coherent(&self.inner).map_err(err)?;
        Ok(v.stats.levels.iter().map(|l| l.branches).collect())
    }

    /// The grounding of every block, in the sectioned text format.
    fn ground(&self) -> PyResult<String> {
        let mut out = String::new();
        for (q, p) in &self.inner.blocks {
            out.push_str(&format!("%@{q}\n"));
            let g = ground(p).map_err(err)?;
            out.push_str(&qasp::ast::Program::new(g.rules).to_string());
        }
        out.push_str("%@constraint\n");
        let g = ground(&self.inner.constraint).map_err(err)?;
        out.push_str(&qasp::ast::Program::new(g.rules).to_string());
        Ok(out)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

/// Translates a prenex QBF (QDIMACS or the DNF dialect) into a program.
#[pyfunction]
fn from_qbf(text: &str) -> PyResult<Program> {
    let qbf = parse_qbf_file(text).map_err(err)?;
    Ok(Program { inner: qbf_to_aspq(&qbf).map_err(err)? })
}

/// Evaluates a prenex QBF directly, without the answer set translation.
#[pyfunction]
fn eval_qbf(text: &str) -> PyResult<bool> {
    let qbf = parse_qbf_file(text).map_err(err)?;
    qasp::qbf::eval_qbf(&qbf).map_err(err)
}

/// Answer sets of a plain (unquantified) program.
#[pyfunction]
fn answer_sets(text: &str) -> PyResult<Vec<Vec<String>>> {
    let p = qasp::parser::parse_program_text(text).map_err(err)?;
    let g = qasp::ground::ground_pruned(&p).map_err(err)?;
    let sets: Vec<Vec<String>> = qasp::engine::AnswerSets::new(std::sync::Arc::new(g))
        .map(|m| model_atoms(&m.without_aux()))
        .collect();
    Ok(sets)
}

/// Runs the randomized cross-check sweeps; returns one report line per
/// sweep and raises when any sweep finds a disagreement.
#[pyfunction]
#[pyo3(signature = (seed=0, count=50))]
fn selftest(seed: u64, count: usize) -> PyResult<Vec<String>> {
    let reports = qasp::selftest::run_all(seed, Some(count));
    if let Some(bad) = reports.iter().find(|r| !r.ok()) {
        return Err(PyValueError::new_err(bad.to_string()));
    }
    Ok(reports.iter().map(|r| r.to_string().trim_end().to_string()).collect())
}

#[pymodule]
fn qasp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_function(wrap_pyfunction!(from_qbf, m)?)?;
    m.add_function(wrap_pyfunction!(eval_qbf, m)?)?;
    m.add_function(wrap_pyfunction!(answer_sets, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}
