//! Python bindings: parse problems, decide regularity, and run the bounded
//! oracles from Python.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use termreg::decider::{decide, DecideOptions, ProcessingOrder, Verdict};
use termreg::oracle::{gen_hardness_instance, union_is_universal, witness_dta, Slice, TermArena};
use termreg::problem::{Compiled, ProblemFile};
use termreg::report::Report;
use termreg::term::parse_ground;

create_exception!(pytermreg, TermregError, PyException);

const ARENA_CAP: usize = 5_000_000;

fn py_err(e: termreg::Error) -> PyErr {
    TermregError::new_err(e.to_string())
}

/// A problem: a signature, automata, constrained variables and patterns.
#[pyclass(module = "pytermreg", name = "Problem")]
struct PyProblem {
    file: ProblemFile,
    compiled: Compiled,
}

impl PyProblem {
    fn from_file(file: ProblemFile) -> PyResult<Self> {
        let compiled = file.compile().map_err(py_err)?;
        Ok(PyProblem { file, compiled })
    }
}

#[pymethods]
impl PyProblem {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Self::from_file(ProblemFile::parse(text).map_err(py_err)?)
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| TermregError::new_err(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn to_text(&self) -> String {
        self.file.to_text()
    }

    #[getter]
    fn patterns(&self) -> Vec<String> {
        self.file
            .patterns
            .iter()
            .map(|s| s.display(&self.file.sig, Some(&self.file.vars)).to_string())
            .collect()
    }

    #[getter]
    fn notices(&self) -> Vec<String> {
        self.compiled.notices.clone()
    }

    /// Whether a ground term (in the problem's signature) is an instance.
    fn is_instance(&self, term: &str) -> PyResult<bool> {
        let t = parse_ground(term, &self.file.sig).map_err(py_err)?;
        Ok(self.compiled.problem.is_instance(&self.compiled.encoding.encode(&t)))
    }

    /// Instances up to a height, in the binary coding's height order.
    #[pyo3(signature = (max_height = 2))]
    fn instances(&self, max_height: usize) -> PyResult<Vec<String>> {
        let p = &self.compiled.problem;
        let arena = TermArena::new(p.sig.clone(), max_height, ARENA_CAP).map_err(py_err)?;
        let mask = arena.problem_mask(p);
        mask.iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .map(|(i, _)| {
                let t = self.compiled.encoding.decode(&arena.term(i as u32)).map_err(py_err)?;
                Ok(t.display(&self.file.sig, None).to_string())
            })
            .collect()
    }

    #[pyo3(signature = (witnesses = 10, seed_order = None, trace = false))]
    fn decide(&self, py: Python<'_>, witnesses: usize, seed_order: Option<u64>, trace: bool) -> PyResult<PyDecision> {
        let opts = DecideOptions {
            witnesses,
            trace,
            order: seed_order.map_or(ProcessingOrder::Canonical, ProcessingOrder::Seeded),
            ..Default::default()
        };
        let decision = py
            .detach(|| decide(&self.compiled.problem, &opts))
            .map_err(py_err)?;
        let report = Report::new(&self.file, &self.compiled, &decision, trace).map_err(py_err)?;
        Ok(PyDecision {
            problem: self.compiled.problem.clone(),
            decision,
            report,
        })
    }

    fn __repr__(&self) -> String {
        format!("Problem(patterns={:?})", self.patterns())
    }
}

/// The outcome of `Problem.decide`.
#[pyclass(module = "pytermreg", name = "Decision")]
struct PyDecision {
    problem: termreg::constraints::RegularConstraintProblem,
    decision: termreg::decider::Decision,
    report: Report,
}

#[pymethods]
impl PyDecision {
    #[getter]
    fn regular(&self) -> bool {
        self.decision.verdict.is_regular()
    }

    #[getter]
    fn witnesses(&self) -> Vec<String> {
        self.report.witnesses.clone().unwrap_or_default()
    }

    #[getter]
    fn trace(&self) -> Vec<String> {
        self.decision.trace.clone()
    }

    fn to_json(&self) -> String {
        self.report.to_json()
    }

    /// Checks the verdict by brute force: the witness automaton against the
    /// instances up to `max_height`, or the witnesses for membership.
    #[pyo3(signature = (max_height = 3))]
    fn check(&self, py: Python<'_>, max_height: usize) -> PyResult<bool> {
        match &self.decision.verdict {
            Verdict::Regular(cert) => py.detach(|| {
                let w = witness_dta(&cert.patterns, &cert.constraint, Some(max_height), 1_000_000).map_err(py_err)?;
                let cmp = termreg::oracle::bounded_equal(Slice::Dta(&w), Slice::Problem(&self.problem), max_height, ARENA_CAP)
                    .map_err(py_err)?;
                Ok(cmp.equal)
            }),
            Verdict::NotRegular(r) => Ok(r.witnesses.iter().all(|w| self.problem.is_instance(w))),
        }
    }

    fn __repr__(&self) -> String {
        format!("Decision(regular={})", self.regular())
    }
}

/// Builds the hardness problem from the automata of a problem text.
#[pyfunction]
fn hardness_problem(text: &str) -> PyResult<PyProblem> {
    let file = ProblemFile::parse(text).map_err(py_err)?;
    let automata = file.compiled_automata().map_err(py_err)?;
    let prob = gen_hardness_instance(&automata).map_err(py_err)?;
    PyProblem::from_file(ProblemFile::from_problem(&prob).map_err(py_err)?)
}

/// Whether the automata of a problem text cover every ground term.
#[pyfunction]
fn union_universal(text: &str) -> PyResult<bool> {
    let file = ProblemFile::parse(text).map_err(py_err)?;
    let automata = file.compiled_automata().map_err(py_err)?;
    let refs: Vec<&termreg::Dta> = automata.iter().map(|a| &a.dta).collect();
    union_is_universal(&refs).map_err(py_err)
}

#[pymodule]
fn pytermreg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("TermregError", m.py().get_type::<TermregError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyDecision>()?;
    m.add_function(wrap_pyfunction!(hardness_problem, m)?)?;
    m.add_function(wrap_pyfunction!(union_universal, m)?)?;
    Ok(())
}
