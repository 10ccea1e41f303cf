//! Python bindings: words, small-cancellation and one-relator membership,
//! the Grigorchuk oracle, lattice covering numbers and fingerprint distances.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mgl_core::cancellation::{self, Lambda, Presentation};
use mgl_core::grigorchuk::{self as grig, GrigWord, OracleSeq};
use mgl_core::lattice::{self, LatticePoint};
use mgl_core::metric::{self, Distance};
use mgl_core::one_relator::{self, PowerRelator};
use mgl_core::{word, BallFingerprint, Budget, Error};

create_exception!(mgl, BudgetExceeded, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    if e.is_budget() {
        BudgetExceeded::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn budget(limit: Option<u64>) -> Budget {
    limit.map(Budget::new).unwrap_or_else(Budget::from_env)
}

fn parse_words(texts: &[String]) -> PyResult<Vec<word::Word>> {
    texts.iter().map(|t| word::Word::parse(t).map_err(py_err)).collect()
}

fn parse_lambda(text: &str) -> PyResult<Lambda> {
    text.parse().map_err(py_err)
}

/// A freely reduced word; `a` is the first generator and `A` its inverse.
#[pyclass(frozen, eq, hash, skip_from_py_object, module = "mgl")]
#[derive(Clone, PartialEq, Eq, Hash)]
struct Word(word::Word);

#[pymethods]
impl Word {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        word::Word::parse(text).map(Word).map_err(py_err)
    }

    /// Signed generator indices.
    fn letters(&self) -> Vec<i8> {
        self.0.letters().to_vec()
    }

    fn inverse(&self) -> Self {
        Word(self.0.inverse())
    }

    fn cyclic_reduce(&self) -> Self {
        Word(word::cyclic_reduce(&self.0))
    }

    fn is_cyclically_reduced(&self) -> bool {
        self.0.is_cyclically_reduced()
    }

    fn __mul__(&self, other: &Word) -> Self {
        Word(&self.0 * &other.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Word('{}')", self.0)
    }
}

/// Membership bitmap of a set restricted to a ball.
#[pyclass(frozen, module = "mgl")]
struct Fingerprint(BallFingerprint);

#[pymethods]
impl Fingerprint {
    #[getter]
    fn radius(&self) -> u32 {
        self.0.radius()
    }

    fn hex(&self) -> String {
        self.0.to_hex()
    }

    fn members(&self) -> usize {
        self.0.count_ones()
    }

    /// `d(A, B)`; 0.0 when the two sets agree on the whole ball.
    fn distance(&self, other: &Fingerprint) -> PyResult<f64> {
        let d = metric::distance(&self.0, &other.0).map_err(py_err)?;
        Ok(match d {
            Distance::Exact { .. } => d.value(),
            Distance::AtMost { .. } => 0.0,
        })
    }

    fn __eq__(&self, other: &Fingerprint) -> bool {
        self.0 == other.0
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn ball_size(m: usize, n: u32) -> PyResult<u128> {
    word::ball_size(m, n).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, n, budget=None))]
fn count_cyc(m: usize, n: u32, budget: Option<u64>) -> PyResult<u128> {
    word::count_cyc(m, n, &self::budget(budget)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, n, budget=None))]
fn enumerate_cyc(m: usize, n: u32, budget: Option<u64>) -> PyResult<Vec<Word>> {
    Ok(word::enumerate_cyc(m, n, &self::budget(budget)).map_err(py_err)?.into_iter().map(Word).collect())
}

/// `(holds, longest piece or None, shortest relator length)`.
#[pyfunction]
#[pyo3(signature = (relators, lam="1/6"))]
fn check_c_prime(relators: Vec<String>, lam: &str) -> PyResult<(bool, Option<String>, usize)> {
    let r = cancellation::check_c_prime(&parse_words(&relators)?, parse_lambda(lam)?).map_err(py_err)?;
    Ok((r.holds, r.longest.map(|p| p.word.to_string()), r.min_len))
}

/// `(accepted, reduced output, number of replacement steps)`.
#[pyfunction]
#[pyo3(signature = (w, relators, m=2, lam="1/6"))]
fn dehn_member(w: &str, relators: Vec<String>, m: usize, lam: &str) -> PyResult<(bool, String, usize)> {
    let p = Presentation::small_cancellation(m, parse_words(&relators)?, parse_lambda(lam)?).map_err(py_err)?;
    let red = cancellation::dehn_member(&word::Word::parse(w).map_err(py_err)?, &p).map_err(py_err)?;
    Ok((red.accepted(), red.output.to_string(), red.steps.len()))
}

#[pyfunction]
fn newman_member(w: &str, root: &str, q: u32) -> PyResult<bool> {
    let pr = PowerRelator::new(word::Word::parse(root).map_err(py_err)?, q).map_err(py_err)?;
    Ok(one_relator::newman_member(&word::Word::parse(w).map_err(py_err)?, &pr).accepted())
}

#[pyfunction]
#[pyo3(signature = (relators, n, m=2, lam="1/6", budget=None))]
fn closure_fingerprint(relators: Vec<String>, n: u32, m: usize, lam: &str, budget: Option<u64>) -> PyResult<Fingerprint> {
    let p = Presentation::small_cancellation(m, parse_words(&relators)?, parse_lambda(lam)?).map_err(py_err)?;
    cancellation::closure_fingerprint(&p, n, &self::budget(budget)).map(Fingerprint).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, k, n, lam="1/6", budget=None))]
fn ps_covering_number(m: usize, k: u32, n: u32, lam: &str, budget: Option<u64>) -> PyResult<usize> {
    cancellation::ps_covering_number(m, k, parse_lambda(lam)?, n, &self::budget(budget)).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, q, n, budget=None))]
fn ur_covering_number(m: usize, q: u32, n: u32, budget: Option<u64>) -> PyResult<usize> {
    one_relator::ur_covering_number(m, q, n, &self::budget(budget)).map_err(py_err)
}

/// Classes of cyclically reduced words under rotation and inversion.
#[pyfunction]
fn cyclic_classes(words: Vec<String>) -> PyResult<Vec<Vec<String>>> {
    let classes = one_relator::cyclic_classes(&parse_words(&words)?).map_err(py_err)?;
    Ok(classes.into_iter().map(|c| c.iter().map(ToString::to_string).collect()).collect())
}

#[pyfunction]
fn gamma_reduce(w: &str) -> PyResult<String> {
    Ok(grig::gamma_reduce(&w.parse::<GrigWord>().map_err(py_err)?).to_string())
}

/// Oracle membership of a word over `a, b, c, d`; `omega` looks like `012(0)*`.
#[pyfunction]
fn grig_member(w: &str, omega: &str) -> PyResult<bool> {
    let w: GrigWord = w.parse().map_err(py_err)?;
    let omega: OracleSeq = omega.parse().map_err(py_err)?;
    Ok(grig::is_member(w.letters(), &omega))
}

#[pyfunction]
#[pyo3(signature = (omega, n, budget=None))]
fn grig_fingerprint(omega: &str, n: u32, budget: Option<u64>) -> PyResult<Fingerprint> {
    let omega: OracleSeq = omega.parse().map_err(py_err)?;
    grig::fingerprint_s(&omega, n, &self::budget(budget)).map(Fingerprint).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (m, n, budget=None))]
fn covering_number_zm(m: usize, n: u32, budget: Option<u64>) -> PyResult<usize> {
    lattice::covering_number_zm(m, n, &self::budget(budget)).map_err(py_err)
}

/// Row Hermite normal form of the subgroup generated by `gens`.
#[pyfunction]
fn hnf(m: usize, gens: Vec<Vec<i64>>) -> PyResult<Vec<Vec<i64>>> {
    let pts: Vec<LatticePoint> = gens.into_iter().map(LatticePoint).collect();
    Ok(lattice::hnf(m, &pts).map_err(py_err)?.rows().to_vec())
}

#[pymodule]
fn mgl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BudgetExceeded", m.py().get_type::<BudgetExceeded>())?;
    m.add_class::<Word>()?;
    m.add_class::<Fingerprint>()?;
    m.add_function(wrap_pyfunction!(ball_size, m)?)?;
    m.add_function(wrap_pyfunction!(count_cyc, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_cyc, m)?)?;
    m.add_function(wrap_pyfunction!(check_c_prime, m)?)?;
    m.add_function(wrap_pyfunction!(dehn_member, m)?)?;
    m.add_function(wrap_pyfunction!(newman_member, m)?)?;
    m.add_function(wrap_pyfunction!(closure_fingerprint, m)?)?;
    m.add_function(wrap_pyfunction!(ps_covering_number, m)?)?;
    m.add_function(wrap_pyfunction!(ur_covering_number, m)?)?;
    m.add_function(wrap_pyfunction!(cyclic_classes, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(grig_member, m)?)?;
    m.add_function(wrap_pyfunction!(grig_fingerprint, m)?)?;
    m.add_function(wrap_pyfunction!(covering_number_zm, m)?)?;
    m.add_function(wrap_pyfunction!(hnf, m)?)?;
    Ok(())
}
