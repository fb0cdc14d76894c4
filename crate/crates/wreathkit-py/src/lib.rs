//! Python bindings: words, wreath recursions, the table rows and the
//! main computations.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ::wreathkit::cli::config::Config;
use ::wreathkit::cli::fixtures::{Fixtures, RecursionRecord};
use ::wreathkit::cli::verify;
use ::wreathkit::curves::{compute_fga as fga_impl, FgaResult};
use ::wreathkit::moduli::{calibrate, derive_recursion as derive_impl, parse_complex};
use ::wreathkit::nucleus::contraction_check;
use ::wreathkit::twist::{compute_attractor, twist_solve, VirtualEndomorphism};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Reduced word in a, A, b, B.
#[pyclass(name = "Word", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyWord(::wreathkit::Word);

#[pymethods]
impl PyWord {
    #[new]
    #[pyo3(signature = (text = ""))]
    fn new(text: &str) -> PyResult<Self> {
        ::wreathkit::Word::parse(text).map(PyWord).map_err(value_err)
    }

    fn __mul__(&self, other: &PyWord) -> PyWord {
        PyWord(self.0.multiply(&other.0))
    }

    fn inverse(&self) -> PyWord {
        PyWord(self.0.invert())
    }

    fn __pow__(&self, n: i64, _modulo: Option<i64>) -> PyWord {
        PyWord(self.0.pow(n))
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

    fn exponent_sums(&self) -> (i64, i64) {
        self.0.exponent_sums()
    }
}

/// Wreath recursion on the binary tree, e.g. `WreathRecursion("<1, AB>s", "<1, a>")`.
#[pyclass(name = "WreathRecursion", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyRecursion(::wreathkit::WreathRecursion);

#[pymethods]
impl PyRecursion {
    #[new]
    fn new(alpha: &str, beta: &str) -> PyResult<Self> {
        ::wreathkit::WreathRecursion::parse(alpha, beta).map(PyRecursion).map_err(value_err)
    }

    /// Whether `w` swaps the two subtrees.
    fn swaps(&self, w: &PyWord) -> bool {
        self.0.perm_of(&w.0)
    }

    /// Restriction at vertex `x` (1 or 2).
    fn restrict(&self, w: &PyWord, x: usize) -> PyResult<PyWord> {
        if !(1..=2).contains(&x) {
            return Err(PyValueError::new_err("vertex is 1 or 2"));
        }
        Ok(PyWord(self.0.restrict(&w.0, x - 1)))
    }

    /// Image of a tree vertex, given as a string over 1 and 2.
    fn act(&self, w: &PyWord, vertex: &str) -> PyResult<String> {
        let v: Vec<u8> = vertex
            .chars()
            .map(|c| match c {
                '1' => Ok(0),
                '2' => Ok(1),
                _ => Err(PyValueError::new_err(format!("bad vertex `{vertex}`"))),
            })
            .collect::<PyResult<_>>()?;
        Ok(self.0.act(&w.0, &v).into_iter().map(|x| if x == 0 { '1' } else { '2' }).collect())
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }
}

/// One recursion row of the tables.
#[pyclass(name = "Row", frozen)]
struct PyRow {
    rec: RecursionRecord,
}

#[pymethods]
impl PyRow {
    #[getter]
    fn id(&self) -> &str {
        &self.rec.id
    }

    #[getter]
    fn index(&self) -> usize {
        self.rec.index
    }

    #[getter]
    fn gmap(&self) -> &str {
        &self.rec.gmap
    }

    #[getter]
    fn recursion(&self) -> PyRecursion {
        PyRecursion(self.rec.recursion.clone())
    }

    fn __repr__(&self) -> String {
        format!("Row({}, {})", self.rec.index, self.rec.id)
    }
}

fn row(id: &str) -> PyResult<RecursionRecord> {
    Fixtures::builtin().row(id).cloned().ok_or_else(|| PyKeyError::new_err(format!("unknown row `{id}`")))
}

#[pyfunction]
fn rows() -> Vec<PyRow> {
    Fixtures::builtin().recursions.into_iter().map(|rec| PyRow { rec }).collect()
}

/// Nucleus of a row as pattern strings, plus the contraction depth.
#[pyfunction]
fn nucleus(row_id: &str) -> PyResult<(Vec<String>, usize)> {
    let r = row(row_id)?;
    let cfg = Config::default();
    let n = verify::computed_nucleus(&r, &cfg).map_err(runtime_err)?.nucleus;
    let k = contraction_check(&r.recursion, &n, &cfg.nucleus).k;
    Ok((n.members().iter().map(|p| p.to_string()).collect(), k))
}

/// Iterates the twisting map from `prefix·word`; returns the orbit and its label.
#[pyfunction]
#[pyo3(signature = (row_id, word, prefix = None, coordinate = 1))]
fn twist(row_id: &str, word: &PyWord, prefix: Option<PyWord>, coordinate: usize) -> PyResult<(Vec<String>, String)> {
    if !(1..=2).contains(&coordinate) {
        return Err(PyValueError::new_err("coordinate is 1 or 2"));
    }
    let r = row(row_id)?;
    let cfg = Config::default();
    let n = verify::computed_nucleus(&r, &cfg).map_err(runtime_err)?.nucleus;
    let ve = VirtualEndomorphism::new(r.recursion, coordinate - 1);
    let att = compute_attractor(&ve, &n, &cfg.attractor).map_err(runtime_err)?;
    let sol = twist_solve(&ve, &att, &word.0, prefix.as_ref().map(|p| &p.0)).map_err(runtime_err)?;
    Ok((sol.trace.iter().map(|w| w.to_string()).collect(), sol.label.to_string()))
}

/// Cycles of the finite global attractor, or `None` when pullback does not close up.
#[pyfunction]
#[pyo3(signature = (row_id, coordinate = 1))]
fn fga(row_id: &str, coordinate: usize) -> PyResult<Option<Vec<Vec<String>>>> {
    if !(1..=2).contains(&coordinate) {
        return Err(PyValueError::new_err("coordinate is 1 or 2"));
    }
    let r = row(row_id)?;
    let cfg = Config::default();
    let n = verify::computed_nucleus(&r, &cfg).map_err(runtime_err)?.nucleus;
    let ve = VirtualEndomorphism::new(r.recursion, coordinate - 1);
    Ok(match fga_impl(&ve, &n, &cfg.fga).map_err(runtime_err)? {
        FgaResult::Closed { cycles } => {
            Some(cycles.iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect())
        }
        FgaResult::NotClosed { .. } => None,
    })
}

/// Derives `(alpha, beta)` for a map by lifting loops; `fixed_point` is
/// `"re,im"` or `"formal"`.
#[pyfunction]
fn derive(gmap: &str, fixed_point: &str) -> PyResult<(String, String)> {
    let fx = Fixtures::builtin();
    let g = fx.gmap(gmap).ok_or_else(|| PyKeyError::new_err(format!("unknown map `{gmap}`")))?;
    let cfg = Config::default();
    let z0 = match fixed_point.trim() {
        "formal" => None,
        s => {
            let z = parse_complex(s).map_err(value_err)?;
            Some(g.map.nearest_fixed_point(z, verify::SELECTION_TOLERANCE).map_err(value_err)?)
        }
    };
    let cal = calibrate(&cfg.lift).map_err(runtime_err)?;
    let d = derive_impl(&g.map, z0, cal, &cfg.lift).map_err(runtime_err)?;
    Ok((d.recursion.alpha.to_string(), d.recursion.beta.to_string()))
}

/// Runs the table checks; one `(id, title, passed)` per check.
#[pyfunction]
fn verify_tables() -> Vec<(String, String, bool)> {
    verify::all_checks(&Fixtures::builtin(), &Config::default())
        .into_iter()
        .map(|c| (c.id, c.title, c.passed))
        .collect()
}

/// Runs the command line in-process; returns `(stdout, stderr, exit code)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (String, String, i32) {
    let out = ::wreathkit::cli::run(std::iter::once("wreathkit".to_string()).chain(args));
    (out.stdout, out.stderr, out.code)
}

#[pymodule]
#[pyo3(name = "wreathkit")]
fn wreathkit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWord>()?;
    m.add_class::<PyRecursion>()?;
    m.add_class::<PyRow>()?;
    m.add_function(wrap_pyfunction!(rows, m)?)?;
    m.add_function(wrap_pyfunction!(nucleus, m)?)?;
    m.add_function(wrap_pyfunction!(twist, m)?)?;
    m.add_function(wrap_pyfunction!(fga, m)?)?;
    m.add_function(wrap_pyfunction!(derive, m)?)?;
    m.add_function(wrap_pyfunction!(verify_tables, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
