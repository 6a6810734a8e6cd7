//! Python bindings for `plato_cone`.

use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use plato_cone::io::{self, FormatError, Record};
use plato_cone::sampling::{self, LevySpec, MarkDensity, SampleReport};
use plato_cone::{stats, topology};
use plato_cone::{BumpGrid, Configuration, DiscreteMeasure, PlatoConfiguration, TestFamily, TestFunction, Window};
use pyo3::exceptions::{PyOSError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

type Points = Vec<(f64, Vec<f64>)>;

fn value_error(e: plato_cone::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn format_error(e: FormatError) -> PyErr {
    match e {
        FormatError::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Wraps a Python callable; the first exception raised is kept and re-raised.
struct Callback {
    f: Py<PyAny>,
    failure: Arc<Mutex<Option<PyErr>>>,
}

impl Callback {
    fn new(f: Py<PyAny>) -> Self {
        Callback { f, failure: Arc::new(Mutex::new(None)) }
    }

    fn marked(&self, support: Window) -> PyResult<TestFunction> {
        let f = Python::attach(|py| self.f.clone_ref(py));
        let failure = Arc::clone(&self.failure);
        TestFunction::on_marked(support, None, move |s, x| {
            Python::attach(|py| call(py, &f, (s, x.to_vec()), &failure))
        })
        .map_err(value_error)
    }

    fn spatial(&self, support: Window) -> PyResult<TestFunction> {
        let f = Python::attach(|py| self.f.clone_ref(py));
        let failure = Arc::clone(&self.failure);
        TestFunction::on_space(support, None, move |x| {
            Python::attach(|py| call(py, &f, (x.to_vec(),), &failure))
        })
        .map_err(value_error)
    }

    fn finish(&self, result: plato_cone::Result<f64>) -> PyResult<f64> {
        if let Some(e) = self.failure.lock().unwrap().take() {
            return Err(e);
        }
        result.map_err(value_error)
    }
}

fn call<'py, A>(py: Python<'py>, f: &Py<PyAny>, args: A, failure: &Mutex<Option<PyErr>>) -> f64
where
    A: pyo3::call::PyCallArgs<'py>,
{
    match f.bind(py).call1(args).and_then(|v| v.extract::<f64>()) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    }
}

fn points_of(c: &Configuration) -> Points {
    c.iter().map(|p| (p.mark(), p.coords().to_vec())).collect()
}

fn report_dict<'py>(py: Python<'py>, r: &SampleReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("seed", r.seed)?;
    d.set_item("epsilon", r.epsilon)?;
    d.set_item("expected_discarded_mass", r.expected_discarded_mass)?;
    d.set_item("atom_count", r.atom_count)?;
    Ok(d)
}

/// Half-open box `[lower, upper)` with an optional mark interval `(lo, hi]`.
#[pyclass(name = "Window", module = "plato_cone_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyWindow(Window);

#[pymethods]
impl PyWindow {
    #[new]
    #[pyo3(signature = (lower, upper, marks = None))]
    fn new(lower: Vec<f64>, upper: Vec<f64>, marks: Option<(f64, f64)>) -> PyResult<Self> {
        let mut w = Window::new(lower, upper).map_err(value_error)?;
        if let Some((lo, hi)) = marks {
            w = w.with_marks(lo, hi).map_err(value_error)?;
        }
        Ok(PyWindow(w))
    }

    /// The whole space in `dim` dimensions.
    #[staticmethod]
    fn everywhere(dim: usize) -> Self {
        PyWindow(Window::everywhere(dim))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.0.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.0.upper().to_vec()
    }

    #[getter]
    fn marks(&self) -> Option<(f64, f64)> {
        self.0.marks().map(|m| (m.lo(), m.hi()))
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.0.volume()
    }

    fn contains_position(&self, x: Vec<f64>) -> bool {
        self.0.contains_position(&x)
    }

    fn contains(&self, mark: f64, x: Vec<f64>) -> bool {
        self.0.contains(mark, &x)
    }

    fn tile_first_axis(&self, pieces: usize) -> PyResult<Vec<PyWindow>> {
        Ok(self.0.tile_first_axis(pieces).map_err(value_error)?.into_iter().map(PyWindow).collect())
    }

    fn __repr__(&self) -> String {
        format!("Window(lower={:?}, upper={:?}, marks={:?})", self.0.lower(), self.0.upper(), self.marks())
    }
}

/// Locally finite marked configuration in canonical order.
#[pyclass(name = "Configuration", module = "plato_cone_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyConfiguration(Configuration);

#[pymethods]
impl PyConfiguration {
    /// `points` is a list of `(mark, position)` pairs.
    #[new]
    fn new(points: Points, dim: usize) -> PyResult<Self> {
        Ok(PyConfiguration(Configuration::from_pairs(points, dim).map_err(value_error)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn points(&self) -> Points {
        points_of(&self.0)
    }

    fn count_in_window(&self, window: &PyWindow) -> PyResult<usize> {
        self.0.count_in_window(&window.0).map_err(value_error)
    }

    fn restrict(&self, window: &PyWindow) -> PyResult<Self> {
        Ok(PyConfiguration(self.0.restrict(&window.0).map_err(value_error)?))
    }

    fn local_mass(&self, window: &PyWindow) -> PyResult<f64> {
        self.0.local_mass(&window.0).map_err(value_error)
    }

    fn is_pinpointing(&self) -> bool {
        self.0.is_pinpointing()
    }

    fn first_shared_position(&self) -> Option<Vec<f64>> {
        self.0.first_shared_position().map(|p| p.coords().to_vec())
    }

    fn union(&self, other: &PyConfiguration) -> PyResult<Self> {
        Ok(PyConfiguration(self.0.union(&other.0).map_err(value_error)?))
    }

    fn is_subset(&self, other: &PyConfiguration) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Sum of `f(mark, position)` over points inside `support`.
    fn pair(&self, f: Py<PyAny>, support: &PyWindow) -> PyResult<f64> {
        let cb = Callback::new(f);
        let tf = cb.marked(support.0.clone())?;
        cb.finish(self.0.pair(&tf))
    }

    fn to_jsonl(&self) -> String {
        Record::Configuration(self.0.clone()).to_jsonl()
    }

    fn __repr__(&self) -> String {
        format!("Configuration(dim={}, len={})", self.0.dim(), self.0.len())
    }
}

/// Configuration with at most one point per position.
#[pyclass(name = "PlatoConfiguration", module = "plato_cone_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyPlato(PlatoConfiguration);

#[pymethods]
impl PyPlato {
    #[new]
    fn new(configuration: &PyConfiguration) -> PyResult<Self> {
        Ok(PyPlato(plato_cone::to_plato(configuration.0.clone()).map_err(value_error)?))
    }

    #[staticmethod]
    fn empty(dim: usize) -> Self {
        PyPlato(PlatoConfiguration::empty(dim))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn configuration(&self) -> PyConfiguration {
        PyConfiguration(self.0.configuration().clone())
    }

    fn points(&self) -> Points {
        points_of(self.0.configuration())
    }

    fn local_mass(&self, window: &PyWindow) -> PyResult<f64> {
        self.0.local_mass(&window.0).map_err(value_error)
    }

    /// The discrete measure with an atom of weight `s` at `x` per point.
    fn reflect(&self) -> PyMeasure {
        PyMeasure(self.0.reflect())
    }

    fn to_jsonl(&self) -> String {
        Record::Plato(self.0.clone()).to_jsonl()
    }

    fn __repr__(&self) -> String {
        format!("PlatoConfiguration(dim={}, len={})", self.0.dim(), self.0.len())
    }
}

/// Finite-support discrete measure with positive weights.
#[pyclass(name = "DiscreteMeasure", module = "plato_cone_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyMeasure(DiscreteMeasure);

#[pymethods]
impl PyMeasure {
    /// `atoms` is a list of `(weight, position)` pairs; repeated positions merge.
    #[new]
    fn new(atoms: Points, dim: usize) -> PyResult<Self> {
        Ok(PyMeasure(DiscreteMeasure::new(atoms, dim).map_err(value_error)?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn atoms(&self) -> Points {
        self.0.atoms().map(|(x, w)| (w, x.coords().to_vec())).collect()
    }

    fn weight_at(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.weight_at(&x).map_err(value_error)
    }

    fn total_mass(&self) -> f64 {
        self.0.total_mass()
    }

    fn mass_in_window(&self, window: &PyWindow) -> PyResult<f64> {
        self.0.mass_in_window(&window.0).map_err(value_error)
    }

    fn count_above(&self, window: &PyWindow, threshold: f64) -> PyResult<usize> {
        self.0.count_above(&window.0, threshold).map_err(value_error)
    }

    fn restrict(&self, window: &PyWindow) -> PyResult<Self> {
        Ok(PyMeasure(self.0.restrict(&window.0).map_err(value_error)?))
    }

    fn scale(&self, c: f64) -> PyResult<Self> {
        Ok(PyMeasure(self.0.scale(c).map_err(value_error)?))
    }

    fn is_sub_measure(&self, other: &PyMeasure) -> PyResult<bool> {
        self.0.is_sub_measure(&other.0).map_err(value_error)
    }

    /// Weighted sum of `f(position)` over atoms inside `support`.
    fn pair(&self, f: Py<PyAny>, support: &PyWindow) -> PyResult<f64> {
        let cb = Callback::new(f);
        let tf = cb.spatial(support.0.clone())?;
        cb.finish(self.0.pair(&tf))
    }

    /// Sum of `f(weight, position)` over atoms inside `support`.
    fn double_pair(&self, f: Py<PyAny>, support: &PyWindow) -> PyResult<f64> {
        let cb = Callback::new(f);
        let tf = cb.marked(support.0.clone())?;
        cb.finish(self.0.double_pair(&tf))
    }

    fn reflect_inverse(&self) -> PyPlato {
        PyPlato(PlatoConfiguration::reflect_inverse(&self.0))
    }

    fn to_jsonl(&self) -> String {
        Record::Measure(self.0.clone()).to_jsonl()
    }

    fn __repr__(&self) -> String {
        format!("DiscreteMeasure(dim={}, len={})", self.0.dim(), self.0.len())
    }
}

#[pyfunction]
fn to_plato(configuration: &PyConfiguration) -> PyResult<PyPlato> {
    PyPlato::new(configuration)
}

#[pyfunction]
#[pyo3(signature = (theta, window, epsilon = 1e-8, seed = 0))]
fn sample_gamma<'py>(
    py: Python<'py>,
    theta: f64,
    window: &PyWindow,
    epsilon: f64,
    seed: u64,
) -> PyResult<(PyMeasure, Bound<'py, PyDict>)> {
    let w = window.0.clone();
    let s = py.detach(move || sampling::sample_gamma(theta, &w, epsilon, seed)).map_err(value_error)?;
    Ok((PyMeasure(s.measure), report_dict(py, &s.report)?))
}

#[pyfunction]
#[pyo3(signature = (theta, window, n_jumps, seed = 0))]
fn sample_gamma_ordered<'py>(
    py: Python<'py>,
    theta: f64,
    window: &PyWindow,
    n_jumps: usize,
    seed: u64,
) -> PyResult<(PyMeasure, Bound<'py, PyDict>)> {
    let w = window.0.clone();
    let s = py
        .detach(move || sampling::sample_gamma_ordered(theta, &w, n_jumps, seed))
        .map_err(value_error)?;
    Ok((PyMeasure(s.measure), report_dict(py, &s.report)?))
}

/// Poisson configuration with marks of density `e^{-s}` and spatial rate `rate`.
#[pyfunction]
#[pyo3(signature = (window, rate = 1.0, seed = 0))]
fn sample_poisson<'py>(
    py: Python<'py>,
    window: &PyWindow,
    rate: f64,
    seed: u64,
) -> PyResult<(PyConfiguration, Bound<'py, PyDict>)> {
    let spec = LevySpec::finite_product(MarkDensity::exponential(), rate).map_err(value_error)?;
    let w = window.0.clone();
    let s = py.detach(move || sampling::sample_poisson(&spec, &w, seed)).map_err(value_error)?;
    Ok((PyConfiguration(s.configuration), report_dict(py, &s.report)?))
}

#[pyfunction]
fn exp_integral_e1(s: f64) -> PyResult<f64> {
    stats::exp_integral_e1(s).map_err(value_error)
}

#[pyfunction]
fn inverse_e1(level: f64) -> Option<f64> {
    sampling::inverse_e1(level)
}

#[pyfunction]
fn gamma_cdf(shape: f64, scale: f64, x: f64) -> PyResult<f64> {
    stats::gamma_cdf(shape, scale, x).map_err(value_error)
}

#[pyfunction]
fn expected_truncation_error(theta: f64, volume: f64, epsilon: f64) -> PyResult<f64> {
    sampling::expected_truncation_error(theta, volume, epsilon).map_err(value_error)
}

#[pyfunction]
fn merging_sequence(x0: Vec<f64>, s1: f64, s2: f64, n: usize) -> PyResult<PyConfiguration> {
    Ok(PyConfiguration(topology::merging_sequence(&x0, s1, s2, n).map_err(value_error)?))
}

#[pyfunction]
fn merging_limit(x0: Vec<f64>, s1: f64, s2: f64) -> PyResult<PyConfiguration> {
    Ok(PyConfiguration(topology::merging_limit(&x0, s1, s2).map_err(value_error)?))
}

fn bump_family(centre: &[f64], half_width: f64, mark_upper: f64, cells: usize) -> PyResult<TestFamily> {
    let mut grid = BumpGrid::around(centre, half_width, mark_upper);
    grid.cells = cells;
    TestFamily::bump_grid(&grid).map_err(value_error)
}

/// Discrepancy under the bump-grid family centred at `centre`.
#[pyfunction]
#[pyo3(signature = (a, b, centre, half_width = 1.0, mark_upper = 3.0, cells = 4))]
fn vague_discrepancy(
    py: Python<'_>,
    a: &PyConfiguration,
    b: &PyConfiguration,
    centre: Vec<f64>,
    half_width: f64,
    mark_upper: f64,
    cells: usize,
) -> PyResult<f64> {
    let family = bump_family(&centre, half_width, mark_upper, cells)?;
    let (a, b) = (a.0.clone(), b.0.clone());
    py.detach(move || topology::vague_discrepancy(&a, &b, &family)).map_err(value_error)
}

/// Runs the merging-sequence convergence check; returns a dict.
#[pyfunction]
#[pyo3(signature = (x0, s1, s2, n_max = 1000, tol = 0.01, cells = 4, half_width = 1.0))]
fn check_convergence<'py>(
    py: Python<'py>,
    x0: Vec<f64>,
    s1: f64,
    s2: f64,
    n_max: usize,
    tol: f64,
    cells: usize,
    half_width: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let family = bump_family(&x0, half_width, 1.5 * s1.max(s2), cells)?;
    let limit = topology::merging_limit(&x0, s1, s2).map_err(value_error)?;
    let report = py
        .detach(|| {
            topology::check_convergence(|n| topology::merging_sequence(&x0, s1, s2, n), &limit, &family, tol, n_max)
        })
        .map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("converged", report.converged)?;
    d.set_item("discrepancies", report.discrepancies)?;
    d.set_item("limit_pinpointing", limit.is_pinpointing())?;
    d.set_item("max_lipschitz", family.max_lipschitz())?;
    Ok(d)
}

fn record_object(py: Python<'_>, record: Record) -> PyResult<Py<PyAny>> {
    Ok(match record {
        Record::Configuration(c) => Bound::new(py, PyConfiguration(c))?.into_any().unbind(),
        Record::Plato(p) => Bound::new(py, PyPlato(p))?.into_any().unbind(),
        Record::Measure(m) => Bound::new(py, PyMeasure(m))?.into_any().unbind(),
    })
}

fn object_record(obj: &Bound<'_, PyAny>) -> PyResult<Record> {
    if let Ok(c) = obj.cast::<PyConfiguration>() {
        Ok(Record::Configuration(c.get().0.clone()))
    } else if let Ok(p) = obj.cast::<PyPlato>() {
        Ok(Record::Plato(p.get().0.clone()))
    } else if let Ok(m) = obj.cast::<PyMeasure>() {
        Ok(Record::Measure(m.get().0.clone()))
    } else {
        Err(PyTypeError::new_err("expected Configuration, PlatoConfiguration or DiscreteMeasure"))
    }
}

/// Parses JSONL text into the matching object.
#[pyfunction]
fn read_jsonl(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    record_object(py, io::read_str(text).map_err(format_error)?)
}

#[pyfunction]
fn read_path(py: Python<'_>, path: PathBuf) -> PyResult<Py<PyAny>> {
    record_object(py, io::read_path(&path).map_err(format_error)?)
}

#[pyfunction]
fn write_path(path: PathBuf, obj: &Bound<'_, PyAny>) -> PyResult<()> {
    io::write_path(&path, &object_record(obj)?).map_err(format_error)
}

#[pymodule]
fn plato_cone_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyConfiguration>()?;
    m.add_class::<PyPlato>()?;
    m.add_class::<PyMeasure>()?;
    m.add_function(wrap_pyfunction!(to_plato, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gamma_ordered, m)?)?;
    m.add_function(wrap_pyfunction!(sample_poisson, m)?)?;
    m.add_function(wrap_pyfunction!(exp_integral_e1, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_e1, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(expected_truncation_error, m)?)?;
    m.add_function(wrap_pyfunction!(merging_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(merging_limit, m)?)?;
    m.add_function(wrap_pyfunction!(vague_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(check_convergence, m)?)?;
    m.add_function(wrap_pyfunction!(read_jsonl, m)?)?;
    m.add_function(wrap_pyfunction!(read_path, m)?)?;
    m.add_function(wrap_pyfunction!(write_path, m)?)?;
    Ok(())
}
