//! Python bindings for the ornament toolkit.
//!
//! Structured results (signatures, reports, the group catalog) cross the
//! boundary as plain dicts and lists.

use ornament_core::detect::{annotate, extract_unit_cell};
use ornament_core::fixtures::random_fd;
use ornament_core::survey::io::{responses_from_str, tasks_from_json};
use ornament_core::survey::{self, DistanceMatrix, Experiment, Ranking, TsneOptions};
use ornament_core::{
    classify_with, generate, ClassifyOptions, Color, GenerateOptions, GroupName, RasterPattern, SymmetrySignature, Vec2,
};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyBytes;

create_exception!(ornament, OrnamentError, PyException, "Raised for any failure reported by the toolkit.");
create_exception!(ornament, NoPeriodicityError, OrnamentError, "The image shows no translational symmetry.");

fn py_err(e: ornament_core::Error) -> PyErr {
    match e {
        ornament_core::Error::NoPeriodicity(_) => NoPeriodicityError::new_err(e.to_string()),
        _ => OrnamentError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, text: &str) -> PyResult<Py<PyAny>> {
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_group(name: &str) -> PyResult<GroupName> {
    name.parse::<GroupName>().map_err(py_err)
}

/// An RGB raster image.
#[pyclass(name = "Pattern", module = "ornament", frozen)]
pub struct PyPattern {
    inner: RasterPattern,
}

#[pymethods]
impl PyPattern {
    /// Builds a pattern from packed RGB bytes, row major.
    #[new]
    fn new(width: usize, height: usize, rgb: &[u8]) -> PyResult<Self> {
        if rgb.len() != width * height * 3 {
            return Err(OrnamentError::new_err(format!(
                "expected {} bytes for {width}x{height}, got {}",
                width * height * 3,
                rgb.len()
            )));
        }
        let pixels: Vec<Color> = rgb.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
        let inner = RasterPattern::from_rgb(width, height, pixels).map_err(py_err)?;
        Ok(PyPattern { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyPattern { inner: RasterPattern::load_png(path).map_err(py_err)? })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save_png(path).map_err(py_err)
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    /// Packed RGB bytes, row major.
    fn to_bytes<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let flat: Vec<u8> = self.inner.rgb().iter().flatten().copied().collect();
        PyBytes::new(py, &flat)
    }

    /// Number of distinct colors.
    fn color_count(&self) -> PyResult<usize> {
        Ok(self.inner.palette_view().map_err(py_err)?.1.len())
    }

    fn __repr__(&self) -> String {
        format!("Pattern({}x{})", self.inner.width(), self.inner.height())
    }
}

/// Symmetries detected in a pattern.
#[pyclass(name = "Signature", module = "ornament", frozen)]
pub struct PySignature {
    inner: SymmetrySignature,
}

#[pymethods]
impl PySignature {
    #[getter]
    fn group(&self) -> String {
        self.inner.group.to_string()
    }

    #[getter]
    fn confidence(&self) -> f64 {
        self.inner.confidence
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn highest_order(&self) -> u32 {
        self.inner.highest_order()
    }

    #[getter]
    fn two_fold_class_count(&self) -> usize {
        self.inner.two_fold_class_count
    }

    /// Lattice basis vectors in pixels.
    #[getter]
    fn lattice(&self) -> ((f64, f64), (f64, f64)) {
        let (a, b) = (self.inner.lattice.a, self.inner.lattice.b);
        ((a.x, a.y), (b.x, b.y))
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        json_to_py(py, &self.inner.to_json().to_string())
    }

    fn __repr__(&self) -> String {
        format!("Signature(group='{}', confidence={:.4})", self.inner.group, self.inner.confidence)
    }
}

/// Detects the wallpaper group of `pattern`.
#[pyfunction]
#[pyo3(signature = (pattern, theta=None))]
fn classify(py: Python<'_>, pattern: &PyPattern, theta: Option<f64>) -> PyResult<PySignature> {
    let mut opts = ClassifyOptions::default();
    if let Some(t) = theta {
        if !(t > 0.0 && t < 1.0) {
            return Err(OrnamentError::new_err(format!("theta must lie in (0, 1), got {t}")));
        }
        opts.theta = t;
    }
    let inner = py.detach(|| classify_with(&pattern.inner, &opts)).map_err(py_err)?;
    Ok(PySignature { inner })
}

/// Renders a `width` x `height` pattern of `group` from a random motif.
#[pyfunction]
#[pyo3(signature = (group, width=512, height=512, cell=100.0, seed=0))]
fn generate_random(py: Python<'_>, group: &str, width: usize, height: usize, cell: f64, seed: u64) -> PyResult<PyPattern> {
    let g = parse_group(group)?;
    if cell <= 0.0 {
        return Err(OrnamentError::new_err(format!("cell must be positive, got {cell}")));
    }
    let inner = py
        .detach(|| {
            let lattice = g.group().default_lattice(cell);
            let anchor = Vec2::new(width as f64 / 2.0, height as f64 / 2.0);
            let fd = random_fd(g, &lattice, anchor, seed)?;
            generate(&fd, g, &lattice, &GenerateOptions::new(width, height))
        })
        .map_err(py_err)?;
    Ok(PyPattern { inner })
}

/// Copies `pattern` with the detected centers and axes drawn on top.
#[pyfunction]
fn annotate_pattern(pattern: &PyPattern, signature: &PySignature) -> PyResult<PyPattern> {
    Ok(PyPattern { inner: annotate(&pattern.inner, &signature.inner).map_err(py_err)? })
}

/// Cuts one unit cell out of `pattern`.
#[pyfunction]
fn unit_cell(pattern: &PyPattern, signature: &PySignature) -> PyResult<PyPattern> {
    Ok(PyPattern { inner: extract_unit_cell(&pattern.inner, &signature.inner).map_err(py_err)? })
}

/// The 17 wallpaper groups with their generators and lattice classes.
#[pyfunction]
fn catalog(py: Python<'_>) -> PyResult<Py<PyAny>> {
    json_to_py(py, &ornament_core::groups::catalog_json().to_string())
}

/// Names of the 17 groups in catalog order.
#[pyfunction]
fn group_names() -> Vec<String> {
    GroupName::ALL.iter().map(|g| g.to_string()).collect()
}

fn ranking_pair(a: Vec<String>, b: Vec<String>) -> (Ranking, Ranking) {
    let r = |v: &[String]| Ranking::from_order("", "", &v.iter().map(String::as_str).collect::<Vec<_>>());
    (r(&a), r(&b))
}

/// Number of discordant pairs between two orderings of the same items.
#[pyfunction]
fn kendall_tau(a: Vec<String>, b: Vec<String>) -> PyResult<usize> {
    let (r1, r2) = ranking_pair(a, b);
    survey::kendall_tau(&r1, &r2).map_err(py_err)
}

/// Kendall distance divided by the number of pairs.
#[pyfunction]
fn normalized_kendall(a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    let (r1, r2) = ranking_pair(a, b);
    survey::normalized_kendall(&r1, &r2).map_err(py_err)
}

/// Analyzes survey responses (JSONL or CSV text) against a task list (JSON
/// text) and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (responses, tasks, experiment=None))]
fn analyze(py: Python<'_>, responses: &str, tasks: &str, experiment: Option<u8>) -> PyResult<Py<PyAny>> {
    let tasks = tasks_from_json(tasks).map_err(py_err)?;
    let responses = responses_from_str(responses).map_err(py_err)?;
    let experiment = match experiment {
        None => Experiment::infer(&tasks).map_err(py_err)?,
        Some(1) => Experiment::One,
        Some(2) => Experiment::Two,
        Some(n) => return Err(OrnamentError::new_err(format!("experiment must be 1 or 2, got {n}"))),
    };
    let report = py.detach(|| survey::analyze(&tasks, &responses, experiment)).map_err(py_err)?;
    json_to_py(py, &report.to_json_string())
}

/// Embeds a labelled distance matrix with tSNE. Returns a dict with
/// `labels`, `points`, `final_kl` and, for three dimensions, `rgb`.
#[pyfunction]
#[pyo3(signature = (labels, distances, dims=2, seed=0, perplexity=5.0, iterations=1000))]
fn tsne(
    py: Python<'_>,
    labels: Vec<String>,
    distances: Vec<Vec<f64>>,
    dims: usize,
    seed: u64,
    perplexity: f64,
    iterations: usize,
) -> PyResult<Py<PyAny>> {
    let d = DistanceMatrix::new(labels, distances).map_err(py_err)?;
    let opts = TsneOptions { dims, seed, perplexity, iterations, ..TsneOptions::default() };
    let e = py.detach(|| survey::tsne(&d, &opts)).map_err(py_err)?;
    let rgb = if dims == 3 { Some(survey::embedding_to_rgb(&e).map_err(py_err)?) } else { None };
    let out = pyo3::types::PyDict::new(py);
    out.set_item("labels", &e.labels)?;
    out.set_item("points", &e.points)?;
    out.set_item("final_kl", e.final_kl)?;
    if let Some(rgb) = rgb {
        let colors: Vec<(u8, u8, u8)> = rgb.colors.iter().map(|(_, c)| (c[0], c[1], c[2])).collect();
        out.set_item("rgb", colors)?;
    }
    Ok(out.into_any().unbind())
}

#[pymodule]
fn ornament(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("OrnamentError", py.get_type::<OrnamentError>())?;
    m.add("NoPeriodicityError", py.get_type::<NoPeriodicityError>())?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PySignature>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(generate_random, m)?)?;
    m.add_function(wrap_pyfunction!(annotate_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(unit_cell, m)?)?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(group_names, m)?)?;
    m.add_function(wrap_pyfunction!(kendall_tau, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_kendall, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(tsne, m)?)?;
    Ok(())
}
