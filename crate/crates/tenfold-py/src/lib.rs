//! Python bindings. Setups travel as the same JSON documents the CLI reads,
//! reports come back as JSON text, matrices as nested lists of complex.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tenfold::ensemble;
use tenfold::matkit::{C64, CMatrix};
use tenfold::pipeline;
use tenfold::presets;
use tenfold::spec::{self, Report, SetupSpec};
use tenfold::Error;

fn py_err(e: Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &CMatrix) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// A parsed symmetry setup.
#[pyclass(name = "Setup", frozen)]
struct PySetup {
    spec: SetupSpec,
}

#[pymethods]
impl PySetup {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = spec::parse(text).map_err(py_err)?;
        spec.to_setup().map_err(py_err)?;
        Ok(PySetup { spec })
    }

    #[staticmethod]
    #[pyo3(signature = (name, size=None))]
    fn preset(name: &str, size: Option<usize>) -> PyResult<Self> {
        let p = presets::preset(name, size).map_err(py_err)?;
        Ok(PySetup { spec: SetupSpec::from_preset(&p) })
    }

    #[getter]
    fn name(&self) -> String {
        self.spec.name.clone()
    }

    #[getter]
    fn dim_v(&self) -> usize {
        self.spec.dim_v
    }

    fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("setup serializes")
    }

    /// Classification report as JSON.
    #[pyo3(signature = (seed=0))]
    fn classify(&self, seed: u64) -> PyResult<String> {
        self.analyse(false, seed)
    }

    /// Classification plus the nullspace oracle, as JSON.
    #[pyo3(signature = (seed=0))]
    fn verify(&self, seed: u64) -> PyResult<String> {
        self.analyse(true, seed)
    }

    /// Random Hamiltonians on the Nambu space, each a list of rows.
    #[pyo3(signature = (count, seed=0, projection=None))]
    fn sample(&self, count: usize, seed: u64, projection: Option<bool>) -> PyResult<Vec<Vec<Vec<C64>>>> {
        let setup = self.spec.to_setup().map_err(py_err)?;
        let tol = self.spec.tolerance().map_err(py_err)?;
        let hs = ensemble::draw(&setup, tol, count, seed, projection).map_err(py_err)?;
        Ok(hs.iter().map(rows).collect())
    }

    /// Sector levels of `count` samples.
    #[pyo3(signature = (count, seed=0, projection=None))]
    fn spectra(&self, count: usize, seed: u64, projection: Option<bool>) -> PyResult<Vec<Vec<f64>>> {
        let setup = self.spec.to_setup().map_err(py_err)?;
        let tol = self.spec.tolerance().map_err(py_err)?;
        let hs = ensemble::draw(&setup, tol, count, seed, projection).map_err(py_err)?;
        hs.iter().map(|h| ensemble::sector_levels(h, setup.nambu.n)).collect::<Result<_, _>>().map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Setup(name={:?}, dim_v={})", self.spec.name, self.spec.dim_v)
    }
}

impl PySetup {
    fn analyse(&self, verify: bool, seed: u64) -> PyResult<String> {
        let setup = self.spec.to_setup().map_err(py_err)?;
        let tol = self.spec.tolerance().map_err(py_err)?;
        let a = if verify { pipeline::verify_setup(&setup, seed, tol) } else { pipeline::classify_setup(&setup, seed) }.map_err(py_err)?;
        Ok(Report::new(if verify { "verify" } else { "classify" }, &self.spec, seed, tol, &a).to_json())
    }
}

#[pyfunction]
#[pyo3(signature = (all=false))]
fn preset_names(all: bool) -> Vec<&'static str> {
    let mut v = presets::CATALOG.to_vec();
    if all {
        v.extend(presets::EXTRA);
    }
    v
}

/// (mean r, per-sample means, histogram)
type Stats = (f64, Vec<f64>, Vec<(f64, f64)>);

/// Mean gap ratio, per-sample means and histogram of a list of spectra.
#[pyfunction]
#[pyo3(signature = (spectra, bins=50))]
fn gap_ratio_stats(spectra: Vec<Vec<f64>>, bins: usize) -> PyResult<Stats> {
    let s = ensemble::gap_ratio_stats(&spectra, bins).map_err(py_err)?;
    Ok((s.mean_r, s.per_sample, s.histogram))
}

#[pymodule]
fn tenfold_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetup>()?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(gap_ratio_stats, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
