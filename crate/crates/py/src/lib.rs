//! Python bindings for `blt-core`.
//!
//! Results with several fields come back as plain dicts.

use std::path::PathBuf;

use blt_core::degree::{mollify, qp_defect, vmo_degree};
use blt_core::oscillation::{bmo_direct, bmo_lp, spq_norm, vmo_modulus, window_field, PlanarField, Rect};
use blt_core::scenario::{self, ScenarioConfig};
use blt_core::signal::{fourier_transform, make_signal, sobolev_norm, Domain, SampledSignal, SignalKind, SobolevSpec};
use blt_core::zak::{frame_diagnostics, frame_ratio, qp_residual, zak_fourier_check, zak_transform, ZakField};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: blt_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn kind(name: &str, order: Option<u32>, transition: Option<f64>) -> PyResult<SignalKind> {
    Ok(match name {
        "box" => SignalKind::Box,
        "hat" => SignalKind::Hat,
        "bspline" => SignalKind::Bspline {
            order: order.ok_or_else(|| PyValueError::new_err("bspline needs an order"))?,
        },
        "gaussian" => SignalKind::Gaussian,
        "smoothed_box" => SignalKind::SmoothedBox {
            transition: transition.unwrap_or(0.5),
        },
        other => return Err(PyValueError::new_err(format!("unknown signal family {other:?}"))),
    })
}

/// A complex signal sampled on a uniform grid.
#[pyclass(name = "Signal", frozen)]
#[derive(Debug)]
struct PySignal(SampledSignal);

#[pymethods]
impl PySignal {
    /// Generator of the named family sampled at `1 / n` with `pad` units of zeros per side.
    #[staticmethod]
    #[pyo3(signature = (family, n, pad = 0.0, order = None, transition = None))]
    fn generator(family: &str, n: usize, pad: f64, order: Option<u32>, transition: Option<f64>) -> PyResult<Self> {
        let k = kind(family, order, transition)?;
        make_signal(&k, 1.0 / n as f64, pad).map(Self).map_err(err)
    }

    #[new]
    fn new(start: f64, step: f64, samples: Vec<Complex64>) -> PyResult<Self> {
        SampledSignal::new(start, step, samples, Domain::Time).map(Self).map_err(err)
    }

    #[getter]
    fn start(&self) -> f64 {
        self.0.start()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.0.step()
    }

    fn samples(&self) -> Vec<Complex64> {
        self.0.samples().to_vec()
    }

    fn times(&self) -> Vec<f64> {
        (0..self.0.len()).map(|i| self.0.time_of(i)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn fourier(&self) -> Self {
        Self(fourier_transform(&self.0))
    }

    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        Ok(sobolev_norm(&self.0, SobolevSpec::new(s).map_err(err)?))
    }

    fn __repr__(&self) -> String {
        format!("Signal(start={}, step={}, len={})", self.0.start(), self.0.step(), self.0.len())
    }
}

/// Samples of the Zak transform on the unit square.
#[pyclass(name = "Zak", frozen)]
struct PyZak {
    field: ZakField,
    source: SampledSignal,
}

#[pymethods]
impl PyZak {
    #[getter]
    fn nx(&self) -> usize {
        self.field.nx()
    }

    #[getter]
    fn ny(&self) -> usize {
        self.field.ny()
    }

    fn get(&self, j: usize, k: usize) -> PyResult<Complex64> {
        if j >= self.field.nx() || k >= self.field.ny() {
            return Err(PyValueError::new_err(format!("index ({j}, {k}) out of range")));
        }
        Ok(self.field.get(j, k))
    }

    /// Rows indexed by `x`, columns by `y`.
    fn values(&self) -> Vec<Vec<Complex64>> {
        self.field.values().chunks(self.field.ny()).map(<[_]>::to_vec).collect()
    }

    fn l2_norm(&self) -> f64 {
        self.field.l2_norm()
    }

    #[pyo3(signature = (refine_tol = 1e-10))]
    fn frame_diagnostics<'py>(&self, py: Python<'py>, refine_tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &frame_diagnostics(&self.field, refine_tol))
    }

    fn qp_residual(&self) -> PyResult<f64> {
        qp_residual(&self.source, &self.field).map_err(err)
    }

    #[pyo3(signature = (eps = vec![0.125, 0.0625, 0.03125], points_per_side = 64))]
    fn degree<'py>(&self, py: Python<'py>, eps: Vec<f64>, points_per_side: usize) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &vmo_degree(&self.field, &eps, points_per_side).map_err(err)?)
    }

    fn qp_defect<'py>(&self, py: Python<'py>, eps: f64) -> PyResult<Bound<'py, PyAny>> {
        let m = mollify(&self.field, eps, None).map_err(err)?;
        to_py(py, &qp_defect(&m).map_err(err)?)
    }

    /// Smoothly windowed quasi-periodic extension to `[lo, hi]²`.
    #[pyo3(signature = (lo, hi, transition = 0.5, torus_side = None))]
    fn window(&self, lo: f64, hi: f64, transition: f64, torus_side: Option<f64>) -> PyResult<PyField> {
        window_field(&self.field, Rect::square(lo, hi), transition, torus_side)
            .map(PyField)
            .map_err(err)
    }
}

/// A complex field on a uniform planar grid.
#[pyclass(name = "Field", frozen)]
struct PyField(PlanarField);

#[pymethods]
impl PyField {
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.0.nx(), self.0.ny())
    }

    #[getter]
    fn step(&self) -> f64 {
        self.0.step()
    }

    fn scale_range(&self) -> (i32, i32) {
        self.0.scale_range()
    }

    #[pyo3(signature = (scale_range = None))]
    fn bmo_direct(&self, scale_range: Option<(i32, i32)>) -> PyResult<f64> {
        bmo_direct(&self.0, scale_range.unwrap_or(self.0.scale_range())).map_err(err)
    }

    #[pyo3(signature = (c = 3, scale_range = None))]
    fn bmo_lp(&self, c: i32, scale_range: Option<(i32, i32)>) -> PyResult<f64> {
        bmo_lp(&self.0, c, scale_range.unwrap_or(self.0.scale_range())).map_err(err)
    }

    /// `(scales, values)` from the coarsest scale down.
    #[pyo3(signature = (scale_range = None))]
    fn vmo_modulus(&self, scale_range: Option<(i32, i32)>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let p = vmo_modulus(&self.0, scale_range.unwrap_or(self.0.scale_range())).map_err(err)?;
        Ok((p.scales, p.values))
    }

    fn spq_norm(&self, p: f64, q: f64) -> PyResult<f64> {
        spq_norm(&self.0, p, q).map_err(err)
    }
}

#[pyfunction]
fn zak(signal: &PySignal, ny: usize) -> PyResult<PyZak> {
    let field = zak_transform(&signal.0, ny).map_err(err)?;
    Ok(PyZak {
        field,
        source: signal.0.clone(),
    })
}

#[pyfunction]
fn zak_fourier<'py>(py: Python<'py>, signal: &PySignal, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &zak_fourier_check(&signal.0, n).map_err(err)?)
}

#[pyfunction(name = "frame_ratio")]
#[pyo3(signature = (window, x, m_max = None))]
fn py_frame_ratio<'py>(py: Python<'py>, window: &PySignal, x: &PySignal, m_max: Option<usize>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &frame_ratio(&window.0, &x.0, m_max).map_err(err)?)
}

/// Runs a scenario from a JSON config and returns the report.
#[pyfunction]
#[pyo3(signature = (config_json, out_dir))]
fn run_scenario<'py>(py: Python<'py>, config_json: &str, out_dir: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let cfg: ScenarioConfig = serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py
        .detach(|| scenario::run(cfg, None, Some(out_dir), None, std::path::Path::new(".")))
        .map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn blt_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignal>()?;
    m.add_class::<PyZak>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(zak, m)?)?;
    m.add_function(wrap_pyfunction!(zak_fourier, m)?)?;
    m.add_function(wrap_pyfunction!(py_frame_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
