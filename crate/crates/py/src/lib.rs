//! Python bindings: `import hcs`.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use std::sync::Arc;

use hcschwartz as core;
use hcschwartz::XiEvaluator;

fn py_err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// An element of SL(n, R).
#[pyclass(name = "GroupElement", module = "hcs", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroupElement(core::GroupElement);

#[pymethods]
impl PyGroupElement {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        core::GroupElement::from_rows(&rows)
            .map(Self)
            .map_err(py_err)
    }

    /// Parses `"a,b;c,d"`.
    #[staticmethod]
    fn parse(literal: &str) -> PyResult<Self> {
        core::GroupElement::parse(literal).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(core::GroupElement::identity(n))
    }

    /// `exp(diag(h))`; `h` should sum to zero.
    #[staticmethod]
    fn exp_diagonal(h: Vec<f64>) -> Self {
        Self(core::GroupElement::exp_diagonal(&h))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    fn length(&self) -> PyResult<f64> {
        core::length(&self.0).map_err(py_err)
    }

    fn __mul__(&self, other: &Self) -> PyResult<Self> {
        if self.0.dim() != other.0.dim() {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(Self(&self.0 * &other.0))
    }

    fn __repr__(&self) -> String {
        format!("GroupElement('{}')", self.0.to_literal())
    }
}

/// Word-metric ball of a built-in presentation (`sanov`, `sl2z`, `sl3z`)
/// or of generator literals.
#[pyclass(name = "Ball", module = "hcs", frozen)]
struct PyBall(Arc<core::BallIndex>);

#[pymethods]
impl PyBall {
    #[new]
    #[pyo3(signature = (group, radius, generators=None))]
    fn new(group: &str, radius: u32, generators: Option<&str>) -> PyResult<Self> {
        let p = match generators {
            Some(g) => core::GroupPresentation::from_literals(group, g),
            None => core::GroupPresentation::builtin(group),
        }
        .map_err(py_err)?;
        let ball = core::generate_ball(&p, radius).map_err(py_err)?;
        Ok(Self(Arc::new(ball)))
    }

    #[getter]
    fn radius(&self) -> u32 {
        self.0.radius()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    /// Number of elements of word length at most `r`.
    fn prefix_len(&self, r: u32) -> usize {
        self.0.prefix_len(r)
    }

    fn element(&self, i: usize) -> PyResult<PyGroupElement> {
        self.check(i)?;
        Ok(PyGroupElement(self.0.element(i)))
    }

    fn word(&self, i: usize) -> PyResult<String> {
        self.check(i)?;
        Ok(self.0.word_string(i))
    }

    fn word_length(&self, i: usize) -> PyResult<u32> {
        self.check(i)?;
        Ok(self.0.word_length(i))
    }

    fn length(&self, i: usize) -> PyResult<f64> {
        self.check(i)?;
        Ok(self.0.length(i))
    }

    /// Lower bound for the left-regular norm of the sphere indicator of
    /// radius `r`, truncated to the ball of radius `truncation`.
    fn sphere_norm_lower(&self, r: u32, truncation: u32) -> PyResult<f64> {
        let f = core::GroupFunction::sphere_indicator(&self.0, r);
        core::lambda_norm_lower(&f, truncation, &core::PowerOptions::default())
            .map(|e| e.lower)
            .map_err(py_err)
    }

    /// Partial sums of `Xi^2 (1+L)^{-2d}` over the spheres up to the radius.
    fn xi_summability(&self, d: f64) -> PyResult<Vec<f64>> {
        let xi = evaluator(self.0.dim(), "auto", 4096, self.0.max_length())?;
        core::xi_summability_partial(self.0.presentation(), d, self.0.radius(), xi.as_ref())
            .map_err(py_err)
    }
}

impl PyBall {
    fn check(&self, i: usize) -> PyResult<()> {
        if i < self.0.len() {
            Ok(())
        } else {
            Err(PyIndexError::new_err(format!(
                "index {i} out of range for a ball of {} elements",
                self.0.len()
            )))
        }
    }
}

fn evaluator(
    n: usize,
    method: &str,
    grid: usize,
    max_length: f64,
) -> PyResult<Box<dyn XiEvaluator>> {
    Ok(match (method, n) {
        ("auto", 2) => Box::new(core::TabulatedXi::for_length(max_length).map_err(py_err)?),
        ("adaptive", _) => Box::new(core::AdaptiveXi::default()),
        (m, _) => {
            let method = if m == "auto" {
                core::XiMethod::Boundary
            } else {
                m.parse().map_err(py_err)?
            };
            let res = if n == 3 {
                ((grid as f64).cbrt().ceil() as usize).max(8)
            } else {
                grid
            };
            Box::new(core::GridXi::new(
                core::BoundaryGrid::new(n, res).map_err(py_err)?,
                method,
            ))
        }
    })
}

/// `(k1, h, k2)` with `g = k1 exp(diag(h)) k2`.
#[pyfunction]
fn cartan(g: &PyGroupElement) -> PyResult<(PyGroupElement, Vec<f64>, PyGroupElement)> {
    let t = core::cartan_decompose(&g.0).map_err(py_err)?;
    Ok((
        PyGroupElement(t.k1),
        t.h.values().to_vec(),
        PyGroupElement(t.k2),
    ))
}

/// Harish-Chandra function; `method` is `adaptive` (n = 2), `boundary` or
/// `iwasawa`.
#[pyfunction]
#[pyo3(signature = (g, method="boundary", grid=4096))]
fn xi(g: &PyGroupElement, method: &str, grid: usize) -> PyResult<f64> {
    evaluator(g.0.dim(), method, grid, 0.0)?
        .at_element(&g.0)
        .map_err(py_err)
}

/// Truncated `C_d` integral as `(value, tail_bound)`.
#[pyfunction]
#[pyo3(signature = (d, n=2, cutoff=20.0))]
fn cd_constant(d: f64, n: usize, cutoff: f64) -> PyResult<(f64, f64)> {
    let roots = core::RootSystemData::sl(n).map_err(py_err)?;
    let spec = core::QuadratureSpec {
        cutoff,
        ..core::QuadratureSpec::default()
    };
    let quad = core::ChamberQuadrature::build(n, &spec).map_err(py_err)?;
    let xi = evaluator(n, "auto", 4096, cutoff)?;
    let est = core::cd_constant(d, &quad, xi.as_ref(), &roots).map_err(py_err)?;
    Ok((est.value, est.tail_bound))
}

/// Runs the verification suite. `config` holds `key = value` lines as in a
/// config file; returns the report bundle as JSON text.
#[pyfunction]
#[pyo3(signature = (config=""))]
fn verify(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = core::RunConfig::from_text(config).map_err(py_err)?;
    let bundle = py.detach(|| core::run_suite(&cfg)).map_err(py_err)?;
    Ok(bundle.to_json())
}

#[pymodule]
fn hcs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroupElement>()?;
    m.add_class::<PyBall>()?;
    m.add_function(wrap_pyfunction!(cartan, m)?)?;
    m.add_function(wrap_pyfunction!(xi, m)?)?;
    m.add_function(wrap_pyfunction!(cd_constant, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("STATEMENTS", core::STATEMENTS.to_vec())?;
    Ok(())
}
