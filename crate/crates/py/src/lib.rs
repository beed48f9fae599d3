//! Python bindings: domains, torsion fields, and the analysis commands.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use soapbubble::bubbling::ConstantsLedger;
use soapbubble::experiments::{run, Command, Scenario};
use soapbubble::geometry::{geometric_summary, sample_boundary, FamilySpec, ImplicitDomain, Shape};
use soapbubble::torsion::{solve_torsion, TorsionSolution};
use soapbubble::{tubular, Error};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::ConfigParse(_) | Error::InvalidFamilyParams { .. } | Error::UnsupportedDimension { .. } | Error::Json(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Accept a JSON string or any `json.dumps`-able object.
fn json_text(obj: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = obj.extract::<String>() {
        return Ok(s);
    }
    let json = obj.py().import("json")?;
    json.call_method1("dumps", (obj,))?.extract()
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(to_py(py, x)?)?;
            }
            list.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn serialize<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, &v)
}

/// An implicit domain on a Cartesian grid.
#[pyclass(module = "pysoapbubble")]
struct Domain {
    inner: ImplicitDomain,
}

#[pymethods]
impl Domain {
    /// Build from a family spec such as
    /// `{"family": "ball", "N": 2, "params": {"rho": 1.0}}`.
    #[new]
    #[pyo3(signature = (spec, h=None))]
    fn new(spec: &Bound<'_, PyAny>, h: Option<f64>) -> PyResult<Self> {
        let spec: FamilySpec = serde_json::from_str(&json_text(spec)?).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let shape = Shape::from_spec(&spec).map_err(to_py_err)?;
        Ok(Domain { inner: ImplicitDomain::build(shape, h).map_err(to_py_err)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    /// Grid node counts per axis.
    #[getter]
    fn shape(&self) -> Vec<usize> {
        self.inner.grid.n[..self.inner.dim()].to_vec()
    }

    fn contains(&self, x: Vec<f64>) -> bool {
        self.inner.contains(point(&x))
    }

    fn distance(&self, x: Vec<f64>) -> f64 {
        self.inner.distance(point(&x))
    }

    /// Volume, perimeter, R, H0, M0, delta and friends.
    #[pyo3(signature = (samples=4000))]
    fn summary<'py>(&self, py: Python<'py>, samples: usize) -> PyResult<Bound<'py, PyAny>> {
        let d = &self.inner;
        let b = sample_boundary(&d.shape, &d.grid, &d.level, samples).map_err(to_py_err)?;
        serialize(py, &geometric_summary(d, &b).map_err(to_py_err)?)
    }

    fn tubular_volume(&self, eta: f64) -> f64 {
        tubular::tubular_volume(&self.inner, eta)
    }

    /// Solve `Laplace u = N` with zero boundary values.
    fn solve(&self) -> PyResult<Torsion> {
        Ok(Torsion { inner: solve_torsion(&self.inner).map_err(to_py_err)? })
    }
}

fn point(x: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    for (k, v) in x.iter().take(3).enumerate() {
        p[k] = *v;
    }
    p
}

/// Torsion function on a domain's grid.
#[pyclass(module = "pysoapbubble")]
struct Torsion {
    inner: TorsionSolution,
}

#[pymethods]
impl Torsion {
    #[getter]
    fn max_neg_u(&self) -> f64 {
        self.inner.max_neg_u
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn max_interior_grad(&self) -> f64 {
        self.inner.max_interior_grad
    }

    /// Nodal values, x fastest; zero outside the domain.
    fn values(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    fn u_at(&self, x: Vec<f64>) -> f64 {
        self.inner.interpolate_u(point(&x))
    }

    fn grad_at(&self, x: Vec<f64>) -> Vec<f64> {
        self.inner.interpolate_grad(point(&x))[..self.inner.dim()].to_vec()
    }
}

fn command<'py>(py: Python<'py>, cmd: Command, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let scenario = Scenario::from_json(&json_text(config)?).map_err(to_py_err)?;
    let out = py.detach(|| run(cmd, &scenario)).map_err(to_py_err)?;
    serialize(py, &out)
}

/// Full pipeline on a scenario config; returns the report as a dict.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    command(py, Command::Analyze, config)
}

#[pyfunction]
fn sweep<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    command(py, Command::Sweep, config)
}

#[pyfunction]
fn annulus<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    command(py, Command::Annulus, config)
}

#[pyfunction]
fn identity<'py>(py: Python<'py>, config: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    command(py, Command::Identity, config)
}

#[pyfunction]
#[pyo3(signature = (dim, d_omega, m0_minus, g, volume, cbar=None))]
fn constants_ledger<'py>(
    py: Python<'py>,
    dim: usize,
    d_omega: f64,
    m0_minus: f64,
    g: f64,
    volume: f64,
    cbar: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &ConstantsLedger::new(dim, d_omega, m0_minus, g, volume, cbar))
}

#[pymodule]
fn pysoapbubble(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Domain>()?;
    m.add_class::<Torsion>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(annulus, m)?)?;
    m.add_function(wrap_pyfunction!(identity, m)?)?;
    m.add_function(wrap_pyfunction!(constants_ledger, m)?)?;
    Ok(())
}
