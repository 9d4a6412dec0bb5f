//! Python bindings for moduli-walls.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use moduli_walls as mw;
use mw::{CellCoordinates, GraphType, C64};

fn to_py(e: mw::Error) -> PyErr {
    match e {
        mw::Error::InvalidDivisor(_) => PyValueError::new_err(e.to_string()),
        e if e.is_infeasible() => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Free branch points `e1`, `e2` in the upper half plane.
#[pyclass(name = "BranchDivisor", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyDivisor {
    inner: mw::BranchDivisor,
}

#[pymethods]
impl PyDivisor {
    #[new]
    fn new(e1: C64, e2: C64) -> PyResult<Self> {
        Ok(PyDivisor {
            inner: mw::BranchDivisor::new(e1, e2).map_err(to_py)?,
        })
    }

    #[getter]
    fn e1(&self) -> C64 {
        self.inner.e1
    }

    #[getter]
    fn e2(&self) -> C64 {
        self.inner.e2
    }

    /// `[1, −1, e1, ē1, e2, ē2]`
    fn branch_points(&self) -> Vec<C64> {
        self.inner.branch_points().to_vec()
    }

    fn sextic(&self, x: C64) -> C64 {
        self.inner.sextic(x)
    }

    fn __repr__(&self) -> String {
        let f = |c: C64| format!("complex({:?}, {:?})", c.re, c.im);
        format!("BranchDivisor({}, {})", f(self.inner.e1), f(self.inner.e2))
    }
}

/// The normalized differential `dη = (x² + a x + b)/w dx`.
#[pyclass(name = "Differential", frozen)]
struct PyDifferential {
    inner: mw::DistinguishedDifferential,
}

#[pymethods]
impl PyDifferential {
    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b
    }

    #[getter]
    fn divisor(&self) -> PyDivisor {
        PyDivisor {
            inner: self.inner.divisor,
        }
    }

    #[getter]
    fn labeled(&self) -> bool {
        self.inner.labeled
    }

    #[getter]
    fn period_residuals(&self) -> (f64, f64) {
        (self.inner.period_residuals[0], self.inner.period_residuals[1])
    }

    fn discriminant(&self) -> f64 {
        self.inner.discriminant()
    }

    fn critical_points(&self) -> (C64, C64) {
        let c = self.inner.critical_points();
        (c.z1, c.z2)
    }

    /// `η(x)`, integrated from 1 in the slit plane.
    fn eta(&self, x: C64) -> PyResult<C64> {
        self.inner.eta(x).map_err(to_py)
    }

    fn w(&self, x: C64) -> PyResult<C64> {
        self.inner.w_at(x).map_err(to_py)
    }

    fn graph_type(&self) -> &'static str {
        mw::classify(&self.inner, mw::graph::DEFAULT_WALL_TOL).name()
    }
}

fn weights_dict<'py>(py: Python<'py>, c: &CellCoordinates) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("type", c.graph_type().name())?;
    for (k, v) in c.names().iter().zip(c.values()) {
        d.set_item(*k, v)?;
    }
    Ok(d)
}

fn weights_from(d: &Bound<'_, PyDict>) -> PyResult<CellCoordinates> {
    let name: String = d
        .get_item("type")?
        .ok_or_else(|| PyValueError::new_err("weights need a 'type' entry"))?
        .extract()?;
    let t = GraphType::from_name(&name).ok_or_else(|| PyValueError::new_err(format!("unknown graph type {name}")))?;
    let mut v = Vec::new();
    for k in CellCoordinates::names_of(t) {
        let x: f64 = d
            .get_item(*k)?
            .ok_or_else(|| PyValueError::new_err(format!("{name} weights need '{k}'")))?
            .extract()?;
        v.push(x);
    }
    CellCoordinates::from_values(t, &v).map_err(to_py)
}

#[pyfunction]
fn normalize(e: PyDivisor) -> PyResult<PyDifferential> {
    Ok(PyDifferential {
        inner: mw::normalize(&e.inner).map_err(to_py)?,
    })
}

/// `(graph type, weights dict)`.
#[pyfunction]
fn forward<'py>(py: Python<'py>, e: PyDivisor) -> PyResult<(&'static str, Bound<'py, PyDict>)> {
    let (t, c) = py.detach(|| mw::forward(&e.inner)).map_err(to_py)?;
    Ok((t.name(), weights_dict(py, &c)?))
}

/// Divisor with the given weights and the final residual.
#[pyfunction]
#[pyo3(signature = (weights, guess, tol = 1e-10))]
fn inverse(py: Python<'_>, weights: &Bound<'_, PyDict>, guess: PyDivisor, tol: f64) -> PyResult<(PyDivisor, f64)> {
    let target = weights_from(weights)?;
    let opts = mw::InverseOptions {
        tol,
        ..Default::default()
    };
    let (e, r) = py
        .detach(|| mw::coords::inverse_with(&target, &guess.inner, &opts))
        .map_err(to_py)?;
    Ok((PyDivisor { inner: e }, r))
}

#[pyfunction]
fn find_wall(py: Python<'_>, seed: PyDivisor) -> PyResult<PyDivisor> {
    let e = py.detach(|| mw::find_wall(&seed.inner)).map_err(to_py)?;
    Ok(PyDivisor { inner: e })
}

/// `(α, β⁴, z)` at a wall point.
#[pyfunction]
fn alpha_beta(e: PyDivisor) -> PyResult<(f64, f64, f64)> {
    mw::alpha_beta(&e.inner).map_err(to_py)
}

/// Expansion data at a wall point as a dict; `branches` holds one dict per
/// free branch point with the contour integrals and their residue values.
#[pyfunction]
fn expansion_data<'py>(py: Python<'py>, e: PyDivisor) -> PyResult<Bound<'py, PyDict>> {
    let x = py.detach(|| mw::expansion_data(&e.inner)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("z", x.z)?;
    d.set_item("alpha", x.alpha)?;
    d.set_item("beta4", x.beta4)?;
    d.set_item("w_z", x.w_z)?;
    d.set_item("radius", x.radius)?;
    d.set_item("wall", weights_dict(py, &x.wall)?)?;
    let mut branches = Vec::new();
    for b in &x.branches {
        let bd = PyDict::new(py);
        bd.set_item("e", b.e)?;
        bd.set_item("I1", b.i1)?;
        bd.set_item("I2", b.i2)?;
        bd.set_item("IC", b.ic)?;
        bd.set_item("ICy", b.icy)?;
        bd.set_item("IC_residue", b.ic_residue)?;
        bd.set_item("ICy_residue", b.icy_residue)?;
        branches.push(bd);
    }
    d.set_item("branches", branches)?;
    Ok(d)
}

/// Fitted log–log slope of the branch-point displacement against the
/// transversal weight on side `sign` (+1 or −1).
#[pyfunction]
fn cusp_slope(py: Python<'_>, wall: PyDivisor, sign: i8, values: Vec<f64>) -> PyResult<(f64, f64)> {
    let f = py
        .detach(|| mw::cusp_exponent(&wall.inner, sign, &values))
        .map_err(to_py)?;
    Ok((f.slope, f.derivative_slope))
}

/// SVG drawing of the graph of `e`.
#[pyfunction]
fn render_svg(py: Python<'_>, e: PyDivisor) -> PyResult<String> {
    py.detach(|| {
        let d = mw::normalize(&e.inner)?;
        let g = mw::build_graph(&d)?;
        Ok(mw::svg::render_svg(&g, &mw::svg::SvgOptions::default()))
    })
    .map_err(to_py)
}

#[pymodule]
fn moduli_walls_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDivisor>()?;
    m.add_class::<PyDifferential>()?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(forward, m)?)?;
    m.add_function(wrap_pyfunction!(inverse, m)?)?;
    m.add_function(wrap_pyfunction!(find_wall, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_beta, m)?)?;
    m.add_function(wrap_pyfunction!(expansion_data, m)?)?;
    m.add_function(wrap_pyfunction!(cusp_slope, m)?)?;
    m.add_function(wrap_pyfunction!(render_svg, m)?)?;
    Ok(())
}
