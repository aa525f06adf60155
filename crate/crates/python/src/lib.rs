//! Python bindings: `import pyschwarzian`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use schwarzian::bessel::{self, BesselKind};
use schwarzian::catalog::{self, CatalogEntry, ParamValue};
use schwarzian::disconjugacy::{self, ConvexRegion};
use schwarzian::normality;
use schwarzian::ode_link;
use schwarzian::schwarzian as sk;
use schwarzian::verify::{self, Suite, SuiteConfig};
use schwarzian::{Complex64, FunctionExpr, JetSource};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn kind(name: &str) -> PyResult<BesselKind> {
    match name.to_ascii_lowercase().as_str() {
        "j0" => Ok(BesselKind::J0),
        "y0" => Ok(BesselKind::Y0),
        _ => Err(err(format!("unknown Bessel kind `{name}`, expected J0 or Y0"))),
    }
}

fn region(shape: &str, center: Complex64, diameter: f64) -> PyResult<ConvexRegion> {
    match shape {
        "disk" => Ok(ConvexRegion::disk(center, diameter / 2.0)),
        "square" => Ok(ConvexRegion::square(center, diameter / std::f64::consts::SQRT_2)),
        _ => Err(err(format!("unknown shape `{shape}`, expected disk or square"))),
    }
}

/// A meromorphic function: a parsed expression in `z` or a catalog entry.
#[pyclass(name = "Function", frozen)]
struct PyFunction {
    entry: CatalogEntry,
}

#[pymethods]
impl PyFunction {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let expr = FunctionExpr::parse(text).map_err(err)?;
        Ok(PyFunction {
            entry: CatalogEntry {
                name: "expr".into(),
                expr,
                params: Vec::new(),
                known_identity: None,
                singularities: Vec::new(),
                critical_points: Vec::new(),
            },
        })
    }

    /// Catalog entry by family name; integer values stay integers, anything
    /// else is taken as complex.
    #[staticmethod]
    #[pyo3(signature = (name, **params))]
    fn catalog(name: &str, params: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut values: Vec<(String, ParamValue)> = Vec::new();
        if let Some(params) = params {
            for (k, v) in params.iter() {
                let key: String = k.extract()?;
                let value = match v.extract::<i64>() {
                    Ok(n) => ParamValue::Int(n),
                    Err(_) => ParamValue::Complex(v.extract::<Complex64>()?),
                };
                values.push((key, value));
            }
        }
        let refs: Vec<(&str, ParamValue)> = values.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(PyFunction {
            entry: catalog::instantiate(name, &refs).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.entry.name
    }

    #[getter]
    fn singularities(&self) -> Vec<Complex64> {
        self.entry.singularities.clone()
    }

    fn eval(&self, z: Complex64) -> PyResult<Complex64> {
        self.entry.expr.eval(z).map_err(err)
    }

    /// `(lead_order, coefficients)` of the expansion at `z` through `order`.
    fn jet(&self, z: Complex64, order: usize) -> PyResult<(i32, Vec<Complex64>)> {
        let j = self.entry.jet_at(z, order).map_err(err)?;
        Ok((j.lead_order(), j.coeffs().to_vec()))
    }

    fn __str__(&self) -> String {
        self.entry.expr.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Function({:?})", self.entry.expr.to_string())
    }
}

/// `S_k(f)(z)` by the recursion, or by the closed form with `method="closed_form"`.
#[pyfunction]
#[pyo3(name = "schwarzian", signature = (f, k, z, method = "recursive"))]
fn schwarzian_value(f: &PyFunction, k: usize, z: Complex64, method: &str) -> PyResult<Complex64> {
    let v = match method {
        "recursive" => sk::schwarzian_recursive(&f.entry, k, z),
        "closed_form" => sk::schwarzian_closed_form(&f.entry, k, z),
        other => return Err(err(format!("unknown method `{other}`"))),
    }
    .map_err(err)?;
    v.value()
        .ok_or_else(|| err(format!("S_{k} has a pole of order {} at {z}", v.pole_order())))
}

#[pyfunction]
fn pole_order(f: &PyFunction, k: usize, z: Complex64) -> PyResult<u32> {
    sk::pole_order_at(&f.entry, k, z).map_err(err)
}

#[pyfunction]
fn partitions(k: usize) -> PyResult<Vec<Vec<u32>>> {
    Ok(sk::enumerate_partitions(k)
        .map_err(err)?
        .into_iter()
        .map(|t| t.counts().to_vec())
        .collect())
}

/// Closed-form coefficients as `(tuple, "p/q")` pairs.
#[pyfunction]
fn coefficients(k: usize) -> PyResult<Vec<(Vec<u32>, String)>> {
    Ok(sk::closed_form_terms(k)
        .map_err(err)?
        .into_iter()
        .map(|t| (t.tuple.counts().to_vec(), t.coefficient.to_string()))
        .collect())
}

#[pyfunction]
fn grahl(py: Python<'_>, k: usize) -> PyResult<Py<PyDict>> {
    let d = sk::grahl_decompose(k).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("k", d.k)?;
    out.set_item("leading", d.leading.to_string())?;
    out.set_item("ell", d.ell)?;
    let terms: Vec<(Vec<u32>, String, u32, Vec<u32>)> = d
        .terms
        .iter()
        .map(|t| (t.tuple.counts().to_vec(), t.a_mu.to_string(), t.s_mu, t.omegas.clone()))
        .collect();
    out.set_item("terms", terms)?;
    Ok(out.unbind())
}

#[pyfunction]
fn verify_link(py: Python<'_>, f: &PyFunction, k: usize, z: Complex64) -> PyResult<Py<PyDict>> {
    let r = ode_link::verify_link(&f.entry, k, z).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("p0", r.p0_value)?;
    out.set_item("residual", r.residual)?;
    out.set_item("schwarzian_mismatch", r.schwarzian_mismatch)?;
    out.set_item("h", r.h_jet.coeffs().to_vec())?;
    Ok(out.unbind())
}

#[pyfunction]
fn disconjugacy_threshold(k: usize, delta: f64) -> f64 {
    disconjugacy::disconjugacy_threshold(k, delta)
}

/// Zeros of the solution of `y^(k) + p0 y = 0` with the given initial
/// values at the center of a disk or square of the given diameter.
#[pyfunction]
#[pyo3(signature = (p0, k, init, center, diameter, shape = "disk"))]
fn count_solution_zeros(
    p0: &str,
    k: usize,
    init: Vec<Complex64>,
    center: Complex64,
    diameter: f64,
    shape: &str,
) -> PyResult<i64> {
    let p0 = FunctionExpr::parse(p0).map_err(err)?;
    let cell = region(shape, center, diameter)?;
    disconjugacy::count_solution_zeros(&p0, k, &init, &cell).map_err(err)
}

#[pyfunction]
fn pole_count_bound(py: Python<'_>, k: usize, m: f64) -> PyResult<Py<PyDict>> {
    let b = disconjugacy::pole_count_bound(k, m).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("k", b.k)?;
    out.set_item("M", b.m)?;
    out.set_item("delta", b.delta)?;
    out.set_item("cells", b.covering.count)?;
    out.set_item("n_tilde", b.n_tilde)?;
    out.set_item("n", b.n)?;
    Ok(out.unbind())
}

#[pyfunction]
fn bessel_value(kind_name: &str, z: Complex64) -> PyResult<Complex64> {
    bessel::bessel_value(kind(kind_name)?, z).map_err(err)
}

#[pyfunction]
fn bessel_zero(kind_name: &str, n: usize) -> PyResult<f64> {
    bessel::bessel_zero(kind(kind_name)?, n).map_err(err)
}

#[pyfunction]
fn spherical_derivative(f: &PyFunction, z: Complex64) -> PyResult<f64> {
    normality::spherical_derivative(&f.entry, z).map_err(err)
}

#[pyfunction]
fn marty(py: Python<'_>, f: &PyFunction, z: Complex64) -> PyResult<Py<PyDict>> {
    let m = normality::marty_inequality_check(&f.entry, z).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("lhs", m.lhs)?;
    out.set_item("rhs", m.rhs)?;
    out.set_item("holds", m.holds)?;
    out.set_item("degenerate", m.degenerate)?;
    Ok(out.unbind())
}

/// Runs a named verification suite and returns its summary.
#[pyfunction]
#[pyo3(signature = (name, seed = 1, trials = None, ks = None, tolerance = None))]
fn run_suite(
    py: Python<'_>,
    name: &str,
    seed: u64,
    trials: Option<usize>,
    ks: Option<Vec<usize>>,
    tolerance: Option<f64>,
) -> PyResult<Py<PyDict>> {
    let suite = Suite::parse(name).map_err(err)?;
    let mut cfg = SuiteConfig::defaults(suite, seed);
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(ks) = ks {
        cfg.ks = ks;
    }
    if let Some(t) = tolerance {
        cfg.tolerance = t;
    }
    let r = py.detach(|| verify::run_suite(suite, &cfg)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("suite", suite.name())?;
    out.set_item("pass", r.pass)?;
    out.set_item("max_error", r.max_error)?;
    out.set_item("failures", r.failures)?;
    out.set_item("rows", r.rows.len())?;
    Ok(out.unbind())
}

#[pymodule]
fn pyschwarzian(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFunction>()?;
    m.add_function(wrap_pyfunction!(schwarzian_value, m)?)?;
    m.add_function(wrap_pyfunction!(pole_order, m)?)?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(grahl, m)?)?;
    m.add_function(wrap_pyfunction!(verify_link, m)?)?;
    m.add_function(wrap_pyfunction!(disconjugacy_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(count_solution_zeros, m)?)?;
    m.add_function(wrap_pyfunction!(pole_count_bound, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_value, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_zero, m)?)?;
    m.add_function(wrap_pyfunction!(spherical_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(marty, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_and_shapes() {
        assert_eq!(kind("J0").unwrap(), BesselKind::J0);
        assert_eq!(kind("y0").unwrap(), BesselKind::Y0);
        let c = Complex64::new(0.0, 0.0);
        assert_eq!(region("disk", c, 1.0).unwrap().diameter(), 1.0);
        assert!((region("square", c, 1.0).unwrap().diameter() - 1.0).abs() < 1e-15);
    }
}
