//! Python bindings for the harmrec recovery library.
//!
//! The module mirrors the Rust API at the level most useful from a notebook:
//! a [`Model`] owns the mesh hierarchy and assembled forms for one domain and
//! level, and exposes the Dirichlet solve, Riesz representers of point
//! evaluations, and the full measurement-driven recovery pipeline.

use harmrec::error::Error;
use harmrec::exprlang::parse_field;
use harmrec::fem::{point_eval, Forms};
use harmrec::mesh::{self, CoeffVec, DomainSpec, TriMesh};
use harmrec::{metrics, recovery, riesz};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::Parse(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_domain(name: &str) -> PyResult<DomainSpec> {
    match name {
        "unit_square" => Ok(DomainSpec::UnitSquare),
        "l_shape" => Ok(DomainSpec::LShape),
        other => {
            if let Some(sides) = other
                .strip_prefix("polygon_disc_")
                .and_then(|s| s.parse::<usize>().ok())
            {
                return Ok(DomainSpec::PolygonDisc { sides });
            }
            Err(PyValueError::new_err(format!(
                "unknown domain {other:?}; expected unit_square, l_shape, or polygon_disc_<sides>"
            )))
        }
    }
}

/// Boundary solution and harmonic extension for one measurement point.
#[pyclass(frozen)]
struct Representer {
    #[pyo3(get)]
    point: [f64; 2],
    /// Coefficients on the cyclically ordered boundary loop.
    #[pyo3(get)]
    psi: Vec<f64>,
    /// Vertex coefficients of the discrete harmonic extension.
    #[pyo3(get)]
    phi: Vec<f64>,
    /// psi^T (M + S) psi; equals phi evaluated at the point.
    #[pyo3(get)]
    boundary_energy: f64,
}

/// Output of the recovery pipeline at one level.
#[pyclass(frozen)]
struct Recovery {
    /// Vertex coefficients of the source-only Dirichlet solve.
    #[pyo3(get)]
    u0: Vec<f64>,
    /// Vertex coefficients of the recovered field.
    #[pyo3(get)]
    u_star: Vec<f64>,
    /// Representer expansion coefficients, one per measurement.
    #[pyo3(get)]
    coefficients: Vec<f64>,
    /// Interpolation defects lambda_i(u_star) - omega_i.
    #[pyo3(get)]
    residuals: Vec<f64>,
    /// Singular values of the observation matrix.
    #[pyo3(get)]
    singular_values: Vec<f64>,
    /// Singular values discarded by the relative threshold.
    #[pyo3(get)]
    discarded: usize,
    #[pyo3(get)]
    condition_estimate: f64,
}

#[pymethods]
impl Recovery {
    fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()))
    }
}

/// Mesh hierarchy plus assembled forms for one domain and refinement level.
#[pyclass(frozen)]
struct Model {
    mesh: TriMesh,
    forms: Forms,
}

#[pymethods]
impl Model {
    #[new]
    fn new(domain: &str, level: usize) -> PyResult<Self> {
        let spec = parse_domain(domain)?;
        let mesh = mesh::generate(spec, level).map_err(to_py_err)?;
        let forms = Forms::assemble(&mesh).map_err(to_py_err)?;
        Ok(Self { mesh, forms })
    }

    #[getter]
    fn level(&self) -> usize {
        self.mesh.level
    }

    #[getter]
    fn domain(&self) -> String {
        self.mesh.domain.name()
    }

    #[getter]
    fn num_vertices(&self) -> usize {
        self.mesh.num_vertices()
    }

    #[getter]
    fn num_triangles(&self) -> usize {
        self.mesh.num_triangles()
    }

    #[getter]
    fn num_boundary_vertices(&self) -> usize {
        self.mesh.boundary_loop.len()
    }

    fn vertices(&self) -> Vec<[f64; 2]> {
        self.mesh.vertices.clone()
    }

    fn triangles(&self) -> Vec<[usize; 3]> {
        self.mesh.triangles.clone()
    }

    fn dist_to_boundary(&self, point: [f64; 2]) -> f64 {
        self.mesh.dist_to_boundary(point)
    }

    /// Evaluate a vertex coefficient vector at an arbitrary point.
    fn evaluate(&self, coefficients: Vec<f64>, point: [f64; 2]) -> PyResult<f64> {
        if coefficients.len() != self.mesh.num_vertices() {
            return Err(PyValueError::new_err(format!(
                "expected {} vertex coefficients, got {}",
                self.mesh.num_vertices(),
                coefficients.len()
            )));
        }
        let eval = point_eval(&self.mesh, point).map_err(to_py_err)?;
        Ok(eval.apply(&coefficients))
    }

    /// Homogeneous Dirichlet solve of -Laplace u = f for an expression f.
    fn solve_u0(&self, f: &str) -> PyResult<Vec<f64>> {
        let f = parse_field(f).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let u0 = self.forms.solve_u0(&self.mesh, &f).map_err(to_py_err)?;
        Ok(u0.values)
    }

    /// Riesz representer of point evaluation on discrete harmonic functions.
    fn representer(&self, point: [f64; 2]) -> PyResult<Representer> {
        let pair = riesz::representer_schur(&self.mesh, &self.forms, point).map_err(to_py_err)?;
        let boundary_energy = pair.boundary_energy(&self.forms);
        Ok(Representer {
            point: pair.point,
            psi: pair.psi.values,
            phi: pair.phi.values,
            boundary_energy,
        })
    }

    /// Recover the field from point measurements (points, values).
    #[pyo3(signature = (points, values, f = "0", tau_rel = 1e-14))]
    fn recover(
        &self,
        points: Vec<[f64; 2]>,
        values: Vec<f64>,
        f: &str,
        tau_rel: f64,
    ) -> PyResult<Recovery> {
        let f = parse_field(f).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let set = recovery::MeasurementSet::new(points, values).map_err(to_py_err)?;
        let result = recovery::run_recovery(&self.mesh, &self.forms, &f, &set, tau_rel)
            .map_err(to_py_err)?;
        Ok(Recovery {
            u0: result.u0.values,
            u_star: result.u_star.values,
            coefficients: result.coefficients,
            residuals: result.residuals,
            singular_values: result.observation.svd.sigma.clone(),
            discarded: result.observation.discarded(),
            condition_estimate: result.observation.condition_estimate(),
        })
    }

    /// Max-norm deviation from an expression over fine vertices and centroids.
    #[pyo3(signature = (coefficients, field, d = None))]
    fn linf_field_error(
        &self,
        coefficients: Vec<f64>,
        field: &str,
        d: Option<f64>,
    ) -> PyResult<f64> {
        let field = parse_field(field).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let coeffs = CoeffVec::volume(self.mesh.level, coefficients);
        let eval_set = metrics::EvalSet::new(&self.mesh);
        let restrict = d.map(|d| (d, &eval_set));
        metrics::linf_field_error(&self.mesh, &coeffs, &field, restrict).map_err(to_py_err)
    }
}

/// Measurement points on the sides of the square [0.1, 0.9]^2, four per index.
#[pyfunction]
fn box_formation(m: usize) -> PyResult<Vec<[f64; 2]>> {
    recovery::box_formation(m).map_err(to_py_err)
}

/// Uniform interior lattice with a perfect-square point count.
#[pyfunction]
fn grid_formation(m: usize) -> PyResult<Vec<[f64; 2]>> {
    recovery::grid_formation(m).map_err(to_py_err)
}

/// Representer convergence study; returns one dict per level.
#[pyfunction]
#[pyo3(signature = (domain, point, k_min, k_max, surrogate, d = 0.25))]
fn representer_study(
    py: Python<'_>,
    domain: &str,
    point: [f64; 2],
    k_min: usize,
    k_max: usize,
    surrogate: usize,
    d: f64,
) -> PyResult<Vec<Py<PyAny>>> {
    let spec = parse_domain(domain)?;
    let report =
        metrics::representer_study(spec, point, k_min, k_max, surrogate, d).map_err(to_py_err)?;
    report
        .rows
        .iter()
        .map(|row| {
            let dict = pyo3::types::PyDict::new(py);
            dict.set_item("level", row.level)?;
            dict.set_item("h", row.h)?;
            dict.set_item("err_h1", row.err_h1)?;
            dict.set_item("err_linf", row.err_linf)?;
            dict.set_item("err_linf_d", row.err_linf_d)?;
            dict.set_item("rate_h1", row.rate_h1)?;
            dict.set_item("rate_linf", row.rate_linf)?;
            dict.set_item("rate_linf_d", row.rate_linf_d)?;
            Ok(dict.into_any().unbind())
        })
        .collect()
}

#[pymodule]
fn harmrec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<Representer>()?;
    m.add_class::<Recovery>()?;
    m.add_function(wrap_pyfunction!(box_formation, m)?)?;
    m.add_function(wrap_pyfunction!(grid_formation, m)?)?;
    m.add_function(wrap_pyfunction!(representer_study, m)?)?;
    Ok(())
}
