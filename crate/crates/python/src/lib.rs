use std::path::Path;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hpinterp::cli::{self, SweepConfig};
use hpinterp::decomp::decompose;
use hpinterp::fracnorm::{self, gen_eig, interp_norm_discrete, OracleSpec, ThetaParams, Variant};
use hpinterp::hpspace::HpSpace;
use hpinterp::mesh::{self, Mesh};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "h1" => Ok(Variant::H1),
        "seminorm" => Ok(Variant::Seminorm),
        other => Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    }
}

/// An hp space on a 2D triangle/quad mesh.
#[pyclass(name = "Space", frozen)]
struct PySpace {
    inner: HpSpace,
}

impl PySpace {
    fn build(mesh: Mesh, dirichlet: bool) -> PyResult<Self> {
        Ok(Self { inner: HpSpace::new(&mesh, dirichlet).map_err(err)? })
    }

    fn check_len(&self, u: &[f64]) -> PyResult<()> {
        if u.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} coefficients, got {}", self.inner.dim(), u.len())));
        }
        Ok(())
    }
}

#[pymethods]
impl PySpace {
    #[staticmethod]
    #[pyo3(signature = (n, p, dirichlet = false))]
    fn quad_grid(n: usize, p: u32, dirichlet: bool) -> PyResult<Self> {
        Self::build(mesh::quad_grid(n, p, [0.0, 0.0, 1.0, 1.0]), dirichlet)
    }

    #[staticmethod]
    #[pyo3(signature = (n, p, dirichlet = false))]
    fn criss_cross(n: usize, p: u32, dirichlet: bool) -> PyResult<Self> {
        Self::build(mesh::criss_cross(n, p), dirichlet)
    }

    #[staticmethod]
    #[pyo3(signature = (n, p_quad, p_tri, dirichlet = false))]
    fn mixed_strip(n: usize, p_quad: u32, p_tri: u32, dirichlet: bool) -> PyResult<Self> {
        Self::build(mesh::mixed_strip(n, p_quad, p_tri), dirichlet)
    }

    /// Mesh JSON with `vertices`, `elements` and `boundary_edges`.
    #[staticmethod]
    #[pyo3(signature = (text, dirichlet = false))]
    fn from_json(text: &str, dirichlet: bool) -> PyResult<Self> {
        Self::build(mesh::parse_mesh(text).map_err(err)?, dirichlet)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn h_max(&self) -> f64 {
        self.inner.mesh.h_max()
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.mesh.num_elements()
    }

    /// Mass and stiffness matrices as nested lists.
    fn forms(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let (m, s) = self.inner.assemble_forms();
        let rows = |a: &nalgebra::DMatrix<f64>| a.row_iter().map(|r| r.iter().copied().collect()).collect();
        (rows(&m.matrix), rows(&s.matrix))
    }

    /// Value of `u` at the physical point `(x, y)` of element `element`.
    fn eval(&self, u: Vec<f64>, element: usize, x: f64, y: f64) -> PyResult<f64> {
        self.check_len(&u)?;
        if element >= self.inner.mesh.num_elements() {
            return Err(PyValueError::new_err(format!("no element {element}")));
        }
        Ok(self.inner.eval_physical(&u, element, [x, y]))
    }

    /// Exact discrete interpolation norm.
    #[pyo3(signature = (u, theta, variant = "h1"))]
    fn interp_norm(&self, u: Vec<f64>, theta: f64, variant: &str) -> PyResult<f64> {
        self.check_len(&u)?;
        let v = self::variant(variant)?;
        let (m, s) = self.inner.assemble_forms();
        let basis = gen_eig(&m.matrix, &v.form(&m.matrix, &s.matrix)).map_err(err)?;
        let params = ThetaParams::new(theta, v).map_err(err)?;
        Ok(interp_norm_discrete(&u, params, &basis).value)
    }

    /// Interpolation norm over the `levels`-fold enriched space.
    #[pyo3(signature = (u, theta, levels = 2))]
    fn oracle_norm(&self, u: Vec<f64>, theta: f64, levels: usize) -> PyResult<f64> {
        self.check_len(&u)?;
        let spec = OracleSpec { levels, ..OracleSpec::default() };
        Ok(fracnorm::continuous_norm_oracle(&u, &self.inner, theta, spec).map_err(err)?.value)
    }

    /// `(C_low, C_high)` with `C_low² ≤ ‖u‖²_discrete / ‖u‖²_oracle ≤ C_high²`.
    #[pyo3(signature = (theta, levels = 2))]
    fn equivalence_band(&self, theta: f64, levels: usize) -> PyResult<(f64, f64)> {
        let spec = OracleSpec { levels, ..OracleSpec::default() };
        let b = fracnorm::equivalence_band(&self.inner, theta, spec).map_err(err)?;
        Ok((b.low.max(0.0).sqrt(), b.high.max(0.0).sqrt()))
    }

    fn inverse_constant(&self, theta: f64) -> PyResult<f64> {
        fracnorm::inverse_constant(&self.inner, theta).map_err(err)
    }

    /// Largest coefficient error of the summed decomposition parts.
    fn decomposition_residual(&self, u: Vec<f64>) -> PyResult<f64> {
        self.check_len(&u)?;
        Ok(decompose(&u, &self.inner).map_err(err)?.reconstruction_residual(&u))
    }
}

/// `π / (2 sin πθ)`.
#[pyfunction]
fn c_theta(theta: f64) -> PyResult<f64> {
    fracnorm::c_theta(theta).map_err(err)
}

/// Runs a CLI command on a TOML config; returns the CSV text and whether all checks passed.
#[pyfunction]
#[pyo3(signature = (command, config, root = "."))]
fn run(command: &str, config: &str, root: &str) -> PyResult<(String, bool)> {
    let cfg = SweepConfig::parse(config).map_err(err)?;
    let root = Path::new(root);
    let outcome = match command {
        "check-mesh" => cli::check_mesh(&cfg, root),
        "norm" => cli::run_norm(&cfg, root),
        "sweep-equivalence" => cli::run_equivalence_sweep(&cfg, root),
        "sweep-inverse" => cli::run_inverse_sweep(&cfg, root),
        "lift-verify" => cli::run_lift_verify(&cfg),
        "decomp-verify" => cli::run_decomp_verify(&cfg, root),
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    }
    .map_err(err)?;
    Ok((outcome.table.to_csv().map_err(err)?, outcome.passed()))
}

#[pymodule]
#[pyo3(name = "hpinterp_py")]
pub fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(c_theta, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
