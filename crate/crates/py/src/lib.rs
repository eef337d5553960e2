//! Python bindings: the `hotspot` extension module.
//!
//! Fields cross the boundary as nested lists indexed `[j][i]` (row `j` is the
//! `j`-th cell in `y`).

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use hotspot_core::analysis::{self, interpolation_probe, poincare_probe, DiagnosticsRecord, Route};
use hotspot_core::grid::{self as core_grid, sample_cosine_field, ScalarField};
use hotspot_core::model::{self, ModelKind};
use hotspot_core::solver::{self, FluxScheme, InitialCondition, Outcome, SimConfig};

create_exception!(hotspot, HotspotError, PyValueError);

fn err(e: hotspot_core::Error) -> PyErr {
    HotspotError::new_err(e.to_string())
}

fn rows(f: &ScalarField) -> Vec<Vec<f64>> {
    f.values().chunks(f.grid().n()).map(<[f64]>::to_vec).collect()
}

#[pyclass(name = "GridSpec", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGridSpec(core_grid::GridSpec);

#[pymethods]
impl PyGridSpec {
    #[new]
    #[pyo3(signature = (length, n))]
    fn new(length: f64, n: usize) -> PyResult<Self> {
        core_grid::GridSpec::new(length, n).map(Self).map_err(err)
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn area(&self) -> f64 {
        self.0.area()
    }

    /// Cell-center coordinates `(x, y)` of cell `(i, j)`.
    fn center(&self, i: usize, j: usize) -> (f64, f64) {
        self.0.center(i, j)
    }

    fn __repr__(&self) -> String {
        format!("GridSpec(length={}, n={})", self.0.length(), self.0.n())
    }
}

#[pyclass(name = "ModelParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyModelParams(model::ModelParams);

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (eta=0.1, psi=14.0 / 3.0 * 1e-3, omega=84.0, atilde=0.7, chi=2.0))]
    fn new(eta: f64, psi: f64, omega: f64, atilde: f64, chi: f64) -> PyResult<Self> {
        model::ModelParams::new(eta, psi, omega, atilde, chi).map(Self).map_err(err)
    }

    #[getter]
    fn eta(&self) -> f64 {
        self.0.eta
    }

    #[getter]
    fn psi(&self) -> f64 {
        self.0.psi
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.0.omega
    }

    #[getter]
    fn atilde(&self) -> f64 {
        self.0.atilde
    }

    #[getter]
    fn chi(&self) -> f64 {
        self.0.chi
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("ModelParams(eta={}, psi={}, omega={}, atilde={}, chi={})", p.eta, p.psi, p.omega, p.atilde, p.chi)
    }
}

#[pyclass(name = "ExistenceReport", frozen, get_all)]
struct PyExistenceReport {
    lhs: f64,
    rhs: f64,
    epsilon0: f64,
    holds: bool,
    margin: f64,
    weak_sensitivity_holds: bool,
    /// "smallness", "weak_sensitivity" or "none".
    route: &'static str,
}

#[pymethods]
impl PyExistenceReport {
    fn any_route_holds(&self) -> bool {
        self.holds || self.weak_sensitivity_holds
    }

    fn __repr__(&self) -> String {
        format!("ExistenceReport(lhs={}, rhs={}, route={:?})", self.lhs, self.rhs, self.route)
    }
}

/// Homogeneous steady state: `(A*, N*, residual)`.
#[pyfunction]
fn steady_state(params: &PyModelParams) -> PyResult<(f64, f64, f64)> {
    let s = model::steady_state(&params.0).map_err(err)?;
    Ok((s.a_star, s.n_star, s.residual))
}

/// `(gamma, atilde_minus)`.
#[pyfunction]
#[pyo3(signature = (eta, psi, area=1.0))]
fn critical_constants(eta: f64, psi: f64, area: f64) -> PyResult<(f64, f64)> {
    analysis::critical_constants(eta, psi, area).map_err(err)
}

#[pyfunction]
fn epsilon0_square() -> f64 {
    analysis::epsilon0_square()
}

/// Largest admissible `c` for the weak-sensitivity entropy, or `None` when `chi > 1`.
#[pyfunction]
fn choose_c(chi: f64, eta: f64) -> Option<f64> {
    analysis::choose_c(chi, eta)
}

#[pyfunction]
#[pyo3(signature = (params, a_min, a_max, n1_max, length=1.0, mu_k=None))]
fn check_global_condition(
    params: &PyModelParams,
    a_min: f64,
    a_max: f64,
    n1_max: f64,
    length: f64,
    mu_k: Option<(f64, f64)>,
) -> PyResult<PyExistenceReport> {
    let bounds = model::DerivedBounds::new(a_min, a_max, n1_max).map_err(err)?;
    let domain = core_grid::GridSpec::new(length, core_grid::MIN_CELLS).map_err(err)?;
    let r = analysis::check_global_condition(&params.0, &bounds, &domain, mu_k).map_err(err)?;
    Ok(PyExistenceReport {
        lhs: r.lhs,
        rhs: r.rhs,
        epsilon0: r.epsilon0,
        holds: r.holds,
        margin: r.margin,
        weak_sensitivity_holds: r.weak_sensitivity_holds,
        route: match r.route {
            Route::Smallness => "smallness",
            Route::WeakSensitivity => "weak_sensitivity",
            Route::None => "none",
        },
    })
}

/// Probes one seeded random cosine field; returns a dict of ratios.
#[pyfunction]
#[pyo3(signature = (seed, n=64, max_mode=6, amplitude=1.0))]
fn probe<'py>(py: Python<'py>, seed: u64, n: usize, max_mode: usize, amplitude: f64) -> PyResult<Bound<'py, PyDict>> {
    let grid = core_grid::GridSpec::new(1.0, n).map_err(err)?;
    let s = sample_cosine_field(seed, max_mode, amplitude, grid).map_err(err)?;
    let p = poincare_probe(&s.field).map_err(err)?;
    let k = interpolation_probe(&s.field, Some(&s.coefficients)).map_err(err)?;
    let shifted = s.field.map(|v| v - s.field.min() + 1.0);
    let d = PyDict::new(py);
    d.set_item("ratio_l1", p.ratio_l1)?;
    d.set_item("ratio_k", k.ratio_k)?;
    d.set_item("fourier_gap", k.fourier_gap)?;
    d.set_item("sobolev_slack", analysis::sobolev_slack(&shifted).map_err(err)?)?;
    Ok(d)
}

/// Writes `values` (rows indexed `[j][i]`) in the text field format read by file initial conditions.
#[pyfunction]
#[pyo3(signature = (path, values, length=1.0))]
fn write_field(path: PathBuf, values: Vec<Vec<f64>>, length: f64) -> PyResult<()> {
    let grid = core_grid::GridSpec::new(length, values.len()).map_err(err)?;
    if values.iter().any(|r| r.len() != values.len()) {
        return Err(HotspotError::new_err("field rows must form a square array"));
    }
    let f = ScalarField::from_values(grid, values.concat()).map_err(err)?;
    std::fs::write(&path, core_grid::write_field(&f))
        .map_err(|e| HotspotError::new_err(format!("{}: {e}", path.display())))
}

#[pyfunction]
#[pyo3(signature = (path, length=1.0))]
fn read_field(path: PathBuf, length: f64) -> PyResult<Vec<Vec<f64>>> {
    core_grid::read_field(&path, length).map(|f| rows(&f)).map_err(err)
}

#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    #[pyo3(get)]
    status: &'static str,
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    reason: Option<String>,
    #[pyo3(get)]
    steps: u64,
    #[pyo3(get)]
    rejected_steps: u64,
    #[pyo3(get)]
    max_mass_step_residual: Option<f64>,
    records: Vec<DiagnosticsRecord>,
    final_a: ScalarField,
    final_n: ScalarField,
}

fn record_dict<'py>(py: Python<'py>, r: &DiagnosticsRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("mass_N", r.mass_n)?;
    d.set_item("minA", r.min_a)?;
    d.set_item("maxA", r.max_a)?;
    d.set_item("minN", r.min_n)?;
    d.set_item("grad_A_l2sq", r.grad_a_l2sq)?;
    d.set_item("phi", r.phi)?;
    d.set_item("y_entropy", r.y_entropy)?;
    d.set_item("mass_residual", r.mass_residual)?;
    d.set_item("energy_residuals", r.energy.map(|e| e.r.to_vec()))?;
    d.set_item("flags", r.flags_field())?;
    Ok(d)
}

#[pymethods]
impl PyTrajectory {
    /// One dict per output time.
    #[getter]
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.records.iter().map(|r| record_dict(py, r)).collect()
    }

    #[getter]
    fn final_a(&self) -> Vec<Vec<f64>> {
        rows(&self.final_a)
    }

    #[getter]
    fn final_n(&self) -> Vec<Vec<f64>> {
        rows(&self.final_n)
    }

    fn __repr__(&self) -> String {
        format!("Trajectory(status={:?}, t={}, records={})", self.status, self.t, self.records.len())
    }
}

/// Runs the main system. `ic` is "perturbed_steady" (uses `amplitude`, `mode`),
/// "constants" (uses `a0`, `n0`) or "file" (uses `path_a`, `path_n`).
#[pyfunction]
#[pyo3(signature = (
    params, grid, t_end, dt,
    output_every=None, ic="perturbed_steady", amplitude=0.01, mode=(1, 1),
    a0=None, n0=None, path_a=None, path_n=None, flux_scheme="centered", dt_min=None
))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    params: &PyModelParams,
    grid: &PyGridSpec,
    t_end: f64,
    dt: f64,
    output_every: Option<f64>,
    ic: &str,
    amplitude: f64,
    mode: (usize, usize),
    a0: Option<f64>,
    n0: Option<f64>,
    path_a: Option<PathBuf>,
    path_n: Option<PathBuf>,
    flux_scheme: &str,
    dt_min: Option<f64>,
) -> PyResult<PyTrajectory> {
    let missing = |what: &str| HotspotError::new_err(format!("ic=\"{ic}\" needs {what}"));
    let ic = match ic {
        "perturbed_steady" => InitialCondition::PerturbedSteady { amplitude, mode_j: mode.0, mode_k: mode.1 },
        "constants" => InitialCondition::Constants {
            a0: a0.ok_or_else(|| missing("a0"))?,
            n0: n0.ok_or_else(|| missing("n0"))?,
        },
        "file" => InitialCondition::File {
            path_a: path_a.ok_or_else(|| missing("path_a"))?,
            path_n: path_n.ok_or_else(|| missing("path_n"))?,
        },
        other => return Err(HotspotError::new_err(format!("unknown ic recipe {other:?}"))),
    };
    let mut cfg = SimConfig::new(grid.0, ModelKind::Pitcher(params.0), ic, t_end, dt);
    cfg.flux_scheme = match flux_scheme {
        "centered" => FluxScheme::Centered,
        "upwind" => FluxScheme::Upwind,
        other => return Err(HotspotError::new_err(format!("unknown flux scheme {other:?}"))),
    };
    if let Some(o) = output_every {
        cfg.output_every = o;
    }
    if let Some(m) = dt_min {
        cfg.dt_min = m;
    }
    let tr = py.detach(|| solver::run(&cfg)).map_err(err)?;
    let (status, reason) = match &tr.outcome {
        Outcome::Completed { .. } => ("completed", None),
        Outcome::BlowupSuspected { .. } => ("blowup_suspected", None),
        Outcome::Failed { reason, .. } => ("failed", Some(reason.clone())),
    };
    Ok(PyTrajectory {
        status,
        t: tr.outcome.t(),
        reason,
        steps: tr.stats.steps,
        rejected_steps: tr.stats.rejected_steps,
        max_mass_step_residual: tr.stats.max_mass_step_residual,
        records: tr.records,
        final_a: tr.final_state.a,
        final_n: tr.final_state.n,
    })
}

#[pymodule]
fn hotspot(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("HotspotError", m.py().get_type::<HotspotError>())?;
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyExistenceReport>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(critical_constants, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon0_square, m)?)?;
    m.add_function(wrap_pyfunction!(choose_c, m)?)?;
    m.add_function(wrap_pyfunction!(check_global_condition, m)?)?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    m.add_function(wrap_pyfunction!(write_field, m)?)?;
    m.add_function(wrap_pyfunction!(read_field, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
