//! IMEX time integration: implicit diffusion and linear decay through the
//! cosine-transform Helmholtz solver, explicit chemotactic transport and
//! nonlinear reaction.

mod run;

pub use run::{run, run_observed, Outcome, RunStats, Trajectory};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{read_field, GridSpec, HelmholtzSolver, ScalarField, VectorField};
use crate::model::{self, reaction_terms, DerivedBounds, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub a: ScalarField,
    pub n: ScalarField,
    pub step_count: u64,
}

impl SimState {
    pub fn new(t: f64, a: ScalarField, n: ScalarField) -> Result<Self> {
        a.check_same_grid(&n)?;
        Ok(Self { t, a, n, step_count: 0 })
    }

    pub fn grid(&self) -> &GridSpec {
        self.a.grid()
    }

    pub fn mass_n(&self) -> f64 {
        self.n.integral()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxScheme {
    #[default]
    Centered,
    Upwind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "recipe", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Constants { a0: f64, n0: f64 },
    /// `A₀ = A* + amplitude·cos(jπx/L)cos(kπy/L)`, `N₀ = N*`.
    PerturbedSteady { amplitude: f64, mode_j: usize, mode_k: usize },
    File { path_a: PathBuf, path_n: PathBuf },
}

impl InitialCondition {
    pub fn build(&self, kind: &ModelKind, grid: GridSpec) -> Result<(ScalarField, ScalarField)> {
        let (a, n) = match self {
            InitialCondition::Constants { a0, n0 } => {
                (ScalarField::constant(grid, *a0), ScalarField::constant(grid, *n0))
            }
            InitialCondition::PerturbedSteady { amplitude, mode_j, mode_k } => {
                let (a_star, n_star) = match kind {
                    ModelKind::Pitcher(p) => {
                        let s = model::steady_state(p)?;
                        (s.a_star, s.n_star)
                    }
                    ModelKind::Short(p) => p.steady_state(),
                    ModelKind::General(_) => {
                        return Err(Error::InvalidInitialData(
                            "perturbed_steady needs a model with a known homogeneous state".into(),
                        ))
                    }
                };
                let w = std::f64::consts::PI / grid.length();
                let (j, k) = (*mode_j as f64, *mode_k as f64);
                let a = ScalarField::from_fn(grid, |x, y| {
                    a_star + amplitude * (j * w * x).cos() * (k * w * y).cos()
                });
                (a, ScalarField::constant(grid, n_star))
            }
            InitialCondition::File { path_a, path_n } => {
                let a = read_field(path_a, grid.length())?;
                let n = read_field(path_n, grid.length())?;
                if *a.grid() != grid || *n.grid() != grid {
                    return Err(Error::InvalidInitialData(format!(
                        "field files must match the configured grid (L = {}, n = {})",
                        grid.length(),
                        grid.n()
                    )));
                }
                (a, n)
            }
        };
        model::check_initial_data(&a, &n)?;
        Ok((a, n))
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub grid: GridSpec,
    pub model: ModelKind,
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub cfl_advection: f64,
    pub flux_scheme: FluxScheme,
    pub output_every: f64,
    pub ic: InitialCondition,
    pub guard_tol: f64,
    /// Lower cutoff for `A` in the sensitivity; defaults to half the lower bound.
    pub sensitivity_floor: Option<f64>,
    /// Retain the state at every output time in the trajectory.
    pub keep_snapshots: bool,
}

pub const DEFAULT_CFL: f64 = 0.5;
pub const DEFAULT_GUARD_TOL: f64 = 1e-6;
const DT_GROWTH: f64 = 1.1;

impl SimConfig {
    pub fn new(grid: GridSpec, model: ModelKind, ic: InitialCondition, t_end: f64, dt_init: f64) -> Self {
        Self {
            grid,
            model,
            t_end,
            dt_init,
            dt_min: dt_init * 1e-6,
            cfl_advection: DEFAULT_CFL,
            flux_scheme: FluxScheme::Centered,
            output_every: t_end / 10.0,
            ic,
            guard_tol: DEFAULT_GUARD_TOL,
            sensitivity_floor: None,
            keep_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("t_end", self.t_end)?;
        positive("dt_init", self.dt_init)?;
        positive("dt_min", self.dt_min)?;
        positive("output_every", self.output_every)?;
        if !(self.cfl_advection > 0.0 && self.cfl_advection <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cfl_advection must lie in (0, 1], got {}",
                self.cfl_advection
            )));
        }
        if !(self.guard_tol >= 0.0 && self.guard_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("guard_tol must be >= 0, got {}", self.guard_tol)));
        }
        if self.dt_min > self.dt_init {
            return Err(Error::InvalidParameter("dt_min must not exceed dt_init".into()));
        }
        if self.output_every < self.dt_min {
            return Err(Error::InvalidParameter("output_every must be at least dt_min".into()));
        }
        if let Some(f) = self.sensitivity_floor {
            positive("sensitivity_floor", f)?;
        }
        Ok(())
    }
}

/// Lower/upper reference values for `A` used by the guards and monitors.
///
/// For the main system these are the invariant-region bounds; the Short
/// variant has no upper invariant and only the lower one is meaningful.
pub fn reference_bounds(kind: &ModelKind, a0: &ScalarField, n0: &ScalarField) -> Result<DerivedBounds> {
    let n1 = n0.lp_norm(1.0)?.max(a0.grid().area());
    match kind {
        ModelKind::Pitcher(p) => model::derived_bounds(a0, n0, p),
        ModelKind::Short(p) => DerivedBounds::new(a0.min().min(p.a0), a0.max().max(p.abar), n1),
        ModelKind::General(m) => DerivedBounds::new(m.a_min, m.a_max, n1),
    }
}

/// Steps one configuration; owns the transform plans so repeated steps reuse them.
pub struct Integrator {
    config: SimConfig,
    helmholtz: HelmholtzSolver,
    bounds: DerivedBounds,
    floor: f64,
}

impl Integrator {
    /// Validates `config` and builds the initial state.
    pub fn new(config: SimConfig) -> Result<(Self, SimState)> {
        config.validate()?;
        let (a0, n0) = config.ic.build(&config.model, config.grid)?;
        let bounds = reference_bounds(&config.model, &a0, &n0)?;
        let it = Self::with_bounds(config, bounds)?;
        let state = SimState::new(0.0, a0, n0)?;
        Ok((it, state))
    }

    pub fn with_bounds(config: SimConfig, bounds: DerivedBounds) -> Result<Self> {
        config.validate()?;
        let floor = config.sensitivity_floor.unwrap_or(0.5 * bounds.a_min);
        let helmholtz = HelmholtzSolver::new(config.grid);
        Ok(Self { config, helmholtz, bounds, floor })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn bounds(&self) -> &DerivedBounds {
        &self.bounds
    }

    pub fn sensitivity_floor(&self) -> f64 {
        self.floor
    }

    fn chemotactic_flux(&self, s: &VectorField, n: &ScalarField) -> Result<VectorField> {
        match self.config.flux_scheme {
            FluxScheme::Centered => s.scale_by_face_mean(n),
            FluxScheme::Upwind => s.scale_by_upwind(n),
        }
    }

    /// One IMEX update of length `dt`.
    pub fn step(&self, state: &SimState, dt: f64) -> Result<SimState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        let kind = &self.config.model;
        let (a, n) = (&state.a, &state.n);
        let s = kind.sensitivity(a, self.floor)?;
        let flux = self.chemotactic_flux(&s, n)?;
        let transport = flux.divergence();
        let r = reaction_terms(kind, a, n)?;

        let a_rhs = a.zip_map(&r.r_a, |a, ra| a + dt * ra)?;
        let a_new = self.helmholtz.solve(&a_rhs, kind.eta(), r.lambda_a, dt)?;

        let mut n_rhs = n.zip_map(&transport, |n, div| n - dt * div)?;
        for (v, rn) in n_rhs.values_mut().iter_mut().zip(r.r_n.values()) {
            *v += dt * rn;
        }
        let n_new = self.helmholtz.solve(&n_rhs, 1.0, r.lambda_n, dt)?;

        a_new.check_finite()?;
        n_new.check_finite()?;
        self.guard(&a_new, &n_new, state.t + dt)?;
        Ok(SimState { t: state.t + dt, a: a_new, n: n_new, step_count: state.step_count + 1 })
    }

    fn guard(&self, a: &ScalarField, n: &ScalarField, t: f64) -> Result<()> {
        let b = &self.bounds;
        // FFT roundoff allowance so zero-oscillation data cannot trip the guard
        let slack = self.config.guard_tol * b.oscillation() + 64.0 * f64::EPSILON * b.a_max;
        let (ia, min_a) = a.argmin();
        if min_a < b.a_min - slack || min_a <= 0.0 {
            return Err(Error::PositivityBreach(format!(
                "A = {min_a} at cell {ia} below {} at t = {t}",
                b.a_min - slack
            )));
        }
        let (inn, min_n) = n.argmin();
        if min_n < -self.config.guard_tol {
            return Err(Error::PositivityBreach(format!("N = {min_n} at cell {inn} at t = {t}")));
        }
        Ok(())
    }

    /// Largest chemotactic face velocity `|∂ϑ(A)/∂n|`.
    pub fn max_face_velocity(&self, state: &SimState) -> Result<f64> {
        Ok(self.config.model.sensitivity(&state.a, self.floor)?.max_abs())
    }

    /// `min(dt_prev·1.1, cfl·h/max|v|, next_output − t)`.
    pub fn adapt_dt(&self, state: &SimState, dt_prev: f64, next_output: f64) -> Result<f64> {
        let mut dt = dt_prev * DT_GROWTH;
        let v = self.max_face_velocity(state)?;
        if v > 0.0 {
            dt = dt.min(self.config.cfl_advection * self.config.grid.h() / v);
        }
        let remaining = next_output.min(self.config.t_end) - state.t;
        if remaining > 0.0 {
            dt = dt.min(remaining);
        }
        Ok(dt)
    }
}

/// Convenience one-off step; builds a transform plan per call.
pub fn step(state: &SimState, dt: f64, config: &SimConfig) -> Result<SimState> {
    let bounds = reference_bounds(&config.model, &state.a, &state.n)?;
    Integrator::with_bounds(config.clone(), bounds)?.step(state, dt)
}

/// `|(M′ − M) − dt·(ω|Ω| − ωM′)| / max(M′, |Ω|)` for one implicit-decay step.
pub fn mass_step_residual(before: &SimState, after: &SimState, omega: f64) -> f64 {
    let dt = after.t - before.t;
    let area = before.grid().area();
    let (m0, m1) = (before.mass_n(), after.mass_n());
    ((m1 - m0) - dt * omega * (area - m1)).abs() / m1.max(area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelParams, ShortParams};

    const PSI: f64 = 14.0 / 3.0 * 1e-3;

    fn config(p: ModelParams, ic: InitialCondition, n: usize) -> SimConfig {
        SimConfig::new(GridSpec::new(1.0, n).unwrap(), ModelKind::Pitcher(p), ic, 1.0, 1e-3)
    }

    #[test]
    fn steady_constants_are_fixed_points() {
        let p = ModelParams::new(0.1, PSI, 84.0, 0.7, 2.0).unwrap();
        let s = model::steady_state(&p).unwrap();
        let cfg = config(p, InitialCondition::Constants { a0: s.a_star, n0: 1.0 }, 16);
        let (it, st) = Integrator::new(cfg).unwrap();
        let next = it.step(&st, 0.01).unwrap();
        assert!(next.a.max_abs_diff(&st.a).unwrap() <= 1e-12);
        assert!(next.n.max_abs_diff(&st.n).unwrap() <= 1e-12);
        assert_eq!(next.step_count, 1);
    }

    #[test]
    fn decoupled_limit_keeps_mass_identity() {
        let p = ModelParams { eta: 0.3, psi: 0.0, omega: 2.0, atilde: 1.0, chi: 0.0 };
        let g = GridSpec::new(1.0, 16).unwrap();
        let a = ScalarField::from_fn(g, |x, y| 1.0 + 0.2 * (3.0 * x).cos() * y);
        let n = ScalarField::from_fn(g, |x, y| 0.5 + x * y);
        let st = SimState::new(0.0, a, n).unwrap();
        let mut cfg = config(p, InitialCondition::Constants { a0: 1.0, n0: 1.0 }, 16);
        cfg.model = ModelKind::Pitcher(p);
        let bounds = reference_bounds(&cfg.model, &st.a, &st.n).unwrap();
        let it = Integrator { helmholtz: HelmholtzSolver::new(g), floor: 0.5, bounds, config: cfg };
        let next = it.step(&st, 0.05).unwrap();
        assert!(mass_step_residual(&st, &next, 2.0) <= 1e-10);
        // with chi = 0 the N update is the pure heat/decay solve
        let heat = crate::grid::helmholtz_solve(&st.n.map(|v| v + 0.05 * 2.0), 1.0, 2.0, 0.05).unwrap();
        assert!(next.n.max_abs_diff(&heat).unwrap() < 1e-13);
    }

    #[test]
    fn ode_limit_follows_implicit_decay() {
        let p = ModelParams::new(0.1, PSI, 5.0, 1.0, 2.0).unwrap();
        let cfg = config(p, InitialCondition::Constants { a0: 1.0, n0: 3.0 }, 8);
        let (it, mut st) = Integrator::new(cfg).unwrap();
        let dt = 0.01;
        for _ in 0..50 {
            st = it.step(&st, dt).unwrap();
        }
        let factor = (1.0f64 + 5.0 * dt).powi(-50);
        let discrete = 1.0 + 2.0 * factor;
        assert!((st.n.values()[0] - discrete).abs() < 1e-12);
        let exact = 1.0 + 2.0 * (-5.0f64 * 0.5).exp();
        assert!((st.n.values()[0] - exact).abs() < 0.02);
        assert!(st.a.values().iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn adapt_dt_respects_cfl_and_outputs() {
        let p = ModelParams::new(0.1, PSI, 84.0, 0.7, 2.0).unwrap();
        let cfg = config(p, InitialCondition::PerturbedSteady { amplitude: 0.05, mode_j: 1, mode_k: 0 }, 32);
        let (it, st) = Integrator::new(cfg).unwrap();
        let v = it.max_face_velocity(&st).unwrap();
        assert!(v > 0.0);
        let dt = it.adapt_dt(&st, 1.0, 10.0).unwrap();
        assert!((dt - 0.5 * it.config().grid.h() / v).abs() < 1e-15);
        assert_eq!(it.adapt_dt(&st, 1.0, 1e-4).unwrap(), 1e-4);
        assert!((it.adapt_dt(&st, 1e-6, 10.0).unwrap() - 1.1e-6).abs() < 1e-20);
    }

    #[test]
    fn constant_a_is_limited_only_by_growth_and_outputs() {
        let p = ModelParams::new(0.1, PSI, 84.0, 1.0, 2.0).unwrap();
        let cfg = config(p, InitialCondition::Constants { a0: 1.0, n0: 1.0 }, 8);
        let (it, st) = Integrator::new(cfg).unwrap();
        assert!((it.adapt_dt(&st, 0.1, 5.0).unwrap() - 0.11).abs() < 1e-15);
        assert!((it.adapt_dt(&st, 0.1, 0.05).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn breach_is_an_error_not_a_clamp() {
        let p = ModelParams::new(0.1, PSI, 84.0, 0.7, 2.0).unwrap();
        let g = GridSpec::new(1.0, 16).unwrap();
        let a = ScalarField::from_fn(g, |x, _| if x < 0.5 { 0.7 } else { 1.0 });
        let n = ScalarField::from_fn(g, |x, _| if x < 0.5 { 0.0 } else { 50.0 });
        let cfg = config(p, InitialCondition::Constants { a0: 1.0, n0: 1.0 }, 16);
        let st = SimState::new(0.0, a, n).unwrap();
        let err = step(&st, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::PositivityBreach(_)), "{err:?}");
    }

    #[test]
    fn short_variant_perturbed_start() {
        let p = ShortParams::new(0.2, 0.5, 1.0, 2.0).unwrap();
        let g = GridSpec::new(1.0, 16).unwrap();
        let ic = InitialCondition::PerturbedSteady { amplitude: 0.1, mode_j: 1, mode_k: 1 };
        let (a, n) = ic.build(&ModelKind::Short(p), g).unwrap();
        assert!((a.mean() - 1.0).abs() < 1e-12);
        assert!(n.values().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn invalid_configs_rejected() {
        let p = ModelParams::new(0.1, PSI, 84.0, 0.7, 2.0).unwrap();
        let mut cfg = config(p, InitialCondition::Constants { a0: 1.0, n0: 1.0 }, 8);
        cfg.dt_min = 1.0;
        assert!(cfg.validate().is_err());
        let cfg = config(p, InitialCondition::Constants { a0: -1.0, n0: 1.0 }, 8);
        assert!(matches!(Integrator::new(cfg), Err(Error::InvalidInitialData(_))));
    }
}
