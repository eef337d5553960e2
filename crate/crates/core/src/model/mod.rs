//! Model definitions: coefficients, kinetics split into stiff-linear and
//! explicit parts, chemotactic sensitivity, homogeneous steady states and the
//! invariant-region bounds derived from the initial data.

mod general;

pub use general::{
    validate_general_hypotheses, Envelopes, GeneralModel, Hypothesis, HypothesisCheck,
    HypothesisReport, HypothesisSampling, ScalarFn, ScalarFn2,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ScalarField, VectorField};

/// Coefficients of the main system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Attractiveness diffusivity η.
    pub eta: f64,
    /// Burglary boost rate ψ.
    pub psi: f64,
    /// Burglar relaxation rate ω.
    pub omega: f64,
    /// Static attractiveness Ã.
    pub atilde: f64,
    /// Sensitivity strength χ in `ϑ(A) = χ log A`.
    pub chi: f64,
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive finite constant (positivity hypothesis on the model coefficients), got {v}"
        )))
    }
}

impl ModelParams {
    pub fn new(eta: f64, psi: f64, omega: f64, atilde: f64, chi: f64) -> Result<Self> {
        let p = Self { eta, psi, omega, atilde, chi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("eta", self.eta)?;
        require_positive("psi", self.psi)?;
        require_positive("omega", self.omega)?;
        require_positive("atilde", self.atilde)?;
        require_positive("chi", self.chi)
    }
}

/// Coefficients of the Short et al. variant `A_t = ηΔA + NA + A⁰ − A`,
/// `N_t = ∇·[∇N − N∇ϑ(A)] − NA + Ā − A⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortParams {
    pub eta: f64,
    /// Intrinsic attractiveness A⁰.
    pub a0: f64,
    /// Average attractiveness Ā.
    pub abar: f64,
    pub chi: f64,
}

impl ShortParams {
    pub fn new(eta: f64, a0: f64, abar: f64, chi: f64) -> Result<Self> {
        let p = Self { eta, a0, abar, chi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("eta", self.eta)?;
        require_positive("a0", self.a0)?;
        require_positive("abar", self.abar)?;
        require_positive("chi", self.chi)
    }

    /// Homogeneous equilibrium `(Ā, (Ā − A⁰)/Ā)`.
    pub fn steady_state(&self) -> (f64, f64) {
        (self.abar, (self.abar - self.a0) / self.abar)
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    Pitcher(ModelParams),
    Short(ShortParams),
    General(GeneralModel),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Pitcher(_) => "pitcher",
            ModelKind::Short(_) => "short",
            ModelKind::General(_) => "general",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelKind::Pitcher(p) => p.validate(),
            ModelKind::Short(p) => p.validate(),
            ModelKind::General(m) => m.validate(),
        }
    }

    /// Attractiveness diffusivity.
    pub fn eta(&self) -> f64 {
        match self {
            ModelKind::Pitcher(p) => p.eta,
            ModelKind::Short(p) => p.eta,
            ModelKind::General(m) => m.eta,
        }
    }

    pub fn pitcher(&self) -> Option<&ModelParams> {
        match self {
            ModelKind::Pitcher(p) => Some(p),
            _ => None,
        }
    }

    /// Face gradient of the sensitivity potential `ϑ(A)` (or `h(A)`).
    pub fn sensitivity(&self, a: &ScalarField, floor: f64) -> Result<VectorField> {
        match self {
            ModelKind::Pitcher(p) => sensitivity_grad(a, p.chi, floor),
            ModelKind::Short(p) => sensitivity_grad(a, p.chi, floor),
            ModelKind::General(m) => {
                check_floor(a, floor)?;
                let hv = a.map(|v| (m.h)(v));
                Ok(hv.gradient())
            }
        }
    }
}

/// Explicit kinetics plus the linear decay rates split off for implicit treatment.
///
/// The full right-hand sides are `r_a − λ_A·A` and `r_n − λ_N·N`.
#[derive(Debug, Clone)]
pub struct Reaction {
    pub r_a: ScalarField,
    pub r_n: ScalarField,
    pub lambda_a: f64,
    pub lambda_n: f64,
}

pub fn reaction_terms(kind: &ModelKind, a: &ScalarField, n: &ScalarField) -> Result<Reaction> {
    a.check_same_grid(n)?;
    if let Some(index) = a.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveA { index, value: a.values()[index] });
    }
    if let Some(index) = n.values().iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::NegativeN { index, value: n.values()[index] });
    }
    let out = match kind {
        ModelKind::Pitcher(p) => Reaction {
            r_a: a.zip_map(n, |a, n| p.psi * n * a * (1.0 - a) + p.atilde)?,
            r_n: ScalarField::constant(*a.grid(), p.omega),
            lambda_a: 1.0,
            lambda_n: p.omega,
        },
        ModelKind::Short(p) => Reaction {
            r_a: a.zip_map(n, |a, n| n * a + p.a0)?,
            r_n: a.zip_map(n, |a, n| -n * a + p.abar - p.a0)?,
            lambda_a: 1.0,
            lambda_n: 0.0,
        },
        ModelKind::General(m) => Reaction {
            r_a: a.zip_map(n, |a, n| (m.f)(a, n))?,
            r_n: a.zip_map(n, |a, n| (m.g)(a, n))?,
            lambda_a: 1.0,
            lambda_n: m.omega,
        },
    };
    Ok(out)
}

fn check_floor(a: &ScalarField, floor: f64) -> Result<()> {
    let (index, value) = a.argmin();
    if value < floor || !(value > 0.0) {
        return Err(Error::FloorViolation { index, value, floor });
    }
    Ok(())
}

/// `∇ϑ(A) = χ ∇A / A` on faces, with `A` averaged to the face.
pub fn sensitivity_grad(a: &ScalarField, chi: f64, floor: f64) -> Result<VectorField> {
    check_floor(a, floor)?;
    let g = *a.grid();
    let inv_h = 1.0 / g.h();
    Ok(VectorField::from_faces(
        g,
        |i, j| {
            let (l, r) = (a.get(i - 1, j), a.get(i, j));
            chi * (r - l) * inv_h / (0.5 * (l + r))
        },
        |i, j| {
            let (b, t) = (a.get(i, j - 1), a.get(i, j));
            chi * (t - b) * inv_h / (0.5 * (b + t))
        },
    ))
}

/// Homogeneous steady state of the main system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub a_star: f64,
    pub n_star: f64,
    /// `ψ a*(1 − a*) + Ã − a*`.
    pub residual: f64,
}

/// Tolerance on the algebraic residual of [`steady_state`].
pub const STEADY_RESIDUAL_TOL: f64 = 1e-12;

/// Positive root of `ψA² + (1 − ψ)A − Ã = 0`, paired with `N* = 1`.
pub fn steady_state(params: &ModelParams) -> Result<SteadyState> {
    params.validate()?;
    let (psi, at) = (params.psi, params.atilde);
    let b = 1.0 - psi;
    let root = (b * b + 4.0 * psi * at).sqrt();
    // pick the cancellation-free branch of the quadratic formula
    let mut a = if b >= 0.0 { 2.0 * at / (b + root) } else { (root - b) / (2.0 * psi) };
    let resid = |a: f64| psi * a * (1.0 - a) + at - a;
    let slope = |a: f64| psi * (1.0 - 2.0 * a) - 1.0;
    let r = resid(a);
    if r != 0.0 {
        let polished = a - r / slope(a);
        if resid(polished).abs() < r.abs() {
            a = polished;
        }
    }
    let residual = resid(a);
    if residual.abs() > STEADY_RESIDUAL_TOL * (1.0 + at) {
        return Err(Error::InvalidParameter(format!(
            "steady state residual {residual:e} exceeds tolerance"
        )));
    }
    Ok(SteadyState { a_star: a, n_star: 1.0, residual })
}

/// Invariant-region bounds determined by the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedBounds {
    pub a_min: f64,
    pub a_max: f64,
    pub n1_max: f64,
}

impl DerivedBounds {
    pub fn new(a_min: f64, a_max: f64, n1_max: f64) -> Result<Self> {
        if !(a_min > 0.0 && a_max >= a_min && n1_max > 0.0 && a_max.is_finite() && n1_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bounds need 0 < a_min <= a_max and n1_max > 0 (got {a_min}, {a_max}, {n1_max})"
            )));
        }
        Ok(Self { a_min, a_max, n1_max })
    }

    pub fn oscillation(&self) -> f64 {
        self.a_max - self.a_min
    }
}

/// `A_min = min{1, Ã, min A₀}`, `A_max = max{1, Ã, max A₀}`,
/// `N₁,max = max{‖N₀‖₁, |Ω|}`.
pub fn derived_bounds(a0: &ScalarField, n0: &ScalarField, params: &ModelParams) -> Result<DerivedBounds> {
    a0.check_same_grid(n0)?;
    check_initial_data(a0, n0)?;
    let a_min = 1f64.min(params.atilde).min(a0.min());
    let a_max = 1f64.max(params.atilde).max(a0.max());
    let n1 = n0.lp_norm(1.0)?;
    DerivedBounds::new(a_min, a_max, n1.max(a0.grid().area()))
}

pub(crate) fn check_initial_data(a0: &ScalarField, n0: &ScalarField) -> Result<()> {
    a0.check_finite().map_err(|e| Error::InvalidInitialData(e.to_string()))?;
    n0.check_finite().map_err(|e| Error::InvalidInitialData(e.to_string()))?;
    let (ia, va) = a0.argmin();
    if !(va > 0.0) {
        return Err(Error::InvalidInitialData(format!("A0 must be positive, found {va} at cell {ia}")));
    }
    let (inn, vn) = n0.argmin();
    if !(vn >= 0.0) {
        return Err(Error::InvalidInitialData(format!("N0 must be nonnegative, found {vn} at cell {inn}")));
    }
    Ok(())
}
