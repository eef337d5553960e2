//! Computable forms of the estimates around the system: the global-existence
//! condition, critical parameter values, entropy functionals, a priori bound
//! monitors, energy-identity residuals and functional-inequality probes.

mod diagnostics;
mod energy;
mod probes;

pub use diagnostics::{DiagnosticsContext, DiagnosticsRecord, DIAGNOSTICS_COLUMNS};
pub use energy::{energy_residuals, EnergyResiduals};
pub use probes::{interpolation_probe, poincare_probe, sobolev_slack, InterpolationProbe, PoincareProbe};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::{DerivedBounds, ModelParams};
use crate::solver::SimState;

/// Square-domain Poincaré–Sobolev constant `μ²`.
pub const MU_SQ_SQUARE: f64 = 1.5;
/// Square-domain interpolation constant `K`.
pub const K_SQUARE: f64 = 12.0;

/// `ε₀ = 1/(3√3)`, the value of `μ⁻² K^{-1/2}` on a square.
pub fn epsilon0_square() -> f64 {
    1.0 / (3.0 * 3f64.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Epsilon0Source {
    SquareClosedForm,
    UserSupplied { mu: f64, k: f64 },
}

/// Which sufficient condition for global existence applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Smallness of `(A_max/A_min)²(A_max − A_min) N₁,max` against `ε₀ η/(ψχ²)`.
    Smallness,
    /// `χ ≤ 1`, `Ã ≤ 1`, `max A₀ ≤ 1`, with no size restriction on `N₀`.
    WeakSensitivity,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionInputs {
    pub eta: f64,
    pub psi: f64,
    pub chi: f64,
    pub atilde: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub n1_max: f64,
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub epsilon0: f64,
    pub epsilon0_source: Epsilon0Source,
    /// Strict smallness `lhs < rhs`.
    pub holds: bool,
    pub margin: f64,
    pub weak_sensitivity_holds: bool,
    /// First route that applies, smallness preferred.
    pub route: Route,
    pub inputs: ConditionInputs,
}

impl ExistenceReport {
    pub fn any_route_holds(&self) -> bool {
        self.route != Route::None
    }
}

pub fn check_global_condition(
    params: &ModelParams,
    bounds: &DerivedBounds,
    domain: &GridSpec,
    mu_k_override: Option<(f64, f64)>,
) -> Result<ExistenceReport> {
    params.validate()?;
    let (epsilon0, epsilon0_source) = match mu_k_override {
        None => (epsilon0_square(), Epsilon0Source::SquareClosedForm),
        Some((mu, k)) => {
            if !(mu > 0.0 && k > 0.0 && mu.is_finite() && k.is_finite()) {
                return Err(Error::InvalidParameter(format!("mu and K must be positive, got {mu}, {k}")));
            }
            (1.0 / (mu * mu * k.sqrt()), Epsilon0Source::UserSupplied { mu, k })
        }
    };
    let DerivedBounds { a_min, a_max, n1_max } = *bounds;
    let lhs = (a_max / a_min).powi(2) * (a_max - a_min) * n1_max;
    let rhs = epsilon0 * params.eta / (params.psi * params.chi * params.chi);
    let holds = lhs < rhs;
    let weak_sensitivity_holds = params.chi <= 1.0 && params.atilde <= 1.0 && a_max <= 1.0;
    let route = if holds {
        Route::Smallness
    } else if weak_sensitivity_holds {
        Route::WeakSensitivity
    } else {
        Route::None
    };
    Ok(ExistenceReport {
        lhs,
        rhs,
        epsilon0,
        epsilon0_source,
        holds,
        margin: rhs - lhs,
        weak_sensitivity_holds,
        route,
        inputs: ConditionInputs {
            eta: params.eta,
            psi: params.psi,
            chi: params.chi,
            atilde: params.atilde,
            a_min,
            a_max,
            n1_max,
            area: domain.area(),
        },
    })
}

/// `γ = 1/(12√3 ψ|Ω|)` and `Ã₋ = 2/(1 + √(1 + 4γη))`.
pub fn critical_constants(eta: f64, psi: f64, area: f64) -> Result<(f64, f64)> {
    for (name, v) in [("eta", eta), ("psi", psi), ("area", area)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let gamma = 1.0 / (12.0 * 3f64.sqrt() * psi * area);
    Ok((gamma, 2.0 / (1.0 + (1.0 + 4.0 * gamma * eta).sqrt())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyParams {
    pub sigma: f64,
    pub c1: f64,
    pub omega_tilde: f64,
}

/// `σ = (2ψ²/η) A_max⁴ μ² N₁,max`,
/// `c₁ = η/2 · (1 − Kχ⁴η⁻²μ⁴ψ²N₁,max² A_min⁻⁴ A_max⁴ (A_max − A_min)²)`.
///
/// Fails with [`Error::InfeasibleRegime`] (carrying both values) when `c₁ ≤ 0`.
pub fn entropy_params(params: &ModelParams, bounds: &DerivedBounds, mu_sq: f64, k: f64) -> Result<EntropyParams> {
    params.validate()?;
    if !(mu_sq > 0.0 && k > 0.0) {
        return Err(Error::InvalidParameter(format!("mu^2 and K must be positive, got {mu_sq}, {k}")));
    }
    let ModelParams { eta, psi, omega, chi, .. } = *params;
    let DerivedBounds { a_min, a_max, n1_max } = *bounds;
    let sigma = 2.0 * psi * psi / eta * a_max.powi(4) * mu_sq * n1_max;
    let product = k * chi.powi(4) / (eta * eta) * mu_sq * mu_sq * psi * psi * n1_max * n1_max
        * (a_max / a_min).powi(4)
        * (a_max - a_min).powi(2);
    let c1 = 0.5 * eta * (1.0 - product);
    if c1 <= 0.0 {
        return Err(Error::InfeasibleRegime { sigma, c1 });
    }
    Ok(EntropyParams { sigma, c1, omega_tilde: omega.min(2.0) })
}

/// Cells whose integrand falls below this are reported rather than ignored.
const ENTROPY_INTEGRAND_TOL: f64 = 1e-12;

/// `∫(N log N − N + 1)`, with the integrand equal to 1 where `N = 0`.
pub fn boltzmann_entropy(n: &crate::grid::ScalarField) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &s) in n.values().iter().enumerate() {
        if s < 0.0 {
            return Err(Error::NegativeN { index, value: s });
        }
        let v = if s == 0.0 { 1.0 } else { s * s.ln() - s + 1.0 };
        if v < -ENTROPY_INTEGRAND_TOL {
            return Err(Error::NegativeEntropyIntegrand { index, value: v });
        }
        sum += v;
    }
    Ok(sum * n.grid().cell_area())
}

/// `φ = σ ∫(N log N − N + 1) + ½‖∇A‖₂²`.
pub fn entropy_phi(state: &SimState, ep: &EntropyParams) -> Result<f64> {
    Ok(ep.sigma * boltzmann_entropy(&state.n)? + 0.5 * state.a.grad_l2sq())
}

/// Vertex `c = (χ + 2η − χη)/(1 + η)²` of `(1+η)²c² − 2c(χ+2η−χη) + χ²`,
/// returned only where the quadratic is nonpositive there.
pub fn choose_c(chi: f64, eta: f64) -> Option<f64> {
    if !(chi > 0.0 && eta > 0.0) {
        return None;
    }
    let a = (1.0 + eta) * (1.0 + eta);
    let b = chi + 2.0 * eta - chi * eta;
    // vertex value χ² − b²/a in factored form, exact in sign at χ = 1
    let q = 4.0 * eta * (chi - 1.0) * (chi + eta) / a;
    (q <= 1e-14).then(|| b / a)
}

/// `Y = ∫ N (log N − c log A)`, with `N log N = 0` where `N = 0`.
pub fn entropy_y(state: &SimState, c: f64) -> Result<f64> {
    let (a, n) = (&state.a, &state.n);
    a.check_same_grid(n)?;
    let mut sum = 0.0;
    for (index, (&av, &nv)) in a.values().iter().zip(n.values()).enumerate() {
        if !(av > 0.0) {
            return Err(Error::NonPositiveA { index, value: av });
        }
        if nv < 0.0 {
            return Err(Error::NegativeN { index, value: nv });
        }
        if nv > 0.0 {
            sum += nv * (nv.ln() - c * av.ln());
        }
    }
    Ok(sum * a.grid().cell_area())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundFlag {
    pub ok: bool,
    /// Distance to the bound, positive on the admissible side.
    pub margin: f64,
}

impl BoundFlag {
    fn new(margin: f64, slack: f64) -> Self {
        Self { ok: margin >= -slack, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundFlags {
    pub a_min: BoundFlag,
    pub a_max: BoundFlag,
    pub n_pos: BoundFlag,
}

impl BoundFlags {
    pub fn all_ok(&self) -> bool {
        self.a_min.ok && self.a_max.ok && self.n_pos.ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriCheck {
    pub flags: BoundFlags,
    pub mass_residual: f64,
}

/// `‖N(t)‖₁ = e^{−ωt}‖N₀‖₁ + |Ω|(1 − e^{−ωt})`.
pub fn mass_law(t: f64, omega: f64, n0_mass: f64, area: f64) -> f64 {
    let decay = (-omega * t).exp();
    decay * n0_mass + area * (1.0 - decay)
}

/// Compares a state against `A ∈ [A_min, A_max]`, `N ≥ 1 − e^{−ωt}` and the mass law.
pub fn verify_apriori(
    state: &SimState,
    bounds: &DerivedBounds,
    params: &ModelParams,
    n0_mass: f64,
    tol: f64,
) -> AprioriCheck {
    let osc = bounds.oscillation();
    let n_floor = 1.0 - (-params.omega * state.t).exp();
    let flags = BoundFlags {
        a_min: BoundFlag::new(state.a.min() - bounds.a_min, tol * osc),
        a_max: BoundFlag::new(bounds.a_max - state.a.max(), tol * osc),
        n_pos: BoundFlag::new(state.n.min() - n_floor, tol),
    };
    let area = state.grid().area();
    let mass_residual = (state.mass_n() - mass_law(state.t, params.omega, n0_mass, area)).abs() / area;
    AprioriCheck { flags, mass_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ScalarField;
    use proptest::prelude::*;

    const PSI: f64 = 14.0 / 3.0 * 1e-3;

    fn params(chi: f64, atilde: f64) -> ModelParams {
        ModelParams::new(0.1, PSI, 84.0, atilde, chi).unwrap()
    }

    fn unit() -> GridSpec {
        GridSpec::new(1.0, 16).unwrap()
    }

    fn constant_state(a: f64, n: f64) -> SimState {
        SimState::new(0.0, ScalarField::constant(unit(), a), ScalarField::constant(unit(), n)).unwrap()
    }

    #[test]
    fn epsilon0_closed_form() {
        assert!((epsilon0_square() - 0.19245008972987526).abs() < 1e-16);
        assert!((1.0 / (MU_SQ_SQUARE * K_SQUARE.sqrt()) - epsilon0_square()).abs() < 1e-15);
    }

    #[test]
    fn condition_examples() {
        let p = params(2.0, 0.7);
        let r = check_global_condition(&p, &DerivedBounds::new(0.7, 1.0, 1.0).unwrap(), &unit(), None).unwrap();
        let lhs = 0.3 / 0.49;
        let rhs = epsilon0_square() * 0.1 / (PSI * 4.0);
        assert!((r.lhs - lhs).abs() < 1e-14 && (r.rhs - rhs).abs() < 1e-12);
        assert!((r.lhs - 0.6122).abs() < 5e-5 && (r.rhs - 1.0310).abs() < 5e-5);
        assert!(r.holds && r.route == Route::Smallness);

        let r = check_global_condition(&p, &DerivedBounds::new(0.5, 1.0, 1.0).unwrap(), &unit(), None).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14 && !r.holds && r.route == Route::None);

        let r = check_global_condition(&params(2.0, 1.0), &DerivedBounds::new(1.0, 1.0, 1.0).unwrap(), &unit(), None)
            .unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.holds);
    }

    #[test]
    fn weak_sensitivity_route_ignores_size() {
        let p = params(0.8, 0.9);
        let r = check_global_condition(&p, &DerivedBounds::new(0.5, 1.0, 1e9).unwrap(), &unit(), None).unwrap();
        assert!(!r.holds);
        assert_eq!(r.route, Route::WeakSensitivity);
        assert!(r.any_route_holds());
    }

    #[test]
    fn user_supplied_constants() {
        let r = check_global_condition(
            &params(2.0, 0.7),
            &DerivedBounds::new(0.7, 1.0, 1.0).unwrap(),
            &unit(),
            Some((2f64.sqrt(), 4.0)),
        )
        .unwrap();
        assert!((r.epsilon0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn critical_values() {
        let (gamma, _) = critical_constants(0.1, PSI, 1.0).unwrap();
        assert!((gamma - 125.0 * 3f64.sqrt() / 21.0).abs() < 1e-12);
        let expect = [(0.01, 0.91389), (0.05, 0.72731), (0.1, 0.61282), (0.2, 0.49492)];
        for (eta, am) in expect {
            let v = critical_constants(eta, PSI, 1.0).unwrap().1;
            // oracle: larger root of γη x² + x − 1 = 0 inverted
            let oracle = (-1.0 + (1.0 + 4.0 * gamma * eta).sqrt()) / (2.0 * gamma * eta);
            assert!((v - oracle).abs() < 1e-14);
            assert!((v - am).abs() < 5e-6, "{eta}: {v}");
        }
        assert!(critical_constants(1e-14, PSI, 1.0).unwrap().1 > 1.0 - 1e-11);
        assert!(critical_constants(0.1, 0.0, 1.0).is_err());
    }

    #[test]
    fn entropy_constants() {
        let p = params(2.0, 0.7);
        let ep = entropy_params(&p, &DerivedBounds::new(0.7, 1.0, 1.0).unwrap(), MU_SQ_SQUARE, K_SQUARE).unwrap();
        assert!((ep.sigma - 2.0 * PSI * PSI / 0.1 * 1.5).abs() < 1e-18);
        assert!((ep.sigma - 6.533e-4).abs() < 1e-7);
        assert!(ep.c1 > 0.0 && ep.c1 < 0.05);
        assert_eq!(ep.omega_tilde, 2.0);

        let flat = entropy_params(&p, &DerivedBounds::new(0.8, 0.8, 1.0).unwrap(), MU_SQ_SQUARE, K_SQUARE).unwrap();
        assert_eq!(flat.c1, 0.05);

        let err = entropy_params(&p, &DerivedBounds::new(0.5, 1.0, 1.0).unwrap(), MU_SQ_SQUARE, K_SQUARE);
        assert!(matches!(err, Err(Error::InfeasibleRegime { c1, .. }) if c1 <= 0.0));
    }

    #[test]
    fn phi_closed_forms() {
        let ep = EntropyParams { sigma: 0.3, c1: 1.0, omega_tilde: 2.0 };
        assert_eq!(entropy_phi(&constant_state(0.8, 1.0), &ep).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((entropy_phi(&constant_state(0.8, e), &ep).unwrap() - 0.3).abs() < 1e-14);
        assert!((entropy_phi(&constant_state(0.8, 0.0), &ep).unwrap() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn choose_c_cases() {
        for eta in [0.01, 0.1, 1.0, 7.0] {
            let c = choose_c(1.0, eta).unwrap();
            assert!((c - 1.0 / (1.0 + eta)).abs() < 1e-15);
        }
        assert_eq!(choose_c(2.0, 0.1), None);
        let c = choose_c(0.5, 1.0).unwrap();
        assert_eq!(c, 0.5);
        let q = 4.0 * c * c - 2.0 * c * 2.0 + 0.25;
        assert_eq!(q, -0.75);
    }

    #[test]
    fn y_closed_forms() {
        assert_eq!(entropy_y(&constant_state(1.0, 1.0), 0.7).unwrap(), 0.0);
        assert!((entropy_y(&constant_state(0.6, 1.0), 0.7).unwrap() + 0.7 * 0.6f64.ln()).abs() < 1e-14);
        assert!((entropy_y(&constant_state(1.0, 2.0), 0.7).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
        assert_eq!(entropy_y(&constant_state(1.0, 0.0), 0.7).unwrap(), 0.0);
        assert!(matches!(entropy_y(&constant_state(0.0, 1.0), 0.7), Err(Error::NonPositiveA { .. })));
    }

    #[test]
    fn apriori_examples() {
        let p = params(2.0, 0.7);
        let b = DerivedBounds::new(0.7, 1.0, 1.0).unwrap();
        let s = constant_state(0.8, 1.0);
        let chk = verify_apriori(&s, &b, &p, 1.0, 1e-6);
        assert_eq!(chk.mass_residual, 0.0);
        assert!(chk.flags.all_ok());
        let floor = 1.0 - (-84.0f64 * 0.1).exp();
        assert!((floor - 0.99978).abs() < 1e-5);
        let mut late = constant_state(0.8, 0.9);
        late.t = 0.1;
        let chk = verify_apriori(&late, &b, &p, 1.0, 1e-6);
        assert!(!chk.flags.n_pos.ok);
        assert!((chk.flags.n_pos.margin - (0.9 - floor)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn verdict_depends_on_ratio_and_gap(lo in 0.3f64..0.9, gap in 0.0f64..0.5, s in 0.5f64..2.0) {
            // uniform rescaling keeps the ratio; the gap change is absorbed by N₁,max
            let p = params(2.0, 0.7);
            let b1 = DerivedBounds::new(lo, lo + gap, 1.0).unwrap();
            let r1 = check_global_condition(&p, &b1, &unit(), None).unwrap();
            let b2 = DerivedBounds::new(lo * s, lo * s + gap * s, 1.0 / s).unwrap();
            let r2 = check_global_condition(&p, &b2, &unit(), None).unwrap();
            prop_assert!((r1.lhs - r2.lhs).abs() <= 1e-12 * (1.0 + r1.lhs));
        }

        #[test]
        fn atilde_minus_decreasing(eta in 1e-3f64..10.0, f in 1.001f64..3.0) {
            let lo = critical_constants(eta, PSI, 1.0).unwrap().1;
            let hi = critical_constants(eta * f, PSI, 1.0).unwrap().1;
            prop_assert!(hi < lo);
            let smaller_psi = critical_constants(eta, PSI / f, 1.0).unwrap().1;
            prop_assert!(smaller_psi < lo);
        }

        #[test]
        fn choose_c_iff_chi_le_one(chi in 0.01f64..3.0, eta in 1e-3f64..10.0) {
            prop_assert_eq!(choose_c(chi, eta).is_some(), chi <= 1.0);
        }
    }
}
