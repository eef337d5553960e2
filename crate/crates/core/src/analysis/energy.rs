//! Residuals of the four energy identities of the main system, evaluated on a
//! window of three equally spaced outputs with centered time differences.
//!
//! ```text
//! (1) ½d/dt‖A‖² + ‖A‖² + η‖∇A‖² = ψ∫NA²(1−A) + Ã∫A
//! (2) ½d/dt‖∇A‖² + ‖∇A‖² + η‖ΔA‖² = −ψ∫NA(1−A)ΔA
//! (3) d/dt∫(N log N − N + 1) + ω∫(N log N − N + 1) + ∫|∇N|²/N − ∫∇N·∇ϑ = ω∫(log N − N + 1)
//! (4) ½d/dt‖N‖² + ω‖N‖² + ‖∇N‖² = ∫N∇N·∇ϑ + ω∫N
//! ```
//!
//! Face products use the same face averages as the transport scheme, so (1),
//! (2) and (4) hold exactly for the semi-discrete system.

use serde::Serialize;

use super::boltzmann_entropy;
use crate::error::{Error, Result};
use crate::grid::ScalarField;
use crate::model::{sensitivity_grad, ModelParams};
use crate::solver::SimState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyResiduals {
    pub r: [f64; 4],
    /// `ω∫(log N − N + 1)` at the window center.
    pub id3_rhs: f64,
    /// `id3_rhs ≤ 0` up to roundoff.
    pub id3_sign_ok: bool,
}

fn check_positive_n(n: &ScalarField) -> Result<()> {
    if let Some(index) = n.values().iter().position(|&v| !(v > 0.0)) {
        return Err(Error::NonPositiveN { index, value: n.values()[index] });
    }
    Ok(())
}

pub fn energy_residuals(
    window: (&SimState, &SimState, &SimState),
    params: &ModelParams,
    floor: f64,
) -> Result<EnergyResiduals> {
    let (s0, s1, s2) = window;
    let (d1, d2) = (s1.t - s0.t, s2.t - s1.t);
    if !(d1 > 0.0 && d2 > 0.0) || (d1 - d2).abs() > 1e-9 * d1.max(d2) {
        return Err(Error::NonUniformWindow);
    }
    s0.a.check_same_grid(&s2.a)?;
    s1.a.check_same_grid(&s0.a)?;
    for s in [s0, s1, s2] {
        check_positive_n(&s.n)?;
    }
    let ddt = |f: &dyn Fn(&SimState) -> Result<f64>| -> Result<f64> { Ok((f(s2)? - f(s0)?) / (d1 + d2)) };
    let ModelParams { eta, psi, omega, atilde, chi } = *params;
    let (a, n) = (&s1.a, &s1.n);
    let cell = a.grid().cell_area();
    let sum = |f: &dyn Fn(f64, f64) -> f64| -> f64 {
        a.values().iter().zip(n.values()).map(|(&a, &n)| f(a, n)).sum::<f64>() * cell
    };

    let grad_a = a.gradient();
    let lap_a = grad_a.divergence();
    let grad_a_sq = grad_a.dot(&grad_a)?;

    let lhs1 = ddt(&|s| Ok(0.5 * s.a.l2sq()))? + a.l2sq() + eta * grad_a_sq;
    let rhs1 = sum(&|a, n| psi * n * a * a * (1.0 - a)) + atilde * a.integral();

    let lhs2 = ddt(&|s| {
        let g = s.a.gradient();
        Ok(0.5 * g.dot(&g)?)
    })? + grad_a_sq
        + eta * lap_a.l2sq();
    let rhs2 = -cell
        * a.values()
            .iter()
            .zip(n.values())
            .zip(lap_a.values())
            .map(|((&a, &n), &l)| psi * n * a * (1.0 - a) * l)
            .sum::<f64>();

    let theta = sensitivity_grad(a, chi, floor)?;
    let grad_n = n.gradient();
    let entropy = boltzmann_entropy(n)?;
    let lhs3 = ddt(&|s| boltzmann_entropy(&s.n))? + omega * entropy + n.fisher()? - grad_n.dot(&theta)?;
    let id3_rhs = omega * n.values().iter().map(|&v| v.ln() - v + 1.0).sum::<f64>() * cell;

    let lhs4 = ddt(&|s| Ok(0.5 * s.n.l2sq()))? + omega * n.l2sq() + grad_n.dot(&grad_n)?;
    let rhs4 = grad_n.dot(&theta.scale_by_face_mean(n)?)? + omega * n.integral();

    Ok(EnergyResiduals {
        r: [(lhs1 - rhs1).abs(), (lhs2 - rhs2).abs(), (lhs3 - id3_rhs).abs(), (lhs4 - rhs4).abs()],
        id3_rhs,
        id3_sign_ok: id3_rhs <= 1e-12 * omega * a.grid().area(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::model::steady_state;

    #[test]
    fn steady_window_balances() {
        let p = ModelParams::new(0.1, 14.0 / 3.0 * 1e-3, 84.0, 0.7, 2.0).unwrap();
        let s = steady_state(&p).unwrap();
        let g = GridSpec::new(1.0, 16).unwrap();
        let mk = |t| {
            SimState::new(t, ScalarField::constant(g, s.a_star), ScalarField::constant(g, 1.0)).unwrap()
        };
        let (s0, s1, s2) = (mk(0.0), mk(0.1), mk(0.2));
        let e = energy_residuals((&s0, &s1, &s2), &p, 0.3).unwrap();
        for r in e.r {
            assert!(r < 1e-13, "{:?}", e.r);
        }
        assert!(e.id3_sign_ok);
    }

    #[test]
    fn window_checks() {
        let p = ModelParams::new(0.1, 1e-3, 2.0, 1.0, 1.0).unwrap();
        let g = GridSpec::new(1.0, 8).unwrap();
        let mk = |t, n| SimState::new(t, ScalarField::constant(g, 1.0), ScalarField::constant(g, n)).unwrap();
        let err = energy_residuals((&mk(0.0, 1.0), &mk(0.1, 1.0), &mk(0.3, 1.0)), &p, 0.5);
        assert_eq!(err.unwrap_err(), Error::NonUniformWindow);
        let err = energy_residuals((&mk(0.0, 1.0), &mk(0.1, 0.0), &mk(0.2, 1.0)), &p, 0.5);
        assert!(matches!(err, Err(Error::NonPositiveN { .. })));
    }
}
