//! Sampled probes of the Poincaré–Sobolev and interpolation inequalities.
//! A passing probe means only that no counterexample was found.

use serde::Serialize;

use super::MU_SQ_SQUARE;
use crate::error::{Error, Result};
use crate::grid::{CosineCoefficients, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareProbe {
    /// `‖u − ū‖₂ / ‖∇u‖₁`.
    pub ratio_l1: f64,
    /// Present only for strictly positive `u`.
    pub sobolev_slack: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationProbe {
    /// `∫|∇u|⁴ / (osc²(u) ∫|Δu|²)`.
    pub ratio_k: f64,
    /// `|‖u_xx‖² + ‖u_yy‖² + 2‖u_xy‖² − ‖Δu‖²| / ‖Δu‖²`, from cosine coefficients.
    pub fourier_gap: Option<f64>,
}

/// Scale below which a gradient or Laplacian norm counts as zero.
fn negligible(v: f64, scale: f64) -> bool {
    !(v > 1e-13 * scale.max(f64::MIN_POSITIVE))
}

pub fn poincare_probe(u: &ScalarField) -> Result<PoincareProbe> {
    let mean = u.mean();
    let grad = u.grad_l1();
    let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs())) * u.grid().length();
    if negligible(grad, scale) {
        return Err(Error::ConstantField);
    }
    let dev = u.map(|v| v - mean).lp_norm(2.0)?;
    let sobolev_slack = if u.min() > 0.0 { Some(sobolev_slack(u)?) } else { None };
    Ok(PoincareProbe { ratio_l1: dev / grad, sobolev_slack })
}

/// `μ²‖u‖₁ ∫|∇u|²/u + |Ω|⁻¹‖u‖₁² − ‖u‖₂²` with `μ² = 3/2`.
pub fn sobolev_slack(u: &ScalarField) -> Result<f64> {
    let fisher = u.fisher()?;
    let l1 = u.lp_norm(1.0)?;
    Ok(MU_SQ_SQUARE * l1 * fisher + l1 * l1 / u.grid().area() - u.l2sq())
}

pub fn interpolation_probe(u: &ScalarField, coeffs: Option<&CosineCoefficients>) -> Result<InterpolationProbe> {
    let osc = u.osc();
    let lap = u.laplacian_l2sq();
    let scale = u.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if negligible(osc, scale) {
        return Err(Error::DegenerateField("constant input".into()));
    }
    let l = u.grid().length();
    if negligible(lap, (osc / (l * l)).powi(2) * l * l) {
        return Err(Error::DegenerateField("discrete Laplacian vanishes".into()));
    }
    let ratio_k = u.grad4() / (osc * osc * lap);
    let fourier_gap = coeffs.map(|c| {
        let s = c.spectral_norms();
        let gap = (s.hessian() - s.laplacian).abs();
        if s.laplacian > 0.0 {
            gap / s.laplacian
        } else {
            gap
        }
    });
    Ok(InterpolationProbe { ratio_k, fourier_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_cosine_field, GridSpec};
    use std::f64::consts::PI;

    #[test]
    fn single_cosine_ratios() {
        let g = GridSpec::new(1.0, 256).unwrap();
        let u = ScalarField::from_fn(g, |x, _| (PI * x).cos());
        let p = poincare_probe(&u).unwrap();
        assert!((p.ratio_l1 - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-3, "{}", p.ratio_l1);
        assert!(p.sobolev_slack.is_none());
        let k = interpolation_probe(&u, None).unwrap();
        assert!((k.ratio_k - 0.1875).abs() < 2e-3, "{}", k.ratio_k);
    }

    #[test]
    fn ratio_is_affine_invariant() {
        let g = GridSpec::new(1.0, 32).unwrap();
        let u = ScalarField::from_fn(g, |x, y| (3.0 * x).sin() + x * y);
        let base = poincare_probe(&u).unwrap().ratio_l1;
        for (lam, c) in [(2.0, 0.0), (-0.5, 3.0), (1.0, 100.0)] {
            let v = poincare_probe(&u.map(|s| lam * s + c)).unwrap().ratio_l1;
            assert!((v - base).abs() < 1e-10 * base);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let g = GridSpec::new(1.0, 16).unwrap();
        let c = ScalarField::constant(g, 2.0);
        assert_eq!(poincare_probe(&c).unwrap_err(), Error::ConstantField);
        assert!(matches!(interpolation_probe(&c, None), Err(Error::DegenerateField(_))));
        let neg = ScalarField::from_fn(g, |x, _| x - 0.5);
        assert!(sobolev_slack(&neg).is_err());
    }

    #[test]
    fn single_mode_gap_is_zero() {
        let g = GridSpec::new(1.0, 32).unwrap();
        let mut a = vec![0.0; 4];
        a[3] = 1.0;
        let c = CosineCoefficients::new(1.0, 1, a).unwrap();
        let u = c.sample(g);
        assert_eq!(interpolation_probe(&u, Some(&c)).unwrap().fourier_gap, Some(0.0));
    }

    #[test]
    fn sampled_fields_respect_bounds() {
        let g = GridSpec::new(1.0, 64).unwrap();
        for seed in 0..20 {
            let s = sample_cosine_field(seed, 6, 1.0, g).unwrap();
            let p = poincare_probe(&s.field).unwrap();
            assert!(p.ratio_l1 <= 1.5f64.sqrt());
            let k = interpolation_probe(&s.field, Some(&s.coefficients)).unwrap();
            assert!(k.ratio_k <= 12.0);
            assert!(k.fourier_gap.unwrap() <= 1e-10);
            let shifted = s.field.map(|v| v - s.field.min() + 1.0);
            assert!(sobolev_slack(&shifted).unwrap() >= -1e-10);
        }
    }
}
