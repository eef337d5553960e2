//! Neumann-compatible random test fields `Σ a_jk cos(jπx/L) cos(kπy/L)`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GridSpec, ScalarField};
use crate::error::{Error, Result};

/// Coefficient table `a_jk`, `0 <= j, k <= max_mode`, for a square of side `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoefficients {
    length: f64,
    max_mode: usize,
    a: Vec<f64>,
}

/// Exact second-derivative norms of a cosine series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorms {
    pub uxx: f64,
    pub uyy: f64,
    pub uxy: f64,
    pub laplacian: f64,
}

impl SpectralNorms {
    /// `‖u_xx‖² + ‖u_yy‖² + 2‖u_xy‖²`.
    pub fn hessian(&self) -> f64 {
        self.uxx + self.uyy + 2.0 * self.uxy
    }
}

impl CosineCoefficients {
    pub fn new(length: f64, max_mode: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != (max_mode + 1) * (max_mode + 1) {
            return Err(Error::InvalidParameter(format!(
                "need {} coefficients for max_mode {max_mode}, got {}",
                (max_mode + 1) * (max_mode + 1),
                a.len()
            )));
        }
        Ok(Self { length, max_mode, a })
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.a[j * (self.max_mode + 1) + k]
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.max_mode;
        let w = PI / self.length;
        let cx: Vec<f64> = (0..=m).map(|j| (j as f64 * w * x).cos()).collect();
        let cy: Vec<f64> = (0..=m).map(|k| (k as f64 * w * y).cos()).collect();
        let mut s = 0.0;
        for (j, cxj) in cx.iter().enumerate() {
            for (k, cyk) in cy.iter().enumerate() {
                s += self.get(j, k) * cxj * cyk;
            }
        }
        s
    }

    pub fn sample(&self, grid: GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| self.eval(x, y))
    }

    /// Closed-form mode sums for the second-derivative norms.
    ///
    /// Uses `∫₀ᴸ cos²(jπx/L) = L` for `j = 0` and `L/2` otherwise, and
    /// `∫₀ᴸ sin²(jπx/L) = L/2` for `j >= 1`.
    pub fn spectral_norms(&self) -> SpectralNorms {
        let l = self.length;
        let w = PI / l;
        let cos_w = |j: usize| if j == 0 { l } else { 0.5 * l };
        let sin_w = |j: usize| if j == 0 { 0.0 } else { 0.5 * l };
        let mut out = SpectralNorms { uxx: 0.0, uyy: 0.0, uxy: 0.0, laplacian: 0.0 };
        for j in 0..=self.max_mode {
            for k in 0..=self.max_mode {
                let a2 = self.get(j, k).powi(2);
                let (p, q) = ((j as f64 * w).powi(2), (k as f64 * w).powi(2));
                let cc = cos_w(j) * cos_w(k);
                out.uxx += a2 * p * p * cc;
                out.uyy += a2 * q * q * cc;
                out.uxy += a2 * p * q * sin_w(j) * sin_w(k);
                out.laplacian += a2 * (p + q) * (p + q) * cc;
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct CosineSample {
    pub field: ScalarField,
    pub coefficients: CosineCoefficients,
}

/// Draws `a_jk` uniformly from `[−amplitude, amplitude]` with a seeded ChaCha
/// stream and samples the series on `grid`.
pub fn sample_cosine_field(
    seed: u64,
    max_mode: usize,
    amplitude: f64,
    grid: GridSpec,
) -> Result<CosineSample> {
    if 2 * max_mode >= grid.n() {
        return Err(Error::UnresolvableMode { max_mode, n: grid.n() });
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("amplitude must be positive, got {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = (0..(max_mode + 1) * (max_mode + 1))
        .map(|_| rng.gen_range(-amplitude..=amplitude))
        .collect();
    let coefficients = CosineCoefficients::new(grid.length(), max_mode, a)?;
    Ok(CosineSample { field: coefficients.sample(grid), coefficients })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_zero_is_constant() {
        let g = GridSpec::new(1.0, 16).unwrap();
        let s = sample_cosine_field(3, 0, 1.0, g).unwrap();
        let a00 = s.coefficients.get(0, 0);
        assert!(s.field.values().iter().all(|&v| v == a00));
    }

    #[test]
    fn deterministic_per_seed() {
        let g = GridSpec::new(1.0, 32).unwrap();
        let a = sample_cosine_field(11, 5, 0.5, g).unwrap();
        let b = sample_cosine_field(11, 5, 0.5, g).unwrap();
        assert_eq!(a.field, b.field);
        let c = sample_cosine_field(12, 5, 0.5, g).unwrap();
        assert_ne!(a.field, c.field);
    }

    #[test]
    fn mean_equals_constant_coefficient() {
        let g = GridSpec::new(1.0, 64).unwrap();
        let s = sample_cosine_field(1, 4, 1.0, g).unwrap();
        assert!((s.field.mean() - s.coefficients.get(0, 0)).abs() <= 1e-12);
    }

    #[test]
    fn coefficients_within_amplitude() {
        let g = GridSpec::new(1.0, 64).unwrap();
        let s = sample_cosine_field(5, 6, 0.25, g).unwrap();
        for j in 0..=6 {
            for k in 0..=6 {
                assert!(s.coefficients.get(j, k).abs() <= 0.25);
            }
        }
    }

    #[test]
    fn unresolvable_modes_rejected() {
        let g = GridSpec::new(1.0, 16).unwrap();
        assert_eq!(
            sample_cosine_field(0, 8, 1.0, g).unwrap_err(),
            Error::UnresolvableMode { max_mode: 8, n: 16 }
        );
        assert!(sample_cosine_field(0, 7, 1.0, g).is_ok());
    }

    #[test]
    fn single_mode_norms() {
        // a_11 = 1 on L = 2: every second-derivative norm is (π/L)⁴ L²/4
        let mut a = vec![0.0; 4];
        a[3] = 1.0;
        let c = CosineCoefficients::new(2.0, 1, a).unwrap();
        let n = c.spectral_norms();
        let unit = (PI / 2.0).powi(4) * 4.0 / 4.0;
        assert!((n.uxx - unit).abs() < 1e-12);
        assert!((n.uxy - unit).abs() < 1e-12);
        assert!((n.laplacian - 4.0 * unit).abs() < 1e-12);
        assert_eq!(n.hessian(), n.laplacian);
    }
}
