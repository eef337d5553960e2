//! Implicit solves of `(1 + dt·λ) u − dt·d·Δ_h u = rhs` under Neumann conditions.
//!
//! The cell-centered mirror-ghost Laplacian is diagonalized by the DCT-II basis
//! `cos(π k (m + ½) / n)` with symbol `−(4/h²) sin²(π k / 2n)` per axis, so one
//! forward transform, a pointwise division and one inverse transform solve the
//! system exactly up to rounding. Transforms go through a length-`2n` FFT of the
//! even extension.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{laplacian, GridSpec, ScalarField};
use crate::error::{Error, Result};

/// Relative residual every solve must meet.
pub const HELMHOLTZ_TOLERANCE: f64 = 1e-10;

#[derive(Clone)]
pub struct HelmholtzSolver {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `e^{-iπk/2n}` for `k < n`.
    twiddle: Vec<Complex64>,
    /// Eigenvalues of `−Δ_h` along one axis.
    symbol: Vec<f64>,
}

impl std::fmt::Debug for HelmholtzSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HelmholtzSolver").field("grid", &self.grid).finish()
    }
}

impl HelmholtzSolver {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(2 * n);
        let inverse = planner.plan_fft_inverse(2 * n);
        let twiddle = (0..n)
            .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
            .collect();
        let h = grid.h();
        let symbol = (0..n)
            .map(|k| {
                let s = (PI * k as f64 / (2 * n) as f64).sin();
                4.0 * s * s / (h * h)
            })
            .collect();
        Self { grid, forward, inverse, twiddle, symbol }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Eigenvalue of `−Δ_h` for the cosine mode `(j, k)`.
    pub fn mode_symbol(&self, j: usize, k: usize) -> f64 {
        self.symbol[j] + self.symbol[k]
    }

    pub fn solve(&self, rhs: &ScalarField, d: f64, lambda: f64, dt: f64) -> Result<ScalarField> {
        if *rhs.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if !(dt > 0.0) || !(d >= 0.0) || !(1.0 + dt * lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "helmholtz solve needs dt > 0, d >= 0 and 1 + dt·λ > 0 (dt={dt}, d={d}, λ={lambda})"
            )));
        }
        rhs.check_finite()?;
        let n = self.grid.n();
        let mut coeffs = rhs.values().to_vec();
        self.transform_2d(&mut coeffs, Direction::Forward);
        let diag = 1.0 + dt * lambda;
        for j in 0..n {
            for i in 0..n {
                coeffs[j * n + i] /= diag + dt * d * self.mode_symbol(i, j);
            }
        }
        self.transform_2d(&mut coeffs, Direction::Inverse);
        let u = ScalarField::from_values(self.grid, coeffs)?;

        let applied = apply_helmholtz(&u, d, lambda, dt);
        let scale = rhs.lp_norm(f64::INFINITY)?.max(f64::MIN_POSITIVE);
        let residual = applied.max_abs_diff(rhs)? / scale;
        if residual > HELMHOLTZ_TOLERANCE {
            return Err(Error::SolveFailure { residual, tolerance: HELMHOLTZ_TOLERANCE });
        }
        Ok(u)
    }

    fn transform_2d(&self, data: &mut [f64], dir: Direction) {
        let n = self.grid.n();
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
        let mut line = vec![0.0; n];
        for j in 0..n {
            let row = &mut data[j * n..(j + 1) * n];
            line.copy_from_slice(row);
            self.transform_1d(&line, row, &mut buf, dir);
        }
        let mut col = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                line[j] = data[j * n + i];
            }
            self.transform_1d(&line, &mut col, &mut buf, dir);
            for j in 0..n {
                data[j * n + i] = col[j];
            }
        }
    }

    fn transform_1d(&self, x: &[f64], out: &mut [f64], buf: &mut [Complex64], dir: Direction) {
        let n = x.len();
        match dir {
            Direction::Forward => {
                // even extension, then X_k = Re(e^{-iπk/2n} Y_k) / 2
                for m in 0..n {
                    buf[m] = Complex64::new(x[m], 0.0);
                    buf[2 * n - 1 - m] = Complex64::new(x[m], 0.0);
                }
                self.forward.process(buf);
                for k in 0..n {
                    out[k] = 0.5 * (buf[k] * self.twiddle[k]).re;
                }
            }
            Direction::Inverse => {
                // rebuild the spectrum of the even extension and invert
                buf[0] = Complex64::new(2.0 * x[0], 0.0);
                buf[n] = Complex64::new(0.0, 0.0);
                for k in 1..n {
                    let y = 2.0 * x[k] * self.twiddle[k].conj();
                    buf[k] = y;
                    buf[2 * n - k] = y.conj();
                }
                self.inverse.process(buf);
                let scale = 1.0 / (2 * n) as f64;
                for m in 0..n {
                    out[m] = buf[m].re * scale;
                }
            }
        }
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

/// `(1 + dt·λ) u − dt·d·Δ_h u`.
pub fn apply_helmholtz(u: &ScalarField, d: f64, lambda: f64, dt: f64) -> ScalarField {
    let lap = laplacian(u);
    let diag = 1.0 + dt * lambda;
    u.zip_map(&lap, |v, l| diag * v - dt * d * l).expect("same grid")
}

/// One-shot solve; prefer a cached [`HelmholtzSolver`] inside time loops.
pub fn helmholtz_solve(rhs: &ScalarField, d: f64, lambda: f64, dt: f64) -> Result<ScalarField> {
    HelmholtzSolver::new(*rhs.grid()).solve(rhs, d, lambda, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(g: GridSpec, j: usize, k: usize) -> ScalarField {
        let l = g.length();
        ScalarField::from_fn(g, |x, y| {
            (j as f64 * PI * x / l).cos() * (k as f64 * PI * y / l).cos()
        })
    }

    #[test]
    fn constants_scale_by_reaction() {
        let g = GridSpec::new(1.0, 16).unwrap();
        let u = helmholtz_solve(&ScalarField::constant(g, 2.0), 0.3, 4.0, 0.1).unwrap();
        for &v in u.values() {
            assert!((v - 2.0 / 1.4).abs() < 1e-14);
        }
    }

    #[test]
    fn cosine_mode_divides_by_discrete_symbol() {
        let g = GridSpec::new(2.0, 32).unwrap();
        let (d, lambda, dt) = (0.7, 1.5, 0.05);
        for (j, k) in [(1, 0), (2, 3), (5, 5)] {
            let rhs = mode(g, j, k);
            // read the discrete symbol off the operator itself
            let lap = rhs.laplacian();
            let v0 = rhs.get(0, 0);
            assert!(v0.abs() > 1e-3);
            let mu = -lap.get(0, 0) / v0;
            let expect = rhs.map(|v| v / (1.0 + dt * lambda + dt * d * mu));
            let got = helmholtz_solve(&rhs, d, lambda, dt).unwrap();
            assert!(got.max_abs_diff(&expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn round_trip_residual() {
        let g = GridSpec::new(1.0, 24).unwrap();
        let rhs = ScalarField::from_fn(g, |x, y| (3.0 * x).exp() * y.sin() + x * y);
        let u = helmholtz_solve(&rhs, 1.0, 84.0, 0.01).unwrap();
        let back = apply_helmholtz(&u, 1.0, 84.0, 0.01);
        let rel = back.max_abs_diff(&rhs).unwrap() / rhs.lp_norm(f64::INFINITY).unwrap();
        assert!(rel <= 1e-10, "{rel}");
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let rhs = ScalarField::constant(g, 1.0);
        assert!(helmholtz_solve(&rhs, 1.0, 1.0, 0.0).is_err());
        assert!(helmholtz_solve(&rhs, 1.0, -20.0, 0.1).is_err());
        let other = HelmholtzSolver::new(GridSpec::new(1.0, 16).unwrap());
        assert_eq!(other.solve(&rhs, 1.0, 1.0, 0.1).unwrap_err(), Error::GridMismatch);
    }

    #[test]
    fn zero_diffusion_is_pointwise() {
        let g = GridSpec::new(1.0, 8).unwrap();
        let rhs = ScalarField::from_fn(g, |x, y| x + 2.0 * y);
        let u = helmholtz_solve(&rhs, 0.0, 1.0, 0.5).unwrap();
        assert!(u.max_abs_diff(&rhs.map(|v| v / 1.5)).unwrap() < 1e-14);
    }
}
