//! Midpoint-rule integral functionals of gridded fields.

use super::{cell_gradient, face_means, gradient, ScalarField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    Integral,
    Mean,
    /// `‖u‖_p`, with `p = ∞` meaning the max norm.
    LpNorm(f64),
    /// `max u − min u`.
    Osc,
    /// `∫ |∇u|² / u`.
    Fisher,
    /// `∫ |∇u|⁴`.
    Grad4,
    /// `∫ |∇u|`.
    GradL1,
    /// `∫ |∇u|²`.
    GradL2Sq,
    /// `∫ |Δu|²`.
    LaplacianL2Sq,
}

impl Functional {
    pub fn eval(self, u: &ScalarField) -> Result<f64> {
        u.check_finite()?;
        match self {
            Functional::Integral => Ok(u.integral()),
            Functional::Mean => Ok(u.mean()),
            Functional::LpNorm(p) => u.lp_norm(p),
            Functional::Osc => Ok(u.osc()),
            Functional::Fisher => u.fisher(),
            Functional::Grad4 => Ok(u.grad4()),
            Functional::GradL1 => Ok(u.grad_l1()),
            Functional::GradL2Sq => Ok(u.grad_l2sq()),
            Functional::LaplacianL2Sq => Ok(u.laplacian_l2sq()),
        }
    }
}

impl ScalarField {
    pub fn integral(&self) -> f64 {
        self.values().iter().sum::<f64>() * self.grid().cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid().area()
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p == f64::INFINITY {
            return Ok(self.values().iter().fold(0.0, |m, v| m.max(v.abs())));
        }
        let w = self.grid().cell_area();
        let s: f64 = if p == 1.0 {
            self.values().iter().map(|v| v.abs()).sum()
        } else if p == 2.0 {
            self.values().iter().map(|v| v * v).sum()
        } else {
            self.values().iter().map(|v| v.abs().powf(p)).sum()
        };
        Ok((s * w).powf(1.0 / p))
    }

    /// `‖u‖₂²` without the square root round trip.
    pub fn l2sq(&self) -> f64 {
        self.values().iter().map(|v| v * v).sum::<f64>() * self.grid().cell_area()
    }

    pub fn osc(&self) -> f64 {
        self.max() - self.min()
    }

    /// `∫ |∇u|² / u`, with `u` interpolated to faces by the arithmetic mean.
    pub fn fisher(&self) -> Result<f64> {
        self.check_positive()?;
        let grad = gradient(self);
        let w = face_means(self);
        let s: f64 = grad
            .x_components()
            .iter()
            .zip(w.x_components())
            .chain(grad.y_components().iter().zip(w.y_components()))
            .map(|(g, u)| g * g / u)
            .sum();
        Ok(s * self.grid().cell_area())
    }

    pub fn grad_l2sq(&self) -> f64 {
        let grad = gradient(self);
        let s: f64 = grad.x_components().iter().chain(grad.y_components()).map(|g| g * g).sum();
        s * self.grid().cell_area()
    }

    pub fn grad4(&self) -> f64 {
        let (gx, gy) = cell_gradient(self);
        let s: f64 = gx
            .iter()
            .zip(&gy)
            .map(|(a, b)| {
                let m = a * a + b * b;
                m * m
            })
            .sum();
        s * self.grid().cell_area()
    }

    pub fn grad_l1(&self) -> f64 {
        let (gx, gy) = cell_gradient(self);
        let s: f64 = gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).sum();
        s * self.grid().cell_area()
    }

    pub fn laplacian_l2sq(&self) -> f64 {
        self.laplacian().l2sq()
    }
}
