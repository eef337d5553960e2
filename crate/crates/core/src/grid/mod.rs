//! Uniform cell-centered discretization of the square `(0, L)²`.
//!
//! Cell `(i, j)` is centered at `((i + ½)h, (j + ½)h)`; values are stored
//! row-major with `i` (the x index) running fastest. Homogeneous Neumann
//! conditions are realized by mirror ghost cells, so every boundary-normal
//! face difference vanishes.

mod cosine;
mod functionals;
mod helmholtz;
mod io;

pub use cosine::{sample_cosine_field, CosineCoefficients, CosineSample, SpectralNorms};
pub use functionals::Functional;
pub use helmholtz::{apply_helmholtz, helmholtz_solve, HelmholtzSolver, HELMHOLTZ_TOLERANCE};
pub use io::{parse_field, read_field, write_field, FIELD_HEADER_TAG};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest admissible number of cells per side.
pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    length: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("side length must be positive, got {length}")));
        }
        if n < MIN_CELLS {
            return Err(Error::InvalidGrid(format!("need at least {MIN_CELLS} cells per side, got {n}")));
        }
        Ok(Self { length, n })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing, always derived as `L / n`.
    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Measure of the domain, `L²`.
    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Quadrature weight of one cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        let h = self.h();
        ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }
}

/// Gridded scalar field with cell-centered samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self { grid, values: vec![c; grid.cells()] }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f(x, y)` at the cell centers.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.cells());
        for j in 0..n {
            for i in 0..n {
                let (x, y) = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    /// Wraps raw row-major values; rejects wrong sizes and non-finite entries.
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.cells(),
                values.len()
            )));
        }
        let field = Self { grid, values };
        field.check_finite()?;
        Ok(field)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(index) => Err(Error::NonFinite { index }),
            None => Ok(()),
        }
    }

    pub fn check_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(index) => Err(Error::NonPositiveField { index, value: self.values[index] }),
            None => Ok(()),
        }
    }

    pub fn check_same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index and value of the smallest cell.
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Reflection `u(x, y) -> u(y, x)`.
    pub fn transpose(&self) -> ScalarField {
        let n = self.grid.n();
        let mut values = vec![0.0; self.values.len()];
        for j in 0..n {
            for i in 0..n {
                values[self.grid.index(j, i)] = self.values[self.grid.index(i, j)];
            }
        }
        Self { grid: self.grid, values }
    }

    /// Sup-norm distance to another field.
    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    pub fn gradient(&self) -> VectorField {
        gradient(self)
    }

    pub fn laplacian(&self) -> ScalarField {
        laplacian(self)
    }
}

/// Face-staggered vector field.
///
/// x-components live on the `(n + 1) × n` vertical faces `x = i h`, y-components
/// on the `n × (n + 1)` horizontal faces `y = j h`. The outer boundary faces
/// carry zero normal component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: GridSpec,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.n();
        Self { grid, x: vec![0.0; (n + 1) * n], y: vec![0.0; n * (n + 1)] }
    }

    /// Builds a field from face values, zeroing the boundary-normal faces.
    ///
    /// `fx(i, j)` is queried for interior vertical faces `1 <= i < n`, `fy(i, j)`
    /// for interior horizontal faces `1 <= j < n`.
    pub fn from_faces(
        grid: GridSpec,
        fx: impl Fn(usize, usize) -> f64,
        fy: impl Fn(usize, usize) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        let n = grid.n();
        for j in 0..n {
            for i in 1..n {
                out.x[j * (n + 1) + i] = fx(i, j);
            }
        }
        for j in 1..n {
            for i in 0..n {
                out.y[j * n + i] = fy(i, j);
            }
        }
        out
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Value on the vertical face between cells `(i - 1, j)` and `(i, j)`.
    #[inline]
    pub fn x_face(&self, i: usize, j: usize) -> f64 {
        self.x[j * (self.grid.n() + 1) + i]
    }

    /// Value on the horizontal face between cells `(i, j - 1)` and `(i, j)`.
    #[inline]
    pub fn y_face(&self, i: usize, j: usize) -> f64 {
        self.y[j * self.grid.n() + i]
    }

    pub fn x_components(&self) -> &[f64] {
        &self.x
    }

    pub fn y_components(&self) -> &[f64] {
        &self.y
    }

    /// Largest normal component over the boundary faces.
    pub fn boundary_flux_max(&self) -> f64 {
        let n = self.grid.n();
        let mut m: f64 = 0.0;
        for k in 0..n {
            m = m.max(self.x_face(0, k).abs()).max(self.x_face(n, k).abs());
            m = m.max(self.y_face(k, 0).abs()).max(self.y_face(k, n).abs());
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().chain(&self.y).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Facewise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64) -> Result<VectorField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid,
            x: self.x.iter().zip(&other.x).map(|(&a, &b)| f(a, b)).collect(),
            y: self.y.iter().zip(&other.y).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Multiplies each face by a face value interpolated from `u`.
    pub fn scale_by_face_mean(&self, u: &ScalarField) -> Result<VectorField> {
        if self.grid != *u.grid() {
            return Err(Error::GridMismatch);
        }
        let w = face_means(u);
        Ok(Self {
            grid: self.grid,
            x: self.x.iter().zip(&w.x).map(|(a, b)| a * b).collect(),
            y: self.y.iter().zip(&w.y).map(|(a, b)| a * b).collect(),
        })
    }

    /// Multiplies each face by the donor-cell value of `u`, taken from the
    /// side the face value points away from.
    pub fn scale_by_upwind(&self, u: &ScalarField) -> Result<VectorField> {
        if self.grid != *u.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField::from_faces(
            self.grid,
            |i, j| {
                let v = self.x_face(i, j);
                v * if v >= 0.0 { u.get(i - 1, j) } else { u.get(i, j) }
            },
            |i, j| {
                let v = self.y_face(i, j);
                v * if v >= 0.0 { u.get(i, j - 1) } else { u.get(i, j) }
            },
        ))
    }

    /// Discrete `∫ F · G` over the staggered faces (each interior face owns an
    /// `h × h` dual cell).
    pub fn dot(&self, other: &VectorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let s: f64 = self.x.iter().zip(&other.x).map(|(a, b)| a * b).sum::<f64>()
            + self.y.iter().zip(&other.y).map(|(a, b)| a * b).sum::<f64>();
        Ok(s * self.grid.cell_area())
    }

    pub fn divergence(&self) -> ScalarField {
        divergence(self)
    }
}

/// Arithmetic means of adjacent cells on every face. Boundary faces take the
/// value of their single neighbour (mirror ghost).
pub(crate) fn face_means(u: &ScalarField) -> VectorField {
    let g = *u.grid();
    let n = g.n();
    let mut out = VectorField::zeros(g);
    for j in 0..n {
        for i in 0..=n {
            let left = u.get(i.saturating_sub(1), j);
            let right = u.get(i.min(n - 1), j);
            out.x[j * (n + 1) + i] = 0.5 * (left + right);
        }
    }
    for j in 0..=n {
        for i in 0..n {
            let below = u.get(i, j.saturating_sub(1));
            let above = u.get(i, j.min(n - 1));
            out.y[j * n + i] = 0.5 * (below + above);
        }
    }
    out
}

/// Face-centered gradient; boundary faces are zero by the mirror condition.
pub fn gradient(u: &ScalarField) -> VectorField {
    let g = *u.grid();
    let inv_h = 1.0 / g.h();
    VectorField::from_faces(
        g,
        |i, j| (u.get(i, j) - u.get(i - 1, j)) * inv_h,
        |i, j| (u.get(i, j) - u.get(i, j - 1)) * inv_h,
    )
}

pub fn divergence(f: &VectorField) -> ScalarField {
    let g = *f.grid();
    let n = g.n();
    let inv_h = 1.0 / g.h();
    let mut out = ScalarField::zeros(g);
    for j in 0..n {
        for i in 0..n {
            let dx = f.x_face(i + 1, j) - f.x_face(i, j);
            let dy = f.y_face(i, j + 1) - f.y_face(i, j);
            out.values[g.index(i, j)] = (dx + dy) * inv_h;
        }
    }
    out
}

/// Five-point Neumann Laplacian, defined as `divergence ∘ gradient`.
pub fn laplacian(u: &ScalarField) -> ScalarField {
    divergence(&gradient(u))
}

#[derive(Debug, Clone)]
pub struct DiffOps {
    pub gradient: VectorField,
    pub laplacian: ScalarField,
}

pub fn diff_ops(u: &ScalarField) -> Result<DiffOps> {
    u.check_finite()?;
    let gradient = gradient(u);
    let laplacian = divergence(&gradient);
    Ok(DiffOps { gradient, laplacian })
}

/// Cell-centered gradient obtained by averaging the two faces of each cell.
pub(crate) fn cell_gradient(u: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let g = *u.grid();
    let n = g.n();
    let grad = gradient(u);
    let mut gx = vec![0.0; g.cells()];
    let mut gy = vec![0.0; g.cells()];
    for j in 0..n {
        for i in 0..n {
            let k = g.index(i, j);
            gx[k] = 0.5 * (grad.x_face(i, j) + grad.x_face(i + 1, j));
            gy[k] = 0.5 * (grad.y_face(i, j) + grad.y_face(i, j + 1));
        }
    }
    (gx, gy)
}
