//! Simulation and analysis of the two-field crime hotspot system
//!
//! ```text
//! A_t = η ΔA + ψ N A (1 − A) + Ã − A
//! N_t = ∇·[∇N − N ∇(χ log A)] + ω − ω N
//! ```
//!
//! on the square `(0, L)²` with no-flux boundaries, together with the Short
//! variant and a generic plug-in form, executable versions of the a priori
//! bounds, entropy functionals and energy identities for the system, and
//! probes of the functional inequalities behind the global existence condition.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod grid;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{GridSpec, ScalarField, VectorField};
pub use model::{DerivedBounds, GeneralModel, ModelKind, ModelParams, ShortParams};
pub use solver::{InitialCondition, Outcome, SimConfig, SimState};
