//! Short-pulse and characteristic sine–Gordon numerics.
//!
//! The sine–Gordon field is carried as `q = sin w` with `p = ∂_y^{-1} q` on a
//! uniform periodic grid. The crate provides the linear semigroup `e^{t∂^{-1}}`
//! in spectral and Bessel-kernel form, nonlinear steppers for
//! `q_t = √(1-q²) p`, the hodograph map to short-pulse variables
//! `u(x, t)`, conserved quantities on both sides, and small-data
//! certificates for global existence.

pub mod bessel;
pub mod certificates;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod hodograph;
pub mod initial;
pub mod interp;
pub mod propagator;
pub mod quadrature;
mod spectral;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, NormReport, Tolerances};
