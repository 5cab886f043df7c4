//! Pseudo-spectral simulation of the nonlocal transport equation
//!
//! ```text
//! d_t theta + div(u theta) + nu Lambda^alpha theta = 0,   u = R theta,
//! ```
//!
//! on a periodic box in one to three dimensions, where `Lambda = (-Laplacian)^(1/2)`
//! and `R` is the vector Riesz transform. Besides the solver the crate ships
//! brute-force quadrature oracles for the singular-integral operators and a
//! set of diagnostics that test the a priori estimates the equation is known
//! to satisfy.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the common double-precision case.
//!
//! Fourier coefficients follow one convention throughout: the forward
//! transform divides by the number of points, so the zero coefficient is the
//! spatial mean and `||f||_2^2 = V sum_k |c_k|^2` with `V` the box volume.

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod grid;
pub mod initial;
pub mod operators;
pub mod oracle;
pub mod scalar;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use field::{PhysicalField, SpectralField};
pub use grid::Grid;
pub use scalar::Scalar;
pub use solver::{RunStatus, Scheme, SolverConfig, Trajectory};
pub use transform::{forward_transform, inverse_transform};

pub type Grid64 = Grid<f64>;
pub type PhysicalField64 = PhysicalField<f64>;
pub type SpectralField64 = SpectralField<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type Grid32 = Grid<f32>;
pub type PhysicalField32 = PhysicalField<f32>;
pub type SpectralField32 = SpectralField<f32>;
