//! Radial numerics for the focusing generalized Hartree equation with a potential,
//!
//! `i u_t + Δu − V u + (I_γ ∗ |u|^p)|u|^{p−2} u = 0` on ℝ³,
//!
//! restricted to radial data. The crate provides the exponent calculus behind the
//! scattering argument, a spectral radial grid, the Riesz convolution, the
//! ground state and its sharp constants, a split-step integrator and the
//! truncated virial/Morawetz diagnostics.

pub mod error;
pub mod evolve;
pub mod exponents;
pub mod grid;
pub mod groundstate;
pub mod io;
pub mod morawetz;
pub mod potentials;
pub mod quad;
pub mod riesz;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{ExactScalar, Numeric, Real};

pub type Grid64 = grid::RadialGrid<f64>;
pub type Grid32 = grid::RadialGrid<f32>;
pub type Field64 = grid::RadialField<f64>;
pub type Field32 = grid::RadialField<f32>;
pub type Kernel64 = riesz::RieszKernel<f64>;
pub type Kernel32 = riesz::RieszKernel<f32>;
pub type Params64 = exponents::ModelParams<f64>;
/// Exact parameters for checking the exponent identities without round-off.
pub type ParamsQ = exponents::ModelParams<num_rational::BigRational>;
pub type ExponentsQ = exponents::ExponentSet<num_rational::BigRational>;
pub type GroundState64 = groundstate::GroundStateResult<f64>;
