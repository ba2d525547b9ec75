//! Spectral laboratory for the Yang-Mills equations in Lorenz gauge.
//!
//! The crate implements, on the periodic 3-torus:
//!
//! - matrix Lie algebra arithmetic for u(1) and su(n) ([`lie_algebra`]);
//! - a pseudo-spectral grid with Fourier-multiplier calculus and dealiased
//!   products ([`spectral_grid`]);
//! - gauge potentials, curvature, constraints, energy, and a constrained
//!   random data generator ([`gauge_fields`]);
//! - the null-form operators Q₀, Q₀ᵢ, Qᵢⱼ and 𝔔, bilinear Fourier
//!   multipliers, and numerical verification of the null-form identities and
//!   symbol bounds ([`null_forms`]);
//! - the first-order split evolution of the coupled (A, F) wave system with
//!   exact linear propagators, diagnostics, and the gauge transformation to
//!   temporal gauge ([`lorenz_evolution`]);
//! - the exponent calculus for wave-Sobolev product and null-form estimates,
//!   including the s-threshold scan ([`exponent_calculus`]).

pub mod exponent_calculus;
pub mod gauge_fields;
pub mod lie_algebra;
pub mod lorenz_evolution;
pub mod null_forms;
pub mod spectral_grid;

pub use lie_algebra::{AlgebraElement, AlgebraKind, AlgebraSpec};
pub use spectral_grid::{GridSpec, MultiplierKind, Representation, SpectralField};
