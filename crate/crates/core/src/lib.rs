//! # bures-core
//!
//! Transition probability and fidelity between mixed quantum states, computed
//! along every route that makes sense for density operators:
//!
//! - the closed form `F = Tr (ρ₁^{1/2} ρ₂ ρ₁^{1/2})^{1/2}`,
//! - the operator geometric mean route `F = Tr (ρ₂ # ρ₁^{[-1]}) ρ₁`,
//! - variational infima over the positive-definite cone,
//! - overlap maximization over purifications in H⊗H.
//!
//! On top of the fidelity machinery the crate implements amplitudes
//! (`ρ = W W†`), parallel transport of amplitudes along discretized curves
//! of density operators, Bures length and distance, the gauge potential of
//! the transport, and holonomy extraction for closed curves. The
//! [`channels`] and [`verify`] modules provide CPTP maps and the randomized
//! sweep suites that certify monotonicity, concavity and the classical
//! inequality bounds at desk scale.
//!
//! All operations are deterministic: identical inputs (including RNG seeds)
//! produce identical outputs.

pub mod channels;
pub mod config;
pub mod error;
pub mod fidelity;
pub mod operator;
pub mod purification;
pub mod random;
pub mod transport;
pub mod variational;
pub mod verify;

pub use config::Tolerances;
pub use error::{CoreError, Result};
pub use operator::{
    ComplexMatrix, DensityOperator, Eigensystem, HermitianMatrix, PositiveOperator,
};

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
