//! Generalized su(1,1) coherent states `|z⟩ᵣ^λ` of the pseudo-harmonic
//! oscillator.
//!
//! The crate is organised around two independent routes to every quantity:
//!
//! * closed forms built on generalized hypergeometric series
//!   ([`special_functions`], [`coherent_state`], [`observables`],
//!   [`identity_measure`]);
//! * a brute-force truncated Fock-space realization of the su(1,1)
//!   generators ([`fock_oracle`]) that serves as ground truth.
//!
//! Units are μ = ħ = ω = 1 throughout. The model is fixed by the potential
//! strength λ > −1/2 and the integer deformation parameter r ≥ 1, see
//! [`ModelParams`].

// `!(x >= y)` is used deliberately so NaN falls into the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent_state;
pub mod error;
pub mod fock_oracle;
pub mod identity_measure;
pub mod observables;
pub mod params;
pub mod quadrature;
pub mod special_functions;
pub mod verify;

pub use coherent_state::CoherentState;
pub use error::{Error, Result};
pub use fock_oracle::FockOperators;
pub use num_complex::Complex64;
pub use observables::ObservableReport;
pub use params::ModelParams;

/// Default series tolerance used across the crate.
pub const DEFAULT_TOL: f64 = 1e-14;
