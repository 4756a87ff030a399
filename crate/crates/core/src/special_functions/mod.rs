//! Real and complex special functions with explicit precision contracts.
//!
//! Everything here is a pure function of its arguments.

pub mod bessel;
pub mod gamma;
pub mod hypergeometric;
pub mod laguerre;

pub use bessel::{bessel_i, bessel_j, bessel_k, bessel_k_reflection};
pub use gamma::{gamma, ln_gamma, ln_gamma_complex, ln_pochhammer, pochhammer, recip_gamma};
pub use hypergeometric::{pfq, pfq_real, pfq_value, pfq_with_budget, SeriesResult};
pub use laguerre::{laguerre, laguerre_sequence};
