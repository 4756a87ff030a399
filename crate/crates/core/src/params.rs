use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Model parameters `(λ, r)`.
///
/// `lambda` is the strength of the inverse-square term of the potential and
/// must satisfy λ > −1/2. `r` is the deformation parameter, r ≥ 1. `r = 1`
/// gives Klauder–Perelomov type states (after `z → (z/|z|) tanh|z|`), `r = 2`
/// the Barut–Girardello states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    lambda: f64,
    r: u32,
}

impl ModelParams {
    pub fn new(lambda: f64, r: u32) -> Result<Self> {
        if !lambda.is_finite() || lambda <= -0.5 {
            return Err(Error::domain(format!("lambda must satisfy λ > -1/2 (got {lambda})")));
        }
        if r < 1 {
            return Err(Error::domain("deformation parameter must satisfy r >= 1"));
        }
        Ok(ModelParams { lambda, r })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// λ + 1/2. Twice the Bargmann index; it is the lowest eigenvalue of the
    /// Hamiltonian and the base of nearly every Pochhammer symbol.
    pub fn lambda_plus_half(&self) -> f64 {
        self.lambda + 0.5
    }

    /// Lowest weight of J₃, λ/2 + 1/4.
    pub fn vacuum_j3(&self) -> f64 {
        0.5 * self.lambda + 0.25
    }

    /// Checks the admissible domain of the coherence parameter: |z| < 1 for
    /// r = 1, any finite z otherwise.
    pub fn check_z(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::domain("z must be finite"));
        }
        if self.r == 1 && z.norm() >= 1.0 {
            return Err(Error::domain(format!("r=1 requires |z|<1 (got |z| = {})", z.norm())));
        }
        Ok(())
    }

    /// Same as [`check_z`](Self::check_z) but on |z|² alone.
    pub fn check_abs_z_sq(&self, abs_z_sq: f64) -> Result<()> {
        if !abs_z_sq.is_finite() || abs_z_sq < 0.0 {
            return Err(Error::domain("|z|^2 must be finite and non-negative"));
        }
        if self.r == 1 && abs_z_sq >= 1.0 {
            return Err(Error::domain(format!("r=1 requires |z|<1 (got |z|^2 = {abs_z_sq})")));
        }
        Ok(())
    }
}
