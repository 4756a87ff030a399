//! Coordinate representation ψ(x) = ⟨x|z⟩ᵣ^λ on the half-line.

use num_complex::Complex64;
use serde::Serialize;

use super::CoherentState;
use crate::error::{Error, Result};
use crate::quadrature::{tanh_sinh, Quadrature};
use crate::special_functions::{bessel_i, bessel_j, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WavefunctionSample {
    pub x: f64,
    pub psi: Complex64,
}

const RESCALE: f64 = 1e150;

impl CoherentState {
    /// ψ(x) = Σₙ cₙ (−1)ⁿ √(2n!/Γ(n+λ+1/2)) x^λ e^{−x²/2} L_n^{λ−1/2}(x²),
    /// summed to the state's truncation. The Laguerre recurrence is carried
    /// with a running scale so that large N and x neither overflow nor
    /// underflow.
    pub fn wavefunction(&self, x: f64) -> Result<Complex64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!("wavefunction needs x > 0 (got {x})")));
        }
        let lambda = self.params.lambda();
        let a = self.params.lambda_plus_half();
        let alpha = a - 1.0;
        let y = x * x;
        // ln of √(2/Γ(a)) x^λ e^{−y/2}
        let ln_envelope = 0.5 * (std::f64::consts::LN_2 - ln_gamma(a)?) + lambda * x.ln() - 0.5 * y;

        // L_n is stored as l_cur · e^{ln_scale}; b_n/b_0 = √(n!/(a)_n) as ln_b.
        let mut ln_scale = 0.0;
        let mut ln_b = 0.0;
        let (mut l_prev, mut l_cur) = (0.0, 1.0);
        let mut sum = self.coeffs[0] * (ln_envelope).exp();
        for n in 1..=self.n_trunc {
            let m = (n - 1) as f64;
            let l_next = ((2.0 * m + 1.0 + alpha - y) * l_cur - (m + alpha) * l_prev) / (m + 1.0);
            l_prev = l_cur;
            l_cur = l_next;
            if l_cur.abs() > RESCALE {
                l_cur /= RESCALE;
                l_prev /= RESCALE;
                ln_scale += RESCALE.ln();
            }
            ln_b += 0.5 * (n as f64 / (a + m)).ln();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            sum += self.coeffs[n] * (sign * l_cur * (ln_envelope + ln_b + ln_scale).exp());
        }
        Ok(sum)
    }

    /// r = 2 closed form through Bessel functions:
    /// ψ(x) = √(2x/I_ν(2|z|)) |z|^{ν/2} w^{−ν} e^{−z−x²/2} J_ν(2xw), ν = λ−1/2,
    /// w = √(−z) (principal; any consistent branch gives the same value).
    pub fn wavefunction_bessel(&self, x: f64) -> Result<Complex64> {
        if self.params.r() != 2 {
            return Err(Error::Unsupported("Bessel form of the wavefunction exists for r = 2 only".into()));
        }
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!("wavefunction needs x > 0 (got {x})")));
        }
        let a = self.params.lambda_plus_half();
        let nu = a - 1.0;
        if self.modulus == 0.0 {
            let g = (0.5 * (std::f64::consts::LN_2 - ln_gamma(a)?) + self.params.lambda() * x.ln() - 0.5 * x * x).exp();
            return Ok(Complex64::new(g, 0.0));
        }
        let z = self.z();
        let w = (-z).sqrt();
        let i_nu = bessel_i(nu, 2.0 * self.modulus)?;
        let prefactor = (2.0 * x / i_nu).sqrt() * self.modulus.powf(0.5 * nu) * w.powf(-nu) * (-z - 0.5 * x * x).exp();
        Ok(prefactor * bessel_j(nu, 2.0 * x * w))
    }

    pub fn sample_wavefunction(&self, xs: &[f64]) -> Result<Vec<WavefunctionSample>> {
        xs.iter().map(|&x| Ok(WavefunctionSample { x, psi: self.wavefunction(x)? })).collect()
    }

    /// ∫₀^∞ |ψ|² dx by tanh-sinh on (0, x_max]. x_max is found by walking
    /// out past the turning point of the highest retained level until |ψ|²
    /// stays below 1e−22.
    pub fn wavefunction_norm(&self) -> Result<Quadrature> {
        let turning = (2.0 * self.n_trunc as f64 + self.params.lambda_plus_half()).sqrt();
        let mut x = 0.25;
        let mut quiet = 0;
        while quiet < 4 {
            x += 0.25;
            if x > 400.0 {
                return Err(Error::non_convergence("wavefunction tail search", x));
            }
            quiet = if x > turning && self.wavefunction(x)?.norm_sqr() < 1e-22 { quiet + 1 } else { 0 };
        }
        let f =
            |node: crate::quadrature::Node| self.wavefunction(node.from_left).map(|p| p.norm_sqr()).unwrap_or(f64::NAN);
        tanh_sinh(f, 0.0, x, 1e-12)
    }
}
