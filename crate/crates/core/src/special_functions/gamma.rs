use std::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Lanczos parameter `r` of the Pugh approximation.
const LANCZOS_R: f64 = 10.900511;

/// Lanczos series coefficients (Pugh, 2004, table for n = 10).
#[allow(clippy::excessive_precision)]
const LANCZOS_DK: [f64; 11] = [
    2.48574089138753565546e-5,
    1.05142378581721974210,
    -3.45687097222016235469,
    4.51227709466894823700,
    -2.98285225323576655721,
    1.05639711577126713077,
    -1.95428773191645869583e-1,
    1.70970543404441224307e-2,
    -5.71926117404305781283e-4,
    4.63399473359905636708e-6,
    -2.71994908488607703910e-9,
];

/// ln(2·sqrt(e/π))
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
const LN_PI: f64 = 1.144_729_885_849_400_2;

fn lanczos_ln_gamma(x: f64) -> f64 {
    let s = LANCZOS_DK.iter().enumerate().skip(1).fold(LANCZOS_DK[0], |s, (k, d)| s + d / (x + k as f64 - 1.0));
    s.ln() + LN_2_SQRT_E_OVER_PI + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / E).ln()
}

/// ln Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0 (got {x})")));
    }
    Ok(ln_gamma_unchecked(x))
}

/// ln Γ(x) without the domain check. Callers guarantee x > 0.
pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        LN_PI - (PI * x).sin().ln() - lanczos_ln_gamma(1.0 - x)
    } else {
        lanczos_ln_gamma(x)
    }
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// 1/Γ(x) for any real x; zero at the poles x = 0, −1, −2, ….
pub fn recip_gamma(x: f64) -> f64 {
    if x > 0.0 {
        return (-ln_gamma_unchecked(x)).exp();
    }
    if x == x.floor() {
        return 0.0;
    }
    // reflection: 1/Γ(x) = sin(πx) Γ(1−x) / π
    (PI * x).sin() * ln_gamma_unchecked(1.0 - x).exp() / PI
}

/// ln Γ(z) for complex z away from the poles. The imaginary part is defined
/// up to a multiple of 2π; `exp` of the result is Γ(z).
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let mut z = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while z.re < 0.5 {
        shift += z.ln();
        z += 1.0;
    }
    let s = LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(Complex64::new(LANCZOS_DK[0], 0.0), |s, (k, d)| s + d / (z + (k as f64 - 1.0)));
    s.ln() + LN_2_SQRT_E_OVER_PI + (z - 0.5) * ((z - 0.5 + LANCZOS_R) / E).ln() - shift
}

/// Pochhammer symbol (a)ₙ = Γ(a+n)/Γ(a) = a(a+1)…(a+n−1).
///
/// Short products and arguments at or below zero use the direct product;
/// long products with a > 0 go through log-gamma.
pub fn pochhammer(a: f64, n: u32) -> f64 {
    if n <= 32 || a <= 0.0 {
        return (0..n).fold(1.0, |acc, k| acc * (a + k as f64));
    }
    (ln_gamma_unchecked(a + n as f64) - ln_gamma_unchecked(a)).exp()
}

/// ln (a)ₙ for a > 0.
pub fn ln_pochhammer(a: f64, n: u32) -> f64 {
    debug_assert!(a > 0.0);
    if n <= 16 {
        return (0..n).map(|k| (a + k as f64).ln()).sum();
    }
    ln_gamma_unchecked(a + n as f64) - ln_gamma_unchecked(a)
}
