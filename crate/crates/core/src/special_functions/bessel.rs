//! Bessel functions of real order.
//!
//! `J_ν` and `I_ν` come from the ascending series
//! Σ (∓1)^m (x/2)^{ν+2m} / (m! Γ(ν+m+1)), which is accurate for moderate
//! arguments (|x| ≲ 30 for J, where the alternating series loses digits).
//! `K_ν` uses Temme's series for x ≤ 2 and Steed's continued fraction above,
//! followed by forward recurrence in the order.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::gamma::recip_gamma;
use crate::error::{Error, Result};

const MAX_SERIES_TERMS: usize = 2000;

fn negative_integer(nu: f64) -> Option<i64> {
    (nu < 0.0 && nu == nu.floor()).then_some(-(nu as i64))
}

/// Σ_m lead · s^m / (m! Γ(ν+m+1)) for complex s, ν not a negative integer.
fn ascending_series(nu: f64, lead: Complex64, s: Complex64) -> Complex64 {
    let mut term = lead * recip_gamma(nu + 1.0);
    let mut sum = term;
    let growth_stop = s.norm().sqrt();
    let mut quiet = 0;
    for m in 0..MAX_SERIES_TERMS {
        let mf = m as f64;
        term *= s / ((mf + 1.0) * (nu + mf + 1.0));
        sum += term;
        if mf > growth_stop && term.norm() <= 1e-17 * sum.norm() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    sum
}

/// Bessel function of the first kind J_ν(x), complex argument, principal
/// branch of (x/2)^ν.
pub fn bessel_j(nu: f64, x: Complex64) -> Complex64 {
    if let Some(n) = negative_integer(nu) {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        return bessel_j(n as f64, x) * sign;
    }
    if x == Complex64::new(0.0, 0.0) {
        return if nu == 0.0 {
            Complex64::new(1.0, 0.0)
        } else if nu > 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(f64::INFINITY, 0.0)
        };
    }
    let half = x * 0.5;
    ascending_series(nu, half.powf(nu), -(half * half))
}

/// Modified Bessel function of the first kind I_ν(x), x ≥ 0.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_i requires x >= 0 (got {x})")));
    }
    if let Some(n) = negative_integer(nu) {
        return bessel_i(n as f64, x);
    }
    if x == 0.0 {
        return Ok(if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        });
    }
    let half = 0.5 * x;
    let lead = Complex64::new(half.powf(nu), 0.0);
    Ok(ascending_series(nu, lead, Complex64::new(half * half, 0.0)).re)
}

/// Coefficients c_k of 1/Γ(z) = Σ c_k z^k, k = 1..19 (Abramowitz & Stegun 6.1.34).
const RECIP_GAMMA_TAYLOR: [f64; 19] = [
    1.0,
    0.577_215_664_901_532_9,
    -0.655_878_071_520_253_8,
    -0.042_002_635_034_095_2,
    0.166_538_611_382_291_5,
    -0.042_197_734_555_544_3,
    -0.009_621_971_527_877_0,
    0.007_218_943_246_663_0,
    -0.001_165_167_591_859_1,
    -0.000_215_241_674_114_9,
    0.000_128_050_282_388_2,
    -0.000_020_134_854_780_7,
    -0.000_001_250_493_482_1,
    0.000_001_133_027_232_0,
    -0.000_000_205_633_841_7,
    0.000_000_006_116_095_0,
    0.000_000_005_002_007_5,
    -0.000_000_001_181_274_6,
    0.000_000_000_104_342_7,
];

/// Temme's auxiliary gammas for |μ| ≤ 1/2:
/// (γ₁, γ₂, 1/Γ(1+μ), 1/Γ(1−μ)) with γ₁ = (1/Γ(1−μ) − 1/Γ(1+μ))/(2μ) and
/// γ₂ = (1/Γ(1−μ) + 1/Γ(1+μ))/2.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    if mu.abs() < 0.1 {
        // 1/Γ(1+μ) = Σ_j c_{j+1} μ^j
        let mu2 = mu * mu;
        let mut odd = 0.0;
        let mut even = 0.0;
        let mut p = 1.0;
        for pair in RECIP_GAMMA_TAYLOR.chunks(2) {
            even += pair[0] * p;
            if let Some(c) = pair.get(1) {
                odd += c * p;
            }
            p *= mu2;
        }
        let gam1 = -odd;
        let gam2 = even;
        (gam1, gam2, gam2 - mu * gam1, gam2 + mu * gam1)
    } else {
        let gampl = recip_gamma(1.0 + mu);
        let gammi = recip_gamma(1.0 - mu);
        ((gammi - gampl) / (2.0 * mu), 0.5 * (gammi + gampl), gampl, gammi)
    }
}

/// (K_μ(x), K_{μ+1}(x)) for |μ| ≤ 1/2, x > 0.
fn bessel_k_pair(mu: f64, x: f64) -> Result<(f64, f64)> {
    const EPS: f64 = 1e-16;
    const MAX_IT: usize = 10_000;
    let mu2 = mu * mu;
    if x <= 2.0 {
        let x2 = 0.5 * x;
        let pimu = PI * mu;
        let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
        let d = -x2.ln();
        let e = mu * d;
        let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
        let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
        let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
        let mut sum = ff;
        let ee = e.exp();
        let mut p = 0.5 * ee / gampl;
        let mut q = 0.5 / (ee * gammi);
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut converged = false;
        for i in 1..=MAX_IT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - mu2);
            c *= dd / fi;
            p /= fi - mu;
            q /= fi + mu;
            let del = c * ff;
            sum += del;
            sum1 += c * (p - fi * ff);
            if del.abs() < sum.abs() * EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::non_convergence("Temme series for K", f64::NAN));
        }
        Ok((sum, sum1 * 2.0 / x))
    } else {
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - mu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut converged = false;
        for i in 2..=MAX_IT {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::non_convergence("Steed continued fraction for K", f64::NAN));
        }
        let h = a1 * h;
        let kmu = (PI / (2.0 * x)).sqrt() * (-x).exp() / s;
        let k1 = kmu * (mu + x + 0.5 - h) / x;
        Ok((kmu, k1))
    }
}

/// Modified Bessel function of the second kind K_ν(x), x > 0, any real ν.
pub fn bessel_k(nu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel_k requires x > 0 (got {x})")));
    }
    let nu = nu.abs();
    let steps = (nu + 0.5).floor();
    let mu = nu - steps;
    let (mut k_lo, mut k_hi) = bessel_k_pair(mu, x)?;
    for i in 1..=(steps as usize) {
        let next = 2.0 * (mu + i as f64) / x * k_hi + k_lo;
        k_lo = k_hi;
        k_hi = next;
    }
    Ok(k_lo)
}

/// K_ν(x) = π/2 · (I_{−ν}(x) − I_ν(x)) / sin(νπ), for non-integer ν only.
/// Loses accuracy as x grows (the two I terms cancel); used as an
/// independent cross-check of [`bessel_k`] at small x.
pub fn bessel_k_reflection(nu: f64, x: f64) -> Result<f64> {
    if nu == nu.round() {
        return Err(Error::Unsupported("reflection formula for K is singular at integer order".into()));
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!("bessel_k requires x > 0 (got {x})")));
    }
    Ok(0.5 * PI * (bessel_i(-nu, x)? - bessel_i(nu, x)?) / (nu * PI).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_functions::gamma::ln_gamma;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn j_at_zero() {
        assert_eq!(bessel_j(0.7, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_eq!(bessel_j(0.0, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn j_half_integer_closed_form() {
        // J_{1/2}(x) = sqrt(2/(πx)) sin x
        for &x in &[0.3, 1.0, 4.0, 9.5] {
            let got = bessel_j(0.5, Complex64::new(x, 0.0));
            let exact = (2.0 / (PI * x)).sqrt() * x.sin();
            // ascending series: cancellation grows like e^x relative to the result
            assert!((got.re - exact).abs() < 1e-15 * x.exp().max(10.0) && got.im.abs() < 1e-15, "x={x}");
        }
    }

    #[test]
    fn j_imaginary_argument_is_i() {
        // J_ν(ix) = i^ν I_ν(x)
        let nu = 0.75;
        let x = 3.2;
        let j = bessel_j(nu, Complex64::new(0.0, x));
        let i = bessel_i(nu, x).unwrap();
        let expect = Complex64::from_polar(i, 0.5 * PI * nu);
        assert!((j - expect).norm() / i < 1e-14);
    }

    #[test]
    fn j_negative_integer_order() {
        let x = Complex64::new(2.5, 0.4);
        assert!((bessel_j(-3.0, x) + bessel_j(3.0, x)).norm() < 1e-15);
    }

    #[test]
    fn j_matches_termwise_direct_summation() {
        // Σ (−1)^m (x/2)^{ν+2m} / (m! Γ(ν+m+1)) with fresh Γ per term
        for &nu in &[0.25, 1.0, 2.3] {
            for &x in &[
                Complex64::new(0.5, 0.0),
                Complex64::new(-3.0, 4.0),
                Complex64::new(0.0, 9.0),
                Complex64::new(7.0, -7.0),
            ] {
                let half = x * 0.5;
                let mut direct = Complex64::new(0.0, 0.0);
                for m in 0..120u32 {
                    let ln_den = ln_gamma(m as f64 + 1.0).unwrap() + ln_gamma(nu + m as f64 + 1.0).unwrap();
                    let t = half.powf(nu + 2.0 * m as f64) * (-ln_den).exp();
                    direct += if m % 2 == 0 { t } else { -t };
                }
                let got = bessel_j(nu, x);
                assert!((got - direct).norm() <= 1e-12 * direct.norm().max(1.0), "ν={nu} x={x}");
            }
        }
    }

    #[test]
    fn i_half_integer_closed_form() {
        let got = bessel_i(0.5, 2.0).unwrap();
        let exact = (2.0 / (PI * 2.0)).sqrt() * 2f64.sinh();
        assert!(rel(got, exact) < 1e-14);
        assert!((got - 2.046_236).abs() < 1e-6);
        assert!(bessel_i(0.5, -1.0).is_err());
    }

    #[test]
    fn k_half_integer_closed_form() {
        for &x in &[0.05, 1.0, 1.999, 2.001, 7.5, 40.0, 300.0] {
            let exact = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!(rel(bessel_k(0.5, x).unwrap(), exact) < 1e-13, "x={x}");
            // K_{3/2}(x) = K_{1/2}(x)(1 + 1/x)
            assert!(rel(bessel_k(1.5, x).unwrap(), exact * (1.0 + 1.0 / x)) < 1e-13);
        }
        assert!((bessel_k(0.5, 1.0).unwrap() - 0.461_068_5).abs() < 1e-7);
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn k_reference_values() {
        // reference values from standard tables
        assert!(rel(bessel_k(0.0, 2.0).unwrap(), 0.113_893_872_749_533_4) < 1e-13);
        assert!(rel(bessel_k(1.0, 1.0).unwrap(), 0.601_907_230_197_234_6) < 1e-13);
        assert!(rel(bessel_k(0.0, 0.1).unwrap(), 2.427_069_024_702_016_6) < 1e-13);
        assert!(rel(bessel_k(2.0, 5.0).unwrap(), 0.005_308_943_712_223_460) < 1e-12);
    }

    #[test]
    fn k_reflection_cross_check() {
        for &nu in &[0.25, 0.4, 1.3, 2.75] {
            for &x in &[0.2, 1.0, 2.5, 5.0] {
                let a = bessel_k(nu, x).unwrap();
                let b = bessel_k_reflection(nu, x).unwrap();
                assert!(rel(a, b) < 1e-10, "ν={nu} x={x}: {a} vs {b}");
            }
        }
        assert!(bessel_k_reflection(1.0, 1.0).is_err());
    }

    #[test]
    fn k_is_even_in_order_and_rejects_bad_argument() {
        assert_eq!(bessel_k(-0.3, 1.7).unwrap(), bessel_k(0.3, 1.7).unwrap());
        assert!(bessel_k(1.0, 0.0).is_err());
        assert!(bessel_k(1.0, -2.0).is_err());
    }

    #[test]
    fn k_wronskian_with_i() {
        // I_ν K_{ν+1} + I_{ν+1} K_ν = 1/x
        for &nu in &[0.0, 0.25, 1.0, 3.5] {
            for &x in &[0.3, 2.0, 6.0, 15.0] {
                let w = bessel_i(nu, x).unwrap() * bessel_k(nu + 1.0, x).unwrap()
                    + bessel_i(nu + 1.0, x).unwrap() * bessel_k(nu, x).unwrap();
                assert!(rel(w, 1.0 / x) < 1e-13, "ν={nu} x={x}");
            }
        }
    }
}
