//! Generalized hypergeometric series ₚF_q with real parameters.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Maximum number of series terms before giving up.
pub const TERM_BUDGET: usize = 20_000;

/// Outcome of a series evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: Complex64,
    pub terms_used: usize,
    /// Estimated truncation error relative to |value| (absolute when the
    /// value is zero), from a geometric majorant of the term ratio.
    pub tail_bound: f64,
    pub converged: bool,
}

impl SeriesResult {
    /// Returns the value or a non-convergence error.
    pub fn into_value(self, what: &str) -> Result<Complex64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::non_convergence(what, self.tail_bound))
        }
    }
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// |term ratio| t_{m+1}/t_m at index m.
fn ratio_at(num: &[f64], den: &[f64], modulus: f64, m: usize) -> f64 {
    let m = m as f64;
    let mut ratio = modulus / (m + 1.0);
    for a in num {
        ratio *= a + m;
    }
    for b in den {
        ratio /= b + m;
    }
    ratio.abs()
}

/// Evaluates ₚF_q(num; den; z) = Σₙ [∏(aᵢ)ₙ / ∏(bⱼ)ₙ] zⁿ/n!.
///
/// Summation stops once three consecutive terms are below `tol` relative to
/// the partial sum and the geometric tail estimate is below `tol`. Powers of
/// z are formed in polar form. Divergent or slowly converging series come
/// back with `converged = false` and the best partial sum.
pub fn pfq(num: &[f64], den: &[f64], z: Complex64, tol: f64) -> Result<SeriesResult> {
    pfq_with_budget(num, den, z, tol, TERM_BUDGET)
}

pub fn pfq_with_budget(num: &[f64], den: &[f64], z: Complex64, tol: f64, budget: usize) -> Result<SeriesResult> {
    if let Some(b) = den.iter().find(|&&b| is_non_positive_integer(b)) {
        return Err(Error::domain(format!("pFq denominator parameter {b} is a non-positive integer")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("series tolerance must be positive"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain("pFq argument must be finite"));
    }

    let modulus = z.norm();
    let phase = if modulus == 0.0 { 0.0 } else { z.arg() };
    let mut sum = Complex64::new(1.0, 0.0);
    if modulus == 0.0 {
        return Ok(SeriesResult { value: sum, terms_used: 1, tail_bound: 0.0, converged: true });
    }

    // Limit of the term ratio as n → ∞.
    let limit_ratio = match num.len().cmp(&(den.len() + 1)) {
        std::cmp::Ordering::Less => 0.0,
        std::cmp::Ordering::Equal => modulus,
        std::cmp::Ordering::Greater => f64::INFINITY,
    };

    // Signed real coefficient including |z|ⁿ; the phase is applied per term.
    let mut coef = 1.0f64;
    let mut small_run = 0usize;
    let mut tail = f64::INFINITY;
    for n in 0..budget {
        let nf = n as f64;
        let mut ratio = modulus / (nf + 1.0);
        for a in num {
            ratio *= a + nf;
        }
        for b in den {
            ratio /= b + nf;
        }
        coef *= ratio;
        if coef == 0.0 {
            // a numerator parameter hit a non-positive integer: polynomial
            return Ok(SeriesResult { value: sum, terms_used: n + 1, tail_bound: 0.0, converged: true });
        }
        if !coef.is_finite() {
            break;
        }
        let term = Complex64::from_polar(coef, (nf + 1.0) * phase);
        sum += term;

        let scale = sum.norm();
        let rel = if scale > 0.0 { coef.abs() / scale } else { f64::INFINITY };
        small_run = if rel < tol { small_run + 1 } else { 0 };
        if small_run >= 3 {
            let q = (1..=3).map(|k| ratio_at(num, den, modulus, n + k)).fold(limit_ratio, f64::max);
            if q < 1.0 {
                let abs_tail = coef.abs() * q / (1.0 - q);
                tail = if scale > 0.0 { abs_tail / scale } else { abs_tail };
                if tail <= tol {
                    return Ok(SeriesResult { value: sum, terms_used: n + 2, tail_bound: tail, converged: true });
                }
            }
        }
    }
    Ok(SeriesResult { value: sum, terms_used: budget.max(1), tail_bound: tail, converged: false })
}

/// Converged value of ₚF_q or a non-convergence error.
pub fn pfq_value(num: &[f64], den: &[f64], z: Complex64, tol: f64) -> Result<Complex64> {
    let label = format!("{}F{} series", num.len(), den.len());
    pfq(num, den, z, tol)?.into_value(&label)
}

/// Real-argument convenience wrapper around [`pfq_value`].
pub fn pfq_real(num: &[f64], den: &[f64], x: f64, tol: f64) -> Result<f64> {
    pfq_value(num, den, Complex64::new(x, 0.0), tol).map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn exponential_series() {
        let r = pfq(&[], &[], c(1.0), 1e-14).unwrap();
        assert!(r.converged);
        assert!((r.value.re - std::f64::consts::E).abs() < 1e-14);
        assert!(r.tail_bound <= 1e-14);
        assert!(r.terms_used >= 1);
    }

    #[test]
    fn binomial_series() {
        let r = pfq(&[2.0], &[], c(0.5), 1e-14).unwrap();
        assert!(r.converged);
        assert!((r.value.re - 4.0).abs() < 1e-13);
        let w = Complex64::new(0.3, -0.6);
        let r = pfq(&[1.5], &[], w, 1e-14).unwrap();
        let exact = (Complex64::new(1.0, 0.0) - w).powf(-1.5);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn parameter_cancellation_reduces_order() {
        // ₁F₂([2],[2,2];1) = ₀F₁(;2;1); brute-force partial sums to machine precision
        let mut brute = 0.0f64;
        let mut term = 1.0f64;
        for n in 0..40 {
            brute += term;
            term /= (n as f64 + 1.0) * (n as f64 + 2.0);
        }
        assert!((brute - 1.590_636_854_637_329).abs() < 1e-15);
        let r = pfq(&[2.0], &[2.0, 2.0], c(1.0), 1e-14).unwrap();
        assert!((r.value.re - brute).abs() < 1e-14);
    }

    #[test]
    fn terminating_series_is_exact() {
        // ₂F₁(−2, b; c; z) is a quadratic polynomial
        let (b, cc, z) = (1.5, 2.5, 0.7);
        let expect = 1.0 - 2.0 * b / cc * z + b * (b + 1.0) / (cc * (cc + 1.0)) * z * z;
        let r = pfq(&[-2.0, b], &[cc], c(z), 1e-14).unwrap();
        assert!(r.converged);
        assert_eq!(r.tail_bound, 0.0);
        assert!((r.value.re - expect).abs() < 1e-15);
    }

    #[test]
    fn divergent_series_is_flagged() {
        let r = pfq_with_budget(&[1.0, 1.0], &[], c(0.5), 1e-14, 500).unwrap();
        assert!(!r.converged);
        assert!(pfq_value(&[1.0, 1.0], &[], c(0.5), 1e-14).is_err());
        let r = pfq(&[1.0], &[], c(1.5), 1e-14).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn bad_denominator_is_domain_error() {
        assert!(matches!(pfq(&[1.0], &[-3.0], c(0.2), 1e-14), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_argument() {
        let r = pfq(&[0.3], &[1.2, 4.0], c(0.0), 1e-14).unwrap();
        assert_eq!(r.value, c(1.0));
        assert_eq!(r.terms_used, 1);
    }

    #[test]
    fn alternating_complex_argument() {
        // ₀F₁(;1;−x²/4) = J₀(x); J₀(5) = −0.17759677131433830
        let r = pfq(&[], &[1.0], c(-6.25), 1e-15).unwrap();
        assert!((r.value.re + 0.177_596_771_314_338_3).abs() < 1e-14);
        // e^{iθ}: ₀F₀(;;iθ)
        let r = pfq(&[], &[], Complex64::new(0.0, 2.0), 1e-15).unwrap();
        assert!((r.value - Complex64::from_polar(1.0, 2.0)).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn shared_parameter_cancels(
            a in 0.1f64..4.0,
            shared in 0.2f64..5.0,
            b in 0.3f64..5.0,
            x in -6.0f64..8.0,
            y in -3.0f64..3.0,
        ) {
            let z = Complex64::new(x, y);
            let full = pfq(&[a, shared], &[b, shared], z, 1e-15).unwrap();
            let reduced = pfq(&[a], &[b], z, 1e-15).unwrap();
            prop_assert!(full.converged && reduced.converged);
            // Relative to Σ|terms| so that zeros of the function do not blow up
            // the comparison.
            let scale = pfq(&[a], &[b], Complex64::new(z.norm(), 0.0), 1e-15).unwrap().value.re;
            prop_assert!((full.value - reduced.value).norm() / scale < 1e-12);
        }

        #[test]
        fn converged_implies_tail_within_tolerance(
            a in 0.1f64..3.0, b in 0.1f64..3.0, x in 0.0f64..20.0, tol in 1e-15f64..1e-6
        ) {
            let r = pfq(&[a], &[b, b + 1.0], Complex64::new(x, 0.0), tol).unwrap();
            prop_assert!(r.converged);
            prop_assert!(r.tail_bound <= tol);
            prop_assert!(r.terms_used >= 1);
        }
    }
}
