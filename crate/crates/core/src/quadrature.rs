//! Numerical integration.
//!
//! Two rules cover every integral in the crate:
//!
//! * [`tanh_sinh`] on a finite interval. Integrable endpoint singularities
//!   are handled because the integrand also receives the distance of each
//!   node to both endpoints, computed without cancellation.
//! * [`half_line_log_trapezoid`] on (0, ∞), the trapezoid rule in ln t.
//!   For integrands analytic in a strip around the real ln t axis and
//!   decaying at both ends this converges geometrically in the step.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// Largest |t| so that e^{−2u}, u = π/2·sinh t, stays representable.
const TANH_SINH_T_MAX: f64 = 6.05;
const MIN_LEVEL: u32 = 3;
const MAX_LEVEL: u32 = 12;

/// A node of the tanh-sinh rule: the abscissa and its distances to the
/// left and right endpoints.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

fn node_and_weight(t: f64, a: f64, b: f64) -> (Node, f64) {
    let width = b - a;
    let u = FRAC_PI_2 * t.sinh();
    let e = (-2.0 * u.abs()).exp();
    // distance from the nearer endpoint: width / (e^{2|u|} + 1)
    let near = width * e / (1.0 + e);
    let far = width - near;
    // half-width · π/2 · cosh t · sech²u, sech²u = 4e/(1+e)²
    let w = 0.5 * width * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
    let node = if t >= 0.0 {
        Node { x: b - near, from_left: far, from_right: near }
    } else {
        Node { x: a + near, from_left: near, from_right: far }
    };
    (node, w)
}

/// ∫_a^b f over a finite interval by the tanh-sinh rule.
///
/// Refines by halving the step until two successive levels agree to
/// `tol` relative to ∫|f|. The integrand receives a [`Node`].
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Quadrature>
where
    F: Fn(Node) -> f64,
{
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!("tanh-sinh needs a finite interval a < b (got [{a}, {b}])")));
    }
    let mut evaluations = 0usize;
    let mut eval = |t: f64| -> Result<(f64, f64)> {
        let (node, w) = node_and_weight(t, a, b);
        if w == 0.0 || node.from_left <= 0.0 || node.from_right <= 0.0 {
            return Ok((0.0, 0.0));
        }
        evaluations += 1;
        let v = f(node);
        if !v.is_finite() {
            return Err(Error::non_convergence(format!("tanh-sinh integrand at x = {:e}", node.x), v));
        }
        Ok((w * v, (w * v).abs()))
    };

    let mut h = 1.0;
    let (mut sum, mut abs_sum) = eval(0.0)?;
    let n0 = (TANH_SINH_T_MAX / h) as i64;
    for k in 1..=n0 {
        let t = k as f64 * h;
        let (p, pa) = eval(t)?;
        let (m, ma) = eval(-t)?;
        sum += p + m;
        abs_sum += pa + ma;
    }
    let mut estimate = h * sum;
    let mut error = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (TANH_SINH_T_MAX / h) as i64;
        let mut k = 1;
        while k <= n {
            let t = k as f64 * h;
            let (p, pa) = eval(t)?;
            let (m, ma) = eval(-t)?;
            sum += p + m;
            abs_sum += pa + ma;
            k += 2;
        }
        let next = h * sum;
        error = (next - estimate).abs();
        estimate = next;
        if level >= MIN_LEVEL && error <= tol * (h * abs_sum) {
            return Ok(Quadrature { value: estimate, error_estimate: error, evaluations });
        }
    }
    Err(Error::non_convergence("tanh-sinh quadrature", error))
}

/// ∫_0^∞ f(t) dt by the trapezoid rule in u = ln t.
///
/// The support is located by a coarse scan of g(u) = f(eᵘ)eᵘ over
/// u ∈ [−60, 60], then extended from the peak until g is negligible
/// (< 1e−20 of the peak) on both sides. Integrands with several
/// well-separated bumps are not supported.
pub fn half_line_log_trapezoid<F>(f: F, tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    const COARSE: f64 = 0.5;
    const NEGLIGIBLE: f64 = 1e-20;
    const U_LIMIT: f64 = 700.0;
    let mut evaluations = 0usize;
    let mut g = |u: f64| -> Result<f64> {
        evaluations += 1;
        let t = u.exp();
        let v = f(t) * t;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::non_convergence(format!("half-line integrand at t = {t:e}"), v))
        }
    };

    let mut peak_u = 0.0;
    let mut peak = 0.0f64;
    let mut u = -60.0;
    while u <= 60.0 {
        let v = g(u)?.abs();
        if v > peak {
            peak = v;
            peak_u = u;
        }
        u += COARSE;
    }
    if peak == 0.0 {
        return Ok(Quadrature { value: 0.0, error_estimate: 0.0, evaluations });
    }
    let mut find_edge = |dir: f64| -> Result<f64> {
        let mut u = peak_u;
        let mut quiet = 0;
        while quiet < 4 {
            u += dir * COARSE;
            if u.abs() > U_LIMIT {
                return Err(Error::non_convergence("half-line integrand does not decay", u));
            }
            quiet = if g(u)?.abs() < NEGLIGIBLE * peak { quiet + 1 } else { 0 };
        }
        Ok(u)
    };
    let lo = find_edge(-1.0)?;
    let hi = find_edge(1.0)?;

    let mut h = COARSE;
    let n = ((hi - lo) / h).ceil() as usize;
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for k in 0..=n {
        let v = g(lo + k as f64 * h)?;
        sum += v;
        abs_sum += v.abs();
    }
    let mut points = n;
    let mut estimate = h * sum;
    let mut error = f64::INFINITY;
    for level in 1..=10 {
        h *= 0.5;
        for k in 0..points {
            let v = g(lo + (2 * k + 1) as f64 * h)?;
            sum += v;
            abs_sum += v.abs();
        }
        points *= 2;
        let next = h * sum;
        error = (next - estimate).abs();
        estimate = next;
        if level >= 2 && error <= tol * h * abs_sum {
            return Ok(Quadrature { value: estimate, error_estimate: error, evaluations });
        }
    }
    Err(Error::non_convergence("log-trapezoid quadrature", error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_gaussian() {
        let q = tanh_sinh(|n| n.x * n.x, 0.0, 3.0, 1e-14).unwrap();
        assert!((q.value - 9.0).abs() < 1e-13);
        let q = tanh_sinh(|n| (-n.x * n.x).exp(), 0.0, 10.0, 1e-14).unwrap();
        assert!((q.value - 0.5 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularities_via_distances() {
        // ∫_0^1 x^{-3/4} dx = 4 and ∫_0^1 (1−x)^{-3/4} dx = 4
        let q = tanh_sinh(|n| n.from_left.powf(-0.75), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value - 4.0).abs() < 1e-11, "{}", q.value);
        let q = tanh_sinh(|n| n.from_right.powf(-0.75), 0.0, 1.0, 1e-13).unwrap();
        assert!((q.value - 4.0).abs() < 1e-11, "{}", q.value);
    }

    #[test]
    fn oscillatory_zero_integral() {
        let q = tanh_sinh(|n| (6.0 * n.x).sin(), 0.0, 2.0 * PI, 1e-13).unwrap();
        assert!(q.value.abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(tanh_sinh(|n| n.x, 1.0, 1.0, 1e-10).is_err());
        assert!(tanh_sinh(|n| n.x, 0.0, f64::INFINITY, 1e-10).is_err());
    }

    #[test]
    fn half_line_gamma_integrals() {
        // ∫ t^{s−1} e^{−t} dt = Γ(s)
        for &(s, g) in &[(1.0, 1.0), (0.5, PI.sqrt()), (11.0, 3_628_800.0)] {
            let q = half_line_log_trapezoid(|t: f64| ((s - 1.0) * t.ln() - t).exp(), 1e-14).unwrap();
            assert!(((q.value - g) / g).abs() < 1e-13, "s={s}: {}", q.value);
        }
        // heavy tail ∫ dt / (1+t)² = 1
        let q = half_line_log_trapezoid(|t: f64| 1.0 / ((1.0 + t) * (1.0 + t)), 1e-13).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_line_far_peak() {
        // ∫ t^{20} e^{−2√t} dt = 2 Γ(42) / 2^{42}
        let q = half_line_log_trapezoid(|t: f64| (20.0 * t.ln() - 2.0 * t.sqrt()).exp(), 1e-13).unwrap();
        let exact = 2.0 * (crate::special_functions::ln_gamma(42.0).unwrap() - 42.0 * 2f64.ln()).exp();
        assert!(((q.value - exact) / exact).abs() < 1e-12);
    }
}
