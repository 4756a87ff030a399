/// Associated Laguerre polynomial L_n^α(x) from the three-term recurrence
/// (k+1) L_{k+1} = (2k+1+α−x) L_k − (k+α) L_{k−1}.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// L_0^α(x), …, L_{n_max}^α(x) in one recurrence pass.
pub fn laguerre_sequence(n_max: usize, alpha: f64, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + alpha - x);
    for k in 1..n_max {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Explicit finite sum Σ_k (−1)^k C(n+α, n−k) x^k / k!, returned with the
    /// sum of absolute terms (the natural scale of cancellation).
    fn explicit(n: usize, alpha: f64, x: f64) -> (f64, f64) {
        let mut sum = 0.0;
        let mut abs = 0.0;
        for k in 0..=n {
            // C(n+α, n−k) = ∏_{j=1}^{n−k} (α+k+j)/j
            let binom: f64 = (1..=n - k).map(|j| (alpha + (k + j) as f64) / j as f64).product();
            let pow: f64 = (1..=k).map(|j| x / j as f64).product();
            let mag = binom * pow;
            sum += if k % 2 == 0 { mag } else { -mag };
            abs += mag.abs();
        }
        (sum, abs)
    }

    #[test]
    fn low_orders() {
        assert_eq!(laguerre(0, 1.0, 3.0), 1.0);
        assert_eq!(laguerre(1, 1.0, 3.0), -1.0);
        let (e, _) = explicit(5, 0.5, 2.0);
        let got = laguerre(5, 0.5, 2.0);
        assert!((got - e).abs() < 1e-14, "{got} vs {e}");
    }

    #[test]
    fn sequence_matches_single_evaluation() {
        let seq = laguerre_sequence(30, 1.75, 6.5);
        for (n, v) in seq.iter().enumerate() {
            assert_eq!(*v, laguerre(n, 1.75, 6.5));
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_explicit_sum(n in 0usize..=30, alpha in -0.499f64..=5.0, x in 0.0f64..=20.0) {
            let (e, scale) = explicit(n, alpha, x);
            let got = laguerre(n, alpha, x);
            prop_assert!((got - e).abs() <= 1e-10 * scale.max(e.abs()), "n={} α={} x={}: {} vs {}", n, alpha, x, got, e);
        }

        #[test]
        fn repeated_calls_are_bit_identical(n in 0usize..40, alpha in -0.49f64..5.0, x in 0.0f64..30.0) {
            prop_assert_eq!(laguerre(n, alpha, x).to_bits(), laguerre(n, alpha, x).to_bits());
        }
    }
}
