//! Spot check of the Laguerre operator identity
//!
//! (d/dy − 1)ⁿ yⁿ = (y d/dy − y + 1)(y d/dy − y + 2)⋯(y d/dy − y + n),
//!
//! applied to y^α, α = λ − 1/2. Both sides act exactly on generalized
//! polynomials Σⱼ cⱼ y^{α+j}, and both must give n! L_n^α(y) y^α.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::special_functions::laguerre;

/// Σⱼ cⱼ y^{α+j} with integer j.
#[derive(Debug, Clone, PartialEq)]
pub struct GenPoly {
    alpha: f64,
    terms: BTreeMap<i32, f64>,
}

impl GenPoly {
    /// y^{α+j}
    pub fn monomial(alpha: f64, j: i32) -> Self {
        GenPoly { alpha, terms: BTreeMap::from([(j, 1.0)]) }
    }

    pub fn coefficient(&self, j: i32) -> f64 {
        self.terms.get(&j).copied().unwrap_or(0.0)
    }

    pub fn derivative(&self) -> Self {
        let terms =
            self.terms.iter().map(|(&j, &c)| (j - 1, c * (self.alpha + j as f64))).filter(|&(_, c)| c != 0.0).collect();
        GenPoly { alpha: self.alpha, terms }
    }

    pub fn times_y(&self) -> Self {
        GenPoly { alpha: self.alpha, terms: self.terms.iter().map(|(&j, &c)| (j + 1, c)).collect() }
    }

    /// self + s·other
    pub fn add_scaled(&self, other: &GenPoly, s: f64) -> Self {
        let mut terms = self.terms.clone();
        for (&j, &c) in &other.terms {
            *terms.entry(j).or_insert(0.0) += s * c;
        }
        GenPoly { alpha: self.alpha, terms }
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.terms.iter().map(|(&j, &c)| c * y.powf(self.alpha + j as f64)).sum()
    }

    /// Largest |cⱼ|.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorIdentityReport {
    pub n: usize,
    pub lambda: f64,
    /// max |left − right| over coefficients, relative to the largest one.
    pub coefficient_mismatch: f64,
    /// max relative deviation of either side from n! L_n^α(y) y^α on the grid.
    pub laguerre_mismatch: f64,
    /// max relative deviation of the exact derivative from a central
    /// difference (step 1e−5) over every intermediate function on the grid.
    pub finite_difference_mismatch: f64,
}

impl OperatorIdentityReport {
    pub fn passes(&self, exact_tol: f64, fd_tol: f64) -> bool {
        self.coefficient_mismatch <= exact_tol
            && self.laguerre_mismatch <= exact_tol
            && self.finite_difference_mismatch <= fd_tol
    }
}

const FD_STEP: f64 = 1e-5;

fn fd_mismatch(g: &GenPoly, ys: &[f64]) -> f64 {
    let dg = g.derivative();
    ys.iter()
        .map(|&y| {
            let fd = (g.eval(y + FD_STEP) - g.eval(y - FD_STEP)) / (2.0 * FD_STEP);
            let exact = dg.eval(y);
            (fd - exact).abs() / exact.abs().max(1.0)
        })
        .fold(0.0, f64::max)
}

/// Evaluates both sides of the identity on y^{λ−1/2} for the given n and
/// grid of y > 0.
pub fn operator_identity_check(lambda: f64, n: usize, ys: &[f64]) -> Result<OperatorIdentityReport> {
    if lambda <= -0.5 || ys.iter().any(|&y| y <= FD_STEP) {
        return Err(Error::domain("identity check needs λ > −1/2 and grid points y > 1e−5"));
    }
    let alpha = lambda - 0.5;

    let mut left = GenPoly::monomial(alpha, n as i32);
    let mut fd = 0.0f64;
    for _ in 0..n {
        fd = fd.max(fd_mismatch(&left, ys));
        left = left.derivative().add_scaled(&left, -1.0);
    }

    let mut right = GenPoly::monomial(alpha, 0);
    for k in 1..=n {
        fd = fd.max(fd_mismatch(&right, ys));
        // (y d/dy − y + k) g
        let shifted = right.derivative().times_y().add_scaled(&right.times_y(), -1.0);
        right = shifted.add_scaled(&right, k as f64);
    }

    let scale = left.max_coefficient().max(right.max_coefficient());
    let lo = -(n as i32) - 1;
    let hi = n as i32 + 1;
    let coefficient_mismatch =
        (lo..=hi).map(|j| (left.coefficient(j) - right.coefficient(j)).abs()).fold(0.0, f64::max) / scale;

    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    let laguerre_mismatch = ys
        .iter()
        .map(|&y| {
            let expect = factorial * laguerre(n, alpha, y) * y.powf(alpha);
            let norm = left.terms.iter().map(|(&j, &c)| (c * y.powf(alpha + j as f64)).abs()).sum::<f64>();
            ((left.eval(y) - expect).abs()).max((right.eval(y) - expect).abs()) / norm.max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);

    Ok(OperatorIdentityReport { n, lambda, coefficient_mismatch, laguerre_mismatch, finite_difference_mismatch: fd })
}
