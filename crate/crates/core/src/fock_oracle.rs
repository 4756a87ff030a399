//! Truncated Fock-space realization of su(1,1).
//!
//! The generators act on |n, λ⟩, n = 0..=N, as
//! J₊|n⟩ = √((n+1)(n+λ+1/2)) |n+1⟩, J₋ = J₊ᵀ, J₃|n⟩ = (n + λ/2 + 1/4)|n⟩.
//! Nothing here uses a closed form of the coherent states; this module is
//! the reference every closed form is checked against.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{tanh_sinh, Quadrature};
use crate::special_functions::{laguerre_sequence, ln_gamma};

/// Tolerance on Σ|cₙ|² − 1 accepted by [`FockOperators::expectation`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Dense matrices of the generators on span{|0⟩, …, |N⟩}.
#[derive(Debug, Clone)]
pub struct FockOperators {
    params: ModelParams,
    pub(crate) j_plus: Array2<f64>,
    pub(crate) j_minus: Array2<f64>,
    pub(crate) j3: Array2<f64>,
    pub(crate) number: Array2<f64>,
    pub(crate) hamiltonian: Array2<f64>,
    /// Rounding remainders of the J₊ and J₃ entries (value = hi + lo), so the
    /// algebra can be checked below the ulp of the stored doubles.
    pub(crate) j_plus_lo: Array2<f64>,
    pub(crate) j3_lo: Array2<f64>,
}

/// √(n(n+λ−1/2)): the matrix element ⟨n|J₊|n−1⟩.
pub fn ladder_element(params: &ModelParams, n: usize) -> f64 {
    ladder_element_dd(params, n).0
}

fn ladder_element_dd(params: &ModelParams, n: usize) -> (f64, f64) {
    let n = n as f64;
    let shift = dd::two_sum(params.lambda(), -0.5);
    dd::sqrt(dd::mul_f64(dd::add_f64(shift, n), n))
}

fn j3_element_dd(params: &ModelParams, n: usize) -> (f64, f64) {
    // λ/2 is exact; add 1/4 and n without losing the remainder
    dd::add_f64(dd::two_sum(0.5 * params.lambda(), 0.25), n as f64)
}

/// Builds the generators truncated to n = 0..=n_trunc.
pub fn build_operators(params: ModelParams, n_trunc: usize) -> Result<FockOperators> {
    if n_trunc < 2 {
        return Err(Error::domain(format!("truncation must satisfy N >= 2 (got {n_trunc})")));
    }
    let dim = n_trunc + 1;
    let mut j_plus = Array2::zeros((dim, dim));
    let mut j_plus_lo = Array2::zeros((dim, dim));
    for n in 1..dim {
        let (hi, lo) = ladder_element_dd(&params, n);
        j_plus[[n, n - 1]] = hi;
        j_plus_lo[[n, n - 1]] = lo;
    }
    let j_minus = j_plus.t().to_owned();
    let j3_dd: Vec<(f64, f64)> = (0..dim).map(|n| j3_element_dd(&params, n)).collect();
    let j3 = Array2::from_diag(&Array1::from_iter(j3_dd.iter().map(|v| v.0)));
    let j3_lo = Array2::from_diag(&Array1::from_iter(j3_dd.iter().map(|v| v.1)));
    let number = Array2::from_diag(&Array1::from_shape_fn(dim, |n| n as f64));
    let hamiltonian = Array2::from_diag(&Array1::from_shape_fn(dim, |n| 2.0 * n as f64 + params.lambda_plus_half()));
    Ok(FockOperators { params, j_plus, j_minus, j3, number, hamiltonian, j_plus_lo, j3_lo })
}

/// Single generator in an [`Observable`] product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Operator {
    JPlus,
    JMinus,
    J3,
    Number,
    Hamiltonian,
    Identity,
}

/// A linear combination of operator products, Σ cₖ · O_{k,1} O_{k,2} ⋯.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Observable {
    terms: Vec<(Complex64, Vec<Operator>)>,
}

impl Observable {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single operator with unit coefficient.
    pub fn single(op: Operator) -> Self {
        Self::product(&[op])
    }

    /// O₁ O₂ ⋯ with unit coefficient (O₁ acts last).
    pub fn product(ops: &[Operator]) -> Self {
        Observable { terms: vec![(Complex64::new(1.0, 0.0), ops.to_vec())] }
    }

    /// Adds c · O₁ O₂ ⋯.
    pub fn with_term(mut self, coef: Complex64, ops: &[Operator]) -> Self {
        self.terms.push((coef, ops.to_vec()));
        self
    }

    pub fn terms(&self) -> &[(Complex64, Vec<Operator>)] {
        &self.terms
    }
}

impl std::ops::Add for Observable {
    type Output = Observable;
    fn add(mut self, rhs: Observable) -> Observable {
        self.terms.extend(rhs.terms);
        self
    }
}

/// Double-double helpers (value = hi + lo).
mod dd {
    pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bp = s - a;
        (s, (a - (s - bp)) + (b - bp))
    }

    fn renorm(hi: f64, lo: f64) -> (f64, f64) {
        let s = hi + lo;
        (s, lo - (s - hi))
    }

    pub fn add_f64(x: (f64, f64), b: f64) -> (f64, f64) {
        let (s, e) = two_sum(x.0, b);
        renorm(s, e + x.1)
    }

    pub fn mul_f64(x: (f64, f64), b: f64) -> (f64, f64) {
        let p = x.0 * b;
        let e = x.0.mul_add(b, -p);
        renorm(p, e + x.1 * b)
    }

    /// One Newton step on the double square root.
    pub fn sqrt(x: (f64, f64)) -> (f64, f64) {
        if x.0 <= 0.0 {
            return (0.0, 0.0);
        }
        let r = x.0.sqrt();
        let resid = (x.0 - r * r) - r.mul_add(r, -(r * r)) + x.1;
        renorm(r, resid / (2.0 * r))
    }

    /// Accumulator for sums of products of double-double numbers.
    #[derive(Default)]
    pub struct Accumulator {
        hi: f64,
        lo: f64,
    }

    impl Accumulator {
        pub fn add(&mut self, x: (f64, f64)) {
            let (s, e) = two_sum(self.hi, x.0);
            self.hi = s;
            self.lo += e + x.1;
        }

        pub fn add_product(&mut self, a: (f64, f64), b: (f64, f64)) {
            if a.0 == 0.0 || b.0 == 0.0 {
                return;
            }
            let p = a.0 * b.0;
            let e = a.0.mul_add(b.0, -p);
            self.add((p, e + a.0 * b.1 + a.1 * b.0));
        }

        pub fn value(&self) -> f64 {
            self.hi + self.lo
        }
    }
}

/// Max absolute entrywise residuals of the three su(1,1) relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorResiduals {
    /// [J₊, J₋] + 2J₃
    pub plus_minus: f64,
    /// [J₃, J₊] − J₊
    pub j3_plus: f64,
    /// [J₃, J₋] + J₋
    pub j3_minus: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.plus_minus.max(self.j3_plus).max(self.j3_minus)
    }
}

impl FockOperators {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// N + 1.
    pub fn dim(&self) -> usize {
        self.j3.nrows()
    }

    pub fn j_plus(&self) -> &Array2<f64> {
        &self.j_plus
    }

    pub fn j_minus(&self) -> &Array2<f64> {
        &self.j_minus
    }

    pub fn j3(&self) -> &Array2<f64> {
        &self.j3
    }

    pub fn number(&self) -> &Array2<f64> {
        &self.number
    }

    pub fn hamiltonian(&self) -> &Array2<f64> {
        &self.hamiltonian
    }

    pub fn matrix(&self, op: Operator) -> Option<&Array2<f64>> {
        match op {
            Operator::JPlus => Some(&self.j_plus),
            Operator::JMinus => Some(&self.j_minus),
            Operator::J3 => Some(&self.j3),
            Operator::Number => Some(&self.number),
            Operator::Hamiltonian => Some(&self.hamiltonian),
            Operator::Identity => None,
        }
    }

    /// The three relation residuals. Entries are the double-double matrix
    /// elements and every sum of products is accumulated without rounding,
    /// so what remains is the algebra itself rather than the ulp of the
    /// stored doubles (≈ 3e−12 at N = 128).
    fn residual_matrices(&self) -> [Array2<f64>; 3] {
        let dim = self.dim();
        let band = [&self.j_plus, &self.j_minus, &self.j3]
            .iter()
            .flat_map(|m| m.indexed_iter().filter(|(_, v)| **v != 0.0).map(|((i, j), _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0);
        let p = |i: usize, j: usize| (self.j_plus[[i, j]], self.j_plus_lo[[i, j]]);
        let m = |i: usize, j: usize| (self.j_minus[[i, j]], self.j_plus_lo[[j, i]]);
        let j3 = |i: usize, j: usize| (self.j3[[i, j]], self.j3_lo[[i, j]]);
        let scale = |x: (f64, f64), s: f64| (s * x.0, s * x.1);
        let relation = |a: &dyn Fn(usize, usize) -> (f64, f64),
                        b: &dyn Fn(usize, usize) -> (f64, f64),
                        c: &dyn Fn(usize, usize) -> (f64, f64),
                        sc: f64| {
            Array2::from_shape_fn((dim, dim), |(i, j)| {
                let mut acc = dd::Accumulator::default();
                if i.abs_diff(j) > 2 * band {
                    return 0.0;
                }
                for k in i.saturating_sub(band)..=(i + band).min(dim - 1) {
                    acc.add_product(a(i, k), b(k, j));
                    acc.add_product(scale(b(i, k), -1.0), a(k, j));
                }
                acc.add(scale(c(i, j), sc));
                acc.value()
            })
        };
        [relation(&p, &m, &j3, 2.0), relation(&j3, &p, &p, -1.0), relation(&j3, &m, &m, 1.0)]
    }

    /// Commutator residuals on the block n, m < N, which is free of
    /// truncation effects.
    pub fn commutator_residuals(&self) -> Result<CommutatorResiduals> {
        let dim = self.dim();
        if dim < 3 {
            return Err(Error::domain("commutator check needs dim >= 3"));
        }
        let inner = dim - 1;
        let [a, b, c] = self.residual_matrices();
        let block_max =
            |m: &Array2<f64>| m.slice(ndarray::s![..inner, ..inner]).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(CommutatorResiduals { plus_minus: block_max(&a), j3_plus: block_max(&b), j3_minus: block_max(&c) })
    }

    /// ([J₊, J₋] + 2J₃) at (N, N) on the full truncated block. It equals the
    /// dropped term ⟨N|J₋J₊|N⟩ = (N+1)(N+λ+1/2).
    pub fn commutator_edge_residual(&self) -> f64 {
        let [a, _, _] = self.residual_matrices();
        let n = self.dim() - 1;
        a[[n, n]]
    }

    /// Rescales the ladder pair ⟨n|J₊|n−1⟩ = ⟨n−1|J₋|n⟩ by (1 + rel).
    /// Exists for mutation testing of the residual checks.
    pub fn perturb_ladder(&mut self, n: usize, rel: f64) -> Result<()> {
        if n == 0 || n >= self.dim() {
            return Err(Error::domain(format!("ladder index must lie in 1..{} (got {n})", self.dim())));
        }
        self.j_plus[[n, n - 1]] *= 1.0 + rel;
        self.j_minus[[n - 1, n]] *= 1.0 + rel;
        Ok(())
    }

    /// Applies one generator to a complex vector.
    pub fn apply(&self, op: Operator, v: &[Complex64]) -> Vec<Complex64> {
        let Some(m) = self.matrix(op) else {
            return v.to_vec();
        };
        let re = Array1::from_iter(v.iter().map(|c| c.re));
        let im = Array1::from_iter(v.iter().map(|c| c.im));
        let (re, im) = (m.dot(&re), m.dot(&im));
        re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    /// O|ψ⟩ for an observable expression.
    pub fn apply_observable(&self, obs: &Observable, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        for (coef, ops) in obs.terms() {
            let mut w = v.to_vec();
            for &op in ops.iter().rev() {
                w = self.apply(op, &w);
            }
            for (o, x) in out.iter_mut().zip(w) {
                *o += coef * x;
            }
        }
        out
    }

    /// ⟨ψ|O|ψ⟩ by matrix–vector contraction. ψ must have length `dim` and
    /// unit norm within [`NORMALIZATION_TOL`].
    pub fn expectation(&self, state: &[Complex64], obs: &Observable) -> Result<Complex64> {
        if state.len() != self.dim() {
            return Err(Error::domain(format!(
                "state has {} coefficients but the operators have dimension {}",
                state.len(),
                self.dim()
            )));
        }
        let norm: f64 = state.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Unnormalized { norm });
        }
        let w = self.apply_observable(obs, state);
        Ok(state.iter().zip(w).map(|(c, x)| c.conj() * x).sum())
    }

    /// e^{−itH}ψ using the diagonal Hamiltonian.
    pub fn evolve_diagonal(&self, state: &[Complex64], t: f64) -> Vec<Complex64> {
        state.iter().enumerate().map(|(n, c)| c * Complex64::from_polar(1.0, -t * self.hamiltonian[[n, n]])).collect()
    }
}

/// ⟨n|m⟩ = ∫₀^∞ ψₙ ψₘ dx for the half-line basis functions
/// ψₙ(x) = (−1)ⁿ √(2n!/Γ(n+λ+1/2)) x^λ e^{−x²/2} L_n^{λ−1/2}(x²),
/// by tanh-sinh on (0, X_max].
pub fn wavefunction_overlap_quadrature(params: ModelParams, n: usize, m: usize) -> Result<Quadrature> {
    const MAX_INDEX: usize = 40;
    if n > MAX_INDEX || m > MAX_INDEX {
        return Err(Error::domain(format!("overlap quadrature supports n, m <= {MAX_INDEX}")));
    }
    let lambda = params.lambda();
    let alpha = lambda - 0.5;
    let a = params.lambda_plus_half();
    let ln_norm = std::f64::consts::LN_2
        + 0.5
            * (ln_gamma(n as f64 + 1.0)? + ln_gamma(m as f64 + 1.0)?
                - ln_gamma(n as f64 + a)?
                - ln_gamma(m as f64 + a)?);
    let sign = if (n + m).is_multiple_of(2) { 1.0 } else { -1.0 };
    let top = n.max(m);
    let integrand = |x: f64| {
        let y = x * x;
        let l = laguerre_sequence(top, alpha, y);
        sign * (ln_norm + 2.0 * lambda * x.ln() - y).exp() * l[n] * l[m]
    };
    // L_n^α(−y) has only positive coefficients for α > −1 and majorizes
    // |L_n^α(y)|; walk out until the envelope is negligible.
    let envelope = |x: f64| {
        let y = x * x;
        let l = laguerre_sequence(top, alpha, -y);
        (ln_norm + 2.0 * lambda * x.ln() - y).exp() * l[n] * l[m]
    };
    let mut x_max = ((n + m) as f64 + lambda.abs() + 1.0).sqrt();
    while envelope(x_max) > 1e-18 {
        x_max += 0.25;
    }
    tanh_sinh(|node| integrand(node.from_left), 0.0, x_max, 1e-13)
}
