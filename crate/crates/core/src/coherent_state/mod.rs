//! The coherent states |z⟩ᵣ^λ in the Fock basis.
//!
//! cₙ = zⁿ · √((λ+1/2)ₙ/n!) / ∏_{k=0}^{r−2} (λ+1/2+k)ₙ / √M,
//! M = ₁F_{2r−2}(λ+1/2; λ+1/2, λ+1/2, …, λ+r−3/2, λ+r−3/2; |z|²).
//!
//! Coefficients come from the ratio recurrence cₙ/cₙ₋₁; a log-space
//! closed form is kept for cross-checks.

mod operator_identity;
mod wavefunction;

pub use operator_identity::{operator_identity_check, GenPoly, OperatorIdentityReport};
pub use wavefunction::WavefunctionSample;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock_oracle::{build_operators, FockOperators, Operator};
use crate::params::ModelParams;
use crate::special_functions::{ln_gamma, pfq, pfq_real, pochhammer};

/// Adaptive truncation target for Σ_{n>N−5} |cₙ|².
pub const TAIL_MASS: f64 = 1e-20;
/// Extra coefficients kept beyond the point where the tail bound is met.
const TAIL_PADDING: usize = 4;
const MIN_TRUNCATION: usize = 4;
/// Hard cap on the adaptive truncation.
pub const MAX_TRUNCATION: usize = 10_000;
/// Accepted |Σ|cₙ|² − 1| after construction.
const NORMALIZATION_CHECK: f64 = 1e-12;

/// {a, a+1, …, a+count−1}
pub(crate) fn shifted_list(a: f64, count: u32) -> Vec<f64> {
    (0..count).map(|k| a + k as f64).collect()
}

/// Every element of `list` twice.
pub(crate) fn doubled(list: &[f64]) -> Vec<f64> {
    list.iter().flat_map(|&v| [v, v]).collect()
}

/// Denominator parameters of the normalization series:
/// λ+1/2+k, each twice, k = 0..r−2.
pub fn normalization_denominators(params: &ModelParams) -> Vec<f64> {
    doubled(&shifted_list(params.lambda_plus_half(), params.r() - 1))
}

/// M_r^λ as a function of |z|².
pub fn normalization_constant(params: &ModelParams, abs_z_sq: f64, tol: f64) -> Result<f64> {
    params.check_abs_z_sq(abs_z_sq)?;
    pfq_real(&[params.lambda_plus_half()], &normalization_denominators(params), abs_z_sq, tol)
}

/// f(n) = Γ(n+λ+r−1/2)/Γ(n+λ+3/2), the deformation with f(N̂)J₋|z⟩ = z|z⟩.
pub fn nonlinearity_function(params: &ModelParams, n: usize) -> f64 {
    let base = n as f64 + params.lambda_plus_half();
    match params.r() {
        1 => 1.0 / base,
        r => pochhammer(base + 1.0, r - 2),
    }
}

/// ∏_{k=0}^{r−2} (λ+1/2+k+m)
fn q_factor(params: &ModelParams, m: usize) -> f64 {
    let base = params.lambda_plus_half() + m as f64;
    (0..params.r() - 1).map(|k| base + k as f64).product()
}

/// Upper bound on |c_{m+1}/c_m|² valid for every index ≥ m.
fn tail_ratio_bound(params: &ModelParams, abs_z_sq: f64, m: usize) -> f64 {
    let q = q_factor(params, m);
    let rho = abs_z_sq * (params.lambda_plus_half() + m as f64) / ((m as f64 + 1.0) * q * q);
    if params.r() == 1 {
        // ρ_m is monotone in m and tends to |z|²
        rho.max(abs_z_sq)
    } else {
        rho
    }
}

/// Maps an angle to (−π, π].
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentState {
    params: ModelParams,
    modulus: f64,
    phase: f64,
    n_trunc: usize,
    coeffs: Vec<Complex64>,
    norm_constant: f64,
    tail_bound: f64,
    tol: f64,
}

/// Serialized form of a state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateRecord {
    pub lambda: f64,
    pub r: u32,
    pub re_z: f64,
    pub im_z: f64,
    pub n_trunc: usize,
    pub coeffs: Vec<(f64, f64)>,
}

impl CoherentState {
    /// The state for coherence parameter `z`, truncated adaptively.
    pub fn new(params: ModelParams, z: Complex64, tol: f64) -> Result<Self> {
        params.check_z(z)?;
        let modulus = z.norm();
        let phase = if modulus == 0.0 { 0.0 } else { z.arg() };
        Self::build(params, modulus, phase, tol, None)
    }

    /// Same, with z given as modulus and phase. Coefficient moduli then
    /// depend on `modulus` alone, bit for bit.
    pub fn from_polar(params: ModelParams, modulus: f64, phase: f64, tol: f64) -> Result<Self> {
        if !(modulus.is_finite() && modulus >= 0.0 && phase.is_finite()) {
            return Err(Error::domain("|z| must be finite and non-negative, φ finite"));
        }
        params.check_abs_z_sq(modulus * modulus)?;
        let phase = if modulus == 0.0 { 0.0 } else { wrap_phase(phase) };
        Self::build(params, modulus, phase, tol, None)
    }

    /// A state with a fixed truncation N (coefficients c₀..c_N).
    pub fn with_truncation(params: ModelParams, z: Complex64, n_trunc: usize, tol: f64) -> Result<Self> {
        params.check_z(z)?;
        let modulus = z.norm();
        let phase = if modulus == 0.0 { 0.0 } else { z.arg() };
        Self::build(params, modulus, phase, tol, Some(n_trunc))
    }

    fn build(params: ModelParams, modulus: f64, phase: f64, tol: f64, fixed: Option<usize>) -> Result<Self> {
        let x = modulus * modulus;
        params.check_abs_z_sq(x)?;
        let norm_constant = normalization_constant(&params, x, tol)?;
        let a = params.lambda_plus_half();

        let mut mags = vec![1.0 / norm_constant.sqrt()];
        let mut target = fixed;
        let mut tail_bound = f64::NAN;
        let mut n = 0usize;
        loop {
            if target.is_none() {
                let q = tail_ratio_bound(&params, x, n);
                let w = mags[n] * mags[n];
                if q < 1.0 && w / (1.0 - q) < TAIL_MASS {
                    tail_bound = w / (1.0 - q);
                    target = Some((n + TAIL_PADDING).max(MIN_TRUNCATION));
                }
            }
            if let Some(t) = target {
                if n >= t {
                    break;
                }
            }
            if n >= MAX_TRUNCATION {
                return Err(Error::non_convergence("adaptive truncation of the coefficient series", mags[n]));
            }
            n += 1;
            let ratio = modulus * ((a + n as f64 - 1.0) / n as f64).sqrt() / q_factor(&params, n - 1);
            mags.push(mags[n - 1] * ratio);
        }
        let n_trunc = target.unwrap_or(n);
        mags.truncate(n_trunc + 1);
        if fixed.is_some() {
            tail_bound = 1.0 - mags.iter().map(|m| m * m).sum::<f64>();
        } else {
            let total: f64 = mags.iter().map(|m| m * m).sum();
            if (total - 1.0).abs() > NORMALIZATION_CHECK {
                return Err(Error::Consistency {
                    what: "Σ|cₙ|² against the normalization series".into(),
                    residue: total - 1.0,
                });
            }
        }
        let coeffs = mags.iter().enumerate().map(|(n, &m)| Complex64::from_polar(m, n as f64 * phase)).collect();
        Ok(CoherentState { params, modulus, phase, n_trunc, coeffs, norm_constant, tail_bound, tol })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.modulus, self.phase)
    }

    pub fn modulus(&self) -> f64 {
        self.modulus
    }

    /// arg z in (−π, π]; 0 at the origin.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn n_trunc(&self) -> usize {
        self.n_trunc
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// M_r^λ(|z|).
    pub fn norm_constant(&self) -> f64 {
        self.norm_constant
    }

    /// Bound on the discarded mass beyond n = N − 4 (adaptive truncation),
    /// or 1 − Σ|cₙ|² for a fixed truncation.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn record(&self) -> StateRecord {
        let z = self.z();
        StateRecord {
            lambda: self.params.lambda(),
            r: self.params.r(),
            re_z: z.re,
            im_z: z.im,
            n_trunc: self.n_trunc,
            coeffs: self.coeffs.iter().map(|c| (c.re, c.im)).collect(),
        }
    }

    /// ⟨self|other⟩ from the hypergeometric closed form
    /// ₁F_{r₁+r₂−2}(λ+1/2; {λ+1/2+k}_{k<r₁−1} ∪ {λ+1/2+k}_{k<r₂−1}; z̄₁z₂)/√(M₁M₂).
    pub fn overlap(&self, other: &CoherentState) -> Result<Complex64> {
        self.check_same_lambda(other)?;
        let a = self.params.lambda_plus_half();
        let mut den = shifted_list(a, self.params.r() - 1);
        den.extend(shifted_list(a, other.params.r() - 1));
        let w = Complex64::from_polar(self.modulus * other.modulus, other.phase - self.phase);
        let series = pfq(&[a], &den, w, self.tol.min(other.tol))?.into_value("overlap series")?;
        Ok(series / (self.norm_constant * other.norm_constant).sqrt())
    }

    /// ⟨self|other⟩ = Σ conj(cₙ) c′ₙ over the common truncation.
    pub fn overlap_direct(&self, other: &CoherentState) -> Result<Complex64> {
        self.check_same_lambda(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_same_lambda(&self, other: &CoherentState) -> Result<()> {
        if self.params.lambda() != other.params.lambda() {
            return Err(Error::Unsupported(format!(
                "overlap of states with different λ ({} vs {})",
                self.params.lambda(),
                other.params.lambda()
            )));
        }
        Ok(())
    }

    /// ‖f(N̂)J₋ψ − zψ‖₂ on the oracle matrices.
    pub fn annihilation_residual(&self) -> Result<f64> {
        self.annihilation_residual_with(&build_operators(self.params, self.n_trunc.max(2))?)
    }

    pub fn annihilation_residual_with(&self, ops: &FockOperators) -> Result<f64> {
        if ops.dim() != self.coeffs.len() || ops.params().lambda() != self.params.lambda() {
            return Err(Error::domain("operators and state differ in dimension or λ"));
        }
        let lowered = ops.apply(Operator::JMinus, &self.coeffs);
        let z = self.z();
        let sq: f64 = lowered
            .iter()
            .zip(&self.coeffs)
            .enumerate()
            .map(|(n, (l, c))| (nonlinearity_function(&self.params, n) * l - z * c).norm_sqr())
            .sum();
        Ok(sq.sqrt())
    }

    /// e^{−itH}|z⟩ = e^{−it(λ+1/2)} |z e^{−2it}⟩. Returns the global phase and
    /// the state at z′, with the same truncation.
    pub fn evolve(&self, t: f64) -> Result<(Complex64, CoherentState)> {
        if !t.is_finite() {
            return Err(Error::domain("evolution time must be finite"));
        }
        let global = Complex64::from_polar(1.0, -t * self.params.lambda_plus_half());
        let phase = if self.modulus == 0.0 { 0.0 } else { wrap_phase(self.phase - 2.0 * t) };
        let evolved = Self::build(self.params, self.modulus, phase, self.tol, Some(self.n_trunc))?;
        let evolved = CoherentState { tail_bound: self.tail_bound, ..evolved };
        Ok((global, evolved))
    }
}

/// cₙ from Γ functions in log space, independently of the recurrence.
pub fn coefficient_closed_form(params: &ModelParams, z: Complex64, n: usize, tol: f64) -> Result<Complex64> {
    params.check_z(z)?;
    let modulus = z.norm();
    if modulus == 0.0 {
        return Ok(Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0));
    }
    let a = params.lambda_plus_half();
    let nf = n as f64;
    let m = normalization_constant(params, modulus * modulus, tol)?;
    let mut ln_mag = nf * modulus.ln() + 0.5 * (ln_gamma(nf + a)? - ln_gamma(a)? - ln_gamma(nf + 1.0)?) - 0.5 * m.ln();
    for k in 1..params.r() {
        let b = a + k as f64 - 1.0;
        ln_mag -= ln_gamma(nf + b)? - ln_gamma(b)?;
    }
    Ok(Complex64::from_polar(ln_mag.exp(), nf * z.arg()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(lambda: f64, r: u32) -> ModelParams {
        ModelParams::new(lambda, r).unwrap()
    }

    #[test]
    fn vacuum_state() {
        for r in 1..=4 {
            let s = CoherentState::new(params(0.3, r), Complex64::new(0.0, 0.0), 1e-14).unwrap();
            assert_eq!(s.coeffs()[0], Complex64::new(1.0, 0.0));
            assert!(s.coeffs()[1..].iter().all(|c| *c == Complex64::new(0.0, 0.0)));
            assert_eq!(s.norm_constant(), 1.0);
            assert_eq!(s.phase(), 0.0);
        }
    }

    #[test]
    fn r1_normalization_is_binomial() {
        let m = normalization_constant(&params(1.5, 1), 0.25, 1e-14).unwrap();
        assert!((m - 0.75f64.powi(-2)).abs() < 1e-13);
        // partial sums of the coefficient weights
        let mut brute = 0.0;
        let mut w = 1.0;
        for n in 0..200 {
            brute += w;
            w *= 0.25 * (2.0 + n as f64) / (n as f64 + 1.0);
        }
        assert!((m - brute).abs() < 1e-13);
    }

    #[test]
    fn r2_coefficients_match_gamma_form() {
        let (lambda, z) = (0.75, Complex64::new(0.8, -0.6));
        let s = CoherentState::new(params(lambda, 2), z, 1e-14).unwrap();
        let a = lambda + 0.5;
        for n in 0..s.n_trunc() {
            let nf = n as f64;
            let mag = (0.5 * (ln_gamma(a).unwrap() - ln_gamma(nf + 1.0).unwrap() - ln_gamma(nf + a).unwrap())).exp()
                / s.norm_constant().sqrt();
            let expect = Complex64::from_polar(mag, 0.0) * z.powu(n as u32);
            assert!((s.coeffs()[n] - expect).norm() < 1e-14 * (1.0 + expect.norm()), "n={n}");
        }
    }

    #[test]
    fn recurrence_matches_log_space_closed_form() {
        for &(lambda, r, z) in &[
            (1.5, 3, Complex64::new(1.0, 0.5)),
            (-0.25, 5, Complex64::new(-2.0, 1.0)),
            (0.75, 1, Complex64::new(0.3, 0.6)),
        ] {
            let p = params(lambda, r);
            let s = CoherentState::new(p, z, 1e-14).unwrap();
            for n in 0..=s.n_trunc() {
                let c = coefficient_closed_form(&p, z, n, 1e-14).unwrap();
                let scale = s.coeffs()[n].norm().max(1e-300);
                assert!((c - s.coeffs()[n]).norm() <= 1e-11 * scale, "λ={lambda} r={r} n={n}");
            }
        }
    }

    #[test]
    fn adaptive_truncation_meets_tail_rule() {
        for &(lambda, r, z) in &[(1.5, 1, 0.95), (-0.25, 2, 3.0), (1.0, 5, 4.0), (0.0, 1, 0.05)] {
            let s = CoherentState::new(params(lambda, r), Complex64::new(z, 0.0), 1e-14).unwrap();
            assert!(s.tail_bound() < TAIL_MASS);
            assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            // brute-force tail from a much longer expansion
            let long =
                CoherentState::with_truncation(params(lambda, r), Complex64::new(z, 0.0), 3 * s.n_trunc() + 50, 1e-14)
                    .unwrap();
            let tail: f64 = long.coeffs()[s.n_trunc() - 4..].iter().map(|c| c.norm_sqr()).sum();
            assert!(tail < TAIL_MASS, "λ={lambda} r={r}: {tail:e}");
        }
    }

    #[test]
    fn r1_domain_rule() {
        let e = CoherentState::new(params(1.5, 1), Complex64::new(1.2, 0.0), 1e-14).unwrap_err();
        assert!(e.to_string().contains("r=1 requires |z|<1"), "{e}");
    }

    #[test]
    fn klauder_perelomov_reduction() {
        let lambda = 0.75;
        let a = lambda + 0.5;
        for &(s, phi) in &[(0.3, 0.4), (1.2, -2.0), (2.0, 3.0)] {
            let w = Complex64::from_polar(f64::tanh(s), phi);
            let st = CoherentState::new(params(lambda, 1), w, 1e-15).unwrap();
            let pref = (1.0 - w.norm_sqr()).powf(0.5 * a);
            let mut expect = Complex64::new(pref, 0.0);
            for n in 0..=st.n_trunc() {
                if n > 0 {
                    expect *= w * ((a + n as f64 - 1.0) / n as f64).sqrt();
                }
                assert!((st.coeffs()[n] - expect).norm() < 1e-12, "s={s} n={n}");
            }
        }
    }

    #[test]
    fn overlaps() {
        let p = params(1.5, 2);
        let s = CoherentState::new(p, Complex64::new(0.7, 0.2), 1e-14).unwrap();
        assert!((s.overlap(&s).unwrap() - 1.0).norm() < 1e-13);
        let t = CoherentState::new(p, Complex64::new(-0.4, 1.1), 1e-14).unwrap();
        assert!((s.overlap(&t).unwrap() - s.overlap_direct(&t).unwrap()).norm() < 1e-10);
        let u = CoherentState::new(params(1.5, 3), Complex64::new(1.0, 0.0), 1e-14).unwrap();
        let v = CoherentState::new(p, Complex64::new(1.0, 0.0), 1e-14).unwrap();
        assert!((v.overlap(&u).unwrap() - v.overlap_direct(&u).unwrap()).norm() < 1e-10);
        let other = CoherentState::new(params(1.0, 2), Complex64::new(1.0, 0.0), 1e-14).unwrap();
        assert!(matches!(v.overlap(&other), Err(Error::Unsupported(_))));
    }

    #[test]
    fn nonlinearity_values() {
        assert_eq!(nonlinearity_function(&params(0.3, 2), 7), 1.0);
        assert!((nonlinearity_function(&params(0.5, 3), 0) - 2.0).abs() < 1e-15);
        assert!((nonlinearity_function(&params(1.5, 1), 0) - 0.5).abs() < 1e-15);
        // against the Γ ratio
        for r in 1..=6 {
            let p = params(0.3, r);
            for n in [0usize, 3, 40] {
                let a = n as f64 + 0.8;
                let g = (ln_gamma(a + r as f64 - 1.0).unwrap() - ln_gamma(a + 1.0).unwrap()).exp();
                assert!((nonlinearity_function(&p, n) - g).abs() < 1e-12 * g);
            }
        }
    }

    #[test]
    fn annihilation_identity() {
        let z0 = CoherentState::new(params(0.5, 3), Complex64::new(0.0, 0.0), 1e-14).unwrap();
        assert_eq!(z0.annihilation_residual().unwrap(), 0.0);
        let s = CoherentState::new(params(1.5, 2), Complex64::new(1.5, 0.0), 1e-14).unwrap();
        assert!(s.annihilation_residual().unwrap() < 1e-10);
        let s = CoherentState::new(params(-0.25, 4), Complex64::new(2.0, 1.0), 1e-14).unwrap();
        assert!(s.annihilation_residual().unwrap() < 1e-10);
    }

    #[test]
    fn evolution_examples() {
        let s = CoherentState::new(params(0.75, 3), Complex64::new(1.0, 0.0), 1e-14).unwrap();
        let (g, e) = s.evolve(0.0).unwrap();
        assert_eq!(g, Complex64::new(1.0, 0.0));
        assert_eq!(e.coeffs(), s.coeffs());
        let (g, e) = s.evolve(PI).unwrap();
        assert!((g - Complex64::from_polar(1.0, -PI * 1.25)).norm() < 1e-15);
        assert!((e.z() - s.z()).norm() < 1e-14);
        let (_, e) = s.evolve(PI / 4.0).unwrap();
        assert!((e.z() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn evolution_matches_oracle() {
        for &(lambda, r, z) in &[
            (1.5, 2, Complex64::new(1.0, 1.0)),
            (-0.25, 4, Complex64::new(2.0, -0.5)),
            (0.75, 1, Complex64::new(0.5, 0.3)),
        ] {
            let s = CoherentState::new(params(lambda, r), z, 1e-14).unwrap();
            let ops = build_operators(s.params(), s.n_trunc()).unwrap();
            for t in [0.3, PI / 4.0, 2.0] {
                let oracle = ops.evolve_diagonal(s.coeffs(), t);
                let (g, e) = s.evolve(t).unwrap();
                let dev = oracle.iter().zip(e.coeffs()).map(|(o, c)| (o - g * c).norm()).fold(0.0, f64::max);
                assert!(dev < 1e-12, "dev {dev:e}");
            }
        }
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-PI) - PI).abs() < 1e-15);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-16);
    }

    #[test]
    fn record_round_trip_fields() {
        let s = CoherentState::new(params(1.5, 3), Complex64::new(1.0, 0.5), 1e-14).unwrap();
        let rec = s.record();
        assert_eq!(rec.n_trunc + 1, rec.coeffs.len());
        assert!((rec.re_z - 1.0).abs() < 1e-15 && (rec.im_z - 0.5).abs() < 1e-15);
        let total: f64 = rec.coeffs.iter().map(|(a, b)| a * a + b * b).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn phase_covariance(lambda in -0.45f64..3.0, r in 2u32..6, modulus in 0.01f64..3.0, phi in -3.0f64..3.0, theta in -3.0f64..3.0) {
            let p = params(lambda, r);
            let s = CoherentState::from_polar(p, modulus, phi, 1e-14).unwrap();
            let t = CoherentState::from_polar(p, modulus, phi + theta, 1e-14).unwrap();
            prop_assert_eq!(s.n_trunc(), t.n_trunc());
            for (n, (a, b)) in s.coeffs().iter().zip(t.coeffs()).enumerate() {
                // same stored modulus; from_polar/norm round-trips within a few ulps
                prop_assert!((a.norm() - b.norm()).abs() <= 4.0 * f64::EPSILON * a.norm());
                let rotated = a * Complex64::from_polar(1.0, n as f64 * theta);
                prop_assert!((rotated - b).norm() <= 1e-13 * (1.0 + n as f64) * a.norm());
            }
        }

        #[test]
        fn normalized_and_tail_converged(lambda in -0.45f64..3.0, r in 1u32..6, modulus in 0.0f64..0.98, scale in 1.0f64..3.0) {
            let m = if r == 1 { modulus } else { modulus * scale };
            let s = CoherentState::from_polar(params(lambda, r), m, 0.7, 1e-14).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!(s.tail_bound() < TAIL_MASS);
        }
    }
}
