//! Resolution of the identity through its moment conditions.
//!
//! With t = |z|², the radial measure h(t) (π absorbed) must satisfy
//! ∫₀^∞ tⁿ h(t) dt = ρ(n) for every n, where
//! ρ(n) = [∏_{k=0}^{r−2} (a+k)ₙ]² · n!/(a)ₙ, a = λ+1/2,
//! i.e. the reciprocal of |cₙ √M / zⁿ|². Its Mellin transform is
//! h̃(s) = [∏_{k=1}^{r−1} Γ(s+a+k−2)/Γ(a+k−1)]² Γ(a)Γ(s)/Γ(s+a−1).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::{half_line_log_trapezoid, tanh_sinh};
use crate::special_functions::{bessel_k, ln_gamma, ln_gamma_complex, ln_pochhammer};

/// ln ρ(n).
pub fn ln_required_moment(params: &ModelParams, n: usize) -> f64 {
    let a = params.lambda_plus_half();
    let n32 = n as u32;
    let denominators: f64 = (0..params.r() - 1).map(|k| ln_pochhammer(a + k as f64, n32)).sum();
    2.0 * denominators + ln_pochhammer(1.0, n32) - ln_pochhammer(a, n32)
}

/// ρ(n), the n-th moment any identity-resolving measure must have.
pub fn required_moment(params: &ModelParams, n: usize) -> f64 {
    ln_required_moment(params, n).exp()
}

/// h̃(s) in log form; `s` must lie right of every pole.
pub fn ln_mellin_kernel(params: &ModelParams, s: Complex64) -> Complex64 {
    let a = params.lambda_plus_half();
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 1..params.r() {
        let shift = a + k as f64 - 2.0;
        acc += 2.0 * (ln_gamma_complex(s + shift) - ln_gamma(shift + 1.0).unwrap_or(f64::NAN));
    }
    acc + ln_gamma(a).unwrap_or(f64::NAN) + ln_gamma_complex(s) - ln_gamma_complex(s + (a - 1.0))
}

/// Rightmost pole of h̃.
fn rightmost_pole(params: &ModelParams) -> f64 {
    let a = params.lambda_plus_half();
    if params.r() >= 2 {
        (1.0 - a).max(0.0)
    } else {
        0.0
    }
}

/// Closed-form h(t) for r = 1 and r = 2:
/// r = 1: (a−1)(1−t)^{a−2} on (0, 1), needs λ > 1/2;
/// r = 2: (2/Γ(a)) t^{(a−1)/2} K_{a−1}(2√t).
pub fn density_closed(params: &ModelParams, t: f64) -> Result<f64> {
    let a = params.lambda_plus_half();
    match params.r() {
        1 => {
            if a <= 1.0 {
                return Err(Error::domain(format!(
                    "the r=1 measure is not integrable for λ <= 1/2 (got λ = {})",
                    params.lambda()
                )));
            }
            if !(0.0..1.0).contains(&t) {
                return Err(Error::domain(format!("r=1 measure is supported on 0 <= t < 1 (got t = {t})")));
            }
            Ok(density_r1_complement(a, 1.0 - t))
        }
        2 => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::domain(format!("density needs t > 0 (got {t})")));
            }
            let nu = a - 1.0;
            let ln_pref = std::f64::consts::LN_2 - ln_gamma(a)? + 0.5 * nu * t.ln();
            Ok(ln_pref.exp() * bessel_k(nu, 2.0 * t.sqrt())?)
        }
        r => Err(Error::Unsupported(format!("closed-form density exists for r = 1, 2 only (got r = {r})"))),
    }
}

/// r = 1 density written in terms of 1 − t, for use near the singular end.
fn density_r1_complement(a: f64, one_minus_t: f64) -> f64 {
    (a - 1.0) * one_minus_t.powf(a - 2.0)
}

/// Nodes of the vertical contour s = c + iy, y ∈ [0, y_max], stored as
/// ln h̃ minus its value at y = 0.
struct KernelGrid {
    c: f64,
    step: f64,
    ln_peak: f64,
    /// exp(ln h̃(c+iy_j) − ln_peak), trapezoid weight folded in.
    weights: Vec<Complex64>,
}

impl KernelGrid {
    fn build(params: &ModelParams, c: f64, contour_points: usize) -> Result<Self> {
        const CUTOFF: f64 = 1e-16;
        const SCAN: f64 = 0.25;
        let ln_peak = ln_mellin_kernel(params, Complex64::new(c, 0.0)).re;
        let mut y_max = 0.0;
        let mut quiet = 0;
        while quiet < 4 {
            y_max += SCAN;
            if y_max > 1e4 {
                return Err(Error::non_convergence("Mellin kernel decay along the contour", y_max));
            }
            let m = (ln_mellin_kernel(params, Complex64::new(c, y_max)).re - ln_peak).exp();
            quiet = if m < CUTOFF { quiet + 1 } else { 0 };
        }
        let step = y_max / contour_points as f64;
        let weights = (0..=contour_points)
            .map(|j| {
                let y = j as f64 * step;
                let w = if j == 0 || j == contour_points { 0.5 } else { 1.0 };
                w * (ln_mellin_kernel(params, Complex64::new(c, y)) - ln_peak).exp()
            })
            .collect();
        Ok(KernelGrid { c, step, ln_peak, weights })
    }

    /// (1/π)∫₀^∞ Re[t^{−c−iy} h̃(c+iy)] dy with the full grid and with
    /// every other node.
    fn integrate(&self, ln_t: f64) -> (f64, f64, f64) {
        let mut full = 0.0;
        let mut half = 0.0;
        let mut abs = 0.0;
        let rot = Complex64::from_polar(1.0, -self.step * ln_t);
        let mut phase = Complex64::new(1.0, 0.0);
        for (j, w) in self.weights.iter().enumerate() {
            if j % 64 == 0 {
                phase = Complex64::from_polar(1.0, -(j as f64) * self.step * ln_t);
            }
            let v = (w * phase).re;
            full += v;
            abs += v.abs();
            if j % 2 == 0 {
                // double step; end weights already carry their 1/2
                half += 2.0 * v;
            }
            phase *= rot;
        }
        let scale = (self.ln_peak - self.c * ln_t).exp() * self.step / std::f64::consts::PI;
        (full * scale, half * scale, abs * scale)
    }
}

/// Numeric r = 3 density by inverse Mellin transform along a vertical
/// contour. Kernel grids are cached per abscissa bucket, so one instance
/// should be reused across many t.
pub struct MellinBarnesDensity {
    params: ModelParams,
    contour_points: usize,
    cache: Mutex<HashMap<i64, Arc<KernelGrid>>>,
}

/// Abscissae are rounded up to a multiple of this.
const C_BUCKET: f64 = 0.125;
/// Accepted |full − half| relative to ∫|integrand|.
const CONTOUR_TOL: f64 = 1e-10;

impl MellinBarnesDensity {
    pub fn new(params: ModelParams, contour_points: usize) -> Result<Self> {
        if params.r() != 3 {
            return Err(Error::Unsupported(format!(
                "numeric inverse-Mellin density is provided for r = 3 (got r = {})",
                params.r()
            )));
        }
        if contour_points < 64 || !contour_points.is_multiple_of(2) {
            return Err(Error::domain(format!("contour_points must be even and >= 64 (got {contour_points})")));
        }
        Ok(MellinBarnesDensity { params, contour_points, cache: Mutex::new(HashMap::new()) })
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    /// Lowest admissible abscissa: one bucket right of the rightmost pole.
    pub fn min_abscissa(&self) -> f64 {
        C_BUCKET + rightmost_pole(&self.params)
    }

    /// Abscissa minimizing t^{−c} h̃(c) on the real axis (the saddle of
    /// the contour integrand), clamped to [`Self::min_abscissa`]. Moving
    /// the contour there keeps the oscillatory integral free of
    /// cancellation: towards the pole for small t, far right for large t.
    pub fn abscissa(&self, t: f64) -> f64 {
        let lo = self.min_abscissa();
        let ln_t = t.ln();
        let phi = |c: f64| ln_mellin_kernel(&self.params, Complex64::new(c, 0.0)).re - c * ln_t;
        let mut hi = lo + 0.5;
        while phi(hi) < phi(hi - 0.5) && hi < lo + 400.0 {
            hi += 0.5;
        }
        let (mut a, mut b) = (lo, hi);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
        let (mut f1, mut f2) = (phi(x1), phi(x2));
        while b - a > 1e-3 {
            if f1 < f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = phi(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = phi(x2);
            }
        }
        0.5 * (a + b)
    }

    fn grid(&self, c: f64) -> Result<Arc<KernelGrid>> {
        let key = (c / C_BUCKET).ceil() as i64;
        if let Some(g) = self.cache.lock().expect("kernel cache poisoned").get(&key) {
            return Ok(g.clone());
        }
        let grid = Arc::new(KernelGrid::build(&self.params, key as f64 * C_BUCKET, self.contour_points)?);
        self.cache.lock().expect("kernel cache poisoned").insert(key, grid.clone());
        Ok(grid)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("density needs t > 0 (got {t})")));
        }
        let grid = self.grid(self.abscissa(t))?;
        let (full, half, abs) = grid.integrate(t.ln());
        let diff = (full - half).abs();
        if diff > CONTOUR_TOL * abs {
            return Err(Error::non_convergence(format!("inverse Mellin contour at t = {t:e}"), diff));
        }
        Ok(full)
    }
}

/// One-off evaluation of the r = 3 density. Prefer [`MellinBarnesDensity`]
/// when sampling many points.
pub fn density_mellin_barnes(params: &ModelParams, t: f64, contour_points: usize) -> Result<f64> {
    MellinBarnesDensity::new(*params, contour_points)?.eval(t)
}

pub const DEFAULT_CONTOUR_POINTS: usize = 4096;

/// A measure density on t = |z|².
pub trait Density {
    fn eval(&self, t: f64) -> Result<f64>;

    /// h at t = 1 − s; densities singular at t = 1 override this to stay
    /// accurate as s → 0.
    fn eval_complement(&self, s: f64) -> Result<f64> {
        self.eval(1.0 - s)
    }
}

impl<F: Fn(f64) -> f64> Density for F {
    fn eval(&self, t: f64) -> Result<f64> {
        Ok(self(t))
    }
}

impl Density for MellinBarnesDensity {
    fn eval(&self, t: f64) -> Result<f64> {
        MellinBarnesDensity::eval(self, t)
    }
}

/// Closed-form density for r ∈ {1, 2}.
#[derive(Debug, Clone, Copy)]
pub struct ClosedDensity {
    params: ModelParams,
}

impl ClosedDensity {
    pub fn new(params: ModelParams) -> Result<Self> {
        // validates (λ, r) once
        let probe = if params.r() == 1 { 0.5 } else { 1.0 };
        density_closed(&params, probe)?;
        Ok(ClosedDensity { params })
    }
}

impl Density for ClosedDensity {
    fn eval(&self, t: f64) -> Result<f64> {
        density_closed(&self.params, t)
    }

    fn eval_complement(&self, s: f64) -> Result<f64> {
        if self.params.r() == 1 {
            Ok(density_r1_complement(self.params.lambda_plus_half(), s))
        } else {
            self.eval(1.0 - s)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentRow {
    pub n: usize,
    pub required: f64,
    pub integrated: f64,
    pub rel_error: f64,
    /// Set when the integral could not be computed; numbers are NaN then.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTable {
    pub params: ModelParams,
    pub entries: Vec<MomentRow>,
}

impl MomentTable {
    /// Largest rel_error; NaN rows count as infinite.
    pub fn max_rel_error(&self) -> f64 {
        self.entries.iter().map(|e| if e.rel_error.is_nan() { f64::INFINITY } else { e.rel_error }).fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error() < tol
    }

    /// `n,required,integrated,rel_error` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,required,integrated,rel_error\n");
        for e in &self.entries {
            out.push_str(&format!("{},{:.16e},{:.16e},{:.16e}\n", e.n, e.required, e.integrated, e.rel_error));
        }
        out
    }
}

/// Quadrature tolerance for moment integrals.
const MOMENT_TOL: f64 = 1e-12;

/// tⁿ h without overflowing where h has already underflowed.
fn moment_integrand(t: f64, n: usize, h: f64) -> f64 {
    if h == 0.0 {
        0.0
    } else {
        h.signum() * (n as f64 * t.ln() + h.abs().ln()).exp()
    }
}

/// Integrates ∫ tⁿ h(t) dt for n = 0..=n_max over the support (0, 1) for
/// r = 1 and (0, ∞) otherwise, and tabulates against ρ(n). Failures are
/// recorded per row.
pub fn verify_moments<D: Density + ?Sized>(params: &ModelParams, density: &D, n_max: usize) -> MomentTable {
    let entries = (0..=n_max)
        .map(|n| {
            let required = required_moment(params, n);
            let integrated = if params.r() == 1 {
                tanh_sinh(
                    |node| {
                        let w =
                            if node.x < 0.5 { density.eval(node.x) } else { density.eval_complement(node.from_right) };
                        w.map(|h| moment_integrand(node.x, n, h)).unwrap_or(f64::NAN)
                    },
                    0.0,
                    1.0,
                    MOMENT_TOL,
                )
            } else {
                half_line_log_trapezoid(
                    |t| density.eval(t).map(|h| moment_integrand(t, n, h)).unwrap_or(f64::NAN),
                    MOMENT_TOL,
                )
            };
            match integrated {
                Ok(q) => MomentRow {
                    n,
                    required,
                    integrated: q.value,
                    rel_error: (q.value - required).abs() / required,
                    error: None,
                },
                Err(e) => {
                    MomentRow { n, required, integrated: f64::NAN, rel_error: f64::NAN, error: Some(e.to_string()) }
                }
            }
        })
        .collect();
    MomentTable { params: *params, entries }
}

/// Required moments alone (used for r ≥ 4, where no density is computed).
pub fn required_moments_only(params: &ModelParams, n_max: usize) -> MomentTable {
    let entries = (0..=n_max)
        .map(|n| MomentRow {
            n,
            required: required_moment(params, n),
            integrated: f64::NAN,
            rel_error: f64::NAN,
            error: Some("no density available for r >= 4; moments only".into()),
        })
        .collect();
    MomentTable { params: *params, entries }
}
