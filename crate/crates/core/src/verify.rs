//! The self-check suite behind `su11-gcs verify`.
//!
//! Each check compares a closed form or a claimed property with the Fock
//! oracle (or an independent quadrature) on a fixed grid and reports the
//! worst deviation against its threshold.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::coherent_state::CoherentState;
use crate::error::Result;
use crate::fock_oracle::{build_operators, wavefunction_overlap_quadrature};
use crate::identity_measure::{verify_moments, ClosedDensity, MellinBarnesDensity, DEFAULT_CONTOUR_POINTS};
use crate::observables::{
    audit_formulas, comparison_grid, FormulaAudit, ObservableReport, AGREEMENT_ABS, AGREEMENT_REL,
};
use crate::params::ModelParams;
use crate::DEFAULT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Reduced grids: N ≤ 64, 20 points per sweep.
    Fast,
    /// The complete acceptance grids.
    Full,
}

/// Deliberate faults for mutation testing of the suite itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Rescale one J₊/J₋ matrix element by 1 + 1e−9 before the algebra check.
    CorruptLadder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub level: Level,
    pub fault: Option<Fault>,
    pub checks: Vec<Check>,
    pub ledger: Vec<FormulaAudit>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<28} worst {:.3e} (threshold {:.1e}) {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.worst,
                c.threshold,
                c.detail
            );
        }
        let _ = writeln!(out, "\nclosed-form ledger ({} grid points):", self.ledger.first().map_or(0, |a| a.points));
        for a in &self.ledger {
            let verdict = match (a.printed_confirmed, a.adopted) {
                (true, _) => "confirmed as printed".to_string(),
                (false, crate::observables::Variant::Corrected) => format!("CORRECTED: {}", a.note),
                (false, _) => "FAILED, no correction adopted".to_string(),
            };
            let _ = writeln!(
                out,
                "  {:<7} printed err {:.2e}  corrected err {:.2e}  {}",
                a.formula.label(),
                a.printed_max_error,
                a.corrected_max_error,
                verdict
            );
        }
        let _ = writeln!(
            out,
            "\n{} checks, {} failed, {:.1} s",
            self.checks.len(),
            self.checks.iter().filter(|c| !c.passed).count(),
            self.seconds
        );
        out
    }
}

struct Sizes {
    trunc: &'static [usize],
    points: usize,
    moment_n: usize,
    fock_n: usize,
}

impl Level {
    fn sizes(self) -> Sizes {
        match self {
            Level::Fast => Sizes { trunc: &[16, 64], points: 20, moment_n: 10, fock_n: 6 },
            Level::Full => Sizes { trunc: &[16, 64, 128], points: 40, moment_n: 20, fock_n: 10 },
        }
    }
}

fn p(lambda: f64, r: u32) -> Result<ModelParams> {
    ModelParams::new(lambda, r)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

type Outcome = Result<(f64, String)>;

fn algebra(s: &Sizes, fault: Option<Fault>) -> Outcome {
    let mut worst = 0.0f64;
    for &lambda in &[-0.25, 0.75, 1.5] {
        for &n in s.trunc {
            let mut ops = build_operators(p(lambda, 2)?, n)?;
            if fault == Some(Fault::CorruptLadder) {
                ops.perturb_ladder(n / 2, 1e-9)?;
            }
            worst = worst.max(ops.commutator_residuals()?.max());
        }
    }
    Ok((worst, format!("λ ∈ {{−1/4, 3/4, 3/2}}, N ∈ {:?}", s.trunc)))
}

fn eigenstate() -> Outcome {
    let mut worst = 0.0f64;
    let zs = [Complex64::new(0.5, 0.0), Complex64::new(1.5, 0.0), Complex64::new(1.0, 1.0)];
    for &lambda in &[0.0, 1.5] {
        for r in 1..=5 {
            for &z in &zs {
                if r == 1 && z.norm() != 0.5 {
                    continue;
                }
                worst = worst.max(CoherentState::new(p(lambda, r)?, z, DEFAULT_TOL)?.annihilation_residual()?);
            }
        }
    }
    Ok((worst, "‖f(N)J₋|z⟩ − z|z⟩‖, r = 1..5".into()))
}

fn r1_bunching(s: &Sizes) -> Outcome {
    let mut worst = 0.0f64;
    for &lambda in &[0.25, 0.75, 1.5] {
        let expect = 1.0 + 1.0 / (lambda + 0.5);
        for m in linspace(0.05, 0.95, s.points) {
            let g2 = ObservableReport::closed_form(p(lambda, 1)?, Complex64::new(m, 0.0), DEFAULT_TOL)?
                .g2
                .unwrap_or(f64::NAN);
            worst = worst.max((g2 - expect).abs());
        }
    }
    Ok((worst, "|g² − (1 + 1/(λ+1/2))| over |z| ∈ [0.05, 0.95]".into()))
}

/// g² < 1 at every point, and the two routes agree on it.
fn antibunching(s: &Sizes) -> Result<(bool, f64, String)> {
    let mut max_g2 = 0.0f64;
    let mut max_mismatch = 0.0f64;
    for r in 2..=5 {
        for x in linspace(0.25, 10.0, s.points) {
            let z = Complex64::new(x.sqrt(), 0.0);
            let cf = ObservableReport::closed_form(p(0.0, r)?, z, DEFAULT_TOL)?;
            let or = ObservableReport::oracle(p(0.0, r)?, z, DEFAULT_TOL)?;
            let (a, b) = (cf.g2.unwrap_or(f64::NAN), or.g2.unwrap_or(f64::NAN));
            max_g2 = max_g2.max(a);
            max_mismatch = max_mismatch.max((a - b).abs() / b.abs());
        }
    }
    let ok = max_g2 < 1.0 && max_mismatch < 1e-8;
    Ok((ok, max_g2, format!("λ=0, r=2..5; max g² = {max_g2:.6}, closed/oracle rel diff {max_mismatch:.1e}")))
}

fn squeezing_r345(s: &Sizes) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for r in 3..=5 {
        for &lambda in &[-0.25, 0.25, 1.0] {
            for x in linspace(10.0 / s.points as f64, 10.0, s.points) {
                let rep = ObservableReport::closed_form(p(lambda, r)?, Complex64::new(x.sqrt(), 0.0), DEFAULT_TOL)?;
                worst = worst.max(rep.s1);
            }
        }
    }
    Ok((worst, "max S₁ at φ=0, r ∈ {3,4,5}; must be < 0".into()))
}

fn no_squeezing_r2(s: &Sizes) -> Outcome {
    let mut worst = f64::INFINITY;
    for &lambda in &[-0.25, 0.25, 1.0] {
        for &phi in &[0.0, PI / 4.0, PI / 2.0] {
            for x in linspace(10.0 / s.points as f64, 10.0, s.points) {
                let rep =
                    ObservableReport::closed_form(p(lambda, 2)?, Complex64::from_polar(x.sqrt(), phi), DEFAULT_TOL)?;
                worst = worst.min(rep.s1.min(rep.s2));
            }
        }
    }
    Ok((worst, "min(S₁, S₂) for r=2; must be ≥ −1e−10".into()))
}

fn phase_dependence(s: &Sizes) -> Outcome {
    // S₁ < 0 for φ ∈ {0, π/6}, S₂ < 0 for φ ∈ {π/3, π/2}
    let mut worst = f64::NEG_INFINITY;
    for &(phi, first) in &[(0.0, true), (PI / 6.0, true), (PI / 3.0, false), (PI / 2.0, false)] {
        for x in linspace(1.0, 9.0, s.points) {
            let rep = ObservableReport::closed_form(p(1.0, 4)?, Complex64::from_polar(x.sqrt(), phi), DEFAULT_TOL)?;
            worst = worst.max(if first { rep.s1 } else { rep.s2 });
        }
    }
    Ok((worst, "r=4, λ=1, |z|² ∈ [1, 9]: max of the factor that must be negative".into()))
}

fn temporal_stability() -> Outcome {
    let mut worst = 0.0f64;
    for &lambda in &[-0.25, 0.75, 1.5] {
        for r in 1..=4 {
            let z = if r == 1 { Complex64::new(0.4, 0.5) } else { Complex64::new(1.2, -0.7) };
            let state = CoherentState::new(p(lambda, r)?, z, DEFAULT_TOL)?;
            let ops = build_operators(state.params(), state.n_trunc())?;
            for &t in &[0.3, PI / 4.0, 2.0] {
                let direct = ops.evolve_diagonal(state.coeffs(), t);
                let (global, evolved) = state.evolve(t)?;
                let dev = direct.iter().zip(evolved.coeffs()).map(|(a, b)| (a - global * b).norm()).fold(0.0, f64::max);
                worst = worst.max(dev);
            }
        }
    }
    Ok((worst, "max |e^{−itH}cₙ − e^{−it(λ+1/2)}cₙ(z e^{−2it})|".into()))
}

fn moments(s: &Sizes) -> Result<Vec<(&'static str, f64, f64, String)>> {
    let mut out = Vec::new();
    for &(r, tol) in &[(1u32, 1e-8), (2, 1e-6)] {
        let mut worst = 0.0f64;
        let mut negative = false;
        for &lambda in &[0.75, 1.5] {
            let params = p(lambda, r)?;
            let d = ClosedDensity::new(params)?;
            worst = worst.max(verify_moments(&params, &d, s.moment_n).max_rel_error());
            let ts = if r == 1 { linspace(0.0, 0.99, 100) } else { linspace(0.01, 30.0, 100) };
            negative |=
                ts.iter().any(|&t| crate::identity_measure::density_closed(&params, t).map_or(true, |h| h < 0.0));
        }
        let name = if r == 1 { "moments r=1" } else { "moments r=2" };
        out.push((
            name,
            if negative { f64::INFINITY } else { worst },
            tol,
            format!("n ≤ {}, λ ∈ {{3/4, 3/2}}", s.moment_n),
        ));
    }
    let params = p(1.5, 3)?;
    let d = MellinBarnesDensity::new(params, DEFAULT_CONTOUR_POINTS)?;
    let mut worst = verify_moments(&params, &d, 10).max_rel_error();
    let negative = (0..=40).any(|k| d.eval(1e-3 * 50_000f64.powf(k as f64 / 40.0)).map_or(true, |h| h < 0.0));
    if negative {
        worst = f64::INFINITY;
    }
    out.push(("moments r=3", worst, 1e-4, "n ≤ 10, λ = 3/2, inverse Mellin".into()));
    Ok(out)
}

fn wavefunctions() -> Result<Vec<(&'static str, f64, f64, String)>> {
    let mut worst = 0.0f64;
    let zs = [
        Complex64::new(0.8, 0.0),
        Complex64::new(-1.0, 0.5),
        Complex64::new(0.3, -2.0),
        Complex64::new(1.5, 1.5),
        Complex64::new(-0.6, -0.4),
    ];
    let xs = [0.4, 1.1, 1.9, 2.6];
    for &lambda in &[0.75, 1.5] {
        for &z in &zs {
            let st = CoherentState::new(p(lambda, 2)?, z, DEFAULT_TOL)?;
            for &x in &xs {
                let (a, b) = (st.wavefunction(x)?, st.wavefunction_bessel(x)?);
                worst = worst.max((a - b).norm() / b.norm());
            }
        }
    }
    let mut norm_err = 0.0f64;
    for &(lambda, r, z) in &[
        (0.75, 2, Complex64::new(1.0, 0.5)),
        (1.5, 2, Complex64::new(-2.0, 1.0)),
        (0.75, 3, Complex64::new(1.5, 0.0)),
        (1.5, 3, Complex64::new(0.5, -2.5)),
    ] {
        let q = CoherentState::new(p(lambda, r)?, z, DEFAULT_TOL)?.wavefunction_norm()?;
        norm_err = norm_err.max((q.value - 1.0).abs());
    }
    Ok(vec![
        ("wavefunction bessel/series", worst, 1e-8, "r=2, λ ∈ {3/4, 3/2}, 20 (x, z) points per λ".into()),
        ("wavefunction norm", norm_err, 1e-8, "∫|ψ|² for r ∈ {2, 3}".into()),
    ])
}

fn fock_orthogonality(s: &Sizes) -> Outcome {
    let mut worst = 0.0f64;
    for &lambda in &[-0.25, 0.75, 1.5] {
        let params = p(lambda, 1)?;
        for n in 0..=s.fock_n {
            for m in n..=s.fock_n {
                let q = wavefunction_overlap_quadrature(params, n, m)?;
                let delta = if n == m { 1.0 } else { 0.0 };
                worst = worst.max((q.value - delta).abs());
            }
        }
    }
    Ok((worst, format!("|⟨n|m⟩ − δ| for n, m ≤ {}", s.fock_n)))
}

fn route_agreement(grid: &[(ModelParams, Complex64)]) -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = 0usize;
    for (params, z) in grid {
        let cf = ObservableReport::closed_form(*params, *z, DEFAULT_TOL)?;
        let or = ObservableReport::oracle(*params, *z, DEFAULT_TOL)?;
        let mism = cf.mismatches(&or, AGREEMENT_REL, AGREEMENT_ABS);
        bad += usize::from(!mism.is_empty());
        for ((_, a), (_, b)) in cf.fields().into_iter().zip(or.fields()) {
            if a.is_finite() && b.is_finite() {
                worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(AGREEMENT_ABS / AGREEMENT_REL));
            }
        }
    }
    if bad > 0 {
        worst = f64::INFINITY;
    }
    Ok((worst, format!("{} grid points, {bad} with mismatching fields", grid.len())))
}

fn record(checks: &mut Vec<Check>, name: &'static str, threshold: f64, outcome: Outcome, passes: impl Fn(f64) -> bool) {
    checks.push(match outcome {
        Ok((worst, detail)) => Check { name, passed: passes(worst), worst, threshold, detail },
        Err(e) => Check { name, passed: false, worst: f64::NAN, threshold, detail: format!("error: {e}") },
    });
}

/// Runs every check at the given level.
pub fn run(level: Level, fault: Option<Fault>) -> VerifyReport {
    let start = Instant::now();
    let s = level.sizes();
    let mut checks = Vec::new();
    record(&mut checks, "commutators", 1e-12, algebra(&s, fault), |w| w < 1e-12);
    record(&mut checks, "eigenstate residual", 1e-10, eigenstate(), |w| w < 1e-10);
    record(&mut checks, "r=1 g² constant", 1e-8, r1_bunching(&s), |w| w < 1e-8);
    match antibunching(&s) {
        Ok((ok, worst, detail)) => {
            checks.push(Check { name: "antibunching λ=0", passed: ok, worst, threshold: 1.0, detail })
        }
        Err(e) => record(&mut checks, "antibunching λ=0", 1.0, Err(e), |_| false),
    }
    record(&mut checks, "squeezing r=3..5", 0.0, squeezing_r345(&s), |w| w < 0.0);
    record(&mut checks, "no squeezing r=2", -1e-10, no_squeezing_r2(&s), |w| w >= -1e-10);
    record(&mut checks, "phase dependence r=4", 0.0, phase_dependence(&s), |w| w < 0.0);
    record(&mut checks, "temporal stability", 1e-12, temporal_stability(), |w| w < 1e-12);
    match moments(&s) {
        Ok(rows) => {
            for (name, worst, tol, detail) in rows {
                checks.push(Check { name, passed: worst < tol, worst, threshold: tol, detail });
            }
        }
        Err(e) => record(&mut checks, "moments", 0.0, Err(e), |_| false),
    }
    match wavefunctions() {
        Ok(rows) => {
            for (name, worst, tol, detail) in rows {
                checks.push(Check { name, passed: worst < tol, worst, threshold: tol, detail });
            }
        }
        Err(e) => record(&mut checks, "wavefunctions", 0.0, Err(e), |_| false),
    }
    record(&mut checks, "fock orthogonality", 1e-8, fock_orthogonality(&s), |w| w < 1e-8);

    let full_grid = comparison_grid();
    let grid: Vec<_> = match level {
        Level::Full => full_grid,
        Level::Fast => {
            let stride = full_grid.len() / s.points;
            full_grid.into_iter().step_by(stride).take(s.points).collect()
        }
    };
    record(&mut checks, "closed form vs oracle", AGREEMENT_REL, route_agreement(&grid), |w| w <= AGREEMENT_REL);
    let ledger = match audit_formulas(&grid, DEFAULT_TOL) {
        Ok(ledger) => {
            let consistent = ledger.iter().all(|a| a.consistent());
            checks.push(Check {
                name: "formula ledger",
                passed: consistent,
                worst: ledger.iter().map(|a| if a.consistent() { 0.0 } else { 1.0 }).sum(),
                threshold: 0.0,
                detail: "every formula confirmed or carrying an adopted correction".into(),
            });
            ledger
        }
        Err(e) => {
            record(&mut checks, "formula ledger", 0.0, Err(e), |_| false);
            Vec::new()
        }
    };
    VerifyReport { level, fault, checks, ledger, seconds: start.elapsed().as_secs_f64() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes() {
        let rep = run(Level::Fast, None);
        assert!(rep.passed(), "{}", rep.render());
        assert_eq!(rep.ledger.iter().filter(|a| !a.printed_confirmed).count(), 2);
        assert!(rep.render().contains("CORRECTED"));
    }

    #[test]
    fn corrupted_ladder_fails_the_algebra_check() {
        let rep = run(Level::Fast, Some(Fault::CorruptLadder));
        let failed: Vec<_> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        assert_eq!(failed, vec!["commutators"]);
    }
}
