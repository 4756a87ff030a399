use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use su11_gcs::coherent_state::{nonlinearity_function, normalization_constant, StateRecord};
use su11_gcs::fock_oracle::build_operators;
use su11_gcs::identity_measure::{
    density_closed, required_moments_only, verify_moments, ClosedDensity, MellinBarnesDensity, MomentTable,
};
use su11_gcs::observables::{ObservableReport, AGREEMENT_ABS, AGREEMENT_REL};
use su11_gcs::verify::{self, Fault, Level};
use su11_gcs::{CoherentState, ModelParams, DEFAULT_TOL};

use crate::config::{FileConfig, Format, Range};
use crate::{CliError, Common, Scale};

/// Largest |z|² used in r = 1 sweeps (|z| = 0.95).
pub const R1_ABS_Z_SQ_MAX: f64 = 0.9025;

/// Flags merged over the config file.
#[derive(Debug, Clone)]
pub struct Settings {
    pub lambdas: Vec<f64>,
    pub rs: Vec<u32>,
    pub z: Option<Complex64>,
    pub abs_z_sq: Option<Range>,
    pub phis: Vec<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
}

impl Settings {
    pub fn merge(c: Common, abs_z_sq: Option<Range>, phis: Vec<f64>, file: &FileConfig) -> Result<Self, CliError> {
        let polar = c.polar || file.polar.unwrap_or(false);
        let z = c.z.or(file.z.map(|[a, b]| (a, b))).map(|(a, b)| {
            if polar {
                Complex64::from_polar(a, b)
            } else {
                Complex64::new(a, b)
            }
        });
        let pick = |flag: Vec<f64>, file: &Option<crate::config::OneOrMany<f64>>| {
            if flag.is_empty() {
                file.clone().map(|v| v.into_vec()).unwrap_or_default()
            } else {
                flag
            }
        };
        let rs = if c.r.is_empty() { file.r.clone().map(|v| v.into_vec()).unwrap_or_default() } else { c.r };
        let s = Settings {
            lambdas: pick(c.lambda, &file.lambda),
            rs,
            z,
            abs_z_sq: abs_z_sq.or(file.abs_z_sq),
            phis: pick(phis, &file.phi),
            tol: c.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            out: c.out.or(file.output.clone()),
            format: c.format.or(file.format).unwrap_or_default(),
            jobs: c.jobs.or(file.jobs),
        };
        if let Some(r) = &s.abs_z_sq {
            r.validate()?;
        }
        Ok(s)
    }

    /// The single (λ, r) of a point command.
    fn single_params(&self) -> Result<ModelParams, CliError> {
        match (self.lambdas.as_slice(), self.rs.as_slice()) {
            ([lambda], [r]) => Ok(ModelParams::new(*lambda, *r)?),
            ([], _) | (_, []) => Err(CliError::Usage("--lambda and --r are required".into())),
            _ => Err(CliError::Usage("this command takes a single --lambda and --r".into())),
        }
    }

    fn z_or_origin(&self) -> Complex64 {
        self.z.unwrap_or(Complex64::new(0.0, 0.0))
    }
}

/// Round-trip exact (17 significant digits).
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct StateOutput {
    state: StateRecord,
    norm_sqr: f64,
    tail_bound: f64,
    normalization: f64,
    /// f(n) for n = 0..=10.
    nonlinearity: Vec<f64>,
    eigen_residual: f64,
}

pub fn state(s: &Settings) -> Result<(), CliError> {
    let params = s.single_params()?;
    let z = s.z_or_origin();
    let st = CoherentState::new(params, z, s.tol)?;
    let out = StateOutput {
        state: st.record(),
        norm_sqr: st.norm_sqr(),
        tail_bound: st.tail_bound(),
        normalization: normalization_constant(&params, z.norm_sqr(), s.tol)?,
        nonlinearity: (0..=10).map(|n| nonlinearity_function(&params, n)).collect(),
        eigen_residual: st.annihilation_residual()?,
    };
    let text = match s.format {
        Format::Json => json(&out)?,
        Format::Csv => csv_text(
            &["n", "re_c", "im_c"],
            out.state.coeffs.iter().enumerate().map(|(n, (re, im))| vec![n.to_string(), num(*re), num(*im)]),
        )?,
    };
    emit(&s.out, &text)
}

#[derive(Debug, Clone, Serialize)]
struct ObservableRow {
    lambda: f64,
    r: u32,
    abs_z_sq: f64,
    phi: f64,
    s1: Option<f64>,
    s2: Option<f64>,
    g2: Option<f64>,
    q: Option<f64>,
    n_mean: Option<f64>,
    source: &'static str,
    flags: String,
    error: String,
}

impl ObservableRow {
    fn csv(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        vec![
            num(self.lambda),
            self.r.to_string(),
            num(self.abs_z_sq),
            num(self.phi),
            opt(self.s1),
            opt(self.s2),
            opt(self.g2),
            opt(self.q),
            opt(self.n_mean),
            self.source.to_string(),
            self.flags.clone(),
            self.error.clone(),
        ]
    }
}

const OBSERVABLE_HEADER: [&str; 12] =
    ["lambda", "r", "abs_z_sq", "phi", "s1", "s2", "g2", "q", "n_mean", "source", "flags", "error"];

#[derive(Debug, Clone, Copy)]
struct Point {
    lambda: f64,
    r: u32,
    abs_z_sq: f64,
    phi: f64,
}

fn observable_rows(p: Point, tol: f64) -> [ObservableRow; 2] {
    let blank = |source| ObservableRow {
        lambda: p.lambda,
        r: p.r,
        abs_z_sq: p.abs_z_sq,
        phi: p.phi,
        s1: None,
        s2: None,
        g2: None,
        q: None,
        n_mean: None,
        source,
        flags: String::new(),
        error: String::new(),
    };
    let z = Complex64::from_polar(p.abs_z_sq.sqrt(), p.phi);
    let params = match ModelParams::new(p.lambda, p.r) {
        Ok(v) => v,
        Err(e) => {
            let mut rows = [blank("closed_form"), blank("oracle")];
            for row in &mut rows {
                row.error = e.to_string();
            }
            return rows;
        }
    };
    let reports = [ObservableReport::closed_form(params, z, tol), ObservableReport::oracle(params, z, tol)];
    let mismatch = match &reports {
        [Ok(a), Ok(b)] => {
            a.mismatches(b, AGREEMENT_REL, AGREEMENT_ABS).into_iter().map(|m| format!("mismatch:{}", m.0)).collect()
        }
        _ => Vec::new(),
    };
    let fill = |source: &'static str, rep: &Result<ObservableReport, su11_gcs::Error>| {
        let mut row = blank(source);
        match rep {
            Ok(rep) => {
                row.s1 = Some(rep.s1);
                row.s2 = Some(rep.s2);
                row.g2 = rep.g2;
                row.q = Some(rep.mandel_q);
                row.n_mean = Some(rep.n_mean);
                let mut flags: Vec<String> =
                    rep.corrections.iter().map(|f| format!("corrected:{}", f.label())).collect();
                flags.extend(mismatch.iter().cloned());
                row.flags = flags.join(";");
            }
            Err(e) => row.error = e.to_string(),
        }
        row
    };
    [fill("closed_form", &reports[0]), fill("oracle", &reports[1])]
}

pub fn observables(s: &Settings) -> Result<(), CliError> {
    if s.lambdas.is_empty() || s.rs.is_empty() {
        return Err(CliError::Usage("--lambda and --r are required".into()));
    }
    let mut points = Vec::new();
    let mut clamped = false;
    for &lambda in &s.lambdas {
        for &r in &s.rs {
            match (&s.abs_z_sq, s.z) {
                (Some(range), _) => {
                    let phis = if s.phis.is_empty() { vec![0.0] } else { s.phis.clone() };
                    let mut range = *range;
                    if r == 1 && range.max > R1_ABS_Z_SQ_MAX {
                        clamped = true;
                        range.max = R1_ABS_Z_SQ_MAX;
                        range.min = range.min.min(R1_ABS_Z_SQ_MAX);
                    }
                    for &phi in &phis {
                        for abs_z_sq in range.points() {
                            points.push(Point { lambda, r, abs_z_sq, phi });
                        }
                    }
                }
                (None, Some(z)) => points.push(Point { lambda, r, abs_z_sq: z.norm_sqr(), phi: z.arg() }),
                (None, None) => return Err(CliError::Usage("give either --abs-z-sq MIN:MAX:STEPS or --z".into())),
            }
        }
    }
    if clamped {
        eprintln!("notice: r=1 requires |z|<1; |z|² range clamped to max {R1_ABS_Z_SQ_MAX} for r=1");
    }
    let tol = s.tol;
    let rows: Vec<ObservableRow> =
        pool(s.jobs)?.install(|| points.par_iter().flat_map_iter(|&p| observable_rows(p, tol)).collect());
    let text = match s.format {
        Format::Csv => csv_text(&OBSERVABLE_HEADER, rows.iter().map(ObservableRow::csv))?,
        Format::Json => json(&rows)?,
    };
    emit(&s.out, &text)
}

pub struct MeasureOptions {
    pub n_max: Option<usize>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_points: usize,
    pub t_scale: Option<Scale>,
    pub contour_points: usize,
}

#[derive(Serialize)]
struct DensitySample {
    t: f64,
    h: f64,
}

fn write_in(dir: &Path, name: &str, content: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn measure(s: &Settings, o: MeasureOptions) -> Result<(), CliError> {
    let params = s.single_params()?;
    let dir = s.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let r = params.r();
    let n_max = o.n_max.unwrap_or(if r >= 3 { 10 } else { 20 });
    let ext = match s.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let write_table = |table: &MomentTable| -> Result<(), CliError> {
        let text = match s.format {
            Format::Csv => table.to_csv(),
            Format::Json => json(table)?,
        };
        write_in(&dir, &format!("moments.{ext}"), &text)
    };
    if r >= 4 {
        eprintln!("notice: no density is computed for r >= 4; writing required moments only");
        return write_table(&required_moments_only(&params, n_max));
    }
    if o.t_points < 2 {
        return Err(CliError::Usage("--t-points must be at least 2".into()));
    }

    let (default_min, default_max, default_scale) =
        if r == 1 { (0.0, 0.99, Scale::Lin) } else { (1e-3, 50.0, Scale::Log) };
    let (t_min, t_max) = (o.t_min.unwrap_or(default_min), o.t_max.unwrap_or(default_max));
    let scale = o.t_scale.unwrap_or(default_scale);
    if !(t_max > t_min) || (scale == Scale::Log && t_min <= 0.0) {
        return Err(CliError::Usage(format!("invalid t grid [{t_min}, {t_max}] for {scale:?} spacing")));
    }
    let ts: Vec<f64> = (0..o.t_points)
        .map(|k| {
            let f = k as f64 / (o.t_points - 1) as f64;
            match scale {
                Scale::Lin => t_min + (t_max - t_min) * f,
                Scale::Log => t_min * (t_max / t_min).powf(f),
            }
        })
        .collect();

    let (samples, table) = if r == 3 {
        let d = MellinBarnesDensity::new(params, o.contour_points)?;
        let samples = pool(s.jobs)?.install(|| {
            ts.par_iter().map(|&t| d.eval(t).map(|h| DensitySample { t, h })).collect::<Result<Vec<_>, _>>()
        })?;
        (samples, verify_moments(&params, &d, n_max))
    } else {
        let d = ClosedDensity::new(params)?;
        let samples = ts
            .iter()
            .map(|&t| density_closed(&params, t).map(|h| DensitySample { t, h }))
            .collect::<Result<Vec<_>, _>>()?;
        (samples, verify_moments(&params, &d, n_max))
    };
    let density_text = match s.format {
        Format::Csv => csv_text(&["t", "h"], samples.iter().map(|d| vec![num(d.t), num(d.h)]))?,
        Format::Json => json(&samples)?,
    };
    write_in(&dir, &format!("density.{ext}"), &density_text)?;
    write_table(&table)?;
    if samples.iter().any(|d| d.h < 0.0) {
        eprintln!("warning: negative density samples");
    }
    eprintln!("moments n <= {n_max}: max rel_error {:.3e}", table.max_rel_error());
    Ok(())
}

pub fn wavefunction(s: &Settings, x_min: f64, x_max: f64, points: usize) -> Result<(), CliError> {
    let params = s.single_params()?;
    if !(x_min > 0.0 && x_max > x_min && points >= 2) {
        return Err(CliError::Usage("need 0 < --x-min < --x-max and --points >= 2".into()));
    }
    let st = CoherentState::new(params, s.z_or_origin(), s.tol)?;
    let xs: Vec<f64> = (0..points).map(|k| x_min + (x_max - x_min) * k as f64 / (points - 1) as f64).collect();
    let samples = st.sample_wavefunction(&xs)?;
    let text = match s.format {
        Format::Csv => csv_text(
            &["x", "re_psi", "im_psi", "abs_sq"],
            samples.iter().map(|w| vec![num(w.x), num(w.psi.re), num(w.psi.im), num(w.psi.norm_sqr())]),
        )?,
        Format::Json => json(&samples)?,
    };
    emit(&s.out, &text)
}

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    re_z: f64,
    im_z: f64,
    re_phase: f64,
    im_phase: f64,
    /// max over n of |(e^{−itH}c)ₙ − phase·cₙ(z(t))|.
    max_deviation: f64,
}

pub fn evolve(s: &Settings, times: &[f64]) -> Result<(), CliError> {
    let params = s.single_params()?;
    let st = CoherentState::new(params, s.z_or_origin(), s.tol)?;
    let ops = build_operators(params, st.n_trunc())?;
    let rows = times
        .iter()
        .map(|&t| {
            let (phase, evolved) = st.evolve(t)?;
            let direct = ops.evolve_diagonal(st.coeffs(), t);
            let max_deviation =
                direct.iter().zip(evolved.coeffs()).map(|(a, b)| (a - phase * b).norm()).fold(0.0, f64::max);
            let z = evolved.z();
            Ok(EvolveRow { t, re_z: z.re, im_z: z.im, re_phase: phase.re, im_phase: phase.im, max_deviation })
        })
        .collect::<Result<Vec<_>, su11_gcs::Error>>()?;
    let text = match s.format {
        Format::Csv => csv_text(
            &["t", "re_z", "im_z", "re_phase", "im_phase", "max_deviation"],
            rows.iter().map(|r| {
                vec![num(r.t), num(r.re_z), num(r.im_z), num(r.re_phase), num(r.im_phase), num(r.max_deviation)]
            }),
        )?,
        Format::Json => json(&rows)?,
    };
    emit(&s.out, &text)
}

pub fn verify(level: Level, fault: Option<Fault>, out: Option<PathBuf>, format: Format) -> Result<(), CliError> {
    let report = verify::run(level, fault);
    let text = match format {
        Format::Json => json(&report)?,
        Format::Csv => report.render(),
    };
    emit(&out, &text)?;
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(CliError::Assertion(format!("verification failed: {}", failed.join(", "))))
    }
}
