//! JSON config files and the small value grammars used by the flags.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Range {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.steps < 2 || self.min < 0.0 || !(self.max >= self.min) {
            return Err(CliError::Usage(format!(
                "abs_z_sq range needs steps >= 2 and 0 <= min <= max (got {}:{}:{})",
                self.min, self.max, self.steps
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.min + (self.max - self.min) * k as f64 / (self.steps - 1) as f64).collect()
    }
}

/// Anything a config file may set. Flags override every field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<OneOrMany<f64>>,
    pub r: Option<OneOrMany<u32>>,
    pub abs_z_sq: Option<Range>,
    pub phi: Option<OneOrMany<f64>>,
    pub z: Option<[f64; 2]>,
    pub polar: Option<bool>,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

/// `RE,IM` (or `MOD,PHASE` when polar) → (a, b).
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got '{s}'"));
    }
    Ok((parse_angle(parts[0])?, parse_angle(parts[1])?))
}

/// `MIN:MAX:STEPS`
pub fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected MIN:MAX:STEPS, got '{s}'"));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}"));
    let steps = parts[2].trim().parse::<usize>().map_err(|e| format!("'{}': {e}", parts[2]))?;
    Ok(Range { min: num(parts[0])?, max: num(parts[1])?, steps })
}

/// A number, or a multiple of π written `pi`, `pi/6`, `2pi/3`, `-pi/4`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || format!("'{s}' is neither a number nor of the form [k]pi[/m]");
    let (head, den) = match t.split_once('/') {
        Some((h, d)) => (h, d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t, 1.0),
    };
    let coef = head.trim().strip_suffix("pi").ok_or_else(bad)?.trim_end_matches('*');
    let k = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(k * PI / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("0.5").unwrap(), 0.5);
        assert_eq!(parse_angle("pi/6").unwrap(), PI / 6.0);
        assert_eq!(parse_angle("-pi").unwrap(), -PI);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert!(parse_angle("tau").is_err());
    }

    #[test]
    fn pairs_and_ranges() {
        assert_eq!(parse_pair("1,-0.5").unwrap(), (1.0, -0.5));
        assert!(parse_pair("1").is_err());
        let r = parse_range("0:10:6").unwrap();
        assert_eq!(r.points(), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert!(Range { min: 0.0, max: 1.0, steps: 1 }.validate().is_err());
    }

    #[test]
    fn config_accepts_scalars_and_lists() {
        let c: FileConfig = serde_json::from_str(
            r#"{"lambda": [-0.25, 1], "r": 4, "abs_z_sq": {"min": 0.1, "max": 9, "steps": 5}, "format": "json"}"#,
        )
        .unwrap();
        assert_eq!(c.lambda.unwrap().into_vec(), vec![-0.25, 1.0]);
        assert_eq!(c.r.unwrap().into_vec(), vec![4]);
        assert_eq!(c.format, Some(Format::Json));
        assert!(serde_json::from_str::<FileConfig>(r#"{"lamda": 1}"#).is_err());
    }
}
