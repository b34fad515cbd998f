//! JSON run configuration.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "potential": {"kind": "dense", "coefficients": [[{"sin": [[1, 1]]}, {"poly": [0, 0.3183]}],
//!                                                   [{"poly": [0, 0.3183]}, {"poly": [1]}]]},
//!   "h_left": [[0, 0], [0, 0]],
//!   "h_right": [[1, 0], [0, 1]],
//!   "command": "verify",
//!   "n_range": [10, 40]
//! }
//! ```

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use vsl_core::expr::TrigPoly;
use vsl_core::problem::SYMMETRY_TOL;
use vsl_core::{PotentialSpec, Problem, RealMatrix, SymMatrix};

pub const MAX_DIMENSION: usize = 16;

#[derive(Debug, Error, PartialEq)]
#[error("config error at `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Predict,
    Verify,
    Contour,
    Transroot,
    Identities,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
}

fn default_rank_tol() -> f64 {
    1e-6
}

fn default_newton_tol() -> f64 {
    vsl_core::asymptotics::TRANSROOT_TOL
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: default_rank_tol(),
            newton_tol: default_newton_tol(),
        }
    }
}

/// One matrix entry `sum c_k x^k + sum c cos(k x) + sum c sin(k x)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEntry {
    #[serde(default)]
    pub poly: Vec<f64>,
    #[serde(default)]
    pub cos: Vec<(f64, f64)>,
    #[serde(default)]
    pub sin: Vec<(f64, f64)>,
}

impl RawEntry {
    fn to_trig(&self) -> TrigPoly {
        TrigPoly::from_parts(&self.poly, &self.cos, &self.sin)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialKindName {
    Zero,
    Constant,
    Diagonal,
    Dense,
    Piecewise,
}

/// `coefficients` is a number matrix for `constant`, a list of entries for
/// `diagonal` and a matrix of entries for `dense`. It is kept as raw JSON until
/// the kind is known so that errors inside it still report their full path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPotential {
    pub kind: PotentialKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<RawPotential>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub dimension: usize,
    pub potential: RawPotential,
    pub h_left: Vec<Vec<f64>>,
    pub h_right: Vec<Vec<f64>>,
    pub command: Command,
    #[serde(default)]
    pub n_range: Option<(u32, u32)>,
    #[serde(default)]
    pub lambda_max: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub order: Option<u8>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
    /// Characteristic value for `transroot`; defaults to the model's values.
    #[serde(default)]
    pub alpha: Option<f64>,
}

/// A validated configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: Problem,
    pub command: Command,
    pub n_range: Option<(u32, u32)>,
    pub lambda_max: Option<f64>,
    pub delta: f64,
    pub order: u8,
    pub tolerances: Tolerances,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub alpha: Option<f64>,
    /// The parsed configuration as given, echoed into reports.
    pub raw: RawConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub delta: Option<f64>,
    pub order: Option<u8>,
    pub n_range: Option<(u32, u32)>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &Overrides::default())
}

pub fn parse_config_with(text: &str, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mut raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    if overrides.out.is_some() {
        raw.output_path.clone_from(&overrides.out);
    }
    if overrides.format.is_some() {
        raw.format = overrides.format;
    }
    if overrides.delta.is_some() {
        raw.delta = overrides.delta;
    }
    if overrides.order.is_some() {
        raw.order = overrides.order;
    }
    if overrides.n_range.is_some() {
        raw.n_range = overrides.n_range;
    }
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let n = raw.dimension;
    if n == 0 || n > MAX_DIMENSION {
        return Err(ConfigError::new("dimension", format!("must be between 1 and {MAX_DIMENSION}, got {n}")));
    }
    let h_left = sym_matrix(&raw.h_left, n, "h_left")?;
    let h_right = sym_matrix(&raw.h_right, n, "h_right")?;
    let potential = potential(&raw.potential, n, "potential")?;
    let problem = Problem::new(potential, h_left, h_right).map_err(|e| ConfigError::new("potential", e.to_string()))?;

    let delta = raw.delta.unwrap_or(1.0);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ConfigError::new("delta", format!("must be positive, got {delta}")));
    }
    let order = raw.order.unwrap_or(1);
    if !(1..=3).contains(&order) {
        return Err(ConfigError::new("order", format!("must be 1, 2 or 3, got {order}")));
    }
    let tolerances = raw.tolerances.unwrap_or_default();
    if !(tolerances.rank_tol > 0.0 && tolerances.rank_tol < 1.0) {
        return Err(ConfigError::new("tolerances.rank_tol", "must lie in (0, 1)"));
    }
    if !(tolerances.newton_tol > 0.0 && tolerances.newton_tol < 1.0) {
        return Err(ConfigError::new("tolerances.newton_tol", "must lie in (0, 1)"));
    }
    let needs_range = matches!(
        raw.command,
        Command::Predict | Command::Verify | Command::Contour | Command::Transroot
    );
    match raw.n_range {
        Some((a, b)) if a < 1 || b < a || b > 200 => {
            return Err(ConfigError::new("n_range", format!("must satisfy 1 <= a <= b <= 200, got [{a}, {b}]")));
        }
        None if needs_range => {
            return Err(ConfigError::new("n_range", format!("required by command {:?}", raw.command)));
        }
        _ => {}
    }
    if let Some(l) = raw.lambda_max {
        if !(l >= 1.0 && l.is_finite()) {
            return Err(ConfigError::new("lambda_max", format!("must be a finite number >= 1, got {l}")));
        }
    } else if raw.command == Command::Spectrum {
        return Err(ConfigError::new("lambda_max", "required by command spectrum"));
    }
    if let Some(a) = raw.alpha {
        if !a.is_finite() {
            return Err(ConfigError::new("alpha", "must be finite"));
        }
    }
    Ok(RunConfig {
        problem,
        command: raw.command,
        n_range: raw.n_range,
        lambda_max: raw.lambda_max,
        delta,
        order,
        tolerances,
        output_path: raw.output_path.clone(),
        format: raw.format.unwrap_or_default(),
        alpha: raw.alpha,
        raw,
    })
}

fn real_matrix(rows: &[Vec<f64>], n: usize, path: &str) -> Result<RealMatrix, ConfigError> {
    if rows.len() != n {
        return Err(ConfigError::new(path, format!("expected {n} rows, got {}", rows.len())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(ConfigError::new(format!("{path}[{i}]"), format!("expected {n} entries, got {}", r.len())));
        }
    }
    RealMatrix::from_row_major(n, rows.concat()).map_err(|e| ConfigError::new(path, e.to_string()))
}

fn sym_matrix(rows: &[Vec<f64>], n: usize, path: &str) -> Result<SymMatrix, ConfigError> {
    let m = real_matrix(rows, n, path)?;
    for i in 0..n {
        for j in 0..n {
            let v = m.get(i, j);
            if !v.is_finite() {
                return Err(ConfigError::new(format!("{path}[{i}][{j}]"), "must be finite"));
            }
            if (v - m.get(j, i)).abs() > SYMMETRY_TOL {
                return Err(ConfigError::new(
                    format!("{path}[{i}][{j}]"),
                    format!("matrix is not symmetric: {v} vs {} at [{j}][{i}]", m.get(j, i)),
                ));
            }
        }
    }
    SymMatrix::new(m).map_err(|e| ConfigError::new(path, e.to_string()))
}

fn wrap(path: &str) -> impl Fn(vsl_core::Error) -> ConfigError + '_ {
    move |e| ConfigError::new(path, e.to_string())
}

fn typed<T: serde::de::DeserializeOwned>(value: &serde_json::Value, path: &str) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." { path.to_string() } else { format!("{path}{}", with_dot(&inner)) };
        ConfigError::new(full, e.into_inner().to_string())
    })
}

fn with_dot(inner: &str) -> String {
    if inner.starts_with('[') {
        inner.to_string()
    } else {
        format!(".{inner}")
    }
}

fn potential(raw: &RawPotential, n: usize, path: &str) -> Result<PotentialSpec, ConfigError> {
    let coeffs = format!("{path}.coefficients");
    let coefficients = || raw.coefficients.as_ref().ok_or_else(|| ConfigError::new(&coeffs, "required for this kind"));
    let kind = raw.kind;
    let unexpected = |field: &str| ConfigError::new(format!("{path}.{field}"), format!("not allowed for kind {kind:?}"));
    if kind != PotentialKindName::Piecewise {
        if raw.breakpoints.is_some() {
            return Err(unexpected("breakpoints"));
        }
        if raw.pieces.is_some() {
            return Err(unexpected("pieces"));
        }
    }
    match kind {
        PotentialKindName::Zero => {
            if raw.coefficients.is_some() {
                return Err(unexpected("coefficients"));
            }
            PotentialSpec::zero(n).map_err(wrap(path))
        }
        PotentialKindName::Constant => {
            let rows: Vec<Vec<f64>> = typed(coefficients()?, &coeffs)?;
            Ok(PotentialSpec::constant(sym_matrix(&rows, n, &coeffs)?))
        }
        PotentialKindName::Diagonal => {
            let entries: Vec<RawEntry> = typed(coefficients()?, &coeffs)?;
            if entries.len() != n {
                return Err(ConfigError::new(coeffs, format!("expected {n} diagonal entries, got {}", entries.len())));
            }
            PotentialSpec::diagonal(entries.iter().map(RawEntry::to_trig).collect()).map_err(wrap(&coeffs))
        }
        PotentialKindName::Dense => {
            let entries: Vec<Vec<RawEntry>> = typed(coefficients()?, &coeffs)?;
            if entries.len() != n {
                return Err(ConfigError::new(coeffs, format!("expected {n} rows, got {}", entries.len())));
            }
            let mut rows = Vec::with_capacity(n);
            for (i, r) in entries.iter().enumerate() {
                if r.len() != n {
                    return Err(ConfigError::new(format!("{coeffs}[{i}]"), format!("expected {n} entries, got {}", r.len())));
                }
                rows.push(r.iter().map(RawEntry::to_trig).collect());
            }
            PotentialSpec::dense(rows).map_err(wrap(&coeffs))
        }
        PotentialKindName::Piecewise => {
            if raw.coefficients.is_some() {
                return Err(unexpected("coefficients"));
            }
            let breakpoints = raw
                .breakpoints
                .clone()
                .ok_or_else(|| ConfigError::new(format!("{path}.breakpoints"), "required for kind Piecewise"))?;
            let pieces = raw
                .pieces
                .as_ref()
                .ok_or_else(|| ConfigError::new(format!("{path}.pieces"), "required for kind Piecewise"))?
                .iter()
                .enumerate()
                .map(|(i, p)| potential(p, n, &format!("{path}.pieces[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            PotentialSpec::piecewise(breakpoints, pieces).map_err(wrap(path))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"dimension":1, "potential":{"kind":"zero"}, "h_left":[[0]], "h_right":[[0]],
        "command":"spectrum", "lambda_max":5}"#;

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.problem.dimension(), 1);
        assert_eq!(c.lambda_max, Some(5.0));
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.delta, 1.0);
        assert_eq!(c.order, 1);
    }

    #[test]
    fn asymmetric_boundary_matrix() {
        let text = r#"{"dimension":2, "potential":{"kind":"zero"}, "h_left":[[0,1],[0,0]],
            "h_right":[[0,0],[0,0]], "command":"spectrum", "lambda_max":5}"#;
        let e = parse_config(text).unwrap_err();
        assert!(e.path.starts_with("h_left"), "{e}");
        assert!(e.message.contains("symmetric"), "{e}");
    }

    #[test]
    fn tiny_asymmetry_is_symmetrized() {
        let text = r#"{"dimension":2, "potential":{"kind":"zero"}, "h_left":[[0,1],[1.0000000000001,0]],
            "h_right":[[0,0],[0,0]], "command":"spectrum", "lambda_max":5}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.problem.h_left().get(0, 1), c.problem.h_left().get(1, 0));
    }

    #[test]
    fn unknown_key_is_named() {
        let text = r#"{"dimension":1, "potential":{"kind":"zero"}, "hL":[[0]], "h_left":[[0]], "h_right":[[0]],
            "command":"spectrum", "lambda_max":5}"#;
        let e = parse_config(text).unwrap_err();
        assert!(e.to_string().contains("hL"), "{e}");
    }

    #[test]
    fn nested_errors_carry_paths() {
        let text = r#"{"dimension":2, "potential":{"kind":"dense", "coefficients":[[{"poly":[1]},{"poly":[0]}],
            [{"poly":[0]},{"cos":[[1,"x"]]}]]}, "h_left":[[0,0],[0,0]], "h_right":[[0,0],[0,0]],
            "command":"spectrum", "lambda_max":5}"#;
        let e = parse_config(text).unwrap_err();
        assert!(e.path.starts_with("potential.coefficients[1][1].cos"), "{e}");

        let text = r#"{"dimension":2, "potential":{"kind":"diagonal", "coefficients":[{"poly":[1]}]},
            "h_left":[[0,0],[0,0]], "h_right":[[0,0],[0,0]], "command":"spectrum", "lambda_max":5}"#;
        assert_eq!(parse_config(text).unwrap_err().path, "potential.coefficients");

        let text = r#"{"dimension":1, "potential":{"kind":"zero", "extra":1}, "h_left":[[0]], "h_right":[[0]],
            "command":"spectrum", "lambda_max":5}"#;
        assert!(parse_config(text).unwrap_err().to_string().contains("extra"));
    }

    #[test]
    fn command_requirements() {
        let text = r#"{"dimension":1, "potential":{"kind":"zero"}, "h_left":[[0]], "h_right":[[0]], "command":"verify"}"#;
        assert_eq!(parse_config(text).unwrap_err().path, "n_range");
        let text = r#"{"dimension":1, "potential":{"kind":"zero"}, "h_left":[[0]], "h_right":[[0]], "command":"spectrum"}"#;
        assert_eq!(parse_config(text).unwrap_err().path, "lambda_max");
        let text = r#"{"dimension":1, "potential":{"kind":"zero"}, "h_left":[[0]], "h_right":[[0]],
            "command":"contour", "n_range":[6,30], "delta":-1}"#;
        assert_eq!(parse_config(text).unwrap_err().path, "delta");
    }

    #[test]
    fn overrides_take_precedence() {
        let o = Overrides {
            format: Some(Format::Csv),
            n_range: Some((3, 4)),
            order: Some(2),
            ..Overrides::default()
        };
        let c = parse_config_with(MINIMAL, &o).unwrap();
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.n_range, Some((3, 4)));
        assert_eq!(c.order, 2);
    }

    #[test]
    fn piecewise_and_constant_potentials() {
        let text = r#"{"dimension":2, "potential":{"kind":"piecewise", "breakpoints":[1.5],
            "pieces":[{"kind":"constant","coefficients":[[1,0],[0,2]]},{"kind":"zero"}]},
            "h_left":[[0,0],[0,0]], "h_right":[[0,0],[0,0]], "command":"spectrum", "lambda_max":5}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.problem.potential().eval(1.0).unwrap().get(1, 1), 2.0);
        assert_eq!(c.problem.potential().eval(2.0).unwrap().get(1, 1), 0.0);
    }
}
