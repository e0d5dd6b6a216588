//! Problem files and their validated form.
//!
//! A problem is the equation
//!
//! ```text
//! D_t^m u - sum_{j<m} A_(m-j)(t, D_x) D_t^j u - sum_{k,beta} a_{k,beta}(t,x) D_x^beta D_t^k u = f
//! ```
//!
//! with the principal part given through its roots `lambda_i(t,xi) = sum_j c_ij(t) xi_j`, and
//! Cauchy data `D_t^{k-1} u(0) = g_k`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, Expr, ParseError};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at `{location}`: {message}")]
    Schema { location: String, message: String },
    #[error("expression at `{location}` (`{source_text}`): {error}")]
    Expression {
        location: String,
        source_text: String,
        error: ParseError,
    },
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> ProblemError {
    ProblemError::Schema {
        location: location.into(),
        message: message.into(),
    }
}

/// One `a_{k,beta} D_x^beta D_t^k` entry of a problem file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerOrderEntry {
    pub dt: usize,
    pub dx: Vec<u32>,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Modes per axis; a power of two.
    #[serde(default = "SolverConfig::default_modes")]
    pub modes: usize,
    #[serde(default = "SolverConfig::default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub sobolev_s: f64,
    /// Steps between recorded norms.
    #[serde(default = "SolverConfig::default_cadence")]
    pub cadence: usize,
    /// 2/3-rule dealiasing of products with x-dependent coefficients.
    #[serde(default)]
    pub dealias: bool,
}

impl SolverConfig {
    fn default_modes() -> usize {
        64
    }
    fn default_cfl() -> f64 {
        0.5
    }
    fn default_cadence() -> usize {
        1
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            modes: Self::default_modes(),
            cfl: Self::default_cfl(),
            sobolev_s: 0.0,
            cadence: Self::default_cadence(),
            dealias: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "SweepConfig::default_n_list")]
    pub n_list: Vec<usize>,
    #[serde(default = "SweepConfig::default_mode_fraction")]
    pub mode_fraction: f64,
}

impl SweepConfig {
    fn default_n_list() -> Vec<usize> {
        vec![16, 32, 64, 128, 256]
    }
    fn default_mode_fraction() -> f64 {
        0.25
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_list: Self::default_n_list(),
            mode_fraction: Self::default_mode_fraction(),
        }
    }
}

/// On-disk JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub order: usize,
    pub dim: usize,
    pub horizon: f64,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
    pub roots: Vec<Vec<String>>,
    #[serde(default)]
    pub lower_order: Vec<LowerOrderEntry>,
    #[serde(default = "zero_text")]
    pub forcing: String,
    pub data: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn zero_text() -> String {
    "0".into()
}

/// Key `(k, beta)` of a lower-order term `a_{k,beta} D_x^beta D_t^k`.
pub type LowerKey = (usize, Vec<u32>);

/// Validated problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub order: usize,
    pub dim: usize,
    pub horizon: f64,
    pub params: Arc<BTreeMap<String, f64>>,
    /// `roots[i][j] = c_ij(t)`.
    pub roots: Vec<Vec<Expr>>,
    pub lower_order: BTreeMap<LowerKey, Expr>,
    pub forcing: Expr,
    /// `g_1..g_m`.
    pub data: Vec<Expr>,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
}

fn parse_at(location: String, text: &str) -> Result<Expr, ProblemError> {
    parse(text).map_err(|error| ProblemError::Expression {
        location,
        source_text: text.to_string(),
        error,
    })
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files serialize")
    }

    pub fn into_spec(self) -> Result<ProblemSpec, ProblemError> {
        let roots = self
            .roots
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| parse_at(format!("roots[{i}][{j}]"), s))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut lower_order = BTreeMap::new();
        for (n, entry) in self.lower_order.iter().enumerate() {
            if entry.dx.len() != self.dim {
                return Err(schema(
                    format!("lower_order[{n}].dx"),
                    format!("length {} but dim is {}", entry.dx.len(), self.dim),
                ));
            }
            let coeff = parse_at(format!("lower_order[{n}].coeff"), &entry.coeff)?;
            let key = (entry.dt, entry.dx.clone());
            if lower_order.insert(key, coeff).is_some() {
                return Err(schema(
                    format!("lower_order[{n}]"),
                    format!("duplicate entry for dt={}, dx={:?}", entry.dt, entry.dx),
                ));
            }
        }
        let forcing = parse_at("forcing".into(), &self.forcing)?;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(k, s)| parse_at(format!("data[{k}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = ProblemSpec {
            order: self.order,
            dim: self.dim,
            horizon: self.horizon,
            params: Arc::new(self.parameters),
            roots,
            lower_order,
            forcing,
            data,
            solver: self.solver.unwrap_or_default(),
            sweep: self.sweep.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl ProblemSpec {
    /// Check every structural invariant; called by [`ProblemFile::into_spec`].
    pub fn validate(&self) -> Result<(), ProblemError> {
        let (m, n) = (self.order, self.dim);
        if m < 2 {
            return Err(schema("order", format!("must be at least 2, got {m}")));
        }
        if n < 1 {
            return Err(schema("dim", "must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(schema("horizon", format!("must be positive and finite, got {}", self.horizon)));
        }
        for (name, v) in self.params.iter() {
            let valid_ident = name
                .chars()
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid_ident || matches!(parse(name), Ok(e) if !matches!(e, Expr::Param(_))) {
                return Err(schema(format!("parameters.{name}"), "not a free parameter name"));
            }
            if !v.is_finite() {
                return Err(schema(format!("parameters.{name}"), "must be finite"));
            }
        }
        if self.roots.len() != m {
            return Err(schema("roots", format!("expected {m} roots, got {}", self.roots.len())));
        }
        for (i, row) in self.roots.iter().enumerate() {
            if row.len() != n {
                return Err(schema(
                    format!("roots[{i}]"),
                    format!("expected {n} coefficients, got {}", row.len()),
                ));
            }
            for (j, c) in row.iter().enumerate() {
                let loc = format!("roots[{i}][{j}]");
                if c.depends_on_x() {
                    return Err(schema(
                        loc,
                        "root coefficients must be independent of x: the principal part may depend on t only",
                    ));
                }
                self.check_expr(&loc, c)?;
            }
        }
        for ((k, beta), c) in &self.lower_order {
            let loc = format!("lower_order[dt={k}, dx={beta:?}]");
            if beta.len() != n {
                return Err(schema(loc, format!("dx length {} but dim is {n}", beta.len())));
            }
            let total = k + beta.iter().map(|&b| b as usize).sum::<usize>();
            if total > m - 1 {
                return Err(schema(loc, format!("total order {total} exceeds m-1 = {}", m - 1)));
            }
            self.check_expr(&loc, c)?;
        }
        self.check_expr("forcing", &self.forcing)?;
        if self.data.len() != m {
            return Err(schema("data", format!("expected {m} entries, got {}", self.data.len())));
        }
        for (k, g) in self.data.iter().enumerate() {
            let loc = format!("data[{k}]");
            if g.depends_on_t() {
                return Err(schema(loc, "Cauchy data must not depend on t"));
            }
            self.check_expr(&loc, g)?;
        }
        let s = &self.solver;
        if !s.modes.is_power_of_two() || s.modes < 4 {
            return Err(schema("solver.modes", "must be a power of two, at least 4"));
        }
        if !(s.cfl.is_finite() && s.cfl > 0.0) {
            return Err(schema("solver.cfl", "must be positive"));
        }
        if !s.sobolev_s.is_finite() {
            return Err(schema("solver.sobolev_s", "must be finite"));
        }
        if s.cadence == 0 {
            return Err(schema("solver.cadence", "must be at least 1"));
        }
        let w = &self.sweep;
        if w.n_list.is_empty()
            || w.n_list.iter().any(|k| !k.is_power_of_two() || *k < 4)
            || w.n_list.windows(2).any(|p| p[0] >= p[1])
        {
            return Err(schema("sweep.n_list", "must be increasing powers of two, at least 4"));
        }
        if !(w.mode_fraction > 0.0 && w.mode_fraction < 0.5) {
            return Err(schema("sweep.mode_fraction", "must lie in (0, 1/2)"));
        }
        Ok(())
    }

    fn check_expr(&self, location: &str, e: &Expr) -> Result<(), ProblemError> {
        let idx = e.max_space_index();
        if idx > self.dim {
            return Err(schema(location, format!("uses x{idx} but dim is {}", self.dim)));
        }
        let unbound: BTreeSet<String> = e
            .params()
            .into_iter()
            .filter(|p| !self.params.contains_key(p))
            .collect();
        if let Some(p) = unbound.iter().next() {
            return Err(schema(location, format!("unbound parameter `{p}`")));
        }
        Ok(())
    }

    /// Lossless file form: expressions are printed, configs are made explicit.
    pub fn to_file(&self) -> ProblemFile {
        ProblemFile {
            order: self.order,
            dim: self.dim,
            horizon: self.horizon,
            parameters: (*self.params).clone(),
            roots: self
                .roots
                .iter()
                .map(|row| row.iter().map(Expr::to_string).collect())
                .collect(),
            lower_order: self
                .lower_order
                .iter()
                .map(|((k, beta), c)| LowerOrderEntry {
                    dt: *k,
                    dx: beta.clone(),
                    coeff: c.to_string(),
                })
                .collect(),
            forcing: self.forcing.to_string(),
            data: self.data.iter().map(Expr::to_string).collect(),
            solver: Some(self.solver.clone()),
            sweep: Some(self.sweep.clone()),
        }
    }

    /// Compact canonical JSON, the basis of input digests.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("problem files serialize")
    }

    /// `a_{k,beta}`, zero when absent.
    pub fn lower(&self, k: usize, beta: &[u32]) -> Expr {
        self.lower_order
            .get(&(k, beta.to_vec()))
            .cloned()
            .unwrap_or_default()
    }
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemSpec, ProblemError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ProblemFile::from_json(&text)?.into_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    const WAVE: &str = r#"{
        "order": 2, "dim": 1, "horizon": 1.0,
        "roots": [["1"], ["-1"]],
        "lower_order": [{"dt": 1, "dx": [0], "coeff": "0.5*a"}],
        "parameters": {"a": 2.0},
        "data": ["cos(x1)", "0"]
    }"#;

    #[test]
    fn loads_with_defaults() {
        let spec = ProblemFile::from_json(WAVE).unwrap().into_spec().unwrap();
        assert_eq!(spec.order, 2);
        assert_eq!(spec.solver, SolverConfig::default());
        assert_eq!(spec.lower(1, &[0]).to_string(), "0.5*a");
        assert!(spec.lower(0, &[1]).is_zero());
    }

    #[test]
    fn round_trip() {
        let spec = ProblemFile::from_json(WAVE).unwrap().into_spec().unwrap();
        let again = ProblemFile::from_json(&spec.to_file().to_json()).unwrap().into_spec().unwrap();
        assert_eq!(spec, again);
        assert_eq!(spec.canonical_json(), again.canonical_json());
    }

    fn err(text: &str) -> String {
        ProblemFile::from_json(text)
            .and_then(ProblemFile::into_spec)
            .unwrap_err()
            .to_string()
    }

    #[test]
    fn rejections() {
        let bad_dx = WAVE.replace(r#""dx": [0]"#, r#""dx": [0, 1]"#);
        assert!(err(&bad_dx).contains("lower_order[0].dx"));
        let x_root = WAVE.replace(r#"["-1"]"#, r#"["-1 + x1"]"#);
        assert!(err(&x_root).contains("independent of x"));
        let unknown = WAVE.replace(r#""horizon": 1.0"#, r#""horizon": 1.0, "extra": 1"#);
        assert!(err(&unknown).contains("unknown field"));
        let too_high = WAVE.replace(r#""dt": 1, "dx": [0]"#, r#""dt": 1, "dx": [1]"#);
        assert!(err(&too_high).contains("exceeds m-1"));
        let syntax = WAVE.replace("cos(x1)", "cos(x1");
        assert!(err(&syntax).contains("data[0]"));
        let dim = WAVE.replace("cos(x1)", "cos(x2)");
        assert!(err(&dim).contains("uses x2"));
        let unbound = WAVE.replace("0.5*a", "0.5*b");
        assert!(err(&unbound).contains("unbound parameter `b`"));
    }
}
