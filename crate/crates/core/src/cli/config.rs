//! Run configuration: a TOML file with `technology`, `ces`, `demand`, `task`
//! and `figure` sections, plus `key=value` overrides.

use serde::{Deserialize, Serialize};

use crate::demand::DemandModel;
use crate::expectation::Estimator;
use crate::geometry::GridSpec;
use crate::production::{CesParams, ClampPolicy, TechnologyMatrix};

/// A configuration problem, located by line (syntax) or field (content)
/// where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub message: String,
    pub line: Option<usize>,
    pub field: Option<String>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            line: None,
            field: None,
        }
    }

    pub fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            line: None,
            field: Some(field.into()),
        }
    }
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " in `{field}`")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechnologySection {
    /// Row 0 is the focal output; further rows are competing outputs.
    pub requirements: TechnologyMatrix,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<String>,
    #[serde(default)]
    pub clamp: ClampPolicy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionKind {
    Leontief,
    Residual,
    Ces,
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    ClosedForm,
    Quadrature,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsoquantKind {
    Analytic,
    Rayscan,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    /// Surface evaluated by `eval`, `isoquant` and `rts`.
    pub function: FunctionKind,
    /// Input bundles for `eval`.
    pub points: Vec<Vec<f64>>,
    /// Competing outputs for `residual` (shared by every point).
    pub exogenous: Vec<f64>,
    /// Expectation engine for `expected` surfaces and the `expect` task.
    pub method: MethodKind,
    pub n: usize,
    pub nodes: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub levels: Vec<f64>,
    pub isoquant_method: IsoquantKind,
    pub angles: usize,
    pub bracket: (f64, f64),
    pub extent: f64,
    pub rel_tol: f64,
    pub base: Vec<f64>,
    pub t_values: Vec<f64>,
    pub tolerance: f64,
    /// Figure id; bare numbers such as `3` are accepted.
    #[serde(deserialize_with = "figure_id")]
    pub figure: String,
}

fn figure_id<'de, D: serde::Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        Text(String),
        Number(u64),
    }
    Ok(match Id::deserialize(d)? {
        Id::Text(s) => s,
        Id::Number(n) => n.to_string(),
    })
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            function: FunctionKind::Leontief,
            points: Vec::new(),
            exogenous: Vec::new(),
            method: MethodKind::ClosedForm,
            n: 100_000,
            nodes: 64,
            seed: 42,
            grid: GridSpec::square(0.0, 2.0, 4),
            levels: vec![1.0],
            isoquant_method: IsoquantKind::Rayscan,
            angles: 33,
            bracket: (0.0, 100.0),
            extent: 10.0,
            rel_tol: 1e-10,
            base: vec![1.0, 1.0],
            t_values: vec![0.5, 0.75, 1.0, 1.5, 2.0],
            tolerance: 1e-6,
            figure: "2b".into(),
        }
    }
}

impl TaskSection {
    pub fn estimator(&self) -> Estimator {
        match self.method {
            MethodKind::ClosedForm => Estimator::ClosedForm,
            MethodKind::Quadrature => Estimator::Quadrature { nodes: self.nodes },
            MethodKind::Mc => Estimator::MonteCarlo {
                n: self.n,
                seed: self.seed,
            },
        }
    }
}

/// Parameters behind the figure data tables. None of these values are
/// prescribed anywhere; they are chosen so each figure shows its qualitative
/// shape and are echoed into every output header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FigureSection {
    /// CES share and substitution parameters for figures 1a and 1b.
    pub ces_share: f64,
    pub ces_rho: f64,
    /// Scale parameters of the three curves of figure 1a.
    pub ces_scales: Vec<f64>,
    /// Focal requirements for figures 2 and 3.
    pub leontief: Vec<f64>,
    /// Competing-output requirements for figure 3.
    pub competing: Vec<f64>,
    pub y2_values: Vec<f64>,
    pub levels: Vec<f64>,
    pub t_values: Vec<f64>,
    pub extent: f64,
    /// Two-output expected surface of figures 4a and 4b.
    pub expected_focal: Vec<f64>,
    pub expected_competing: Vec<f64>,
    pub expected_levels: Vec<f64>,
    /// Third output of figures 5a and 5b.
    pub third_competing: Vec<f64>,
    pub thetas: Vec<f64>,
    pub three_output_levels: Vec<f64>,
    pub nodes: usize,
    pub grid: GridSpec,
    pub angles: usize,
    pub bracket: (f64, f64),
}

impl Default for FigureSection {
    fn default() -> Self {
        Self {
            ces_share: 0.5,
            ces_rho: 0.5,
            ces_scales: vec![1.0, 0.7, 1.3],
            leontief: vec![1.0, 2.0],
            competing: vec![0.5, 0.25],
            y2_values: vec![0.0, 1.0],
            levels: vec![1.0, 2.0],
            t_values: (1..=20).map(|k| 0.25 * k as f64).collect(),
            extent: 6.0,
            expected_focal: vec![1.0, 1.0],
            expected_competing: vec![1.0, 0.2],
            expected_levels: vec![0.5, 1.0, 1.5, 2.0],
            third_competing: vec![0.2, 1.0],
            thetas: vec![-0.9, 0.0, 0.9],
            three_output_levels: vec![0.5, 1.0, 1.5],
            nodes: 24,
            grid: GridSpec::square(0.0, 3.0, 30),
            angles: 33,
            bracket: (0.0, 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technology: Option<TechnologySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ces: Option<CesParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<DemandModel>,
    #[serde(default)]
    pub task: TaskSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<FigureSection>,
}

impl RunConfig {
    /// Parses `text` and applies `key.path=value` overrides in order. Values
    /// are read as TOML literals, falling back to plain strings.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut base: Self = toml::from_str(text).map_err(|e| from_toml(e, text))?;
        if overrides.is_empty() {
            return Ok(base);
        }
        // overrides land on the resolved form, so a single nested key such as
        // `task.grid.resolution` keeps every sibling default
        if base.figure.is_none()
            && overrides
                .iter()
                .any(|o| o.trim_start().starts_with("figure."))
        {
            base.figure = Some(FigureSection::default());
        }
        let mut table = toml::Table::try_from(&base)
            .map_err(|e| ConfigError::new(format!("cannot resolve configuration: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::deserialize(table).map_err(|e| {
            let mut err = ConfigError::new(e.message().to_string());
            err.field = field_from_message(e.message());
            err
        })
    }

    pub fn technology(&self) -> Result<&TechnologySection, ConfigError> {
        self.technology
            .as_ref()
            .ok_or_else(|| ConfigError::field("technology", "section is required for this task"))
    }

    pub fn ces(&self) -> Result<&CesParams, ConfigError> {
        self.ces
            .as_ref()
            .ok_or_else(|| ConfigError::field("ces", "section is required for this task"))
    }

    pub fn demand(&self) -> Result<&DemandModel, ConfigError> {
        self.demand
            .as_ref()
            .ok_or_else(|| ConfigError::field("demand", "section is required for this task"))
    }

    /// The resolved configuration as TOML, every default explicit.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}

fn from_toml(e: toml::de::Error, text: &str) -> ConfigError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
    ConfigError {
        message: e.message().to_string(),
        line,
        field: field_from_message(e.message()),
    }
}

fn field_from_message(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), ConfigError> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| ConfigError::new(format!("override `{spec}` is not key=value")))?;
    let key = key.trim();
    let value = parse_value(raw.trim());
    let mut path: Vec<&str> = key.split('.').collect();
    let last = path
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ConfigError::field(key, "empty override key"))?;
    let mut cur = table;
    for seg in path {
        let entry = cur
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ConfigError::field(key, format!("`{seg}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}
