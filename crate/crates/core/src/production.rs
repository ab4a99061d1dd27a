//! Deterministic production technologies.
//!
//! Three evaluators live here: the two-input CES function, the fixed-proportions
//! (Leontief) function over any number of inputs, and the residual Leontief
//! function in which competing outputs drain inputs before the focal output
//! (row 0 of the technology) is produced.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Non-negative input quantities, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct InputBundle {
    quantities: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl InputBundle {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if quantities.is_empty() {
            return Err(Error::ParamDomain(
                "input bundle must hold at least one input".into(),
            ));
        }
        if let Some((i, q)) = quantities
            .iter()
            .enumerate()
            .find(|(_, q)| !q.is_finite() || **q < 0.0)
        {
            return Err(Error::ParamDomain(format!(
                "input {i} must be finite and non-negative, got {q}"
            )));
        }
        Ok(Self {
            quantities,
            labels: None,
        })
    }

    pub fn pair(w: f64, c: f64) -> Result<Self> {
        Self::new(vec![w, c])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.quantities.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} inputs",
                labels.len(),
                self.quantities.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn quantities(&self) -> &[f64] {
        &self.quantities
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.quantities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.quantities.is_empty()
    }

    /// The bundle with every quantity multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        let mut out = Self::new(self.quantities.iter().map(|q| q * t).collect())?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}

/// Per-unit input requirements: entry `(k, j)` is the amount of input `j`
/// consumed by one unit of output `k`. Row 0 is the focal output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct TechnologyMatrix {
    rows: Vec<Vec<f64>>,
}

impl TechnologyMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::ParamDomain(
                "technology needs at least one output row".into(),
            ));
        };
        let m = first.len();
        if m == 0 {
            return Err(Error::ParamDomain(
                "technology needs at least one input column".into(),
            ));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch(format!(
                    "row {k} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::ParamDomain(format!(
                    "requirement in row {k} must be finite and non-negative, got {v}"
                )));
            }
        }
        if !first.iter().any(|&v| v > 0.0) {
            return Err(Error::DegenerateTechnology);
        }
        Ok(Self { rows })
    }

    /// Single-output technology.
    pub fn single(requirements: Vec<f64>) -> Result<Self> {
        Self::new(vec![requirements])
    }

    /// Number of outputs K (focal plus competing).
    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    /// Number of inputs M.
    pub fn inputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn focal(&self) -> &[f64] {
        &self.rows[0]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Technology restricted to the focal row.
    pub fn focal_only(&self) -> Self {
        Self {
            rows: vec![self.rows[0].clone()],
        }
    }
}

impl TryFrom<Vec<Vec<f64>>> for TechnologyMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<TechnologyMatrix> for Vec<Vec<f64>> {
    fn from(t: TechnologyMatrix) -> Self {
        t.rows
    }
}

/// Parameters of the two-input CES function `F·(a·w^ρ + (1−a)·c^ρ)^(v/ρ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCesParams", into = "RawCesParams")]
pub struct CesParams {
    tfp: f64,
    share: f64,
    rho: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCesParams {
    tfp: f64,
    share: f64,
    rho: f64,
    scale: f64,
}

impl CesParams {
    pub fn new(tfp: f64, share: f64, rho: f64, scale: f64) -> Result<Self> {
        if !(tfp.is_finite() && tfp > 0.0) {
            return Err(Error::ParamDomain(format!("tfp must be > 0, got {tfp}")));
        }
        if !(share > 0.0 && share < 1.0) {
            return Err(Error::ParamDomain(format!(
                "share must lie in (0,1), got {share}"
            )));
        }
        if !rho.is_finite() || rho == 0.0 {
            return Err(Error::ParamDomain(format!(
                "rho must be finite and non-zero, got {rho}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::ParamDomain(format!(
                "scale must be > 0, got {scale}"
            )));
        }
        Ok(Self {
            tfp,
            share,
            rho,
            scale,
        })
    }

    pub fn tfp(&self) -> f64 {
        self.tfp
    }
    pub fn share(&self) -> f64 {
        self.share
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
}

impl TryFrom<RawCesParams> for CesParams {
    type Error = Error;

    fn try_from(r: RawCesParams) -> Result<Self> {
        Self::new(r.tfp, r.share, r.rho, r.scale)
    }
}

impl From<CesParams> for RawCesParams {
    fn from(p: CesParams) -> Self {
        Self {
            tfp: p.tfp,
            share: p.share,
            rho: p.rho,
            scale: p.scale,
        }
    }
}

/// What to do with a residual output that falls below zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClampPolicy {
    #[default]
    Raw,
    ClampAtZero,
}

impl ClampPolicy {
    #[inline]
    pub fn apply(self, y: f64) -> f64 {
        match self {
            ClampPolicy::Raw => y,
            ClampPolicy::ClampAtZero => y.max(0.0),
        }
    }
}

pub fn ces_eval(params: &CesParams, inputs: &InputBundle) -> Result<f64> {
    if inputs.len() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "CES takes exactly 2 inputs, got {}",
            inputs.len()
        )));
    }
    let q = inputs.quantities();
    if params.rho < 0.0 {
        if let Some(index) = q.iter().position(|&x| x == 0.0) {
            return Err(Error::NonPositiveInput { index });
        }
    }
    Ok(ces_unchecked(params, q[0], q[1]))
}

#[inline]
pub(crate) fn ces_unchecked(p: &CesParams, w: f64, c: f64) -> f64 {
    let inner = p.share * w.powf(p.rho) + (1.0 - p.share) * c.powf(p.rho);
    p.tfp * inner.powf(p.scale / p.rho)
}

/// Fixed-proportions output: the tightest `x_j / a_j` over inputs with a
/// positive requirement. Inputs the focal output does not use are ignored.
pub fn leontief_eval(tech: &TechnologyMatrix, inputs: &InputBundle) -> Result<f64> {
    if tech.outputs() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "leontief_eval takes a single-output technology, got {} outputs",
            tech.outputs()
        )));
    }
    check_inputs(tech, inputs)?;
    Ok(residual_unchecked(tech, inputs.quantities(), &[]))
}

/// Focal output after the competing outputs `exogenous` (y₂…y_K) have taken
/// their share of every input.
pub fn residual_leontief(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    exogenous: &[f64],
    clamp: ClampPolicy,
) -> Result<f64> {
    check_inputs(tech, inputs)?;
    check_exogenous(tech, exogenous)?;
    Ok(clamp.apply(residual_unchecked(tech, inputs.quantities(), exogenous)))
}

pub(crate) fn check_inputs(tech: &TechnologyMatrix, inputs: &InputBundle) -> Result<()> {
    if inputs.len() != tech.inputs() {
        return Err(Error::DimensionMismatch(format!(
            "technology has {} inputs, bundle has {}",
            tech.inputs(),
            inputs.len()
        )));
    }
    Ok(())
}

pub(crate) fn check_exogenous(tech: &TechnologyMatrix, exogenous: &[f64]) -> Result<()> {
    if exogenous.len() + 1 != tech.outputs() {
        return Err(Error::DimensionMismatch(format!(
            "technology with {} outputs needs {} exogenous outputs, got {}",
            tech.outputs(),
            tech.outputs() - 1,
            exogenous.len()
        )));
    }
    if let Some(y) = exogenous.iter().find(|y| !y.is_finite() || **y < 0.0) {
        return Err(Error::ParamDomain(format!(
            "exogenous outputs must be finite and non-negative, got {y}"
        )));
    }
    Ok(())
}

/// Raw residual Leontief with no validation. `exogenous` may be shorter than
/// K−1; missing outputs count as zero.
#[inline]
pub(crate) fn residual_unchecked(tech: &TechnologyMatrix, x: &[f64], exogenous: &[f64]) -> f64 {
    let focal = tech.focal();
    let mut best = f64::INFINITY;
    for (j, &a) in focal.iter().enumerate() {
        if a > 0.0 {
            let mut avail = x[j];
            for (k, &y) in exogenous.iter().enumerate() {
                avail -= tech.rows[k + 1][j] * y;
            }
            let cap = avail / a;
            if cap < best {
                best = cap;
            }
        }
    }
    best
}
