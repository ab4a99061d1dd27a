use serde::Serialize;

use crate::error::{Error, Result};
use crate::production::InputBundle;

/// Output along the ray `t ↦ f(t·x₀)` with log-log scale elasticities.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleProfile {
    pub base: InputBundle,
    pub t_values: Vec<f64>,
    pub outputs: Vec<f64>,
    /// `d ln f / d ln t`; `None` where a stencil output is not positive.
    pub elasticities: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Rts {
    Constant,
    Decreasing,
    Increasing,
    Mixed,
}

impl Rts {
    pub fn as_str(self) -> &'static str {
        match self {
            Rts::Constant => "Constant",
            Rts::Decreasing => "Decreasing",
            Rts::Increasing => "Increasing",
            Rts::Mixed => "Mixed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtsClass {
    pub classification: Rts,
    pub tolerance: f64,
}

/// Evaluates `surface` at `t·base` for each `t` and estimates the scale
/// elasticity: centred differences of `ln f` against `ln t` in the interior,
/// one-sided at the two ends.
pub fn scale_profile<F>(surface: F, base: &InputBundle, t_values: &[f64]) -> Result<ScaleProfile>
where
    F: Fn(&InputBundle) -> Result<f64>,
{
    if t_values.len() < 2 {
        return Err(Error::ParamDomain(
            "scale profile needs at least 2 t-values".into(),
        ));
    }
    if let Some(t) = t_values.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::ParamDomain(format!(
            "t-values must be positive, got {t}"
        )));
    }
    if t_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::ParamDomain(
            "t-values must be strictly increasing".into(),
        ));
    }
    let outputs = t_values
        .iter()
        .map(|&t| surface(&base.scaled(t)?))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(y) = outputs.iter().find(|y| !y.is_finite()) {
        return Err(Error::ParamDomain(format!(
            "surface returned non-finite output {y}"
        )));
    }
    let n = t_values.len();
    let elasticities = (0..n)
        .map(|i| {
            let (a, b) = match i {
                0 => (0, 1),
                i if i == n - 1 => (n - 2, n - 1),
                i => (i - 1, i + 1),
            };
            (outputs[a] > 0.0 && outputs[b] > 0.0).then(|| {
                (outputs[b].ln() - outputs[a].ln()) / (t_values[b].ln() - t_values[a].ln())
            })
        })
        .collect();
    Ok(ScaleProfile {
        base: base.clone(),
        t_values: t_values.to_vec(),
        outputs,
        elasticities,
    })
}

/// Constant when every available elasticity is within `tolerance` of 1,
/// Decreasing / Increasing when all are below / above that band, otherwise
/// (including when no elasticity is available) Mixed.
pub fn classify_rts(profile: &ScaleProfile, tolerance: f64) -> RtsClass {
    let e: Vec<f64> = profile.elasticities.iter().flatten().copied().collect();
    let classification = if e.is_empty() {
        Rts::Mixed
    } else if e.iter().all(|x| (x - 1.0).abs() <= tolerance) {
        Rts::Constant
    } else if e.iter().all(|x| *x < 1.0 - tolerance) {
        Rts::Decreasing
    } else if e.iter().all(|x| *x > 1.0 + tolerance) {
        Rts::Increasing
    } else {
        Rts::Mixed
    };
    RtsClass {
        classification,
        tolerance,
    }
}
