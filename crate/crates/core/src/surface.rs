//! Two-input production surfaces behind one evaluation interface.

use crate::demand::DemandModel;
use crate::error::{Error, Result};
use crate::expectation::{expected_output, Estimator, ExpectationEstimate};
use crate::production::{
    ces_eval, leontief_eval, residual_leontief, CesParams, ClampPolicy, InputBundle,
    TechnologyMatrix,
};

#[derive(Debug, Clone)]
pub enum Surface {
    Ces(CesParams),
    /// Focal row of the technology only.
    Leontief(TechnologyMatrix),
    /// Competing outputs held at fixed values.
    Residual {
        tech: TechnologyMatrix,
        exogenous: Vec<f64>,
        clamp: ClampPolicy,
    },
    /// Expected focal output over random competing demand.
    Expected {
        tech: TechnologyMatrix,
        model: DemandModel,
        clamp: ClampPolicy,
        estimator: Estimator,
    },
}

impl Surface {
    pub fn estimate(&self, inputs: &InputBundle) -> Result<ExpectationEstimate> {
        match self {
            Surface::Expected {
                tech,
                model,
                clamp,
                estimator,
            } => expected_output(tech, inputs, model, *clamp, *estimator),
            _ => Err(Error::ParamDomain(
                "only expected-output surfaces carry estimates".into(),
            )),
        }
    }

    pub fn eval(&self, inputs: &InputBundle) -> Result<f64> {
        match self {
            Surface::Ces(p) => ces_eval(p, inputs),
            Surface::Leontief(t) => {
                if t.outputs() == 1 {
                    leontief_eval(t, inputs)
                } else {
                    leontief_eval(&t.focal_only(), inputs)
                }
            }
            Surface::Residual {
                tech,
                exogenous,
                clamp,
            } => residual_leontief(tech, inputs, exogenous, *clamp),
            Surface::Expected { .. } => self.estimate(inputs).map(|e| e.value),
        }
    }

    /// `f(w, c)`, with NaN for points the surface rejects.
    pub fn at(&self, w: f64, c: f64) -> f64 {
        InputBundle::pair(w, c)
            .and_then(|x| self.eval(&x))
            .unwrap_or(f64::NAN)
    }
}
