//! Fixed-proportions production under stochastic competing demand.
//!
//! A deterministic Leontief technology has constant returns to scale and
//! L-shaped isoquants. Once part of every input is drained by other outputs
//! whose volume is random, the expected output of the focal treatment becomes
//! a concave surface with curved isoquants and non-constant returns to scale.
//! This crate evaluates the deterministic technologies, samples the competing
//! demand, integrates the expected output three independent ways and traces
//! isoquants and scale profiles of any of the resulting surfaces.

pub mod cli;
pub mod demand;
pub mod error;
pub mod expectation;
pub mod geometry;
pub mod production;
pub mod quadrature;
pub mod stats;
pub mod surface;

pub use demand::{
    amh_cdf, amh_density, sample_amh_pair, sample_demand, DemandMatrix, DemandModel, Dependence,
    SampleStream,
};
pub use error::{Error, Result};
pub use expectation::{
    expected_output, expected_output_closed_form, expected_output_closed_form_uniform,
    expected_output_mc, expected_output_quadrature, EstimateMethod, Estimator, ExpectationEstimate,
};
pub use geometry::{
    classify_rts, scale_profile, trace_isoquant_analytic, trace_isoquant_grid,
    trace_isoquant_rayscan, GridSpec, IsoquantTrace, Point, Rts, RtsClass, ScaleProfile,
    TraceMethod,
};
pub use production::{
    ces_eval, leontief_eval, residual_leontief, CesParams, ClampPolicy, InputBundle,
    TechnologyMatrix,
};
pub use surface::Surface;
