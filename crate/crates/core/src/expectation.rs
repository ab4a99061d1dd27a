//! Expected focal output over random competing demand.
//!
//! For a fixed input bundle the residual Leontief integrand is the minimum of
//! one affine function per constrained input, optionally clamped at zero. The
//! closed form integrates that piecewise-linear function exactly; quadrature
//! splits the domain at the same kink points before applying Gauss–Legendre
//! (in two dimensions, by iterated integration with the outer axis split
//! wherever the inner kink structure changes); Monte Carlo averages the
//! integrand over a counter-based demand stream.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::demand::{self, amh_density_unchecked, DemandModel, Dependence, BATCH};
use crate::error::{Error, Result};
use crate::production::{
    check_inputs, residual_unchecked, ClampPolicy, InputBundle, TechnologyMatrix,
};
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    MonteCarlo,
    Quadrature,
    ClosedForm,
}

impl EstimateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateMethod::MonteCarlo => "mc",
            EstimateMethod::Quadrature => "quadrature",
            EstimateMethod::ClosedForm => "closed_form",
        }
    }
}

/// `std_error` and `n_samples` are zero for the deterministic methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: EstimateMethod,
}

impl ExpectationEstimate {
    fn exact(value: f64, method: EstimateMethod) -> Self {
        Self {
            value,
            std_error: 0.0,
            n_samples: 0,
            method,
        }
    }
}

/// How to evaluate an expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    MonteCarlo { n: usize, seed: u64 },
    Quadrature { nodes: usize },
    ClosedForm,
}

/// Dispatches to one of the three engines.
pub fn expected_output(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    model: &DemandModel,
    clamp: ClampPolicy,
    estimator: Estimator,
) -> Result<ExpectationEstimate> {
    match estimator {
        Estimator::MonteCarlo { n, seed } => {
            expected_output_mc(tech, inputs, model, clamp, n, seed)
        }
        Estimator::Quadrature { nodes } => {
            expected_output_quadrature(tech, inputs, model, clamp, nodes)
        }
        Estimator::ClosedForm => {
            if model.count() != 1 {
                return Err(Error::UnsupportedDimension(format!(
                    "closed form handles one exogenous output, model has {}",
                    model.count()
                )));
            }
            expected_output_closed_form_uniform(tech, inputs, model.bounds()[0], clamp)
        }
    }
}

fn check_model(tech: &TechnologyMatrix, inputs: &InputBundle, model: &DemandModel) -> Result<()> {
    check_inputs(tech, inputs)?;
    if model.count() + 1 != tech.outputs() {
        return Err(Error::DimensionMismatch(format!(
            "technology has {} competing outputs, demand model draws {}",
            tech.outputs() - 1,
            model.count()
        )));
    }
    Ok(())
}

/// Monte Carlo mean of the residual output over `n` demand draws. The
/// standard error uses the unbiased sample variance. Batches are reduced in
/// index order, so the result is independent of the rayon pool size.
pub fn expected_output_mc(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    model: &DemandModel,
    clamp: ClampPolicy,
    n: usize,
    seed: u64,
) -> Result<ExpectationEstimate> {
    check_model(tech, inputs, model)?;
    if n < 2 {
        return Err(Error::ParamDomain(format!(
            "Monte Carlo needs n >= 2, got {n}"
        )));
    }
    let x = inputs.quantities();
    let count = model.count();
    let batches = n.div_ceil(BATCH);
    let partials: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let start = b * BATCH;
            let len = BATCH.min(n - start);
            let mut buf = vec![0.0; len * count];
            demand::fill_demand(model, seed, start as u64, &mut buf);
            let mut m = Moments::default();
            for y in buf.chunks_exact(count) {
                m.push(clamp.apply(residual_unchecked(tech, x, y)));
            }
            m
        })
        .collect();
    let total = partials
        .into_iter()
        .fold(Moments::default(), |acc, m| acc.merge(&m));
    let var = total.m2 / (total.n as f64 - 1.0);
    Ok(ExpectationEstimate {
        value: total.mean,
        std_error: (var / total.n as f64).sqrt(),
        n_samples: total.n,
        method: EstimateMethod::MonteCarlo,
    })
}

/// Running mean and centered second moment (Welford / Chan et al.).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: &Moments) -> Moments {
        if self.n == 0 {
            return *o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let (na, nb) = (self.n as f64, o.n as f64);
        Moments {
            n,
            mean: self.mean + d * nb / n as f64,
            m2: self.m2 + o.m2 + d * d * na * nb / n as f64,
        }
    }
}

/// An affine function `c0 + slope·y`.
#[derive(Debug, Clone, Copy)]
struct Line {
    c0: f64,
    slope: f64,
}

impl Line {
    #[inline]
    fn at(&self, y: f64) -> f64 {
        self.c0 + self.slope * y
    }
}

#[inline]
fn lower_envelope(lines: &[Line], y: f64, clamp: ClampPolicy) -> f64 {
    let v = lines.iter().map(|l| l.at(y)).fold(f64::INFINITY, f64::min);
    clamp.apply(v)
}

/// Sorted breakpoints `lo = b₀ < … < b_m = hi` such that the clamped lower
/// envelope of `lines` is affine on every `[b_i, b_{i+1}]`: all pairwise
/// crossings and all zero crossings inside `(lo, hi)`.
fn breakpoints(lines: &[Line], lo: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let mut push = |y: f64| {
        if y > lo && y < hi {
            pts.push(y);
        }
    };
    for (i, a) in lines.iter().enumerate() {
        if a.slope != 0.0 {
            push(-a.c0 / a.slope);
        }
        for b in &lines[i + 1..] {
            let ds = a.slope - b.slope;
            if ds != 0.0 {
                push((b.c0 - a.c0) / ds);
            }
        }
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Per-input branches of the focal output, as affine functions of the single
/// exogenous output `k` with the remaining exogenous outputs held at `fixed`.
fn branch_lines(tech: &TechnologyMatrix, x: &[f64], k: usize, fixed: &[(usize, f64)]) -> Vec<Line> {
    tech.focal()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(j, &a)| {
            let mut avail = x[j];
            for &(m, y) in fixed {
                avail -= tech.row(m + 1)[j] * y;
            }
            Line {
                c0: avail / a,
                slope: -tech.row(k + 1)[j] / a,
            }
        })
        .collect()
}

/// Exact expectation for one exogenous output distributed Uniform[0,1].
pub fn expected_output_closed_form(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    clamp: ClampPolicy,
) -> Result<ExpectationEstimate> {
    expected_output_closed_form_uniform(tech, inputs, (0.0, 1.0), clamp)
}

/// Exact expectation for one exogenous output distributed Uniform[lo, hi].
/// `lo == hi` is a point mass.
pub fn expected_output_closed_form_uniform(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    (lo, hi): (f64, f64),
    clamp: ClampPolicy,
) -> Result<ExpectationEstimate> {
    check_inputs(tech, inputs)?;
    if tech.outputs() != 2 {
        return Err(Error::UnsupportedDimension(format!(
            "closed form needs exactly one competing output, technology has {}",
            tech.outputs() - 1
        )));
    }
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::ParamDomain(format!("invalid support ({lo}, {hi})")));
    }
    let x = inputs.quantities();
    if lo == hi {
        let v = clamp.apply(residual_unchecked(tech, x, &[lo]));
        return Ok(ExpectationEstimate::exact(v, EstimateMethod::ClosedForm));
    }
    let lines = branch_lines(tech, x, 0, &[]);
    let bp = breakpoints(&lines, lo, hi);
    let mut integral = 0.0;
    for w in bp.windows(2) {
        let (a, b) = (w[0], w[1]);
        integral +=
            0.5 * (b - a) * (lower_envelope(&lines, a, clamp) + lower_envelope(&lines, b, clamp));
    }
    Ok(ExpectationEstimate::exact(
        integral / (hi - lo),
        EstimateMethod::ClosedForm,
    ))
}

/// Deterministic quadrature for one or two exogenous outputs, with
/// `nodes` Gauss–Legendre points on every kink-free piece.
pub fn expected_output_quadrature(
    tech: &TechnologyMatrix,
    inputs: &InputBundle,
    model: &DemandModel,
    clamp: ClampPolicy,
    nodes: usize,
) -> Result<ExpectationEstimate> {
    if model.count() > 2 {
        return Err(Error::UnsupportedDimension(format!(
            "quadrature handles at most 2 exogenous outputs, model has {}",
            model.count()
        )));
    }
    check_model(tech, inputs, model)?;
    if nodes < 8 {
        return Err(Error::ParamDomain(format!(
            "quadrature needs >= 8 nodes, got {nodes}"
        )));
    }
    let rule = GaussLegendre::new(nodes);
    let x = inputs.quantities();
    let b = model.bounds();

    // Point-mass outputs are fixed; the rest are integrated.
    let free: Vec<usize> = (0..model.count()).filter(|&k| b[k].0 < b[k].1).collect();
    let fixed: Vec<(usize, f64)> = (0..model.count())
        .filter(|&k| b[k].0 == b[k].1)
        .map(|k| (k, b[k].0))
        .collect();

    let value = match free.as_slice() {
        [] => {
            let y: Vec<f64> = fixed.iter().map(|&(_, y)| y).collect();
            clamp.apply(residual_unchecked(tech, x, &y))
        }
        [k] => {
            let (lo, hi) = b[*k];
            integrate_1d(
                &rule,
                &branch_lines(tech, x, *k, &fixed),
                lo,
                hi,
                clamp,
                |_| 1.0,
            ) / (hi - lo)
        }
        [_, _] => {
            let theta = match model.dependence() {
                Dependence::Independent => 0.0,
                Dependence::AmhCopula { theta } => theta,
            };
            integrate_2d(&rule, tech, x, b, clamp, theta)
        }
        _ => unreachable!(),
    };
    Ok(ExpectationEstimate::exact(
        value,
        EstimateMethod::Quadrature,
    ))
}

fn integrate_1d(
    rule: &GaussLegendre,
    lines: &[Line],
    lo: f64,
    hi: f64,
    clamp: ClampPolicy,
    weight: impl Fn(f64) -> f64,
) -> f64 {
    breakpoints(lines, lo, hi)
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], |y| lower_envelope(lines, y, clamp) * weight(y)))
        .sum()
}

/// `∬ f(y₂, y₃) c(u, v) dy₂ dy₃ / (|Y₂| |Y₃|)` with `u`, `v` the rescaled
/// outputs and `c` the AMH density (identically 1 at θ = 0).
fn integrate_2d(
    rule: &GaussLegendre,
    tech: &TechnologyMatrix,
    x: &[f64],
    b: &[(f64, f64)],
    clamp: ClampPolicy,
    theta: f64,
) -> f64 {
    let ((lo2, hi2), (lo3, hi3)) = (b[0], b[1]);
    let (w2, w3) = (hi2 - lo2, hi3 - lo3);

    // Every kink of the integrand lies on a line α + β·y₂ + γ·y₃ = 0.
    let branches: Vec<(f64, f64, f64)> = tech
        .focal()
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(j, &a)| (x[j] / a, -tech.row(1)[j] / a, -tech.row(2)[j] / a))
        .collect();
    let mut kinks: Vec<(f64, f64, f64)> = branches.clone();
    for (i, p) in branches.iter().enumerate() {
        for q in &branches[i + 1..] {
            kinks.push((p.0 - q.0, p.1 - q.1, p.2 - q.2));
        }
    }

    // Outer breakpoints: where a kink line meets the y₂ edges, where two kink
    // lines cross, or where a kink line runs parallel to the y₂ axis.
    let mut outer = vec![lo3, hi3];
    let mut push = |y: f64| {
        if y > lo3 && y < hi3 {
            outer.push(y);
        }
    };
    for (i, &(al, be, ga)) in kinks.iter().enumerate() {
        if ga != 0.0 {
            push(-(al + be * lo2) / ga);
            push(-(al + be * hi2) / ga);
        }
        for &(al2, be2, ga2) in &kinks[i + 1..] {
            let det = be * ga2 - be2 * ga;
            if det != 0.0 {
                // solve be·y₂ + ga·y₃ = −al, be2·y₂ + ga2·y₃ = −al2 for y₃
                push((-be * al2 + be2 * al) / det);
            }
        }
    }
    outer.sort_by(f64::total_cmp);
    outer.dedup();

    let density = |y2: f64, y3: f64| {
        if theta == 0.0 {
            1.0
        } else {
            amh_density_unchecked(
                theta,
                ((y2 - lo2) / w2).clamp(0.0, 1.0),
                ((y3 - lo3) / w3).clamp(0.0, 1.0),
            )
        }
    };

    let mut total = 0.0;
    for seg in outer.windows(2) {
        total += rule.integrate(seg[0], seg[1], |y3| {
            let lines: Vec<Line> = branches
                .iter()
                .map(|&(c0, s2, s3)| Line {
                    c0: c0 + s3 * y3,
                    slope: s2,
                })
                .collect();
            integrate_1d(rule, &lines, lo2, hi2, clamp, |y2| density(y2, y3))
        });
    }
    total / (w2 * w3)
}
