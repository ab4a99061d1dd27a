//! Random competing demand.
//!
//! Exogenous outputs y₂…y_K are drawn with Uniform marginals rescaled onto
//! per-output bounds. Two outputs may be coupled through the Ali-Mikhail-Haq
//! copula `C(u,v) = uv / (1 − θ(1−u)(1−v))`, sampled by inverting the
//! conditional distribution `∂C/∂u` in closed form.
//!
//! Draws are counter-based: sample `i` of a stream seeded with `s` always reads
//! the same ChaCha8 words, so any partition of the index range across workers
//! reproduces the same matrix.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples generated per parallel work item.
pub(crate) const BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dependence {
    Independent,
    AmhCopula { theta: f64 },
}

/// Distribution of the exogenous output vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDemandModel", into = "RawDemandModel")]
pub struct DemandModel {
    count: usize,
    dependence: Dependence,
    bounds: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDemandModel {
    count: usize,
    #[serde(default = "independent")]
    dependence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default)]
    bounds: Vec<[f64; 2]>,
}

fn independent() -> String {
    "independent".into()
}

impl TryFrom<RawDemandModel> for DemandModel {
    type Error = Error;

    fn try_from(r: RawDemandModel) -> Result<Self> {
        let dependence = match (r.dependence.as_str(), r.theta) {
            ("independent", None) => Dependence::Independent,
            ("independent", Some(_)) => {
                return Err(Error::ParamDomain(
                    "theta is only meaningful with dependence = \"amh\"".into(),
                ))
            }
            ("amh", Some(theta)) => Dependence::AmhCopula { theta },
            ("amh", None) => {
                return Err(Error::ParamDomain(
                    "dependence = \"amh\" requires theta".into(),
                ))
            }
            (other, _) => {
                return Err(Error::ParamDomain(format!(
                    "unknown dependence `{other}` (expected \"independent\" or \"amh\")"
                )))
            }
        };
        let bounds = if r.bounds.is_empty() {
            vec![(0.0, 1.0); r.count]
        } else {
            r.bounds.into_iter().map(|[lo, hi]| (lo, hi)).collect()
        };
        DemandModel::new(r.count, dependence, bounds)
    }
}

impl From<DemandModel> for RawDemandModel {
    fn from(m: DemandModel) -> Self {
        let (dependence, theta) = match m.dependence {
            Dependence::Independent => ("independent".to_string(), None),
            Dependence::AmhCopula { theta } => ("amh".to_string(), Some(theta)),
        };
        Self {
            count: m.count,
            dependence,
            theta,
            bounds: m.bounds.into_iter().map(|(lo, hi)| [lo, hi]).collect(),
        }
    }
}

impl DemandModel {
    /// `lo == hi` is accepted and yields a point mass at that value.
    pub fn new(count: usize, dependence: Dependence, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if count == 0 {
            return Err(Error::ParamDomain(
                "demand model needs at least one output".into(),
            ));
        }
        if bounds.len() != count {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {count} exogenous outputs",
                bounds.len()
            )));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
                return Err(Error::ParamDomain(format!(
                    "bounds must be finite with 0 <= lo <= hi, got ({lo}, {hi})"
                )));
            }
        }
        if let Dependence::AmhCopula { theta } = dependence {
            check_theta(theta)?;
            if count != 2 {
                return Err(Error::ParamDomain(format!(
                    "AMH dependence couples exactly 2 outputs, got {count}"
                )));
            }
        }
        Ok(Self {
            count,
            dependence,
            bounds,
        })
    }

    /// Independent Uniform[0,1] outputs.
    pub fn uniform(count: usize) -> Result<Self> {
        Self::new(count, Dependence::Independent, vec![(0.0, 1.0); count])
    }

    /// Two Uniform[0,1] outputs coupled by AMH(θ).
    pub fn amh(theta: f64) -> Result<Self> {
        Self::new(2, Dependence::AmhCopula { theta }, vec![(0.0, 1.0); 2])
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn dependence(&self) -> Dependence {
        self.dependence
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    #[inline]
    pub(crate) fn rescale(&self, k: usize, u: f64) -> f64 {
        let (lo, hi) = self.bounds[k];
        if lo == hi {
            lo
        } else {
            lo + (hi - lo) * u
        }
    }
}

/// Position in a counter-based random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub index: u64,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, index: 0 }
    }

    pub fn at(seed: u64, index: u64) -> Self {
        Self { seed, index }
    }
}

/// Sequential reader over the uniforms of samples `index, index+1, …`, each
/// sample owning `width` consecutive 64-bit words.
pub(crate) struct UniformReader {
    rng: ChaCha8Rng,
}

impl UniformReader {
    pub(crate) fn new(stream: SampleStream, width: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(stream.seed);
        // positions are counted in 32-bit words
        rng.set_word_pos(2 * stream.index as u128 * width as u128);
        Self { rng }
    }

    /// A uniform in the open interval (0, 1).
    #[inline]
    pub(crate) fn next(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Row-major `n × count` matrix of demand draws.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    count: usize,
    data: Vec<f64>,
}

impl DemandMatrix {
    pub fn rows(&self) -> usize {
        self.data.len() / self.count
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.count..(i + 1) * self.count]
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(k)
            .step_by(self.count)
            .copied()
            .collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.count)
    }
}

/// Fills `out` (length `count · (end − start)`) with samples `start..end` of
/// the stream seeded by `seed`.
pub(crate) fn fill_demand(model: &DemandModel, seed: u64, start: u64, out: &mut [f64]) {
    let count = model.count;
    let mut reader = UniformReader::new(SampleStream::at(seed, start), count);
    match model.dependence {
        Dependence::Independent => {
            for row in out.chunks_exact_mut(count) {
                for (k, y) in row.iter_mut().enumerate() {
                    *y = model.rescale(k, reader.next());
                }
            }
        }
        Dependence::AmhCopula { theta } => {
            for row in out.chunks_exact_mut(2) {
                let u = reader.next();
                let p = reader.next();
                let v = amh_conditional_inverse(theta, u, p);
                row[0] = model.rescale(0, u);
                row[1] = model.rescale(1, v);
            }
        }
    }
}

/// `n` draws of the exogenous output vector, starting at `stream.index`.
/// Work is split across the current rayon pool; the result does not depend
/// on the pool size.
pub fn sample_demand(model: &DemandModel, stream: SampleStream, n: usize) -> Result<DemandMatrix> {
    if n == 0 {
        return Err(Error::ParamDomain("sample count must be >= 1".into()));
    }
    let count = model.count;
    let mut data = vec![0.0; n * count];
    data.par_chunks_mut(BATCH * count)
        .enumerate()
        .for_each(|(b, chunk)| {
            fill_demand(model, stream.seed, stream.index + (b * BATCH) as u64, chunk);
        });
    Ok(DemandMatrix { count, data })
}

fn check_theta(theta: f64) -> Result<()> {
    if !(-1.0..1.0).contains(&theta) {
        return Err(Error::ParamDomain(format!(
            "AMH theta must lie in [-1, 1), got {theta}"
        )));
    }
    Ok(())
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::ParamDomain(format!(
            "{name} must lie in [0, 1], got {x}"
        )));
    }
    Ok(())
}

/// The AMH copula `C(u,v)`.
pub fn amh_cdf(theta: f64, u: f64, v: f64) -> Result<f64> {
    check_theta(theta)?;
    check_unit("u", u)?;
    check_unit("v", v)?;
    Ok(amh_cdf_unchecked(theta, u, v))
}

#[inline]
pub(crate) fn amh_cdf_unchecked(theta: f64, u: f64, v: f64) -> f64 {
    u * v / (1.0 - theta * (1.0 - u) * (1.0 - v))
}

/// The AMH copula density `∂²C/∂u∂v`.
pub fn amh_density(theta: f64, u: f64, v: f64) -> Result<f64> {
    check_theta(theta)?;
    check_unit("u", u)?;
    check_unit("v", v)?;
    Ok(amh_density_unchecked(theta, u, v))
}

#[inline]
pub(crate) fn amh_density_unchecked(theta: f64, u: f64, v: f64) -> f64 {
    let d = 1.0 - theta * (1.0 - u) * (1.0 - v);
    let num = 1.0 + theta * ((1.0 + u) * (1.0 + v) - 3.0) + theta * theta * (1.0 - u) * (1.0 - v);
    num / (d * d * d)
}

/// Conditional distribution `P(V ≤ v | U = u) = ∂C/∂u`.
pub fn amh_conditional(theta: f64, u: f64, v: f64) -> f64 {
    let d = 1.0 - theta * (1.0 - u) * (1.0 - v);
    v * (1.0 - theta * (1.0 - v)) / (d * d)
}

/// Solves `∂C/∂u(u, v) = p` for `v ∈ [0, 1]`.
///
/// With `A = 1 − θ(1−u)` and `B = θ(1−u)` the equation is the quadratic
/// `(pB² − θ)v² + (2pAB − (1−θ))v + pA² = 0`, which has exactly one root in
/// the unit interval.
pub fn amh_conditional_inverse(theta: f64, u: f64, p: f64) -> f64 {
    let a = 1.0 - theta * (1.0 - u);
    let b = theta * (1.0 - u);
    let a2 = p * b * b - theta;
    let a1 = 2.0 * p * a * b - (1.0 - theta);
    let a0 = p * a * a;
    let v = if a2.abs() <= 1e-14 * (a1.abs() + a0.abs()) {
        -a0 / a1
    } else {
        let disc = (a1 * a1 - 4.0 * a2 * a0).max(0.0);
        let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
        let r1 = q / a2;
        let r2 = if q != 0.0 { a0 / q } else { r1 };
        let inside = |r: f64| (-1e-12..=1.0 + 1e-12).contains(&r);
        match (inside(r1), inside(r2)) {
            (true, false) => r1,
            (false, true) => r2,
            // both candidates in range only happens at p ∈ {0, 1}
            _ => {
                if (amh_conditional(theta, u, r1.clamp(0.0, 1.0)) - p).abs()
                    <= (amh_conditional(theta, u, r2.clamp(0.0, 1.0)) - p).abs()
                {
                    r1
                } else {
                    r2
                }
            }
        }
    };
    v.clamp(0.0, 1.0)
}

/// One AMH(θ) draw `(u, v)` at the stream's current index.
pub fn sample_amh_pair(theta: f64, stream: SampleStream) -> Result<(f64, f64)> {
    check_theta(theta)?;
    let mut reader = UniformReader::new(stream, 2);
    let u = reader.next();
    let p = reader.next();
    Ok((u, amh_conditional_inverse(theta, u, p)))
}
