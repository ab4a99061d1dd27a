use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use super::{IsoquantTrace, Point, TraceMethod};
use crate::error::{Error, Result};
use crate::production::TechnologyMatrix;

/// The exact L-shaped isoquant of a two-input Leontief technology: arm along
/// `c = a₂L` out to `w = extent`, kink at `(a₁L, a₂L)`, arm along `w = a₁L`
/// up to `c = extent`.
pub fn trace_isoquant_analytic(
    tech: &TechnologyMatrix,
    level: f64,
    extent: f64,
) -> Result<IsoquantTrace> {
    if tech.outputs() != 1 || tech.inputs() != 2 {
        return Err(Error::ParamDomain(format!(
            "analytic isoquant needs a 1-output, 2-input technology, got {}x{}",
            tech.outputs(),
            tech.inputs()
        )));
    }
    let (a1, a2) = (tech.focal()[0], tech.focal()[1]);
    if a1 <= 0.0 || a2 <= 0.0 {
        return Err(Error::ParamDomain(
            "analytic isoquant needs positive requirements".into(),
        ));
    }
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::ParamDomain(format!(
            "level must be > 0, got {level}"
        )));
    }
    let kink = Point::new(a1 * level, a2 * level);
    if !(extent >= kink.w && extent >= kink.c) {
        return Err(Error::ParamDomain(format!(
            "extent {extent} does not reach the kink ({}, {})",
            kink.w, kink.c
        )));
    }
    Ok(IsoquantTrace {
        level,
        points: vec![Point::new(extent, kink.c), kink, Point::new(kink.w, extent)],
        method: TraceMethod::AnalyticKink,
    })
}

/// Isoquant of the residual Leontief function with competing outputs fixed at
/// `exogenous`: the L-shape of the focal row translated by the inputs those
/// outputs consume, `(Σ r_k1·y_k, Σ r_k2·y_k)`.
pub fn trace_residual_isoquant_analytic(
    tech: &TechnologyMatrix,
    exogenous: &[f64],
    level: f64,
    extent: f64,
) -> Result<IsoquantTrace> {
    crate::production::check_exogenous(tech, exogenous)?;
    let shift: Vec<f64> = (0..tech.inputs())
        .map(|j| {
            exogenous
                .iter()
                .enumerate()
                .map(|(k, y)| tech.row(k + 1)[j] * y)
                .sum()
        })
        .collect();
    let base = trace_isoquant_analytic(&tech.focal_only(), level, extent)?;
    let kink = Point::new(base.points[1].w + shift[0], base.points[1].c + shift[1]);
    if !(extent >= kink.w && extent >= kink.c) {
        return Err(Error::ParamDomain(format!(
            "extent {extent} does not reach the kink ({}, {})",
            kink.w, kink.c
        )));
    }
    Ok(IsoquantTrace {
        level,
        points: vec![Point::new(extent, kink.c), kink, Point::new(kink.w, extent)],
        method: TraceMethod::AnalyticKink,
    })
}

/// `n` ray angles evenly spaced strictly inside `(0, π/2)`; odd `n` includes 45°.
pub fn ray_angles(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (i + 1) as f64 / (n + 1) as f64 * FRAC_PI_2)
        .collect()
}

/// Result of a ray scan: the traced isoquant plus one error per ray on which
/// no point was found.
#[derive(Debug, Clone)]
pub struct RayScan {
    pub trace: IsoquantTrace,
    pub failures: Vec<Error>,
}

/// Finds `surface(r·(cos φ, sin φ)) = level` by bisection on every ray.
pub fn trace_isoquant_rayscan<F>(
    surface: F,
    level: f64,
    angles: usize,
    bracket: (f64, f64),
    rel_tol: f64,
) -> Result<RayScan>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if angles < 3 {
        return Err(Error::ParamDomain(format!(
            "need at least 3 rays, got {angles}"
        )));
    }
    let (r_lo, r_hi) = bracket;
    if !(r_lo >= 0.0 && r_lo < r_hi && r_hi.is_finite()) {
        return Err(Error::ParamDomain(format!(
            "invalid bracket ({r_lo}, {r_hi})"
        )));
    }
    if rel_tol.is_nan() || rel_tol <= 0.0 {
        return Err(Error::ParamDomain(format!(
            "tolerance must be > 0, got {rel_tol}"
        )));
    }
    let results: Vec<Result<Point>> = ray_angles(angles)
        .into_par_iter()
        .map(|phi| ray_root(&surface, level, phi, bracket, rel_tol))
        .collect();
    let mut points = Vec::with_capacity(angles);
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push(e),
        }
    }
    Ok(RayScan {
        trace: IsoquantTrace {
            level,
            points,
            method: TraceMethod::RayRootFind,
        },
        failures,
    })
}

/// Bisection for the level crossing on the ray at angle `phi`.
pub(crate) fn ray_root<F>(
    surface: &F,
    level: f64,
    phi: f64,
    (mut lo, mut hi): (f64, f64),
    rel_tol: f64,
) -> Result<Point>
where
    F: Fn(f64, f64) -> f64,
{
    let (dw, dc) = (phi.cos(), phi.sin());
    let at = |r: f64| surface(r * dw, r * dc);
    let (mut f_lo, mut f_hi) = (at(lo), at(hi));
    if f_lo > f_hi {
        return Err(Error::NonMonotoneRay { angle: phi });
    }
    if !(f_lo <= level && level <= f_hi) {
        return Err(Error::LevelNotBracketed { angle: phi, level });
    }
    if f_lo == level {
        return Ok(Point::new(lo * dw, lo * dc));
    }
    // invariant: f(lo) < level <= f(hi)
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f = at(mid);
        if f < f_lo || f > f_hi {
            return Err(Error::NonMonotoneRay { angle: phi });
        }
        if f == level {
            lo = mid;
            hi = mid;
            break;
        }
        if f < level {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    let r = if (f_hi - level).abs() <= (level - f_lo).abs() {
        hi
    } else {
        lo
    };
    Ok(Point::new(r * dw, r * dc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::production::{leontief_eval, InputBundle};

    fn leontief(a: [f64; 2]) -> impl Fn(f64, f64) -> f64 + Sync {
        move |w, c| (w / a[0]).min(c / a[1])
    }

    #[test]
    fn analytic_kinks() {
        let t = TechnologyMatrix::single(vec![1.0, 2.0]).unwrap();
        let tr = trace_isoquant_analytic(&t, 3.0, 10.0).unwrap();
        assert_eq!(tr.points[1], Point::new(3.0, 6.0));
        assert_eq!(tr.points[0], Point::new(10.0, 6.0));
        assert_eq!(tr.points[2], Point::new(3.0, 10.0));
        assert_eq!(tr.method, TraceMethod::AnalyticKink);

        let t = TechnologyMatrix::single(vec![1.0, 1.0]).unwrap();
        assert_eq!(
            trace_isoquant_analytic(&t, 1.0, 2.0).unwrap().points[1],
            Point::new(1.0, 1.0)
        );

        let t = TechnologyMatrix::single(vec![2.0, 5.0]).unwrap();
        let tr = trace_isoquant_analytic(&t, 2.0, 20.0).unwrap();
        assert_eq!(tr.points[1], Point::new(4.0, 10.0));
        let x = InputBundle::pair(10.0, 10.0).unwrap();
        assert_eq!(leontief_eval(&t, &x).unwrap(), 2.0);
        // the kink itself sits on the level set
        let k = tr.points[1];
        assert_eq!(
            leontief_eval(&t, &InputBundle::pair(k.w, k.c).unwrap()).unwrap(),
            2.0
        );
    }

    #[test]
    fn analytic_rejects_bad_arguments() {
        let t = TechnologyMatrix::single(vec![0.0, 2.0]).unwrap();
        assert!(trace_isoquant_analytic(&t, 1.0, 10.0).is_err());
        let t = TechnologyMatrix::single(vec![1.0, 2.0]).unwrap();
        assert!(trace_isoquant_analytic(&t, 0.0, 10.0).is_err());
        assert!(trace_isoquant_analytic(&t, 3.0, 5.0).is_err());
        let t3 = TechnologyMatrix::single(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(trace_isoquant_analytic(&t3, 1.0, 10.0).is_err());
    }

    #[test]
    fn residual_kink_is_shifted_by_consumed_inputs() {
        let t = TechnologyMatrix::new(vec![vec![1.0, 2.0], vec![0.5, 0.25]]).unwrap();
        let tr = trace_residual_isoquant_analytic(&t, &[2.0], 1.5, 10.0).unwrap();
        assert_eq!(tr.points[1], Point::new(1.5 + 1.0, 3.0 + 0.5));
        for p in &tr.points {
            let x = InputBundle::pair(p.w, p.c).unwrap();
            let y = crate::production::residual_leontief(&t, &x, &[2.0], crate::ClampPolicy::Raw)
                .unwrap();
            assert_eq!(y, 1.5);
        }
    }

    #[test]
    fn rayscan_finds_leontief_kink_on_diagonal() {
        let scan =
            trace_isoquant_rayscan(leontief([1.0, 1.0]), 1.0, 3, (0.0, 10.0), 1e-12).unwrap();
        assert!(scan.failures.is_empty());
        let p = scan.trace.points[1];
        assert!(
            (p.w - 1.0).abs() < 1e-10 && (p.c - 1.0).abs() < 1e-10,
            "{p:?}"
        );
        assert!(scan.trace.max_level_error(leontief([1.0, 1.0])) < 1e-10);
        let angles: Vec<f64> = scan.trace.points.iter().map(Point::angle).collect();
        assert!(angles.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rayscan_reports_unbracketed_rays() {
        // near-axis rays never reach level 1 inside r <= 2
        let scan = trace_isoquant_rayscan(leontief([1.0, 1.0]), 1.0, 9, (0.0, 2.0), 1e-10).unwrap();
        assert!(!scan.failures.is_empty());
        assert!(scan
            .failures
            .iter()
            .all(|e| matches!(e, Error::LevelNotBracketed { .. })));
        assert_eq!(scan.trace.points.len() + scan.failures.len(), 9);
    }

    #[test]
    fn rayscan_detects_non_monotone_ray() {
        let bump = |w: f64, c: f64| {
            let r = w.hypot(c);
            (r * 6.0).sin() + 0.1 * r
        };
        let scan = trace_isoquant_rayscan(bump, 0.3, 3, (0.0, 3.0), 1e-10).unwrap();
        assert!(scan
            .failures
            .iter()
            .any(|e| matches!(e, Error::NonMonotoneRay { .. })));
        let dec = |w: f64, c: f64| -(w + c);
        let scan = trace_isoquant_rayscan(dec, -1.0, 3, (0.0, 3.0), 1e-10).unwrap();
        assert_eq!(scan.failures.len(), 3);
    }

    #[test]
    fn rayscan_argument_checks() {
        assert!(trace_isoquant_rayscan(leontief([1.0, 1.0]), 1.0, 2, (0.0, 2.0), 1e-10).is_err());
        assert!(trace_isoquant_rayscan(leontief([1.0, 1.0]), 1.0, 5, (2.0, 1.0), 1e-10).is_err());
    }
}
