//! Isoquants and returns-to-scale diagnostics for two-input surfaces.

mod contour;
mod isoquant;
mod scale;

pub use contour::{trace_isoquant_grid, GridSpec};
pub use isoquant::{
    ray_angles, trace_isoquant_analytic, trace_isoquant_rayscan, trace_residual_isoquant_analytic,
    RayScan,
};
pub use scale::{classify_rts, scale_profile, Rts, RtsClass, ScaleProfile};

use serde::Serialize;

/// A point `(w, c)` in the input plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub w: f64,
    pub c: f64,
}

impl Point {
    pub fn new(w: f64, c: f64) -> Self {
        Self { w, c }
    }

    /// Polar angle measured from the `w` axis.
    pub fn angle(&self) -> f64 {
        self.c.atan2(self.w)
    }

    fn dist(&self, o: &Point) -> f64 {
        (self.w - o.w).hypot(self.c - o.c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    AnalyticKink,
    RayRootFind,
    GridContour,
}

impl TraceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceMethod::AnalyticKink => "analytic_kink",
            TraceMethod::RayRootFind => "ray_root_find",
            TraceMethod::GridContour => "grid_contour",
        }
    }
}

/// Points on one level set, ordered by increasing angle from the `w` axis.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoquantTrace {
    pub level: f64,
    pub points: Vec<Point>,
    pub method: TraceMethod,
}

impl IsoquantTrace {
    /// Largest `|f(p) − level|` over the trace.
    pub fn max_level_error<F: Fn(f64, f64) -> f64>(&self, surface: F) -> f64 {
        self.points
            .iter()
            .map(|p| (surface(p.w, p.c) - self.level).abs())
            .fold(0.0, f64::max)
    }
}

/// Signed distance of every interior point from the chord joining its two
/// neighbours. Positive values lie on the origin side of the chord, which is
/// where a convex isoquant bends.
pub fn chord_deviations(points: &[Point]) -> Vec<f64> {
    points
        .windows(3)
        .map(|t| {
            let (a, b, c) = (t[0], t[1], t[2]);
            let (dx, dy) = (c.w - a.w, c.c - a.c);
            let len = dx.hypot(dy);
            if len == 0.0 {
                return 0.0;
            }
            let side = |p: Point| dx * (p.c - a.c) - dy * (p.w - a.w);
            let origin = side(Point::new(0.0, 0.0)).signum();
            side(b) / len * origin
        })
        .collect()
}

/// Symmetric Hausdorff distance between two polylines, with every segment
/// subdivided into 64 parts.
pub fn hausdorff_distance(a: &[Point], b: &[Point]) -> f64 {
    directed(a, b).max(directed(b, a))
}

fn directed(from: &[Point], to: &[Point]) -> f64 {
    densify(from)
        .iter()
        .map(|p| distance_to_polyline(p, to))
        .fold(0.0, f64::max)
}

fn densify(points: &[Point]) -> Vec<Point> {
    const PARTS: usize = 64;
    if points.len() < 2 {
        return points.to_vec();
    }
    let mut out = Vec::with_capacity(points.len() * PARTS);
    for s in points.windows(2) {
        for k in 0..PARTS {
            let t = k as f64 / PARTS as f64;
            out.push(Point::new(
                s[0].w + t * (s[1].w - s[0].w),
                s[0].c + t * (s[1].c - s[0].c),
            ));
        }
    }
    out.push(*points.last().unwrap());
    out
}

fn distance_to_polyline(p: &Point, line: &[Point]) -> f64 {
    if line.len() == 1 {
        return p.dist(&line[0]);
    }
    line.windows(2)
        .map(|s| {
            let (a, b) = (s[0], s[1]);
            let (dx, dy) = (b.w - a.w, b.c - a.c);
            let l2 = dx * dx + dy * dy;
            let t = if l2 == 0.0 {
                0.0
            } else {
                (((p.w - a.w) * dx + (p.c - a.c) * dy) / l2).clamp(0.0, 1.0)
            };
            p.dist(&Point::new(a.w + t * dx, a.c + t * dy))
        })
        .fold(f64::INFINITY, f64::min)
}
