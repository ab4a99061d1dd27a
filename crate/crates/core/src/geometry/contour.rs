//! Marching-squares extraction of a single level set.
//!
//! A node is inside when `f ≥ level`. Every cell edge joining an inside node
//! to an outside node carries one crossing; the crossing is located by
//! bisection on the surface along that edge, so emitted points lie on the
//! level set up to the bisection tolerance rather than at the linear
//! interpolant. A crossing that falls exactly on an inside node is keyed by
//! the node, so all cells touching it share one vertex. Saddle cells are
//! resolved by evaluating the surface at the cell centre.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{IsoquantTrace, Point, TraceMethod};
use crate::error::{Error, Result};

/// A regular grid of `resolution × resolution` cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub w_range: (f64, f64),
    pub c_range: (f64, f64),
    pub resolution: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, resolution: usize) -> Self {
        Self {
            w_range: (lo, hi),
            c_range: (lo, hi),
            resolution,
        }
    }

    pub fn w(&self, i: usize) -> f64 {
        axis(self.w_range, self.resolution, i)
    }

    pub fn c(&self, j: usize) -> f64 {
        axis(self.c_range, self.resolution, j)
    }

    pub(crate) fn validate(&self, min_resolution: usize) -> Result<()> {
        if self.resolution < min_resolution {
            return Err(Error::ParamDomain(format!(
                "grid resolution must be >= {min_resolution}, got {}",
                self.resolution
            )));
        }
        for (name, (lo, hi)) in [("w", self.w_range), ("c", self.c_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::ParamDomain(format!(
                    "invalid {name} range ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }
}

fn axis((lo, hi): (f64, f64), n: usize, i: usize) -> f64 {
    if i == n {
        hi
    } else {
        lo + (hi - lo) * i as f64 / n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Vertex {
    Node(usize, usize),
    /// edge from node (i, j) to (i+1, j)
    Horizontal(usize, usize),
    /// edge from node (i, j) to (i, j+1)
    Vertical(usize, usize),
}

#[derive(Clone, Copy)]
enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

pub fn trace_isoquant_grid<F>(surface: F, level: f64, grid: GridSpec) -> Result<IsoquantTrace>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    grid.validate(8)?;
    let n = grid.resolution;
    let values: Vec<Vec<f64>> = (0..=n)
        .into_par_iter()
        .map(|i| (0..=n).map(|j| surface(grid.w(i), grid.c(j))).collect())
        .collect();
    let inside = |i: usize, j: usize| values[i][j] >= level;

    let mut segments: Vec<(Vertex, Vertex)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let case = (inside(i, j) as u8)
                | (inside(i + 1, j) as u8) << 1
                | (inside(i + 1, j + 1) as u8) << 2
                | (inside(i, j + 1) as u8) << 3;
            use Side::*;
            let pairs: &[(Side, Side)] = match case {
                0 | 15 => &[],
                1 | 14 => &[(Left, Bottom)],
                2 | 13 => &[(Bottom, Right)],
                3 | 12 => &[(Left, Right)],
                4 | 11 => &[(Right, Top)],
                6 | 9 => &[(Bottom, Top)],
                7 | 8 => &[(Left, Top)],
                5 | 10 => {
                    let center = surface(
                        0.5 * (grid.w(i) + grid.w(i + 1)),
                        0.5 * (grid.c(j) + grid.c(j + 1)),
                    ) >= level;
                    // centre joins the two inside corners when it is inside
                    match (case, center) {
                        (5, true) | (10, false) => &[(Left, Top), (Bottom, Right)],
                        _ => &[(Left, Bottom), (Right, Top)],
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                let va = vertex(&values, level, i, j, a);
                let vb = vertex(&values, level, i, j, b);
                if va != vb {
                    segments.push((va, vb));
                }
            }
        }
    }

    if segments.is_empty() {
        let constant = values.iter().flatten().all(|v| *v == level);
        let diagnostic = if constant {
            "surface is constant at the level over the grid".to_string()
        } else {
            "no grid cell brackets the level".to_string()
        };
        return Err(Error::EmptyLevelSet { level, diagnostic });
    }

    let vertices: Vec<Vertex> = segments
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let located: Vec<Point> = vertices
        .par_iter()
        .map(|v| locate(&surface, &values, level, &grid, *v))
        .collect();
    let position: BTreeMap<Vertex, Point> = vertices.into_iter().zip(located).collect();

    let mut polylines: Vec<Vec<Point>> = chain(&segments)
        .into_iter()
        .map(|keys| {
            let mut pts: Vec<Point> = keys.iter().map(|k| position[k]).collect();
            pts.dedup();
            if pts.len() > 1 && pts[0].angle() > pts[pts.len() - 1].angle() {
                pts.reverse();
            }
            pts
        })
        .collect();
    polylines.sort_by(|a, b| a[0].angle().total_cmp(&b[0].angle()));

    Ok(IsoquantTrace {
        level,
        points: polylines.into_iter().flatten().collect(),
        method: TraceMethod::GridContour,
    })
}

/// The vertex on `side` of cell `(i, j)`.
fn vertex(values: &[Vec<f64>], level: f64, i: usize, j: usize, side: Side) -> Vertex {
    let (edge, a, b) = match side {
        Side::Bottom => (Vertex::Horizontal(i, j), (i, j), (i + 1, j)),
        Side::Top => (Vertex::Horizontal(i, j + 1), (i, j + 1), (i + 1, j + 1)),
        Side::Left => (Vertex::Vertical(i, j), (i, j), (i, j + 1)),
        Side::Right => (Vertex::Vertical(i + 1, j), (i + 1, j), (i + 1, j + 1)),
    };
    for (p, q) in [(a, b), (b, a)] {
        if values[p.0][p.1] == level && values[q.0][q.1] < level {
            return Vertex::Node(p.0, p.1);
        }
    }
    edge
}

fn locate<F>(surface: &F, values: &[Vec<f64>], level: f64, grid: &GridSpec, v: Vertex) -> Point
where
    F: Fn(f64, f64) -> f64,
{
    let (a, b) = match v {
        Vertex::Node(i, j) => return Point::new(grid.w(i), grid.c(j)),
        Vertex::Horizontal(i, j) => ((i, j), (i + 1, j)),
        Vertex::Vertical(i, j) => ((i, j), (i, j + 1)),
    };
    let (out, inn) = if values[a.0][a.1] < level {
        (a, b)
    } else {
        (b, a)
    };
    let mut p_out = Point::new(grid.w(out.0), grid.c(out.1));
    let mut p_in = Point::new(grid.w(inn.0), grid.c(inn.1));
    let (mut f_out, mut f_in) = (values[out.0][out.1], values[inn.0][inn.1]);
    let tol = 1e-13 * level.abs().max(1.0);
    for _ in 0..80 {
        let mid = Point::new(0.5 * (p_out.w + p_in.w), 0.5 * (p_out.c + p_in.c));
        if mid == p_out || mid == p_in {
            break;
        }
        let f = surface(mid.w, mid.c);
        if f >= level {
            p_in = mid;
            f_in = f;
        } else {
            p_out = mid;
            f_out = f;
        }
        if f_in - level <= tol {
            break;
        }
    }
    if (f_in - level).abs() <= (level - f_out).abs() {
        p_in
    } else {
        p_out
    }
}

/// Joins segments sharing a vertex into polylines, starting from open ends.
fn chain(segments: &[(Vertex, Vertex)]) -> Vec<Vec<Vertex>> {
    let mut adj: BTreeMap<Vertex, Vec<usize>> = BTreeMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        adj.entry(a).or_default().push(s);
        adj.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut starts: Vec<Vertex> = adj
        .iter()
        .filter(|(_, e)| e.len() % 2 == 1)
        .map(|(v, _)| *v)
        .collect();
    starts.extend(adj.keys().copied());

    let mut out = Vec::new();
    for start in starts {
        while let Some(&first) = adj[&start].iter().find(|&&s| !used[s]) {
            let mut line = vec![start];
            let mut at = start;
            let mut seg = Some(first);
            while let Some(s) = seg {
                used[s] = true;
                let (a, b) = segments[s];
                at = if a == at { b } else { a };
                line.push(at);
                seg = adj[&at].iter().copied().find(|&s| !used[s]);
            }
            out.push(line);
        }
    }
    out
}
