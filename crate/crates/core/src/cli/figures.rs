//! Data tables behind the figures.
//!
//! Every figure emits rows `figure, series, param, x, y, z`:
//! scale curves put `t` and output in `x`/`y`; isoquants put `w`/`c` in
//! `x`/`y` and the level in `z`; surface grids put `w`/`c` in `x`/`y` and the
//! expected output in `z`. `param` is the quantity that distinguishes the
//! series (scale `v`, level, `y₂` or `θ`).

use rayon::prelude::*;

use super::config::FigureSection;
use super::output::{fmt_f64, Cell, PlotColumns, Table};
use super::CliError;
use crate::demand::DemandModel;
use crate::error::Error;
use crate::expectation::{expected_output_closed_form, expected_output_quadrature};
use crate::geometry::{
    scale_profile, trace_isoquant_analytic, trace_isoquant_rayscan,
    trace_residual_isoquant_analytic, GridSpec, IsoquantTrace,
};
use crate::production::{
    ces_eval, leontief_eval, CesParams, ClampPolicy, InputBundle, TechnologyMatrix,
};

pub const FIGURE_COLUMNS: &[&str] = &["figure", "series", "param", "x", "y", "z"];
pub const FIGURES: &[&str] = &["1a", "1b", "2a", "2b", "3", "4a", "4b", "5a", "5b"];

struct Builder {
    id: &'static str,
    table: Table,
}

impl Builder {
    fn new(id: &'static str, curves: bool) -> Self {
        let mut table = Table::new(FIGURE_COLUMNS);
        if curves {
            table.plot = Some(PlotColumns {
                series: "series",
                x: "x",
                y: "y",
            });
        }
        Self { id, table }
    }

    fn row(&mut self, series: &str, param: f64, x: f64, y: f64, z: Option<f64>) {
        self.table.push(vec![
            self.id.into(),
            series.into(),
            param.into(),
            x.into(),
            y.into(),
            Cell::from(z),
        ]);
    }

    fn trace(&mut self, series: &str, param: f64, tr: &IsoquantTrace) {
        for p in &tr.points {
            self.row(series, param, p.w, p.c, Some(tr.level));
        }
    }
}

pub fn cmd_figure(id: &str, fig: &FigureSection) -> Result<Table, CliError> {
    let id = FIGURES
        .iter()
        .copied()
        .find(|f| *f == id)
        .ok_or_else(|| CliError::from(Error::UnknownFigure(id.to_string())))?;
    let mut notes = Vec::new();
    let mut b = match id {
        "1a" => fig1a(fig)?,
        "1b" => fig1b(fig, &mut notes)?,
        "2a" => fig2a(fig)?,
        "2b" => fig2b(fig)?,
        "3" => fig3(fig)?,
        "4a" => fig4a(fig)?,
        "4b" => fig4b(fig, &mut notes)?,
        "5a" => fig5a(fig)?,
        "5b" => fig5b(fig, &mut notes)?,
        _ => unreachable!("id checked against FIGURES"),
    };
    b.table.notes = notes;
    Ok(b.table)
}

fn unit_base() -> InputBundle {
    InputBundle::pair(1.0, 1.0).expect("valid bundle")
}

fn fig1a(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("1a", true);
    for &v in &fig.ces_scales {
        let p = CesParams::new(1.0, fig.ces_share, fig.ces_rho, v)?;
        let prof = scale_profile(|x| ces_eval(&p, x), &unit_base(), &fig.t_values)?;
        let series = format!("v={}", fmt_f64(v));
        for (t, y) in prof.t_values.iter().zip(&prof.outputs) {
            b.row(&series, v, *t, *y, None);
        }
    }
    Ok(b)
}

fn rayscan<F>(
    fig: &FigureSection,
    surface: F,
    level: f64,
    label: &str,
    notes: &mut Vec<String>,
) -> Result<IsoquantTrace, CliError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let scan = trace_isoquant_rayscan(surface, level, fig.angles, fig.bracket, 1e-12)?;
    for f in &scan.failures {
        notes.push(format!("skipped ray ({label}): {f}"));
    }
    Ok(scan.trace)
}

fn fig1b(fig: &FigureSection, notes: &mut Vec<String>) -> Result<Builder, CliError> {
    let mut b = Builder::new("1b", true);
    let p = CesParams::new(1.0, fig.ces_share, fig.ces_rho, 1.0)?;
    for &level in &fig.levels {
        let series = format!("level={}", fmt_f64(level));
        let surface = |w: f64, c: f64| {
            InputBundle::pair(w, c)
                .and_then(|x| ces_eval(&p, &x))
                .unwrap_or(f64::NAN)
        };
        let tr = rayscan(fig, surface, level, &series, notes)?;
        b.trace(&series, level, &tr);
    }
    Ok(b)
}

fn focal(fig: &FigureSection) -> Result<TechnologyMatrix, CliError> {
    Ok(TechnologyMatrix::single(fig.leontief.clone())?)
}

fn fig2a(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("2a", true);
    let tech = focal(fig)?;
    let prof = scale_profile(|x| leontief_eval(&tech, x), &unit_base(), &fig.t_values)?;
    for (t, y) in prof.t_values.iter().zip(&prof.outputs) {
        b.row("leontief", 1.0, *t, *y, None);
    }
    Ok(b)
}

fn fig2b(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("2b", true);
    let tech = focal(fig)?;
    for &level in &fig.levels {
        let tr = trace_isoquant_analytic(&tech, level, fig.extent)?;
        b.trace(&format!("level={}", fmt_f64(level)), level, &tr);
    }
    Ok(b)
}

fn fig3(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("3", true);
    let tech = TechnologyMatrix::new(vec![fig.leontief.clone(), fig.competing.clone()])?;
    for &y2 in &fig.y2_values {
        for &level in &fig.levels {
            let tr = trace_residual_isoquant_analytic(&tech, &[y2], level, fig.extent)?;
            b.trace(
                &format!("y2={};level={}", fmt_f64(y2), fmt_f64(level)),
                y2,
                &tr,
            );
        }
    }
    Ok(b)
}

fn two_output(fig: &FigureSection) -> Result<TechnologyMatrix, CliError> {
    Ok(TechnologyMatrix::new(vec![
        fig.expected_focal.clone(),
        fig.expected_competing.clone(),
    ])?)
}

fn three_output(fig: &FigureSection) -> Result<TechnologyMatrix, CliError> {
    Ok(TechnologyMatrix::new(vec![
        fig.expected_focal.clone(),
        fig.expected_competing.clone(),
        fig.third_competing.clone(),
    ])?)
}

fn grid_nodes(g: &GridSpec) -> Result<Vec<(f64, f64)>, CliError> {
    g.validate(1)?;
    Ok((0..=g.resolution)
        .flat_map(|i| (0..=g.resolution).map(move |j| (g.w(i), g.c(j))))
        .collect())
}

fn surface_grid<F>(
    b: &mut Builder,
    series: &str,
    param: f64,
    g: &GridSpec,
    f: F,
) -> Result<(), CliError>
where
    F: Fn(&InputBundle) -> crate::Result<f64> + Sync,
{
    let nodes = grid_nodes(g)?;
    let values = nodes
        .par_iter()
        .map(|&(w, c)| f(&InputBundle::pair(w, c)?))
        .collect::<crate::Result<Vec<f64>>>()?;
    for (&(w, c), z) in nodes.iter().zip(values) {
        b.row(series, param, w, c, Some(z));
    }
    Ok(())
}

fn fig4a(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("4a", false);
    let tech = two_output(fig)?;
    surface_grid(&mut b, "expected", 0.0, &fig.grid, |x| {
        expected_output_closed_form(&tech, x, ClampPolicy::Raw).map(|e| e.value)
    })?;
    Ok(b)
}

fn fig4b(fig: &FigureSection, notes: &mut Vec<String>) -> Result<Builder, CliError> {
    let mut b = Builder::new("4b", true);
    let tech = two_output(fig)?;
    // validate once so the closure below only sees well-formed bundles
    expected_output_closed_form(&tech, &unit_base(), ClampPolicy::Raw)?;
    let surface = |w: f64, c: f64| {
        InputBundle::pair(w, c)
            .and_then(|x| expected_output_closed_form(&tech, &x, ClampPolicy::Raw))
            .map_or(f64::NAN, |e| e.value)
    };
    for &level in &fig.expected_levels {
        let series = format!("level={}", fmt_f64(level));
        let tr = rayscan(fig, surface, level, &series, notes)?;
        b.trace(&series, level, &tr);
    }
    Ok(b)
}

fn fig5a(fig: &FigureSection) -> Result<Builder, CliError> {
    let mut b = Builder::new("5a", false);
    let tech = three_output(fig)?;
    for &theta in &fig.thetas {
        let model = DemandModel::amh(theta)?;
        surface_grid(
            &mut b,
            &format!("theta={}", fmt_f64(theta)),
            theta,
            &fig.grid,
            |x| {
                expected_output_quadrature(&tech, x, &model, ClampPolicy::Raw, fig.nodes)
                    .map(|e| e.value)
            },
        )?;
    }
    Ok(b)
}

fn fig5b(fig: &FigureSection, notes: &mut Vec<String>) -> Result<Builder, CliError> {
    let mut b = Builder::new("5b", true);
    let tech = three_output(fig)?;
    for &theta in &fig.thetas {
        let model = DemandModel::amh(theta)?;
        expected_output_quadrature(&tech, &unit_base(), &model, ClampPolicy::Raw, fig.nodes)?;
        let surface = |w: f64, c: f64| {
            InputBundle::pair(w, c)
                .and_then(|x| {
                    expected_output_quadrature(&tech, &x, &model, ClampPolicy::Raw, fig.nodes)
                })
                .map_or(f64::NAN, |e| e.value)
        };
        for &level in &fig.three_output_levels {
            let series = format!("theta={};level={}", fmt_f64(theta), fmt_f64(level));
            let tr = rayscan(fig, surface, level, &series, notes)?;
            b.trace(&series, theta, &tr);
        }
    }
    Ok(b)
}
