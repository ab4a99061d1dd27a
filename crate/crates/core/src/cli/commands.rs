//! The `eval`, `expect`, `isoquant` and `rts` tasks.

use rayon::prelude::*;

use super::config::{ConfigError, FunctionKind, IsoquantKind, RunConfig};
use super::output::{fmt_f64, Cell, PlotColumns, Table};
use super::CliError;
use crate::expectation::expected_output;
use crate::geometry::{
    classify_rts, scale_profile, trace_isoquant_analytic, trace_isoquant_grid,
    trace_isoquant_rayscan, trace_residual_isoquant_analytic, IsoquantTrace,
};
use crate::production::InputBundle;
use crate::surface::Surface;

pub const EVAL_COLUMNS: &[&str] = &[
    "index",
    "function",
    "clamp",
    "inputs",
    "exogenous",
    "output",
    "std_error",
    "method",
    "n",
];
pub const EXPECT_COLUMNS: &[&str] = &["w", "c", "expected_output", "std_error", "method", "n"];
pub const ISOQUANT_COLUMNS: &[&str] = &["level", "point", "w", "c", "method"];
pub const RTS_COLUMNS: &[&str] = &["t", "output", "elasticity", "classification"];

fn function_name(f: FunctionKind) -> &'static str {
    match f {
        FunctionKind::Leontief => "leontief",
        FunctionKind::Residual => "residual",
        FunctionKind::Ces => "ces",
        FunctionKind::Expected => "expected",
    }
}

/// The surface selected by `task.function`.
pub fn build_surface(cfg: &RunConfig) -> Result<Surface, ConfigError> {
    Ok(match cfg.task.function {
        FunctionKind::Ces => Surface::Ces(*cfg.ces()?),
        FunctionKind::Leontief => Surface::Leontief(cfg.technology()?.requirements.clone()),
        FunctionKind::Residual => {
            let t = cfg.technology()?;
            Surface::Residual {
                tech: t.requirements.clone(),
                exogenous: cfg.task.exogenous.clone(),
                clamp: t.clamp,
            }
        }
        FunctionKind::Expected => {
            let t = cfg.technology()?;
            Surface::Expected {
                tech: t.requirements.clone(),
                model: cfg.demand()?.clone(),
                clamp: t.clamp,
                estimator: cfg.task.estimator(),
            }
        }
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn clamp_name(cfg: &RunConfig) -> &'static str {
    match cfg.technology.as_ref().map(|t| t.clamp) {
        Some(crate::production::ClampPolicy::ClampAtZero) => "clamp_at_zero",
        _ => "raw",
    }
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.task.points.is_empty() {
        return Err(ConfigError::field("task.points", "eval needs at least one point").into());
    }
    let surface = build_surface(cfg)?;
    let function = function_name(cfg.task.function);
    let exogenous = match cfg.task.function {
        FunctionKind::Residual => join(&cfg.task.exogenous),
        _ => String::new(),
    };
    let mut table = Table::new(EVAL_COLUMNS);
    for (i, p) in cfg.task.points.iter().enumerate() {
        let x = InputBundle::new(p.clone())?;
        let (output, std_error, method, n) = match &surface {
            Surface::Expected { .. } => {
                let e = surface.estimate(&x)?;
                (
                    e.value,
                    Cell::Num(e.std_error),
                    e.method.as_str(),
                    Cell::Int(e.n_samples),
                )
            }
            _ => (surface.eval(&x)?, Cell::Empty, "exact", Cell::Empty),
        };
        table.push(vec![
            i.into(),
            function.into(),
            clamp_name(cfg).into(),
            join(p).into(),
            exogenous.clone().into(),
            output.into(),
            std_error,
            method.into(),
            n,
        ]);
    }
    Ok(table)
}

pub fn cmd_expect(cfg: &RunConfig) -> Result<Table, CliError> {
    let tech = cfg.technology()?;
    let model = cfg.demand()?;
    let grid = cfg.task.grid;
    if grid.resolution == 0 {
        return Err(ConfigError::field("task.grid.resolution", "must be at least 1").into());
    }
    let estimator = cfg.task.estimator();
    let nodes: Vec<(f64, f64)> = (0..=grid.resolution)
        .flat_map(|i| (0..=grid.resolution).map(move |j| (grid.w(i), grid.c(j))))
        .collect();
    let estimates = nodes
        .par_iter()
        .map(|&(w, c)| {
            let x = InputBundle::pair(w, c)?;
            expected_output(&tech.requirements, &x, model, tech.clamp, estimator)
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let mut table = Table::new(EXPECT_COLUMNS);
    for (&(w, c), e) in nodes.iter().zip(estimates) {
        table.push(vec![
            w.into(),
            c.into(),
            e.value.into(),
            e.std_error.into(),
            e.method.as_str().into(),
            e.n_samples.into(),
        ]);
    }
    Ok(table)
}

/// Traces of every configured level, plus notes for rays that were skipped.
pub fn isoquant_traces(cfg: &RunConfig) -> Result<(Vec<IsoquantTrace>, Vec<String>), CliError> {
    let task = &cfg.task;
    if task.levels.is_empty() {
        return Err(ConfigError::field("task.levels", "need at least one level").into());
    }
    let mut traces = Vec::new();
    let mut notes = Vec::new();
    match task.isoquant_method {
        IsoquantKind::Analytic => {
            let t = cfg.technology()?;
            for &level in &task.levels {
                let trace = match task.function {
                    FunctionKind::Leontief => {
                        trace_isoquant_analytic(&t.requirements.focal_only(), level, task.extent)?
                    }
                    FunctionKind::Residual => trace_residual_isoquant_analytic(
                        &t.requirements,
                        &task.exogenous,
                        level,
                        task.extent,
                    )?,
                    _ => {
                        return Err(ConfigError::field(
                            "task.isoquant_method",
                            "analytic isoquants exist only for leontief and residual functions",
                        )
                        .into())
                    }
                };
                traces.push(trace);
            }
        }
        IsoquantKind::Rayscan => {
            let surface = build_surface(cfg)?;
            for &level in &task.levels {
                let scan = trace_isoquant_rayscan(
                    |w, c| surface.at(w, c),
                    level,
                    task.angles,
                    task.bracket,
                    task.rel_tol,
                )?;
                for f in &scan.failures {
                    notes.push(format!("skipped ray (level {}): {f}", fmt_f64(level)));
                }
                traces.push(scan.trace);
            }
        }
        IsoquantKind::Grid => {
            let surface = build_surface(cfg)?;
            for &level in &task.levels {
                traces.push(trace_isoquant_grid(
                    |w, c| surface.at(w, c),
                    level,
                    task.grid,
                )?);
            }
        }
    }
    Ok((traces, notes))
}

pub fn cmd_isoquant(cfg: &RunConfig) -> Result<Table, CliError> {
    let (traces, notes) = isoquant_traces(cfg)?;
    let mut table = Table::new(ISOQUANT_COLUMNS);
    for tr in &traces {
        for (i, p) in tr.points.iter().enumerate() {
            table.push(vec![
                tr.level.into(),
                i.into(),
                p.w.into(),
                p.c.into(),
                tr.method.as_str().into(),
            ]);
        }
    }
    table.notes = notes;
    table.plot = Some(PlotColumns {
        series: "level",
        x: "w",
        y: "c",
    });
    Ok(table)
}

pub fn cmd_rts(cfg: &RunConfig) -> Result<Table, CliError> {
    let surface = build_surface(cfg)?;
    let base = InputBundle::new(cfg.task.base.clone())?;
    let profile = scale_profile(|x| surface.eval(x), &base, &cfg.task.t_values)?;
    let class = classify_rts(&profile, cfg.task.tolerance).classification;
    let mut table = Table::new(RTS_COLUMNS);
    for ((t, y), e) in profile
        .t_values
        .iter()
        .zip(&profile.outputs)
        .zip(&profile.elasticities)
    {
        table.push(vec![
            (*t).into(),
            (*y).into(),
            (*e).into(),
            class.as_str().into(),
        ]);
    }
    table.plot = Some(PlotColumns {
        series: "classification",
        x: "t",
        y: "output",
    });
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::parse(text, &[]).unwrap()
    }

    fn num(c: &Cell) -> f64 {
        match c {
            Cell::Num(x) => *x,
            other => panic!("not a number: {other:?}"),
        }
    }

    #[test]
    fn eval_examples() {
        let t = cmd_eval(&cfg(
            "[technology]\nrequirements = [[2.0, 5.0]]\n[task]\npoints = [[10.0, 10.0]]\n",
        ))
        .unwrap();
        assert_eq!(num(&t.rows[0][5]), 2.0);

        let t = cmd_eval(&cfg(
            "[technology]\nrequirements = [[1.0, 1.0], [0.6, 0.3]]\n\
             [task]\nfunction = \"residual\"\npoints = [[1.0, 0.8]]\nexogenous = [0.5]\n",
        ))
        .unwrap();
        assert!((num(&t.rows[0][5]) - 0.65).abs() < 1e-15);
        assert_eq!(t.rows[0][4], Cell::Text("0.5".into()));

        let t = cmd_eval(&cfg(
            "[ces]\ntfp = 1.0\nshare = 0.5\nrho = 1.0\nscale = 1.0\n\
             [task]\nfunction = \"ces\"\npoints = [[4.0, 4.0]]\n",
        ))
        .unwrap();
        assert!((num(&t.rows[0][5]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn eval_needs_points_and_sections() {
        let e = cmd_eval(&cfg("[technology]\nrequirements = [[1.0, 1.0]]\n")).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        let e = cmd_eval(&cfg("[task]\npoints = [[1.0, 1.0]]\n")).unwrap_err();
        assert!(matches!(e, CliError::Config(_)));
        let e = cmd_eval(&cfg(
            "[technology]\nrequirements = [[1.0, 1.0]]\n[task]\npoints = [[1.0, 1.0, 1.0]]\n",
        ))
        .unwrap_err();
        assert!(matches!(e, CliError::Runtime(_)));
    }

    #[test]
    fn expect_closed_form_half() {
        let t = cmd_expect(&cfg(
            "[technology]\nrequirements = [[1.0, 1.0], [1.0, 1.0]]\n[demand]\ncount = 1\n\
             [task]\ngrid = { w_range = [1.0, 2.0], c_range = [1.0, 2.0], resolution = 1 }\n",
        ))
        .unwrap();
        assert_eq!(t.rows.len(), 4);
        assert_eq!((num(&t.rows[0][0]), num(&t.rows[0][1])), (1.0, 1.0));
        assert_eq!(num(&t.rows[0][2]), 0.5);
        // row-major: c varies fastest
        assert_eq!((num(&t.rows[1][0]), num(&t.rows[1][1])), (1.0, 2.0));
    }

    #[test]
    fn rts_classifications() {
        let t = cmd_rts(&cfg("[technology]\nrequirements = [[1.0, 2.0]]\n")).unwrap();
        assert!(t.rows.iter().all(|r| r[3] == Cell::Text("Constant".into())));
        let t = cmd_rts(&cfg(
            "[technology]\nrequirements = [[1.0, 1.0], [0.6, 0.3]]\n\
             [task]\nfunction = \"residual\"\nexogenous = [0.5]\nbase = [1.0, 0.8]\n\
             t_values = [1.0, 1.25, 1.5, 2.0]\n",
        ))
        .unwrap();
        assert_eq!(t.rows[0][3], Cell::Text("Increasing".into()));
    }

    #[test]
    fn isoquant_methods() {
        let base = "[technology]\nrequirements = [[1.0, 2.0]]\n[task]\nlevels = [1.0]\n";
        let c = RunConfig::parse(base, &["task.isoquant_method=analytic".into()]).unwrap();
        let t = cmd_isoquant(&c).unwrap();
        assert_eq!((num(&t.rows[1][2]), num(&t.rows[1][3])), (1.0, 2.0));
        let t = cmd_isoquant(&cfg(base)).unwrap();
        assert_eq!(t.rows.len(), 33);
        let c = RunConfig::parse(
            base,
            &[
                "task.isoquant_method=grid".into(),
                "task.grid.resolution=16".into(),
            ],
        )
        .unwrap();
        assert!(!cmd_isoquant(&c).unwrap().rows.is_empty());
        let c = RunConfig::parse(
            "[ces]\ntfp = 1.0\nshare = 0.5\nrho = 1.0\nscale = 1.0\n[task]\nfunction = \"ces\"\n",
            &["task.isoquant_method=analytic".into()],
        )
        .unwrap();
        assert!(matches!(cmd_isoquant(&c).unwrap_err(), CliError::Config(_)));
    }
}
