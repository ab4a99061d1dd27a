//! Output tables and their CSV / JSON / SVG renderings.
//!
//! Every file starts with a header recording the tool version, the task and
//! the resolved configuration. Floating-point cells use the shortest
//! representation that round-trips to the same `f64`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            Cell::Int(n) => (*n).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Empty => serde_json::Value::Null,
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) if x.is_finite() => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Shortest round-trip decimal form of `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Which columns a polyline plot is drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotColumns {
    pub series: &'static str,
    pub x: &'static str,
    pub y: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#` header lines (diagnostics such as skipped rays).
    pub notes: Vec<String>,
    pub plot: Option<PlotColumns>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
            notes: Vec::new(),
            plot: None,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

/// Metadata written into every output header.
#[derive(Debug, Clone)]
pub struct Header<'a> {
    pub task: &'a str,
    pub resolved_config: &'a str,
    pub config_json: serde_json::Value,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn header_lines(h: &Header<'_>, notes: &[String]) -> Vec<String> {
    let mut lines = vec![
        format!("leontief {VERSION}"),
        format!("task: {}", h.task),
        "resolved config:".to_string(),
    ];
    lines.extend(h.resolved_config.lines().map(|l| format!("  {l}")));
    lines.extend(notes.iter().cloned());
    lines
}

pub fn render(table: &Table, header: &Header<'_>, format: Format) -> Result<String, String> {
    match format {
        Format::Csv => Ok(render_csv(table, header)),
        Format::Json => Ok(render_json(table, header)),
        Format::Svg => render_svg(table, header),
    }
}

fn render_csv(table: &Table, header: &Header<'_>) -> String {
    let mut out = String::new();
    for l in header_lines(header, &table.notes) {
        let _ = writeln!(out, "# {l}");
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::csv))
            .expect("in-memory write");
    }
    let body = w.into_inner().expect("in-memory write");
    out.push_str(std::str::from_utf8(&body).expect("utf-8 fields"));
    out
}

fn render_json(table: &Table, header: &Header<'_>) -> String {
    let records: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: serde_json::Map<String, serde_json::Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.to_string(), v.json()))
                .collect();
            serde_json::Value::Object(obj)
        })
        .collect();
    let doc = serde_json::json!({
        "tool": "leontief",
        "version": VERSION,
        "task": header.task,
        "config": header.config_json,
        "notes": table.notes,
        "columns": table.columns,
        "records": records,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON serialization");
    s.push('\n');
    s
}

fn render_svg(table: &Table, header: &Header<'_>) -> Result<String, String> {
    let plot = table
        .plot
        .ok_or_else(|| "this task has no plottable columns; use csv or json".to_string())?;
    let (xi, yi) = (
        table.column(plot.x).expect("plot column"),
        table.column(plot.y).expect("plot column"),
    );
    let si = table.column(plot.series).expect("plot column");

    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for row in &table.rows {
        let (Some(x), Some(y)) = (row[xi].as_f64(), row[yi].as_f64()) else {
            continue;
        };
        let name = row[si].csv();
        match series.last_mut() {
            Some((n, pts)) if *n == name => pts.push((x, y)),
            _ => series.push((name, vec![(x, y)])),
        }
    }
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err("no finite points to plot".into());
    }
    let (sx, sy) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    const SIZE: f64 = 400.0;
    const PAD: f64 = 20.0;
    let map = |x: f64, y: f64| {
        (
            PAD + (x - x0) / sx * SIZE,
            PAD + SIZE - (y - y0) / sy * SIZE,
        )
    };

    let mut out = String::new();
    let _ = writeln!(out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(out, "<!--");
    for l in header_lines(header, &table.notes) {
        let _ = writeln!(out, "  {}", l.replace("--", "- -"));
    }
    let _ = writeln!(out, "-->");
    let dim = SIZE + 2.0 * PAD;
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{dim}\" height=\"{dim}\" viewBox=\"0 0 {dim} {dim}\">"
    );
    for (name, pts) in &series {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| {
                let (px, py) = map(x, y);
                format!("{px:.3},{py:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            "  <polyline data-series=\"{}\" fill=\"none\" stroke=\"black\" points=\"{}\"/>",
            xml_escape(name),
            coords.join(" ")
        );
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Header<'static> {
        Header {
            task: "eval",
            resolved_config: "[task]\nseed = 42\n",
            config_json: serde_json::json!({"task": {"seed": 42}}),
        }
    }

    #[test]
    fn shortest_round_trip() {
        for x in [0.1, 19.0 / 30.0, 1e-20, 2.5, 1.0, -0.0, 123456789.125] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.65), "0.65");
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.5.into(), "x,y".into()]);
        t.push(vec![Cell::Empty, 3usize.into()]);
        let s = render(&t, &header(), Format::Csv).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], format!("# leontief {VERSION}"));
        assert!(lines.contains(&"#   seed = 42"));
        let body: Vec<&&str> = lines.iter().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body, [&"a,b", &"1.5,\"x,y\"", &",3"]);
    }

    #[test]
    fn json_records_keyed_by_column() {
        let mut t = Table::new(&["w", "note"]);
        t.push(vec![0.25.into(), Cell::Empty]);
        let s = render(&t, &header(), Format::Json).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["records"][0]["w"], 0.25);
        assert!(v["records"][0]["note"].is_null());
        assert_eq!(v["config"]["task"]["seed"], 42);
    }

    #[test]
    fn svg_needs_plot_columns() {
        let mut t = Table::new(&["s", "x", "y"]);
        t.push(vec!["a".into(), 0.0.into(), 0.0.into()]);
        t.push(vec!["a".into(), 1.0.into(), 2.0.into()]);
        assert!(render(&t, &header(), Format::Svg).is_err());
        t.plot = Some(PlotColumns {
            series: "s",
            x: "x",
            y: "y",
        });
        let svg = render(&t, &header(), Format::Svg).unwrap();
        assert!(svg.contains("<polyline data-series=\"a\""));
        assert!(svg.contains("20.000,420.000 420.000,20.000"));
    }
}
