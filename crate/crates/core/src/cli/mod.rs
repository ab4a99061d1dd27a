//! Command-line front-end. One task per invocation; every output file carries
//! the tool version and the fully resolved configuration in its header.

pub mod commands;
pub mod config;
pub mod figures;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use config::{ConfigError, RunConfig};
use output::{render, Format, Header, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Eval,
    Expect,
    Isoquant,
    Rts,
    Figure,
}

impl Task {
    fn as_str(self) -> &'static str {
        match self {
            Task::Eval => "eval",
            Task::Expect => "expect",
            Task::Isoquant => "isoquant",
            Task::Rts => "rts",
            Task::Figure => "figure",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "leontief",
    version,
    about = "Leontief technologies under stochastic competing demand"
)]
pub struct Args {
    pub task: Task,
    /// TOML configuration file; omitted means all defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a configuration value, e.g. `--set task.seed=7`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the `--out` extension, else csv.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Seed for Monte Carlo estimates (overrides `task.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        match e {
            crate::Error::UnknownFigure(id) => CliError::Config(ConfigError::field(
                "task.figure",
                format!(
                    "unknown figure `{id}`; expected one of {}",
                    figures::FIGURES.join(", ")
                ),
            )),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Parses `argv`, runs the task and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn load_config(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let mut cfg = RunConfig::parse(&text, &args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.task.seed = seed;
    }
    if args.task == Task::Figure && cfg.figure.is_none() {
        cfg.figure = Some(Default::default());
    }
    Ok(cfg)
}

/// Runs the task selected in `args` against `cfg`.
pub fn run_task(task: Task, cfg: &RunConfig) -> Result<Table, CliError> {
    match task {
        Task::Eval => commands::cmd_eval(cfg),
        Task::Expect => commands::cmd_expect(cfg),
        Task::Isoquant => commands::cmd_isoquant(cfg),
        Task::Rts => commands::cmd_rts(cfg),
        Task::Figure => figures::cmd_figure(
            &cfg.task.figure,
            cfg.figure.as_ref().expect("figure section resolved"),
        ),
    }
}

fn infer_format(args: &Args) -> Format {
    args.format.unwrap_or_else(|| {
        match args
            .out
            .as_ref()
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
        {
            Some("json") => Format::Json,
            Some("svg") => Format::Svg,
            _ => Format::Csv,
        }
    })
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let format = infer_format(args);
    let table = match args.workers {
        Some(0) => {
            return Err(ConfigError::field("workers", "must be at least 1").into());
        }
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(|| run_task(args.task, &cfg))?,
        None => run_task(args.task, &cfg)?,
    };
    let resolved = cfg.to_toml();
    let header = Header {
        task: args.task.as_str(),
        resolved_config: &resolved,
        config_json: serde_json::to_value(&cfg).map_err(|e| CliError::Runtime(e.to_string()))?,
    };
    for n in &table.notes {
        eprintln!("warning: {n}");
    }
    let text = render(&table, &header, format).map_err(CliError::Runtime)?;
    match &args.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Runtime(e.to_string()))
        }
    }
}
