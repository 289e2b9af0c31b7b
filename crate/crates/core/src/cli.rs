//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on input errors (missing files, schema
//! violations, bad flags), 2 on numeric failures (non-positive-definite
//! matrices, degenerate frontiers, undefined tangency).

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use tempfile::NamedTempFile;

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::report::{
    analyze_window, analyze_windows, curve_csvs, default_return_span, emit_frontier_curve, render_summary, render_svg,
    render_tables, replay_matrices, summarize, FrontierCurve, ReplayInput, TableFormat, WindowReport,
    DEFAULT_CURVE_POINTS,
};

pub const OUTPUT_DIR_ENV: &str = "FRONTERA_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "frontera-output";

#[derive(Debug, Parser)]
#[command(name = "frontera", version, about = "Minimum-variance portfolio analytics over date windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output directory; overrides FRONTERA_OUTPUT_DIR and the config's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline on price CSVs for every (or one) configured window.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        window: Option<String>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the frontier pipeline from a published covariance matrix and expected returns.
    Replay {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Write frontier and capital-market-line curves for one window.
    Frontier {
        #[arg(long, conflicts_with = "input", requires = "window")]
        config: Option<PathBuf>,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, required_unless_present = "config")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
        points: usize,
        /// Target-return span as LO:HI in decimal units, e.g. 0:0.08.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_span)]
        span: Option<(f64, f64)>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cross-window summary tables.
    Summarize {
        #[arg(long, conflicts_with = "input")]
        config: Option<PathBuf>,
        #[arg(long, num_args = 1.., required_unless_present = "config")]
        input: Vec<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn parse_span(text: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{text}`"))?;
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("span {lo}:{hi} must satisfy LO < HI"));
    }
    Ok((lo, hi))
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr; written paths to stdout.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(written) => {
            let mut stdout = std::io::stdout().lock();
            for p in written {
                let _ = writeln!(stdout, "{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

fn output_dir(flag: Option<PathBuf>, config: Option<&AnalysisConfig>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

fn read_replay(path: &Path) -> Result<ReplayInput> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::InvalidInput(format!("input not found: {}", path.display())),
        _ => Error::InvalidInput(format!("cannot read {}: {e}", path.display())),
    })?;
    ReplayInput::from_json(&text).map_err(|e| match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn execute(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Analyze { config, window, out } => {
            let cfg = AnalysisConfig::load(&config)?;
            let reports = analyze_config(&cfg, window.as_deref())?;
            let mut files = Vec::new();
            for r in &reports {
                files.extend(window_files(r)?);
            }
            files.extend(summary_files(&reports)?);
            write_all(&output_dir(out.output_dir, Some(&cfg)), files)
        }
        Command::Replay { input, out } => {
            let report = replay_matrices(&read_replay(&input)?)?;
            write_all(&output_dir(out.output_dir, None), window_files(&report)?)
        }
        Command::Frontier {
            config,
            window,
            input,
            points,
            span,
            out,
        } => {
            let (report, cfg) = match (config, input) {
                (Some(config), _) => {
                    let cfg = AnalysisConfig::load(&config)?;
                    let name = window.ok_or_else(|| Error::InvalidInput("--window is required with --config".into()))?;
                    let report = analyze_window(&cfg.load_panel()?, cfg.window(&name)?, cfg.trading_days)?;
                    (report, Some(cfg))
                }
                (None, Some(input)) => (replay_matrices(&read_replay(&input)?)?, None),
                (None, None) => return Err(Error::InvalidInput("either --config or --input is required".into())),
            };
            let span = span.unwrap_or_else(|| default_return_span(&report.expected_returns));
            let curve = emit_frontier_curve(&report, points, span)?;
            write_all(&output_dir(out.output_dir, cfg.as_ref()), curve_files(&report.window.name, &curve))
        }
        Command::Summarize { config, input, out } => {
            let (reports, cfg) = match config {
                Some(config) => {
                    let cfg = AnalysisConfig::load(&config)?;
                    (analyze_config(&cfg, None)?, Some(cfg))
                }
                None => (
                    input
                        .iter()
                        .map(|p| read_replay(p).and_then(|i| replay_matrices(&i)))
                        .collect::<Result<Vec<_>>>()?,
                    None,
                ),
            };
            write_all(&output_dir(out.output_dir, cfg.as_ref()), summary_files(&reports)?)
        }
    }
}

fn analyze_config(cfg: &AnalysisConfig, window: Option<&str>) -> Result<Vec<WindowReport>> {
    let windows = match window {
        Some(name) => vec![cfg.window(name)?.clone()],
        None => cfg.windows.clone(),
    };
    if windows.is_empty() {
        return Err(Error::InvalidInput("config defines no windows".into()));
    }
    let panel = cfg.load_panel()?;
    analyze_windows(&panel, &windows, cfg.trading_days)
        .into_iter()
        .zip(&windows)
        .map(|(r, w)| {
            r.map_err(|e| Error::InWindow {
                window: w.name.clone(),
                source: Box::new(e),
            })
        })
        .collect()
}

type OutputFile = (String, String);

fn curve_files(name: &str, curve: &FrontierCurve) -> Vec<OutputFile> {
    let (frontier, cml) = curve_csvs(curve);
    vec![
        (format!("{name}.frontier.csv"), frontier),
        (format!("{name}.cml.csv"), cml),
        (format!("{name}.svg"), render_svg(curve)),
    ]
}

/// Tables and the JSON report always; curves and SVG only for viable windows.
fn window_files(report: &WindowReport) -> Result<Vec<OutputFile>> {
    let name = &report.window.name;
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::InvalidInput(format!("serializing report: {e}")))?;
    let mut files = vec![
        (format!("{name}.tables.md"), render_tables(report, TableFormat::Markdown)),
        (format!("{name}.tables.csv"), render_tables(report, TableFormat::Csv)),
        (format!("{name}.report.json"), json + "\n"),
    ];
    if let Some(curve) = &report.curve {
        files.extend(curve_files(name, curve));
    }
    Ok(files)
}

fn summary_files(reports: &[WindowReport]) -> Result<Vec<OutputFile>> {
    let summary = summarize(reports)?;
    Ok(vec![
        ("summary.md".into(), render_summary(&summary, TableFormat::Markdown)),
        ("summary.csv".into(), render_summary(&summary, TableFormat::Csv)),
    ])
}

fn check_file_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && !name.starts_with('.')
        && !name.contains(['/', '\\'])
        && Path::new(name).file_name().map(|f| f == name).unwrap_or(false);
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("window name yields unsafe output file name `{name}`")))
    }
}

/// Writes every file via a temporary sibling and rename. If any write fails,
/// files already renamed into place by this call are removed again.
fn write_all(dir: &Path, files: Vec<OutputFile>) -> Result<Vec<PathBuf>> {
    for (name, _) in &files {
        check_file_name(name)?;
    }
    let io = |what: &str, p: &Path, e: std::io::Error| Error::InvalidInput(format!("{what} {}: {e}", p.display()));
    fs::create_dir_all(dir).map_err(|e| io("cannot create", dir, e))?;

    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| {
        for (name, contents) in &files {
            let target = dir.join(name);
            let mut tmp = NamedTempFile::new_in(dir).map_err(|e| io("cannot create temporary file in", dir, e))?;
            tmp.write_all(contents.as_bytes()).map_err(|e| io("cannot write", tmp.path(), e))?;
            tmp.persist(&target).map_err(|e| io("cannot write", &target, e.error))?;
            written.push(target);
        }
        Ok(())
    })();
    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            Err(e)
        }
    }
}
