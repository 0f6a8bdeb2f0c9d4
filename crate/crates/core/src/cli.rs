//! The `feq` command line.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 optimum on the
//! upper edge of the beta search interval.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ingest::{
    builtin, builtin_datasets, parse_csv_partial, parse_csv_path, IngestError, BUILTINS,
};
use crate::metrics::{gini, lorenz_of_distribution};
use crate::model::GroupedDistribution;
use crate::optimizer::SearchConfig;
use crate::report::{
    analyze, emit_json, emit_lorenz_csv, emit_sweep_csv, emit_trend_csv, render_text,
    AnalysisOptions, AnalysisReport,
};
use crate::welfare::WelfareDerivationRule;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BOUNDARY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "feq",
    version,
    about = "Welfare-maximizing income distributions from grouped income shares"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find the welfare-maximizing distribution and compare it with the actual one.
    Analyze(AnalyzeArgs),
    /// Analyze every (label, year) in a file and emit a Gini/beta trend table.
    Series(SeriesArgs),
    /// Print grouped-data Gini coefficients without optimizing.
    Gini(InputArgs),
    /// List the built-in datasets.
    Datasets,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Built-in dataset name (see `feq datasets`); `all` selects every one.
    #[arg(long, conflicts_with = "path")]
    pub builtin: Option<String>,
    /// CSV file with header `label,year,group_index,population_weight,income_share`.
    #[arg(required_unless_present = "builtin")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Upper end of the beta search interval.
    #[arg(long, default_value_t = 1.0)]
    pub beta_max: f64,
    /// Number of grid points in the beta sweep.
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
    /// Explicit critical low income (requires --H).
    #[arg(long = "L", requires = "high")]
    pub low: Option<f64>,
    /// Explicit critical high income (requires --L).
    #[arg(long = "H", requires = "low")]
    pub high: Option<f64>,
    /// Decimal places beta* is rounded to before evaluating the optimal distribution.
    #[arg(long, default_value_t = 3, conflicts_with = "exact_beta")]
    pub beta_decimals: u32,
    /// Evaluate the optimal distribution at the unrounded beta*.
    #[arg(long)]
    pub exact_beta: bool,
}

impl SearchArgs {
    fn options(&self) -> AnalysisOptions {
        let rule = match (self.low, self.high) {
            (Some(low), Some(high)) => WelfareDerivationRule::Explicit { low, high },
            _ => WelfareDerivationRule::QuintileDefault,
        };
        AnalysisOptions {
            rule,
            search: SearchConfig {
                beta_max: self.beta_max,
                grid_points: self.grid_points,
                ..SearchConfig::default()
            },
            beta_decimals: (!self.exact_beta).then_some(self.beta_decimals),
            ..AnalysisOptions::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Emit the full report as JSON instead of a text table.
    #[arg(long)]
    pub json: bool,
    /// Write the (beta, welfare) sweep as CSV.
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
    /// Write actual, optimal and diagonal Lorenz breakpoints as CSV.
    #[arg(long)]
    pub lorenz_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub json: bool,
    /// Write the trend table `year,gini_actual,gini_optimal,beta_star` here
    /// instead of printing it after the reports.
    #[arg(long)]
    pub trend_out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out, err),
        Command::Series(s) => cmd_series(&s, out, err),
        Command::Gini(i) => cmd_gini(&i, out),
        Command::Datasets => cmd_datasets(out),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::input(e)
    }
}

fn resolve_builtin(name: &str) -> Result<Vec<GroupedDistribution>, Failure> {
    if name.eq_ignore_ascii_case("all") {
        return Ok(builtin_datasets());
    }
    builtin(name)
        .map(|d| vec![d])
        .ok_or_else(|| Failure::input(format!("unknown built-in dataset `{name}`")))
}

fn load(input: &InputArgs) -> Result<Vec<GroupedDistribution>, Failure> {
    let dists = match (&input.builtin, &input.path) {
        (Some(name), _) => resolve_builtin(name)?,
        (None, Some(path)) => parse_csv_path(path)?,
        (None, None) => return Err(Failure::input("no input given")),
    };
    if dists.is_empty() {
        return Err(Failure::input("input contains no distributions"));
    }
    Ok(dists)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

/// `sweep.csv` becomes `sweep-china-2016.csv` when several reports share
/// one output option.
fn per_report_path(path: &Path, report: &AnalysisReport, many: bool) -> PathBuf {
    if !many {
        return path.to_path_buf();
    }
    let slug: String = report
        .label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-{slug}-{}.{ext}", report.year),
        None => format!("{stem}-{slug}-{}", report.year),
    };
    path.with_file_name(name)
}

fn render_reports(reports: &[AnalysisReport]) -> String {
    reports
        .iter()
        .map(render_text)
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_analyze(
    args: &AnalyzeArgs,
    out: &mut dyn Write,
    _err: &mut dyn Write,
) -> Result<i32, Failure> {
    let dists = load(&args.input)?;
    let options = args.search.options();
    let mut reports = Vec::with_capacity(dists.len());
    for d in &dists {
        match analyze(d, &options) {
            Ok(r) => reports.push(r),
            Err(e) => {
                let code = if e.is_boundary() {
                    EXIT_BOUNDARY
                } else {
                    EXIT_INPUT
                };
                return Err(Failure {
                    code,
                    message: format!("{} {}: {e}", d.label(), d.year()),
                });
            }
        }
    }

    let many = reports.len() > 1;
    for r in &reports {
        if let Some(path) = &args.sweep_out {
            write_file(&per_report_path(path, r, many), &emit_sweep_csv(&r.sweep))?;
        }
        if let Some(path) = &args.lorenz_out {
            let csv = emit_lorenz_csv(&r.lorenz_actual, &r.lorenz_optimal);
            write_file(&per_report_path(path, r, many), &csv)?;
        }
    }

    let text = if args.json {
        emit_json(&reports)
    } else {
        render_reports(&reports)
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}

fn cmd_series(args: &SeriesArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (dists, mut failures): (Vec<GroupedDistribution>, Vec<String>) = match &args.input {
        InputArgs {
            builtin: Some(name),
            ..
        } => (resolve_builtin(name)?, Vec::new()),
        InputArgs {
            path: Some(path), ..
        } => {
            let file = fs::File::open(path)
                .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
            let (good, bad) = parse_csv_partial(file)?;
            (good, bad.iter().map(ToString::to_string).collect())
        }
        _ => return Err(Failure::input("no input given")),
    };
    let mut code = if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_INPUT
    };

    let options = args.search.options();
    let mut reports = Vec::new();
    for d in &dists {
        match analyze(d, &options) {
            Ok(r) => reports.push(r),
            Err(e) => {
                if code == EXIT_OK {
                    code = if e.is_boundary() {
                        EXIT_BOUNDARY
                    } else {
                        EXIT_INPUT
                    };
                }
                failures.push(format!("{} {}: {e}", d.label(), d.year()));
            }
        }
    }
    for f in &failures {
        let _ = writeln!(err, "skipped: {f}");
    }
    if reports.is_empty() && failures.is_empty() {
        return Err(Failure::input("input contains no distributions"));
    }

    let trend = emit_trend_csv(&reports);
    let mut text = if args.json {
        emit_json(&reports)
    } else {
        render_reports(&reports)
    };
    match &args.trend_out {
        Some(path) => write_file(path, &trend)?,
        None if !args.json => {
            text.push('\n');
            text.push_str(&trend);
        }
        None => {}
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    Ok(code)
}

fn cmd_gini(input: &InputArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let dists = load(input)?;
    let mut text = String::new();
    for d in &dists {
        let curve = lorenz_of_distribution(d)
            .map_err(|e| Failure::input(format!("{} {}: {e}", d.label(), d.year())))?;
        text.push_str(&format!(
            "{}\t{}\t{:.2}\n",
            d.label(),
            d.year(),
            gini(&curve)
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}

fn cmd_datasets(out: &mut dyn Write) -> Result<i32, Failure> {
    let mut text = String::new();
    for b in &BUILTINS {
        let shares: Vec<String> = b.quintile_shares.iter().map(|s| s.to_string()).collect();
        text.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            b.name,
            b.label,
            b.year,
            shares.join(" ")
        ));
    }
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::input(format!("cannot write output: {e}")))?;
    Ok(EXIT_OK)
}
