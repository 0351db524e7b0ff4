//! The `bfx` command-line front end.
//!
//! Every computing subcommand writes one [`record::RunRecord`] per point to
//! standard output, as JSON lines or CSV. Errors go to standard error and
//! set the exit status: 1 failed validation, 2 usage, 3 domain, 4 numerical.

pub mod cli;
pub mod commands;
pub mod record;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use bfx_core::validation::{run_validation, ValidationOptions, ValidationReport};
use bfx_core::{QuadConfig, Suite};
use clap::Parser;

use cli::{Cli, Command, Format, ValidateArgs};
use record::{write_records, RunRecord};
use settings::{env_seed, FileConfig};

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Core(bfx_core::Error),
    Io(String),
    /// One or more validation checks failed; the report was still written.
    ValidationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_domain() => {
                if matches!(e, bfx_core::Error::Config(_)) {
                    2
                } else {
                    3
                }
            }
            CliError::Core(_) | CliError::Io(_) => 4,
        }
    }

    /// Short tag used in the `status` column of failed sweep rows.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            1 => "validation-failure",
            2 => "usage-error",
            3 => "domain-error",
            _ => "numerical-error",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::ValidationFailed(n) => write!(f, "{n} validation check(s) failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<bfx_core::Error> for CliError {
    fn from(e: bfx_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Errors are reported on standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bfx: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.global.config.as_deref())?;
    if let Some(n) = cli.global.threads.or(file.threads) {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        // a pool already exists when run() is called twice in one process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let stdout = std::io::stdout();
    match &cli.command {
        Command::Validate(v) => validate(v, &file, cli.global.format, stdout.lock()),
        Command::Sweep(s) => {
            let format = cli.global.format.unwrap_or(Format::Csv);
            let (records, worst) = sweep(&s.rest, &file, cli.global.timing)?;
            write_records(stdout.lock(), &records, format)?;
            worst.map_or(Ok(()), Err)
        }
        cmd => {
            let records = compute_timed(cmd, &file, cli.global.timing)?;
            write_records(
                stdout.lock(),
                &records,
                cli.global.format.unwrap_or(Format::Json),
            )
        }
    }
}

fn compute_timed(
    cmd: &Command,
    file: &FileConfig,
    timing: bool,
) -> Result<Vec<RunRecord>, CliError> {
    let start = Instant::now();
    let mut records = commands::run_compute(cmd, file)?;
    if timing {
        let ms = start.elapsed().as_millis() as u64;
        for r in &mut records {
            r.wall_ms = Some(ms);
        }
    }
    Ok(records)
}

/// A `start:stop:count` range: `count` evenly spaced points including both ends.
pub fn parse_range(s: &str) -> Option<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return None;
    }
    let start: f64 = parts[0].trim().parse().ok()?;
    let stop: f64 = parts[1].trim().parse().ok()?;
    let count: usize = parts[2].trim().parse().ok()?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return None;
    }
    if count == 1 {
        return Some(vec![start]);
    }
    let h = (stop - start) / (count - 1) as f64;
    Some(
        (0..count)
            .map(|i| {
                if i + 1 == count {
                    stop
                } else {
                    start + h * i as f64
                }
            })
            .collect(),
    )
}

/// Expands the single range argument and evaluates each point in grid
/// order. Failed points become rows carrying `status` and `message`; the
/// most severe failure is returned alongside.
fn sweep(
    rest: &[String],
    file: &FileConfig,
    timing: bool,
) -> Result<(Vec<RunRecord>, Option<CliError>), CliError> {
    // accept `name=a:b:n` as shorthand for `--name a:b:n`
    let mut argv: Vec<String> = Vec::with_capacity(rest.len() + 1);
    for a in rest {
        match a.split_once('=') {
            Some((k, v)) if !a.starts_with('-') && parse_range(v).is_some() => {
                argv.push(format!("--{k}"));
                argv.push(v.to_string());
            }
            _ => argv.push(a.clone()),
        }
    }
    let ranges: Vec<usize> = (1..argv.len())
        .filter(|&i| argv[i - 1].starts_with("--") && parse_range(&argv[i]).is_some())
        .collect();
    let idx = match ranges.as_slice() {
        [i] => *i,
        [] => {
            return Err(CliError::Usage(
                "sweep needs one flag value of the form start:stop:count".into(),
            ))
        }
        _ => {
            return Err(CliError::Usage(
                "sweep takes exactly one start:stop:count range".into(),
            ))
        }
    };
    let points = parse_range(&argv[idx]).expect("checked above");
    let mut records = Vec::with_capacity(points.len());
    let mut worst: Option<CliError> = None;
    for x in points {
        let mut point = argv.clone();
        point[idx] = x.to_string();
        let parsed =
            Cli::try_parse_from(std::iter::once("bfx".to_string()).chain(point.iter().cloned()))
                .map_err(|e| {
                    CliError::Usage(e.to_string().lines().next().unwrap_or_default().to_string())
                })?;
        if matches!(parsed.command, Command::Validate(_) | Command::Sweep(_)) {
            return Err(CliError::Usage(
                "sweep applies to computing subcommands only".into(),
            ));
        }
        match compute_timed(&parsed.command, file, timing) {
            Ok(rs) => records.extend(rs),
            Err(e) => {
                let name = argv.first().cloned().unwrap_or_default();
                let params: Vec<(&str, String)> = point
                    .windows(2)
                    .filter(|w| w[0].starts_with("--") && !w[1].starts_with("--"))
                    .map(|w| (w[0].trim_start_matches('-'), w[1].clone()))
                    .collect();
                let mut r = RunRecord::new(&name, &params, 0);
                r.status = Some(e.kind().to_string());
                r.message = Some(e.to_string());
                if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                    worst = Some(e);
                }
                records.push(r);
            }
        }
    }
    Ok((records, worst))
}

fn validate<W: Write>(
    v: &ValidateArgs,
    file: &FileConfig,
    format: Option<Format>,
    mut out: W,
) -> Result<(), CliError> {
    let suite: Suite = v
        .suite
        .parse()
        .map_err(|e: bfx_core::Error| CliError::Usage(e.to_string()))?;
    let mut quad = QuadConfig::default();
    if let Some(a) = file.abs_tol {
        quad.abs_tol = a;
    }
    if let Some(r) = file.rel_tol {
        quad.rel_tol = r;
    }
    if let Some(m) = file.max_subdivisions {
        quad.max_subdivisions = m;
    }
    let defaults = ValidationOptions::default();
    let opts = ValidationOptions {
        suite,
        seed: env_seed()?
            .or(v.seed)
            .or(file.seed)
            .unwrap_or(defaults.seed),
        tol_multiplier: v.tol,
        inject_bias: v.inject_bias,
        n_paths: v.paths.or(file.paths).unwrap_or(defaults.n_paths),
        n_steps: v.steps.or(file.steps).unwrap_or(defaults.n_steps),
        quad,
    };
    opts.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_validation(&opts)?;
    if let Some(path) = &v.report {
        let text =
            serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match format {
        None => print_table(&report, &mut out).map_err(io)?,
        Some(Format::Json) => {
            serde_json::to_writer(&mut out, &report).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out).map_err(io)?;
        }
        Some(Format::Csv) => {
            let mut w = csv::Writer::from_writer(&mut out);
            let e = |e: csv::Error| CliError::Io(e.to_string());
            w.write_record([
                "criterion",
                "suite",
                "name",
                "observed",
                "reference",
                "discrepancy",
                "se_units",
                "tolerance",
                "pass",
                "note",
            ])
            .map_err(e)?;
            for c in &report.checks {
                w.write_record([
                    c.criterion.to_string(),
                    c.suite.name().to_string(),
                    c.name.clone(),
                    c.observed.to_string(),
                    c.reference.to_string(),
                    c.discrepancy.to_string(),
                    c.se_units.map(|x| x.to_string()).unwrap_or_default(),
                    c.tolerance.to_string(),
                    c.pass.to_string(),
                    c.note.clone(),
                ])
                .map_err(e)?;
            }
            w.flush().map_err(io)?;
        }
    }
    out.flush().map_err(io)?;
    let failed = report.failures().count();
    if failed > 0 {
        return Err(CliError::ValidationFailed(failed));
    }
    Ok(())
}

fn print_table<W: Write>(report: &ValidationReport, out: &mut W) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<4} {:<10} {:<52} {:>14} {:>14} {:>11} {:>8} {:>11}  result",
        "crit", "suite", "check", "observed", "reference", "|d|", "SE", "tol"
    )?;
    for c in &report.checks {
        let se = c
            .se_units
            .map(|x| format!("{x:.2}"))
            .unwrap_or_else(|| "-".into());
        writeln!(
            out,
            "{:<4} {:<10} {:<52} {:>14.8} {:>14.8} {:>11.3e} {:>8} {:>11.3e}  {}",
            c.criterion,
            c.suite.name(),
            c.name,
            c.observed,
            c.reference,
            c.discrepancy.abs(),
            se,
            c.tolerance,
            if c.pass { "pass" } else { "FAIL" }
        )?;
    }
    writeln!(out)?;
    for a in &report.arbitrations {
        writeln!(
            out,
            "arbitration: {} (MC {:.6} ± {:.6})",
            a.topic, a.mc_value, a.mc_std_error
        )?;
        for cand in &a.candidates {
            let v = cand
                .value
                .map(|x| format!("{x:.6}"))
                .unwrap_or_else(|| "n/a".into());
            let se = cand
                .se_units
                .map(|x| format!("{x:.2} SE"))
                .unwrap_or_else(|| cand.note.clone());
            writeln!(out, "  {:<14} {:>12}  {}", cand.name, v, se)?;
        }
        writeln!(out, "  chosen: {}", a.chosen)?;
    }
    writeln!(out)?;
    for s in report.criteria() {
        writeln!(
            out,
            "criterion {:>2}: {} ({} checks, {} failed)",
            s.criterion,
            if s.failures == 0 { "PASS" } else { "FAIL" },
            s.checks,
            s.failures
        )?;
    }
    Ok(())
}
