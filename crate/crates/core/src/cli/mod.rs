//! Command-line front end: configuration, sweeps, single points and the
//! oracle suite. The `casimir` binary is a thin wrapper around [`run`].

pub mod config;
pub mod output;
pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::force::{period_forces, Component, PeriodForces};
use crate::geometry::PlateGeometry;
use crate::stress::Dimensionality;

pub use config::RunConfig;
use output::{csv_name, fmt9, svg_chart, sweep_csv, write_file, Series, SweepRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

const AFTER_HELP: &str = "\
Configuration is a single JSON document with the blocks geometry, physics,
numerics, path, sweep and output. Every key, its type and its default value
is listed by `casimir schema`; unknown keys are rejected.

Sign convention: force_per_period is the x-component (normal) or
y-component (tangential) of the force on the upper plate for one lateral
period; negative normal force means attraction. force_density is
force_per_period divided by the period.

Exit codes: 0 success, 1 check or computation failure, 2 configuration error.";

#[derive(Debug, Parser)]
#[command(name = "casimir", version, about = "Casimir forces between corrugated plates", after_help = AFTER_HELP)]
pub struct Cli {
    /// JSON run configuration (defaults: a = 2, u = v = 0.5, l = 1, H = 0.5).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding output.dir.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the oracle suite: flat-plate forces, image-series Green function
    /// and path independence on the configured geometry.
    Validate,
    /// Force against shift for every v in the sweep block; writes one CSV
    /// (and optionally one SVG) per dimensionality and component.
    Sweep,
    /// Forces at a single configuration.
    Point {
        /// Lateral shift s.
        #[arg(long, allow_hyphen_values = true)]
        s: Option<f64>,
        /// Valley length v (rack geometry).
        #[arg(long)]
        v: Option<f64>,
        /// Transverse position of the integration line.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
    },
    /// Print the JSON schema of the configuration.
    Schema,
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    pool.install(|| dispatch(&cli, stdout, stderr))
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        config.output.dir = dir.clone();
    }
    Ok(config)
}

fn dispatch(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32 {
    if let Command::Schema = cli.command {
        let schema = schemars::schema_for!(RunConfig);
        let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&schema).unwrap_or_default());
        return EXIT_OK;
    }
    let config = match load(cli) {
        Ok(c) => c,
        Err(e) => return config_error(stderr, &e),
    };
    match &cli.command {
        Command::Validate => cmd_validate(&config, stdout, stderr),
        Command::Sweep => cmd_sweep(&config, stdout, stderr),
        Command::Point { s, v, x0 } => cmd_point(&config, *s, *v, *x0, stdout, stderr),
        Command::Schema => unreachable!(),
    }
}

fn config_error(stderr: &mut (dyn Write + Send), e: &Error) -> i32 {
    let _ = writeln!(stderr, "configuration error: {e}");
    EXIT_CONFIG
}

pub fn cmd_validate(config: &RunConfig, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32 {
    if let Err(e) = config.validate() {
        return config_error(stderr, &e);
    }
    let checks = suite::run_all(config);
    for c in &checks {
        let _ = writeln!(stdout, "{c}");
    }
    let failures = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(stdout, "{} of {} checks passed", checks.len() - failures, checks.len());
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

/// Every (v, s) point of the sweep, in output order.
pub fn sweep_rows(config: &RunConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let shifts = config.shifts()?;
    let jobs: Vec<(Option<f64>, PlateGeometry, f64)> = config
        .members()?
        .into_iter()
        .flat_map(|m| shifts.iter().map(move |&s| (m.v, m.geometry.clone(), s)))
        .collect();
    let cfg = config.solver();
    let path = config.force_path();
    Ok(jobs
        .par_iter()
        .map(|(v, geom, s)| SweepRow {
            v: *v,
            s: *s,
            result: period_forces(&geom.with_shift(*s), &cfg, path).map_err(|e| e.to_string()),
        })
        .collect())
}

/// CSV (and SVG) file contents keyed by file name.
pub fn sweep_files(config: &RunConfig, rows: &[SweepRow]) -> Result<Vec<(String, String)>> {
    let period = config.geometry.period();
    let mut files = Vec::new();
    for &dim in &config.physics.dimensionality {
        for comp in config.components() {
            let name = csv_name(dim, comp);
            files.push((name.clone(), sweep_csv(rows, period, dim, comp)?));
            if config.output.svg {
                let svg = chart(rows, period, dim, comp);
                files.push((name.replace(".csv", ".svg"), svg));
            }
        }
    }
    Ok(files)
}

fn chart(rows: &[SweepRow], period: f64, dim: Dimensionality, comp: Component) -> String {
    let mut series: Vec<Series> = Vec::new();
    let mut current: Option<Option<f64>> = None;
    for row in rows {
        if current != Some(row.v) {
            current = Some(row.v);
            let label = row.v.map_or_else(|| "profile".to_string(), |v| format!("v = {}", fmt9(v)));
            series.push(Series { label, points: Vec::new() });
        }
        let point = row.result.as_ref().ok().map(|f| (row.s, f.get(dim, comp).value));
        series.last_mut().unwrap().points.push(point);
    }
    let title = format!("{} force per period, {}", comp.label(), dim.label());
    let y_label = match comp {
        Component::Normal => "F_n per period (negative: attraction)",
        Component::Tangential => "F_t per period",
    };
    svg_chart(&title, y_label, period, &series)
}

pub fn cmd_sweep(config: &RunConfig, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32 {
    if config.sweep.is_none() {
        return config_error(stderr, &Error::Config("the sweep command needs a sweep block".into()));
    }
    let rows = match sweep_rows(config) {
        Ok(r) => r,
        Err(e) => return config_error(stderr, &e),
    };
    let files = match sweep_files(config, &rows) {
        Ok(f) => f,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    for (name, contents) in &files {
        match write_file(&config.output.dir, name, contents) {
            Ok(path) => {
                let _ = writeln!(stdout, "wrote {}", path.display());
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    let failures: Vec<&SweepRow> = rows.iter().filter(|r| r.result.is_err()).collect();
    for r in &failures {
        let _ = writeln!(stderr, "point s = {} failed: {}", fmt9(r.s), r.result.as_ref().unwrap_err());
    }
    if failures.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    }
}

/// The configuration a `point` run uses after applying overrides.
pub fn point_config(config: &RunConfig, s: Option<f64>, v: Option<f64>, x0: Option<f64>) -> Result<RunConfig> {
    let mut c = config.clone();
    c.sweep = None;
    if let Some(s) = s {
        c.geometry = c.geometry.with_shift(s);
    }
    if let Some(v) = v {
        match &c.geometry {
            PlateGeometry::Rack(g) => c.geometry = g.with_valley(v).into(),
            PlateGeometry::Explicit(_) => return Err(Error::Config("--v applies to rack geometry only".into())),
        }
    }
    if x0.is_some() {
        c.path.x0 = x0;
    }
    c.validate()?;
    Ok(c)
}

pub fn point_line(config: &RunConfig, forces: &PeriodForces, seconds: f64) -> String {
    let mut parts = vec![format!("s={}", fmt9(forces.shift))];
    if let PlateGeometry::Rack(g) = &config.geometry {
        parts.push(format!("v={}", fmt9(g.valley_length)));
    }
    parts.push(format!("x0={}", fmt9(forces.path.x0)));
    for &dim in &config.physics.dimensionality {
        let n = forces.get(dim, Component::Normal);
        let t = forces.get(dim, Component::Tangential);
        parts.push(format!(
            "{}: F_n={} err={} F_t={} err={}",
            dim.label(),
            fmt9(n.value),
            fmt9(n.error),
            fmt9(t.value),
            fmt9(t.error)
        ));
    }
    parts.push(format!("elements={} q_nodes={} time={:.2}s", forces.elements, forces.q_nodes, seconds));
    parts.join("  ")
}

pub fn cmd_point(
    config: &RunConfig,
    s: Option<f64>,
    v: Option<f64>,
    x0: Option<f64>,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> i32 {
    let c = match point_config(config, s, v, x0) {
        Ok(c) => c,
        Err(e) => return config_error(stderr, &e),
    };
    let start = Instant::now();
    match period_forces(&c.geometry, &c.solver(), c.force_path()) {
        Ok(f) => {
            let _ = writeln!(stdout, "{}", point_line(&c, &f, start.elapsed().as_secs_f64()));
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}
