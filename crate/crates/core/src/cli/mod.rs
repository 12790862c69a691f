//! Command-line front end. Every subcommand resolves a preset plus optional
//! config file into an [`Experiment`], runs it, writes CSV and a `.meta`
//! sidecar next to the output.
//!
//! Exit status: 0 success, 2 configuration or I/O problem, 3 numerical abort.

pub mod experiment;
pub mod runs;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::discrepancy::write_neighborhood_csv;
use crate::error::{Error, Result};
use crate::grid_solver::snapshot_to_csv;
use crate::model::config::KeyValueConfig;
use crate::trajectory::trajectory_to_csv;
pub use experiment::{preset, Experiment, ModelKind, PRESETS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "frozen-vortex", version, about = "Frozen-vortex trajectories and grid experiments")]
struct Cli {
    /// Repeat for more log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    L,
    Beta,
    Sphere,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::L => ModelKind::L,
            Model::Beta => ModelKind::Beta,
            Model::Sphere => ModelKind::Sphere,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the vortex-center trajectory.
    Trajectory {
        /// `key = value` overrides applied on top of the preset.
        config: Option<PathBuf>,
        #[arg(long, default_value = "sec45")]
        preset: String,
        #[arg(long, value_enum)]
        model: Option<Model>,
        /// Also write the analytic l-plane path and report the deviation.
        #[arg(long)]
        closed_form: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a grid experiment and compare the tracked center with theory.
    Simulate {
        config: Option<PathBuf>,
        #[arg(long)]
        preset: String,
        /// Override the number of time steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Radius around the center inside which the residual stays below delta.
    Discrepancy {
        config: Option<PathBuf>,
        #[arg(long, default_value = "sec45")]
        preset: String,
        #[arg(long, value_enum)]
        model: Option<Model>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Residual statistics of the plane and sphere exact solutions.
    SphereCheck {
        config: Option<PathBuf>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// l-plane versus β-plane trajectory difference table.
    Compare {
        config: Option<PathBuf>,
        #[arg(long, default_value = "sec45")]
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_default_env().try_init();
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::BlowUp { last_valid, .. } = &e {
                eprintln!(
                    "last valid state: t = {} x = ({}, {}) v = ({}, {})",
                    last_valid.t, last_valid.x[0], last_valid.x[1], last_valid.v[0], last_valid.v[1]
                );
            }
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BlowUp { .. }
        | Error::Cfl { .. }
        | Error::NegativeDensity { .. }
        | Error::TrackingLost(_)
        | Error::Domain(_) => EXIT_NUMERICAL,
        Error::InvalidParameter { .. }
        | Error::Unsupported(_)
        | Error::Degenerate(_)
        | Error::Precondition(_)
        | Error::Config { .. }
        | Error::Io { .. } => EXIT_CONFIG,
    }
}

/// Preset overlaid with the optional config file.
pub fn resolve(preset_name: &str, config: Option<&Path>) -> Result<Experiment> {
    let mut e = preset(preset_name)?;
    if let Some(path) = config {
        let text = std::fs::read_to_string(path).map_err(|err| Error::io(path, err))?;
        e.apply_config(&KeyValueConfig::parse(&text)?)?;
    }
    Ok(e)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|err| Error::io(dir, err))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|err| Error::io(path, err))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Path of the metadata sidecar written next to `out`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    sibling(out, ".meta")
}

/// `key = value` run metadata: command, build, decision toggles, notes and
/// every resolved config key, plus a hash of the resolved config.
pub fn write_sidecar(path: &Path, command: &str, config_file: Option<&Path>, e: &Experiment, extra: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    let params = e.params()?;
    let mut text = String::new();
    let mut line = |k: &str, v: &str| text.push_str(&format!("{k} = {v}\n"));
    line("command", command);
    line("version", env!("CARGO_PKG_VERSION"));
    line("config_hash", &e.config_hash());
    line(
        "config_file",
        &config_file.map_or_else(|| "none".into(), |p| p.display().to_string()),
    );
    line("decision.c0", if params.c0_overridden() { "override" } else { "derived" });
    line("decision.c0_value", &format!("{:?}", params.c0()));
    line("decision.source_form", &entry(e, "source_form"));
    line("decision.boundary", &entry(e, "boundary"));
    line("decision.ambient_pi", &entry(e, "ambient_pi"));
    line(
        "decision.flux_law",
        if e.flux_coefficient.is_none() && e.flux_exponent.is_none() { "default" } else { "override" },
    );
    if e.coriolis == ModelKind::Sphere {
        line("decision.sphere", "b-member vortex, zero bearing field, positions in radians");
    }
    for (k, v) in extra {
        line(k, v);
    }
    for n in experiment::preset_notes(e) {
        line("note", &n);
    }
    text.push_str("\n[config]\n");
    text.push_str(&e.canonical_text());
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|err| Error::io(path, err))
}

fn entry(e: &Experiment, key: &str) -> String {
    e.entries()
        .into_iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| v)
        .unwrap_or_default()
}

fn io_result(path: &Path, r: std::io::Result<()>) -> Result<()> {
    r.map_err(|err| Error::io(path, err))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Trajectory {
            config,
            preset,
            model,
            closed_form,
            out,
        } => {
            let mut e = resolve(&preset, config.as_deref())?;
            if let Some(m) = model {
                e.coriolis = m.into();
            }
            let run = runs::run_trajectory(&e, closed_form)?;
            trajectory_to_csv(&run.states, &out)?;
            let mut extra = vec![("rows", run.states.len().to_string())];
            if let Some((exact, dev)) = &run.closed_form {
                let path = out.with_extension("closed.csv");
                trajectory_to_csv(exact, &path)?;
                println!("max deviation numeric vs closed form: {dev:e} m");
                extra.push(("closed_form_max_deviation_m", format!("{dev:?}")));
                extra.push(("closed_form_path", path.display().to_string()));
            }
            write_sidecar(&sidecar_path(&out), "trajectory", config.as_deref(), &e, &extra)?;
            println!("wrote {} rows to {}", run.states.len(), out.display());
            Ok(())
        }
        Command::Simulate {
            config,
            preset,
            steps,
            out,
        } => {
            let mut e = resolve(&preset, config.as_deref())?;
            if let Some(s) = steps {
                e.steps = s;
            }
            std::fs::create_dir_all(&out).map_err(|err| Error::io(&out, err))?;
            let outcome = runs::simulate(&e, true)?;
            let relation = outcome.record.config.relation;
            for s in &outcome.record.snapshots {
                if let Some(state) = &s.state {
                    snapshot_to_csv(state, &relation, &out.join(format!("snapshot_{:06}.csv", s.step)))?;
                }
            }
            let centers = out.join("centers.csv");
            io_result(&centers, runs::write_center_csv(&outcome.centers, e.dx, create(&centers)?))?;
            let theory: Vec<_> = outcome.centers.iter().map(|c| c.theory).collect();
            trajectory_to_csv(&theory, &out.join("theory_center.csv"))?;
            let fmt = |v: Option<f64>| v.map_or_else(|| "unavailable".into(), |x| format!("{x:.4}"));
            let extra = [
                ("ambient_pi_level", format!("{:?}", outcome.ambient_pi)),
                ("max_center_deviation_cells", fmt(outcome.max_deviation_cells)),
                ("shape_metric", fmt(outcome.shape_metric)),
                ("relative_mass_change", format!("{:e}", outcome.relative_mass_change)),
            ];
            write_sidecar(&out.join("run.meta"), "simulate", config.as_deref(), &e, &extra)?;
            println!(
                "max center deviation: {} cells; shape metric: {}; relative mass change: {:e}",
                fmt(outcome.max_deviation_cells),
                fmt(outcome.shape_metric),
                outcome.relative_mass_change
            );
            Ok(())
        }
        Command::Discrepancy {
            config,
            preset,
            model,
            delta,
            out,
        } => {
            let mut e = resolve(&preset, config.as_deref())?;
            if let Some(m) = model {
                e.coriolis = m.into();
            }
            if let Some(d) = delta {
                e.delta = d;
            }
            let (_, rows) = runs::run_discrepancy(&e)?;
            io_result(&out, write_neighborhood_csv(&rows, create(&out)?))?;
            write_sidecar(&sidecar_path(&out), "discrepancy", config.as_deref(), &e, &[])?;
            let min = rows.iter().map(|r| r.r_delta).fold(f64::INFINITY, f64::min);
            println!("min r_delta over {} samples: {min} m", rows.len());
            Ok(())
        }
        Command::SphereCheck { config, points, out } => {
            let mut e = resolve("sec45", config.as_deref())?;
            if let Some(n) = points {
                e.sphere_points = n;
            }
            let rows = runs::residual_checks(&e)?;
            io_result(&out, runs::write_residual_csv(&rows, create(&out)?))?;
            write_sidecar(&sidecar_path(&out), "sphere-check", config.as_deref(), &e, &[])?;
            for r in &rows {
                println!("{:<32} max {:.3e} rms {:.3e}", r.case, r.max_residual, r.rms_residual);
            }
            Ok(())
        }
        Command::Compare { config, preset, out } => {
            let e = resolve(&preset, config.as_deref())?;
            let rows = runs::compare_planes(&e)?;
            io_result(&out, runs::write_comparison_csv(&rows, create(&out)?))?;
            write_sidecar(&sidecar_path(&out), "compare", config.as_deref(), &e, &[])?;
            if let Some(last) = rows.last() {
                println!(
                    "separation at t = {} s: {:.1} m ({:.2}% of path length)",
                    last.t,
                    last.separation,
                    100.0 * last.relative()
                );
            }
            Ok(())
        }
    }
}
