use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::commands::{cmd_augment, cmd_perturb, cmd_repr, cmd_sweep, cmd_synth, parse_grid, render_perturb_grid};
use super::{worker_count, AugmentConfig, IoOptions, EXIT_CONFIG, EXIT_FILE_FAILED, EXIT_OK};
use crate::event::SensorGeometry;
use crate::io::FormatTag;
use crate::repr::RasterKind;
use crate::transform::sample::{CenterPolicy, PlanePolicy, Strategy, TauPolicy};
use crate::transform::Plane;
use crate::Error;

#[derive(Debug, Parser)]
#[command(name = "evtaug", version, about = "Spatiotemporal augmentation for event-camera streams")]
pub struct Cli {
    /// Event file format, overriding extension inference (bin, csv, evt).
    #[arg(long, global = true, value_parser = parse_format)]
    format: Option<FormatTag>,
    /// Sensor size as WIDTHxHEIGHT for formats without a header.
    #[arg(long, global = true, value_parser = parse_geometry)]
    geometry: Option<SensorGeometry>,
    /// Where to write the JSON report (default: stdout).
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Augment a batch of event files.
    Augment(AugmentArgs),
    /// Distance of perturbed copies of one file to the original.
    Perturb(PerturbArgs),
    /// Per-angle distance and discard summary over many files.
    Sweep(SweepArgs),
    /// Generate events from a scene config.
    Synth(SynthArgs),
    /// Rasterize an event file.
    Repr(ReprArgs),
}

#[derive(Debug, Args)]
struct AugmentArgs {
    #[arg(long, default_value = "vpt-sts")]
    strategy: Strategy,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_6)]
    theta_max: f64,
    /// `auto` or a positive value in µs per pixel.
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: TauPolicy,
    #[arg(long, default_value = "random", value_parser = parse_plane_policy)]
    plane: PlanePolicy,
    #[arg(long, default_value = "midpoint", value_parser = parse_center)]
    center: CenterPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "prob", default_value_t = 1.0)]
    probability: f64,
    #[arg(long)]
    out: PathBuf,
    /// Worker pool width (capped by EVT_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct PerturbArgs {
    /// Lines of `<plane> <theta> [strategy]`.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, default_value = "count")]
    repr: RasterKind,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: TauPolicy,
    input: PathBuf,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated angles in radians.
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    thetas: Vec<f64>,
    #[arg(long, default_value = "vpt")]
    strategy: Strategy,
    #[arg(long, default_value = "yt")]
    plane: Plane,
    #[arg(long, default_value = "count")]
    repr: RasterKind,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    #[arg(long, default_value = "auto", value_parser = parse_tau)]
    tau: TauPolicy,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    scene: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReprArgs {
    #[arg(long, alias = "repr", default_value = "count")]
    kind: RasterKind,
    #[arg(long, default_value_t = 5)]
    bins: usize,
    /// `.txt` for a text grid, otherwise RAS1 binary.
    #[arg(long)]
    out: PathBuf,
    input: PathBuf,
}

fn parse_format(s: &str) -> Result<FormatTag, String> {
    s.parse().map_err(|e: crate::io::CodecError| e.to_string())
}

fn parse_geometry(s: &str) -> Result<SensorGeometry, String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let w: u16 = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: u16 = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
    SensorGeometry::new(w, h).map_err(|e| e.to_string())
}

fn parse_tau(s: &str) -> Result<TauPolicy, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(TauPolicy::Auto);
    }
    let v: f64 = s.parse().map_err(|_| format!("tau must be `auto` or a number, got `{s}`"))?;
    if v.is_finite() && v > 0.0 {
        Ok(TauPolicy::Fixed(v))
    } else {
        Err(format!("tau must be positive, got {v}"))
    }
}

fn parse_plane_policy(s: &str) -> Result<PlanePolicy, String> {
    match s.to_ascii_lowercase().as_str() {
        "yt" => Ok(PlanePolicy::Yt),
        "xt" => Ok(PlanePolicy::Xt),
        "random" => Ok(PlanePolicy::Random),
        _ => Err(format!("plane must be yt, xt or random, got `{s}`")),
    }
}

fn parse_center(s: &str) -> Result<CenterPolicy, String> {
    match s.to_ascii_lowercase().as_str() {
        "midpoint" => Ok(CenterPolicy::Midpoint),
        "random" => Ok(CenterPolicy::Random),
        _ => Err(format!("center must be midpoint or random, got `{s}`")),
    }
}

fn emit<T: Serialize>(report: &T, path: Option<&Path>) -> Result<(), Error> {
    let mut json = serde_json::to_string_pretty(report).expect("reports serialize");
    json.push('\n');
    match path {
        Some(p) => std::fs::write(p, json).map_err(|e| Error::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(json.as_bytes()).map_err(|e| Error::io(Path::new("<stdout>"), e))
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Transform(_) => EXIT_CONFIG,
        _ => EXIT_FILE_FAILED,
    }
}

/// Parses `args` and runs the chosen subcommand. Returns the process exit
/// code: 0 on success, 1 if any file failed, 2 for invalid configuration.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    let io = IoOptions {
        format: cli.format,
        geometry: cli.geometry,
    };
    let report_path = cli.report.as_deref();
    match cli.command {
        Command::Augment(a) => {
            let config = AugmentConfig {
                strategy: a.strategy,
                theta_max: a.theta_max,
                tau: a.tau,
                center: a.center,
                plane: a.plane,
                seed: a.seed,
                probability: a.probability,
            };
            let report = cmd_augment(&a.inputs, &a.out, &config, &io, worker_count(a.threads))?;
            for f in report.files.iter().filter(|f| f.error.is_some()) {
                eprintln!("{}: {}", f.input, f.error.as_deref().unwrap_or_default());
            }
            emit(&report, report_path)?;
            Ok(if report.any_failed() { EXIT_FILE_FAILED } else { EXIT_OK })
        }
        Command::Perturb(a) => {
            let text = std::fs::read_to_string(&a.grid).map_err(|e| Error::io(&a.grid, e))?;
            let grid = parse_grid(&text)?;
            let report = cmd_perturb(&a.input, &grid, a.repr, a.bins, a.tau, &io)?;
            let table = render_perturb_grid(&report);
            if report_path.is_some() {
                print!("{table}");
            } else {
                eprint!("{table}");
            }
            emit(&report, report_path)?;
            Ok(EXIT_OK)
        }
        Command::Sweep(a) => {
            let report = cmd_sweep(
                &a.inputs,
                &a.thetas,
                a.strategy,
                a.plane,
                a.repr,
                a.bins,
                a.tau,
                &io,
                worker_count(a.threads),
            )?;
            for f in &report.errors {
                eprintln!("{}: {}", f.input, f.error.as_deref().unwrap_or_default());
            }
            emit(&report, report_path)?;
            Ok(if report.failed > 0 { EXIT_FILE_FAILED } else { EXIT_OK })
        }
        Command::Synth(a) => {
            let summary = cmd_synth(&a.scene, &a.out, &io)?;
            emit(&summary, report_path)?;
            Ok(EXIT_OK)
        }
        Command::Repr(a) => {
            let summary = cmd_repr(&a.input, a.kind, a.bins, &a.out, &io)?;
            emit(&summary, report_path)?;
            Ok(EXIT_OK)
        }
    }
}
