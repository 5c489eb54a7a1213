use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{output_path, path_string, AugmentConfig, IoOptions, REPORT_SCHEMA};
use crate::event::EventStream;
use crate::io::FormatTag;
use crate::repr::{encode_raster_binary, encode_raster_text, raster_distance, rasterize, RasterKind};
use crate::synth::{generate, parse_scene_config};
use crate::transform::sample::{apply_drawn, item_seed, sample_params, DrawnTransform, Strategy, TauPolicy};
use crate::transform::{
    apply_spatial_rotation, apply_sts, apply_vpt, default_tau, temporal_midpoint, Plane, RotationParams,
    StsParams, TransformStats, VptParams,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FormatVersions {
    pub atis_bin: &'static str,
    pub csv: &'static str,
    pub native: &'static str,
    pub raster: &'static str,
}

const FORMAT_VERSIONS: FormatVersions = FormatVersions {
    atis_bin: "atis-5byte",
    csv: "t,x,y,p",
    native: "EVT1",
    raster: "RAS1",
};

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub index: usize,
    pub input: String,
    pub output: Option<String>,
    pub format: Option<FormatTag>,
    pub seed: u64,
    pub params: Option<DrawnTransform>,
    pub stats: Option<TransformStats>,
    pub error: Option<String>,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: &'static str,
    pub format_versions: FormatVersions,
    pub config: AugmentConfig,
    pub files: Vec<FileEntry>,
    pub failed: usize,
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn any_failed(&self) -> bool {
        self.failed > 0
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Augments every input into `out_dir`, one seed per file (`seed ^ index`).
///
/// Per-file failures land in the report; only an invalid configuration is
/// returned as an error.
pub fn cmd_augment(
    inputs: &[PathBuf],
    out_dir: &Path,
    config: &AugmentConfig,
    io: &IoOptions,
    threads: usize,
) -> Result<RunReport> {
    config.validate()?;
    let mut names = HashSet::new();
    for input in inputs {
        let name = input
            .file_name()
            .ok_or_else(|| Error::Config(format!("input {} has no file name", input.display())))?;
        if !names.insert(name.to_owned()) {
            return Err(Error::Config(format!(
                "two inputs share the file name {:?}; outputs would collide",
                name
            )));
        }
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let start = Instant::now();
    let sampling = config.sampling();
    let files: Vec<FileEntry> = pool(threads)?.install(|| {
        inputs
            .par_iter()
            .enumerate()
            .map(|(index, input)| {
                let t0 = Instant::now();
                let seed = item_seed(config.seed, index);
                let mut entry = FileEntry {
                    index,
                    input: path_string(input),
                    output: None,
                    format: None,
                    seed,
                    params: None,
                    stats: None,
                    error: None,
                    wall_time_ms: 0.0,
                };
                let result = (|| -> Result<()> {
                    let (stream, format) = io.read(input)?;
                    entry.format = Some(format);
                    let drawn = sample_params(seed, &sampling, &stream)?;
                    entry.params = Some(drawn);
                    let (out, stats) = apply_drawn(&stream, &drawn)?;
                    entry.stats = Some(stats);
                    let path = output_path(out_dir, input).expect("checked above");
                    IoOptions::write(&out, format, &path)?;
                    entry.output = Some(path_string(&path));
                    Ok(())
                })();
                if let Err(e) = result {
                    entry.error = Some(e.to_string());
                }
                entry.wall_time_ms = elapsed_ms(t0);
                entry
            })
            .collect()
    });

    let failed = files.iter().filter(|f| f.error.is_some()).count();
    Ok(RunReport {
        schema: REPORT_SCHEMA,
        command: "augment",
        format_versions: FORMAT_VERSIONS,
        config: *config,
        files,
        failed,
        wall_time_ms: elapsed_ms(start),
    })
}

/// One perturbation: a transform applied at a fixed angle with midpoint
/// centers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub strategy: Strategy,
    pub plane: Plane,
    pub theta: f64,
}

/// Parses a perturbation grid: one `<plane> <theta> [strategy]` per line,
/// `#` starts a comment. The strategy defaults to `vpt`.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>> {
    let mut grid = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| Error::Config(format!("grid line {}: {m}", n + 1));
        let fields: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if !(2..=3).contains(&fields.len()) {
            return Err(bad(format!("expected `<plane> <theta> [strategy]`, got `{line}`")));
        }
        let plane: Plane = fields[0].parse().map_err(bad)?;
        let theta: f64 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad angle `{}`", fields[1])))?;
        if !(theta.is_finite() && theta.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(bad(format!("|theta| must be below pi/2, got {theta}")));
        }
        let strategy = match fields.get(2) {
            Some(s) => s.parse::<Strategy>().map_err(bad)?,
            None => Strategy::Vpt,
        };
        if matches!(strategy, Strategy::VptSts) {
            return Err(bad("grid points need a single strategy, not vpt-sts".into()));
        }
        grid.push(GridPoint { strategy, plane, theta });
    }
    if grid.is_empty() {
        return Err(Error::Config("perturbation grid is empty".into()));
    }
    Ok(grid)
}

fn resolve_tau(stream: &EventStream, tau: TauPolicy) -> Result<f64> {
    Ok(match tau {
        TauPolicy::Auto => default_tau(stream)?,
        TauPolicy::Fixed(t) => t,
    })
}

/// Applies a deterministic transform at angle `theta` with midpoint centers.
pub fn perturb_stream(
    stream: &EventStream,
    strategy: Strategy,
    plane: Plane,
    theta: f64,
    tau: TauPolicy,
) -> Result<(EventStream, TransformStats)> {
    let g = stream.geometry();
    let spatial = match plane {
        Plane::Yt => g.mid_y(),
        Plane::Xt => g.mid_x(),
    };
    Ok(match strategy {
        Strategy::None => (stream.clone(), TransformStats::identity(stream.len())),
        Strategy::Rotation => apply_spatial_rotation(
            stream,
            &RotationParams {
                theta,
                center_y: g.mid_y(),
                center_x: g.mid_x(),
            },
        )?,
        Strategy::Vpt => {
            let p = VptParams::new(plane, theta, resolve_tau(stream, tau)?, spatial, temporal_midpoint(stream))?;
            apply_vpt(stream, &p)?
        }
        Strategy::Sts => {
            let p = StsParams::new(plane, theta, resolve_tau(stream, tau)?, spatial)?;
            (apply_sts(stream, &p)?, TransformStats::identity(stream.len()))
        }
        Strategy::VptSts => return Err(Error::Config("vpt-sts is not a deterministic perturbation".into())),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbCell {
    pub strategy: Strategy,
    pub plane: Plane,
    pub theta: f64,
    pub distance: f64,
    pub stats: TransformStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbReport {
    pub schema: u32,
    pub command: &'static str,
    pub input: String,
    pub repr: RasterKind,
    pub bins: usize,
    pub cells: Vec<PerturbCell>,
    /// Row labels of `distances`, in order of first appearance in the grid.
    pub planes: Vec<Plane>,
    /// Column labels of `distances`, in order of first appearance.
    pub thetas: Vec<f64>,
    /// `distances[row][col]`; `None` where the grid has no such point. When a
    /// `(plane, theta)` pair appears more than once the last entry wins.
    pub distances: Vec<Vec<Option<f64>>>,
}

/// Rasterizes each perturbed copy of `input` and measures its distance to
/// the unperturbed raster.
pub fn cmd_perturb(
    input: &Path,
    grid: &[GridPoint],
    repr: RasterKind,
    bins: usize,
    tau: TauPolicy,
    io: &IoOptions,
) -> Result<PerturbReport> {
    let (stream, _) = io.read(input)?;
    let reference = rasterize(&stream, repr, bins)?;

    let cells = grid
        .par_iter()
        .map(|gp| -> Result<PerturbCell> {
            let (out, stats) = perturb_stream(&stream, gp.strategy, gp.plane, gp.theta, tau)?;
            let distance = raster_distance(&reference, &rasterize(&out, repr, bins)?)?;
            Ok(PerturbCell {
                strategy: gp.strategy,
                plane: gp.plane,
                theta: gp.theta,
                distance,
                stats,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut planes: Vec<Plane> = Vec::new();
    let mut thetas: Vec<f64> = Vec::new();
    for c in &cells {
        if !planes.contains(&c.plane) {
            planes.push(c.plane);
        }
        if !thetas.iter().any(|t| t.to_bits() == c.theta.to_bits()) {
            thetas.push(c.theta);
        }
    }
    let mut distances = vec![vec![None; thetas.len()]; planes.len()];
    for c in &cells {
        let r = planes.iter().position(|p| *p == c.plane).expect("collected");
        let k = thetas.iter().position(|t| t.to_bits() == c.theta.to_bits()).expect("collected");
        distances[r][k] = Some(c.distance);
    }

    Ok(PerturbReport {
        schema: super::REPORT_SCHEMA,
        command: "perturb",
        input: path_string(input),
        repr,
        bins,
        cells,
        planes,
        thetas,
        distances,
    })
}

/// Fixed-width text table of a perturbation report.
pub fn render_perturb_grid(report: &PerturbReport) -> String {
    let mut s = String::from("plane");
    for t in &report.thetas {
        let _ = write!(s, " {t:>10.4}");
    }
    s.push('\n');
    for (plane, row) in report.planes.iter().zip(&report.distances) {
        let _ = write!(s, "{:<5}", plane.as_str());
        for d in row {
            match d {
                Some(d) => {
                    let _ = write!(s, " {d:>10.6}");
                }
                None => s.push_str(&format!(" {:>10}", "-")),
            }
        }
        s.push('\n');
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub mean_distance: f64,
    pub mean_discard_fraction: f64,
    pub files: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub schema: u32,
    pub command: &'static str,
    pub strategy: Strategy,
    pub plane: Plane,
    pub repr: RasterKind,
    pub bins: usize,
    pub rows: Vec<SweepRow>,
    pub errors: Vec<FileEntry>,
    pub failed: usize,
}

/// Per-angle mean raster distance and spatial-discard fraction over inputs.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    inputs: &[PathBuf],
    thetas: &[f64],
    strategy: Strategy,
    plane: Plane,
    repr: RasterKind,
    bins: usize,
    tau: TauPolicy,
    io: &IoOptions,
    threads: usize,
) -> Result<SweepReport> {
    if thetas.is_empty() {
        return Err(Error::Config("angle list is empty".into()));
    }
    if let Some(t) = thetas
        .iter()
        .find(|t| !(t.is_finite() && t.abs() < std::f64::consts::FRAC_PI_2))
    {
        return Err(Error::Config(format!("|theta| must be below pi/2, got {t}")));
    }
    if matches!(strategy, Strategy::VptSts) {
        return Err(Error::Config("sweep needs a single strategy, not vpt-sts".into()));
    }

    // (distance, discard fraction) per input per angle.
    type PerFile = std::result::Result<Vec<(f64, f64)>, String>;
    let per_file: Vec<PerFile> = pool(threads)?.install(|| {
        inputs
            .par_iter()
            .map(|input| {
                (|| -> Result<Vec<(f64, f64)>> {
                    let (stream, _) = io.read(input)?;
                    let reference = rasterize(&stream, repr, bins)?;
                    thetas
                        .iter()
                        .map(|&theta| {
                            let (out, stats) = perturb_stream(&stream, strategy, plane, theta, tau)?;
                            let d = raster_distance(&reference, &rasterize(&out, repr, bins)?)?;
                            Ok((d, stats.spatial_discard_fraction()))
                        })
                        .collect()
                })()
                .map_err(|e| e.to_string())
            })
            .collect()
    });

    let ok: Vec<&Vec<(f64, f64)>> = per_file.iter().filter_map(|r| r.as_ref().ok()).collect();
    let rows = thetas
        .iter()
        .enumerate()
        .map(|(k, &theta)| {
            let n = ok.len();
            let (sd, sf) = ok.iter().fold((0.0, 0.0), |(a, b), v| (a + v[k].0, b + v[k].1));
            let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
            SweepRow {
                theta,
                mean_distance: mean(sd),
                mean_discard_fraction: mean(sf),
                files: n,
            }
        })
        .collect();
    let errors: Vec<FileEntry> = per_file
        .iter()
        .enumerate()
        .filter_map(|(index, r)| {
            r.as_ref().err().map(|e| FileEntry {
                index,
                input: path_string(&inputs[index]),
                output: None,
                format: None,
                seed: 0,
                params: None,
                stats: None,
                error: Some(e.clone()),
                wall_time_ms: 0.0,
            })
        })
        .collect();

    Ok(SweepReport {
        schema: REPORT_SCHEMA,
        command: "sweep",
        strategy,
        plane,
        repr,
        bins,
        rows,
        failed: errors.len(),
        errors,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthSummary {
    pub schema: u32,
    pub command: &'static str,
    pub scene: String,
    pub output: String,
    pub format: FormatTag,
    pub events: usize,
}

/// Generates the events of a scene config file and writes them to `out`.
pub fn cmd_synth(scene_path: &Path, out: &Path, io: &IoOptions) -> Result<SynthSummary> {
    let text = std::fs::read_to_string(scene_path).map_err(|e| Error::io(scene_path, e))?;
    let (scene, cfg) = parse_scene_config(&text)?;
    let stream = generate(&scene, &cfg)?;
    let format = io.format_for(out)?;
    IoOptions::write(&stream, format, out)?;
    Ok(SynthSummary {
        schema: REPORT_SCHEMA,
        command: "synth",
        scene: path_string(scene_path),
        output: path_string(out),
        format,
        events: stream.len(),
    })
}

/// Rasterizes `input` into `out`: `.txt` gives the text grid, anything else
/// the `RAS1` binary.
pub fn cmd_repr(input: &Path, kind: RasterKind, bins: usize, out: &Path, io: &IoOptions) -> Result<serde_json::Value> {
    let (stream, _) = io.read(input)?;
    let raster = rasterize(&stream, kind, bins)?;
    let text = out
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("txt"));
    let bytes = if text {
        encode_raster_text(&raster).into_bytes()
    } else {
        encode_raster_binary(&raster)
    };
    std::fs::write(out, bytes).map_err(|e| Error::io(out, e))?;
    Ok(serde_json::json!({
        "schema": REPORT_SCHEMA,
        "command": "repr",
        "input": path_string(input),
        "output": path_string(out),
        "kind": kind,
        "dims": raster.dims(),
        "events": stream.len(),
    }))
}
