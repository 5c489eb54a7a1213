//! Dense rasterizations of event streams and their serialization.
//!
//! Grids are stored channel-major: `values[(c * height + y) * width + x]`.
//! Frame and count rasters have two channels, positive polarity first.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{EventStream, SensorGeometry};

pub const RASTER_MAGIC: &[u8; 4] = b"RAS1";
const DISTANCE_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum RasterError {
    #[error("voxel grid needs at least one bin")]
    ZeroBins,
    #[error("raster shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((RasterKind, [usize; 3]), (RasterKind, [usize; 3])),
    #[error("malformed raster file: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RasterKind {
    Frame,
    Count,
    Voxel,
}

impl RasterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RasterKind::Frame => "frame",
            RasterKind::Count => "count",
            RasterKind::Voxel => "voxel",
        }
    }
}

impl std::str::FromStr for RasterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "frame" => Ok(RasterKind::Frame),
            "count" => Ok(RasterKind::Count),
            "voxel" => Ok(RasterKind::Voxel),
            other => Err(format!("unknown representation `{other}`")),
        }
    }
}

/// How the voxel grid treats polarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VoxelMode {
    /// One signed channel per bin; each event adds `p * weight`.
    #[default]
    Signed,
    /// Unsigned, `2 * bins` channels: positive-polarity bins then negative.
    Split,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RasterMeta {
    pub geometry: SensorGeometry,
    /// `(t_min, t_max)` of the source stream, if known.
    pub time_span: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub kind: RasterKind,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub values: Vec<f64>,
    pub meta: RasterMeta,
}

impl Raster {
    fn zeros(kind: RasterKind, channels: usize, stream: &EventStream) -> Self {
        let g = stream.geometry();
        let (height, width) = (usize::from(g.height), usize::from(g.width));
        Self {
            kind,
            channels,
            height,
            width,
            values: vec![0.0; channels * height * width],
            meta: RasterMeta {
                geometry: g,
                time_span: stream.t_min().zip(stream.t_max()),
            },
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }

    #[inline]
    pub fn index(&self, c: usize, y: usize, x: usize) -> usize {
        (c * self.height + y) * self.width + x
    }

    pub fn at(&self, c: usize, y: usize, x: usize) -> f64 {
        self.values[self.index(c, y, x)]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[inline]
fn polarity_channel(p: i8) -> usize {
    if p > 0 {
        0
    } else {
        1
    }
}

/// Binary occupancy per polarity.
pub fn event_frame(stream: &EventStream) -> Raster {
    let mut r = Raster::zeros(RasterKind::Frame, 2, stream);
    for e in stream.events() {
        let i = r.index(polarity_channel(e.p), usize::from(e.y), usize::from(e.x));
        r.values[i] = 1.0;
    }
    r
}

/// Event counts per polarity.
pub fn event_count(stream: &EventStream) -> Raster {
    let mut r = Raster::zeros(RasterKind::Count, 2, stream);
    for e in stream.events() {
        let i = r.index(polarity_channel(e.p), usize::from(e.y), usize::from(e.x));
        r.values[i] += 1.0;
    }
    r
}

/// Normalized bin coordinate `(bins - 1) (t - t_min) / (t_max - t_min)`,
/// or 0 when the span is empty.
#[inline]
pub fn voxel_coordinate(t: u64, t_min: u64, t_max: u64, bins: usize) -> f64 {
    if t_max == t_min {
        0.0
    } else {
        (bins - 1) as f64 * (t - t_min) as f64 / (t_max - t_min) as f64
    }
}

/// Bilinear temporal binning with the signed single-channel layout.
pub fn voxel_grid(stream: &EventStream, bins: usize) -> Result<Raster, RasterError> {
    voxel_grid_with(stream, bins, VoxelMode::Signed)
}

pub fn voxel_grid_with(stream: &EventStream, bins: usize, mode: VoxelMode) -> Result<Raster, RasterError> {
    if bins == 0 {
        return Err(RasterError::ZeroBins);
    }
    let channels = match mode {
        VoxelMode::Signed => bins,
        VoxelMode::Split => 2 * bins,
    };
    let mut r = Raster::zeros(RasterKind::Voxel, channels, stream);
    let (Some(t_min), Some(t_max)) = (stream.t_min(), stream.t_max()) else {
        return Ok(r);
    };
    for e in stream.events() {
        let tn = voxel_coordinate(e.t, t_min, t_max, bins);
        let lo = (tn.floor() as usize).min(bins - 1);
        let frac = tn - lo as f64;
        let (offset, weight) = match mode {
            VoxelMode::Signed => (0, f64::from(e.p)),
            VoxelMode::Split => (polarity_channel(e.p) * bins, 1.0),
        };
        let (y, x) = (usize::from(e.y), usize::from(e.x));
        let i = r.index(offset + lo, y, x);
        r.values[i] += weight * (1.0 - frac);
        if frac > 0.0 && lo + 1 < bins {
            let j = r.index(offset + lo + 1, y, x);
            r.values[j] += weight * frac;
        }
    }
    Ok(r)
}

/// Builds a raster of `kind`; `bins` only matters for voxel grids.
pub fn rasterize(stream: &EventStream, kind: RasterKind, bins: usize) -> Result<Raster, RasterError> {
    match kind {
        RasterKind::Frame => Ok(event_frame(stream)),
        RasterKind::Count => Ok(event_count(stream)),
        RasterKind::Voxel => voxel_grid(stream, bins),
    }
}

/// `||a - b|| / (||a|| + ||b|| + 1e-12)`.
pub fn raster_distance(a: &Raster, b: &Raster) -> Result<f64, RasterError> {
    if a.kind != b.kind || a.dims() != b.dims() {
        return Err(RasterError::ShapeMismatch((a.kind, a.dims()), (b.kind, b.dims())));
    }
    let diff = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| (u - v) * (u - v))
        .sum::<f64>()
        .sqrt();
    Ok(diff / (a.l2_norm() + b.l2_norm() + DISTANCE_EPS))
}

/// `"RAS1"`, three little-endian `u32` dims `(channels, height, width)`,
/// then the values as little-endian `f32` in row-major order.
pub fn encode_raster_binary(r: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 4 * r.values.len());
    out.extend_from_slice(RASTER_MAGIC);
    for d in r.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &r.values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

/// Inverse of [`encode_raster_binary`]. The binary form does not carry the
/// kind, so the caller supplies it.
pub fn decode_raster_binary(bytes: &[u8], kind: RasterKind) -> Result<Raster, RasterError> {
    let bad = |m: &str| RasterError::Malformed(m.to_owned());
    if bytes.len() < 16 {
        return Err(bad("shorter than the 16-byte header"));
    }
    if &bytes[..4] != RASTER_MAGIC {
        return Err(bad("bad magic"));
    }
    let dim = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().expect("4 bytes")) as usize;
    let (channels, height, width) = (dim(0), dim(1), dim(2));
    let n = channels
        .checked_mul(height)
        .and_then(|v| v.checked_mul(width))
        .ok_or_else(|| bad("dims overflow"))?;
    if bytes.len() - 16 != n * 4 {
        return Err(RasterError::Malformed(format!(
            "expected {} value bytes, found {}",
            n * 4,
            bytes.len() - 16
        )));
    }
    let values = bytes[16..]
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    raster_from_parts(kind, channels, height, width, values)
}

fn raster_from_parts(
    kind: RasterKind,
    channels: usize,
    height: usize,
    width: usize,
    values: Vec<f64>,
) -> Result<Raster, RasterError> {
    let geometry = u16::try_from(width)
        .ok()
        .zip(u16::try_from(height).ok())
        .and_then(|(w, h)| SensorGeometry::new(w, h).ok())
        .ok_or_else(|| RasterError::Malformed(format!("unsupported geometry {width}x{height}")))?;
    Ok(Raster {
        kind,
        channels,
        height,
        width,
        values,
        meta: RasterMeta {
            geometry,
            time_span: None,
        },
    })
}

/// Plain-text grid: a header line, then `height` rows of space-separated
/// values per channel with a blank line between channels.
pub fn encode_raster_text(r: &Raster) -> String {
    let mut s = format!(
        "# raster kind={} channels={} height={} width={}\n",
        r.kind.as_str(),
        r.channels,
        r.height,
        r.width
    );
    for c in 0..r.channels {
        if c > 0 {
            s.push('\n');
        }
        for y in 0..r.height {
            for x in 0..r.width {
                if x > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{}", r.at(c, y, x));
            }
            s.push('\n');
        }
    }
    s
}

pub fn decode_raster_text(text: &str) -> Result<Raster, RasterError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .and_then(|l| l.strip_prefix("# raster "))
        .ok_or_else(|| RasterError::Malformed("missing `# raster` header".into()))?;

    let mut kind = None;
    let mut dims = [None; 3];
    for field in header.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| RasterError::Malformed(format!("bad header field `{field}`")))?;
        let num = || {
            v.parse::<usize>()
                .map_err(|_| RasterError::Malformed(format!("bad value in `{field}`")))
        };
        match k {
            "kind" => kind = Some(v.parse::<RasterKind>().map_err(RasterError::Malformed)?),
            "channels" => dims[0] = Some(num()?),
            "height" => dims[1] = Some(num()?),
            "width" => dims[2] = Some(num()?),
            _ => return Err(RasterError::Malformed(format!("unknown header field `{k}`"))),
        }
    }
    let (Some(kind), [Some(channels), Some(height), Some(width)]) = (kind, dims) else {
        return Err(RasterError::Malformed("incomplete header".into()));
    };

    let mut values = Vec::with_capacity(channels * height * width);
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let row: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let row = row.map_err(|e| RasterError::Malformed(format!("bad value: {e}")))?;
        if row.len() != width {
            return Err(RasterError::Malformed(format!(
                "row has {} values, expected {width}",
                row.len()
            )));
        }
        values.extend(row);
    }
    if values.len() != channels * height * width {
        return Err(RasterError::Malformed(format!(
            "found {} values, expected {}",
            values.len(),
            channels * height * width
        )));
    }
    raster_from_parts(kind, channels, height, width, values)
}
