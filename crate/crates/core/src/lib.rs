//! Spatiotemporal augmentation for event-camera streams.
//!
//! The crate covers the whole path from files on disk to augmented files:
//!
//! * [`event`]: event and stream types, validation and canonical ordering.
//! * [`io`]: ATIS `.bin`, CSV and native `.evt` codecs.
//! * [`transform`]: translation and balanced rotation matrices, viewpoint
//!   transformation (VPT), spatiotemporal stretching (STS), the image-plane
//!   rotation baseline, and seeded parameter sampling.
//! * [`repr`]: event frame, event count and voxel grid rasters.
//! * [`synth`]: threshold-model event generation from parametric scenes.
//! * [`cli`]: batch augmentation, perturbation grids and angle sweeps behind
//!   the `evtaug` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod event;
pub mod io;
pub mod repr;
pub mod synth;
pub mod transform;

pub use event::{canonicalize, normalize_time, validate, Event, EventStream, SensorGeometry, StreamError};
pub use io::{decode, encode, CodecError, FormatTag};
pub use repr::{event_count, event_frame, raster_distance, rasterize, voxel_grid, Raster, RasterError, RasterKind};
pub use synth::{generate, predict_sts_shift, Scene, SceneKind, SynthError, ThresholdConfig};
pub use transform::{
    apply_spatial_rotation, apply_sts, apply_vpt, balanced_rotation, default_tau, translation_back,
    translation_to_center, vpt_matrix, Mat4, Plane, RotationParams, StsParams, TransformError, TransformStats,
    VptParams,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
