//! Seeded parameter sampling for augmentation strategies.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    apply_spatial_rotation, apply_sts, apply_vpt, default_tau, temporal_midpoint, Plane, RotationParams,
    StsParams, TransformError, TransformStats, VptParams,
};
use crate::event::EventStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    None,
    Rotation,
    Vpt,
    Sts,
    /// VPT or STS, each with probability 1/2.
    VptSts,
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "baseline" => Ok(Strategy::None),
            "rotation" => Ok(Strategy::Rotation),
            "vpt" => Ok(Strategy::Vpt),
            "sts" => Ok(Strategy::Sts),
            "vpt-sts" | "vptsts" => Ok(Strategy::VptSts),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauPolicy {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterPolicy {
    Midpoint,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanePolicy {
    Yt,
    Xt,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub strategy: Strategy,
    pub theta_max: f64,
    pub tau: TauPolicy,
    pub center: CenterPolicy,
    pub plane: PlanePolicy,
    /// Probability that a sample is transformed at all.
    pub probability: f64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            strategy: Strategy::VptSts,
            theta_max: FRAC_PI_6,
            tau: TauPolicy::Auto,
            center: CenterPolicy::Midpoint,
            plane: PlanePolicy::Random,
            probability: 1.0,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), TransformError> {
        if !(self.theta_max.is_finite() && (0.0..FRAC_PI_2).contains(&self.theta_max)) {
            return Err(TransformError::BadConfig(format!(
                "theta_max must lie in [0, pi/2), got {}",
                self.theta_max
            )));
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(TransformError::BadConfig(format!(
                "probability must lie in [0, 1], got {}",
                self.probability
            )));
        }
        if let TauPolicy::Fixed(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(TransformError::BadTau(tau));
            }
        }
        Ok(())
    }
}

/// A concrete transform drawn for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DrawnTransform {
    Identity,
    Rotation(RotationParams),
    Vpt(VptParams),
    Sts(StsParams),
}

/// Draws transform parameters for `stream` from `seed`.
///
/// The random draws happen in a fixed order regardless of the strategy, so
/// changing one knob does not reshuffle the others: apply gate, VPT/STS coin,
/// angle, plane, row center, column center.
pub fn sample_params(
    seed: u64,
    config: &SamplingConfig,
    stream: &EventStream,
) -> Result<DrawnTransform, TransformError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gate: f64 = rng.gen();
    let pick_sts: bool = rng.gen();
    let theta = if config.theta_max > 0.0 {
        rng.gen_range(-config.theta_max..=config.theta_max)
    } else {
        0.0
    };
    let random_plane = if rng.gen::<bool>() { Plane::Yt } else { Plane::Xt };
    let g = stream.geometry();
    let y_span = f64::from(g.height) - 1.0;
    let x_span = f64::from(g.width) - 1.0;
    let random_y = rng.gen::<f64>() * y_span;
    let random_x = rng.gen::<f64>() * x_span;

    if gate >= config.probability {
        return Ok(DrawnTransform::Identity);
    }

    let plane = match config.plane {
        PlanePolicy::Yt => Plane::Yt,
        PlanePolicy::Xt => Plane::Xt,
        PlanePolicy::Random => random_plane,
    };
    let (center_y, center_x) = match config.center {
        CenterPolicy::Midpoint => (g.mid_y(), g.mid_x()),
        CenterPolicy::Random => (random_y, random_x),
    };
    let center_spatial = match plane {
        Plane::Yt => center_y,
        Plane::Xt => center_x,
    };
    let tau = || match config.tau {
        TauPolicy::Auto => default_tau(stream),
        TauPolicy::Fixed(tau) => Ok(tau),
    };

    let strategy = match config.strategy {
        Strategy::VptSts if pick_sts => Strategy::Sts,
        Strategy::VptSts => Strategy::Vpt,
        s => s,
    };
    Ok(match strategy {
        Strategy::None => DrawnTransform::Identity,
        Strategy::Rotation => DrawnTransform::Rotation(RotationParams {
            theta,
            center_y,
            center_x,
        }),
        Strategy::Vpt => DrawnTransform::Vpt(VptParams::new(
            plane,
            theta,
            tau()?,
            center_spatial,
            temporal_midpoint(stream),
        )?),
        Strategy::Sts => DrawnTransform::Sts(StsParams::new(plane, theta, tau()?, center_spatial)?),
        Strategy::VptSts => unreachable!("resolved above"),
    })
}

/// Applies a drawn transform. STS and identity report all events retained.
pub fn apply_drawn(
    stream: &EventStream,
    drawn: &DrawnTransform,
) -> Result<(EventStream, TransformStats), TransformError> {
    match drawn {
        DrawnTransform::Identity => Ok((stream.clone(), TransformStats::identity(stream.len()))),
        DrawnTransform::Rotation(p) => apply_spatial_rotation(stream, p),
        DrawnTransform::Vpt(p) => apply_vpt(stream, p),
        DrawnTransform::Sts(p) => {
            let out = apply_sts(stream, p)?;
            Ok((out, TransformStats::identity(stream.len())))
        }
    }
}

/// Per-item seed, independent of processing order.
#[inline]
pub fn item_seed(seed: u64, index: usize) -> u64 {
    seed ^ index as u64
}
