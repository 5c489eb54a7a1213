//! Synthetic events from parametric log-brightness scenes.
//!
//! Each pixel's log intensity is a linear ramp plus a set of instantaneous
//! steps, so threshold crossings are found in closed form instead of by
//! time stepping. A pixel fires when its log intensity has moved by the
//! contrast threshold `C` away from the reference level set at its last
//! event; the reference then moves by exactly `p * C`. A step larger than
//! `C` fires `floor(|step| / C)` events with the same timestamp.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{canonicalize, Event, EventStream, SensorGeometry, StreamError};
use crate::transform::{Plane, StsParams};

const US_PER_S: f64 = 1e6;
// Slack when comparing a crossing time against the scene end, in µs.
const END_SLACK_US: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("contrast threshold must be positive and finite, got {0}")]
    BadThreshold(f64),
    #[error("jitter must lie in [0, 1), got {0}")]
    BadJitter(f64),
    #[error("operation supports only uniform-ramp scenes")]
    UnsupportedScene,
    #[error("scene config: {0}")]
    Config(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneKind {
    /// Every pixel brightens at `rate` log-units per second.
    UniformRamp { rate: f64 },
    /// A step edge of height `contrast` moving along `axis` at `velocity`
    /// px/s, starting at coordinate `start`. Pixels the edge has passed are
    /// `contrast` brighter.
    MovingEdge {
        velocity: f64,
        axis: Axis,
        contrast: f64,
        start: f64,
    },
    /// A bar of half width `half_width` px through the sensor center,
    /// rotating at `angular_rate` rad/s from horizontal. Pixels under the bar
    /// are `contrast` brighter.
    RotatingBar {
        angular_rate: f64,
        half_width: f64,
        contrast: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub kind: SceneKind,
    pub geometry: SensorGeometry,
    pub duration_us: u64,
}

impl Scene {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidScene(m.to_owned()));
        if self.duration_us == 0 {
            return bad("duration must be positive");
        }
        let finite = match self.kind {
            SceneKind::UniformRamp { rate } => rate.is_finite(),
            SceneKind::MovingEdge {
                velocity,
                contrast,
                start,
                ..
            } => velocity.is_finite() && contrast.is_finite() && start.is_finite(),
            SceneKind::RotatingBar {
                angular_rate,
                half_width,
                contrast,
            } => {
                if !(half_width > 0.0) {
                    return bad("half_width must be positive");
                }
                angular_rate.is_finite() && half_width.is_finite() && contrast.is_finite()
            }
        };
        if !finite {
            return bad("scene rates must be finite");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Contrast threshold `C` in log-units.
    pub threshold: f64,
    /// Minimum gap between event instants at one pixel, µs.
    pub refractory_us: u64,
    /// Relative threshold jitter: each crossing uses `C * (1 + jitter * u)`
    /// with `u` uniform in `[-1, 1]`. Zero disables it.
    pub jitter: f64,
    pub seed: u64,
}

impl ThresholdConfig {
    pub fn new(threshold: f64) -> Self {
        Self {
            threshold,
            refractory_us: 0,
            jitter: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(SynthError::BadThreshold(self.threshold));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(SynthError::BadJitter(self.jitter));
        }
        Ok(())
    }
}

/// Log intensity of one pixel relative to `t = 0`: `slope * t` plus the
/// steps whose time has passed. Times in µs.
#[derive(Debug, Default)]
struct PixelSignal {
    slope: f64,
    steps: Vec<(f64, f64)>,
}

fn pixel_signal(scene: &Scene, y: u16, x: u16) -> PixelSignal {
    let duration = scene.duration_us as f64;
    match scene.kind {
        SceneKind::UniformRamp { rate } => PixelSignal {
            slope: rate / US_PER_S,
            steps: Vec::new(),
        },
        SceneKind::MovingEdge {
            velocity,
            axis,
            contrast,
            start,
        } => {
            let coord = f64::from(match axis {
                Axis::X => x,
                Axis::Y => y,
            });
            let mut steps = Vec::new();
            if velocity != 0.0 {
                let t = (coord - start) / velocity * US_PER_S;
                if t > 0.0 && t <= duration {
                    steps.push((t, contrast));
                }
            }
            PixelSignal { slope: 0.0, steps }
        }
        SceneKind::RotatingBar {
            angular_rate,
            half_width,
            contrast,
        } => {
            let g = scene.geometry;
            let dy = f64::from(y) - g.mid_y();
            let dx = f64::from(x) - g.mid_x();
            let rho = dy.hypot(dx);
            let mut steps = Vec::new();
            if angular_rate != 0.0 && rho > half_width {
                let alpha = dy.atan2(dx);
                let beta = (half_width / rho).asin();
                let sweep = angular_rate * duration / US_PER_S;
                let (lo, hi) = (sweep.min(0.0), sweep.max(0.0));
                // Rising through alpha - beta enters the bar, rising through
                // alpha + beta leaves it; falling reverses both.
                let rising = angular_rate > 0.0;
                for (boundary, enters_when_rising) in [(alpha - beta, true), (alpha + beta, false)] {
                    let k_min = ((lo - boundary) / PI).floor() as i64 - 1;
                    let k_max = ((hi - boundary) / PI).ceil() as i64 + 1;
                    for k in k_min..=k_max {
                        let phi = boundary + k as f64 * PI;
                        let t = phi / angular_rate * US_PER_S;
                        if t > 0.0 && t <= duration {
                            let sign = if enters_when_rising == rising { 1.0 } else { -1.0 };
                            steps.push((t, sign * contrast));
                        }
                    }
                }
                steps.sort_by(|a, b| a.0.total_cmp(&b.0));
            }
            PixelSignal { slope: 0.0, steps }
        }
    }
}

/// Emits `(time_us, polarity)` pairs for one pixel.
fn pixel_events(sig: &PixelSignal, cfg: &ThresholdConfig, duration: f64, rng: &mut Option<ChaCha8Rng>) -> Vec<(f64, i8)> {
    let mut draw = || match rng {
        Some(r) => cfg.threshold * (1.0 + cfg.jitter * r.gen_range(-1.0..=1.0)),
        None => cfg.threshold,
    };
    let refractory = cfg.refractory_us as f64;
    let mut out = Vec::new();

    let mut t = 0.0f64;
    let mut reference = 0.0f64;
    let mut stepped = 0.0f64;
    let mut next_step = 0usize;
    let mut blind_until = f64::NEG_INFINITY;
    let mut c = draw();

    loop {
        while next_step < sig.steps.len() && sig.steps[next_step].0 <= t {
            stepped += sig.steps[next_step].1;
            next_step += 1;
        }
        if t >= blind_until {
            let mut diff = sig.slope * t + stepped - reference;
            let mut fired = false;
            while diff.abs() >= c * (1.0 - 1e-9) {
                let p: i8 = if diff > 0.0 { 1 } else { -1 };
                let delta = f64::from(p) * c;
                reference += delta;
                diff -= delta;
                out.push((t, p));
                fired = true;
                c = draw();
            }
            if fired && refractory > 0.0 {
                blind_until = t + refractory;
            }
        }

        let mut next = sig.steps.get(next_step).map_or(f64::INFINITY, |s| s.0);
        if blind_until > t {
            next = next.min(blind_until);
        } else if sig.slope != 0.0 {
            let diff = sig.slope * t + stepped - reference;
            let target = if sig.slope > 0.0 { c - diff } else { -c - diff };
            let crossing = t + target / sig.slope;
            next = next.min(if crossing > t { crossing } else { next_after(t) });
        }
        if !(next <= duration + END_SLACK_US) {
            break;
        }
        t = next;
    }
    out
}

fn next_after(t: f64) -> f64 {
    let step = (t.abs() * f64::EPSILON).max(f64::MIN_POSITIVE);
    t + step
}

/// Generates the noise-free (unless jitter is set) event stream of a scene.
pub fn generate(scene: &Scene, cfg: &ThresholdConfig) -> Result<EventStream, SynthError> {
    scene.validate()?;
    cfg.validate()?;
    let g = scene.geometry;
    let duration = scene.duration_us as f64;
    let width = usize::from(g.width);

    let events: Vec<Event> = (0..g.pixel_count())
        .into_par_iter()
        .flat_map_iter(|i| {
            let (y, x) = ((i / width) as u16, (i % width) as u16);
            let sig = pixel_signal(scene, y, x);
            let mut rng = (cfg.jitter > 0.0).then(|| ChaCha8Rng::seed_from_u64(cfg.seed ^ i as u64));
            pixel_events(&sig, cfg, duration, &mut rng)
                .into_iter()
                .map(move |(t, p)| Event::new(y, x, (t.round() as u64).min(scene.duration_us), p))
        })
        .collect();
    Ok(canonicalize(events, g)?)
}

/// Expected per-pixel time shift `-tau * tan(theta) * (s - s_c)` that STS
/// applies before its global re-zeroing, row-major over the sensor.
pub fn predict_sts_shift(scene: &Scene, params: &StsParams) -> Result<Vec<f64>, SynthError> {
    if !matches!(scene.kind, SceneKind::UniformRamp { .. }) {
        return Err(SynthError::UnsupportedScene);
    }
    let g = scene.geometry;
    let slope = params.tau * params.theta.tan();
    let mut out = Vec::with_capacity(g.pixel_count());
    for y in 0..g.height {
        for x in 0..g.width {
            let s = match params.plane {
                Plane::Yt => f64::from(y),
                Plane::Xt => f64::from(x),
            };
            out.push(-slope * (s - params.center_spatial));
        }
    }
    Ok(out)
}

/// Flat key-value scene description, read from TOML.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    kind: String,
    width: u16,
    height: u16,
    duration_us: u64,
    threshold: f64,
    #[serde(default)]
    refractory_us: u64,
    #[serde(default)]
    jitter: f64,
    #[serde(default)]
    seed: u64,
    rate: Option<f64>,
    velocity: Option<f64>,
    axis: Option<Axis>,
    contrast: Option<f64>,
    start: Option<f64>,
    angular_rate: Option<f64>,
    half_width: Option<f64>,
}

/// Parses a scene config such as
///
/// ```text
/// kind = "uniform_ramp"
/// width = 2
/// height = 2
/// duration_us = 1000000
/// rate = 2.0
/// threshold = 0.5
/// ```
pub fn parse_scene_config(text: &str) -> Result<(Scene, ThresholdConfig), SynthError> {
    let f: SceneFile = toml::from_str(text).map_err(|e| SynthError::Config(e.to_string()))?;
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| SynthError::Config(format!("`{}` scene needs `{name}`", f.kind)));
    let kind = match f.kind.as_str() {
        "uniform_ramp" => SceneKind::UniformRamp {
            rate: need(f.rate, "rate")?,
        },
        "moving_edge" => SceneKind::MovingEdge {
            velocity: need(f.velocity, "velocity")?,
            axis: f.axis.unwrap_or(Axis::X),
            contrast: f.contrast.unwrap_or(1.0),
            start: f.start.unwrap_or(0.0),
        },
        "rotating_bar" => SceneKind::RotatingBar {
            angular_rate: need(f.angular_rate, "angular_rate")?,
            half_width: f.half_width.unwrap_or(1.5),
            contrast: f.contrast.unwrap_or(1.0),
        },
        other => return Err(SynthError::Config(format!("unknown scene kind `{other}`"))),
    };
    let scene = Scene {
        kind,
        geometry: SensorGeometry::new(f.width, f.height)?,
        duration_us: f.duration_us,
    };
    let cfg = ThresholdConfig {
        threshold: f.threshold,
        refractory_us: f.refractory_us,
        jitter: f.jitter,
        seed: f.seed,
    };
    scene.validate()?;
    cfg.validate()?;
    Ok((scene, cfg))
}
