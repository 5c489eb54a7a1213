//! Spatiotemporal transforms over event streams.
//!
//! All matrices act on row vectors `[y, x, t, 1]`. Rotations in the `YT`
//! and `XT` planes are *balanced*: the coefficient `tau` (µs per pixel)
//! converts between the pixel and microsecond axes, so the rotation mixes
//! `y` with `t / tau` rather than with raw microseconds.
//!
//! Three stream-level operations sit on top of the matrices:
//!
//! * [`apply_vpt`] rotates every event about a spatiotemporal center and drops
//!   events that land outside the sensor or before `t = 0`.
//! * [`apply_sts`] keeps every event in place spatially and only shears time,
//!   `t' = t - tau * tan(theta) * (s - s_c)`, where `s` is the row (`YT`) or
//!   column (`XT`). This equals the time coordinate of a VPT by `-theta` about
//!   `t_c = 0`, stretched by `1 / cos(theta)`.
//! * [`apply_spatial_rotation`] is the plain image-plane rotation baseline.

mod mat4;
pub mod sample;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{Event, EventStream};

pub use mat4::Mat4;

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error("tau must be positive and finite, got {0}")]
    BadTau(f64),
    #[error("theta {0} is outside the allowed range (|theta| < pi/2 for STS, <= pi/2 for VPT)")]
    BadTheta(f64),
    #[error("rotation center must be finite")]
    BadCenter,
    #[error("stream has no temporal extent (need >= 2 distinct timestamps); pass an explicit tau")]
    DegenerateDuration,
    #[error("invalid sampling config: {0}")]
    BadConfig(String),
}

/// Which spatial axis a spatiotemporal rotation mixes with time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    /// Rows and time; `x` is the rotation axis.
    Yt,
    /// Columns and time; `y` is the rotation axis.
    Xt,
}

impl Plane {
    /// Index of the spatial component in `[y, x, t, 1]`.
    #[inline]
    pub fn spatial_index(self) -> usize {
        match self {
            Plane::Yt => 0,
            Plane::Xt => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Plane::Yt => "yt",
            Plane::Xt => "xt",
        }
    }
}

impl std::str::FromStr for Plane {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "yt" => Ok(Plane::Yt),
            "xt" => Ok(Plane::Xt),
            other => Err(format!("unknown plane `{other}` (expected yt or xt)")),
        }
    }
}

impl std::fmt::Display for Plane {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// STS needs `tan` and `1 / cos` to be finite, so its bound is strict.
fn check_theta(theta: f64) -> Result<(), TransformError> {
    if theta.is_finite() && theta.abs() < FRAC_PI_2 {
        Ok(())
    } else {
        Err(TransformError::BadTheta(theta))
    }
}

/// A rotation is well defined at a quarter turn, so VPT admits `|theta| <= pi/2`.
fn check_rotation_theta(theta: f64) -> Result<(), TransformError> {
    if theta.is_finite() && theta.abs() <= FRAC_PI_2 {
        Ok(())
    } else {
        Err(TransformError::BadTheta(theta))
    }
}

fn check_tau(tau: f64) -> Result<(), TransformError> {
    if tau.is_finite() && tau > 0.0 {
        Ok(())
    } else {
        Err(TransformError::BadTau(tau))
    }
}

fn check_center(values: &[f64]) -> Result<(), TransformError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(TransformError::BadCenter)
    }
}

/// Parameters of a viewpoint transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VptParams {
    pub plane: Plane,
    /// Rotation angle in radians.
    pub theta: f64,
    /// Balance coefficient, µs per pixel.
    pub tau: f64,
    /// Rotation center on the mixed spatial axis (`y_c` or `x_c`), pixels.
    pub center_spatial: f64,
    /// Rotation center in time, µs.
    pub center_time: f64,
}

impl VptParams {
    pub fn new(
        plane: Plane,
        theta: f64,
        tau: f64,
        center_spatial: f64,
        center_time: f64,
    ) -> Result<Self, TransformError> {
        let p = Self {
            plane,
            theta,
            tau,
            center_spatial,
            center_time,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        check_tau(self.tau)?;
        check_rotation_theta(self.theta)?;
        check_center(&[self.center_spatial, self.center_time])
    }
}

/// Parameters of a spatiotemporal stretch. The temporal center is always 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StsParams {
    pub plane: Plane,
    pub theta: f64,
    pub tau: f64,
    pub center_spatial: f64,
}

impl StsParams {
    pub fn new(plane: Plane, theta: f64, tau: f64, center_spatial: f64) -> Result<Self, TransformError> {
        let p = Self {
            plane,
            theta,
            tau,
            center_spatial,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        check_tau(self.tau)?;
        check_theta(self.theta)?;
        check_center(&[self.center_spatial])
    }
}

/// Parameters of the image-plane rotation baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub theta: f64,
    pub center_y: f64,
    pub center_x: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformStats {
    pub input_count: usize,
    pub retained_count: usize,
    pub discarded_spatial: usize,
    pub discarded_temporal: usize,
}

impl TransformStats {
    pub fn identity(n: usize) -> Self {
        Self {
            input_count: n,
            retained_count: n,
            ..Self::default()
        }
    }

    pub fn spatial_discard_fraction(&self) -> f64 {
        if self.input_count == 0 {
            0.0
        } else {
            self.discarded_spatial as f64 / self.input_count as f64
        }
    }
}

/// `T_b`: moves the center `(y_c, x_c, t_c)` to the origin.
pub fn translation_to_center(y_c: f64, x_c: f64, t_c: f64) -> Mat4 {
    let mut m = Mat4::IDENTITY;
    m.0[3] = [-y_c, -x_c, -t_c, 1.0];
    m
}

/// `T_a`: the inverse of [`translation_to_center`].
pub fn translation_back(y_c: f64, x_c: f64, t_c: f64) -> Mat4 {
    let mut m = Mat4::IDENTITY;
    m.0[3] = [y_c, x_c, t_c, 1.0];
    m
}

/// Balanced rotation about the origin in the given plane. With `tau = 1`
/// this is the ordinary (unbalanced) rotation.
pub fn balanced_rotation(plane: Plane, theta: f64, tau: f64) -> Result<Mat4, TransformError> {
    check_tau(tau)?;
    let (s, c) = theta.sin_cos();
    let k = plane.spatial_index();
    let mut m = Mat4::IDENTITY;
    m.0[k][k] = c;
    m.0[k][2] = tau * s;
    m.0[2][k] = -s / tau;
    m.0[2][2] = c;
    Ok(m)
}

/// Closed form of `T_b * R * T_a` for a balanced rotation about
/// `(center_spatial, center_time)`.
///
/// For `YT` the action on an event is
/// `y' = (y - y_c) cos - (t - t_c) sin / tau + y_c` and
/// `t' = tau (y - y_c) sin + (t - t_c) cos + t_c`, with `x` untouched.
pub fn vpt_matrix(params: &VptParams) -> Result<Mat4, TransformError> {
    params.validate()?;
    let VptParams {
        plane,
        theta,
        tau,
        center_spatial: sc,
        center_time: tc,
    } = *params;
    let (s, c) = theta.sin_cos();
    let k = plane.spatial_index();
    let mut m = Mat4::IDENTITY;
    m.0[k][k] = c;
    m.0[k][2] = tau * s;
    m.0[2][k] = -s / tau;
    m.0[2][2] = c;
    m.0[3][k] = -sc * c + tc * s / tau + sc;
    m.0[3][2] = -tau * sc * s - tc * c + tc;
    Ok(m)
}

/// Image-plane rotation about `(center_y, center_x)`:
/// `y' = (y - y_c) cos - (x - x_c) sin + y_c`,
/// `x' = (y - y_c) sin + (x - x_c) cos + x_c`.
pub fn spatial_rotation_matrix(params: &RotationParams) -> Mat4 {
    let (s, c) = params.theta.sin_cos();
    let (yc, xc) = (params.center_y, params.center_x);
    Mat4([
        [c, s, 0.0, 0.0],
        [-s, c, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [-yc * c + xc * s + yc, -yc * s - xc * c + xc, 0.0, 1.0],
    ])
}

/// Maps every event through `m`, rounds half away from zero, and discards
/// events that leave the sensor (spatial) or land before `t = 0` (temporal).
pub fn apply_matrix(stream: &EventStream, m: &Mat4) -> (EventStream, TransformStats) {
    let g = stream.geometry();
    let (h, w) = (f64::from(g.height), f64::from(g.width));
    let mut stats = TransformStats {
        input_count: stream.len(),
        ..TransformStats::default()
    };
    let mut out = Vec::with_capacity(stream.len());
    for e in stream.events() {
        let [y, x, t] = m.apply_point(f64::from(e.y), f64::from(e.x), e.t as f64);
        let (y, x, t) = (y.round(), x.round(), t.round());
        if !(y >= 0.0 && y < h && x >= 0.0 && x < w) {
            stats.discarded_spatial += 1;
            continue;
        }
        if !(t >= 0.0) {
            stats.discarded_temporal += 1;
            continue;
        }
        out.push(Event::new(y as u16, x as u16, t as u64, e.p));
    }
    stats.retained_count = out.len();
    out.sort_unstable();
    (EventStream::from_sorted_unchecked(out, g), stats)
}

/// Viewpoint transformation of a whole stream.
pub fn apply_vpt(
    stream: &EventStream,
    params: &VptParams,
) -> Result<(EventStream, TransformStats), TransformError> {
    let m = vpt_matrix(params)?;
    Ok(apply_matrix(stream, &m))
}

/// Image-plane rotation of a whole stream. Timestamps are never touched.
pub fn apply_spatial_rotation(stream: &EventStream, params: &RotationParams) -> Result<(EventStream, TransformStats), TransformError> {
    if !params.theta.is_finite() {
        return Err(TransformError::BadTheta(params.theta));
    }
    check_center(&[params.center_y, params.center_x])?;
    Ok(apply_matrix(stream, &spatial_rotation_matrix(params)))
}

/// The stretched time of a single event before any global shift.
#[inline]
pub fn sts_time(params: &StsParams, y: f64, x: f64, t: f64) -> f64 {
    let s = match params.plane {
        Plane::Yt => y,
        Plane::Xt => x,
    };
    t - params.tau * params.theta.tan() * (s - params.center_spatial)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StsOutcome {
    pub stream: EventStream,
    /// Offset added to every rounded stretched timestamp. Subtracting it from
    /// an output timestamp gives the pre-shift value `round(t')`.
    pub shift: i64,
}

/// Spatiotemporal stretch with the applied global shift reported.
///
/// After rounding, the whole stream is shifted so its earliest event sits at
/// the input's earliest timestamp. For a time-normalized input that is
/// `t = 0`; at `theta = 0` the output equals the input.
pub fn apply_sts_detailed(stream: &EventStream, params: &StsParams) -> Result<StsOutcome, TransformError> {
    params.validate()?;
    let Some(t_first) = stream.t_min() else {
        return Ok(StsOutcome {
            stream: stream.clone(),
            shift: 0,
        });
    };
    let slope = params.tau * params.theta.tan();
    let k = params.plane.spatial_index();

    let mut retimed: Vec<(i64, Event)> = Vec::with_capacity(stream.len());
    let mut lowest = i64::MAX;
    for e in stream.events() {
        let s = if k == 0 { f64::from(e.y) } else { f64::from(e.x) };
        let t = (e.t as f64 - slope * (s - params.center_spatial)).round() as i64;
        lowest = lowest.min(t);
        retimed.push((t, *e));
    }
    let shift = t_first as i64 - lowest;
    let mut out: Vec<Event> = retimed
        .into_iter()
        .map(|(t, e)| Event { t: (t + shift) as u64, ..e })
        .collect();
    out.sort_unstable();
    Ok(StsOutcome {
        stream: EventStream::from_sorted_unchecked(out, stream.geometry()),
        shift,
    })
}

/// Spatiotemporal stretch. Never discards events.
pub fn apply_sts(stream: &EventStream, params: &StsParams) -> Result<EventStream, TransformError> {
    apply_sts_detailed(stream, params).map(|o| o.stream)
}

/// `(t_max - t_min) / max(width, height)` in µs per pixel.
pub fn default_tau(stream: &EventStream) -> Result<f64, TransformError> {
    if stream.len() < 2 || stream.duration() == 0 {
        return Err(TransformError::DegenerateDuration);
    }
    let g = stream.geometry();
    let side = f64::from(g.width.max(g.height));
    Ok(stream.duration() as f64 / side)
}

/// Temporal midpoint `(t_min + t_max) / 2`, or 0 for an empty stream.
pub fn temporal_midpoint(stream: &EventStream) -> f64 {
    match (stream.t_min(), stream.t_max()) {
        (Some(lo), Some(hi)) => (lo as f64 + hi as f64) / 2.0,
        _ => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{canonicalize, SensorGeometry};
    use std::f64::consts::{FRAC_PI_4, PI};

    fn geo(w: u16, h: u16) -> SensorGeometry {
        SensorGeometry::new(w, h).unwrap()
    }

    fn stream(g: SensorGeometry, ev: &[(u16, u16, u64, i8)]) -> EventStream {
        canonicalize(ev.iter().map(|&(y, x, t, p)| Event::new(y, x, t, p)).collect(), g).unwrap()
    }

    #[test]
    fn zero_translation_is_identity() {
        assert_eq!(translation_to_center(0.0, 0.0, 0.0), Mat4::IDENTITY);
        assert_eq!(translation_back(0.0, 0.0, 0.0), Mat4::IDENTITY);
    }

    #[test]
    fn translations_are_inverse() {
        let prod = translation_to_center(1.0, 2.0, 3.0) * translation_back(1.0, 2.0, 3.0);
        assert_eq!(prod, Mat4::IDENTITY);
    }

    #[test]
    fn translation_moves_point_to_center_frame() {
        let v = translation_to_center(1.0, 2.0, 3.0).apply([5.0, 5.0, 5.0, 1.0]);
        assert_eq!(v, [4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn rotation_at_zero_is_identity() {
        for plane in [Plane::Yt, Plane::Xt] {
            assert_eq!(balanced_rotation(plane, 0.0, 37.0).unwrap(), Mat4::IDENTITY);
        }
    }

    #[test]
    fn unbalanced_quarter_turn() {
        let m = balanced_rotation(Plane::Yt, FRAC_PI_2, 1.0).unwrap();
        assert!(m.get(0, 0).abs() < 1e-15);
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.get(2, 0), -1.0);
        assert!(m.get(2, 2).abs() < 1e-15);
        assert_eq!(m.get(1, 1), 1.0);
        assert_eq!(m.get(3, 3), 1.0);
    }

    #[test]
    fn xt_rotation_layout() {
        let m = balanced_rotation(Plane::Xt, 0.3, 4.0).unwrap();
        let (s, c) = 0.3f64.sin_cos();
        assert_eq!(m.get(1, 1), c);
        assert_eq!(m.get(1, 2), 4.0 * s);
        assert_eq!(m.get(2, 1), -s / 4.0);
        assert_eq!(m.get(0, 0), 1.0);
        assert!(m.is_affine());
    }

    #[test]
    fn balanced_rotation_has_unit_determinant() {
        let m = balanced_rotation(Plane::Yt, 0.3, 50.0).unwrap();
        assert!((m.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tau_and_theta() {
        assert_eq!(balanced_rotation(Plane::Yt, 0.1, 0.0), Err(TransformError::BadTau(0.0)));
        assert!(balanced_rotation(Plane::Yt, 0.1, -2.0).is_err());
        assert!(VptParams::new(Plane::Yt, FRAC_PI_2, 1.0, 0.0, 0.0).is_ok());
        assert!(VptParams::new(Plane::Yt, 1.6, 1.0, 0.0, 0.0).is_err());
        assert!(StsParams::new(Plane::Yt, FRAC_PI_2, 1.0, 0.0).is_err());
        assert!(StsParams::new(Plane::Xt, -2.0, 1.0, 0.0).is_err());
        assert!(VptParams::new(Plane::Yt, 0.1, 1.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn vpt_matrix_zero_angle_is_identity() {
        let p = VptParams::new(Plane::Xt, 0.0, 12.5, 3.5, 1000.0).unwrap();
        assert_eq!(vpt_matrix(&p).unwrap(), Mat4::IDENTITY);
    }

    #[test]
    fn vpt_matrix_quarter_turn_example() {
        let p = VptParams::new(Plane::Yt, FRAC_PI_2, 1.0, 2.0, 3.0).unwrap();
        let m = vpt_matrix(&p).unwrap();
        let [y, x, t] = m.apply_point(5.0, 0.0, 7.0);
        assert!((y - -2.0).abs() < 1e-12);
        assert_eq!(x, 0.0);
        assert!((t - 6.0).abs() < 1e-12);

        let oracle = translation_to_center(2.0, 0.0, 3.0)
            * balanced_rotation(Plane::Yt, FRAC_PI_2, 1.0).unwrap()
            * translation_back(2.0, 0.0, 3.0);
        assert!(m.max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn vpt_quarter_turn_discards_out_of_bounds_row() {
        // y = 5 needs at least 6 rows to be a valid input event.
        let tall = stream(geo(4, 6), &[(5, 0, 7, 1)]);
        let p = VptParams::new(Plane::Yt, FRAC_PI_2, 1.0, 2.0, 3.0).unwrap();
        let (out, stats) = apply_vpt(&tall, &p).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.discarded_spatial, 1);
        assert_eq!(stats.input_count, 1);
    }

    #[test]
    fn vpt_zero_angle_is_bit_identical() {
        let s = stream(geo(8, 8), &[(0, 0, 3, 1), (7, 7, 10, -1), (3, 4, 10, 1)]);
        let p = VptParams::new(Plane::Yt, 0.0, 2.0, 3.5, 6.5).unwrap();
        let (out, stats) = apply_vpt(&s, &p).unwrap();
        assert_eq!(out, s);
        assert_eq!(stats, TransformStats::identity(3));
    }

    #[test]
    fn vpt_center_event_is_fixed() {
        let s = stream(geo(10, 10), &[(4, 2, 500, -1)]);
        for theta in [-1.2, -0.4, 0.3, 1.1] {
            for tau in [0.01, 1.0, 250.0] {
                let p = VptParams::new(Plane::Yt, theta, tau, 4.0, 500.0).unwrap();
                assert_eq!(apply_vpt(&s, &p).unwrap().0, s);
            }
        }
    }

    #[test]
    fn vpt_discards_negative_time() {
        // Rotating a late event at the top edge pushes it before t = 0.
        let s = stream(geo(8, 8), &[(0, 0, 0, 1), (7, 0, 0, 1)]);
        let p = VptParams::new(Plane::Yt, 0.2, 10.0, 3.5, 0.0).unwrap();
        let (out, stats) = apply_vpt(&s, &p).unwrap();
        assert_eq!(stats.discarded_temporal, 1);
        assert_eq!(stats.retained_count, 1);
        assert_eq!(out.events()[0].y, 7);
    }

    #[test]
    fn sts_example() {
        let p = StsParams::new(Plane::Yt, FRAC_PI_4, 2.0, 4.0).unwrap();
        assert_eq!(sts_time(&p, 10.0, 0.0, 1000.0).round(), 988.0);
        assert_eq!(sts_time(&p, 4.0, 3.0, 1000.0), 1000.0);

        let s = stream(geo(12, 12), &[(10, 0, 1000, 1), (4, 0, 1000, -1)]);
        let o = apply_sts_detailed(&s, &p).unwrap();
        let pre: Vec<i64> = o.stream.events().iter().map(|e| e.t as i64 - o.shift).collect();
        assert_eq!(pre, vec![988, 1000]);
        assert_eq!(o.stream.t_min(), Some(1000));
    }

    #[test]
    fn sts_zero_angle_is_identity() {
        let s = stream(geo(8, 8), &[(0, 0, 5, 1), (7, 3, 9, -1)]);
        let p = StsParams::new(Plane::Xt, 0.0, 3.0, 3.5).unwrap();
        assert_eq!(apply_sts(&s, &p).unwrap(), s);
    }

    #[test]
    fn sts_normalized_input_starts_at_zero() {
        let s = stream(geo(8, 8), &[(0, 0, 0, 1), (7, 0, 0, 1)]);
        let p = StsParams::new(Plane::Yt, 0.5, 10.0, 3.5).unwrap();
        let out = apply_sts(&s, &p).unwrap();
        assert_eq!(out.t_min(), Some(0));
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn sts_matches_stretched_vpt_time_row() {
        for (theta, tau, sc) in [(0.3, 2.0, 4.0), (-1.1, 75.0, 0.0), (1.3, 0.2, 17.5)] {
            let sts = StsParams::new(Plane::Xt, theta, tau, sc).unwrap();
            let vpt = vpt_matrix(&VptParams::new(Plane::Xt, -theta, tau, sc, 0.0).unwrap()).unwrap();
            for (y, x, t) in [(1.0, 2.0, 300.0), (9.0, 31.0, 0.0), (0.0, 0.0, 1.0e5)] {
                let stretched = vpt.apply_point(y, x, t)[2] / theta.cos();
                assert!((sts_time(&sts, y, x, t) - stretched).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn spatial_rotation_quarter_turn_sign_convention() {
        let p = RotationParams {
            theta: FRAC_PI_2,
            center_y: 0.0,
            center_x: 0.0,
        };
        let m = spatial_rotation_matrix(&p);
        let [y, x, _] = m.apply_point(0.0, 3.0, 0.0);
        assert!((y - -3.0).abs() < 1e-12);
        assert!(x.abs() < 1e-12);

        let s = stream(geo(5, 5), &[(0, 3, 9, 1)]);
        let (out, stats) = apply_spatial_rotation(&s, &p).unwrap();
        assert!(out.is_empty());
        assert_eq!(stats.discarded_spatial, 1);
    }

    #[test]
    fn spatial_rotation_point_reflection() {
        let g = geo(5, 5);
        let s = stream(g, &[(2, 2, 1, 1), (0, 1, 2, -1)]);
        let p = RotationParams {
            theta: PI,
            center_y: g.mid_y(),
            center_x: g.mid_x(),
        };
        let (out, stats) = apply_spatial_rotation(&s, &p).unwrap();
        assert_eq!(stats.retained_count, 2);
        assert_eq!(out.events(), &[Event::new(2, 2, 1, 1), Event::new(4, 3, 2, -1)]);
    }

    #[test]
    fn spatial_rotation_matches_translation_product() {
        let p = RotationParams {
            theta: 0.7,
            center_y: 3.0,
            center_x: -1.5,
        };
        let (s, c) = 0.7f64.sin_cos();
        let mut r = Mat4::IDENTITY;
        r.0[0] = [c, s, 0.0, 0.0];
        r.0[1] = [-s, c, 0.0, 0.0];
        let oracle = translation_to_center(3.0, -1.5, 0.0) * r * translation_back(3.0, -1.5, 0.0);
        assert!(spatial_rotation_matrix(&p).max_abs_diff(&oracle) < 1e-12);
    }

    #[test]
    fn default_tau_examples() {
        let s = stream(geo(128, 128), &[(0, 0, 0, 1), (1, 1, 128_000, 1)]);
        assert_eq!(default_tau(&s).unwrap(), 1000.0);
        let s = stream(geo(100, 50), &[(0, 0, 0, 1), (1, 1, 100, 1)]);
        assert_eq!(default_tau(&s).unwrap(), 1.0);
        let s = stream(geo(4, 4), &[(0, 0, 7, 1), (1, 1, 7, 1)]);
        assert_eq!(default_tau(&s), Err(TransformError::DegenerateDuration));
        let s = stream(geo(4, 4), &[(0, 0, 7, 1)]);
        assert_eq!(default_tau(&s), Err(TransformError::DegenerateDuration));
    }
}
