//! Event and stream types.
//!
//! Events are stored as `(t, y, x, p)` so that the derived ordering is the
//! canonical one: time first, ties broken by row, column, then polarity.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("event {index} at (y={y}, x={x}) is outside the {width}x{height} sensor")]
    OutOfBounds {
        index: usize,
        y: u16,
        x: u16,
        width: u16,
        height: u16,
    },
    #[error("event {index} has polarity {p}; expected +1 or -1")]
    BadPolarity { index: usize, p: i8 },
    #[error("sensor geometry must be at least 1x1, got {width}x{height}")]
    BadGeometry { width: u16, height: u16 },
    #[error("operation requires a non-empty stream")]
    Empty,
}

/// A single brightness-change sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Event {
    /// Timestamp in microseconds.
    pub t: u64,
    /// Pixel row.
    pub y: u16,
    /// Pixel column.
    pub x: u16,
    /// Polarity, `+1` or `-1`.
    pub p: i8,
}

impl Event {
    pub const fn new(y: u16, x: u16, t: u64, p: i8) -> Self {
        Self { t, y, x, p }
    }

    #[inline]
    pub fn has_valid_polarity(&self) -> bool {
        self.p == 1 || self.p == -1
    }
}

/// An event whose coordinates came out of a real-valued transform and have
/// not been rounded yet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousEvent {
    pub y: f64,
    pub x: f64,
    pub t: f64,
    pub p: i8,
}

impl From<Event> for ContinuousEvent {
    fn from(e: Event) -> Self {
        Self {
            y: f64::from(e.y),
            x: f64::from(e.x),
            t: e.t as f64,
            p: e.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SensorGeometry {
    pub width: u16,
    pub height: u16,
}

impl SensorGeometry {
    pub fn new(width: u16, height: u16) -> Result<Self, StreamError> {
        if width == 0 || height == 0 {
            return Err(StreamError::BadGeometry { width, height });
        }
        Ok(Self { width, height })
    }

    #[inline]
    pub fn contains(&self, y: u16, x: u16) -> bool {
        y < self.height && x < self.width
    }

    pub fn pixel_count(&self) -> usize {
        usize::from(self.width) * usize::from(self.height)
    }

    /// Midpoint row `(H - 1) / 2`.
    pub fn mid_y(&self) -> f64 {
        (f64::from(self.height) - 1.0) / 2.0
    }

    /// Midpoint column `(W - 1) / 2`.
    pub fn mid_x(&self) -> f64 {
        (f64::from(self.width) - 1.0) / 2.0
    }
}

impl fmt::Display for SensorGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

/// A canonical event stream: sorted by `(t, y, x, p)`, in bounds, and with
/// valid polarities. The only way to build one is [`canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventStream {
    events: Vec<Event>,
    geometry: SensorGeometry,
}

impl EventStream {
    pub fn empty(geometry: SensorGeometry) -> Self {
        Self {
            events: Vec::new(),
            geometry,
        }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn geometry(&self) -> SensorGeometry {
        self.geometry
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn t_min(&self) -> Option<u64> {
        self.events.first().map(|e| e.t)
    }

    pub fn t_max(&self) -> Option<u64> {
        self.events.last().map(|e| e.t)
    }

    /// `t_max - t_min`, or zero for an empty stream.
    pub fn duration(&self) -> u64 {
        match (self.t_min(), self.t_max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0,
        }
    }

    pub fn into_events(self) -> Vec<Event> {
        self.events
    }

    /// Builds a stream from events already known to be canonical. Only for
    /// callers inside the crate that maintain the invariants themselves.
    pub(crate) fn from_sorted_unchecked(events: Vec<Event>, geometry: SensorGeometry) -> Self {
        debug_assert!(validate(&events, geometry).is_empty());
        Self { events, geometry }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    OutOfBounds { index: usize },
    Unsorted { index: usize },
    BadPolarity { index: usize },
}

/// Result of [`validate`]. Holds at most one entry per violation class,
/// pointing at the first offending index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the stream invariants on an arbitrary event sequence.
pub fn validate(events: &[Event], geometry: SensorGeometry) -> ValidationReport {
    let mut out_of_bounds = None;
    let mut unsorted = None;
    let mut bad_polarity = None;

    for (i, e) in events.iter().enumerate() {
        if out_of_bounds.is_none() && !geometry.contains(e.y, e.x) {
            out_of_bounds = Some(i);
        }
        if bad_polarity.is_none() && !e.has_valid_polarity() {
            bad_polarity = Some(i);
        }
        if unsorted.is_none() && i > 0 && events[i - 1] > *e {
            unsorted = Some(i);
        }
    }

    let mut violations = Vec::new();
    if let Some(index) = out_of_bounds {
        violations.push(Violation::OutOfBounds { index });
    }
    if let Some(index) = unsorted {
        violations.push(Violation::Unsorted { index });
    }
    if let Some(index) = bad_polarity {
        violations.push(Violation::BadPolarity { index });
    }
    ValidationReport { violations }
}

/// Sorts events into canonical order after checking bounds and polarity.
pub fn canonicalize(
    mut events: Vec<Event>,
    geometry: SensorGeometry,
) -> Result<EventStream, StreamError> {
    for (index, e) in events.iter().enumerate() {
        if !e.has_valid_polarity() {
            return Err(StreamError::BadPolarity { index, p: e.p });
        }
        if !geometry.contains(e.y, e.x) {
            return Err(StreamError::OutOfBounds {
                index,
                y: e.y,
                x: e.x,
                width: geometry.width,
                height: geometry.height,
            });
        }
    }
    if !events.windows(2).all(|w| w[0] <= w[1]) {
        events.sort_unstable();
    }
    Ok(EventStream { events, geometry })
}

/// Shifts all timestamps so the earliest event sits at `t = 0`.
pub fn normalize_time(stream: &EventStream) -> Result<EventStream, StreamError> {
    let t0 = stream.t_min().ok_or(StreamError::Empty)?;
    let events = stream
        .events
        .iter()
        .map(|e| Event { t: e.t - t0, ..*e })
        .collect();
    Ok(EventStream::from_sorted_unchecked(events, stream.geometry))
}
