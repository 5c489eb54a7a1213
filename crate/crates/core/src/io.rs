//! Codecs for the three on-disk event formats.
//!
//! * `AtisBin`: 5 bytes per event. byte0 = x, byte1 = y, byte2 bit 7 =
//!   polarity (1 is ON), then a 23-bit big-endian timestamp in µs spread over
//!   byte2 bits 6..0, byte3 and byte4. No header, so geometry comes from the
//!   caller.
//! * `Csv`: header row naming the columns `t`, `x`, `y`, `p` in any order,
//!   polarity written as `1`/`-1` (`0` is read as `-1`).
//! * `Native`: `"EVT1"`, then little-endian `u16` width, `u16` height,
//!   `u64` count and `count` records of `(u16 y, u16 x, u64 t, i8 p)`.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::event::{canonicalize, Event, EventStream, SensorGeometry, StreamError};

pub const ATIS_RECORD_LEN: usize = 5;
pub const ATIS_MAX_TIMESTAMP: u64 = (1 << 23) - 1;
pub const NATIVE_MAGIC: &[u8; 4] = b"EVT1";
pub const NATIVE_HEADER_LEN: usize = 4 + 2 + 2 + 8;
pub const NATIVE_RECORD_LEN: usize = 2 + 2 + 8 + 1;
pub const CSV_HEADER: &str = "t,x,y,p";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("truncated input: {len} bytes is not a whole number of {record_len}-byte records")]
    Truncated { len: usize, record_len: usize },
    #[error("native container is {actual} bytes, header declares {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("bad magic; expected \"EVT1\"")]
    BadMagic,
    #[error("csv line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("record {index}: polarity {value} is outside the encoding domain")]
    BadPolarity { index: usize, value: i64 },
    #[error("record {index}: field `{field}` = {value} exceeds the format range (max {max})")]
    RangeOverflow {
        index: usize,
        field: &'static str,
        value: u64,
        max: u64,
    },
    #[error("file declares geometry {found}, caller expected {expected}")]
    GeometryMismatch {
        expected: SensorGeometry,
        found: SensorGeometry,
    },
    #[error("format carries no geometry and none was given")]
    MissingGeometry,
    #[error("unknown format `{0}`")]
    UnknownFormat(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatTag {
    AtisBin,
    Csv,
    Native,
}

impl FormatTag {
    pub fn extension(self) -> &'static str {
        match self {
            FormatTag::AtisBin => "bin",
            FormatTag::Csv => "csv",
            FormatTag::Native => "evt",
        }
    }

    /// Infers the format from a file extension (`.bin`, `.csv`, `.evt`).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "bin" => Some(FormatTag::AtisBin),
            "csv" => Some(FormatTag::Csv),
            "evt" => Some(FormatTag::Native),
            _ => None,
        }
    }
}

impl std::str::FromStr for FormatTag {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bin" | "atis" | "atisbin" | "atis-bin" => Ok(FormatTag::AtisBin),
            "csv" => Ok(FormatTag::Csv),
            "evt" | "native" => Ok(FormatTag::Native),
            other => Err(CodecError::UnknownFormat(other.to_owned())),
        }
    }
}

/// Decodes `bytes` into a canonical stream.
///
/// `Native` files carry their own geometry; if `geometry` is also given the
/// two must agree. For `AtisBin` and `Csv` a missing geometry is inferred as
/// the bounding box of the decoded coordinates.
pub fn decode(
    bytes: &[u8],
    format: FormatTag,
    geometry: Option<SensorGeometry>,
) -> Result<EventStream, CodecError> {
    let (events, declared) = match format {
        FormatTag::AtisBin => (decode_atis(bytes)?, None),
        FormatTag::Csv => (decode_csv(bytes)?, None),
        FormatTag::Native => {
            let (g, events) = decode_native(bytes)?;
            (events, Some(g))
        }
    };
    let geometry = match (declared, geometry) {
        (Some(found), Some(expected)) if found != expected => {
            return Err(CodecError::GeometryMismatch { expected, found })
        }
        (Some(g), _) | (None, Some(g)) => g,
        (None, None) => infer_geometry(&events).ok_or(CodecError::MissingGeometry)?,
    };
    Ok(canonicalize(events, geometry)?)
}

/// Encodes a stream. The output is deterministic for a given stream.
pub fn encode(stream: &EventStream, format: FormatTag) -> Result<Vec<u8>, CodecError> {
    match format {
        FormatTag::AtisBin => encode_atis(stream.events()),
        FormatTag::Csv => Ok(encode_csv(stream.events())),
        FormatTag::Native => Ok(encode_native(stream)),
    }
}

/// Smallest geometry containing every event, or `None` for no events.
pub fn infer_geometry(events: &[Event]) -> Option<SensorGeometry> {
    let max_y = events.iter().map(|e| e.y).max()?;
    let max_x = events.iter().map(|e| e.x).max()?;
    let width = max_x.checked_add(1)?;
    let height = max_y.checked_add(1)?;
    SensorGeometry::new(width, height).ok()
}

fn decode_atis(bytes: &[u8]) -> Result<Vec<Event>, CodecError> {
    if !bytes.len().is_multiple_of(ATIS_RECORD_LEN) {
        return Err(CodecError::Truncated {
            len: bytes.len(),
            record_len: ATIS_RECORD_LEN,
        });
    }
    Ok(bytes
        .chunks_exact(ATIS_RECORD_LEN)
        .map(|r| {
            let p = if r[2] & 0x80 != 0 { 1 } else { -1 };
            let t = (u64::from(r[2] & 0x7f) << 16) | (u64::from(r[3]) << 8) | u64::from(r[4]);
            Event::new(u16::from(r[1]), u16::from(r[0]), t, p)
        })
        .collect())
}

fn encode_atis(events: &[Event]) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::with_capacity(events.len() * ATIS_RECORD_LEN);
    for (index, e) in events.iter().enumerate() {
        let check = |field: &'static str, value: u64, max: u64| {
            if value > max {
                Err(CodecError::RangeOverflow {
                    index,
                    field,
                    value,
                    max,
                })
            } else {
                Ok(())
            }
        };
        check("x", u64::from(e.x), 255)?;
        check("y", u64::from(e.y), 255)?;
        check("t", e.t, ATIS_MAX_TIMESTAMP)?;
        let pol = if e.p > 0 { 0x80 } else { 0x00 };
        out.extend_from_slice(&[
            e.x as u8,
            e.y as u8,
            pol | ((e.t >> 16) as u8 & 0x7f),
            (e.t >> 8) as u8,
            e.t as u8,
        ]);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
enum Column {
    T,
    X,
    Y,
    P,
}

fn decode_csv(bytes: &[u8]) -> Result<Vec<Event>, CodecError> {
    let text = std::str::from_utf8(bytes).map_err(|e| CodecError::MalformedCsv {
        line: 1,
        reason: format!("not utf-8: {e}"),
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let Some((header_line, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let columns = parse_csv_header(header_line, header)?;

    let mut events = Vec::new();
    for (line, row) in lines {
        let fields: Vec<&str> = row.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(CodecError::MalformedCsv {
                line,
                reason: format!("expected 4 fields, found {}", fields.len()),
            });
        }
        let mut t = 0u64;
        let mut x = 0u16;
        let mut y = 0u16;
        let mut p = 0i64;
        for (col, raw) in columns.iter().zip(&fields) {
            let bad = |what: &str| CodecError::MalformedCsv {
                line,
                reason: format!("{what} `{raw}`"),
            };
            match col {
                Column::T => t = raw.parse().map_err(|_| bad("invalid timestamp"))?,
                Column::X => x = raw.parse().map_err(|_| bad("invalid x"))?,
                Column::Y => y = raw.parse().map_err(|_| bad("invalid y"))?,
                Column::P => p = raw.parse().map_err(|_| bad("invalid polarity"))?,
            }
        }
        let p = match p {
            1 => 1,
            0 | -1 => -1,
            value => {
                return Err(CodecError::BadPolarity {
                    index: events.len(),
                    value,
                })
            }
        };
        events.push(Event::new(y, x, t, p));
    }
    Ok(events)
}

fn parse_csv_header(line: usize, header: &str) -> Result<[Column; 4], CodecError> {
    let names: Vec<String> = header
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    let malformed = |reason: String| CodecError::MalformedCsv { line, reason };
    if names.len() != 4 {
        return Err(malformed(format!(
            "header must name 4 columns (t,x,y,p), found {}",
            names.len()
        )));
    }
    let mut cols = [Column::T; 4];
    let mut seen = [false; 4];
    for (slot, name) in cols.iter_mut().zip(&names) {
        let (col, i) = match name.as_str() {
            "t" | "timestamp" => (Column::T, 0),
            "x" => (Column::X, 1),
            "y" => (Column::Y, 2),
            "p" | "polarity" => (Column::P, 3),
            other => return Err(malformed(format!("unknown header column `{other}`"))),
        };
        if seen[i] {
            return Err(malformed(format!("duplicate header column `{name}`")));
        }
        seen[i] = true;
        *slot = col;
    }
    Ok(cols)
}

fn encode_csv(events: &[Event]) -> Vec<u8> {
    let mut s = String::with_capacity(8 + events.len() * 16);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for e in events {
        let _ = writeln!(s, "{},{},{},{}", e.t, e.x, e.y, e.p);
    }
    s.into_bytes()
}

fn decode_native(bytes: &[u8]) -> Result<(SensorGeometry, Vec<Event>), CodecError> {
    if bytes.len() < NATIVE_HEADER_LEN {
        return Err(CodecError::Truncated {
            len: bytes.len(),
            record_len: NATIVE_HEADER_LEN,
        });
    }
    if &bytes[..4] != NATIVE_MAGIC {
        return Err(CodecError::BadMagic);
    }
    let width = u16::from_le_bytes([bytes[4], bytes[5]]);
    let height = u16::from_le_bytes([bytes[6], bytes[7]]);
    let count = u64::from_le_bytes(bytes[8..16].try_into().expect("8-byte slice"));
    let geometry = SensorGeometry::new(width, height)?;

    let body = &bytes[NATIVE_HEADER_LEN..];
    let expected = usize::try_from(count)
        .ok()
        .and_then(|n| n.checked_mul(NATIVE_RECORD_LEN))
        .and_then(|n| n.checked_add(NATIVE_HEADER_LEN))
        .unwrap_or(usize::MAX);
    if !body.len().is_multiple_of(NATIVE_RECORD_LEN) {
        return Err(CodecError::Truncated {
            len: bytes.len(),
            record_len: NATIVE_RECORD_LEN,
        });
    }
    if bytes.len() != expected {
        return Err(CodecError::LengthMismatch {
            expected,
            actual: bytes.len(),
        });
    }

    let mut events = Vec::with_capacity(body.len() / NATIVE_RECORD_LEN);
    for (index, r) in body.chunks_exact(NATIVE_RECORD_LEN).enumerate() {
        let y = u16::from_le_bytes([r[0], r[1]]);
        let x = u16::from_le_bytes([r[2], r[3]]);
        let t = u64::from_le_bytes(r[4..12].try_into().expect("8-byte slice"));
        let p = r[12] as i8;
        if p != 1 && p != -1 {
            return Err(CodecError::BadPolarity {
                index,
                value: i64::from(p),
            });
        }
        events.push(Event::new(y, x, t, p));
    }
    Ok((geometry, events))
}

fn encode_native(stream: &EventStream) -> Vec<u8> {
    let g = stream.geometry();
    let mut out = Vec::with_capacity(NATIVE_HEADER_LEN + stream.len() * NATIVE_RECORD_LEN);
    out.extend_from_slice(NATIVE_MAGIC);
    out.extend_from_slice(&g.width.to_le_bytes());
    out.extend_from_slice(&g.height.to_le_bytes());
    out.extend_from_slice(&(stream.len() as u64).to_le_bytes());
    for e in stream.events() {
        out.extend_from_slice(&e.y.to_le_bytes());
        out.extend_from_slice(&e.x.to_le_bytes());
        out.extend_from_slice(&e.t.to_le_bytes());
        out.push(e.p as u8);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geo(w: u16, h: u16) -> SensorGeometry {
        SensorGeometry::new(w, h).unwrap()
    }

    #[test]
    fn atis_hand_decoded_record() {
        let s = decode(&[0x05, 0x0A, 0x80, 0x00, 0x64], FormatTag::AtisBin, Some(geo(34, 34))).unwrap();
        assert_eq!(s.events(), &[Event::new(10, 5, 100, 1)]);
    }

    #[test]
    fn atis_encode_matches_hand_layout() {
        let s = canonicalize(vec![Event::new(10, 5, 100, 1)], geo(34, 34)).unwrap();
        assert_eq!(encode(&s, FormatTag::AtisBin).unwrap(), vec![0x05, 0x0A, 0x80, 0x00, 0x64]);
    }

    #[test]
    fn atis_negative_polarity_and_wide_timestamp() {
        // t = 0x7ABCDE uses every timestamp bit; bit 7 of byte2 stays clear for OFF.
        let bytes = [0xFF, 0x01, 0x7A, 0xBC, 0xDE];
        let s = decode(&bytes, FormatTag::AtisBin, None).unwrap();
        assert_eq!(s.events(), &[Event::new(1, 255, 0x7ABCDE, -1)]);
        assert_eq!(s.geometry(), geo(256, 2));
        assert_eq!(encode(&s, FormatTag::AtisBin).unwrap(), bytes);
    }

    #[test]
    fn empty_inputs() {
        let g = geo(4, 4);
        assert!(decode(&[], FormatTag::AtisBin, Some(g)).unwrap().is_empty());
        let empty = EventStream::empty(g);
        assert!(encode(&empty, FormatTag::AtisBin).unwrap().is_empty());
        assert_eq!(encode(&empty, FormatTag::Csv).unwrap(), b"t,x,y,p\n");
        assert!(decode(b"t,x,y,p\n", FormatTag::Csv, Some(g)).unwrap().is_empty());
    }

    #[test]
    fn empty_without_geometry_is_an_error() {
        assert_eq!(decode(&[], FormatTag::AtisBin, None), Err(CodecError::MissingGeometry));
    }

    #[test]
    fn atis_truncated() {
        let err = decode(&[1, 2, 3], FormatTag::AtisBin, Some(geo(4, 4))).unwrap_err();
        assert!(matches!(err, CodecError::Truncated { len: 3, .. }));
    }

    #[test]
    fn atis_range_overflow_names_field() {
        let s = canonicalize(vec![Event::new(0, 0, 1 << 23, 1)], geo(4, 4)).unwrap();
        let err = encode(&s, FormatTag::AtisBin).unwrap_err();
        assert!(matches!(err, CodecError::RangeOverflow { field: "t", index: 0, .. }));

        let s = canonicalize(vec![Event::new(0, 0, 0, 1), Event::new(0, 300, 1, 1)], geo(400, 4)).unwrap();
        let err = encode(&s, FormatTag::AtisBin).unwrap_err();
        assert!(matches!(err, CodecError::RangeOverflow { field: "x", index: 1, value: 300, .. }));
    }

    #[test]
    fn csv_direct_field_mapping() {
        let s = decode(b"t,x,y,p\n100,5,10,1\n", FormatTag::Csv, Some(geo(34, 34))).unwrap();
        assert_eq!(s.events(), &[Event::new(10, 5, 100, 1)]);
    }

    #[test]
    fn csv_header_order_is_authoritative() {
        let s = decode(b"x,y,p,t\n5,10,0,100\n", FormatTag::Csv, Some(geo(34, 34))).unwrap();
        assert_eq!(s.events(), &[Event::new(10, 5, 100, -1)]);
    }

    #[test]
    fn csv_errors() {
        let g = Some(geo(34, 34));
        let err = decode(b"t,x,y,p\n1,2,3\n", FormatTag::Csv, g).unwrap_err();
        assert!(matches!(err, CodecError::MalformedCsv { line: 2, .. }));
        let err = decode(b"t,x,y,p\n1,2,z,1\n", FormatTag::Csv, g).unwrap_err();
        assert!(matches!(err, CodecError::MalformedCsv { line: 2, .. }));
        let err = decode(b"t,x,y,p\n1,2,3,2\n", FormatTag::Csv, g).unwrap_err();
        assert_eq!(err, CodecError::BadPolarity { index: 0, value: 2 });
        let err = decode(b"t,x,y,q\n", FormatTag::Csv, g).unwrap_err();
        assert!(matches!(err, CodecError::MalformedCsv { line: 1, .. }));
        let err = decode(b"t,x,y,p\n1,40,3,1\n", FormatTag::Csv, g).unwrap_err();
        assert!(matches!(err, CodecError::Stream(StreamError::OutOfBounds { index: 0, .. })));
    }

    #[test]
    fn native_errors() {
        let g = geo(3, 2);
        let s = canonicalize(vec![Event::new(1, 2, 9, -1)], g).unwrap();
        let bytes = encode(&s, FormatTag::Native).unwrap();
        assert_eq!(bytes.len(), NATIVE_HEADER_LEN + NATIVE_RECORD_LEN);

        assert!(matches!(
            decode(&bytes[..bytes.len() - 1], FormatTag::Native, None),
            Err(CodecError::Truncated { .. })
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad, FormatTag::Native, None), Err(CodecError::BadMagic));
        let mut bad = bytes.clone();
        *bad.last_mut().unwrap() = 0;
        assert!(matches!(decode(&bad, FormatTag::Native, None), Err(CodecError::BadPolarity { .. })));
        let err = decode(&bytes, FormatTag::Native, Some(geo(4, 4))).unwrap_err();
        assert!(matches!(err, CodecError::GeometryMismatch { .. }));
        let mut extra = bytes.clone();
        extra.extend_from_slice(&[0; NATIVE_RECORD_LEN]);
        assert!(matches!(decode(&extra, FormatTag::Native, None), Err(CodecError::LengthMismatch { .. })));
    }

    #[test]
    fn native_reencode_is_byte_identical() {
        let g = geo(640, 480);
        let s = canonicalize(
            vec![Event::new(479, 639, 1 << 40, 1), Event::new(0, 0, 0, -1), Event::new(5, 7, 12, 1)],
            g,
        )
        .unwrap();
        let a = encode(&s, FormatTag::Native).unwrap();
        let back = decode(&a, FormatTag::Native, None).unwrap();
        assert_eq!(back, s);
        assert_eq!(encode(&back, FormatTag::Native).unwrap(), a);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(FormatTag::from_path(Path::new("a/b.BIN")), Some(FormatTag::AtisBin));
        assert_eq!(FormatTag::from_path(Path::new("x.csv")), Some(FormatTag::Csv));
        assert_eq!(FormatTag::from_path(Path::new("x.evt")), Some(FormatTag::Native));
        assert_eq!(FormatTag::from_path(Path::new("x.dat")), None);
    }

    fn arb_stream(max_xy: u16, max_t: u64) -> impl Strategy<Value = EventStream> {
        prop::collection::vec(
            (0..max_xy, 0..max_xy, 0..=max_t, prop::bool::ANY)
                .prop_map(|(y, x, t, pos)| Event::new(y, x, t, if pos { 1 } else { -1 })),
            0..40,
        )
        .prop_map(move |ev| canonicalize(ev, SensorGeometry::new(max_xy, max_xy).unwrap()).unwrap())
    }

    proptest! {
        #[test]
        fn round_trip_all_formats(s in arb_stream(256, ATIS_MAX_TIMESTAMP)) {
            for f in [FormatTag::AtisBin, FormatTag::Csv, FormatTag::Native] {
                let bytes = encode(&s, f).unwrap();
                let back = decode(&bytes, f, Some(s.geometry())).unwrap();
                prop_assert_eq!(&back, &s);
                prop_assert_eq!(encode(&back, f).unwrap(), bytes);
            }
        }

        #[test]
        fn decode_never_panics(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
            for f in [FormatTag::AtisBin, FormatTag::Csv, FormatTag::Native] {
                let _ = decode(&bytes, f, None);
            }
        }
    }
}
