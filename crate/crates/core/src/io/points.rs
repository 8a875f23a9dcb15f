//! Point ingestion from CSV and GeoJSON.
//!
//! CSV needs a header naming `lon`, `lat`, `timestamp` and `label` (any
//! order, extra columns ignored). GeoJSON input is a FeatureCollection of
//! Point features with `timestamp` and `label` properties. Timestamps are
//! ISO-8601 (`2011-07-04T12:00:00Z`) or integer Unix seconds, always UTC.
//!
//! A bad record is counted in [`SkipReport::malformed`] and skipped; only an
//! unreadable stream or a missing header is fatal.

use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime};
use serde_json::Value;

use crate::cube::SkipReport;
use crate::error::{Error, Result};
use crate::grid::{LabeledPoint, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointFormat {
    Csv,
    GeoJson,
}

impl FromStr for PointFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(PointFormat::Csv),
            "geojson" | "json" => Ok(PointFormat::GeoJson),
            other => Err(Error::config(format!("unknown point format `{other}`"))),
        }
    }
}

/// Parses a timestamp to Unix seconds.
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        // chrono's representable range
        return DateTime::from_timestamp(secs, 0).map(|_| secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Some(dt.timestamp());
    }
    NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
        .ok()
        .map(|dt| dt.and_utc().timestamp())
}

fn coord(raw: &str, limit: f64) -> Option<f64> {
    let v: f64 = raw.trim().parse().ok()?;
    (v.is_finite() && v.abs() <= limit).then_some(v)
}

pub fn parse_points<R: Read>(
    input: R,
    format: PointFormat,
    vocab: &Vocabulary,
) -> Result<(Vec<LabeledPoint>, SkipReport)> {
    match format {
        PointFormat::Csv => parse_csv(input, vocab),
        PointFormat::GeoJson => parse_geojson(input, vocab),
    }
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            context: format!("reading CSV near line {line}"),
            source,
        },
        other => Error::parse(line, format!("{other:?}")),
    }
}

fn parse_csv<R: Read>(input: R, vocab: &Vocabulary) -> Result<(Vec<LabeledPoint>, SkipReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.byte_headers().map_err(csv_error)?.clone();
    if header.is_empty() {
        return Err(Error::parse(1, "missing CSV header"));
    }
    let column = |name: &str| {
        header
            .iter()
            .position(|h| std::str::from_utf8(h).is_ok_and(|h| h.trim().trim_start_matches('\u{feff}') == name))
            .ok_or_else(|| Error::parse(1, format!("CSV header lacks a `{name}` column")))
    };
    let cols = [column("lon")?, column("lat")?, column("timestamp")?, column("label")?];

    let mut points = Vec::new();
    let mut report = SkipReport::default();
    let mut record = csv::ByteRecord::new();
    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => match csv_row(&record, cols, vocab) {
                Some(p) => {
                    report.accepted += 1;
                    points.push(p);
                }
                None => report.malformed += 1,
            },
            Err(err) => match err.kind() {
                csv::ErrorKind::Io(_) => return Err(csv_error(err)),
                _ => report.malformed += 1,
            },
        }
    }
    Ok((points, report))
}

fn csv_row(record: &csv::ByteRecord, cols: [usize; 4], vocab: &Vocabulary) -> Option<LabeledPoint> {
    let field = |k: usize| record.get(cols[k]).and_then(|b| std::str::from_utf8(b).ok());
    let lon = coord(field(0)?, 180.0)?;
    let lat = coord(field(1)?, 90.0)?;
    let timestamp = parse_timestamp(field(2)?)?;
    let label = vocab.id(field(3)?.trim())?;
    Some(LabeledPoint::new(lon, lat, timestamp, label))
}

fn parse_geojson<R: Read>(mut input: R, vocab: &Vocabulary) -> Result<(Vec<LabeledPoint>, SkipReport)> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|source| Error::Io {
        context: "reading GeoJSON".into(),
        source,
    })?;
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| Error::parse(e.line() as u64, e.to_string()))?;
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::parse(1, "expected a GeoJSON FeatureCollection"));
    }
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(1, "FeatureCollection has no `features` array"))?;

    let mut points = Vec::new();
    let mut report = SkipReport::default();
    for feature in features {
        match geojson_feature(feature, vocab) {
            Some(p) => {
                report.accepted += 1;
                points.push(p);
            }
            None => report.malformed += 1,
        }
    }
    Ok((points, report))
}

fn geojson_feature(feature: &Value, vocab: &Vocabulary) -> Option<LabeledPoint> {
    if feature.get("type")?.as_str()? != "Feature" {
        return None;
    }
    let geometry = feature.get("geometry")?;
    if geometry.get("type")?.as_str()? != "Point" {
        return None;
    }
    let coords = geometry.get("coordinates")?.as_array()?;
    let lon = coords.first()?.as_f64()?;
    let lat = coords.get(1)?.as_f64()?;
    if !(lon.abs() <= 180.0 && lat.abs() <= 90.0) {
        return None;
    }
    let props = feature.get("properties")?;
    let timestamp = match props.get("timestamp")? {
        Value::String(s) => parse_timestamp(s)?,
        Value::Number(n) => {
            let secs = n.as_i64()?;
            DateTime::from_timestamp(secs, 0)?;
            secs
        }
        _ => return None,
    };
    let label = vocab.id(props.get("label")?.as_str()?)?;
    Some(LabeledPoint::new(lon, lat, timestamp, label))
}
