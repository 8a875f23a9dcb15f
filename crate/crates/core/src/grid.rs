//! Spatial grid, yearly time axis and label vocabulary.
//!
//! The grid treats longitude/latitude as a planar rectangle. Each bin is
//! `(lon_max - lon_min) / nx` wide and `(lat_max - lat_min) / ny` tall, and a
//! point belongs to the bin whose center is nearest. Points that sit exactly
//! on an interior bin edge go to the higher-index bin; points on the max edge
//! of the box clamp to the last bin.

use std::cmp::Ordering;
use std::fmt;

use chrono::{DateTime, Datelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index into a [`Vocabulary`].
pub type LabelId = u16;

/// One geotagged, timestamped observation carrying a categorical label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub lon: f64,
    pub lat: f64,
    /// Unix seconds, UTC.
    pub timestamp: i64,
    pub label: LabelId,
}

impl LabeledPoint {
    pub fn new(lon: f64, lat: f64, timestamp: i64, label: LabelId) -> Self {
        Self {
            lon,
            lat,
            timestamp,
            label,
        }
    }

    /// True when the coordinates are finite WGS84 degrees.
    pub fn has_valid_coords(&self) -> bool {
        self.lon.is_finite()
            && self.lat.is_finite()
            && (-180.0..=180.0).contains(&self.lon)
            && (-90.0..=90.0).contains(&self.lat)
    }
}

/// Axis-aligned box in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub lon_min: f64,
    pub lat_min: f64,
    pub lon_max: f64,
    pub lat_max: f64,
}

impl BBox {
    pub fn new(lon_min: f64, lat_min: f64, lon_max: f64, lat_max: f64) -> Result<Self> {
        let b = Self {
            lon_min,
            lat_min,
            lon_max,
            lat_max,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.lon_min, self.lat_min, self.lon_max, self.lat_max]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::config("bounding box has non-finite coordinates"));
        }
        if !(self.lon_min < self.lon_max && self.lat_min < self.lat_max) {
            return Err(Error::config(format!(
                "degenerate bounding box ({}, {}) -> ({}, {})",
                self.lon_min, self.lat_min, self.lon_max, self.lat_max
            )));
        }
        Ok(())
    }

    /// Closed containment test.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        lon >= self.lon_min && lon <= self.lon_max && lat >= self.lat_min && lat <= self.lat_max
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.lon_min <= other.lon_max
            && other.lon_min <= self.lon_max
            && self.lat_min <= other.lat_max
            && other.lat_min <= self.lat_max
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.lon_min, self.lat_min, self.lon_max, self.lat_max]
    }
}

/// Column `i` (longitude axis) and row `j` (latitude axis) of a grid bin.
///
/// Ordering is row-major: by `j`, then `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinIndex {
    pub i: u32,
    pub j: u32,
}

impl BinIndex {
    pub const fn new(i: u32, j: u32) -> Self {
        Self { i, j }
    }
}

impl Ord for BinIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.i).cmp(&(other.j, other.i))
    }
}

impl PartialOrd for BinIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.i, self.j)
    }
}

/// A planar bounding box partitioned into `nx` x `ny` bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bbox: BBox,
    pub nx: u32,
    pub ny: u32,
}

impl GridSpec {
    pub fn new(bbox: BBox, nx: u32, ny: u32) -> Result<Self> {
        let grid = Self { bbox, nx, ny };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        self.bbox.validate()?;
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::config("grid needs at least one bin along each axis"));
        }
        if !(self.bin_width() > 0.0 && self.bin_height() > 0.0) {
            return Err(Error::config("bin size underflows to zero"));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        (self.bbox.lon_max - self.bbox.lon_min) / f64::from(self.nx)
    }

    pub fn bin_height(&self) -> f64 {
        (self.bbox.lat_max - self.bbox.lat_min) / f64::from(self.ny)
    }

    pub fn bin_count(&self) -> u64 {
        u64::from(self.nx) * u64::from(self.ny)
    }

    pub fn contains_bin(&self, bin: BinIndex) -> bool {
        bin.i < self.nx && bin.j < self.ny
    }

    /// Row-major linear index.
    pub fn linear(&self, bin: BinIndex) -> u64 {
        u64::from(bin.j) * u64::from(self.nx) + u64::from(bin.i)
    }

    pub fn bin_center(&self, bin: BinIndex) -> (f64, f64) {
        (
            self.bbox.lon_min + (f64::from(bin.i) + 0.5) * self.bin_width(),
            self.bbox.lat_min + (f64::from(bin.j) + 0.5) * self.bin_height(),
        )
    }

    /// The bin rectangle in degrees.
    pub fn bin_bounds(&self, bin: BinIndex) -> BBox {
        let (w, h) = (self.bin_width(), self.bin_height());
        BBox {
            lon_min: self.bbox.lon_min + f64::from(bin.i) * w,
            lat_min: self.bbox.lat_min + f64::from(bin.j) * h,
            lon_max: self.bbox.lon_min + f64::from(bin.i + 1) * w,
            lat_max: self.bbox.lat_min + f64::from(bin.j + 1) * h,
        }
    }

    /// Assigns a coordinate to the bin with the nearest center.
    pub fn bin_point(&self, lon: f64, lat: f64) -> Result<BinIndex> {
        if !self.bbox.contains(lon, lat) {
            return Err(Error::OutOfBounds { lon, lat });
        }
        let i = axis_index(lon - self.bbox.lon_min, self.bin_width(), self.nx);
        let j = axis_index(lat - self.bbox.lat_min, self.bin_height(), self.ny);
        Ok(BinIndex { i, j })
    }
}

fn axis_index(offset: f64, step: f64, n: u32) -> u32 {
    let raw = (offset / step).floor();
    if raw <= 0.0 {
        0
    } else {
        (raw as u64).min(u64::from(n - 1)) as u32
    }
}

/// Free-function form of [`GridSpec::bin_point`].
pub fn bin_point(grid: &GridSpec, lon: f64, lat: f64) -> Result<BinIndex> {
    grid.bin_point(lon, lat)
}

/// Consecutive calendar years, binned by the UTC year of a timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub year_start: i32,
    pub year_count: u16,
}

impl TimeAxis {
    pub fn new(year_start: i32, year_count: u16) -> Result<Self> {
        let axis = Self { year_start, year_count };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.year_count == 0 {
            return Err(Error::config("time axis needs at least one year"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        usize::from(self.year_count)
    }

    pub fn is_empty(&self) -> bool {
        self.year_count == 0
    }

    pub fn year(&self, index: usize) -> i32 {
        self.year_start + index as i32
    }

    pub fn years(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.len()).map(move |y| self.year(y))
    }

    /// Index of a calendar year on this axis, if covered.
    pub fn index_of_year(&self, year: i32) -> Option<usize> {
        let offset = i64::from(year) - i64::from(self.year_start);
        (0..i64::from(self.year_count))
            .contains(&offset)
            .then_some(offset as usize)
    }

    /// Index of the UTC calendar year containing `timestamp`.
    pub fn index_of_timestamp(&self, timestamp: i64) -> Option<usize> {
        utc_year(timestamp).and_then(|y| self.index_of_year(y))
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::YearIndex {
                index,
                count: self.len(),
            })
        }
    }
}

/// UTC calendar year of a Unix timestamp.
pub fn utc_year(timestamp: i64) -> Option<i32> {
    DateTime::from_timestamp(timestamp, 0).map(|dt| dt.year())
}

/// Ordered list of label names; a label's id is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary(Vec<String>);

impl Vocabulary {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::config("label vocabulary is empty"));
        }
        if names.len() > usize::from(LabelId::MAX) {
            return Err(Error::config("label vocabulary is too large"));
        }
        for (k, name) in names.iter().enumerate() {
            if name.is_empty() || name.contains(|c: char| c == ',' || c.is_whitespace()) {
                return Err(Error::config(format!("invalid label name `{name}`")));
            }
            if names[..k].contains(name) {
                return Err(Error::config(format!("duplicate label `{name}`")));
            }
        }
        Ok(Self(names))
    }

    /// The six basic emotion labels.
    pub fn emotions() -> Self {
        Self(
            ["anger", "disgust", "fear", "joy", "sadness", "surprise"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, id: LabelId) -> Option<&str> {
        self.0.get(usize::from(id)).map(String::as_str)
    }

    pub fn id(&self, name: &str) -> Option<LabelId> {
        self.0.iter().position(|n| n == name).map(|p| p as LabelId)
    }

    pub fn require(&self, name: &str) -> Result<LabelId> {
        self.id(name).ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    pub fn check(&self, id: LabelId) -> Result<()> {
        if usize::from(id) < self.len() {
            Ok(())
        } else {
            Err(Error::LabelId {
                id: usize::from(id),
                len: self.len(),
            })
        }
    }
}
