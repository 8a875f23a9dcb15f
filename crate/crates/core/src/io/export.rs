//! GeoJSON export of Gi* and emerging-pattern results.
//!
//! Each occupied bin becomes one Polygon feature (the bin rectangle, closed
//! ring, counter-clockwise). Features are written one per line in row-major
//! bin order. Numbers use the shortest representation that parses back to
//! the same `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::emerging::{EmergingOutcome, SpotFlag};
use crate::error::{Error, Result};
use crate::gistar::{GiResult, SpotClass};
use crate::grid::{BinIndex, GridSpec};

#[derive(Serialize)]
struct Polygon {
    #[serde(rename = "type")]
    kind: &'static str,
    coordinates: [[[f64; 2]; 5]; 1],
}

fn polygon(grid: &GridSpec, bin: BinIndex) -> Polygon {
    let b = grid.bin_bounds(bin);
    Polygon {
        kind: "Polygon",
        coordinates: [[
            [b.lon_min, b.lat_min],
            [b.lon_max, b.lat_min],
            [b.lon_max, b.lat_max],
            [b.lon_min, b.lat_max],
            [b.lon_min, b.lat_min],
        ]],
    }
}

#[derive(Serialize)]
struct Feature<P> {
    #[serde(rename = "type")]
    kind: &'static str,
    geometry: Polygon,
    properties: P,
}

#[derive(Serialize)]
struct SpatialProps<'a> {
    i: u32,
    j: u32,
    emotion: &'a str,
    z: f64,
    p: f64,
    class: &'static str,
}

#[derive(Serialize)]
struct EmergingProps<'a> {
    i: u32,
    j: u32,
    emotion: &'a str,
    pattern: &'static str,
    z_series: &'a [Option<f64>],
    flags: &'a [SpotFlag],
    trend: &'static str,
    mk_s: i64,
    mk_z: f64,
    mk_p: f64,
    data_years: usize,
    insufficient_data: bool,
}

fn write_collection<W: Write, P: Serialize>(
    mut out: W,
    features: impl Iterator<Item = Feature<P>>,
) -> std::io::Result<()> {
    out.write_all(b"{\"type\":\"FeatureCollection\",\"features\":[")?;
    for (k, feature) in features.enumerate() {
        out.write_all(if k == 0 { b"\n" } else { b",\n" })?;
        serde_json::to_writer(&mut out, &feature)?;
    }
    out.write_all(b"\n]}\n")?;
    out.flush()
}

/// Writes Gi* results for one label.
pub fn write_spatial<W: Write>(out: W, results: &[GiResult], grid: &GridSpec, emotion: &str) -> std::io::Result<()> {
    let mut sorted: Vec<&GiResult> = results.iter().collect();
    sorted.sort_by_key(|r| r.bin);
    write_collection(
        out,
        sorted.into_iter().map(|r| Feature {
            kind: "Feature",
            geometry: polygon(grid, r.bin),
            properties: SpatialProps {
                i: r.bin.i,
                j: r.bin.j,
                emotion,
                z: r.z,
                p: r.p,
                class: r.spot_class.as_str(),
            },
        }),
    )
}

/// Writes emerging-pattern outcomes for one label. NoPattern bins are left
/// out unless `include_no_pattern` is set.
pub fn write_emerging<W: Write>(
    out: W,
    results: &BTreeMap<BinIndex, EmergingOutcome>,
    grid: &GridSpec,
    emotion: &str,
    include_no_pattern: bool,
) -> std::io::Result<()> {
    write_collection(
        out,
        results
            .values()
            .filter(|o| include_no_pattern || o.pattern != crate::emerging::EmergingPattern::NoPattern)
            .map(|o| Feature {
                kind: "Feature",
                geometry: polygon(grid, o.history.bin),
                properties: EmergingProps {
                    i: o.history.bin.i,
                    j: o.history.bin.j,
                    emotion,
                    pattern: o.pattern.name(),
                    z_series: &o.history.z_series,
                    flags: &o.history.flags,
                    trend: o.trend.trend.as_str(),
                    mk_s: o.trend.s,
                    mk_z: o.trend.z,
                    mk_p: o.trend.p,
                    data_years: o.history.data_steps(),
                    insufficient_data: o.insufficient_data,
                },
            }),
    )
}

fn to_file(path: &Path, write: impl FnOnce(BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(wrap)?;
    write(BufWriter::new(file)).map_err(wrap)
}

pub fn export_spatial(results: &[GiResult], grid: &GridSpec, emotion: &str, path: &Path) -> Result<()> {
    to_file(path, |w| write_spatial(w, results, grid, emotion))
}

pub fn export_emerging(
    results: &BTreeMap<BinIndex, EmergingOutcome>,
    grid: &GridSpec,
    emotion: &str,
    include_no_pattern: bool,
    path: &Path,
) -> Result<()> {
    to_file(path, |w| write_emerging(w, results, grid, emotion, include_no_pattern))
}

/// One feature read back from a spatial export.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct SpatialFeature {
    pub i: u32,
    pub j: u32,
    pub emotion: String,
    pub z: f64,
    pub p: f64,
    pub class: SpotClass,
}

/// Reads the properties of every feature in a spatial export.
pub fn read_spatial_features<R: Read>(input: R) -> Result<Vec<SpatialFeature>> {
    let doc: Value = serde_json::from_reader(input).map_err(|e| Error::parse(e.line() as u64, e.to_string()))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse(1, "not a FeatureCollection"))?;
    features
        .iter()
        .map(|f| {
            let props = f.get("properties").cloned().unwrap_or(Value::Null);
            serde_json::from_value(props).map_err(|e| Error::parse(0, format!("bad feature properties: {e}")))
        })
        .collect()
}
