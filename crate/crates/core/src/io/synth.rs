//! Seeded synthetic point generator with injected space-time clusters.
//!
//! Background points are spread uniformly over the box and over each year,
//! with labels drawn from `label_weights`. A cluster owns its footprint
//! during its active years: background draws that land inside are redrawn
//! elsewhere, and the cluster places `points_per_year` points inside, of
//! which exactly `round(ratio * points_per_year)` carry the cluster label.
//! The remaining cluster points draw from the background weights with the
//! cluster label excluded. Overlapping clusters lose that exactness.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::NaiveDate;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BBox, LabelId, LabeledPoint, TimeAxis, Vocabulary};

const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Circle,
    /// Axis-aligned square of half-side `radius`, half-open on the max edges.
    Square,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterSpec {
    pub center: [f64; 2],
    /// Degrees.
    pub radius: f64,
    #[serde(default)]
    pub shape: Shape,
    pub first_year: i32,
    pub last_year: i32,
    pub label: String,
    pub points_per_year: usize,
    /// Fraction of cluster points carrying `label`.
    #[serde(default = "one")]
    pub ratio: f64,
    /// Per active year ratios, overriding `ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_schedule: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

impl ClusterSpec {
    fn contains(&self, lon: f64, lat: f64) -> bool {
        let (dx, dy) = (lon - self.center[0], lat - self.center[1]);
        match self.shape {
            Shape::Circle => dx * dx + dy * dy <= self.radius * self.radius,
            Shape::Square => dx >= -self.radius && dx < self.radius && dy >= -self.radius && dy < self.radius,
        }
    }

    fn active(&self, year: i32) -> bool {
        (self.first_year..=self.last_year).contains(&year)
    }

    fn ratio_for(&self, year: i32) -> f64 {
        match &self.ratio_schedule {
            Some(s) => s[(year - self.first_year) as usize],
            None => self.ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub bbox: [f64; 4],
    pub year_start: i32,
    pub year_count: u16,
    #[serde(default = "default_vocab")]
    pub vocab: Vec<String>,
    pub background_per_year: usize,
    /// Relative label weights for background points; unlisted labels get 1.
    #[serde(default)]
    pub label_weights: BTreeMap<String, f64>,
    #[serde(default)]
    pub clusters: Vec<ClusterSpec>,
}

fn default_vocab() -> Vec<String> {
    Vocabulary::emotions().names().to_vec()
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("scenario: {}", e.message())))
    }

    fn validate(&self) -> Result<(BBox, TimeAxis, Vocabulary, Vec<f64>)> {
        let [a, b, c, d] = self.bbox;
        let bbox = BBox::new(a, b, c, d)?;
        let time = TimeAxis::new(self.year_start, self.year_count)?;
        let vocab = Vocabulary::new(self.vocab.clone())?;
        for name in self.label_weights.keys() {
            vocab.require(name)?;
        }
        let weights: Vec<f64> = vocab
            .names()
            .iter()
            .map(|n| self.label_weights.get(n).copied().unwrap_or(1.0))
            .collect();
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::config("label weights must be finite and non-negative"));
        }
        if self.background_per_year > 0 && weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::config("background label weights are all zero"));
        }
        for (k, cl) in self.clusters.iter().enumerate() {
            let bad = |m: &str| Error::config(format!("cluster {k}: {m}"));
            vocab.require(&cl.label)?;
            if !(cl.radius.is_finite() && cl.radius > 0.0) {
                return Err(bad("radius must be positive"));
            }
            if !(cl.center[0].is_finite() && cl.center[1].is_finite()) {
                return Err(bad("center must be finite"));
            }
            if cl.first_year > cl.last_year {
                return Err(bad("first_year after last_year"));
            }
            if time.index_of_year(cl.first_year).is_none() || time.index_of_year(cl.last_year).is_none() {
                return Err(bad("active years outside the time axis"));
            }
            let active = (cl.last_year - cl.first_year + 1) as usize;
            let ratios: Vec<f64> = match &cl.ratio_schedule {
                Some(s) if s.len() != active => return Err(bad("ratio_schedule needs one value per active year")),
                Some(s) => s.clone(),
                None => vec![cl.ratio],
            };
            if ratios.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Err(bad("ratios must lie in [0, 1]"));
            }
            if vocab.len() == 1 && ratios.iter().any(|r| *r < 1.0) {
                return Err(bad("a one-label vocabulary needs ratio 1"));
            }
            let (lon, lat) = (cl.center[0], cl.center[1]);
            let near = BBox {
                lon_min: lon - cl.radius,
                lat_min: lat - cl.radius,
                lon_max: lon + cl.radius,
                lat_max: lat + cl.radius,
            };
            if !bbox.intersects(&near) {
                return Err(bad("footprint lies outside the bounding box"));
            }
        }
        Ok((bbox, time, vocab, weights))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterYear {
    pub year: i32,
    pub points: usize,
    pub label_points: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTruth {
    pub spec: ClusterSpec,
    pub per_year: Vec<ClusterYear>,
}

/// Ground truth emitted alongside the points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub total_points: usize,
    pub background_per_year: usize,
    pub clusters: Vec<ClusterTruth>,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub vocab: Vocabulary,
    pub points: Vec<LabeledPoint>,
    pub manifest: Manifest,
}

impl SynthOutput {
    /// Writes the points as CSV with ISO-8601 timestamps.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "lon,lat,timestamp,label")?;
        for p in &self.points {
            let ts = chrono::DateTime::from_timestamp(p.timestamp, 0)
                .expect("generated timestamps are in range")
                .format("%Y-%m-%dT%H:%M:%SZ");
            let label = self.vocab.name(p.label).expect("generated labels are in vocab");
            writeln!(out, "{},{},{ts},{label}", p.lon, p.lat)?;
        }
        out.flush()
    }

    pub fn write_manifest<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, &self.manifest)?;
        writeln!(out)?;
        out.flush()
    }
}

fn year_span(year: i32) -> Result<(i64, i64)> {
    let start = |y: i32| {
        NaiveDate::from_ymd_opt(y, 1, 1)
            .map(|d| d.and_hms_opt(0, 0, 0).expect("midnight exists").and_utc().timestamp())
            .ok_or_else(|| Error::config(format!("year {y} out of range")))
    };
    let s = start(year)?;
    Ok((s, start(year + 1)? - s))
}

/// Generates the scenario deterministically from `(spec, seed)`.
pub fn synth_generate(spec: &ScenarioSpec, seed: u64) -> Result<SynthOutput> {
    let (bbox, time, vocab, weights) = spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let background = (spec.background_per_year > 0)
        .then(|| WeightedIndex::new(&weights).map_err(|e| Error::config(e.to_string())))
        .transpose()?;

    let mut points = Vec::new();
    let mut truths: Vec<ClusterTruth> = spec
        .clusters
        .iter()
        .map(|c| ClusterTruth {
            spec: c.clone(),
            per_year: Vec::new(),
        })
        .collect();

    for year in time.years() {
        let (start, span) = year_span(year)?;
        let active: Vec<&ClusterSpec> = spec.clusters.iter().filter(|c| c.active(year)).collect();

        for _ in 0..spec.background_per_year {
            let mut placed = None;
            for _ in 0..MAX_ATTEMPTS {
                let lon = rng.random_range(bbox.lon_min..=bbox.lon_max);
                let lat = rng.random_range(bbox.lat_min..=bbox.lat_max);
                if !active.iter().any(|c| c.contains(lon, lat)) {
                    placed = Some((lon, lat));
                    break;
                }
            }
            let (lon, lat) = placed.ok_or_else(|| Error::config("clusters cover the whole bounding box"))?;
            let ts = start + rng.random_range(0..span);
            let label = background.as_ref().expect("weights exist").sample(&mut rng) as LabelId;
            points.push(LabeledPoint::new(lon, lat, ts, label));
        }

        for (k, cl) in spec.clusters.iter().enumerate() {
            if !cl.active(year) {
                continue;
            }
            let target = vocab.require(&cl.label)?;
            let ratio = cl.ratio_for(year);
            let n = cl.points_per_year;
            let hits = ((ratio * n as f64).round() as usize).min(n);

            let mut other_weights = weights.clone();
            other_weights[usize::from(target)] = 0.0;
            if other_weights.iter().sum::<f64>() <= 0.0 {
                other_weights = (0..vocab.len())
                    .map(|l| if l == usize::from(target) { 0.0 } else { 1.0 })
                    .collect();
            }
            let others = (hits < n)
                .then(|| WeightedIndex::new(&other_weights).map_err(|e| Error::config(e.to_string())))
                .transpose()?;
            let mut labels: Vec<LabelId> = vec![target; hits];
            for _ in hits..n {
                labels.push(others.as_ref().expect("weights exist").sample(&mut rng) as LabelId);
            }
            labels.shuffle(&mut rng);

            for label in labels {
                let mut placed = None;
                for _ in 0..MAX_ATTEMPTS {
                    let lon = cl.center[0] + rng.random_range(-cl.radius..cl.radius);
                    let lat = cl.center[1] + rng.random_range(-cl.radius..cl.radius);
                    if cl.contains(lon, lat) && bbox.contains(lon, lat) {
                        placed = Some((lon, lat));
                        break;
                    }
                }
                let (lon, lat) =
                    placed.ok_or_else(|| Error::config(format!("cluster {k}: footprint misses the bounding box")))?;
                let ts = start + rng.random_range(0..span);
                points.push(LabeledPoint::new(lon, lat, ts, label));
            }
            truths[k].per_year.push(ClusterYear {
                year,
                points: n,
                label_points: hits,
                ratio: if n > 0 { hits as f64 / n as f64 } else { 0.0 },
            });
        }
    }

    Ok(SynthOutput {
        vocab,
        manifest: Manifest {
            seed,
            total_points: points.len(),
            background_per_year: spec.background_per_year,
            clusters: truths,
        },
        points,
    })
}
