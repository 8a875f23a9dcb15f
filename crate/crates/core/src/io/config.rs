//! Run configuration from a TOML file.
//!
//! ```toml
//! vocab = ["anger", "disgust", "fear", "joy", "sadness", "surprise"]
//! alpha = 0.05
//! fdr = false
//! min_years = 4
//!
//! [grid]
//! bbox = [-122.52, 37.70, -122.35, 37.83]
//! nx = 1000
//! ny = 1000
//!
//! [time]
//! year_start = 2006
//! year_count = 10
//!
//! [weights]
//! scheme = "band"   # band | knn | contiguity
//! radius = 5.0
//! k = 8
//! ```
//!
//! Every key is optional. `grid` and `time` are only needed when binning
//! points; later stages read them from the cube.

use serde::Deserialize;

use crate::emerging::EmergingConfig;
use crate::error::{Error, Result};
use crate::grid::{BBox, GridSpec, TimeAxis, Vocabulary};
use crate::mann_kendall::MIN_TREND_LEN;
use crate::weights::WeightsSpec;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub bbox: [f64; 4],
    pub nx: u32,
    pub ny: u32,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub year_start: i32,
    pub year_count: u16,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub scheme: String,
    pub radius: f64,
    pub k: usize,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self {
            scheme: "band".into(),
            radius: 5.0,
            k: 8,
        }
    }
}

/// Configuration as written, before validation.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RawConfig {
    pub grid: Option<GridSection>,
    pub time: Option<TimeSection>,
    pub vocab: Vec<String>,
    pub weights: WeightsSection,
    pub alpha: f64,
    pub fdr: bool,
    pub min_years: usize,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            grid: None,
            time: None,
            vocab: Vocabulary::emotions().names().to_vec(),
            weights: WeightsSection::default(),
            alpha: 0.05,
            fdr: false,
            min_years: MIN_TREND_LEN,
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Option<GridSpec>,
    pub time: Option<TimeAxis>,
    pub vocab: Vocabulary,
    pub weights: WeightsSpec,
    pub alpha: f64,
    pub fdr: bool,
    pub min_years: usize,
}

impl RunConfig {
    pub fn emerging(&self) -> EmergingConfig {
        EmergingConfig {
            weights: self.weights,
            alpha: self.alpha,
            fdr: self.fdr,
            min_years: self.min_years,
        }
    }

    pub fn require_grid(&self) -> Result<GridSpec> {
        self.grid
            .ok_or_else(|| Error::config("no grid configured (set [grid] or pass --bbox)"))
    }

    pub fn require_time(&self) -> Result<TimeAxis> {
        self.time
            .ok_or_else(|| Error::config("no time axis configured (set [time] or pass --year-start/--year-count)"))
    }
}

pub fn parse_config(text: &str) -> Result<RawConfig> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(0, |s| {
            text.as_bytes()[..s.start.min(text.len())]
                .iter()
                .filter(|&&b| b == b'\n')
                .count() as u64
                + 1
        });
        Error::parse(line, e.message().to_string())
    })
}

impl RawConfig {
    pub fn resolve(&self) -> Result<RunConfig> {
        let grid = self
            .grid
            .as_ref()
            .map(|g| {
                let [a, b, c, d] = g.bbox;
                GridSpec::new(BBox::new(a, b, c, d)?, g.nx, g.ny)
            })
            .transpose()?;
        let time = self
            .time
            .as_ref()
            .map(|t| TimeAxis::new(t.year_start, t.year_count))
            .transpose()?;
        let weights = match self.weights.scheme.as_str() {
            "band" | "fixed-distance-band" => WeightsSpec::band(self.weights.radius)?,
            "knn" | "k-nearest" => WeightsSpec::knn(self.weights.k)?,
            "contiguity" => WeightsSpec::contiguity(self.weights.radius)?,
            other => return Err(Error::config(format!("unknown weights scheme `{other}`"))),
        };
        crate::gistar::check_alpha(self.alpha)?;
        Ok(RunConfig {
            grid,
            time,
            vocab: Vocabulary::new(self.vocab.clone())?,
            weights,
            alpha: self.alpha,
            fdr: self.fdr,
            min_years: self.min_years,
        })
    }
}
