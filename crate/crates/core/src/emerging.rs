//! Emerging hotspot analysis: per-year Gi* slices, a Mann-Kendall test on
//! each location's z-score series, and classification into seventeen
//! patterns.
//!
//! Rules are stated for the hot polarity; cold rules mirror them with Hot and
//! Cold swapped and the trend direction reversed. All step counts use data
//! years only, so "90% of steps" means 90% of the years in which the bin held
//! photos.
//!
//! | pattern      | rule                                                        |
//! |--------------|-------------------------------------------------------------|
//! | new          | final step hot, no earlier hot step                         |
//! | consecutive  | final run of >= 2 hot steps, no hot step before it, < 90% hot |
//! | intensifying | >= 90% hot, final hot, trend increasing                     |
//! | persistent   | >= 90% hot, final hot, no trend                             |
//! | diminishing  | >= 90% hot, final hot, trend decreasing                     |
//! | historical   | >= 90% hot, final not hot                                   |
//! | oscillating  | final hot, some earlier cold step, < 90% cold               |
//! | sporadic     | final hot, < 90% hot, hot steps broken up, never cold        |
//!
//! Rules are tried in the table's order. Within each row the hot rule is
//! tried before the cold one; at most one of the two can match, so the
//! outcome is the same whichever polarity comes first and mirroring a
//! history mirrors its pattern.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{ratio_field, SpaceTimeCube};
use crate::error::Result;
use crate::gistar::{check_alpha, fdr_correct, gi_star, SpotClass};
use crate::grid::{BinIndex, LabelId};
use crate::mann_kendall::{mann_kendall, MkResult, Trend, MIN_TREND_LEN};
use crate::weights::WeightsSpec;

/// Significance of a bin in one year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpotFlag {
    Hot,
    Cold,
    NotSignificant,
    NoData,
}

impl SpotFlag {
    pub fn mirrored(self) -> Self {
        match self {
            SpotFlag::Hot => SpotFlag::Cold,
            SpotFlag::Cold => SpotFlag::Hot,
            other => other,
        }
    }
}

impl From<SpotClass> for SpotFlag {
    fn from(c: SpotClass) -> Self {
        match c {
            SpotClass::Hot => SpotFlag::Hot,
            SpotClass::Cold => SpotFlag::Cold,
            SpotClass::NotSignificant => SpotFlag::NotSignificant,
        }
    }
}

/// Yearly Gi* history of one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinHistory {
    pub bin: BinIndex,
    /// One entry per year on the time axis; `None` where the bin had no
    /// photos or the slice was too sparse to score.
    pub z_series: Vec<Option<f64>>,
    pub flags: Vec<SpotFlag>,
}

impl BinHistory {
    pub fn data_z(&self) -> Vec<f64> {
        self.z_series.iter().flatten().copied().collect()
    }

    pub fn data_steps(&self) -> usize {
        self.z_series.iter().filter(|z| z.is_some()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmergingPattern {
    #[serde(rename = "new_hot_spot")]
    NewHot,
    #[serde(rename = "consecutive_hot_spot")]
    ConsecutiveHot,
    #[serde(rename = "intensifying_hot_spot")]
    IntensifyingHot,
    #[serde(rename = "persistent_hot_spot")]
    PersistentHot,
    #[serde(rename = "diminishing_hot_spot")]
    DiminishingHot,
    #[serde(rename = "sporadic_hot_spot")]
    SporadicHot,
    #[serde(rename = "oscillating_hot_spot")]
    OscillatingHot,
    #[serde(rename = "historical_hot_spot")]
    HistoricalHot,
    #[serde(rename = "new_cold_spot")]
    NewCold,
    #[serde(rename = "consecutive_cold_spot")]
    ConsecutiveCold,
    #[serde(rename = "intensifying_cold_spot")]
    IntensifyingCold,
    #[serde(rename = "persistent_cold_spot")]
    PersistentCold,
    #[serde(rename = "diminishing_cold_spot")]
    DiminishingCold,
    #[serde(rename = "sporadic_cold_spot")]
    SporadicCold,
    #[serde(rename = "oscillating_cold_spot")]
    OscillatingCold,
    #[serde(rename = "historical_cold_spot")]
    HistoricalCold,
    #[serde(rename = "no_pattern_detected")]
    NoPattern,
}

impl EmergingPattern {
    pub const ALL: [EmergingPattern; 17] = [
        EmergingPattern::NewHot,
        EmergingPattern::ConsecutiveHot,
        EmergingPattern::IntensifyingHot,
        EmergingPattern::PersistentHot,
        EmergingPattern::DiminishingHot,
        EmergingPattern::SporadicHot,
        EmergingPattern::OscillatingHot,
        EmergingPattern::HistoricalHot,
        EmergingPattern::NewCold,
        EmergingPattern::ConsecutiveCold,
        EmergingPattern::IntensifyingCold,
        EmergingPattern::PersistentCold,
        EmergingPattern::DiminishingCold,
        EmergingPattern::SporadicCold,
        EmergingPattern::OscillatingCold,
        EmergingPattern::HistoricalCold,
        EmergingPattern::NoPattern,
    ];

    pub fn name(&self) -> &'static str {
        use EmergingPattern::*;
        match self {
            NewHot => "new_hot_spot",
            ConsecutiveHot => "consecutive_hot_spot",
            IntensifyingHot => "intensifying_hot_spot",
            PersistentHot => "persistent_hot_spot",
            DiminishingHot => "diminishing_hot_spot",
            SporadicHot => "sporadic_hot_spot",
            OscillatingHot => "oscillating_hot_spot",
            HistoricalHot => "historical_hot_spot",
            NewCold => "new_cold_spot",
            ConsecutiveCold => "consecutive_cold_spot",
            IntensifyingCold => "intensifying_cold_spot",
            PersistentCold => "persistent_cold_spot",
            DiminishingCold => "diminishing_cold_spot",
            SporadicCold => "sporadic_cold_spot",
            OscillatingCold => "oscillating_cold_spot",
            HistoricalCold => "historical_cold_spot",
            NoPattern => "no_pattern_detected",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn is_hot(&self) -> bool {
        (*self as u8) < 8
    }

    pub fn is_cold(&self) -> bool {
        (8..16).contains(&(*self as u8))
    }

    /// The same pattern with opposite polarity; NoPattern maps to itself.
    pub fn mirrored(self) -> Self {
        let k = self as usize;
        match k {
            0..=7 => Self::ALL[k + 8],
            8..=15 => Self::ALL[k - 8],
            _ => self,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    New,
    Consecutive,
    Intensifying,
    Persistent,
    Diminishing,
    Historical,
    Oscillating,
    Sporadic,
}

const RULE_ORDER: [Kind; 8] = [
    Kind::New,
    Kind::Consecutive,
    Kind::Intensifying,
    Kind::Persistent,
    Kind::Diminishing,
    Kind::Historical,
    Kind::Oscillating,
    Kind::Sporadic,
];

/// Summary of a data-step flag sequence seen from one polarity.
struct Polarity {
    steps: usize,
    same: usize,
    opposite: usize,
    trailing_same: usize,
    last_same: bool,
    toward: bool,
    away: bool,
}

impl Polarity {
    fn new(steps: &[SpotFlag], same: SpotFlag, trend: Trend, toward: Trend) -> Self {
        let opposite_flag = same.mirrored();
        Self {
            steps: steps.len(),
            same: steps.iter().filter(|f| **f == same).count(),
            opposite: steps.iter().filter(|f| **f == opposite_flag).count(),
            trailing_same: steps.iter().rev().take_while(|f| **f == same).count(),
            last_same: steps.last() == Some(&same),
            toward: trend == toward,
            away: trend == toward.reversed(),
        }
    }

    // at least 90% of data steps, in integers
    fn mostly(&self, count: usize) -> bool {
        count * 10 >= self.steps * 9
    }

    fn matches(&self, kind: Kind) -> bool {
        if self.steps == 0 {
            return false;
        }
        let mostly_same = self.mostly(self.same);
        match kind {
            Kind::New => self.last_same && self.same == 1,
            Kind::Consecutive => {
                self.last_same && self.trailing_same >= 2 && self.trailing_same == self.same && !mostly_same
            }
            Kind::Intensifying => mostly_same && self.last_same && self.toward,
            Kind::Persistent => mostly_same && self.last_same && !self.toward && !self.away,
            Kind::Diminishing => mostly_same && self.last_same && self.away,
            Kind::Historical => mostly_same && !self.last_same,
            Kind::Oscillating => self.last_same && self.opposite > 0 && !self.mostly(self.opposite),
            Kind::Sporadic => self.last_same && !mostly_same && self.opposite == 0 && self.trailing_same < self.same,
        }
    }
}

fn pattern(kind: Kind, hot: bool) -> EmergingPattern {
    use EmergingPattern::*;
    let p = match kind {
        Kind::New => NewHot,
        Kind::Consecutive => ConsecutiveHot,
        Kind::Intensifying => IntensifyingHot,
        Kind::Persistent => PersistentHot,
        Kind::Diminishing => DiminishingHot,
        Kind::Historical => HistoricalHot,
        Kind::Oscillating => OscillatingHot,
        Kind::Sporadic => SporadicHot,
    };
    if hot {
        p
    } else {
        p.mirrored()
    }
}

/// Classifies a yearly flag sequence given the trend of its z-scores.
/// `NoData` entries are ignored.
pub fn classify_flags(flags: &[SpotFlag], trend: Trend) -> EmergingPattern {
    let steps: Vec<SpotFlag> = flags.iter().copied().filter(|f| *f != SpotFlag::NoData).collect();
    let hot = Polarity::new(&steps, SpotFlag::Hot, trend, Trend::Increasing);
    let cold = Polarity::new(&steps, SpotFlag::Cold, trend, Trend::Decreasing);
    for kind in RULE_ORDER {
        if hot.matches(kind) {
            return pattern(kind, true);
        }
        if cold.matches(kind) {
            return pattern(kind, false);
        }
    }
    EmergingPattern::NoPattern
}

/// Classifies one bin from its yearly history and the Mann-Kendall result on
/// its z-scores.
pub fn classify_emerging(history: &BinHistory, trend: &MkResult) -> EmergingPattern {
    classify_flags(&history.flags, trend.trend)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmergingConfig {
    pub weights: WeightsSpec,
    pub alpha: f64,
    /// Apply Benjamini-Hochberg to each yearly slice.
    pub fdr: bool,
    /// Bins with fewer data years get NoPattern without a trend test.
    pub min_years: usize,
}

impl Default for EmergingConfig {
    fn default() -> Self {
        Self {
            weights: WeightsSpec::default(),
            alpha: 0.05,
            fdr: false,
            min_years: MIN_TREND_LEN,
        }
    }
}

/// Runs Gi* on every yearly ratio slice of `label` and collects the result
/// per bin. Every bin occupied in any year gets a history.
pub fn yearly_slices(cube: &SpaceTimeCube, label: LabelId, config: &EmergingConfig) -> Result<Vec<BinHistory>> {
    cube.vocab().check(label)?;
    check_alpha(config.alpha)?;
    let years = cube.time().len();
    let slices: Vec<Option<Vec<(BinIndex, f64, SpotFlag)>>> = (0..years)
        .into_par_iter()
        .map(|y| -> Result<_> {
            let field = ratio_field(cube, label, Some(y))?;
            if field.len() < 2 {
                return Ok(None);
            }
            let gi = gi_star(&field, &config.weights, config.alpha)?;
            let results = if config.fdr {
                fdr_correct(&gi.results, config.alpha)
            } else {
                gi.results
            };
            Ok(Some(
                results.into_iter().map(|r| (r.bin, r.z, r.spot_class.into())).collect(),
            ))
        })
        .collect::<Result<_>>()?;

    let bins = cube.occupied_bins();
    let mut histories: Vec<BinHistory> = bins
        .iter()
        .map(|&bin| BinHistory {
            bin,
            z_series: vec![None; years],
            flags: vec![SpotFlag::NoData; years],
        })
        .collect();
    for (y, slice) in slices.into_iter().enumerate() {
        for (bin, z, flag) in slice.into_iter().flatten() {
            let k = bins.binary_search(&bin).expect("slice bins are occupied");
            histories[k].z_series[y] = Some(z);
            histories[k].flags[y] = flag;
        }
    }
    Ok(histories)
}

/// Outcome for one bin.
#[derive(Debug, Clone, PartialEq)]
pub struct EmergingOutcome {
    pub pattern: EmergingPattern,
    pub history: BinHistory,
    pub trend: MkResult,
    /// Fewer data years than `min_years`; pattern forced to NoPattern.
    pub insufficient_data: bool,
}

/// Full per-label pipeline: yearly slices, trend test, classification.
pub fn emerging_analysis(
    cube: &SpaceTimeCube,
    label: LabelId,
    config: &EmergingConfig,
) -> Result<BTreeMap<BinIndex, EmergingOutcome>> {
    let histories = yearly_slices(cube, label, config)?;
    let outcomes: Vec<EmergingOutcome> = histories
        .into_par_iter()
        .map(|history| -> Result<EmergingOutcome> {
            let z = history.data_z();
            if z.len() < config.min_years.max(1) {
                return Ok(EmergingOutcome {
                    pattern: EmergingPattern::NoPattern,
                    trend: MkResult::untested(z.len()),
                    history,
                    insufficient_data: true,
                });
            }
            let trend = if z.len() >= 2 {
                mann_kendall(&z, config.alpha)?
            } else {
                MkResult::untested(z.len())
            };
            Ok(EmergingOutcome {
                pattern: classify_emerging(&history, &trend),
                trend,
                history,
                insufficient_data: false,
            })
        })
        .collect::<Result<_>>()?;
    Ok(outcomes.into_iter().map(|o| (o.history.bin, o)).collect())
}
