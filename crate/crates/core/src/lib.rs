//! Spatial and emerging spatio-temporal hotspot detection for categorical
//! labels attached to geotagged, timestamped points.
//!
//! Points are binned into a planar grid and yearly time steps
//! ([`cube::SpaceTimeCube`]). Per-bin label ratios are scored with the
//! Getis-Ord Gi* statistic ([`gistar`]); yearly Gi* z-scores are tested for
//! monotone trend with Mann-Kendall ([`mann_kendall`]) and each location is
//! classified into one of seventeen emerging-hotspot patterns ([`emerging`]).

pub mod cube;
pub mod emerging;
pub mod error;
pub mod gistar;
pub mod grid;
pub mod io;
pub mod local;
pub mod mann_kendall;
pub mod normal;
pub mod weights;

pub use cube::{build_cube, ratio_field, RatioField, SkipReport, SpaceTimeCube};
pub use emerging::{
    classify_emerging, emerging_analysis, yearly_slices, BinHistory, EmergingConfig, EmergingPattern, SpotFlag,
};
pub use error::{Error, Result};
pub use gistar::{classify_spot, fdr_correct, gi_star, GiField, GiResult, SpotClass};
pub use grid::{bin_point, BBox, BinIndex, GridSpec, LabelId, LabeledPoint, TimeAxis, Vocabulary};
pub use local::{local_ratio_series, RegionQuery, YearlyRatioSeries};
pub use mann_kendall::{mann_kendall, MkResult, Trend};
pub use weights::{neighbors, Scheme, WeightsSpec};
