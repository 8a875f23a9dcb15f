//! Ingestion, serialization, export and synthetic data.

pub mod config;
pub mod cube_file;
pub mod export;
pub mod points;
pub mod synth;

pub use config::{parse_config, RawConfig, RunConfig};
pub use cube_file::{decode_cube, encode_cube, read_cube, write_cube};
pub use export::{
    export_emerging, export_spatial, read_spatial_features, write_emerging, write_spatial, SpatialFeature,
};
pub use points::{parse_points, parse_timestamp, PointFormat};
pub use synth::{synth_generate, ScenarioSpec, SynthOutput};
