//! Yearly label ratios inside a rectangular region.

use serde::Serialize;

use crate::cube::SpaceTimeCube;
use crate::error::{Error, Result};
use crate::grid::{BBox, LabelId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionQuery {
    pub bbox: BBox,
    pub label: LabelId,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YearlyRatioSeries {
    pub years: Vec<i32>,
    /// `None` for years without any local photos.
    pub ratios: Vec<Option<f64>>,
    pub hits: Vec<u64>,
    pub denominators: Vec<u64>,
}

impl YearlyRatioSeries {
    /// Years that carry a ratio, with their values.
    pub fn defined(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.years
            .iter()
            .zip(&self.ratios)
            .filter_map(|(y, r)| r.map(|r| (*y, r)))
    }
}

/// Sums the counts of every bin whose center lies inside the query box, per
/// year, and divides label hits by all photos.
pub fn local_ratio_series(cube: &SpaceTimeCube, query: &RegionQuery) -> Result<YearlyRatioSeries> {
    query.bbox.validate()?;
    cube.vocab().check(query.label)?;
    let grid = cube.grid();
    if !grid.bbox.intersects(&query.bbox) {
        return Err(Error::RegionOutsideGrid);
    }
    let years = cube.time().len();
    let mut hits = vec![0u64; years];
    let mut denominators = vec![0u64; years];
    for cell in cube.cells() {
        let (lon, lat) = grid.bin_center(cell.bin);
        if query.bbox.contains(lon, lat) {
            let y = usize::from(cell.year);
            hits[y] += u64::from(cell.counts[usize::from(query.label)]);
            denominators[y] += cell.total;
        }
    }
    let ratios = hits
        .iter()
        .zip(&denominators)
        .map(|(&h, &d)| (d > 0).then(|| h as f64 / d as f64))
        .collect();
    Ok(YearlyRatioSeries {
        years: cube.time().years().collect(),
        ratios,
        hits,
        denominators,
    })
}
