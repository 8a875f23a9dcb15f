//! Sparse space-time cube of label counts and the per-bin ratio fields
//! derived from it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinIndex, GridSpec, LabelId, LabeledPoint, TimeAxis, Vocabulary};

/// Accounting of input records that did not make it into a cube.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipReport {
    pub accepted: u64,
    pub out_of_bbox: u64,
    pub out_of_time: u64,
    pub malformed: u64,
}

impl SkipReport {
    pub fn skipped(&self) -> u64 {
        self.out_of_bbox + self.out_of_time + self.malformed
    }

    pub fn total(&self) -> u64 {
        self.accepted + self.skipped()
    }

    /// Combines a parse-stage report with the report of the cube built from
    /// its accepted points.
    pub fn then(self, build: SkipReport) -> SkipReport {
        SkipReport {
            accepted: build.accepted,
            out_of_bbox: self.out_of_bbox + build.out_of_bbox,
            out_of_time: self.out_of_time + build.out_of_time,
            malformed: self.malformed + build.malformed,
        }
    }
}

/// One occupied (bin, year) cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellKey {
    pub bin: BinIndex,
    pub year: u16,
}

/// Borrowed view of one occupied cell.
#[derive(Debug, Clone, Copy)]
pub struct Cell<'a> {
    pub bin: BinIndex,
    pub year: u16,
    pub counts: &'a [u32],
    pub total: u64,
}

/// Per-bin, per-year, per-label photo counts.
///
/// Only occupied (bin, year) cells are stored. Cells are kept sorted by bin
/// (row-major) and then by year, so two cubes built from the same points
/// compare equal regardless of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeCube {
    grid: GridSpec,
    time: TimeAxis,
    vocab: Vocabulary,
    cells: Vec<CellKey>,
    // cells.len() * vocab.len(), label-major within a cell
    counts: Vec<u32>,
    totals: Vec<u64>,
}

impl SpaceTimeCube {
    pub fn empty(grid: GridSpec, time: TimeAxis, vocab: Vocabulary) -> Self {
        Self {
            grid,
            time,
            vocab,
            cells: Vec::new(),
            counts: Vec::new(),
            totals: Vec::new(),
        }
    }

    /// Builds a cube from explicit `(bin, year, label, count)` records.
    ///
    /// Records may come in any order; duplicates are summed and zero counts
    /// ignored.
    pub fn from_records(
        grid: GridSpec,
        time: TimeAxis,
        vocab: Vocabulary,
        records: impl IntoIterator<Item = (BinIndex, u16, LabelId, u32)>,
    ) -> Result<Self> {
        grid.validate()?;
        time.validate()?;
        let mut keyed = Vec::new();
        for (bin, year, label, count) in records {
            if !grid.contains_bin(bin) {
                return Err(Error::config(format!(
                    "bin {bin} outside a {}x{} grid",
                    grid.nx, grid.ny
                )));
            }
            time.check_index(usize::from(year))?;
            vocab.check(label)?;
            if count > 0 {
                keyed.push(((grid.linear(bin), year, label), count));
            }
        }
        keyed.sort_unstable_by_key(|(k, _)| *k);
        Self::assemble(grid, time, vocab, keyed)
    }

    fn assemble(
        grid: GridSpec,
        time: TimeAxis,
        vocab: Vocabulary,
        sorted: Vec<((u64, u16, LabelId), u32)>,
    ) -> Result<Self> {
        let width = vocab.len();
        let mut cube = Self::empty(grid, time, vocab);
        let mut last: Option<(u64, u16)> = None;
        for ((linear, year, label), count) in sorted {
            if last != Some((linear, year)) {
                let bin = BinIndex::new(
                    (linear % u64::from(grid.nx)) as u32,
                    (linear / u64::from(grid.nx)) as u32,
                );
                cube.cells.push(CellKey { bin, year });
                cube.counts.extend(std::iter::repeat_n(0, width));
                cube.totals.push(0);
                last = Some((linear, year));
            }
            let c = cube.cells.len() - 1;
            let slot = &mut cube.counts[c * width + usize::from(label)];
            *slot = slot
                .checked_add(count)
                .ok_or_else(|| Error::config("cell count overflows u32"))?;
            cube.totals[c] += u64::from(count);
        }
        Ok(cube)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time(&self) -> &TimeAxis {
        &self.time
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Number of occupied (bin, year) cells.
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = Cell<'_>> + '_ {
        let width = self.vocab.len();
        self.cells.iter().enumerate().map(move |(c, key)| Cell {
            bin: key.bin,
            year: key.year,
            counts: &self.counts[c * width..(c + 1) * width],
            total: self.totals[c],
        })
    }

    fn find(&self, bin: BinIndex, year: u16) -> Option<usize> {
        self.cells.binary_search(&CellKey { bin, year }).ok()
    }

    pub fn count(&self, bin: BinIndex, year: u16, label: LabelId) -> u32 {
        match self.find(bin, year) {
            Some(c) if usize::from(label) < self.vocab.len() => self.counts[c * self.vocab.len() + usize::from(label)],
            _ => 0,
        }
    }

    pub fn total(&self, bin: BinIndex, year: u16) -> u64 {
        self.find(bin, year).map_or(0, |c| self.totals[c])
    }

    /// Total number of points in the cube.
    pub fn total_points(&self) -> u64 {
        self.totals.iter().sum()
    }

    /// Bins with at least one point in any year, in row-major order.
    pub fn occupied_bins(&self) -> Vec<BinIndex> {
        let mut bins: Vec<BinIndex> = self.cells.iter().map(|k| k.bin).collect();
        bins.dedup();
        bins
    }
}

/// Bins every point, dropping (and counting) those outside the grid or the
/// time axis.
pub fn build_cube(
    points: &[LabeledPoint],
    grid: GridSpec,
    time: TimeAxis,
    vocab: Vocabulary,
) -> Result<(SpaceTimeCube, SkipReport)> {
    grid.validate()?;
    time.validate()?;
    if vocab.is_empty() {
        return Err(Error::config("label vocabulary is empty"));
    }

    enum Fate {
        Keep(u64, u16, LabelId),
        OutOfBbox,
        OutOfTime,
        Malformed,
    }
    let labels = vocab.len();
    let fates: Vec<Fate> = points
        .par_iter()
        .map(|p| {
            if usize::from(p.label) >= labels || !p.lon.is_finite() || !p.lat.is_finite() {
                return Fate::Malformed;
            }
            let Ok(bin) = grid.bin_point(p.lon, p.lat) else {
                return Fate::OutOfBbox;
            };
            match time.index_of_timestamp(p.timestamp) {
                Some(y) => Fate::Keep(grid.linear(bin), y as u16, p.label),
                None => Fate::OutOfTime,
            }
        })
        .collect();

    let mut report = SkipReport::default();
    let mut keys = Vec::with_capacity(points.len());
    for fate in fates {
        match fate {
            Fate::Keep(linear, year, label) => {
                report.accepted += 1;
                keys.push((linear, year, label));
            }
            Fate::OutOfBbox => report.out_of_bbox += 1,
            Fate::OutOfTime => report.out_of_time += 1,
            Fate::Malformed => report.malformed += 1,
        }
    }
    keys.par_sort_unstable();

    // run-length encode identical keys into counts
    let mut runs: Vec<((u64, u16, LabelId), u32)> = Vec::new();
    for key in keys {
        match runs.last_mut() {
            Some((k, n)) if *k == key => {
                *n = n
                    .checked_add(1)
                    .ok_or_else(|| Error::config("cell count overflows u32"))?
            }
            _ => runs.push((key, 1)),
        }
    }
    let cube = SpaceTimeCube::assemble(grid, time, vocab, runs)?;
    Ok((cube, report))
}

/// Values attached to a set of occupied bins.
///
/// Fields produced by [`ratio_field`] hold label ratios in `[0, 1]`; fields
/// built with [`RatioField::from_entries`] may hold any finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioField {
    grid: GridSpec,
    bins: Vec<BinIndex>,
    values: Vec<f64>,
}

impl RatioField {
    /// Entries may be in any order but bins must be distinct and in-grid.
    pub fn from_entries(grid: GridSpec, mut entries: Vec<(BinIndex, f64)>) -> Result<Self> {
        entries.sort_by_key(|(b, _)| *b);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::config(format!("duplicate bin {} in field", w[0].0)));
            }
        }
        for (bin, v) in &entries {
            if !grid.contains_bin(*bin) {
                return Err(Error::config(format!("bin {bin} outside grid")));
            }
            if !v.is_finite() {
                return Err(Error::config(format!("non-finite value at bin {bin}")));
            }
        }
        let (bins, values) = entries.into_iter().unzip();
        Ok(Self { grid, bins, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Occupied bins, row-major.
    pub fn support(&self) -> &[BinIndex] {
        &self.bins
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, bin: BinIndex) -> Option<f64> {
        self.bins.binary_search(&bin).ok().map(|k| self.values[k])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (BinIndex, f64)> + '_ {
        self.bins.iter().copied().zip(self.values.iter().copied())
    }

    /// Applies `f` to every value, keeping the support.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_entries(self.grid, self.iter().map(|(b, v)| (b, f(v))).collect())
    }
}

/// Fraction of photos carrying `label` in every occupied bin, either for a
/// single year slice or aggregated over all years.
pub fn ratio_field(cube: &SpaceTimeCube, label: LabelId, year: Option<usize>) -> Result<RatioField> {
    cube.vocab.check(label)?;
    if let Some(y) = year {
        cube.time.check_index(y)?;
    }
    let width = cube.vocab.len();
    let mut bins = Vec::new();
    let mut values = Vec::new();
    let mut acc: Option<(BinIndex, u64, u64)> = None;
    let flush = |acc: Option<(BinIndex, u64, u64)>, bins: &mut Vec<BinIndex>, values: &mut Vec<f64>| {
        if let Some((bin, hit, total)) = acc {
            if total > 0 {
                bins.push(bin);
                values.push(hit as f64 / total as f64);
            }
        }
    };
    for (c, key) in cube.cells.iter().enumerate() {
        if year.is_some_and(|y| usize::from(key.year) != y) {
            continue;
        }
        let hit = u64::from(cube.counts[c * width + usize::from(label)]);
        let total = cube.totals[c];
        match &mut acc {
            Some((bin, h, t)) if *bin == key.bin => {
                *h += hit;
                *t += total;
            }
            _ => {
                flush(acc.take(), &mut bins, &mut values);
                acc = Some((key.bin, hit, total));
            }
        }
    }
    flush(acc, &mut bins, &mut values);
    Ok(RatioField {
        grid: cube.grid,
        bins,
        values,
    })
}
