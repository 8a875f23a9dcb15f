//! Binary spatial weights over occupied bins.
//!
//! Distances are measured between bin centers in bin units: one step along
//! either axis is distance 1, regardless of the bin's aspect ratio in
//! degrees. Every scheme includes the bin itself.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinIndex, GridSpec};

/// Neighborhood rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case")]
pub enum Scheme {
    /// Bins whose centers lie within `radius` (Euclidean).
    FixedDistanceBand { radius: f64 },
    /// The bin itself plus its `k - 1` nearest occupied bins; ties go to the
    /// lower row-major index.
    KNearest { k: usize },
    /// Bins within Chebyshev distance `floor(radius)` (queen contiguity of
    /// that order).
    Contiguity { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightsSpec {
    scheme: Scheme,
    include_self: bool,
}

impl Default for WeightsSpec {
    fn default() -> Self {
        Self {
            scheme: Scheme::FixedDistanceBand { radius: 5.0 },
            include_self: true,
        }
    }
}

impl WeightsSpec {
    pub fn new(scheme: Scheme) -> Result<Self> {
        match scheme {
            Scheme::FixedDistanceBand { radius } if !(radius.is_finite() && radius > 0.0) => {
                return Err(Error::config("distance band radius must be positive"))
            }
            Scheme::Contiguity { radius } if !(radius.is_finite() && radius >= 1.0) => {
                return Err(Error::config("contiguity order must be at least 1"))
            }
            Scheme::KNearest { k: 0 } => return Err(Error::config("k must be at least 1")),
            _ => {}
        }
        Ok(Self {
            scheme,
            include_self: true,
        })
    }

    pub fn band(radius: f64) -> Result<Self> {
        Self::new(Scheme::FixedDistanceBand { radius })
    }

    pub fn knn(k: usize) -> Result<Self> {
        Self::new(Scheme::KNearest { k })
    }

    pub fn contiguity(radius: f64) -> Result<Self> {
        Self::new(Scheme::Contiguity { radius })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn include_self(&self) -> bool {
        self.include_self
    }

    /// Plain Gi weights; only used to check that Gi* really counts the bin
    /// itself.
    #[cfg(test)]
    pub(crate) fn without_self(mut self) -> Self {
        self.include_self = false;
        self
    }
}

const DENSE_LIMIT: u64 = 1 << 22;

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

/// Position lookup for the occupied bins of a field.
pub struct Occupancy<'a> {
    grid: GridSpec,
    bins: &'a [BinIndex],
    lookup: Lookup,
}

impl<'a> Occupancy<'a> {
    /// `bins` must be distinct and in-grid; positions refer to this slice.
    pub fn new(grid: GridSpec, bins: &'a [BinIndex]) -> Self {
        let lookup = if grid.bin_count() <= DENSE_LIMIT {
            let mut dense = vec![u32::MAX; grid.bin_count() as usize];
            for (pos, b) in bins.iter().enumerate() {
                dense[grid.linear(*b) as usize] = pos as u32;
            }
            Lookup::Dense(dense)
        } else {
            Lookup::Sparse(
                bins.iter()
                    .enumerate()
                    .map(|(pos, b)| (grid.linear(*b), pos as u32))
                    .collect(),
            )
        };
        Self { grid, bins, lookup }
    }

    pub fn bins(&self) -> &[BinIndex] {
        self.bins
    }

    pub fn position(&self, i: i64, j: i64) -> Option<usize> {
        if i < 0 || j < 0 || i >= i64::from(self.grid.nx) || j >= i64::from(self.grid.ny) {
            return None;
        }
        let linear = j as u64 * u64::from(self.grid.nx) + i as u64;
        match &self.lookup {
            Lookup::Dense(d) => {
                let p = d[linear as usize];
                (p != u32::MAX).then_some(p as usize)
            }
            Lookup::Sparse(m) => m.get(&linear).map(|p| *p as usize),
        }
    }

    /// Positions of the neighbors of `bin` under `weights`, in row-major
    /// order.
    pub fn neighbor_positions(&self, weights: &WeightsSpec, offsets: &Offsets, bin: BinIndex) -> Vec<usize> {
        let mut out = match weights.scheme {
            Scheme::FixedDistanceBand { .. } | Scheme::Contiguity { .. } => offsets
                .0
                .iter()
                .filter_map(|&(di, dj)| self.position(i64::from(bin.i) + di, i64::from(bin.j) + dj))
                .collect(),
            Scheme::KNearest { k } => self.nearest(bin, k),
        };
        if !weights.include_self {
            if let Some(me) = self.position(i64::from(bin.i), i64::from(bin.j)) {
                out.retain(|&p| p != me);
            }
        }
        out.sort_unstable_by_key(|&p| self.bins[p]);
        out
    }

    /// Neighbor count and the sum of `values` (indexed by position) over the
    /// neighborhood of `bin`.
    pub fn neighbor_sum(
        &self,
        weights: &WeightsSpec,
        offsets: &Offsets,
        bin: BinIndex,
        values: &[f64],
    ) -> (usize, f64) {
        match weights.scheme {
            Scheme::KNearest { k } => {
                let mut nb = self.nearest(bin, k);
                if !weights.include_self {
                    if let Some(me) = self.position(i64::from(bin.i), i64::from(bin.j)) {
                        nb.retain(|&p| p != me);
                    }
                }
                (nb.len(), nb.iter().map(|&p| values[p]).sum())
            }
            _ => {
                let mut m = 0;
                let mut sum = 0.0;
                for &(di, dj) in &offsets.0 {
                    if !weights.include_self && di == 0 && dj == 0 {
                        continue;
                    }
                    if let Some(p) = self.position(i64::from(bin.i) + di, i64::from(bin.j) + dj) {
                        m += 1;
                        sum += values[p];
                    }
                }
                (m, sum)
            }
        }
    }

    /// Ring search outward until the k-th nearest candidate is closer than
    /// anything left unvisited.
    fn nearest(&self, bin: BinIndex, k: usize) -> Vec<usize> {
        let (ci, cj) = (i64::from(bin.i), i64::from(bin.j));
        let max_ring = i64::from(self.grid.nx.max(self.grid.ny));
        let mut found: Vec<(i64, BinIndex, usize)> = Vec::new();
        for ring in 0..=max_ring {
            for (di, dj) in ring_cells(ring) {
                if let Some(p) = self.position(ci + di, cj + dj) {
                    found.push((di * di + dj * dj, self.bins[p], p));
                }
            }
            if found.len() >= k {
                found.sort_unstable();
                // unvisited cells are at Euclidean distance >= ring + 1
                let kth = found[k - 1].0;
                if kth < (ring + 1) * (ring + 1) {
                    break;
                }
            }
        }
        found.sort_unstable();
        found.truncate(k);
        found.into_iter().map(|(_, _, p)| p).collect()
    }
}

fn ring_cells(ring: i64) -> Vec<(i64, i64)> {
    if ring == 0 {
        return vec![(0, 0)];
    }
    let mut cells = Vec::with_capacity(8 * ring as usize);
    for d in -ring..=ring {
        cells.push((d, -ring));
        cells.push((d, ring));
    }
    for d in -ring + 1..ring {
        cells.push((-ring, d));
        cells.push((ring, d));
    }
    cells
}

/// Relative cell offsets reached by a band or contiguity scheme.
pub struct Offsets(Vec<(i64, i64)>);

impl Offsets {
    pub fn for_scheme(scheme: Scheme) -> Self {
        let mut offsets = Vec::new();
        match scheme {
            Scheme::FixedDistanceBand { radius } => {
                let reach = radius.floor() as i64;
                let r2 = radius * radius;
                for dj in -reach..=reach {
                    for di in -reach..=reach {
                        if ((di * di + dj * dj) as f64) <= r2 {
                            offsets.push((di, dj));
                        }
                    }
                }
            }
            Scheme::Contiguity { radius } => {
                let reach = radius.floor() as i64;
                for dj in -reach..=reach {
                    for di in -reach..=reach {
                        offsets.push((di, dj));
                    }
                }
            }
            Scheme::KNearest { .. } => {}
        }
        Self(offsets)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The occupied bins that `bin` sees under `weights`, itself included.
pub fn neighbors(weights: &WeightsSpec, grid: &GridSpec, bin: BinIndex, support: &[BinIndex]) -> Result<Vec<BinIndex>> {
    if !support.contains(&bin) {
        return Err(Error::NotInSupport(bin));
    }
    let occ = Occupancy::new(*grid, support);
    let offsets = Offsets::for_scheme(weights.scheme);
    Ok(occ
        .neighbor_positions(weights, &offsets, bin)
        .into_iter()
        .map(|p| support[p])
        .collect())
}
