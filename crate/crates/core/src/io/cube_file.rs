//! Text serialization of a [`SpaceTimeCube`].
//!
//! ```text
//! emospot-cube 1
//! bbox <lon_min> <lat_min> <lon_max> <lat_max>
//! grid <nx> <ny>
//! years <year_start> <year_count>
//! labels <name> <name> ...
//! records <n>
//! <i> <j> <year> <label> <count>      (n lines)
//! ```
//!
//! Fields are separated by single spaces and lines end in `\n`. `year` is the
//! calendar year and `label` the label name. Records are sorted by
//! `(i, j, year, label id)`, strictly increasing, and every count is positive.
//! Floats use the shortest representation that parses back to the same value,
//! so a write/read round trip is exact and repeated writes are byte-identical.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::cube::SpaceTimeCube;
use crate::error::{Error, Result};
use crate::grid::{BBox, BinIndex, GridSpec, LabelId, TimeAxis, Vocabulary};

pub const MAGIC: &str = "emospot-cube";
pub const VERSION: u32 = 1;

/// Serializes the cube to its canonical text form.
pub fn encode_cube(cube: &SpaceTimeCube) -> String {
    let g = cube.grid();
    let t = cube.time();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(
        out,
        "bbox {} {} {} {}",
        g.bbox.lon_min, g.bbox.lat_min, g.bbox.lon_max, g.bbox.lat_max
    );
    let _ = writeln!(out, "grid {} {}", g.nx, g.ny);
    let _ = writeln!(out, "years {} {}", t.year_start, t.year_count);
    let _ = writeln!(out, "labels {}", cube.vocab().names().join(" "));

    let mut records: Vec<(u32, u32, u16, LabelId, u32)> = Vec::new();
    for cell in cube.cells() {
        for (label, &count) in cell.counts.iter().enumerate() {
            if count > 0 {
                records.push((cell.bin.i, cell.bin.j, cell.year, label as LabelId, count));
            }
        }
    }
    records.sort_unstable();
    let _ = writeln!(out, "records {}", records.len());
    let names = cube.vocab().names();
    for (i, j, y, l, c) in records {
        let _ = writeln!(out, "{i} {j} {} {} {c}", t.year(usize::from(y)), names[usize::from(l)]);
    }
    out
}

pub fn write_cube(cube: &SpaceTimeCube, path: &Path) -> Result<()> {
    let wrap = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(wrap)?);
    w.write_all(encode_cube(cube).as_bytes()).map_err(wrap)?;
    w.flush().map_err(wrap)
}

pub fn read_cube(path: &Path) -> Result<SpaceTimeCube> {
    let file = File::open(path).map_err(|source| Error::Io {
        context: format!("opening {}", path.display()),
        source,
    })?;
    decode_cube(BufReader::new(file))
}

struct Lines<R> {
    inner: R,
    line: u64,
    buf: String,
}

impl<R: BufRead> Lines<R> {
    fn next(&mut self) -> Result<Option<&str>> {
        self.buf.clear();
        self.line += 1;
        let n = self.inner.read_line(&mut self.buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::parse(self.line, "invalid UTF-8"),
            _ => Error::Io {
                context: format!("reading cube line {}", self.line),
                source: e,
            },
        })?;
        if n == 0 {
            return Ok(None);
        }
        Ok(Some(self.buf.strip_suffix('\n').unwrap_or(&self.buf)))
    }

    fn expect(&mut self, what: &str) -> Result<(u64, Vec<String>)> {
        let line = self.line + 1;
        let text = self
            .next()?
            .ok_or_else(|| Error::parse(line, format!("unexpected end of file, expected `{what}`")))?;
        let mut parts = text.split(' ');
        if parts.next() != Some(what) {
            return Err(Error::parse(line, format!("expected `{what}` line")));
        }
        Ok((line, parts.map(String::from).collect()))
    }
}

fn num<T: std::str::FromStr>(line: u64, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} `{raw}`")))
}

fn arity(line: u64, parts: &[String], n: usize, what: &str) -> Result<()> {
    if parts.len() == n {
        Ok(())
    } else {
        Err(Error::parse(
            line,
            format!("`{what}` takes {n} fields, got {}", parts.len()),
        ))
    }
}

/// Parses a cube written by [`encode_cube`].
pub fn decode_cube<R: Read>(input: R) -> Result<SpaceTimeCube> {
    let mut lines = Lines {
        inner: BufReader::new(input),
        line: 0,
        buf: String::new(),
    };

    let (line, parts) = lines.expect(MAGIC)?;
    arity(line, &parts, 1, MAGIC)?;
    let version: u32 = num(line, &parts[0], "version")?;
    if version != VERSION {
        return Err(Error::parse(line, format!("unsupported cube version {version}")));
    }

    let (line, parts) = lines.expect("bbox")?;
    arity(line, &parts, 4, "bbox")?;
    let mut b = [0.0; 4];
    for (slot, raw) in b.iter_mut().zip(&parts) {
        *slot = num(line, raw, "coordinate")?;
    }
    let bbox = BBox::new(b[0], b[1], b[2], b[3]).map_err(|e| Error::parse(line, e.to_string()))?;

    let (line, parts) = lines.expect("grid")?;
    arity(line, &parts, 2, "grid")?;
    let grid = GridSpec::new(bbox, num(line, &parts[0], "nx")?, num(line, &parts[1], "ny")?)
        .map_err(|e| Error::parse(line, e.to_string()))?;

    let (line, parts) = lines.expect("years")?;
    arity(line, &parts, 2, "years")?;
    let time = TimeAxis::new(num(line, &parts[0], "year")?, num(line, &parts[1], "year count")?)
        .map_err(|e| Error::parse(line, e.to_string()))?;
    if i64::from(time.year_start) + i64::from(time.year_count) > i64::from(i32::MAX) {
        return Err(Error::parse(line, "time axis overflows"));
    }

    let (line, parts) = lines.expect("labels")?;
    let vocab = Vocabulary::new(parts).map_err(|e| Error::parse(line, e.to_string()))?;

    let (line, parts) = lines.expect("records")?;
    arity(line, &parts, 1, "records")?;
    let declared: u64 = num(line, &parts[0], "record count")?;

    let mut records = Vec::new();
    let mut previous: Option<(u32, u32, u16, LabelId)> = None;
    for _ in 0..declared {
        let line = lines.line + 1;
        let text = lines
            .next()?
            .ok_or_else(|| Error::parse(line, "fewer records than declared"))?;
        let parts: Vec<&str> = text.split(' ').collect();
        if parts.len() != 5 {
            return Err(Error::parse(line, "a record takes 5 fields"));
        }
        let i: u32 = num(line, parts[0], "column")?;
        let j: u32 = num(line, parts[1], "row")?;
        let year: i32 = num(line, parts[2], "year")?;
        let y = time
            .index_of_year(year)
            .ok_or_else(|| Error::parse(line, format!("year {year} outside the time axis")))?;
        let label = vocab
            .id(parts[3])
            .ok_or_else(|| Error::parse(line, format!("unknown label `{}`", parts[3])))?;
        let count: u32 = num(line, parts[4], "count")?;
        if count == 0 {
            return Err(Error::parse(line, "zero count"));
        }
        let bin = BinIndex::new(i, j);
        if !grid.contains_bin(bin) {
            return Err(Error::parse(line, format!("bin {bin} outside the grid")));
        }
        let key = (i, j, y as u16, label);
        if previous.is_some_and(|p| p >= key) {
            return Err(Error::parse(line, "records out of order or duplicated"));
        }
        previous = Some(key);
        records.push((bin, y as u16, label, count));
    }
    let line = lines.line + 1;
    if lines.next()?.is_some() {
        return Err(Error::parse(line, "trailing data after records"));
    }
    SpaceTimeCube::from_records(grid, time, vocab, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SpaceTimeCube {
        let grid = GridSpec::new(BBox::new(-122.52, 37.7, -122.35, 37.83).unwrap(), 1000, 1000).unwrap();
        SpaceTimeCube::from_records(
            grid,
            TimeAxis::new(2006, 10).unwrap(),
            Vocabulary::emotions(),
            [
                (BinIndex::new(5, 1), 9, 3, 2),
                (BinIndex::new(5, 1), 0, 0, 7),
                (BinIndex::new(0, 999), 4, 5, 1),
            ],
        )
        .unwrap()
    }

    #[test]
    fn encodes_sorted_records() {
        let text = encode_cube(&sample());
        let expected = "emospot-cube 1\n\
                        bbox -122.52 37.7 -122.35 37.83\n\
                        grid 1000 1000\n\
                        years 2006 10\n\
                        labels anger disgust fear joy sadness surprise\n\
                        records 3\n\
                        0 999 2010 surprise 1\n\
                        5 1 2006 anger 7\n\
                        5 1 2015 joy 2\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn round_trip_is_exact() {
        let cube = sample();
        let text = encode_cube(&cube);
        let back = decode_cube(text.as_bytes()).unwrap();
        assert_eq!(back, cube);
        assert_eq!(encode_cube(&back), text);
    }

    #[test]
    fn rejects_corruption() {
        let good = encode_cube(&sample());
        let cases = [
            good.replace("emospot-cube 1", "emospot-cube 2"),
            good.replace("records 3", "records 4"),
            good.replace("records 3", "records 2"),
            good.replace("5 1 2015 joy 2", "5 1 2015 awe 2"),
            good.replace("5 1 2015 joy 2", "5 1 2016 joy 2"),
            good.replace("5 1 2015 joy 2", "5 1 2015 joy 0"),
            good.replace("0 999 2010", "0 1000 2010"),
            good.replace(
                "0 999 2010 surprise 1\n5 1 2006",
                "5 1 2006 anger 7\n0 999 2010 surprise 1\n5 1 2006",
            ),
            good.replace("grid 1000 1000", "grid 0 1000"),
            good.replace("bbox -122.52", "bbox -122.30"),
            String::new(),
        ];
        for (k, bad) in cases.iter().enumerate() {
            assert!(decode_cube(bad.as_bytes()).is_err(), "case {k} decoded");
        }
    }
}
