use std::collections::BTreeMap;
use std::fmt::Write as _;

use emospot::{
    build_cube, io::parse_points, io::PointFormat, ratio_field, BBox, BinIndex, GridSpec, LabeledPoint, TimeAxis,
    Vocabulary,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const YEAR_START: i32 = 2006;

fn grid10() -> GridSpec {
    GridSpec::new(BBox::new(0.0, 0.0, 10.0, 10.0).unwrap(), 10, 10).unwrap()
}

fn axis() -> TimeAxis {
    TimeAxis::new(YEAR_START, 10).unwrap()
}

// Days from 1970-01-01 to a proleptic Gregorian date.
fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = y.div_euclid(400);
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

fn year_start_secs(year: i32) -> i64 {
    days_from_civil(i64::from(year), 1, 1) * 86_400
}

fn year_of(ts: i64) -> i32 {
    let mut y = 1970;
    while year_start_secs(y + 1) <= ts {
        y += 1;
    }
    while year_start_secs(y) > ts {
        y -= 1;
    }
    y
}

// Nearest bin center by exhaustive scan; exact ties go to the higher index.
fn nearest_bin(grid: &GridSpec, lon: f64, lat: f64) -> (u32, u32) {
    let mut best = (f64::INFINITY, 0, 0);
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let cx = grid.bbox.lon_min + (f64::from(i) + 0.5) * grid.bin_width();
            let cy = grid.bbox.lat_min + (f64::from(j) + 0.5) * grid.bin_height();
            let d2 = (lon - cx).powi(2) + (lat - cy).powi(2);
            if d2 < best.0 {
                best = (d2, i, j);
            } else if d2 == best.0 {
                best = (d2, best.1.max(i), best.2.max(j));
            }
        }
    }
    (best.1, best.2)
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, labels: u16) -> Vec<LabeledPoint> {
    (0..n)
        .map(|_| {
            // a margin outside the box and the axis exercises the skip paths
            let lon = rng.random_range(-0.5..10.5);
            let lat = rng.random_range(-0.5..10.5);
            let ts = rng.random_range(year_start_secs(2005)..year_start_secs(2017));
            LabeledPoint::new(lon, lat, ts, rng.random_range(0..labels))
        })
        .collect()
}

#[test]
fn cube_matches_per_point_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points = random_points(&mut rng, 1000, 6);
    let (cube, report) = build_cube(&points, grid10(), axis(), Vocabulary::emotions()).unwrap();

    let mut counts: BTreeMap<(u32, u32, usize, u16), u32> = BTreeMap::new();
    let mut skipped = 0u64;
    for p in &points {
        let year = year_of(p.timestamp);
        let inside = (0.0..=10.0).contains(&p.lon) && (0.0..=10.0).contains(&p.lat);
        if !inside || !(YEAR_START..YEAR_START + 10).contains(&year) {
            skipped += 1;
            continue;
        }
        let (i, j) = nearest_bin(&grid10(), p.lon, p.lat);
        *counts.entry((i, j, (year - YEAR_START) as usize, p.label)).or_default() += 1;
    }
    assert_eq!(report.skipped(), skipped);
    assert_eq!(report.accepted, 1000 - skipped);
    assert_eq!(cube.total_points(), 1000 - skipped);
    let cells: u64 = cube.cells().map(|c| c.total).sum();
    assert_eq!(cells, 1000 - skipped);
    for (&(i, j, y, l), &c) in &counts {
        assert_eq!(
            cube.count(BinIndex { i, j }, y as u16, l),
            c,
            "bin ({i},{j}) year {y} label {l}"
        );
    }
    let nonzero: usize = cube.cells().map(|c| c.counts.iter().filter(|&&k| k > 0).count()).sum();
    assert_eq!(nonzero, counts.len());
}

#[test]
fn edge_points_follow_the_scan() {
    let g = grid10();
    for &(lon, lat) in &[(3.0, 7.0), (0.0, 0.0), (10.0, 10.0), (5.0, 0.0), (9.999, 0.001)] {
        let b = g.bin_point(lon, lat).unwrap();
        assert_eq!((b.i, b.j), nearest_bin(&g, lon, lat), "({lon}, {lat})");
    }
}

#[test]
fn thousand_rows_with_37_corrupted() {
    let vocab = Vocabulary::emotions();
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let mut corrupt: Vec<usize> = (0..1000).collect();
    corrupt.shuffle(&mut rng);
    corrupt.truncate(37);

    let mut text = String::from("lon,lat,timestamp,label\n");
    for row in 0..1000 {
        let lon: f64 = rng.random_range(-122.5..-122.3);
        let lat: f64 = rng.random_range(37.7..37.8);
        let month = rng.random_range(1..=12);
        let label = &vocab.names()[rng.random_range(0..6)];
        let mut fields = vec![
            format!("{lon:.5}"),
            format!("{lat:.5}"),
            format!("2011-{month:02}-04T12:00:00Z"),
            label.clone(),
        ];
        if corrupt.contains(&row) {
            match rng.random_range(0..7) {
                0 => fields[0] = "abc".into(),
                1 => fields[1] = "91.5".into(),
                2 => fields[2] = "not-a-date".into(),
                3 => fields[3] = "awe".into(),
                4 => {
                    fields.pop();
                }
                5 => fields[0] = "NaN".into(),
                _ => fields[1] = String::new(),
            }
        }
        writeln!(text, "{}", fields.join(",")).unwrap();
    }

    // independent line filter
    let known: Vec<&str> = vocab.names().iter().map(String::as_str).collect();
    let good = text
        .lines()
        .skip(1)
        .filter(|line| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return false;
            }
            let num = |s: &str, lim: f64| s.parse::<f64>().is_ok_and(|v| v.is_finite() && v.abs() <= lim);
            let ts = f[2].len() == 20 && f[2].starts_with("2011-") && f[2].ends_with('Z');
            num(f[0], 180.0) && num(f[1], 90.0) && ts && known.contains(&f[3])
        })
        .count();
    assert_eq!(good, 963);

    let (points, report) = parse_points(text.as_bytes(), PointFormat::Csv, &vocab).unwrap();
    assert_eq!(report.accepted, 963);
    assert_eq!(report.malformed, 37);
    assert_eq!(points.len(), 963);
}

#[test]
fn geojson_and_csv_agree() {
    let vocab = Vocabulary::emotions();
    let csv = "lon,lat,timestamp,label\n-122.39,37.77,2011-07-04T12:00:00Z,joy\n1,2,1309780800,fear\n";
    let geo = r#"{"type":"FeatureCollection","features":[
        {"type":"Feature","geometry":{"type":"Point","coordinates":[-122.39,37.77]},"properties":{"timestamp":"2011-07-04T12:00:00Z","label":"joy"}},
        {"type":"Feature","geometry":{"type":"Point","coordinates":[1,2]},"properties":{"timestamp":1309780800,"label":"fear"}}
    ]}"#;
    let (a, ra) = parse_points(csv.as_bytes(), PointFormat::Csv, &vocab).unwrap();
    let (b, rb) = parse_points(geo.as_bytes(), PointFormat::GeoJson, &vocab).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert_eq!(a[0].timestamp, year_start_secs(2011) + (184 * 86_400) + 12 * 3600);
}

#[test]
fn missing_header_column_is_fatal() {
    let err = parse_points(
        "lon,lat,label\n1,2,joy\n".as_bytes(),
        PointFormat::Csv,
        &Vocabulary::emotions(),
    )
    .unwrap_err();
    assert!(err.to_string().contains("timestamp"), "{err}");
}

fn point_strategy() -> impl Strategy<Value = Vec<(f64, f64, u8, u16)>> {
    prop::collection::vec((-1.0f64..11.0, -1.0f64..11.0, 0u8..12, 0u16..3), 0..300)
}

fn to_points(raw: &[(f64, f64, u8, u16)]) -> Vec<LabeledPoint> {
    raw.iter()
        .map(|&(lon, lat, y, l)| LabeledPoint::new(lon, lat, year_start_secs(2005 + i32::from(y)) + 1000, l))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conservation_and_shuffle_invariance(raw in point_strategy(), seed in any::<u64>()) {
        let vocab = Vocabulary::new(["a", "b", "c"]).unwrap();
        let points = to_points(&raw);
        let (cube, report) = build_cube(&points, grid10(), axis(), vocab.clone()).unwrap();
        prop_assert_eq!(report.total(), points.len() as u64);
        prop_assert_eq!(cube.cells().map(|c| c.total).sum::<u64>(), report.accepted);

        let mut shuffled = points.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let (again, report2) = build_cube(&shuffled, grid10(), axis(), vocab).unwrap();
        prop_assert_eq!(report, report2);
        prop_assert_eq!(cube, again);
    }

    #[test]
    fn ratios_sum_to_one_on_occupied_bins(raw in point_strategy(), year in prop::option::of(0usize..10)) {
        let vocab = Vocabulary::new(["a", "b", "c"]).unwrap();
        let (cube, _) = build_cube(&to_points(&raw), grid10(), axis(), vocab).unwrap();
        let fields: Vec<_> = (0..3).map(|l| ratio_field(&cube, l, year).unwrap()).collect();
        for f in &fields[1..] {
            prop_assert_eq!(f.support(), fields[0].support());
        }
        for (k, bin) in fields[0].support().iter().enumerate() {
            let total: u64 = match year {
                Some(y) => cube.total(*bin, y as u16),
                None => (0..10).map(|y| cube.total(*bin, y)).sum(),
            };
            prop_assert!(total > 0);
            let sum: f64 = fields.iter().map(|f| f.values()[k]).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
        }
        let occupied = cube.cells().filter(|c| year.is_none_or(|y| usize::from(c.year) == y)).map(|c| c.bin).collect::<std::collections::BTreeSet<_>>();
        prop_assert_eq!(occupied.len(), fields[0].len());
    }
}
