use emospot::{build_cube, local_ratio_series, BBox, GridSpec, LabeledPoint, RegionQuery, TimeAxis, Vocabulary};
use proptest::prelude::*;

const SECS_PER_YEAR: i64 = 365 * 86_400;
// 2001-01-01T00:00:00Z; the next four year starts are 365 days apart except
// 2004, which is a leap year
const Y2001: i64 = 978_307_200;

fn grid() -> GridSpec {
    GridSpec::new(BBox::new(-10.0, 40.0, 10.0, 60.0).unwrap(), 40, 40).unwrap()
}

fn axis() -> TimeAxis {
    TimeAxis::new(2001, 3).unwrap()
}

prop_compose! {
    fn points()(raw in prop::collection::vec((-10.0f64..=10.0, 40.0f64..=60.0, 0usize..3, 0u16..4), 1..400))
        -> Vec<(LabeledPoint, usize)>
    {
        raw.into_iter()
            .map(|(lon, lat, y, l)| (LabeledPoint::new(lon, lat, Y2001 + y as i64 * SECS_PER_YEAR + 3600, l), y))
            .collect()
    }
}

fn vocab() -> Vocabulary {
    Vocabulary::new(["a", "b", "c", "d"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn whole_grid_equals_global_ratio(pts in points(), label in 0u16..4) {
        let raw: Vec<LabeledPoint> = pts.iter().map(|(p, _)| *p).collect();
        let (cube, report) = build_cube(&raw, grid(), axis(), vocab()).unwrap();
        prop_assert_eq!(report.accepted as usize, raw.len());
        let s = local_ratio_series(&cube, &RegionQuery { bbox: grid().bbox, label }).unwrap();
        for y in 0..3 {
            let total = pts.iter().filter(|(_, py)| *py == y).count() as u64;
            let hits = pts.iter().filter(|(p, py)| *py == y && p.label == label).count() as u64;
            prop_assert_eq!(s.denominators[y], total);
            prop_assert_eq!(s.hits[y], hits);
            let expected = (total > 0).then(|| hits as f64 / total as f64);
            prop_assert_eq!(s.ratios[y], expected);
        }
    }

    #[test]
    fn growing_the_box_never_shrinks_the_denominator(
        pts in points(),
        (x0, y0, w, h) in (-10.0f64..5.0, 40.0f64..55.0, 0.1f64..5.0, 0.1f64..5.0),
        grow in 0.0f64..5.0,
    ) {
        let raw: Vec<LabeledPoint> = pts.iter().map(|(p, _)| *p).collect();
        let (cube, _) = build_cube(&raw, grid(), axis(), vocab()).unwrap();
        let small = BBox::new(x0, y0, x0 + w, y0 + h).unwrap();
        let large = BBox::new(x0 - grow, y0 - grow, x0 + w + grow, y0 + h + grow).unwrap();
        let a = local_ratio_series(&cube, &RegionQuery { bbox: small, label: 0 }).unwrap();
        let b = local_ratio_series(&cube, &RegionQuery { bbox: large, label: 0 }).unwrap();
        for y in 0..3 {
            prop_assert!(b.denominators[y] >= a.denominators[y]);
        }
    }

    #[test]
    fn error_bounded_by_boundary_bins(pts in points(), (x0, y0, w, h) in (-9.0f64..4.0, 41.0f64..54.0, 0.5f64..5.0, 0.5f64..5.0)) {
        let g = grid();
        let raw: Vec<LabeledPoint> = pts.iter().map(|(p, _)| *p).collect();
        let (cube, _) = build_cube(&raw, g, axis(), vocab()).unwrap();
        let q = BBox::new(x0, y0, x0 + w, y0 + h).unwrap();
        let s = local_ratio_series(&cube, &RegionQuery { bbox: q, label: 0 }).unwrap();
        // a bin is on the boundary when the query edge crosses its interior
        let boundary = |p: &LabeledPoint| {
            let b = g.bin_point(p.lon, p.lat).unwrap();
            let r = g.bin_bounds(b);
            let cut = |lo: f64, hi: f64, e: f64| lo < e && e < hi;
            cut(r.lon_min, r.lon_max, q.lon_min)
                || cut(r.lon_min, r.lon_max, q.lon_max)
                || cut(r.lat_min, r.lat_max, q.lat_min)
                || cut(r.lat_min, r.lat_max, q.lat_max)
                || [r.lon_min, r.lon_max].contains(&q.lon_min)
                || [r.lon_min, r.lon_max].contains(&q.lon_max)
                || [r.lat_min, r.lat_max].contains(&q.lat_min)
                || [r.lat_min, r.lat_max].contains(&q.lat_max)
        };
        for y in 0..3 {
            let in_year: Vec<&LabeledPoint> = pts.iter().filter(|(_, py)| *py == y).map(|(p, _)| p).collect();
            let exact = in_year.iter().filter(|p| q.contains(p.lon, p.lat)).count() as i64;
            let slack = in_year.iter().filter(|p| boundary(p)).count() as i64;
            prop_assert!((s.denominators[y] as i64 - exact).abs() <= slack);
        }
    }
}

#[test]
fn counts_in_a_region() {
    let g = GridSpec::new(BBox::new(0.0, 0.0, 10.0, 10.0).unwrap(), 10, 10).unwrap();
    let mut raw = Vec::new();
    for k in 0..10 {
        raw.push(LabeledPoint::new(2.5, 2.5, Y2001 + 100, u16::from(k < 3)));
    }
    let (cube, _) = build_cube(&raw, g, axis(), Vocabulary::new(["calm", "disgust"]).unwrap()).unwrap();
    let s = local_ratio_series(
        &cube,
        &RegionQuery {
            bbox: BBox::new(2.0, 2.0, 3.0, 3.0).unwrap(),
            label: 1,
        },
    )
    .unwrap();
    assert_eq!(s.years, vec![2001, 2002, 2003]);
    assert_eq!(s.ratios, vec![Some(0.3), None, None]);
    assert_eq!(s.defined().collect::<Vec<_>>(), vec![(2001, 0.3)]);
}

#[test]
fn region_off_the_grid_is_an_error() {
    let (cube, _) = build_cube(&[], grid(), axis(), vocab()).unwrap();
    let far = BBox::new(100.0, 0.0, 110.0, 10.0).unwrap();
    assert!(local_ratio_series(&cube, &RegionQuery { bbox: far, label: 0 }).is_err());
}
