#![no_main]

use emospot::io::{parse_points, PointFormat};
use emospot::Vocabulary;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let vocab = Vocabulary::emotions();
    if let Ok((points, report)) = parse_points(data, PointFormat::GeoJson, &vocab) {
        assert_eq!(points.len() as u64, report.accepted);
        assert!(points.iter().all(|p| p.has_valid_coords()));
    }
});
