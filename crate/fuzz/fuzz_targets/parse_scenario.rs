#![no_main]

use emospot::io::{synth_generate, ScenarioSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ScenarioSpec::from_toml(text) else {
        return;
    };
    // keep generation cheap
    let per_year = spec
        .clusters
        .iter()
        .fold(spec.background_per_year, |n, c| n.saturating_add(c.points_per_year));
    if per_year.saturating_mul(usize::from(spec.year_count)) <= 1_000 {
        let _ = synth_generate(&spec, 0);
    }
});
