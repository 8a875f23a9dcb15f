#![no_main]

use emospot::io::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(raw) = parse_config(text) {
            let _ = raw.resolve();
        }
    }
});
