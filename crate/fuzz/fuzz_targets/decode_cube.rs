#![no_main]

use emospot::io::{decode_cube, encode_cube};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cube) = decode_cube(data) {
        // anything accepted must re-encode to an equal cube
        let text = encode_cube(&cube);
        let again = decode_cube(text.as_bytes()).expect("re-encoded cube decodes");
        assert_eq!(again, cube);
        assert_eq!(encode_cube(&again), text);
    }
});
