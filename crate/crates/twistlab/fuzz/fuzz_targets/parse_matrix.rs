#![no_main]

use libfuzzer_sys::fuzz_target;
use twistlab::io::{matrix_to_json, parse_matrix_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = parse_matrix_json(text) {
        let back = parse_matrix_json(&matrix_to_json(&m)).expect("written matrix parses");
        assert_eq!(back, m);
        if m.rows() * m.cols() <= 64 {
            let _ = twistlab::spectral::singular_values(&m);
        }
    }
});
