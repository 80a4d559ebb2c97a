#![no_main]

use libfuzzer_sys::fuzz_target;
use twistlab::io::{cseq_to_json, parse_cseq_json};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_cseq_json(text) {
        let back = parse_cseq_json(&cseq_to_json(&x)).expect("written sequence parses");
        assert_eq!(back, x);
    }
});
