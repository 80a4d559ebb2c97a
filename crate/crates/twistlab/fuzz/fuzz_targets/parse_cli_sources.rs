#![no_main]

use libfuzzer_sys::fuzz_target;
use twistlab::cli::{parse_centralizer, parse_matrix_source, parse_sequence_source};
use twistlab::PExp;

// Only the in-memory source forms; `file:` and bare paths would hit the filesystem.
fn in_memory(s: &str) -> bool {
    ["preset:", "unit:", "diag:", "identity:", "ones:", "random:"].iter().any(|p| s.starts_with(p))
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let p = PExp::new(2.0).unwrap();
    let q = PExp::new(1.0).ok();
    for line in text.lines() {
        if !line.contains("file:") {
            let _ = parse_centralizer(line, p, q);
        }
        if in_memory(line) {
            let _ = parse_sequence_source(line, 64);
            let _ = parse_matrix_source(line, 0);
        }
    }
});
