#![no_main]

use libfuzzer_sys::fuzz_target;
use twistlab::io::parse_twisted_point_json;
use twistlab::twisted::twisted_quasinorm;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok((z, _)) = parse_twisted_point_json(text) {
        let _ = twisted_quasinorm(&z);
    }
});
