#![no_main]

use libfuzzer_sys::fuzz_target;
use twistlab::io::parse_spec_json;
use twistlab::CSeq;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = parse_spec_json(text) {
        let json = serde_json::to_string(&spec).expect("parsed specs serialize");
        let back = parse_spec_json(&json).expect("written spec parses");
        assert_eq!(back.label(), spec.label());
        let x = CSeq::from_real(4, &[1.0, -0.5, 0.0, 2.0]).unwrap();
        let _ = spec.eval(&x);
    }
});
