use rand::Rng;
use twistlab::diagnostics::{random_gaussian, trial_rng};
use twistlab::io::{cseq_to_json, matrix_to_json, parse_cseq_json, parse_matrix_json, parse_spec_json};
use twistlab::CMatrix;

#[test]
fn sequences_round_trip_bit_for_bit() {
    for trial in 0..300u64 {
        let mut rng = trial_rng(41, trial);
        let scale = 10f64.powi(rng.random_range(-300..300));
        let x = random_gaussian(1 + trial as usize % 17, &mut rng).scale_real(scale);
        assert_eq!(parse_cseq_json(&cseq_to_json(&x)).unwrap(), x);
    }
    let tricky = parse_cseq_json(r#"{"dim": 4, "real": [1, 0.0, -10485772.5, 1e-30]}"#).unwrap();
    assert_eq!(tricky.get(4).re, 1e-30);
    assert_eq!(parse_cseq_json(&cseq_to_json(&tricky)).unwrap(), tricky);
}

#[test]
fn matrices_round_trip_bit_for_bit() {
    for trial in 0..100u64 {
        let mut rng = trial_rng(43, trial);
        let (r, c) = (1 + trial as usize % 5, 1 + trial as usize % 3);
        let m = CMatrix::new(r, c, random_gaussian(r * c, &mut rng).scale_real(1.0e20).to_dense()).unwrap();
        assert_eq!(parse_matrix_json(&matrix_to_json(&m)).unwrap(), m);
    }
    let big = parse_matrix_json(r#"{"rows": 1, "cols": 1, "re": [118446744073709551616]}"#).unwrap();
    assert_eq!(big.get(0, 0).re, 118446744073709551616.0);
}

#[test]
fn degenerate_shift_exponents_are_rejected() {
    let text = r#"{"kind": "shift", "p": 2.0, "q": 1.01e-320, "base": {"kind": "lipschitz:s+t", "p": 2.0}}"#;
    let err = parse_spec_json(text).unwrap_err();
    assert!(err.to_string().contains("shift"), "{err}");
}
