use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use twistlab::centralizer::{eval_kalton_peck, eval_kalton_rank, shift_centralizer};
use twistlab::diagnostics::{quasilinearity_defect, random_gaussian, trial_rng};
use twistlab::seq::{holder_split, lp_norm, polar_decomposition, rank_sequence};
use twistlab::twisted::{canonical_lift, twisted_quasinorm, TwistedPoint};
use twistlab::{CSeq, CentralizerSpec, LipschitzPreset, PExp};

const SEED: u64 = 7_311;

fn pe(v: f64) -> PExp {
    PExp::new(v).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cseq() -> impl Strategy<Value = CSeq> {
    prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 1..24).prop_map(|v| {
        let values: Vec<Complex64> = v.into_iter().map(|(re, im)| c(re, im)).collect();
        CSeq::from_complex(values.len(), &values).unwrap()
    })
}

fn scalar() -> impl Strategy<Value = Complex64> {
    (-20.0..20.0f64, -20.0..20.0f64).prop_map(|(re, im)| c(re, im))
}

fn exponent() -> impl Strategy<Value = PExp> {
    prop::sample::select(vec![0.5, 1.0, 1.5, 2.0, 3.0, 7.0]).prop_map(pe)
}

fn random_perm(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut sigma: Vec<usize> = (1..=n).collect();
    for i in (1..n).rev() {
        sigma.swap(i, rng.random_range(0..=i));
    }
    sigma
}

fn all_maps(p: PExp) -> Vec<CentralizerSpec> {
    let mut maps = vec![CentralizerSpec::kalton_peck(p), CentralizerSpec::kalton_rank(p)];
    maps.extend(LipschitzPreset::ALL.iter().map(|&pr| CentralizerSpec::preset(pr, p)));
    maps
}

fn shifted_maps() -> Vec<CentralizerSpec> {
    all_maps(pe(2.0)).iter().map(|b| shift_centralizer(b, pe(1.0)).unwrap()).collect()
}

fn max_abs_diff(a: &CSeq, b: &CSeq) -> f64 {
    a.sub(b).unwrap().sup_norm()
}

proptest! {
    #[test]
    fn lp_norm_is_absolutely_homogeneous(x in cseq(), k in scalar(), p in exponent()) {
        let lhs = lp_norm(&x.scale(k), p).unwrap();
        let rhs = k.norm() * lp_norm(&x, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn polar_recomposes(x in cseq()) {
        let polar = polar_decomposition(&x);
        for (k, v) in x.iter() {
            let back = polar.phase(k) * polar.modulus.get(k);
            prop_assert!((back - v).norm() <= 4.0 * f64::EPSILON * v.norm());
            prop_assert!((polar.phase(k).norm() - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
        prop_assert_eq!(polar.phase(x.dim() + 1), c(1.0, 0.0));
    }

    #[test]
    fn ranks_form_a_permutation_of_the_support(x in cseq(), seed in any::<u64>()) {
        let mut rng = trial_rng(seed, 0);
        let sigma = random_perm(x.dim(), &mut rng);
        let ranks = rank_sequence(&x.compose_perm(&sigma).unwrap());
        let mut values: Vec<usize> = ranks.values().copied().collect();
        values.sort_unstable();
        prop_assert_eq!(values, (1..=x.support_len()).collect::<Vec<_>>());
    }

    #[test]
    fn centralizers_are_homogeneous(x in cseq(), k in scalar()) {
        prop_assume!(k.norm() > 1e-3);
        for map in all_maps(pe(2.0)).into_iter().chain(shifted_maps()) {
            let lhs = map.eval(&x.scale(k));
            let rhs = map.eval(&x).scale(k);
            let scale = x.norm(pe(2.0)) * k.norm();
            prop_assert!(max_abs_diff(&lhs, &rhs) <= 1e-11 * scale, "{}", map.label());
        }
    }

    #[test]
    fn shift_preserves_support(x in cseq(), q in prop::sample::select(vec![0.5, 1.0, 1.5])) {
        for base in all_maps(pe(2.0)) {
            let shifted = shift_centralizer(&base, pe(q)).unwrap();
            let image = shifted.eval(&x);
            prop_assert!(image.support().all(|k| x.get(k) != c(0.0, 0.0)), "{}", shifted.label());
        }
    }

    #[test]
    fn canonical_lift_maps_the_ball_onto_the_ball(x in cseq(), r in 0.0..=1.0f64) {
        for map in all_maps(pe(2.0)) {
            let n = x.norm(pe(2.0));
            let x = x.scale_real(r / n);
            let q = twisted_quasinorm(&canonical_lift(x, map.handle()));
            prop_assert!(q <= 1.0 + 1e-12, "{} gave {}", map.label(), q);
        }
    }
}

#[test]
fn centralizers_commute_with_permutations() {
    let dim = 24;
    let mut worst = 0.0_f64;
    for trial in 0..1000u64 {
        let mut rng = trial_rng(SEED, trial);
        let x = random_gaussian(dim, &mut rng);
        let sigma = random_perm(dim, &mut rng);
        let xs = x.compose_perm(&sigma).unwrap();
        for map in all_maps(pe(2.0)) {
            let lhs = map.eval(&xs);
            let rhs = map.eval(&x).compose_perm(&sigma).unwrap();
            worst = worst.max(max_abs_diff(&lhs, &rhs));
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn rank_reindexes_under_permutations_without_ties() {
    for trial in 0..1000u64 {
        let mut rng = trial_rng(SEED, 10_000 + trial);
        let x = random_gaussian(16, &mut rng);
        let sigma = random_perm(16, &mut rng);
        let before = rank_sequence(&x);
        let after = rank_sequence(&x.compose_perm(&sigma).unwrap());
        for (n, &s) in sigma.iter().enumerate() {
            assert_eq!(after[&(n + 1)], before[&s]);
        }
    }
}

// Γ against an independent rank computed by counting strictly larger moduli.
#[test]
fn kalton_rank_matches_a_counting_oracle() {
    for trial in 0..1000u64 {
        let mut rng = trial_rng(SEED, 20_000 + trial);
        let x = random_gaussian(12, &mut rng);
        let image = eval_kalton_rank(&x, pe(2.0));
        for (k, v) in x.iter() {
            let larger = x.iter().filter(|(_, w)| w.norm() > v.norm()).count();
            let expected = v * ((larger + 1) as f64).ln();
            assert!((image.get(k) - expected).norm() <= 1e-15 * v.norm().max(1.0));
        }
    }
}

#[test]
fn lipschitz_family_reduces_to_omega_and_gamma() {
    for p in [1.0, 2.0, 3.5] {
        let p = pe(p);
        let s = CentralizerSpec::preset(LipschitzPreset::S, p);
        let t = CentralizerSpec::preset(LipschitzPreset::T, p);
        for trial in 0..1000u64 {
            let mut rng = trial_rng(SEED, 30_000 + trial);
            let x = random_gaussian(10, &mut rng);
            assert_eq!(s.eval(&x), eval_kalton_peck(&x, p));
            assert_eq!(t.eval(&x), eval_kalton_rank(&x, p));
        }
    }
}

#[test]
fn holder_split_reproduces_the_norm_product() {
    for (p, q) in [(2.0, 1.0), (4.0, 2.0), (1.0, 0.5)] {
        let (p, q) = (pe(p), pe(q));
        let s = PExp::conjugate_for_shift(p, q).unwrap();
        for trial in 0..1000u64 {
            let mut rng = trial_rng(SEED, 40_000 + trial);
            let x = random_gaussian(20, &mut rng).abs();
            let (a, b) = holder_split(&x, p, q).unwrap();
            assert!(a.mul(&b).unwrap().sub(&x).unwrap().sup_norm() <= 1e-14 * x.sup_norm());
            let lhs = x.norm(q);
            let rhs = a.norm(s) * b.norm(p);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs, "p={} q={}: {lhs} vs {rhs}", p.value(), q.value());
        }
    }
}

#[test]
fn twisted_sum_satisfies_the_quasi_triangle_inequality() {
    let dim = 12;
    let omega = CentralizerSpec::kalton_peck(pe(2.0));
    let h = omega.handle();
    let points: Vec<(TwistedPoint, TwistedPoint)> = (0..1000u64)
        .map(|trial| {
            let mut rng = trial_rng(SEED, 50_000 + trial);
            let point = |rng: &mut ChaCha8Rng| {
                let y = random_gaussian(dim, rng);
                let x = random_gaussian(dim, rng).scale_real(rng.random_range(0.01..10.0));
                TwistedPoint::new(y, x, h.clone()).unwrap()
            };
            (point(&mut rng), point(&mut rng))
        })
        .collect();
    let pairs: Vec<(CSeq, CSeq)> = points.iter().map(|(a, b)| (a.x().clone(), b.x().clone())).collect();
    let q_hat = quasilinearity_defect(&omega, &pairs).unwrap();
    let k = 1.0 + q_hat;
    for (a, b) in &points {
        let lhs = twisted_quasinorm(&a.add(b).unwrap());
        let rhs = k * (twisted_quasinorm(a) + twisted_quasinorm(b));
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }
}

#[test]
fn quasilinearity_defect_is_finite_for_every_map() {
    let pairs: Vec<(CSeq, CSeq)> = (0..200u64)
        .map(|t| {
            let mut rng = trial_rng(SEED, 60_000 + t);
            (random_gaussian(16, &mut rng), random_gaussian(16, &mut rng))
        })
        .collect();
    for map in all_maps(pe(2.0)).into_iter().chain(shifted_maps()) {
        let q = quasilinearity_defect(&map, &pairs).unwrap();
        assert!(q.is_finite() && q > 0.0, "{}: {q}", map.label());
    }
    let zero = CSeq::zeros(16).unwrap();
    let omega = CentralizerSpec::kalton_peck(pe(2.0));
    assert_eq!(quasilinearity_defect(&omega, &[(zero.clone(), zero)]).unwrap(), 0.0);
    assert_eq!(omega.scale(), pe(2.0));
}
