//! Liftability diagnostics for multiplication operators.
//!
//! A multiplication operator `d` lifts through a centralizer `Φ` when some
//! linear `L` keeps `‖L x − Φ(d x)‖ ≤ K ‖x‖`. Averaging `L` over all sign
//! vectors turns it into a diagonal map without increasing the defect on
//! sign-closed test families, so every witness here is a diagonal `λ`.
//!
//! Everything in this module works on finite truncations. A small defect is
//! a lower bound on the true one, never a certificate of liftability, and a
//! growing defect along a family is a trend, not a proof of failure.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::centralizer::{shift_centralizer, CentralizerError, CentralizerKind, CentralizerSpec, QuasilinearMap};
use crate::seq::{holder_split, CSeq, PExp, SeqError};
use crate::spectral::{CMatrix, SpectralError};

/// Largest number of vectors for exhaustive sign enumeration.
pub const MAX_RADEMACHER_TERMS: usize = 20;
/// Largest dimension for exact averaging over the sign group.
pub const MAX_CANTOR_DIM: usize = 12;
/// Random probes appended to the family by [`estimate_uniform_defect`].
pub const UNIFORM_RANDOM_PROBES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagError {
    #[error("no test pairs given")]
    EmptyPairs,
    #[error("test family is empty")]
    EmptyFamily,
    #[error("centralizer catalog is empty")]
    EmptyCatalog,
    #[error("{0} vectors exceed the enumeration limit of {MAX_RADEMACHER_TERMS}")]
    TooManyTerms(usize),
    #[error("vectors must satisfy Σ‖x_i‖² ≤ 1, got {0}")]
    NotInUnitBall(f64),
    #[error("dimension {0} exceeds the averaging limit of {MAX_CANTOR_DIM}")]
    TooLarge(usize),
    #[error("operator must be square, got {0}x{1}")]
    NotSquare(usize, usize),
    #[error("multiplier vanishes at index {0}")]
    ZeroEntry(usize),
    #[error("multiplier is not a positive real at index {0}")]
    NotPositive(usize),
    #[error("truncation {n} exceeds the dimension {dim}")]
    BadTruncation { n: usize, dim: usize },
    #[error("internal check failed: {0}")]
    Inconsistent(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Centralizer(#[from] CentralizerError),
}

/// Per-trial generator: trial `k` of a run seeded with `seed` uses
/// `seed + k`, so serial and parallel runs draw the same numbers.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial))
}

/// Complex Gaussian vector on all `dim` coordinates.
pub fn random_gaussian(dim: usize, rng: &mut ChaCha8Rng) -> CSeq {
    let values: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    CSeq::from_complex(dim, &values).expect("gaussian samples are finite")
}

/// Complex Gaussian vector normalized to unit `ℓ_p` norm.
pub fn random_unit(dim: usize, p: PExp, rng: &mut ChaCha8Rng) -> CSeq {
    let x = random_gaussian(dim, rng);
    let n = x.norm(p);
    x.scale_real(1.0 / n)
}

/// All sign flips `v·x`, `v ∈ {±1}^supp(x)`; the orbit is sign-closed.
pub fn sign_orbit(x: &CSeq) -> Result<Vec<CSeq>, DiagError> {
    let support: Vec<usize> = x.support().collect();
    if support.len() > MAX_RADEMACHER_TERMS {
        return Err(DiagError::TooManyTerms(support.len()));
    }
    Ok((0u64..1 << support.len())
        .map(|mask| {
            x.map(|k, v| {
                let bit = support.iter().position(|&s| s == k).expect("support index");
                if mask >> bit & 1 == 1 {
                    -v
                } else {
                    v
                }
            })
        })
        .collect())
}

/// `max ‖Φ(x+y) − Φ(x) − Φ(y)‖ / (‖x‖ + ‖y‖)` over the pairs, a lower
/// bound for the quasilinearity constant. Pairs with `x = y = 0` are skipped.
pub fn quasilinearity_defect(map: &dyn QuasilinearMap, pairs: &[(CSeq, CSeq)]) -> Result<f64, DiagError> {
    if pairs.is_empty() {
        return Err(DiagError::EmptyPairs);
    }
    let p = map.scale();
    pairs
        .par_iter()
        .map(|(x, y)| {
            let denom = x.norm(p) + y.norm(p);
            if denom == 0.0 {
                return Ok(0.0);
            }
            let diff = map.apply(&x.add(y)?).sub(&map.apply(x))?.sub(&map.apply(y))?;
            Ok(diff.norm(p) / denom)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Exact average `2^{-k} Σ_ε ‖Φ(Σ ε_i x_i) − Σ ε_i Φ(x_i)‖` over all sign
/// patterns.
pub fn rademacher_nonlinearity(map: &dyn QuasilinearMap, xs: &[CSeq]) -> Result<f64, DiagError> {
    let k = xs.len();
    if k > MAX_RADEMACHER_TERMS {
        return Err(DiagError::TooManyTerms(k));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let p = map.scale();
    let dim = xs[0].dim();
    if let Some(x) = xs.iter().find(|x| x.dim() != dim) {
        return Err(DiagError::DimMismatch(format!("{} vs {}", x.dim(), dim)));
    }
    let mass: f64 = xs.iter().map(|x| x.norm(p).powi(2)).sum();
    if mass.is_nan() || mass > 1.0 + 1e-12 {
        return Err(DiagError::NotInUnitBall(mass));
    }
    let images: Vec<CSeq> = xs.iter().map(|x| map.apply(x)).collect();
    let dense_x: Vec<Vec<Complex64>> = xs.iter().map(|x| x.to_dense()).collect();
    let dense_f: Vec<Vec<Complex64>> = images.iter().map(|x| x.to_dense()).collect();
    let signed_sum = |mask: u64, parts: &[Vec<Complex64>]| -> CSeq {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for (i, part) in parts.iter().enumerate() {
            let sign = if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            for (a, v) in acc.iter_mut().zip(part) {
                *a += v * sign;
            }
        }
        CSeq::from_complex(dim, &acc).unwrap_or_else(|_| {
            CSeq::from_map_unchecked(dim, acc.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect())
        })
    };
    let values: Vec<f64> = (0u64..1 << k)
        .into_par_iter()
        .map(|mask| {
            let combo = signed_sum(mask, &dense_x);
            let linear = signed_sum(mask, &dense_f);
            map.apply(&combo).sub(&linear).expect("same dimension").norm(p)
        })
        .collect();
    Ok(pairwise_sum(&values) / (1u64 << k) as f64)
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn check_cantor_input(l: &CMatrix) -> Result<usize, DiagError> {
    if l.rows() != l.cols() {
        return Err(DiagError::NotSquare(l.rows(), l.cols()));
    }
    if l.rows() > MAX_CANTOR_DIM {
        return Err(DiagError::TooLarge(l.rows()));
    }
    Ok(l.rows())
}

/// Exact average `2^{-N} Σ_v v⁻¹ L v` over all sign vectors `v ∈ {±1}^N`.
///
/// The sum is reduced pairwise in binary order of the sign patterns, so
/// every off-diagonal entry cancels to exactly zero.
pub fn cantor_average_matrix(l: &CMatrix) -> Result<CMatrix, DiagError> {
    let n = check_cantor_input(l)?;
    let conjugated: Vec<CMatrix> = (0u64..1 << n)
        .map(|mask| {
            let sign = |i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
            let mut m = l.clone();
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, l.get(i, j) * (sign(i) * sign(j)));
                }
            }
            m
        })
        .collect();
    let total = pairwise_matrix_sum(&conjugated);
    Ok(total.scale(Complex64::new(1.0 / (1u64 << n) as f64, 0.0)))
}

fn pairwise_matrix_sum(ms: &[CMatrix]) -> CMatrix {
    if ms.len() == 1 {
        return ms[0].clone();
    }
    let (a, b) = ms.split_at(ms.len() / 2);
    let (sa, sb) = (pairwise_matrix_sum(a), pairwise_matrix_sum(b));
    let data: Vec<Complex64> = sa.data().iter().zip(sb.data()).map(|(x, y)| x + y).collect();
    CMatrix::new(sa.rows(), sa.cols(), data).expect("same shape")
}

/// Diagonal `λ` of the sign-averaged map.
pub fn cantor_average(l: &CMatrix) -> Result<CSeq, DiagError> {
    let avg = cantor_average_matrix(l)?;
    Ok(CSeq::from_complex(avg.rows(), &avg.diagonal())?)
}

/// The diagonal candidate `λ(n) = Φ(d_n e_n)(n)`.
pub fn witness_from_centralizer(d: &CSeq, map: &dyn QuasilinearMap) -> CSeq {
    let dim = d.dim();
    let entries: BTreeMap<usize, Complex64> = d
        .iter()
        .map(|(n, dn)| {
            let single = CSeq::from_map_unchecked(dim, [(n, dn)].into_iter().collect());
            (n, map.apply(&single).get(n))
        })
        .collect();
    CSeq::from_map_unchecked(dim, entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectMode {
    /// `‖λx − Φ(dx)‖ / ‖x‖`
    Lift,
    /// `‖λx − d·Φ(x)‖ / ‖x‖`
    Extend,
}

impl std::str::FromStr for DefectMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lift" => Ok(DefectMode::Lift),
            "extend" => Ok(DefectMode::Extend),
            other => Err(format!("unknown mode `{other}` (expected lift|extend)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub witness: CSeq,
    pub family: Vec<CSeq>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub mode: DefectMode,
    /// Zero test vectors that were skipped.
    pub skipped: usize,
    pub seed: Option<u64>,
}

/// Ratios and their supremum for an arbitrary linear candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectSummary {
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    pub skipped: usize,
}

fn defect_ratios<L>(
    linear: L,
    d: &CSeq,
    map: &dyn QuasilinearMap,
    family: &[CSeq],
    mode: DefectMode,
) -> Result<DefectSummary, DiagError>
where
    L: Fn(&CSeq) -> Result<CSeq, DiagError> + Sync,
{
    if family.is_empty() {
        return Err(DiagError::EmptyFamily);
    }
    let p = map.scale();
    let results: Vec<Option<f64>> = family
        .par_iter()
        .map(|x| {
            if x.dim() != d.dim() {
                return Err(DiagError::DimMismatch(format!("test vector dim {} vs {}", x.dim(), d.dim())));
            }
            let nx = x.norm(p);
            if nx == 0.0 {
                return Ok(None);
            }
            let target = match mode {
                DefectMode::Lift => map.apply(&x.mul(d)?),
                DefectMode::Extend => map.apply(x).mul(d)?,
            };
            Ok(Some(linear(x)?.sub(&target)?.norm(p) / nx))
        })
        .collect::<Result<_, DiagError>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let ratios: Vec<f64> = results.into_iter().flatten().collect();
    if ratios.is_empty() {
        return Err(DiagError::EmptyFamily);
    }
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DefectSummary { ratios, sup_ratio, skipped })
}

/// Defect of the diagonal witness `λ` against `Φ∘d` (lift) or `d∘Φ` (extend).
pub fn lift_defect(
    d: &CSeq,
    map: &dyn QuasilinearMap,
    lambda: &CSeq,
    family: &[CSeq],
    mode: DefectMode,
) -> Result<DefectReport, DiagError> {
    if lambda.dim() != d.dim() {
        return Err(DiagError::DimMismatch(format!("witness dim {} vs {}", lambda.dim(), d.dim())));
    }
    let summary = defect_ratios(|x| Ok(x.mul(lambda)?), d, map, family, mode)?;
    Ok(DefectReport {
        witness: lambda.clone(),
        family: family.to_vec(),
        ratios: summary.ratios,
        sup_ratio: summary.sup_ratio,
        mode,
        skipped: summary.skipped,
        seed: None,
    })
}

/// Defect of a general linear candidate `L` given as a matrix.
pub fn operator_defect(
    l: &CMatrix,
    d: &CSeq,
    map: &dyn QuasilinearMap,
    family: &[CSeq],
    mode: DefectMode,
) -> Result<DefectSummary, DiagError> {
    if l.rows() != d.dim() || l.cols() != d.dim() {
        return Err(DiagError::DimMismatch(format!("operator {}x{} vs dim {}", l.rows(), l.cols(), d.dim())));
    }
    defect_ratios(|x| Ok(l.apply(x)?), d, map, family, mode)
}

fn check_sn_multiplier(d: &CSeq, n: usize) -> Result<(), DiagError> {
    if n > d.dim() {
        return Err(DiagError::BadTruncation { n, dim: d.dim() });
    }
    for i in 1..=n {
        let v = d.get(i);
        if v == Complex64::new(0.0, 0.0) {
            return Err(DiagError::ZeroEntry(i));
        }
        if !(v.im == 0.0 && v.re > 0.0) {
            return Err(DiagError::NotPositive(i));
        }
    }
    Ok(())
}

/// `s_n = Σ_{i ≤ n} d_i⁻¹ e_i` for `n = 1, …, N`.
pub fn sn_test_family(d: &CSeq, n_max: usize) -> Result<Vec<CSeq>, DiagError> {
    check_sn_multiplier(d, n_max)?;
    let two = PExp::new(2.0)?;
    let mut out = Vec::with_capacity(n_max);
    let mut current = CSeq::zeros(d.dim())?;
    let mut expected = 0.0;
    for i in 1..=n_max {
        let di = d.get(i).re;
        current.set(i, Complex64::new(1.0 / di, 0.0))?;
        expected += di.powi(-2);
        let got = current.norm(two).powi(2);
        if (got - expected).abs() > 1e-12 * expected {
            return Err(DiagError::Inconsistent(format!("‖s_{i}‖² = {got}, expected {expected}")));
        }
        out.push(current.clone());
    }
    Ok(out)
}

/// `(‖Φ(d s_n)‖_p², ‖s_n‖_p²)` evaluated directly on the vectors.
pub fn divergence_point(d: &CSeq, map: &dyn QuasilinearMap, n: usize) -> Result<(f64, f64), DiagError> {
    check_sn_multiplier(d, n)?;
    let p = map.scale();
    let s_n = CSeq::from_entries(d.dim(), (1..=n).map(|i| (i, Complex64::new(1.0 / d.get(i).re, 0.0))))?;
    let image = map.apply(&s_n.mul(d)?);
    Ok((image.norm(p).powi(2), s_n.norm(p).powi(2)))
}

/// `n ↦ ‖Φ(d s_n)‖² / ‖s_n‖²` for `n = 1, …, N`.
///
/// For the Kalton–Peck map at `p = 2` the curve is accumulated in one pass
/// from prefix sums, using `‖Ω(y)‖² = Σ |y_i|² (log‖y‖ − log|y_i|)²`; other
/// maps are evaluated point by point.
pub fn divergence_curve(d: &CSeq, spec: &CentralizerSpec, n_max: usize) -> Result<Vec<(usize, f64)>, DiagError> {
    check_sn_multiplier(d, n_max)?;
    if matches!(spec.kind, CentralizerKind::KaltonPeck) && spec.p.value() == 2.0 {
        return Ok(kalton_peck_curve(d, n_max));
    }
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let (num, den) = divergence_point(d, spec, n)?;
            Ok((n, num / den))
        })
        .collect()
}

fn kalton_peck_curve(d: &CSeq, n_max: usize) -> Vec<(usize, f64)> {
    let (mut mass, mut first, mut second, mut inverse) = (0.0, 0.0, 0.0, 0.0);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let dn = d.get(n).re;
        let s = 1.0 / dn;
        let y = dn * s;
        let ly = y.ln();
        mass += y * y;
        first += y * y * ly;
        second += y * y * ly * ly;
        inverse += s * s;
        let l = 0.5 * mass.ln();
        let omega_sq = (l * l * mass - 2.0 * l * first + second).max(0.0);
        out.push((n, omega_sq / inverse));
    }
    out
}

/// Closed form `n log² n / (4 Σ_{i ≤ n} d_i⁻²)` of the Kalton–Peck curve.
pub fn kalton_peck_closed_form(d: &CSeq, n_max: usize) -> Result<Vec<(usize, f64)>, DiagError> {
    check_sn_multiplier(d, n_max)?;
    let mut inverse = 0.0;
    Ok((1..=n_max)
        .map(|n| {
            inverse += d.get(n).re.powi(-2);
            let nf = n as f64;
            (n, nf * nf.ln().powi(2) / (4.0 * inverse))
        })
        .collect())
}

/// Max of `‖Φ(ax) − aΦ(x)‖_p / (‖a‖_∞ ‖x‖_p)` over seeded random `(a, x)`,
/// a lower bound for the centralizer constant.
///
/// Even trials draw a complex Gaussian multiplier normalized to
/// `‖a‖_∞ = 1`; odd trials draw an indicator of a uniformly random subset.
pub fn centralizer_constant_lower(map: &dyn QuasilinearMap, p: PExp, trials: u64, dim: usize, seed: u64) -> f64 {
    (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let x = random_unit(dim, p, &mut rng);
            let a = if trial % 2 == 0 {
                let g = random_gaussian(dim, &mut rng);
                g.scale_real(1.0 / g.sup_norm())
            } else {
                let u = random_gaussian(dim, &mut rng);
                let mask = u.map(|_, v| if v.re > 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
                if mask.is_zero() {
                    CSeq::unit(dim, 1).expect("dim ≥ 1")
                } else {
                    mask
                }
            };
            centralizer_ratio(map, p, &a, &x)
        })
        .reduce(|| 0.0, f64::max)
}

/// `‖Φ(ax) − aΦ(x)‖_p / (‖a‖_∞ ‖x‖_p)`, 0 when the denominator vanishes.
pub fn centralizer_ratio(map: &dyn QuasilinearMap, p: PExp, a: &CSeq, x: &CSeq) -> f64 {
    let denom = a.sup_norm() * x.norm(p);
    if denom == 0.0 {
        return 0.0;
    }
    let ax = x.mul(a).expect("same dimension");
    let diff = map.apply(&ax).sub(&map.apply(x).mul(a).expect("same dimension")).expect("same dimension");
    diff.norm(p) / denom
}

/// Quasilinearity lower bound over seeded random unit pairs.
pub fn quasilinearity_lower(map: &dyn QuasilinearMap, trials: u64, dim: usize, seed: u64) -> Result<f64, DiagError> {
    let p = map.scale();
    let pairs: Vec<(CSeq, CSeq)> = (0..trials)
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            (random_unit(dim, p, &mut rng), random_unit(dim, p, &mut rng))
        })
        .collect();
    quasilinearity_defect(map, &pairs)
}

/// Largest relative deviation from `Φ(cx) = cΦ(x)` over seeded random
/// `x` and complex `c`, together with `‖Φ(0)‖`.
pub fn homogeneity_deviation(map: &dyn QuasilinearMap, dim: usize, samples: u64, seed: u64) -> (f64, f64) {
    let p = map.scale();
    let at_zero = map.apply(&CSeq::zeros(dim).expect("dim ≥ 1")).norm(p);
    let worst = (0..samples)
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let x = random_gaussian(dim, &mut rng);
            let cre: f64 = StandardNormal.sample(&mut rng);
            let cim: f64 = StandardNormal.sample(&mut rng);
            let c = Complex64::new(cre, cim);
            let lhs = map.apply(&x.scale(c));
            let rhs = map.apply(&x).scale(c);
            let scale = rhs.norm(p).max(x.norm(p) * c.norm());
            if scale == 0.0 {
                0.0
            } else {
                lhs.sub(&rhs).expect("same dimension").norm(p) / scale
            }
        })
        .fold(0.0, f64::max);
    (worst, at_zero)
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub centralizer: CentralizerSpec,
    pub defect: f64,
    pub witness: CSeq,
}

#[derive(Debug, Clone)]
pub struct UniformDefectEstimate {
    pub per_centralizer: Vec<CatalogEntry>,
    pub sup: f64,
    pub seed: u64,
    pub family_size: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Coordinatewise median of `Φ(dx)_n / x_n` over the family members with
/// `x_n ≠ 0`, real and imaginary parts taken separately.
pub fn median_witness(d: &CSeq, map: &dyn QuasilinearMap, family: &[CSeq]) -> Result<CSeq, DiagError> {
    let mut candidates: BTreeMap<usize, Vec<Complex64>> = BTreeMap::new();
    for x in family {
        let image = map.apply(&x.mul(d)?);
        for (n, xn) in x.iter() {
            candidates.entry(n).or_default().push(image.get(n) / xn);
        }
    }
    let entries = candidates.into_iter().map(|(n, cs)| {
        let mut re: Vec<f64> = cs.iter().map(|c| c.re).collect();
        let mut im: Vec<f64> = cs.iter().map(|c| c.im).collect();
        (n, Complex64::new(median(&mut re), median(&mut im)))
    });
    Ok(CSeq::from_map_unchecked(d.dim(), entries.collect()))
}

/// Best diagonal defect per catalog centralizer (centralizer witness first,
/// then coordinatewise-median refinement) and the supremum over the catalog.
/// The family is extended by [`UNIFORM_RANDOM_PROBES`] seeded random vectors.
pub fn estimate_uniform_defect(
    d: &CSeq,
    catalog: &[CentralizerSpec],
    family: &[CSeq],
    seed: u64,
) -> Result<UniformDefectEstimate, DiagError> {
    if catalog.is_empty() {
        return Err(DiagError::EmptyCatalog);
    }
    let mut probes = family.to_vec();
    for trial in 0..UNIFORM_RANDOM_PROBES as u64 {
        let mut rng = trial_rng(seed, trial);
        probes.push(random_gaussian(d.dim(), &mut rng));
    }
    let mut per_centralizer = Vec::with_capacity(catalog.len());
    for spec in catalog {
        let initial = witness_from_centralizer(d, spec);
        let first = lift_defect(d, spec, &initial, &probes, DefectMode::Lift)?;
        let refined = median_witness(d, spec, &probes)?;
        let second = lift_defect(d, spec, &refined, &probes, DefectMode::Lift)?;
        let best = if second.sup_ratio < first.sup_ratio { second } else { first };
        per_centralizer.push(CatalogEntry { centralizer: spec.clone(), defect: best.sup_ratio, witness: best.witness });
    }
    let sup = per_centralizer.iter().map(|e| e.defect).fold(0.0, f64::max);
    Ok(UniformDefectEstimate { per_centralizer, sup, seed, family_size: probes.len() })
}

/// Both sides of the Hölder step behind shifting a witness from `ℓ_p` to `ℓ_q`:
/// `‖λx − Φ_q(x)‖_q ≤ ‖x^{q/s}‖_s · ‖λ x^{q/p} − Φ(x^{q/p})‖_p` for `x ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
}

pub fn shift_holder_check(base: &CentralizerSpec, q: PExp, lambda: &CSeq, x: &CSeq) -> Result<HolderCheck, DiagError> {
    let p = base.scale();
    let s = PExp::conjugate_for_shift(p, q)?;
    let shifted = shift_centralizer(base, q)?;
    let (outer, inner) = holder_split(x, p, q)?;
    let lhs = x.mul(lambda)?.sub(&shifted.eval(x))?.norm(q);
    let rhs = outer.norm(s) * inner.mul(lambda)?.sub(&base.eval(&inner))?.norm(p);
    Ok(HolderCheck { lhs, rhs })
}
