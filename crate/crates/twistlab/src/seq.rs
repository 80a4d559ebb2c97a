//! Finitely supported complex sequences and the elementary quasinorm
//! machinery on them.
//!
//! Indices are 1-based. A [`CSeq`] never stores an exact zero, so the
//! support of a sequence is exactly its set of stored keys.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeqError {
    #[error("exponent must be finite and strictly positive, got {0}")]
    BadExponent(f64),
    #[error("index {index} outside [1, {dim}]")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("ambient dimension must be positive")]
    ZeroDimension,
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("entry at index {0} is not a nonnegative real")]
    NotNonnegative(usize),
    #[error("holder split needs q < p (got q = {q}, p = {p})")]
    ExponentOrder { p: f64, q: f64 },
    #[error("permutation of length {len} does not match dimension {dim}")]
    BadPermutation { len: usize, dim: usize },
}

/// A scale exponent `p` in `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PExp(f64);

impl PExp {
    pub fn new(value: f64) -> Result<Self, SeqError> {
        if value.is_finite() && value > 0.0 {
            Ok(PExp(value))
        } else {
            Err(SeqError::BadExponent(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The exponent `s` with `1/q = 1/p + 1/s`, for `q < p`.
    pub fn conjugate_for_shift(p: PExp, q: PExp) -> Result<PExp, SeqError> {
        if q.0 >= p.0 {
            return Err(SeqError::ExponentOrder { p: p.0, q: q.0 });
        }
        PExp::new(1.0 / (1.0 / q.0 - 1.0 / p.0))
    }
}

impl<'de> Deserialize<'de> for PExp {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(de)?;
        PExp::new(v).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for PExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Finitely supported complex sequence on `{1, …, dim}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CSeq {
    entries: BTreeMap<usize, Complex64>,
    dim: usize,
}

impl CSeq {
    /// The zero sequence of the given ambient dimension.
    pub fn zeros(dim: usize) -> Result<Self, SeqError> {
        if dim == 0 {
            return Err(SeqError::ZeroDimension);
        }
        Ok(CSeq { entries: BTreeMap::new(), dim })
    }

    /// Builds a sequence from `(index, value)` pairs. Zeros are dropped and
    /// repeated indices keep the last value.
    pub fn from_entries<I>(dim: usize, entries: I) -> Result<Self, SeqError>
    where
        I: IntoIterator<Item = (usize, Complex64)>,
    {
        let mut seq = CSeq::zeros(dim)?;
        for (index, value) in entries {
            seq.set(index, value)?;
        }
        Ok(seq)
    }

    /// Real-valued shorthand: `values[k]` becomes the entry at index `k + 1`.
    pub fn from_real(dim: usize, values: &[f64]) -> Result<Self, SeqError> {
        if values.len() > dim {
            return Err(SeqError::IndexOutOfRange { index: values.len(), dim });
        }
        CSeq::from_entries(
            dim,
            values.iter().enumerate().map(|(k, &v)| (k + 1, Complex64::new(v, 0.0))),
        )
    }

    pub fn from_complex(dim: usize, values: &[Complex64]) -> Result<Self, SeqError> {
        if values.len() > dim {
            return Err(SeqError::IndexOutOfRange { index: values.len(), dim });
        }
        CSeq::from_entries(dim, values.iter().enumerate().map(|(k, &v)| (k + 1, v)))
    }

    /// The unit vector `e_k`.
    pub fn unit(dim: usize, k: usize) -> Result<Self, SeqError> {
        CSeq::from_entries(dim, [(k, Complex64::new(1.0, 0.0))])
    }

    /// The indicator `c · 1_{[n]}`.
    pub fn indicator(dim: usize, n: usize, c: Complex64) -> Result<Self, SeqError> {
        CSeq::from_entries(dim, (1..=n).map(|k| (k, c)))
    }

    pub fn set(&mut self, index: usize, value: Complex64) -> Result<(), SeqError> {
        if index == 0 || index > self.dim {
            return Err(SeqError::IndexOutOfRange { index, dim: self.dim });
        }
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(SeqError::NonFinite(index));
        }
        if value == Complex64::new(0.0, 0.0) {
            self.entries.remove(&index);
        } else {
            self.entries.insert(index, value);
        }
        Ok(())
    }

    /// Crate-internal builder for arithmetic results: keeps the zero-free
    /// invariant but does not reject non-finite values, which `lp_norm`
    /// reports.
    pub(crate) fn from_map_unchecked(dim: usize, mut entries: BTreeMap<usize, Complex64>) -> Self {
        entries.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        CSeq { entries, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, index: usize) -> Complex64 {
        self.entries.get(&index).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    /// Dense copy of the first `dim` coordinates (index `k` at slot `k - 1`).
    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (k, v) in self.iter() {
            out[k - 1] = v;
        }
        out
    }

    pub fn is_real_nonneg(&self) -> bool {
        self.entries.values().all(|v| v.im == 0.0 && v.re >= 0.0)
    }

    pub fn map<F: Fn(usize, Complex64) -> Complex64>(&self, f: F) -> CSeq {
        CSeq::from_map_unchecked(self.dim, self.iter().map(|(k, v)| (k, f(k, v))).collect())
    }

    pub fn scale(&self, c: Complex64) -> CSeq {
        self.map(|_, v| v * c)
    }

    pub fn scale_real(&self, c: f64) -> CSeq {
        self.map(|_, v| v * c)
    }

    pub fn abs(&self) -> CSeq {
        self.map(|_, v| Complex64::new(v.norm(), 0.0))
    }

    fn check_dims(&self, other: &CSeq) -> Result<(), SeqError> {
        if self.dim != other.dim {
            Err(SeqError::DimMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &CSeq) -> Result<CSeq, SeqError> {
        self.check_dims(other)?;
        let mut out = self.entries.clone();
        for (k, v) in other.iter() {
            *out.entry(k).or_default() += v;
        }
        Ok(CSeq::from_map_unchecked(self.dim, out))
    }

    pub fn sub(&self, other: &CSeq) -> Result<CSeq, SeqError> {
        self.check_dims(other)?;
        let mut out = self.entries.clone();
        for (k, v) in other.iter() {
            *out.entry(k).or_default() -= v;
        }
        Ok(CSeq::from_map_unchecked(self.dim, out))
    }

    /// Entrywise (Hadamard) product.
    pub fn mul(&self, other: &CSeq) -> Result<CSeq, SeqError> {
        self.check_dims(other)?;
        let (small, large) = if self.support_len() <= other.support_len() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(CSeq::from_map_unchecked(
            self.dim,
            small
                .iter()
                .filter_map(|(k, v)| large.entries.get(&k).map(|w| (k, v * w)))
                .collect(),
        ))
    }

    /// `(x∘σ)(n) = x(σ(n))`, with `sigma[n - 1] = σ(n)` a permutation of
    /// `1..=dim`.
    pub fn compose_perm(&self, sigma: &[usize]) -> Result<CSeq, SeqError> {
        if sigma.len() != self.dim {
            return Err(SeqError::BadPermutation { len: sigma.len(), dim: self.dim });
        }
        let mut inverse = vec![0usize; self.dim + 1];
        for (n, &s) in sigma.iter().enumerate() {
            if s == 0 || s > self.dim || inverse[s] != 0 {
                return Err(SeqError::BadPermutation { len: sigma.len(), dim: self.dim });
            }
            inverse[s] = n + 1;
        }
        Ok(CSeq::from_map_unchecked(self.dim, self.iter().map(|(k, v)| (inverse[k], v)).collect()))
    }

    /// Same sequence viewed in a larger (or equal) ambient dimension.
    pub fn with_dim(&self, dim: usize) -> Result<CSeq, SeqError> {
        if let Some((&last, _)) = self.entries.last_key_value() {
            if last > dim {
                return Err(SeqError::IndexOutOfRange { index: last, dim });
            }
        }
        if dim == 0 {
            return Err(SeqError::ZeroDimension);
        }
        Ok(CSeq { entries: self.entries.clone(), dim })
    }

    /// `‖x‖_p`, NaN-propagating; see [`lp_norm`] for the checked version.
    pub fn norm(&self, p: PExp) -> f64 {
        raw_lp_norm(self.entries.values().map(|v| v.norm()), p.value())
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn has_non_finite(&self) -> Option<usize> {
        self.iter().find(|(_, v)| !(v.re.is_finite() && v.im.is_finite())).map(|(k, _)| k)
    }
}

/// Scaled power sum; the running maximum keeps huge and tiny moduli from
/// overflowing or underflowing.
fn raw_lp_norm<I: Iterator<Item = f64> + Clone>(moduli: I, p: f64) -> f64 {
    let max = moduli.clone().fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) });
    if max.is_nan() {
        return f64::NAN;
    }
    if max == 0.0 {
        return 0.0;
    }
    if max.is_infinite() {
        return f64::INFINITY;
    }
    let sum: f64 = if p == 2.0 {
        moduli.map(|v| (v / max) * (v / max)).sum()
    } else {
        moduli.map(|v| (v / max).powf(p)).sum()
    };
    if p == 2.0 {
        max * sum.sqrt()
    } else {
        max * sum.powf(1.0 / p)
    }
}

/// `(Σ |x_i|^p)^{1/p}`.
pub fn lp_norm(x: &CSeq, p: PExp) -> Result<f64, SeqError> {
    if let Some(k) = x.has_non_finite() {
        return Err(SeqError::NonFinite(k));
    }
    Ok(x.norm(p))
}

/// The moduli of `x` sorted non-increasingly (support only).
pub fn decreasing_rearrangement(x: &CSeq) -> Vec<f64> {
    let mut moduli: Vec<f64> = x.entries.values().map(|v| v.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli
}

/// Support indices ordered by decreasing modulus, ties by increasing index.
pub(crate) fn rank_order(x: &CSeq) -> Vec<(usize, f64)> {
    let mut order: Vec<(usize, f64)> = x.iter().map(|(k, v)| (k, v.norm())).collect();
    // the BTreeMap yields increasing indices, so a stable sort keeps ties in index order
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    order
}

/// The rank sequence `r_x` on the support of `x`: the place `|x(n)|`
/// occupies in the decreasing rearrangement, ties broken by index.
pub fn rank_sequence(x: &CSeq) -> BTreeMap<usize, usize> {
    rank_order(x).into_iter().enumerate().map(|(pos, (k, _))| (k, pos + 1)).collect()
}

/// `x = u·|x|` with `u` unimodular on the support.
#[derive(Debug, Clone, PartialEq)]
pub struct Polar {
    /// Phases on the support; [`Polar::phase`] returns 1 elsewhere.
    pub u: CSeq,
    pub modulus: CSeq,
}

impl Polar {
    pub fn phase(&self, index: usize) -> Complex64 {
        match self.u.entries.get(&index) {
            Some(&v) => v,
            None => Complex64::new(1.0, 0.0),
        }
    }
}

pub fn polar_decomposition(x: &CSeq) -> Polar {
    let mut u = BTreeMap::new();
    let mut m = BTreeMap::new();
    for (k, v) in x.iter() {
        let r = v.norm();
        u.insert(k, v / r);
        m.insert(k, Complex64::new(r, 0.0));
    }
    Polar { u: CSeq::from_map_unchecked(x.dim, u), modulus: CSeq::from_map_unchecked(x.dim, m) }
}

/// Splits a nonnegative `x` as `x = a·b` with `a = x^{q/s}`, `b = x^{q/p}`
/// and `1/q = 1/p + 1/s`, so that `‖x‖_q = ‖a‖_s ‖b‖_p`.
pub fn holder_split(x: &CSeq, p: PExp, q: PExp) -> Result<(CSeq, CSeq), SeqError> {
    let s = PExp::conjugate_for_shift(p, q)?;
    if let Some((k, _)) = x.iter().find(|(_, v)| !(v.im == 0.0 && v.re >= 0.0)) {
        return Err(SeqError::NotNonnegative(k));
    }
    let ea = q.value() / s.value();
    let eb = q.value() / p.value();
    let a = x.map(|_, v| Complex64::new(v.re.powf(ea), 0.0));
    let b = x.map(|_, v| Complex64::new(v.re.powf(eb), 0.0));
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pe(v: f64) -> PExp {
        PExp::new(v).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        let x = CSeq::from_real(2, &[3.0, 4.0]).unwrap();
        assert_eq!(lp_norm(&x, pe(2.0)).unwrap(), 5.0);
        assert_eq!(lp_norm(&CSeq::zeros(5).unwrap(), pe(2.0)).unwrap(), 0.0);
        let ones = CSeq::from_real(2, &[1.0, 1.0]).unwrap();
        assert!((lp_norm(&ones, pe(0.5)).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn lp_norm_rejects_non_finite() {
        let x = CSeq::from_real(2, &[1e308, 1e308]).unwrap().scale_real(10.0);
        assert!(matches!(lp_norm(&x, pe(2.0)), Err(SeqError::NonFinite(1))));
        assert!(CSeq::from_real(1, &[f64::NAN]).is_err());
    }

    #[test]
    fn lp_norm_survives_extreme_scales() {
        let x = CSeq::from_real(2, &[3e-200, 4e-200]).unwrap();
        assert!((x.norm(pe(2.0)) / 5e-200 - 1.0).abs() < 1e-14);
        let y = CSeq::from_real(2, &[3e200, 4e200]).unwrap();
        assert!((y.norm(pe(2.0)) / 5e200 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zeros_are_never_stored() {
        let x = CSeq::from_real(4, &[0.0, 1.0, 0.0, -0.0]).unwrap();
        assert_eq!(x.support_len(), 1);
        let d = x.sub(&x).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn bad_indices_and_exponents() {
        assert!(matches!(CSeq::unit(3, 4), Err(SeqError::IndexOutOfRange { .. })));
        assert!(matches!(CSeq::unit(3, 0), Err(SeqError::IndexOutOfRange { .. })));
        assert!(CSeq::zeros(0).is_err());
        assert!(PExp::new(0.0).is_err());
        assert!(PExp::new(f64::INFINITY).is_err());
        assert!(PExp::new(-1.0).is_err());
    }

    #[test]
    fn rearrangement_examples() {
        let x = CSeq::from_real(3, &[0.5, 0.9, 0.5]).unwrap();
        assert_eq!(decreasing_rearrangement(&x), vec![0.9, 0.5, 0.5]);
        assert_eq!(decreasing_rearrangement(&CSeq::unit(9, 7).unwrap()), vec![1.0]);
        let z = CSeq::from_complex(2, &[c(0.0, 2.0), c(-2.0, 0.0)]).unwrap();
        assert_eq!(decreasing_rearrangement(&z), vec![2.0, 2.0]);
    }

    /// Literal transcription of the counting definition of the rank.
    fn rank_by_counting(x: &CSeq) -> BTreeMap<usize, usize> {
        x.support()
            .map(|n| {
                let xn = x.get(n).norm();
                let r = x
                    .support()
                    .filter(|&k| {
                        let xk = x.get(k).norm();
                        xk > xn || (xk == xn && k <= n)
                    })
                    .count();
                (n, r)
            })
            .collect()
    }

    #[test]
    fn rank_examples() {
        let x = CSeq::from_real(3, &[0.5, 0.9, 0.5]).unwrap();
        let expected: BTreeMap<usize, usize> = [(1, 2), (2, 1), (3, 3)].into_iter().collect();
        assert_eq!(rank_by_counting(&x), expected);
        assert_eq!(rank_sequence(&x), expected);

        let flat = CSeq::indicator(6, 5, c(0.3, -0.1)).unwrap();
        let ranks = rank_sequence(&flat);
        assert!(ranks.iter().all(|(k, r)| k == r));

        let e7 = CSeq::unit(10, 7).unwrap();
        assert_eq!(rank_sequence(&e7), [(7, 1)].into_iter().collect());
        assert!(rank_sequence(&CSeq::zeros(3).unwrap()).is_empty());
    }

    #[test]
    fn polar_examples() {
        let p = polar_decomposition(&CSeq::from_real(1, &[-2.0]).unwrap());
        assert_eq!(p.u.get(1), c(-1.0, 0.0));
        assert_eq!(p.modulus.get(1), c(2.0, 0.0));

        let p = polar_decomposition(&CSeq::from_complex(1, &[c(0.0, 3.0)]).unwrap());
        assert_eq!(p.u.get(1), c(0.0, 1.0));
        assert_eq!(p.modulus.get(1), c(3.0, 0.0));

        let p = polar_decomposition(&CSeq::from_complex(2, &[c(1.0, 1.0)]).unwrap());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((p.u.get(1) - c(r, r)).norm() < 1e-15);
        assert!((p.modulus.get(1).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.phase(2), c(1.0, 0.0));
    }

    #[test]
    fn holder_split_examples() {
        let (p, q) = (pe(2.0), pe(1.0));
        let ones = CSeq::from_real(2, &[1.0, 1.0]).unwrap();
        let (a, b) = holder_split(&ones, p, q).unwrap();
        assert_eq!(a, ones);
        assert_eq!(b, ones);
        let s = PExp::conjugate_for_shift(p, q).unwrap();
        assert!((s.value() - 2.0).abs() < 1e-15);
        assert!((a.norm(s) * b.norm(p) - ones.norm(q)).abs() < 1e-14);

        let four = CSeq::from_real(1, &[4.0]).unwrap();
        let (a, b) = holder_split(&four, p, q).unwrap();
        assert_eq!(a.get(1).re, 2.0);
        assert_eq!(b.get(1).re, 2.0);

        let (a, b) = holder_split(&CSeq::zeros(3).unwrap(), p, q).unwrap();
        assert!(a.is_zero() && b.is_zero());
    }

    #[test]
    fn holder_split_errors() {
        let neg = CSeq::from_real(2, &[1.0, -1.0]).unwrap();
        assert!(matches!(holder_split(&neg, pe(2.0), pe(1.0)), Err(SeqError::NotNonnegative(2))));
        let cplx = CSeq::from_complex(1, &[c(1.0, 1.0)]).unwrap();
        assert!(holder_split(&cplx, pe(2.0), pe(1.0)).is_err());
        let ok = CSeq::from_real(1, &[1.0]).unwrap();
        assert!(matches!(holder_split(&ok, pe(2.0), pe(2.0)), Err(SeqError::ExponentOrder { .. })));
        assert!(holder_split(&ok, pe(1.0), pe(2.0)).is_err());
    }

    #[test]
    fn compose_perm_moves_entries() {
        let x = CSeq::from_real(3, &[1.0, 2.0, 3.0]).unwrap();
        // σ = (2, 3, 1): (x∘σ)(n) = x(σ(n))
        let y = x.compose_perm(&[2, 3, 1]).unwrap();
        assert_eq!(y.to_dense(), vec![c(2.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)]);
        assert!(x.compose_perm(&[1, 1, 2]).is_err());
        assert!(x.compose_perm(&[1, 2]).is_err());
    }
}
