//! Operators on a finite-dimensional Hilbert space: dense complex matrices,
//! singular values, Schatten and Macaev norms, the Lorentz liftability norm
//! of a multiplication operator, rank-one operators and Schmidt expansions.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::centralizer::QuasilinearMap;
use crate::seq::{decreasing_rearrangement, CSeq, PExp, SeqError};

/// Off-diagonal threshold of the Jacobi iteration, relative to the column norms.
pub const JACOBI_TOL: f64 = 1e-13;
/// Sweep cap; one-sided Jacobi converges quadratically, so hitting it means
/// something went wrong.
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("non-finite matrix entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix dimensions must be positive")]
    Empty,
    #[error("jacobi SVD did not converge after {0} sweeps")]
    NonConvergent(usize),
    #[error(transparent)]
    Seq(#[from] SeqError),
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, SpectralError> {
        if rows == 0 || cols == 0 {
            return Err(SpectralError::Empty);
        }
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(SpectralError::DimMismatch(format!(
                "{rows}x{cols} matrix with {} entries",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SpectralError::NonFinite(k / cols, k % cols));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self, SpectralError> {
        CMatrix::new(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n.max(1), n.max(1)).expect("positive size");
        for i in 0..m.rows {
            m.data[i * m.cols + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self, SpectralError> {
        CMatrix::new(rows, cols, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_diag(diag: &[Complex64]) -> Result<Self, SpectralError> {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n)?;
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        if let Some(i) = diag.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SpectralError::NonFinite(i, i));
        }
        Ok(m)
    }

    /// The multiplication operator `x ↦ d·x` on `dim(d)` coordinates.
    pub fn multiplication(d: &CSeq) -> Result<Self, SpectralError> {
        CMatrix::from_diag(&d.to_dense())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// 0-based access.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        CMatrix { rows: self.cols, cols: self.rows, data }
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, SpectralError> {
        if self.cols != other.rows {
            return Err(SpectralError::DimMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (out, b) in data[i * other.cols..(i + 1) * other.cols].iter_mut().zip(row) {
                    *out += a * b;
                }
            }
        }
        Ok(CMatrix { rows: self.rows, cols: other.cols, data })
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, SpectralError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SpectralError::DimMismatch("shape".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(CMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// Applies the matrix to a sequence of dimension `cols`.
    pub fn apply(&self, x: &CSeq) -> Result<CSeq, SpectralError> {
        if x.dim() != self.cols {
            return Err(SpectralError::DimMismatch(format!(
                "{}x{} matrix applied to a vector of dim {}",
                self.rows,
                self.cols,
                x.dim()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for (k, v) in x.iter() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += self.get(i, k - 1) * v;
            }
        }
        Ok(CSeq::from_map_unchecked(self.rows, out.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect()))
    }

    /// Entrywise `(Σ |m_ij|²)^{1/2}`.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Largest modulus off the main diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self.get(i, j).norm());
                }
            }
        }
        m
    }
}

/// Linear map `x ↦ M·x` seen as a (trivially quasilinear) map on sequences.
#[derive(Debug, Clone)]
pub struct MatrixMap {
    pub matrix: CMatrix,
    pub p: PExp,
}

impl QuasilinearMap for MatrixMap {
    fn apply(&self, x: &CSeq) -> CSeq {
        self.matrix.apply(x).expect("matrix map applied to a vector of the wrong dimension")
    }

    fn scale(&self) -> PExp {
        self.p
    }

    fn label(&self) -> String {
        "matrix".to_string()
    }
}

/// Non-increasing singular values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn schatten(&self, p: PExp) -> f64 {
        let seq = CSeq::from_real(self.values.len().max(1), &self.values).expect("singular values are finite");
        seq.norm(p)
    }

    pub fn macaev(&self) -> f64 {
        self.values.iter().enumerate().map(|(n, s)| s / (n + 1) as f64).sum()
    }

    pub fn largest(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Thin SVD `M = U diag(s) V*`, with `s` non-increasing.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Columns of `U`, each of length `rows`.
    pub u: Vec<Vec<Complex64>>,
    pub s: Vec<f64>,
    /// Columns of `V`, each of length `cols`.
    pub v: Vec<Vec<Complex64>>,
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// One-sided (Hestenes) Jacobi on the columns of a tall matrix.
fn jacobi_tall(m: &CMatrix) -> Result<Svd, SpectralError> {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vec<Complex64>> = (0..cols).map(|j| (0..rows).map(|i| m.get(i, j)).collect()).collect();
    let mut v: Vec<Vec<Complex64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect())
        .collect();

    let mut converged = cols < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for i in 0..cols - 1 {
            for j in i + 1..cols {
                let alpha = norm_sqr(&a[i]);
                let beta = norm_sqr(&a[j]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(&a[i], &a[j]);
                let g = gamma.norm();
                if g <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + 1f64.hypot(zeta));
                let c = 1.0 / 1f64.hypot(t);
                let s = c * t;
                rotate(&mut a, i, j, c, s, phase);
                rotate(&mut v, i, j, c, s, phase);
            }
        }
    }
    if !converged {
        return Err(SpectralError::NonConvergent(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<(usize, f64)> = a.iter().map(|col| norm_sqr(col).sqrt()).enumerate().collect();
    order.sort_by(|x, y| y.1.total_cmp(&x.1));
    let mut svd = Svd { u: Vec::with_capacity(cols), s: Vec::with_capacity(cols), v: Vec::with_capacity(cols) };
    for (j, sigma) in order {
        let u = if sigma > 0.0 {
            a[j].iter().map(|x| x / sigma).collect()
        } else {
            vec![Complex64::new(0.0, 0.0); rows]
        };
        svd.u.push(u);
        svd.s.push(sigma);
        svd.v.push(v[j].clone());
    }
    Ok(svd)
}

/// Right-multiplies columns `i, j` by the unitary that first rephases
/// column `j` and then applies the real rotation `(c, s)`.
fn rotate(cols: &mut [Vec<Complex64>], i: usize, j: usize, c: f64, s: f64, phase: Complex64) {
    let (left, right) = cols.split_at_mut(j);
    let (ci, cj) = (&mut left[i], &mut right[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let b = *y * phase;
        let xi = *x;
        *x = xi * c - b * s;
        *y = xi * s + b * c;
    }
}

pub fn svd(m: &CMatrix) -> Result<Svd, SpectralError> {
    if m.rows >= m.cols {
        jacobi_tall(m)
    } else {
        let t = jacobi_tall(&m.adjoint())?;
        Ok(Svd { u: t.v, s: t.s, v: t.u })
    }
}

pub fn singular_values(m: &CMatrix) -> Result<SingularSpectrum, SpectralError> {
    Ok(SingularSpectrum { values: svd(m)?.s })
}

/// `(Σ s_n^p)^{1/p}`.
pub fn schatten_norm(m: &CMatrix, p: PExp) -> Result<f64, SpectralError> {
    Ok(singular_values(m)?.schatten(p))
}

/// `Σ_n s_n / n` over the finite spectrum.
pub fn macaev_norm(m: &CMatrix) -> Result<f64, SpectralError> {
    Ok(singular_values(m)?.macaev())
}

pub fn operator_norm(m: &CMatrix) -> Result<f64, SpectralError> {
    Ok(singular_values(m)?.largest())
}

/// `sup_n d*_n · log(n + 1)`.
pub fn lorentz_log_norm(d: &CSeq) -> f64 {
    decreasing_rearrangement(d)
        .into_iter()
        .enumerate()
        .map(|(k, v)| v * ((k + 2) as f64).ln())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Increasing,
    Flat,
    Decreasing,
}

/// Outcome of the truncated test `max_{n ≥ 2} d*_n log n ≤ cap`.
///
/// A finite truncation cannot certify boundedness on ℕ, so the report also
/// carries the maximum over the last decade of indices `(N/10, N]` against
/// the maximum over `[2, N/10]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub bounded: bool,
    pub cap: f64,
    pub max_term: f64,
    /// Index attaining `max_term`; `None` when every term vanishes.
    pub witness: Option<usize>,
    pub lorentz_norm: f64,
    pub head_max: f64,
    pub tail_max: f64,
    pub trend: Trend,
    pub truncation: usize,
}

pub fn liftability_criterion(d: &CSeq, cap: f64) -> CriterionReport {
    let rearranged = decreasing_rearrangement(d);
    let truncation = d.dim();
    let split = truncation / 10;
    let (mut max_term, mut witness) = (0.0_f64, None);
    let (mut head_max, mut tail_max) = (0.0_f64, 0.0_f64);
    for (k, v) in rearranged.iter().enumerate() {
        let n = k + 1;
        if n < 2 {
            continue;
        }
        let term = v * (n as f64).ln();
        if term > max_term {
            max_term = term;
            witness = Some(n);
        }
        if n <= split {
            head_max = head_max.max(term);
        } else {
            tail_max = tail_max.max(term);
        }
    }
    let trend = if tail_max > head_max {
        Trend::Increasing
    } else if tail_max < head_max {
        Trend::Decreasing
    } else {
        Trend::Flat
    };
    CriterionReport {
        bounded: max_term <= cap,
        cap,
        max_term,
        witness,
        lorentz_norm: lorentz_log_norm(d),
        head_max,
        tail_max,
        trend,
        truncation,
    }
}

/// The matrix of `v ↦ ⟨v, x⟩ y`, i.e. `y x*`.
pub fn rank_one(y: &CSeq, x: &CSeq) -> CMatrix {
    let (yd, xd) = (y.to_dense(), x.to_dense());
    let mut data = Vec::with_capacity(yd.len() * xd.len());
    for yi in &yd {
        for xj in &xd {
            data.push(yi * xj.conj());
        }
    }
    CMatrix { rows: yd.len(), cols: xd.len(), data }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtTerm {
    pub s: f64,
    pub x: CSeq,
    pub y: CSeq,
}

/// `M = Σ s · y⊗x` over the numerically nonzero singular values, with
/// orthonormal `{x}` and `{y}`.
pub fn schmidt_expansion(m: &CMatrix) -> Result<Vec<SchmidtTerm>, SpectralError> {
    let dec = svd(m)?;
    let cutoff = dec.s.first().copied().unwrap_or(0.0) * (m.rows.max(m.cols) as f64) * f64::EPSILON;
    let mut terms = Vec::new();
    for ((s, u), v) in dec.s.iter().zip(&dec.u).zip(&dec.v) {
        if *s <= cutoff || *s == 0.0 {
            continue;
        }
        terms.push(SchmidtTerm {
            s: *s,
            x: CSeq::from_complex(m.cols, v)?,
            y: CSeq::from_complex(m.rows, u)?,
        });
    }
    Ok(terms)
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
    fn diagonal_singular_values() {
        let m = CMatrix::from_diag(&[c(3.0, 0.0), c(0.0, -4.0)]).unwrap();
        let s = singular_values(&m).unwrap();
        assert!((s.values[0] - 4.0).abs() < 1e-15 && (s.values[1] - 3.0).abs() < 1e-15);
        assert_eq!(schatten_norm(&m, pe(1.0)).unwrap(), 7.0);
        assert!((schatten_norm(&m, pe(2.0)).unwrap() - 5.0).abs() < 1e-15);

        let z = CMatrix::zeros(3, 2).unwrap();
        assert_eq!(singular_values(&z).unwrap().values, vec![0.0, 0.0]);
    }

    #[test]
    fn macaev_of_identity() {
        let v = macaev_norm(&CMatrix::identity(4)).unwrap();
        assert!((v - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn wide_matrices_use_the_adjoint() {
        let m = CMatrix::from_real(2, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let s = singular_values(&m).unwrap();
        assert_eq!(s.values.len(), 2);
        assert!((s.values[0] - 2.0).abs() < 1e-15 && (s.values[1] - 1.0).abs() < 1e-15);
        let terms = schmidt_expansion(&m).unwrap();
        assert_eq!(terms.len(), 2);
        assert_eq!(terms[0].x.dim(), 3);
        assert_eq!(terms[0].y.dim(), 2);
    }

    #[test]
    fn non_finite_entries_are_rejected() {
        assert!(matches!(
            CMatrix::new(1, 2, vec![c(1.0, 0.0), c(f64::INFINITY, 0.0)]),
            Err(SpectralError::NonFinite(0, 1))
        ));
        assert!(CMatrix::new(2, 2, vec![c(1.0, 0.0)]).is_err());
        assert!(CMatrix::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn lorentz_examples() {
        let n = 500;
        let invlog: Vec<f64> = (1..=n).map(|k| 1.0 / ((k + 1) as f64).ln()).collect();
        let d = CSeq::from_real(n, &invlog).unwrap();
        assert!((lorentz_log_norm(&d) - 1.0).abs() < 1e-14);

        let e1 = CSeq::unit(10, 1).unwrap();
        assert!((lorentz_log_norm(&e1) - 2f64.ln()).abs() < 1e-15);

        for n in [1usize, 10, 100] {
            let ones = CSeq::indicator(n, n, c(1.0, 0.0)).unwrap();
            assert!((lorentz_log_norm(&ones) - ((n + 1) as f64).ln()).abs() < 1e-14);
        }
    }

    #[test]
    fn criterion_examples() {
        let n = 1000;
        let invn: Vec<f64> = (1..=n).map(|k| 1.0 / (k + 1) as f64).collect();
        let r = liftability_criterion(&CSeq::from_real(n, &invn).unwrap(), 1.0);
        assert!(r.bounded);
        // brute force over the truncation
        let (best_n, best) = (2..=n)
            .map(|k| (k, (k as f64).ln() / (k + 1) as f64))
            .fold((0, 0.0), |acc, t| if t.1 > acc.1 { t } else { acc });
        assert_eq!(r.witness, Some(best_n));
        assert_eq!(best_n, 4);
        assert!((r.max_term - best).abs() < 1e-15);

        let ones = CSeq::indicator(8, 8, c(1.0, 0.0)).unwrap();
        let r = liftability_criterion(&ones, 2.0);
        assert!(!r.bounded);
        assert_eq!(r.witness, Some(8));
        assert!((r.max_term - 8f64.ln()).abs() < 1e-15);

        let invlog: Vec<f64> = (1..=n).map(|k| 1.0 / ((k + 1) as f64).ln()).collect();
        let r = liftability_criterion(&CSeq::from_real(n, &invlog).unwrap(), 1.01);
        assert!(r.bounded && r.max_term < 1.0);

        let r = liftability_criterion(&CSeq::unit(5, 3).unwrap(), 0.1);
        assert!(r.bounded && r.witness.is_none());
    }

    #[test]
    fn rank_one_examples() {
        let e1 = CSeq::unit(3, 1).unwrap();
        let e2 = CSeq::unit(3, 2).unwrap();
        let m = rank_one(&e1, &e2);
        assert_eq!(m.get(0, 1), c(1.0, 0.0));
        assert_eq!(m.frobenius(), 1.0);
        assert!((operator_norm(&m).unwrap() - 1.0).abs() < 1e-15);
        // v ↦ ⟨v, x⟩ y
        let v = CSeq::from_real(3, &[5.0, 7.0, 11.0]).unwrap();
        assert_eq!(m.apply(&v).unwrap(), CSeq::from_real(3, &[7.0]).unwrap());
    }

    #[test]
    fn schmidt_of_rank_one() {
        let y = CSeq::from_complex(3, &[c(1.0, 1.0), c(0.0, 2.0), c(-1.0, 0.0)]).unwrap();
        let x = CSeq::from_complex(2, &[c(0.5, 0.0), c(0.0, -0.5)]).unwrap();
        let m = rank_one(&y, &x);
        let terms = schmidt_expansion(&m).unwrap();
        assert_eq!(terms.len(), 1);
        assert!((terms[0].s - y.norm(pe(2.0)) * x.norm(pe(2.0))).abs() < 1e-13);
    }
}
