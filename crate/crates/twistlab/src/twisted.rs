//! Finite-dimensional twisted sums `Y ⊕_φ X`.
//!
//! A point is a pair `(y, x)` with quasinorm `‖y − φ(x)‖_p + ‖x‖_p`. The
//! embedding `y ↦ (y, 0)` is isometric and the quotient `(y, x) ↦ x` maps
//! the unit ball onto the unit ball.

use num_complex::Complex64;
use thiserror::Error;

use crate::centralizer::{minimal_extension_functional, CentralizerError, CentralizerSpec, QMapHandle};
use crate::seq::{CSeq, PExp, SeqError};
use crate::spectral::CMatrix;

/// Default absolute tolerance for [`pullback_member`].
pub const DEFAULT_PULLBACK_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistedError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Centralizer(#[from] CentralizerError),
}

#[derive(Clone)]
pub struct TwistedPoint {
    y: CSeq,
    x: CSeq,
    map: QMapHandle,
}

impl std::fmt::Debug for TwistedPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwistedPoint")
            .field("y", &self.y)
            .field("x", &self.x)
            .field("map", &self.map.label())
            .finish()
    }
}

impl TwistedPoint {
    pub fn new(y: CSeq, x: CSeq, map: QMapHandle) -> Result<Self, TwistedError> {
        if y.dim() != x.dim() {
            return Err(TwistedError::DimMismatch(format!("y has dim {}, x has dim {}", y.dim(), x.dim())));
        }
        Ok(TwistedPoint { y, x, map })
    }

    pub fn y(&self) -> &CSeq {
        &self.y
    }

    pub fn x(&self) -> &CSeq {
        &self.x
    }

    pub fn map(&self) -> &QMapHandle {
        &self.map
    }

    pub fn scale(&self) -> PExp {
        self.map.scale()
    }

    pub fn add(&self, other: &TwistedPoint) -> Result<TwistedPoint, TwistedError> {
        TwistedPoint::new(self.y.add(&other.y)?, self.x.add(&other.x)?, self.map.clone())
    }

    pub fn scale_by(&self, c: Complex64) -> TwistedPoint {
        TwistedPoint { y: self.y.scale(c), x: self.x.scale(c), map: self.map.clone() }
    }
}

/// `‖(y, x)‖_φ = ‖y − φ(x)‖_p + ‖x‖_p`.
pub fn twisted_quasinorm(z: &TwistedPoint) -> f64 {
    let p = z.scale();
    let fx = z.map.apply(&z.x);
    let diff = z.y.sub(&fx).expect("map preserves dimension");
    diff.norm(p) + z.x.norm(p)
}

/// `y ↦ (y, 0)`.
pub fn embed(y: CSeq, map: QMapHandle) -> TwistedPoint {
    let dim = y.dim();
    TwistedPoint { y, x: CSeq::zeros(dim).expect("positive dim"), map }
}

/// `(y, x) ↦ x`.
pub fn quotient(z: &TwistedPoint) -> CSeq {
    z.x.clone()
}

/// The point `(φ(x), x)`, which attains `inf_y ‖(y, x)‖_φ = ‖x‖`.
pub fn canonical_lift(x: CSeq, map: QMapHandle) -> TwistedPoint {
    let y = map.apply(&x);
    TwistedPoint { y, x, map }
}

/// Membership of `(z, x)` in the pullback `{(z, x) : π(z) = a(x)}`, tested as
/// `‖π(z) − a·x‖₂ ≤ tol`.
pub fn pullback_member(z: &TwistedPoint, x: &CSeq, a: &CMatrix, tol: f64) -> Result<bool, TwistedError> {
    if a.cols() != x.dim() || a.rows() != z.x.dim() {
        return Err(TwistedError::DimMismatch(format!(
            "operator is {}x{}, x has dim {}, twisted point has dim {}",
            a.rows(),
            a.cols(),
            x.dim(),
            z.x.dim()
        )));
    }
    let ax = a.apply(x).map_err(|e| TwistedError::DimMismatch(e.to_string()))?;
    let defect = quotient(z).sub(&ax)?;
    Ok(defect.norm(PExp::new(2.0)?) <= tol)
}

/// Quasinorm `‖z‖_φ + ‖x‖₂` of a pullback pair.
pub fn pullback_quasinorm(z: &TwistedPoint, x: &CSeq) -> f64 {
    twisted_quasinorm(z) + x.norm(PExp::new(2.0).expect("2 is a valid exponent"))
}

/// A point `(t, x)` of `𝕂 ⊕_φ ℓ₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTwistedPoint {
    pub t: Complex64,
    pub x: CSeq,
}

/// `|t − φ(x)| + ‖x‖₁` with `φ` the minimal-extension functional of `base`.
pub fn scalar_twisted_norm(w: &ScalarTwistedPoint, base: &CentralizerSpec) -> Result<f64, TwistedError> {
    let phi = minimal_extension_functional(&w.x, base)?;
    Ok((w.t - phi).norm() + w.x.norm(PExp::new(1.0)?))
}
